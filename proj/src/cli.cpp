#include "histolearn/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "histolearn/baselines.hpp"
#include "histolearn/harness.hpp"
#include "histolearn/io.hpp"
#include "histolearn/label.hpp"
#include "histolearn/metrics.hpp"
#include "histolearn/recover.hpp"
#include "histolearn/round.hpp"

namespace histolearn::cli {

namespace {

constexpr int kUsageError = 1;
constexpr int kComputationError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigFlags {
  std::string mode = "practical";
  double B = 0.08;
  double C = 0.05;
  std::optional<std::uint64_t> kappa;
  std::string grid = "geometric";
  double grid_ratio = 1.1;
  std::optional<double> tau;
  std::uint64_t seed = 0;
  bool weighted = false;

  void attach(CLI::App& app) {
    app.add_option("--mode", mode, "Threshold mode")->check(CLI::IsMember({"paper", "practical"}));
    app.add_option("--B", B, "Paper-mode exponent for the LP region");
    app.add_option("--C", C, "Paper-mode exponent for the gap width");
    app.add_option("--kappa", kappa, "Override the LP region size")->check(CLI::PositiveNumber);
    app.add_option("--grid", grid, "Probability grid")->check(CLI::IsMember({"linear", "geometric"}));
    app.add_option("--grid-ratio", grid_ratio, "Geometric grid ratio");
    app.add_option("--tau", tau, "Truncation threshold");
    app.add_option("--seed", seed, "Random seed");
    app.add_flag("--weighted", weighted, "Weight fingerprint residuals by 1/sqrt(1+F_i)");
  }

  Config build() const {
    Config c;
    c.mode = parse_mode(mode);
    c.B = B;
    c.C = C;
    c.kappa_override = kappa;
    c.grid = parse_grid(grid);
    c.grid_ratio = grid_ratio;
    c.tau = tau;
    c.rng_seed = seed;
    c.weighted_objective = weighted;
    try {
      c.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

// Writes to the --out file when given, else to the data stream.
void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(out);
    out.flush();
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot open '" + path + "' for writing");
  write(file);
  file.flush();
  if (!file) throw Error("failed writing '" + path + "'");
}

unsigned default_workers() {
  if (const char* env = std::getenv("HISTOLEARN_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

std::string recovery_json(const RecoveryResult& r, const Config& config) {
  nlohmann::ordered_json j;
  j["lp_objective"] = r.lp_objective;
  j["kappa"] = r.thresholds.kappa;
  j["kappa2"] = r.thresholds.kappa2;
  j["grid_size"] = r.grid_size;
  j["mode"] = to_string(config.mode);
  return j.dump(2) + "\n";
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learn discrete distributions from samples via fingerprint-matching histogram recovery.",
               "histolearn"};
  app.require_subcommand(1);
  app.fallthrough(false);

  std::string in_path, out_path;
  ConfigFlags flags;
  std::function<void()> action;

  // fingerprint
  auto* fp_cmd = app.add_subcommand("fingerprint", "Print F_i (count -> number of labels) of a samples file");
  fp_cmd->add_option("--in", in_path, "Samples file")->required();
  fp_cmd->add_option("--out", out_path, "Output file");
  fp_cmd->callback([&] {
    action = [&] {
      const auto fp = build_fingerprint(io::read_samples(in_path));
      emit(out_path, out, [&](std::ostream& os) {
        for (const auto& [i, f] : fp.entries()) os << i << '\t' << f << '\n';
      });
    };
  });

  // recover
  auto* rec_cmd = app.add_subcommand("recover", "Recover the unlabeled histogram from samples");
  rec_cmd->add_option("--in", in_path, "Samples file")->required();
  rec_cmd->add_option("--out", out_path, "Histogram output; diagnostics go to <out>.json");
  flags.attach(*rec_cmd);
  rec_cmd->callback([&] {
    action = [&] {
      const auto config = flags.build();
      const auto result = recover_histogram(build_fingerprint(io::read_samples(in_path)), config);
      emit(out_path, out, [&](std::ostream& os) { io::write_histogram(os, result.histogram); });
      const auto diagnostics = recovery_json(result, config);
      if (out_path.empty()) {
        err << diagnostics;
      } else {
        emit(out_path + ".json", out, [&](std::ostream& os) { os << diagnostics; });
      }
    };
  });

  // learn
  auto* learn_cmd = app.add_subcommand("learn", "Learn a labeled distribution from samples");
  learn_cmd->add_option("--in", in_path, "Samples file")->required();
  learn_cmd->add_option("--out", out_path, "Output TSV");
  flags.attach(*learn_cmd);
  learn_cmd->callback([&] {
    action = [&] {
      const auto config = flags.build();
      const auto result = learn_detailed(io::read_samples(in_path), config);
      if (result.excess_mass > 0.0) {
        err << "warning: assigned mass exceeds one by " << io::format_double(result.excess_mass) << '\n';
      }
      emit(out_path, out, [&](std::ostream& os) { io::write_distribution(os, result.distribution); });
    };
  });

  // baseline
  std::string method;
  auto* base_cmd = app.add_subcommand("baseline", "Empirical or Good-Turing estimate from samples");
  base_cmd->add_option("--method", method, "Estimator")
      ->required()
      ->check(CLI::IsMember({"empirical", "good-turing"}));
  base_cmd->add_option("--in", in_path, "Samples file")->required();
  base_cmd->add_option("--out", out_path, "Output TSV");
  base_cmd->callback([&] {
    action = [&] {
      const auto samples = io::read_samples(in_path);
      const auto dist = method == "empirical" ? empirical_distribution(samples) : good_turing(samples);
      emit(out_path, out, [&](std::ostream& os) { io::write_distribution(os, dist); });
    };
  });

  // round
  auto* round_cmd = app.add_subcommand("round", "Round a generalized histogram to an integral one");
  round_cmd->add_option("--in", in_path, "Histogram file")->required();
  round_cmd->add_option("--out", out_path, "Output histogram file");
  round_cmd->callback([&] {
    action = [&] {
      const auto rounded = round_histogram(io::read_histogram(in_path));
      emit(out_path, out, [&](std::ostream& os) { io::write_histogram(os, rounded); });
    };
  });

  // extrapolate
  std::string hist_path;
  std::uint64_t k = 0;
  std::optional<std::uint64_t> n_flag;
  bool force = false;
  auto* ext_cmd = app.add_subcommand("extrapolate", "Expected number of distinct labels in k draws");
  auto* ext_in = ext_cmd->add_option("--in", in_path, "Samples file (histogram is recovered)");
  auto* ext_hist = ext_cmd->add_option("--hist", hist_path, "Histogram file to use directly");
  ext_in->excludes(ext_hist);
  ext_cmd->add_option("--k", k, "Target sample size")->required()->check(CLI::PositiveNumber);
  ext_cmd->add_option("--n", n_flag, "Sample size behind --hist")->check(CLI::PositiveNumber);
  ext_cmd->add_flag("--force", force, "Allow k > n ln n");
  ext_cmd->add_option("--out", out_path, "Output file");
  flags.attach(*ext_cmd);
  ext_cmd->callback([&] {
    action = [&] {
      if (in_path.empty() && hist_path.empty()) throw UsageError("extrapolate needs --in or --hist");
      const auto config = flags.build();
      GeneralizedHistogram h;
      std::optional<std::uint64_t> n = n_flag;
      if (!in_path.empty()) {
        const auto samples = io::read_samples(in_path);
        n = samples.n();
        h = recover_histogram(build_fingerprint(samples), config).histogram;
      } else {
        h = io::read_histogram(hist_path);
      }
      if (!force) {
        if (!n) throw UsageError("extrapolate --hist needs --n (or --force) to check the range of k");
        const double nd = static_cast<double>(*n);
        if (static_cast<double>(k) > nd * std::log(nd)) {
          throw Error("k = " + std::to_string(k) + " exceeds n ln n = " + io::format_double(nd * std::log(nd)) +
                      "; extrapolation that far is unreliable (use --force to override)");
        }
      }
      const double value = expected_distinct(h, k);
      emit(out_path, out, [&](std::ostream& os) { os << "expected_distinct\t" << io::format_double(value) << '\n'; });
    };
  });

  // eval
  std::string truth_path, est_path;
  double eval_tau = 0.0;
  auto* eval_cmd = app.add_subcommand("eval", "Compare an estimate against a truth distribution");
  eval_cmd->add_option("--truth", truth_path, "Truth TSV")->required();
  eval_cmd->add_option("--est", est_path, "Estimate TSV")->required();
  eval_cmd->add_option("--tau", eval_tau, "Truncation for the min-relabel distance")->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--out", out_path, "Output file");
  eval_cmd->callback([&] {
    action = [&] {
      const auto truth = io::read_distribution(truth_path);
      const auto est = io::read_distribution(est_path);
      nlohmann::ordered_json j;
      j["l1"] = l1_distance(truth, est);
      j["min_relabel_l1"] = min_relabel_truncated_l1(truth, est, eval_tau);
      emit(out_path, out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    };
  });

  // simulate
  std::string family = "uniform";
  DistributionSpec spec;
  std::uint64_t sim_n = 0, trials = 20;
  unsigned workers = default_workers();
  bool record_runtime = false;
  auto* sim_cmd = app.add_subcommand("simulate", "Run seeded Monte-Carlo trials and write reports");
  sim_cmd->add_option("--family", family, "Distribution family")
      ->check(CLI::IsMember({"uniform", "zipf", "two_level", "geometric", "dirac"}));
  sim_cmd->add_option("--m", spec.m, "Support size");
  sim_cmd->add_option("--s", spec.s, "Zipf exponent");
  sim_cmd->add_option("--n-ref", spec.n_ref, "two_level reference size");
  sim_cmd->add_option("--rho", spec.rho, "Geometric decay");
  sim_cmd->add_option("--n", sim_n, "Samples per trial")->required()->check(CLI::Range(std::uint64_t{2}, UINT64_MAX));
  sim_cmd->add_option("--trials", trials, "Replicates");
  sim_cmd->add_option("--out", out_path, "Report directory")->required();
  sim_cmd->add_option("--workers", workers, "Concurrent trials (default $HISTOLEARN_WORKERS or 1)");
  sim_cmd->add_flag("--record-runtime", record_runtime, "Store measured runtimes in the reports");
  flags.attach(*sim_cmd);
  sim_cmd->callback([&] {
    action = [&] {
      const auto config = flags.build();
      spec.family = parse_family(family);
      ExperimentOptions options;
      options.workers = workers;
      options.trial.record_runtime = record_runtime;
      const auto summary = run_experiment({{spec, sim_n, trials}}, config, out_path, options);
      out << "family,params,n,estimator,mean_l1,se_l1,mean_runtime_ms,trials\n";
      for (const auto& r : summary.rows) {
        out << r.family << ',' << r.params << ',' << r.n << ',' << r.estimator << ','
            << io::format_double(r.mean_l1) << ',' << io::format_double(r.se_l1) << ','
            << io::format_double(r.mean_runtime_ms) << ',' << r.trials << '\n';
      }
      for (const auto& f : summary.failures) err << "failed: " << f << '\n';
      if (!summary.failures.empty()) throw Error(std::to_string(summary.failures.size()) + " trial(s) failed");
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kUsageError;
  }

  try {
    if (action) action();
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kComputationError;
  }
}

int dispatch(int argc, const char* const* argv) { return dispatch(argc, argv, std::cout, std::cerr); }

}  // namespace histolearn::cli
