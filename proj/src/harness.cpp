#include "histolearn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <span>
#include <thread>

#include "json.hpp"

#include "histolearn/baselines.hpp"
#include "histolearn/io.hpp"
#include "histolearn/label.hpp"
#include "histolearn/metrics.hpp"

namespace histolearn {

std::string to_string(Family family) {
  switch (family) {
    case Family::uniform: return "uniform";
    case Family::zipf: return "zipf";
    case Family::two_level: return "two_level";
    case Family::geometric: return "geometric";
    case Family::dirac: return "dirac";
  }
  return "unknown";
}

Family parse_family(std::string_view text) {
  for (auto f : {Family::uniform, Family::zipf, Family::two_level, Family::geometric, Family::dirac}) {
    if (text == to_string(f)) return f;
  }
  throw Error("unknown family '" + std::string(text) + "'");
}

DistributionSpec DistributionSpec::uniform(std::uint64_t m) {
  DistributionSpec s;
  s.family = Family::uniform;
  s.m = m;
  return s;
}

DistributionSpec DistributionSpec::zipf(std::uint64_t m, double exponent) {
  DistributionSpec s;
  s.family = Family::zipf;
  s.m = m;
  s.s = exponent;
  return s;
}

DistributionSpec DistributionSpec::two_level(std::uint64_t n_ref) {
  DistributionSpec s;
  s.family = Family::two_level;
  s.n_ref = n_ref;
  return s;
}

DistributionSpec DistributionSpec::geometric(double rho, std::uint64_t m) {
  DistributionSpec s;
  s.family = Family::geometric;
  s.rho = rho;
  s.m = m;
  return s;
}

DistributionSpec DistributionSpec::dirac() {
  DistributionSpec s;
  s.family = Family::dirac;
  return s;
}

namespace {

std::string compact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string make_label(std::size_t index, std::size_t width) {
  std::string digits = std::to_string(index);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return "e" + digits;
}

}  // namespace

std::string DistributionSpec::params() const {
  switch (family) {
    case Family::uniform: return "m=" + std::to_string(m);
    case Family::zipf: return "m=" + std::to_string(m) + ";s=" + compact(s);
    case Family::two_level: return "n_ref=" + std::to_string(n_ref);
    case Family::geometric: return "rho=" + compact(rho) + ";m=" + std::to_string(m);
    case Family::dirac: return "";
  }
  return "";
}

LabeledDistribution make_distribution(const DistributionSpec& spec) {
  std::vector<double> weights;
  switch (spec.family) {
    case Family::uniform:
      if (spec.m == 0) throw Error("uniform needs m > 0");
      weights.assign(spec.m, 1.0 / static_cast<double>(spec.m));
      break;
    case Family::zipf: {
      if (spec.m == 0) throw Error("zipf needs m > 0");
      if (!(spec.s >= 0.0) || !std::isfinite(spec.s)) throw Error("zipf needs s >= 0");
      weights.resize(spec.m);
      double total = 0.0;
      // Sum smallest terms first.
      for (std::size_t r = spec.m; r >= 1; --r) total += weights[r - 1] = std::pow(static_cast<double>(r), -spec.s);
      for (double& w : weights) w /= total;
      break;
    }
    case Family::two_level: {
      if (spec.n_ref < 11) throw Error("two_level needs n_ref >= 11");
      const double nr = static_cast<double>(spec.n_ref);
      const auto total = static_cast<std::uint64_t>(std::floor(nr / 10.1));
      const auto low = static_cast<std::uint64_t>(std::llround(0.9 * static_cast<double>(total)));
      weights.assign(low, 10.0 / nr);
      weights.resize(total, 11.0 / nr);
      break;
    }
    case Family::geometric: {
      if (spec.m == 0) throw Error("geometric needs m > 0");
      if (!(spec.rho > 0.0 && spec.rho < 1.0)) throw Error("geometric needs rho in (0, 1)");
      weights.resize(spec.m);
      double w = 1.0, total = 0.0;
      for (auto& x : weights) {
        x = w;
        w *= spec.rho;
      }
      for (std::size_t r = spec.m; r >= 1; --r) total += weights[r - 1];
      for (double& x : weights) x /= total;
      break;
    }
    case Family::dirac:
      weights.assign(1, 1.0);
      break;
  }

  // Fold the rounding residue into the largest atom (first one on ties).
  double sum = 0.0, comp = 0.0;
  for (double p : weights) {
    const double y = p - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  const auto largest = std::max_element(weights.begin(), weights.end());
  *largest += 1.0 - sum;

  const std::size_t width = std::max<std::size_t>(4, std::to_string(weights.size()).size());
  std::vector<LabeledDistribution::Entry> entries;
  entries.reserve(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) entries.push_back({make_label(i + 1, width), weights[i]});
  return LabeledDistribution(std::move(entries));
}

// ---------------------------------------------------------------------------
// Truth
// ---------------------------------------------------------------------------

Truth::Truth(const DistributionSpec& spec)
    : spec_(spec),
      distribution_(make_distribution(spec)),
      histogram_(histogram_of(distribution_)),
      sampler_(distribution_) {}

double Truth::opt_estimate(std::uint64_t n) const {
  {
    std::lock_guard lock(mutex_);
    if (auto it = opt_cache_.find(n); it != opt_cache_.end()) return it->second;
  }
  const double value = histolearn::opt_estimate(histogram_, n);
  std::lock_guard lock(mutex_);
  opt_cache_.emplace(n, value);
  return value;
}

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

const EstimatorReport* TrialReport::estimator(std::string_view name) const {
  for (const auto& e : estimators) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

TrialReport run_trial(const Truth& truth, std::uint64_t n, std::uint64_t seed, const Config& config,
                      const TrialOptions& options) {
  TrialReport report;
  report.spec = truth.spec();
  report.n = n;
  report.seed = seed;
  try {
    if (n < 2) throw Error("trials need n >= 2");
    const auto& p = truth.distribution();
    const auto samples = to_sample_set(p, truth.sampler().draw_counts(n, seed));

    using clock = std::chrono::steady_clock;
    auto timed = [&](const std::string& name, auto&& estimate) {
      const auto start = clock::now();
      const LabeledDistribution q = estimate();
      const std::chrono::duration<double, std::milli> elapsed = clock::now() - start;
      report.estimators.push_back(
          {name, l1_distance(q, p), q.assigned_mass(), options.record_runtime ? elapsed.count() : 0.0});
    };

    LearnResult learned;
    timed("learn", [&] {
      learned = learn_detailed(samples, config);
      return learned.distribution;
    });
    timed("empirical", [&] { return empirical_distribution(samples); });
    timed("good_turing", [&] { return good_turing(samples); });

    const auto& h_lp = learned.recovery.histogram;
    report.recovery.lp_objective = learned.recovery.lp_objective;
    report.recovery.tau = config.tau_for(n);
    report.recovery.R_tau_to_truth = truncated_relative_emd(h_lp, truth.histogram(), report.recovery.tau);
    report.opt_estimate_truth = truth.opt_estimate(n);
    report.distinct_extrapolation.k = 5 * n;
    report.distinct_extrapolation.predicted = expected_distinct(h_lp, 5 * n);
    report.distinct_extrapolation.analytic_truth = expected_distinct(truth.histogram(), 5 * n);
  } catch (const std::exception& e) {
    report.error = e.what();
    if (report.error.empty()) report.error = "unknown error";
  }
  return report;
}

TrialReport run_trial(const DistributionSpec& spec, std::uint64_t n, std::uint64_t seed, const Config& config,
                      const TrialOptions& options) {
  std::optional<Truth> truth;
  try {
    truth.emplace(spec);
  } catch (const std::exception& e) {
    TrialReport report;
    report.spec = spec;
    report.n = n;
    report.seed = seed;
    report.error = e.what();
    return report;
  }
  return run_trial(*truth, n, seed, config, options);
}

std::string to_json(const TrialReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["spec"] = {{"family", to_string(r.spec.family)}, {"params", r.spec.params()}};
  j["n"] = r.n;
  j["seed"] = r.seed;
  j["status"] = r.ok() ? "ok" : "failed";
  if (!r.ok()) j["error"] = r.error;
  ordered_json est = ordered_json::object();
  for (const auto& e : r.estimators) {
    est[e.name] = {{"l1", e.l1}, {"assigned_mass", e.assigned_mass}, {"runtime_ms", e.runtime_ms}};
  }
  j["estimators"] = est;
  j["recovery"] = {{"lp_objective", r.recovery.lp_objective},
                   {"R_tau_to_truth", r.recovery.R_tau_to_truth},
                   {"tau", r.recovery.tau}};
  j["opt_estimate_truth"] = r.opt_estimate_truth;
  j["distinct_extrapolation"] = {{"k", r.distinct_extrapolation.k},
                                 {"predicted", r.distinct_extrapolation.predicted},
                                 {"analytic_truth", r.distinct_extrapolation.analytic_truth}};
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

std::string trial_file_name(const DistributionSpec& spec, std::uint64_t n, std::uint64_t seed) {
  const std::string key = to_string(spec.family) + "|" + spec.params() + "|" + std::to_string(n) + "|" +
                          std::to_string(seed);
  std::uint64_t hash = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : key) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "trial_%016llx.json", static_cast<unsigned long long>(hash));
  return buf;
}

namespace {

void write_summary(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << "family,params,n,estimator,mean_l1,se_l1,mean_runtime_ms,trials\n";
  for (const auto& r : rows) {
    out << r.family << ',' << r.params << ',' << r.n << ',' << r.estimator << ',' << io::format_double(r.mean_l1)
        << ',' << io::format_double(r.se_l1) << ',' << io::format_double(r.mean_runtime_ms) << ',' << r.trials
        << '\n';
  }
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::vector<SummaryRow> summarize(const SweepItem& item, std::span<const TrialReport> trials) {
  std::vector<SummaryRow> rows;
  for (const char* name : {"learn", "empirical", "good_turing"}) {
    SummaryRow row{to_string(item.spec.family), item.spec.params(), item.n, name, 0.0, 0.0, 0.0, 0};
    std::vector<double> l1;
    double runtime = 0.0;
    for (const auto& t : trials) {
      if (!t.ok()) continue;
      if (const auto* e = t.estimator(name)) {
        l1.push_back(e->l1);
        runtime += e->runtime_ms;
      }
    }
    row.trials = l1.size();
    if (!l1.empty()) {
      const double k = static_cast<double>(l1.size());
      double mean = 0.0;
      for (double v : l1) mean += v;
      mean /= k;
      row.mean_l1 = mean;
      row.mean_runtime_ms = runtime / k;
      if (l1.size() > 1) {
        double ss = 0.0;
        for (double v : l1) ss += (v - mean) * (v - mean);
        row.se_l1 = std::sqrt(ss / (k - 1.0) / k);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

ExperimentSummary run_experiment(const std::vector<SweepItem>& sweep, const Config& config,
                                 const std::filesystem::path& output_dir, const ExperimentOptions& options) {
  config.validate();
  std::filesystem::create_directories(output_dir);

  struct Job {
    std::size_t item;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  std::vector<std::size_t> first_job(sweep.size() + 1, 0);
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    first_job[i] = jobs.size();
    for (std::uint64_t r = 0; r < sweep[i].replicates; ++r) jobs.push_back({i, Rng::derive_seed(config.rng_seed, r)});
  }
  first_job[sweep.size()] = jobs.size();

  // Truths are built lazily, one per sweep item, before any trial uses them.
  std::vector<std::unique_ptr<Truth>> truths(sweep.size());
  std::vector<std::string> truth_errors(sweep.size());
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    if (sweep[i].replicates == 0) continue;
    try {
      truths[i] = std::make_unique<Truth>(sweep[i].spec);
    } catch (const std::exception& e) {
      truth_errors[i] = e.what();
    }
  }

  ExperimentSummary summary;
  summary.trials.resize(jobs.size());
  std::vector<std::string> write_errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      const auto& job = jobs[j];
      const auto& item = sweep[job.item];
      TrialReport report;
      if (truths[job.item]) {
        report = run_trial(*truths[job.item], item.n, job.seed, config, options.trial);
      } else {
        report.spec = item.spec;
        report.n = item.n;
        report.seed = job.seed;
        report.error = truth_errors[job.item];
      }
      const auto path = output_dir / trial_file_name(item.spec, item.n, job.seed);
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      out << to_json(report);
      if (!out) write_errors[j] = "cannot write '" + path.string() + "'";
      summary.trials[j] = std::move(report);
    }
  };

  unsigned workers = options.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.workers;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, jobs.size())));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& t = summary.trials[j];
    if (!t.ok()) summary.failures.push_back(trial_file_name(t.spec, t.n, t.seed) + ": " + t.error);
    if (!write_errors[j].empty()) summary.failures.push_back(write_errors[j]);
  }
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const std::span<const TrialReport> trials(summary.trials.data() + first_job[i], first_job[i + 1] - first_job[i]);
    auto rows = summarize(sweep[i], trials);
    summary.rows.insert(summary.rows.end(), rows.begin(), rows.end());
  }
  try {
    write_summary(output_dir / "summary.csv", summary.rows);
  } catch (const std::exception& e) {
    summary.failures.push_back(e.what());
  }
  return summary;
}

}  // namespace histolearn
