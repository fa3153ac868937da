#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "histolearn/core.hpp"

namespace histolearn {

enum class Family { uniform, zipf, two_level, geometric, dirac };

std::string to_string(Family family);
Family parse_family(std::string_view text);

/// Synthetic distribution family and its parameters. Only the fields
/// relevant to the family are read.
struct DistributionSpec {
  Family family = Family::uniform;
  /// Support size (uniform, zipf, geometric).
  std::uint64_t m = 0;
  /// Zipf exponent.
  double s = 1.0;
  /// two_level: 90% of about n_ref/10.1 elements at 10/n_ref, 10% at 11/n_ref.
  std::uint64_t n_ref = 0;
  /// Geometric decay ratio, in (0, 1).
  double rho = 0.5;

  static DistributionSpec uniform(std::uint64_t m);
  static DistributionSpec zipf(std::uint64_t m, double s);
  static DistributionSpec two_level(std::uint64_t n_ref);
  static DistributionSpec geometric(double rho, std::uint64_t m);
  static DistributionSpec dirac();

  /// e.g. "m=1000;s=1"; empty for dirac.
  std::string params() const;

  friend bool operator==(const DistributionSpec&, const DistributionSpec&) = default;
};

/// Deterministic distribution with labels e0001, e0002, ... (at least four
/// digits). The largest atom absorbs the rounding residue so the total is
/// one. Throws on invalid parameters.
LabeledDistribution make_distribution(const DistributionSpec& spec);

/// A ground truth with its histogram and sampler built once, for reuse
/// across trials. opt_estimate values are memoized per n.
class Truth {
public:
  explicit Truth(const DistributionSpec& spec);

  const DistributionSpec& spec() const noexcept { return spec_; }
  const LabeledDistribution& distribution() const noexcept { return distribution_; }
  const GeneralizedHistogram& histogram() const noexcept { return histogram_; }
  const Sampler& sampler() const noexcept { return sampler_; }
  double opt_estimate(std::uint64_t n) const;

private:
  DistributionSpec spec_;
  LabeledDistribution distribution_;
  GeneralizedHistogram histogram_;
  Sampler sampler_;
  mutable std::mutex mutex_;
  mutable std::map<std::uint64_t, double> opt_cache_;
};

struct EstimatorReport {
  std::string name;
  double l1 = 0.0;
  double assigned_mass = 0.0;
  double runtime_ms = 0.0;
};

struct TrialReport {
  DistributionSpec spec;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  /// learn, empirical, good_turing, in that order.
  std::vector<EstimatorReport> estimators;
  struct {
    double lp_objective = 0.0;
    double R_tau_to_truth = 0.0;
    double tau = 0.0;
  } recovery;
  double opt_estimate_truth = 0.0;
  struct {
    std::uint64_t k = 0;
    double predicted = 0.0;
    double analytic_truth = 0.0;
  } distinct_extrapolation;
  /// Empty on success; the error message of a failed trial otherwise.
  std::string error;

  bool ok() const noexcept { return error.empty(); }
  const EstimatorReport* estimator(std::string_view name) const;
};

struct TrialOptions {
  /// Store measured wall-clock runtimes. Off by default so that reports
  /// are byte-identical across reruns.
  bool record_runtime = false;
};

/// Draws n samples with the given seed, runs learn, the empirical
/// distribution and Good-Turing, and fills in every report field (the
/// extrapolation uses k = 5n). Errors are captured in report.error.
TrialReport run_trial(const Truth& truth, std::uint64_t n, std::uint64_t seed, const Config& config,
                      const TrialOptions& options = {});
TrialReport run_trial(const DistributionSpec& spec, std::uint64_t n, std::uint64_t seed, const Config& config,
                      const TrialOptions& options = {});

/// Pretty-printed JSON with the report's field names.
std::string to_json(const TrialReport& report);

struct SweepItem {
  DistributionSpec spec;
  std::uint64_t n = 0;
  std::uint64_t replicates = 0;
};

struct SummaryRow {
  std::string family;
  std::string params;
  std::uint64_t n = 0;
  std::string estimator;
  double mean_l1 = 0.0;
  double se_l1 = 0.0;
  double mean_runtime_ms = 0.0;
  /// Successful trials included in the means.
  std::uint64_t trials = 0;
};

struct ExperimentSummary {
  std::vector<SummaryRow> rows;
  std::vector<TrialReport> trials;
  /// Trials that recorded an error, and files that could not be written.
  std::vector<std::string> failures;
};

struct ExperimentOptions {
  /// Concurrent trials; 0 picks the hardware concurrency.
  unsigned workers = 1;
  TrialOptions trial;
};

/// Replicate r of every sweep item uses seed Rng::derive_seed(config.rng_seed, r).
/// Writes trial_<hash>.json per trial and summary.csv into output_dir
/// (created if missing).
ExperimentSummary run_experiment(const std::vector<SweepItem>& sweep, const Config& config,
                                 const std::filesystem::path& output_dir, const ExperimentOptions& options = {});

/// File name of a trial's JSON report; a hash of (spec, n, seed).
std::string trial_file_name(const DistributionSpec& spec, std::uint64_t n, std::uint64_t seed);

}  // namespace histolearn
