#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "histolearn/error.hpp"
#include "histolearn/rng.hpp"

namespace histolearn {

// ---------------------------------------------------------------------------
// LabeledDistribution
// ---------------------------------------------------------------------------

/// Map label -> probability, kept sorted by label (byte order).
///
/// Estimator outputs may sum to less than one; the deficit is carried in
/// reserved_unseen_mass. Ground truths carry no reserve.
class LabeledDistribution {
public:
  struct Entry {
    std::string label;
    double probability;
  };

  LabeledDistribution() = default;
  /// Sorts entries by label. Throws on duplicate labels, non-positive or
  /// non-finite probabilities, or a reserve outside [0, 1].
  explicit LabeledDistribution(std::vector<Entry> entries, double reserved_unseen_mass = 0.0);

  std::span<const Entry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  /// 0 for labels not present.
  double probability(std::string_view label) const;
  double reserved_unseen_mass() const noexcept { return reserved_; }
  /// Sum of the per-label probabilities (excludes the reserve).
  double assigned_mass() const noexcept { return assigned_; }
  /// assigned + reserve within tol of one.
  bool is_normalized(double tol = 1e-9) const noexcept;

private:
  std::vector<Entry> entries_;
  double reserved_ = 0.0;
  double assigned_ = 0.0;
};

// ---------------------------------------------------------------------------
// GeneralizedHistogram
// ---------------------------------------------------------------------------

/// Unlabeled map probability -> (possibly fractional) number of elements.
class GeneralizedHistogram {
public:
  struct Entry {
    double x;
    double count;
  };

  GeneralizedHistogram() = default;
  /// Accepts unsorted input. Entries with equal x are merged, zero counts
  /// dropped. Throws if any x is outside (0, 1 + 1e-6] or any count is
  /// negative or non-finite.
  explicit GeneralizedHistogram(std::vector<Entry> entries);

  std::span<const Entry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  /// Total probability mass, sum of x * h(x).
  double mass() const noexcept;
  /// Sum of h(x); the (generalized) support size.
  double support_size() const noexcept;
  /// Every count within 1e-9 of a nonnegative integer.
  bool is_integral() const noexcept;
  double min_x() const;
  double max_x() const;

private:
  std::vector<Entry> entries_;
};

/// Entry counts closer than this to an integer are treated as integral.
inline constexpr double kIntegralTolerance = 1e-9;

/// Tolerance on the total mass of histograms produced by recovery and
/// normalization operations.
inline constexpr double kMassTolerance = 1e-6;

// ---------------------------------------------------------------------------
// Samples and fingerprints
// ---------------------------------------------------------------------------

/// Multiset of labels: label -> occurrence count.
class SampleSet {
public:
  SampleSet() = default;
  /// Throws on zero counts.
  explicit SampleSet(std::map<std::string, std::uint64_t> counts);
  /// Builds counts from a raw list of draws.
  static SampleSet from_draws(std::span<const std::string> draws);

  const std::map<std::string, std::uint64_t>& counts() const noexcept { return counts_; }
  std::uint64_t n() const noexcept { return n_; }
  std::size_t distinct() const noexcept { return counts_.size(); }

  friend bool operator==(const SampleSet&, const SampleSet&) = default;

private:
  std::map<std::string, std::uint64_t> counts_;
  std::uint64_t n_ = 0;
};

/// F_i = number of labels seen exactly i times.
class Fingerprint {
public:
  Fingerprint() = default;
  /// Validates sum_i i * F_i == n.
  Fingerprint(std::map<std::uint64_t, std::uint64_t> entries, std::uint64_t n);

  const std::map<std::uint64_t, std::uint64_t>& entries() const noexcept { return entries_; }
  std::uint64_t n() const noexcept { return n_; }
  /// F_i, zero when absent.
  std::uint64_t at(std::uint64_t i) const;
  /// Number of distinct labels, sum of F_i.
  std::uint64_t distinct() const noexcept;

  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;

private:
  std::map<std::uint64_t, std::uint64_t> entries_;
  std::uint64_t n_ = 0;
};

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

enum class Mode { paper, practical };
enum class GridKind { linear, geometric };

struct Config {
  Mode mode = Mode::practical;
  double B = 0.08;
  double C = 0.05;
  std::optional<std::uint64_t> kappa_override;
  GridKind grid = GridKind::geometric;
  double grid_ratio = 1.1;
  /// Unset means 1 / (n ln n).
  std::optional<double> tau;
  std::uint64_t rng_seed = 0;
  /// Weight each fingerprint residual by 1/sqrt(1 + F_i). Off by default.
  bool weighted_objective = false;

  /// Throws when the exponents violate 0.1 > B > C > B/2 > 0 in paper
  /// mode, or when grid_ratio <= 1.
  void validate() const;
  double tau_for(std::uint64_t n) const;
};

std::string to_string(Mode mode);
std::string to_string(GridKind grid);
Mode parse_mode(std::string_view text);
GridKind parse_grid(std::string_view text);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// e^{-lambda} lambda^j / j!. Exact 1 at (0, 0) and exact 0 at (0, j > 0).
double poisson_pmf(double lambda, std::uint64_t j);

Fingerprint build_fingerprint(const SampleSet& samples);

/// count / n per label. Throws "empty input" on an empty sample.
LabeledDistribution empirical_distribution(const SampleSet& samples);

/// Groups equal probabilities (12 significant digits) into integral
/// histogram entries; each group is placed at the mean of its members so
/// total mass is preserved.
GeneralizedHistogram histogram_of(const LabeledDistribution& dist);

/// Alias-method sampler over a probability vector.
class Sampler {
public:
  /// Throws unless the probabilities are positive and sum to 1 within 1e-9.
  explicit Sampler(std::span<const double> probabilities);
  /// Uses the distribution's entries in label order. Throws if dist carries
  /// reserved mass or is not normalized.
  explicit Sampler(const LabeledDistribution& dist);

  /// Per-atom counts of n draws, in input order.
  std::vector<std::uint64_t> draw_counts(std::uint64_t n, std::uint64_t seed) const;
  std::size_t size() const noexcept { return accept_.size(); }

private:
  std::vector<double> accept_;
  std::vector<std::uint32_t> alias_;
};

/// Pairs per-atom counts (label order of dist) with labels; zero counts
/// are skipped.
SampleSet to_sample_set(const LabeledDistribution& dist, std::span<const std::uint64_t> counts);

/// n i.i.d. draws; a pure function of (dist, n, seed).
SampleSet draw_samples(const LabeledDistribution& dist, std::uint64_t n, std::uint64_t seed);

}  // namespace histolearn
