#pragma once

#include <cstdint>
#include <vector>

#include "histolearn/core.hpp"

namespace histolearn {

/// Count thresholds that split a fingerprint into the LP-fitted region,
/// a gap, and the empirical region.
struct RecoveryThresholds {
  /// Fingerprint indices 1..kappa are fitted by the LP.
  std::uint64_t kappa = 0;
  std::uint64_t kappa2 = 0;
  /// Largest grid probability, min(1, (kappa + kappa2) / n).
  double x_max = 0.0;
  /// Counts strictly above kappa + 2 kappa2 are taken empirically.
  std::uint64_t empirical_cutoff = 0;
};

/// paper mode: kappa = ceil(n^B), kappa2 = ceil(n^C).
/// practical mode: kappa = ceil(sqrt n), kappa2 = ceil(kappa^0.6).
/// kappa_override replaces kappa in either mode. Throws for n < 2 or an
/// invalid config.
RecoveryThresholds make_thresholds(std::uint64_t n, const Config& config);

/// Strictly increasing probability grid ending at thresholds.x_max.
/// linear: multiples of 1/n^2. geometric: 1/n^2 times powers of
/// config.grid_ratio, with x_max appended.
std::vector<double> make_grid(std::uint64_t n, const RecoveryThresholds& thresholds, const Config& config);

struct RecoveryResult {
  /// LP solution plus the empirical appendage.
  GeneralizedHistogram histogram;
  /// The LP solution alone (grid entries with positive mass).
  GeneralizedHistogram lp_region;
  double lp_objective = 0.0;
  RecoveryThresholds thresholds;
  std::size_t grid_size = 0;
  std::size_t lp_iterations = 0;
  /// sum over i > empirical_cutoff of (i/n) F_i.
  double empirical_mass = 0.0;
};

/// Fits histogram mass on the grid so that the Poisson expectations of
/// fingerprint entries 1..kappa match F in l1, subject to the grid mass
/// equalling one minus the empirical mass, then appends F_i elements at
/// i/n for every i above the empirical cutoff.
///
/// Throws "empirical mass exceeds unity" when the LP is infeasible, and
/// reports solver iteration limits with the LP dimensions.
RecoveryResult recover_histogram(const Fingerprint& fingerprint, const Config& config);

}  // namespace histolearn
