#pragma once

#include <cstdint>
#include <vector>

#include "histolearn/core.hpp"
#include "histolearn/recover.hpp"

namespace histolearn {

/// Poisson-weighted medians m_j for j = 0..cutoff-1, cutoff = ceil(ln^2 n).
struct MedianTable {
  std::uint64_t cutoff = 0;
  std::vector<double> medians;
};

/// Adds n / (j ln^4 n) elements at probability j/n for j = 1..ceil(ln^2 n)
/// and scales the existing counts down by the added mass, so the total
/// mass is unchanged. When the added mass would exceed one half (only for
/// very small n) the added counts are scaled down to contribute exactly
/// one half.
GeneralizedHistogram fatten(const GeneralizedHistogram& h, std::uint64_t n);

MedianTable median_table(const GeneralizedHistogram& fattened, std::uint64_t n);

/// A label seen j times gets m_j when 1 <= j < cutoff and j/n otherwise.
/// The reserve is max(0, 1 - assigned); an excess over one is left as is.
LabeledDistribution assign_probabilities(const SampleSet& samples, const MedianTable& medians, std::uint64_t n);

struct LearnResult {
  LabeledDistribution distribution;
  RecoveryResult recovery;
  MedianTable medians;
  /// max(0, assigned mass - 1).
  double excess_mass = 0.0;
};

/// recover_histogram -> fatten -> median_table -> assign_probabilities.
LearnResult learn_detailed(const SampleSet& samples, const Config& config);

LabeledDistribution learn(const SampleSet& samples, const Config& config);

}  // namespace histolearn
