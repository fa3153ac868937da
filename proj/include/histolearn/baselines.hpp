#pragma once

#include "histolearn/core.hpp"

namespace histolearn {

/// Good-Turing: a label seen i times gets (i+1) F_{i+1} / (n F_i), or the
/// empirical i/n when F_{i+1} = 0. The reserve is F_1/n clamped to [0, 1].
/// Throws "empty input" on an empty sample.
LabeledDistribution good_turing(const SampleSet& samples);

}  // namespace histolearn
