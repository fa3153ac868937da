#pragma once

#include "histolearn/core.hpp"

namespace histolearn {

/// Rounds a generalized histogram to an integral one.
///
/// Entries are grouped into dyadic stages x in [2^-(j+1), 2^-j) (x >= 1/2,
/// including 1, is stage 0). Within a stage the non-integral entries are
/// swept by descending x: a count is rounded up while the running surplus
/// diff is <= 0 and down otherwise, with diff += x (rounded - original).
/// The rounded elements are then moved to x * m / (m + diff), m being the
/// stage's original mass, which restores that mass exactly. Integral
/// entries are passed through with their counts snapped to integers.
GeneralizedHistogram round_histogram(const GeneralizedHistogram& g);

}  // namespace histolearn
