#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "histolearn/core.hpp"

namespace histolearn {

/// A value with a nonnegative weight; the weighted multiset S_h.
struct WeightedPoint {
  double value;
  double weight;
};

/// Truncated relative earthmover distance R_tau(g, h).
///
/// Moving a unit of probability mass from x to y costs
/// |ln max(x, tau) - ln max(y, tau)|. That cost is |f(x) - f(y)| for the
/// monotone f(x) = ln max(x, tau), so on the line the optimal plan is the
/// quantile (sorted) coupling, computed here in one merge pass.
///
/// Throws "unbalanced transport" when the masses differ by more than 1e-6.
double truncated_relative_emd(const GeneralizedHistogram& g, const GeneralizedHistogram& h, double tau);

/// min over relabelings of sum_i |max(p_i, tau) - max(q_i, tau)|, attained
/// by matching both probability lists in sorted order (shorter list padded
/// with zeros).
double min_relabel_truncated_l1(const LabeledDistribution& p, const LabeledDistribution& q, double tau);

/// sum over the label union of |p - q| (missing labels count as 0), plus
/// |reserve_p - reserve_q| for the pooled unseen mass of each side.
double l1_distance(const LabeledDistribution& p, const LabeledDistribution& q);

/// Expected number of distinct elements in k draws:
/// sum_x (1 - (1 - x)^k) h(x).
double expected_distinct(const GeneralizedHistogram& h, std::uint64_t k);

/// Left weighted median: the smallest value v whose cumulative weight
/// (points <= v) reaches half the total. Throws "degenerate median" when
/// the total weight is zero.
double weighted_median(std::span<const WeightedPoint> points);

/// dev_{j,n}(h, m) = sum_x |x - m| h(x) poi(nx, j).
double dev(const GeneralizedHistogram& h, double m, std::uint64_t j, std::uint64_t n);

/// m_{h,j,n}: weighted median of the support of h with weights
/// h(x) poi(nx, j). Falls back to j/n when the total weight is below
/// 1e-300.
double poisson_median(const GeneralizedHistogram& h, std::uint64_t j, std::uint64_t n);

/// ceil(ln^2 n), the count cutoff between the median and empirical regimes.
std::uint64_t median_cutoff(std::uint64_t n);

/// sum_{j < ceil(ln^2 n)} dev(h, m_{h,j,n}, j, n); estimates the best
/// expected l1 error of any labeler that knows h.
double opt_estimate(const GeneralizedHistogram& h, std::uint64_t n);

}  // namespace histolearn
