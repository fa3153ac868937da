#include "histolearn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace histolearn {

double truncated_relative_emd(const GeneralizedHistogram& g, const GeneralizedHistogram& h, double tau) {
  if (!(tau > 0.0) || tau > 1.0) throw Error("tau must lie in (0, 1]");
  if (std::abs(g.mass() - h.mass()) > kMassTolerance) throw Error("unbalanced transport");

  const auto a = g.entries();
  const auto b = h.entries();
  const double log_tau = std::log(tau);
  auto position = [log_tau](double x) { return std::max(std::log(x), log_tau); };

  double cost = 0.0;
  std::size_t i = 0, j = 0;
  double left_a = a.empty() ? 0.0 : a[0].x * a[0].count;
  double left_b = b.empty() ? 0.0 : b[0].x * b[0].count;
  while (i < a.size() && j < b.size()) {
    const double moved = std::min(left_a, left_b);
    cost += moved * std::abs(position(a[i].x) - position(b[j].x));
    if (left_a <= left_b) {
      left_b -= left_a;
      if (++i < a.size()) left_a = a[i].x * a[i].count;
    } else {
      left_a -= left_b;
      if (++j < b.size()) left_b = b[j].x * b[j].count;
    }
  }
  // Any residue (at most the 1e-6 imbalance) is left unmatched.
  return cost;
}

double min_relabel_truncated_l1(const LabeledDistribution& p, const LabeledDistribution& q, double tau) {
  auto sorted_desc = [](const LabeledDistribution& d) {
    std::vector<double> v;
    v.reserve(d.size());
    for (const auto& e : d.entries()) v.push_back(e.probability);
    std::sort(v.begin(), v.end(), std::greater<>());
    return v;
  };
  auto a = sorted_desc(p);
  auto b = sorted_desc(q);
  const std::size_t len = std::max(a.size(), b.size());
  a.resize(len, 0.0);
  b.resize(len, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < len; ++i) sum += std::abs(std::max(a[i], tau) - std::max(b[i], tau));
  return sum;
}

double l1_distance(const LabeledDistribution& p, const LabeledDistribution& q) {
  const auto a = p.entries();
  const auto b = q.entries();
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].label < b[j].label)) {
      sum += a[i++].probability;
    } else if (i == a.size() || b[j].label < a[i].label) {
      sum += b[j++].probability;
    } else {
      sum += std::abs(a[i++].probability - b[j++].probability);
    }
  }
  return sum + std::abs(p.reserved_unseen_mass() - q.reserved_unseen_mass());
}

double expected_distinct(const GeneralizedHistogram& h, std::uint64_t k) {
  if (k == 0) throw Error("k must be positive");
  const double kd = static_cast<double>(k);
  double sum = 0.0;
  for (const auto& e : h.entries()) {
    const double x = std::min(e.x, 1.0);
    // 1 - (1 - x)^k without cancellation for small x.
    const double seen = x >= 1.0 ? 1.0 : -std::expm1(kd * std::log1p(-x));
    sum += seen * e.count;
  }
  return sum;
}

double weighted_median(std::span<const WeightedPoint> points) {
  std::vector<WeightedPoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const WeightedPoint& a, const WeightedPoint& b) { return a.value < b.value; });
  double total = 0.0;
  for (const auto& p : sorted) {
    if (!(p.weight >= 0.0) || !std::isfinite(p.weight)) throw Error("median weights must be finite and >= 0");
    total += p.weight;
  }
  if (!(total > 0.0)) throw Error("degenerate median");
  double cumulative = 0.0;
  for (const auto& p : sorted) {
    cumulative += p.weight;
    if (2.0 * cumulative >= total) return p.value;
  }
  return sorted.back().value;
}

namespace {

std::vector<WeightedPoint> poisson_weighted_support(const GeneralizedHistogram& h, std::uint64_t j,
                                                    std::uint64_t n) {
  const double nd = static_cast<double>(n);
  std::vector<WeightedPoint> points;
  points.reserve(h.size());
  for (const auto& e : h.entries()) points.push_back({e.x, e.count * poisson_pmf(nd * e.x, j)});
  return points;
}

double median_of(std::span<const WeightedPoint> points, std::uint64_t j, std::uint64_t n) {
  double total = 0.0;
  for (const auto& p : points) total += p.weight;
  if (total < 1e-300) return static_cast<double>(j) / static_cast<double>(n);
  return weighted_median(points);
}

double deviation(std::span<const WeightedPoint> points, double m) {
  double sum = 0.0;
  for (const auto& p : points) sum += std::abs(p.value - m) * p.weight;
  return sum;
}

}  // namespace

double dev(const GeneralizedHistogram& h, double m, std::uint64_t j, std::uint64_t n) {
  if (n == 0) throw Error("n must be positive");
  return deviation(poisson_weighted_support(h, j, n), m);
}

double poisson_median(const GeneralizedHistogram& h, std::uint64_t j, std::uint64_t n) {
  if (n == 0) throw Error("n must be positive");
  return median_of(poisson_weighted_support(h, j, n), j, n);
}

std::uint64_t median_cutoff(std::uint64_t n) {
  if (n < 2) return 0;
  const double l = std::log(static_cast<double>(n));
  return static_cast<std::uint64_t>(std::ceil(l * l));
}

double opt_estimate(const GeneralizedHistogram& h, std::uint64_t n) {
  if (n == 0) throw Error("n must be positive");
  const std::uint64_t cutoff = median_cutoff(n);
  double total = 0.0;
  for (std::uint64_t j = 0; j < cutoff; ++j) {
    const auto points = poisson_weighted_support(h, j, n);
    total += deviation(points, median_of(points, j, n));
  }
  return total;
}

}  // namespace histolearn
