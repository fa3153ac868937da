#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "histolearn/harness.hpp"
#include "histolearn/metrics.hpp"
#include "oracles.hpp"

using namespace histolearn;

namespace {

GeneralizedHistogram H(std::vector<GeneralizedHistogram::Entry> e) { return GeneralizedHistogram(std::move(e)); }

LabeledDistribution random_labeled(std::mt19937_64& rng, int max_labels) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int k = 1 + static_cast<int>(rng() % max_labels);
  std::vector<double> w(k);
  double total = 0.0;
  for (auto& x : w) total += x = 0.01 + u(rng) * std::pow(10.0, -3.0 * u(rng));
  std::vector<LabeledDistribution::Entry> e;
  for (int i = 0; i < k; ++i) e.push_back({"l" + std::to_string(rng() % 1000000) + "_" + std::to_string(i), w[i] / total});
  return LabeledDistribution(std::move(e));
}

}  // namespace

TEST_CASE("truncated relative emd examples") {
  const auto half = H({{0.5, 2.0}});
  const auto quarter = H({{0.25, 4.0}});
  CHECK(truncated_relative_emd(half, half, 0.1) == 0.0);
  CHECK(truncated_relative_emd(half, quarter, 1e-6) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(truncated_relative_emd(half, quarter, 0.3) == doctest::Approx(std::log(0.5 / 0.3)).epsilon(1e-12));
  CHECK(truncated_relative_emd(half, quarter, 1.0) == 0.0);
}

TEST_CASE("truncated relative emd errors") {
  const auto half = H({{0.5, 2.0}});
  CHECK_THROWS_WITH_AS(truncated_relative_emd(half, H({{0.5, 1.0}}), 0.1), "unbalanced transport", Error);
  CHECK_NOTHROW(truncated_relative_emd(half, H({{0.5, 2.0 + 1e-7}}), 0.1));
  CHECK_THROWS_AS(truncated_relative_emd(half, half, 0.0), Error);
  CHECK_THROWS_AS(truncated_relative_emd(half, half, 1.5), Error);
}

TEST_CASE("truncated relative emd equals the transportation LP optimum") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const auto g = oracle::random_histogram(rng, 4);
    const auto h = oracle::random_histogram(rng, 4);
    const double tau = std::pow(10.0, -4.0 * u(rng));
    CHECK(std::abs(truncated_relative_emd(g, h, tau) - oracle::transport_cost(g, h, tau)) <= 1e-9);
  }
}

TEST_CASE("truncated relative emd metric axioms") {
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const auto a = oracle::random_histogram(rng, 6);
    const auto b = oracle::random_histogram(rng, 6);
    const auto c = oracle::random_histogram(rng, 6);
    const double tau = std::pow(10.0, -5.0 * u(rng));
    const double ab = truncated_relative_emd(a, b, tau);
    const double ba = truncated_relative_emd(b, a, tau);
    const double bc = truncated_relative_emd(b, c, tau);
    const double ac = truncated_relative_emd(a, c, tau);
    CHECK(ab >= 0.0);
    CHECK(std::abs(ab - ba) <= 1e-9);
    CHECK(ac <= ab + bc + 1e-9);
    CHECK(truncated_relative_emd(a, a, tau) <= 1e-12);
  }
}

TEST_CASE("truncated relative emd is monotone in tau") {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const auto a = oracle::random_histogram(rng, 6);
    const auto b = oracle::random_histogram(rng, 6);
    double t1 = std::pow(10.0, -5.0 * u(rng)), t2 = std::pow(10.0, -5.0 * u(rng));
    if (t1 > t2) std::swap(t1, t2);
    CHECK(truncated_relative_emd(a, b, t2) <= truncated_relative_emd(a, b, t1) + 1e-12);
  }
}

TEST_CASE("min-relabel truncated l1 examples") {
  const LabeledDistribution p({{"a", 0.7}, {"b", 0.3}});
  const LabeledDistribution q({{"c", 0.6}, {"d", 0.4}});
  CHECK(min_relabel_truncated_l1(p, p, 0.2) == 0.0);
  CHECK(min_relabel_truncated_l1(p, q, 0.0) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(min_relabel_truncated_l1(LabeledDistribution({{"a", 1.0}}), LabeledDistribution({{"b", 1.0}}), 0.0) == 0.0);
  // Padding: {0.5, 0.5} vs {1.0, 0}
  CHECK(min_relabel_truncated_l1(LabeledDistribution({{"a", 0.5}, {"b", 0.5}}), LabeledDistribution({{"c", 1.0}}),
                                 0.0) == doctest::Approx(1.0));
}

TEST_CASE("min-relabel l1 never exceeds the best of all relabelings") {
  std::mt19937_64 rng(104);
  for (int t = 0; t < 100; ++t) {
    const auto p = random_labeled(rng, 5);
    const auto q = random_labeled(rng, 5);
    std::vector<double> a, b;
    for (const auto& e : p.entries()) a.push_back(e.probability);
    for (const auto& e : q.entries()) b.push_back(e.probability);
    const std::size_t len = std::max(a.size(), b.size());
    a.resize(len, 0.0);
    b.resize(len, 0.0);
    std::sort(b.begin(), b.end());
    double best = INFINITY;
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < len; ++i) s += std::abs(a[i] - b[i]);
      best = std::min(best, s);
    } while (std::next_permutation(b.begin(), b.end()));
    CHECK(std::abs(min_relabel_truncated_l1(p, q, 0.0) - best) <= 1e-12);
  }
}

TEST_CASE("min-relabel l1 is at most twice the truncated relative emd") {
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const auto p = random_labeled(rng, 8);
    const auto q = random_labeled(rng, 8);
    const double tau = std::pow(10.0, -4.0 * u(rng));
    CHECK(min_relabel_truncated_l1(p, q, tau) <= 2.0 * truncated_relative_emd(histogram_of(p), histogram_of(q), tau) + 1e-9);
  }
}

TEST_CASE("l1 distance") {
  const LabeledDistribution p({{"a", 0.6}, {"b", 0.4}});
  CHECK(l1_distance(p, p) == 0.0);
  CHECK(l1_distance(LabeledDistribution({{"a", 1.0}}), LabeledDistribution({{"b", 1.0}})) == 2.0);
  CHECK(l1_distance(p, LabeledDistribution({{"a", 0.5}, {"b", 0.5}})) == doctest::Approx(0.2).epsilon(1e-12));
  // An unassigned reserve is charged as unmatched mass.
  const LabeledDistribution truth({{"a", 0.5}, {"b", 0.5}});
  const LabeledDistribution est({{"a", 0.5}}, 0.5);
  CHECK(l1_distance(truth, est) == doctest::Approx(1.0));
  CHECK(l1_distance(est, truth) == doctest::Approx(1.0));
}

TEST_CASE("expected distinct count") {
  std::mt19937_64 rng(106);
  for (int t = 0; t < 50; ++t) {
    const auto h = oracle::random_histogram(rng, 10);
    CHECK(std::abs(expected_distinct(h, 1) - 1.0) <= 1e-9);
  }
  CHECK(expected_distinct(H({{0.5, 2.0}}), 2) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(expected_distinct(H({{1.0, 1.0}}), 10) == 1.0);
  CHECK(expected_distinct(H({{1e-12, 1e12}}), 1000) == doctest::Approx(1000.0).epsilon(1e-6));
  CHECK_THROWS_AS(expected_distinct(H({{1.0, 1.0}}), 0), Error);
}

TEST_CASE("expected distinct count matches simulation on Zipf(1000)") {
  const Truth truth(DistributionSpec::zipf(1000, 1.0));
  const std::uint64_t k = 500;
  const int trials = 10000;
  double sum = 0.0, sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto counts = truth.sampler().draw_counts(k, Rng::derive_seed(17, t));
    const double d = static_cast<double>(counts.size() - std::count(counts.begin(), counts.end(), 0));
    sum += d;
    sq += d * d;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sq / trials - mean * mean) / (trials - 1));
  CHECK(std::abs(expected_distinct(truth.histogram(), k) - mean) <= 3.0 * se);
}

TEST_CASE("expected distinct counts are Lipschitz in the truncated emd") {
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const auto g = oracle::random_histogram(rng, 6, 1e-5, 0.3);
    const auto h = oracle::random_histogram(rng, 6, 1e-5, 0.3);
    const std::uint64_t k = 1 + rng() % 50;
    const double tau = std::pow(10.0, -5.0 * u(rng));
    const double lhs = std::abs(expected_distinct(g, k) - expected_distinct(h, k));
    const double kd = static_cast<double>(k);
    // Mass moved below tau changes each unit's contribution by at most k(k-1)tau/2.
    const double bound =
        (0.3 * (kd - 1.0) + 1.0) * truncated_relative_emd(g, h, tau) + kd * (kd - 1.0) * tau / 2.0 + 1e-9;
    CHECK(lhs <= bound);
  }
}

TEST_CASE("weighted median") {
  const std::vector<WeightedPoint> a{{1, 1}, {2, 1}, {3, 1}};
  CHECK(weighted_median(a) == 2);
  const std::vector<WeightedPoint> b{{2, 3}, {1, 1}};
  CHECK(weighted_median(b) == 2);
  const std::vector<WeightedPoint> c{{1, 1}, {2, 1}};
  CHECK(weighted_median(c) == 1);
  const std::vector<WeightedPoint> z{{1, 0}, {2, 0}};
  CHECK_THROWS_WITH_AS(weighted_median(z), "degenerate median", Error);
  CHECK_THROWS_AS(weighted_median(std::vector<WeightedPoint>{}), Error);
}

TEST_CASE("dev examples") {
  CHECK(dev(H({{0.2, 5.0}}), 0.2, 3, 10) == 0.0);
  CHECK(dev(H({{0.1, 10.0}}), 0.2, 1, 10) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("poisson median minimizes dev") {
  std::mt19937_64 rng(108);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const std::uint64_t n = 10 + rng() % 1000;
    const auto h = oracle::random_histogram(rng, 8, 0.1 / static_cast<double>(n), std::min(0.5, 30.0 / n));
    const std::uint64_t j = rng() % 20;
    const double m = poisson_median(h, j, n);
    const double at_median = dev(h, m, j, n);
    CHECK(at_median <= oracle::scan_min_deviation(h, j, n, 2.0 * h.max_x()) + 1e-12);
    CHECK(at_median <= oracle::support_min_deviation(h, j, n) * (1.0 + 1e-12) + 1e-300);
    for (int r = 0; r < 100; ++r) {
      const double other = 2.0 * h.max_x() * u(rng);
      CHECK(at_median <= dev(h, other, j, n) * (1.0 + 1e-12) + 1e-300);
    }
  }
}

TEST_CASE("poisson median examples") {
  CHECK(poisson_median(H({{0.001, 1000.0}}), 1, 1000) == 0.001);
  const Truth two(DistributionSpec::two_level(10000));
  CHECK(poisson_median(two.histogram(), 10, 10000) == doctest::Approx(0.001).epsilon(1e-12));
  // n x = 10^6 makes every j = 0 weight underflow.
  CHECK(poisson_median(H({{1.0, 1.0}}), 0, 1000000) == 0.0);
  CHECK(poisson_median(H({{1.0, 1.0}}), 3, 1000000) == 3e-6);
}

TEST_CASE("median cutoff") {
  CHECK(median_cutoff(1) == 0);
  CHECK(median_cutoff(10000) == 85);
  CHECK(median_cutoff(100000) == 133);
}

TEST_CASE("opt estimate") {
  CHECK(opt_estimate(H({{1.0, 1.0}}), 100) <= 1e-15);
  CHECK(opt_estimate(H({{0.5, 2.0}}), 4) == 0.0);

  // Exhaustive small instance: the best median per count is found by trying
  // every support point.
  const auto h = H({{0.5, 1.0}, {0.25, 2.0}});
  double brute = 0.0;
  for (std::uint64_t j = 0; j < median_cutoff(4); ++j) brute += oracle::support_min_deviation(h, j, 4);
  CHECK(opt_estimate(h, 4) == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("opt estimate on the two-level family tracks the idealized median labeler") {
  const Truth two(DistributionSpec::two_level(10000));
  const std::uint64_t n = 10000;
  const double opt = opt_estimate(two.histogram(), n);
  std::vector<double> probs;
  for (const auto& e : two.distribution().entries()) probs.push_back(e.probability);
  const auto [mc, se] = oracle::idealized_labeler_error(probs, n, median_cutoff(n), 400, 9);
  // Both are about 0.01 for this family.
  CHECK(opt == doctest::Approx(mc).epsilon(0.1));
  CHECK(std::abs(opt - mc) <= 0.002 + 4.0 * se);
  CHECK(opt < 0.02);
}
