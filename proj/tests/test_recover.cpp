#include <cmath>
#include <random>

#include "doctest.h"
#include "histolearn/harness.hpp"
#include "histolearn/label.hpp"
#include "histolearn/metrics.hpp"
#include "histolearn/recover.hpp"
#include "oracles.hpp"

using namespace histolearn;

namespace {

Config paper_mode() {
  Config c;
  c.mode = Mode::paper;
  return c;
}

double fit_residual(const Fingerprint& fp, const RecoveryResult& r) {
  const double nd = static_cast<double>(fp.n());
  double s = 0.0;
  for (std::uint64_t i = 1; i <= r.thresholds.kappa; ++i) {
    double expected = 0.0;
    for (const auto& e : r.lp_region.entries()) expected += poisson_pmf(nd * e.x, i) * e.count;
    s += std::abs(static_cast<double>(fp.at(i)) - expected);
  }
  return s;
}

SampleSet all_unique(std::uint64_t n) {
  std::map<std::string, std::uint64_t> counts;
  for (std::uint64_t i = 0; i < n; ++i) counts["u" + std::to_string(i)] = 1;
  return SampleSet(std::move(counts));
}

}  // namespace

TEST_CASE("thresholds") {
  const auto p = make_thresholds(10000, paper_mode());
  CHECK(p.kappa == 3);
  CHECK(p.kappa2 == 2);
  CHECK(p.empirical_cutoff == 7);
  CHECK(p.x_max == doctest::Approx(5.0 / 10000));

  const auto q = make_thresholds(10000, Config{});
  CHECK(q.kappa == 100);
  CHECK(q.kappa2 == 16);
  CHECK(q.empirical_cutoff == 132);

  Config o;
  o.kappa_override = 50;
  CHECK(make_thresholds(10000, o).kappa == 50);
  o.mode = Mode::paper;
  CHECK(make_thresholds(10000, o).kappa == 50);

  // 32^0.6 is exactly 8.
  const auto r = make_thresholds(1024, Config{});
  CHECK(r.kappa == 32);
  CHECK(r.kappa2 == 8);
}

TEST_CASE("threshold invariants") {
  for (std::uint64_t n : {2ull, 3ull, 10ull, 100ull, 12345ull, 1000000ull}) {
    for (const auto& c : {Config{}, paper_mode()}) {
      const auto t = make_thresholds(n, c);
      CHECK(t.kappa2 >= 1);
      CHECK(t.x_max <= 1.0);
      if (c.mode == Mode::paper) CHECK(t.kappa > t.kappa2);
    }
  }
}

TEST_CASE("threshold errors") {
  CHECK_THROWS_AS(make_thresholds(1, Config{}), Error);
  auto c = paper_mode();
  c.B = 0.2;
  CHECK_THROWS_AS(make_thresholds(100, c), Error);
  c.B = 0.08;
  c.C = 0.03;
  CHECK_THROWS_AS(make_thresholds(100, c), Error);
}

TEST_CASE("linear grid") {
  Config c;
  c.grid = GridKind::linear;
  RecoveryThresholds t;
  t.x_max = 0.5;
  const auto g = make_grid(10, t, c);
  REQUIRE(g.size() == 50);
  CHECK(g.front() == doctest::Approx(0.01));
  CHECK(g[1] == doctest::Approx(0.02));
  CHECK(g.back() == 0.5);
}

TEST_CASE("geometric grid") {
  RecoveryThresholds t;
  t.x_max = 0.04;
  const auto g = make_grid(1000, t, Config{});
  CHECK(g.front() == doctest::Approx(1e-6));
  CHECK(g.back() == 0.04);
  // 1e-6 * 1.1^t < 0.04 for t = 0..111, then 0.04 itself.
  std::size_t below = 0;
  while (1e-6 * std::pow(1.1, static_cast<double>(below)) < 0.04) ++below;
  CHECK(below == 112);
  CHECK(g.size() == below + 1);
}

TEST_CASE("grids are strictly increasing and bounded") {
  std::mt19937_64 rng(301);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    Config c;
    c.grid = (k % 3 == 0) ? GridKind::linear : GridKind::geometric;
    c.grid_ratio = 1.01 + u(rng);
    const std::uint64_t n = 2 + rng() % (c.grid == GridKind::linear ? 200 : 100000);
    const auto t = make_thresholds(n, c);
    const auto g = make_grid(n, t, c);
    REQUIRE(!g.empty());
    CHECK(g.front() == doctest::Approx(1.0 / (static_cast<double>(n) * n)));
    CHECK(g.back() == t.x_max);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
  }
}

TEST_CASE("oversized linear grid is refused") {
  Config c;
  c.grid = GridKind::linear;
  const auto t = make_thresholds(1000000, c);
  CHECK_THROWS_AS(make_grid(1000000, t, c), Error);
}

TEST_CASE("paper mode with the linear grid") {
  Config c = paper_mode();
  c.grid = GridKind::linear;
  const Truth truth(DistributionSpec::uniform(50));
  const auto samples = draw_samples(truth.distribution(), 200, 3);
  const auto fp = build_fingerprint(samples);
  const auto r = recover_histogram(fp, c);
  CHECK(r.grid_size == make_grid(200, r.thresholds, c).size());
  CHECK(r.histogram.mass() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(fit_residual(fp, r) - r.lp_objective) <= 1e-6);
}

TEST_CASE("empirical region only") {
  const SampleSet s(std::map<std::string, std::uint64_t>{{"a", 100}});
  const auto r = recover_histogram(build_fingerprint(s), Config{});
  REQUIRE(r.histogram.size() == 1);
  CHECK(r.histogram.entries()[0].x == 1.0);
  CHECK(r.histogram.entries()[0].count == 1.0);
  CHECK(r.lp_objective == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.lp_region.empty());
}

TEST_CASE("all samples distinct") {
  const auto samples = all_unique(1000);
  const auto r = recover_histogram(build_fingerprint(samples), Config{});
  double low = 0.0;
  for (const auto& e : r.histogram.entries()) {
    if (e.x <= 10.0 / 1e6) low += e.x * e.count;
  }
  CHECK(low >= 0.98);
  const auto learned = learn(samples, Config{});
  CHECK(learned.assigned_mass() <= 0.02);
}

TEST_CASE("mass identity and objective fit") {
  const std::vector<DistributionSpec> specs{DistributionSpec::uniform(1000), DistributionSpec::zipf(2000, 1.0),
                                            DistributionSpec::two_level(10000), DistributionSpec::geometric(0.9, 200)};
  for (const auto& spec : specs) {
    const Truth truth(spec);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      for (std::uint64_t n : {500ull, 10000ull}) {
        const auto fp = build_fingerprint(draw_samples(truth.distribution(), n, seed));
        const auto r = recover_histogram(fp, Config{});
        CHECK(r.histogram.mass() == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(std::abs(fit_residual(fp, r) - r.lp_objective) <= 1e-6);
        CHECK(r.lp_objective >= 0.0);
      }
    }
  }
}

TEST_CASE("objective never exceeds the truth-derived feasible point") {
  const std::vector<std::pair<DistributionSpec, std::uint64_t>> cases{
      {DistributionSpec::uniform(1000), 100000}, {DistributionSpec::two_level(10000), 10000},
      {DistributionSpec::zipf(5000, 1.0), 5000}, {DistributionSpec::uniform(100), 50}};
  for (const auto& [spec, n] : cases) {
    const Truth truth(spec);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto fp = build_fingerprint(draw_samples(truth.distribution(), n, seed));
      const auto r = recover_histogram(fp, Config{});
      const auto point = oracle::truth_feasible_point(truth.histogram(), fp, Config{});
      CHECK(point.lp_mass == doctest::Approx(1.0 - r.empirical_mass).epsilon(1e-9));
      CHECK(r.lp_objective <= point.objective + 1e-6);
    }
  }
}

TEST_CASE("distinct count sanity") {
  const std::vector<DistributionSpec> specs{DistributionSpec::uniform(1000), DistributionSpec::zipf(50000, 1.0),
                                            DistributionSpec::two_level(10000)};
  const std::uint64_t n = 10000;
  for (const auto& spec : specs) {
    const Truth truth(spec);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto fp = build_fingerprint(draw_samples(truth.distribution(), n, seed));
      const auto r = recover_histogram(fp, Config{});
      CHECK(std::abs(expected_distinct(r.histogram, n) - static_cast<double>(fp.distinct())) <= 0.05 * n);
    }
  }
}

TEST_CASE("recovered histogram is close to the truth in truncated emd") {
  const Truth truth(DistributionSpec::uniform(1000));
  const std::uint64_t n = 100000;
  const double tau = Config{}.tau_for(n);
  int good = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto fp = build_fingerprint(draw_samples(truth.distribution(), n, Rng::derive_seed(0, seed)));
    const auto r = recover_histogram(fp, Config{});
    if (truncated_relative_emd(r.histogram, truth.histogram(), tau) <= 0.25) ++good;
  }
  CHECK(good >= 18);
}

TEST_CASE("recovery is deterministic") {
  const Truth truth(DistributionSpec::zipf(3000, 1.0));
  const auto fp = build_fingerprint(draw_samples(truth.distribution(), 4000, 11));
  const auto a = recover_histogram(fp, Config{});
  const auto b = recover_histogram(fp, Config{});
  CHECK(a.lp_objective == b.lp_objective);
  REQUIRE(a.histogram.size() == b.histogram.size());
  for (std::size_t i = 0; i < a.histogram.size(); ++i) {
    CHECK(a.histogram.entries()[i].x == b.histogram.entries()[i].x);
    CHECK(a.histogram.entries()[i].count == b.histogram.entries()[i].count);
  }
}

TEST_CASE("weighted objective") {
  Config c;
  c.weighted_objective = true;
  const Truth truth(DistributionSpec::uniform(1000));
  const auto fp = build_fingerprint(draw_samples(truth.distribution(), 5000, 4));
  const auto r = recover_histogram(fp, c);
  CHECK(r.histogram.mass() == doctest::Approx(1.0).epsilon(1e-6));
  double weighted = 0.0;
  const double nd = 5000.0;
  for (std::uint64_t i = 1; i <= r.thresholds.kappa; ++i) {
    double expected = 0.0;
    for (const auto& e : r.lp_region.entries()) expected += poisson_pmf(nd * e.x, i) * e.count;
    const double f = static_cast<double>(fp.at(i));
    weighted += std::abs(f - expected) / std::sqrt(1.0 + f);
  }
  CHECK(std::abs(weighted - r.lp_objective) <= 1e-6);
}

TEST_CASE("gap counts are neither fitted nor appended") {
  // kappa = 3, kappa2 = 2 at n = 10000 in paper mode: counts 4..7 form the gap.
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t n = 0;
  for (int i = 0; i < 100; ++i) n += counts["g" + std::to_string(i)] = 5;
  for (int i = 0; n < 10000; ++i) {
    const std::uint64_t c = std::min<std::uint64_t>(100, 10000 - n);
    n += counts["h" + std::to_string(i)] = c;
  }
  const auto fp = build_fingerprint(SampleSet(std::move(counts)));
  const auto r = recover_histogram(fp, paper_mode());
  for (const auto& e : r.histogram.entries()) {
    CHECK((e.x <= r.thresholds.x_max || e.x * 10000 > static_cast<double>(r.thresholds.empirical_cutoff)));
  }
  CHECK(r.empirical_mass == doctest::Approx(0.95));
  CHECK(r.histogram.mass() == doctest::Approx(1.0).epsilon(1e-6));
}
