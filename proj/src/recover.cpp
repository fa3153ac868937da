#include "histolearn/recover.hpp"

#include <cmath>
#include <string>

#include "histolearn/lp.hpp"

namespace histolearn {

namespace {

// Ceiling that ignores floating-point overshoot of exact integers, so that
// e.g. 32^0.6 (mathematically 8) does not round up to 9.
std::uint64_t stable_ceil(double v) {
  const double nearest = std::round(v);
  if (std::abs(v - nearest) <= 1e-10 * std::max(1.0, std::abs(v))) return static_cast<std::uint64_t>(nearest);
  return static_cast<std::uint64_t>(std::ceil(v));
}

// Entries beyond this many LP matrix cells are refused.
constexpr double kMaxMatrixCells = 5e7;

// LP masses at or below this are solver round-off.
constexpr double kNegligibleCount = 1e-12;

}  // namespace

RecoveryThresholds make_thresholds(std::uint64_t n, const Config& config) {
  if (n < 2) throw Error("recovery needs at least two samples");
  config.validate();
  const double nd = static_cast<double>(n);
  RecoveryThresholds t;
  if (config.mode == Mode::paper) {
    t.kappa = config.kappa_override ? *config.kappa_override : stable_ceil(std::pow(nd, config.B));
    t.kappa2 = std::max<std::uint64_t>(1, stable_ceil(std::pow(nd, config.C)));
    if (!config.kappa_override && t.kappa <= t.kappa2) t.kappa = t.kappa2 + 1;
  } else {
    t.kappa = config.kappa_override ? *config.kappa_override : stable_ceil(std::sqrt(nd));
    t.kappa2 = std::max<std::uint64_t>(1, stable_ceil(std::pow(static_cast<double>(t.kappa), 0.6)));
  }
  t.x_max = std::min(1.0, static_cast<double>(t.kappa + t.kappa2) / nd);
  t.empirical_cutoff = t.kappa + 2 * t.kappa2;
  return t;
}

std::vector<double> make_grid(std::uint64_t n, const RecoveryThresholds& thresholds, const Config& config) {
  const double nd = static_cast<double>(n);
  const double lo = 1.0 / (nd * nd);
  const double hi = thresholds.x_max;
  if (!(hi >= lo)) throw Error("grid upper limit below 1/n^2");
  std::vector<double> grid;
  if (config.grid == GridKind::linear) {
    const double steps = std::floor(hi * nd * nd * (1.0 + 1e-12));
    if (steps > kMaxMatrixCells) throw Error("grid too large for the linear grid; use the geometric grid");
    const auto count = static_cast<std::uint64_t>(steps);
    grid.reserve(count + 1);
    for (std::uint64_t t = 1; t <= count; ++t) grid.push_back(std::min(hi, static_cast<double>(t) * lo));
  } else {
    const double log_ratio = std::log(config.grid_ratio);
    for (std::uint64_t t = 0;; ++t) {
      const double x = lo * std::exp(static_cast<double>(t) * log_ratio);
      if (x >= hi * (1.0 - 1e-9)) break;
      grid.push_back(x);
    }
  }
  if (grid.empty() || grid.back() < hi) grid.push_back(hi);
  return grid;
}

RecoveryResult recover_histogram(const Fingerprint& fingerprint, const Config& config) {
  const std::uint64_t n = fingerprint.n();
  RecoveryResult result;
  result.thresholds = make_thresholds(n, config);
  const auto& th = result.thresholds;
  const auto grid = make_grid(n, th, config);
  result.grid_size = grid.size();

  const double nd = static_cast<double>(n);
  std::uint64_t empirical_count = 0;
  for (const auto& [i, f] : fingerprint.entries()) {
    if (i > th.empirical_cutoff) empirical_count += i * f;
  }
  result.empirical_mass = static_cast<double>(empirical_count) / nd;
  if (empirical_count > n) throw Error("empirical mass exceeds unity");

  // Columns: grid masses v, then s+ and s- per fitted index.
  const std::size_t g = grid.size();
  const std::size_t k = th.kappa;
  const std::size_t rows = k + 1;
  const std::size_t cols = g + 2 * k;
  if (static_cast<double>(rows) * static_cast<double>(cols) > kMaxMatrixCells) {
    throw Error("grid too large: " + std::to_string(rows) + " x " + std::to_string(cols) + " LP");
  }

  lp::Problem problem;
  problem.constraints = lp::DenseMatrix(rows, cols);
  problem.rhs.assign(rows, 0.0);
  problem.objective.assign(cols, 0.0);
  auto& a = problem.constraints;

  for (std::size_t i = 1; i <= k; ++i) {
    const std::size_t r = i - 1;
    const auto fi = fingerprint.at(i);
    for (std::size_t c = 0; c < g; ++c) a(r, c) = poisson_pmf(nd * grid[c], i);
    a(r, g + r) = 1.0;
    a(r, g + k + r) = -1.0;
    problem.rhs[r] = static_cast<double>(fi);
    const double w = config.weighted_objective ? 1.0 / std::sqrt(1.0 + static_cast<double>(fi)) : 1.0;
    problem.objective[g + r] = w;
    problem.objective[g + k + r] = w;
  }
  // Mass row, scaled by n: sum (n x) v_x = n - (empirical sample count).
  for (std::size_t c = 0; c < g; ++c) a(k, c) = nd * grid[c];
  problem.rhs[k] = static_cast<double>(n - empirical_count);

  const auto solution = lp::solve(problem);
  result.lp_iterations = solution.iterations;
  switch (solution.status) {
    case lp::Status::optimal: break;
    case lp::Status::infeasible: throw Error("empirical mass exceeds unity");
    case lp::Status::unbounded: throw Error("recovery LP reported unbounded");
    case lp::Status::iteration_limit:
      throw Error("recovery LP hit the iteration limit (" + std::to_string(solution.iterations) + " iterations, " +
                  std::to_string(rows) + " rows, " + std::to_string(cols) + " columns)");
  }
  result.lp_objective = solution.objective_value;

  std::vector<GeneralizedHistogram::Entry> lp_entries;
  for (std::size_t c = 0; c < g; ++c) {
    if (solution.z[c] > kNegligibleCount) lp_entries.push_back({grid[c], solution.z[c]});
  }
  auto entries = lp_entries;
  for (const auto& [i, f] : fingerprint.entries()) {
    if (i > th.empirical_cutoff) entries.push_back({static_cast<double>(i) / nd, static_cast<double>(f)});
  }
  result.lp_region = GeneralizedHistogram(std::move(lp_entries));
  result.histogram = GeneralizedHistogram(std::move(entries));
  return result;
}

}  // namespace histolearn
