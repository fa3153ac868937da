#include "histolearn/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "histolearn/error.hpp"

namespace histolearn::lp {

std::string to_string(Status status) {
  switch (status) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

double max_residual(const Problem& problem, std::span<const double> z) {
  const auto& a = problem.constraints;
  double worst = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto row = a.row(r);
    double sum = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) sum += row[c] * z[c];
    worst = std::max(worst, std::abs(sum - problem.rhs[r]));
  }
  return worst;
}

namespace {

constexpr double kPivotTolerance = 1e-10;
constexpr double kFeasibilityTolerance = 1e-9;
constexpr std::size_t kRefactorInterval = 64;
constexpr std::size_t kDegenerateLimit = 50;

void validate(const Problem& p) {
  const auto& a = p.constraints;
  if (p.objective.empty() || a.rows() == 0) throw Error("LP must have at least one variable and one constraint");
  if (a.cols() != p.objective.size()) throw Error("LP constraint matrix column count does not match objective");
  if (p.rhs.size() != a.rows()) throw Error("LP right-hand side length does not match constraint rows");
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(p.objective.begin(), p.objective.end(), finite) ||
      !std::all_of(p.rhs.begin(), p.rhs.end(), finite)) {
    throw Error("LP data must be finite");
  }
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto row = a.row(r);
    if (!std::all_of(row.begin(), row.end(), finite)) throw Error("LP data must be finite");
  }
}

// Variables 0..d-1 are structural; d + r is the artificial of row r.
class Simplex {
public:
  Simplex(const Problem& problem, const Options& options)
      : m_(problem.rhs.size()),
        d_(problem.objective.size()),
        a_(problem.constraints),
        b_(problem.rhs),
        c_(problem.objective),
        options_(options) {
    // Nonnegative right-hand side, rows equilibrated to unit max-norm.
    for (std::size_t r = 0; r < m_; ++r) {
      auto row = a_.row(r);
      double scale = 0.0;
      for (double v : row) scale = std::max(scale, std::abs(v));
      scale = scale > 0.0 ? 1.0 / scale : 1.0;
      if (b_[r] < 0.0) scale = -scale;
      for (double& v : row) v *= scale;
      b_[r] *= scale;
    }
  }

  Solution run() {
    Solution out;
    crash_basis();
    if (!refactor()) throw Error("LP initial basis is singular");

    auto result = iterate(/*phase_one=*/true);
    if (result == Outcome::limit) return finish(Status::iteration_limit);
    double infeasibility = 0.0;
    double b_scale = 1.0;
    for (double v : b_) b_scale = std::max(b_scale, std::abs(v));
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] >= d_) infeasibility += std::max(0.0, xb_[i]);
    }
    if (infeasibility > 1e-8 * b_scale) return finish(Status::infeasible);
    drive_out_artificials();

    result = iterate(/*phase_one=*/false);
    if (result == Outcome::limit) return finish(Status::iteration_limit);
    if (result == Outcome::unbounded) return finish(Status::unbounded);
    return finish(Status::optimal);
  }

private:
  enum class Outcome { optimal, unbounded, limit };

  bool is_artificial(std::size_t var) const { return var >= d_; }

  double entry(std::size_t var, std::size_t row) const {
    if (var < d_) return a_(row, var);
    return var - d_ == row ? 1.0 : 0.0;
  }

  double cost(std::size_t var, bool phase_one) const {
    if (phase_one) return is_artificial(var) ? 1.0 : 0.0;
    return is_artificial(var) ? 0.0 : c_[var];
  }

  // Unit structural columns with a nonnegative basic value seed the basis;
  // every other row starts on its artificial.
  void crash_basis() {
    basis_.assign(m_, 0);
    in_basis_.assign(d_ + m_, 0);
    barred_.assign(d_ + m_, 0);
    std::vector<char> row_taken(m_, 0);
    for (std::size_t j = 0; j < d_; ++j) {
      std::size_t nonzeros = 0, at = 0;
      for (std::size_t r = 0; r < m_ && nonzeros < 2; ++r) {
        if (a_(r, j) != 0.0) {
          ++nonzeros;
          at = r;
        }
      }
      if (nonzeros == 1 && a_(at, j) > 0.0 && !row_taken[at]) {
        row_taken[at] = 1;
        basis_[at] = j;
        in_basis_[j] = 1;
      }
    }
    for (std::size_t r = 0; r < m_; ++r) {
      if (!row_taken[r]) {
        basis_[r] = d_ + r;
        in_basis_[d_ + r] = 1;
      }
    }
  }

  // Gauss-Jordan inverse of the current basis, then x_B = B^{-1} b.
  bool refactor() {
    const std::size_t w = 2 * m_;
    std::vector<double> aug(m_ * w, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t r = 0; r < m_; ++r) aug[r * w + i] = entry(basis_[i], r);
      aug[i * w + m_ + i] = 1.0;
    }
    for (std::size_t col = 0; col < m_; ++col) {
      std::size_t best = col;
      for (std::size_t r = col + 1; r < m_; ++r) {
        if (std::abs(aug[r * w + col]) > std::abs(aug[best * w + col])) best = r;
      }
      const double piv = aug[best * w + col];
      if (std::abs(piv) < 1e-14) return false;
      if (best != col) {
        for (std::size_t k = 0; k < w; ++k) std::swap(aug[best * w + k], aug[col * w + k]);
      }
      const double inv = 1.0 / piv;
      for (std::size_t k = 0; k < w; ++k) aug[col * w + k] *= inv;
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == col) continue;
        const double f = aug[r * w + col];
        if (f == 0.0) continue;
        for (std::size_t k = col; k < w; ++k) aug[r * w + k] -= f * aug[col * w + k];
      }
    }
    binv_ = DenseMatrix(m_, m_);
    for (std::size_t r = 0; r < m_; ++r) {
      for (std::size_t k = 0; k < m_; ++k) binv_(r, k) = aug[r * w + m_ + k];
    }
    recompute_values();
    since_refactor_ = 0;
    return true;
  }

  void recompute_values() {
    xb_.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const auto row = binv_.row(i);
      double sum = 0.0;
      for (std::size_t k = 0; k < m_; ++k) sum += row[k] * b_[k];
      xb_[i] = sum;
    }
    // One step of iterative refinement against the scaled system.
    std::vector<double> residual(b_);
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t var = basis_[i];
      for (std::size_t r = 0; r < m_; ++r) residual[r] -= entry(var, r) * xb_[i];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      const auto row = binv_.row(i);
      double sum = 0.0;
      for (std::size_t k = 0; k < m_; ++k) sum += row[k] * residual[k];
      xb_[i] += sum;
    }
  }

  // w = B^{-1} A_q
  void basis_direction(std::size_t q, std::vector<double>& w) const {
    w.assign(m_, 0.0);
    if (is_artificial(q)) {
      const std::size_t r = q - d_;
      for (std::size_t i = 0; i < m_; ++i) w[i] = binv_(i, r);
      return;
    }
    std::vector<double> col(m_);
    for (std::size_t r = 0; r < m_; ++r) col[r] = a_(r, q);
    for (std::size_t i = 0; i < m_; ++i) {
      const auto row = binv_.row(i);
      double sum = 0.0;
      for (std::size_t r = 0; r < m_; ++r) sum += row[r] * col[r];
      w[i] = sum;
    }
  }

  void pivot(std::size_t leave_row, std::size_t q, const std::vector<double>& w, double theta) {
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == leave_row) continue;
      xb_[i] -= theta * w[i];
      if (xb_[i] < 0.0 && xb_[i] > -kFeasibilityTolerance) xb_[i] = 0.0;
    }
    xb_[leave_row] = theta;

    const double inv = 1.0 / w[leave_row];
    auto prow = binv_.row(leave_row);
    for (double& v : prow) v *= inv;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == leave_row || w[i] == 0.0) continue;
      const double f = w[i];
      auto row = binv_.row(i);
      for (std::size_t k = 0; k < m_; ++k) row[k] -= f * prow[k];
    }

    const std::size_t leaving = basis_[leave_row];
    in_basis_[leaving] = 0;
    if (is_artificial(leaving)) barred_[leaving] = 1;
    basis_[leave_row] = q;
    in_basis_[q] = 1;
    ++since_refactor_;
  }

  Outcome iterate(bool phase_one) {
    std::vector<double> y(m_), reduced(d_), w;
    std::size_t degenerate_run = 0;
    for (;;) {
      if (iterations_ >= options_.max_iterations) return Outcome::limit;
      if (since_refactor_ >= kRefactorInterval) refactor();

      // Duals y = c_B^T B^{-1}.
      std::fill(y.begin(), y.end(), 0.0);
      for (std::size_t i = 0; i < m_; ++i) {
        const double cb = cost(basis_[i], phase_one);
        if (cb == 0.0) continue;
        const auto row = binv_.row(i);
        for (std::size_t k = 0; k < m_; ++k) y[k] += cb * row[k];
      }
      for (std::size_t j = 0; j < d_; ++j) reduced[j] = cost(j, phase_one);
      for (std::size_t r = 0; r < m_; ++r) {
        if (y[r] == 0.0) continue;
        const auto row = a_.row(r);
        for (std::size_t j = 0; j < d_; ++j) reduced[j] -= y[r] * row[j];
      }

      const bool bland = degenerate_run >= kDegenerateLimit;
      std::size_t entering = d_ + m_;
      double best = -options_.tolerance;
      auto consider = [&](std::size_t var, double rc) {
        if (rc >= -options_.tolerance) return;
        if (bland) {
          if (entering == d_ + m_) entering = var;
        } else if (rc < best) {
          best = rc;
          entering = var;
        }
      };
      for (std::size_t j = 0; j < d_; ++j) {
        if (!in_basis_[j]) consider(j, reduced[j]);
      }
      if (phase_one) {
        for (std::size_t r = 0; r < m_; ++r) {
          const std::size_t var = d_ + r;
          if (!in_basis_[var] && !barred_[var]) consider(var, cost(var, true) - y[r]);
        }
      }
      if (entering == d_ + m_) return Outcome::optimal;

      basis_direction(entering, w);

      // Ratio test. Artificials stuck in the basis at zero during phase two
      // must leave before they could become nonzero, in either direction.
      auto effective = [&](std::size_t i) -> double {
        if (!phase_one && is_artificial(basis_[i]) && std::abs(w[i]) > kPivotTolerance) return std::abs(w[i]);
        return w[i];
      };
      auto value = [&](std::size_t i) -> double {
        if (!phase_one && is_artificial(basis_[i])) return 0.0;
        return std::max(xb_[i], 0.0);
      };
      std::size_t leave = m_;
      if (bland) {
        double min_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m_; ++i) {
          const double wi = effective(i);
          if (wi <= kPivotTolerance) continue;
          const double ratio = value(i) / wi;
          if (leave == m_ || ratio < min_ratio - 1e-12 * (1.0 + min_ratio)) {
            min_ratio = ratio;
            leave = i;
          } else if (ratio <= min_ratio + 1e-12 * (1.0 + min_ratio) && basis_[i] < basis_[leave]) {
            leave = i;
          }
        }
      } else {
        double bound = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m_; ++i) {
          const double wi = effective(i);
          if (wi <= kPivotTolerance) continue;
          bound = std::min(bound, (value(i) + kFeasibilityTolerance) / wi);
        }
        double largest = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
          const double wi = effective(i);
          if (wi <= kPivotTolerance) continue;
          if (value(i) / wi <= bound && wi > largest) {
            largest = wi;
            leave = i;
          }
        }
      }
      if (leave == m_) return Outcome::unbounded;

      const double theta = value(leave) / effective(leave);
      if (effective(leave) != w[leave]) {
        // Forced artificial exit: a zero-length step.
        pivot(leave, entering, w, 0.0);
      } else {
        pivot(leave, entering, w, theta);
      }
      degenerate_run = theta <= 1e-12 ? degenerate_run + 1 : 0;
      ++iterations_;
    }
  }

  void drive_out_artificials() {
    std::vector<double> w;
    for (std::size_t i = 0; i < m_; ++i) {
      if (!is_artificial(basis_[i])) continue;
      // Row i of B^{-1} A over the nonbasic structurals.
      std::size_t best_var = d_;
      double best_val = 1e-9;
      const auto brow = binv_.row(i);
      for (std::size_t j = 0; j < d_; ++j) {
        if (in_basis_[j]) continue;
        double v = 0.0;
        for (std::size_t r = 0; r < m_; ++r) v += brow[r] * a_(r, j);
        if (std::abs(v) > best_val) {
          best_val = std::abs(v);
          best_var = j;
        }
      }
      if (best_var == d_) continue;  // redundant row; artificial stays at zero
      basis_direction(best_var, w);
      pivot(i, best_var, w, xb_[i] / w[i]);
    }
    refactor();
  }

  Solution finish(Status status) {
    refactor();
    Solution out;
    out.status = status;
    out.iterations = iterations_;
    out.z.assign(d_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (!is_artificial(basis_[i])) out.z[basis_[i]] = std::max(xb_[i], 0.0);
    }
    double obj = 0.0;
    for (std::size_t j = 0; j < d_; ++j) obj += c_[j] * out.z[j];
    out.objective_value = obj;
    return out;
  }

  std::size_t m_;
  std::size_t d_;
  DenseMatrix a_;
  std::vector<double> b_;
  std::vector<double> c_;
  Options options_;

  std::vector<std::size_t> basis_;
  std::vector<char> in_basis_;
  std::vector<char> barred_;
  DenseMatrix binv_;
  std::vector<double> xb_;
  std::size_t iterations_ = 0;
  std::size_t since_refactor_ = 0;
};

}  // namespace

Solution solve(const Problem& problem, const Options& options) {
  validate(problem);
  Simplex simplex(problem, options);
  return simplex.run();
}

}  // namespace histolearn::lp
