#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace histolearn::lp {

/// Row-major dense matrix.
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// minimize c.z  subject to  A z = b,  z >= 0.
struct Problem {
  std::vector<double> objective;
  DenseMatrix constraints;
  std::vector<double> rhs;
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };
std::string to_string(Status status);

struct Solution {
  Status status = Status::infeasible;
  std::vector<double> z;
  double objective_value = 0.0;
  std::size_t iterations = 0;
};

struct Options {
  /// Reduced-cost optimality tolerance.
  double tolerance = 1e-9;
  std::size_t max_iterations = 200000;
};

/// Two-phase dense revised simplex with an explicit basis inverse,
/// refactorized periodically. Dantzig pricing with a Harris ratio test;
/// switches to Bland's rule while pivots stay degenerate, so it cannot
/// cycle. Deterministic for identical inputs.
///
/// Throws histolearn::Error only on a malformed problem (dimension
/// mismatch, empty, non-finite data). Solver outcomes are reported in
/// Solution::status.
Solution solve(const Problem& problem, const Options& options = {});

/// ||A z - b||_inf.
double max_residual(const Problem& problem, std::span<const double> z);

}  // namespace histolearn::lp
