#pragma once

#include <cstddef>
#include <vector>

namespace relevo {

// Dense row-major matrix sized for attribute domains (a few thousand states
// at most). Just enough linear algebra for transition-matrix work.
class Matrix {
 public:
  Matrix() = default;
  Matrix(size_t rows, size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(size_t n);

  double& operator()(size_t i, size_t j) { return data_[i * cols_ + j]; }
  double operator()(size_t i, size_t j) const { return data_[i * cols_ + j]; }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }

  Matrix operator*(const Matrix& other) const;
  Matrix& operator+=(const Matrix& other);
  Matrix& operator*=(double k);

  double max_abs_row_sum() const;  // infinity norm
  double row_sum(size_t i) const;

 private:
  size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

// exp(A) by scaling-and-squaring with a Taylor kernel: A is halved until its
// norm is at most 1/2, the series is summed to machine precision, and the
// result squared back up. Plenty for the well-conditioned generator matrices
// this library produces.
Matrix expm(Matrix a);

// exp(A) with entries clamped to [0,1]; A must be a generator scaled by a
// nonnegative cumulative intensity, so the true result is row-stochastic.
Matrix expm_stochastic(Matrix generator_times_mass);

}  // namespace relevo
