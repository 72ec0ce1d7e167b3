#include "relevo/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "relevo/errors.hpp"

namespace relevo {

Matrix Matrix::identity(size_t n) {
  Matrix m(n, n);
  for (size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::operator*(const Matrix& other) const {
  if (cols_ != other.rows_) throw DimensionMismatch("matrix product shape mismatch");
  Matrix out(rows_, other.cols_);
  for (size_t i = 0; i < rows_; ++i) {
    for (size_t k = 0; k < cols_; ++k) {
      const double a = (*this)(i, k);
      if (a == 0.0) continue;
      for (size_t j = 0; j < other.cols_; ++j) out(i, j) += a * other(k, j);
    }
  }
  return out;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) {
    throw DimensionMismatch("matrix sum shape mismatch");
  }
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double k) {
  for (double& x : data_) x *= k;
  return *this;
}

double Matrix::max_abs_row_sum() const {
  double norm = 0.0;
  for (size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (size_t j = 0; j < cols_; ++j) s += std::fabs((*this)(i, j));
    norm = std::max(norm, s);
  }
  return norm;
}

double Matrix::row_sum(size_t i) const {
  double s = 0.0;
  for (size_t j = 0; j < cols_; ++j) s += (*this)(i, j);
  return s;
}

Matrix expm(Matrix a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("expm needs a square matrix");
  const size_t n = a.rows();

  int squarings = 0;
  double norm = a.max_abs_row_sum();
  while (norm > 0.5) {
    norm *= 0.5;
    ++squarings;
  }
  if (squarings > 0) a *= std::ldexp(1.0, -squarings);

  Matrix result = Matrix::identity(n);
  Matrix term = Matrix::identity(n);
  for (int k = 1; k <= 40; ++k) {
    term = term * a;
    term *= 1.0 / k;
    result += term;
    if (term.max_abs_row_sum() <= 1e-17 * result.max_abs_row_sum()) break;
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

Matrix expm_stochastic(Matrix generator_times_mass) {
  Matrix p = expm(std::move(generator_times_mass));
  for (size_t i = 0; i < p.rows(); ++i) {
    for (size_t j = 0; j < p.cols(); ++j) {
      p(i, j) = std::clamp(p(i, j), 0.0, 1.0);
    }
  }
  return p;
}

}  // namespace relevo
