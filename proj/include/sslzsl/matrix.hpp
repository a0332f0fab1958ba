#pragma once

// Dense row-major f64 matrix and the handful of kernels the rest of the
// library needs. Kernels use a fixed loop order so results are bitwise
// reproducible run to run.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sslzsl/error.hpp"

namespace sslzsl {

class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("matrix data length " + std::to_string(data_.size()) +
                           " does not match shape " + std::to_string(rows_) + "x" +
                           std::to_string(cols_));
    }
  }

  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionError("ragged initializer list");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

namespace detail {

inline void require(bool ok, const char* op, const Matrix& a, const Matrix& b) {
  if (!ok) {
    throw DimensionError(std::string(op) + ": incompatible shapes " + a.shape() + " and " +
                         b.shape());
  }
}

}  // namespace detail

/// a * b
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  detail::require(a.cols() == b.rows(), "matmul", a, b);
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto src = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += aik * src[j];
    }
  }
  return out;
}

/// a * b^T, without materializing the transpose.
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  detail::require(a.cols() == b.cols(), "matmul_nt", a, b);
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ar = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto br = b.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += ar[k] * br[k];
      out(i, j) = s;
    }
  }
  return out;
}

/// a^T * b
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  detail::require(a.rows() == b.rows(), "matmul_tn", a, b);
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto ar = a.row(k);
    auto br = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = ar[i];
      if (aki == 0.0) continue;
      auto dst = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += aki * br[j];
    }
  }
  return out;
}

inline Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  return out;
}

inline Matrix add(const Matrix& a, const Matrix& b) {
  detail::require(a.rows() == b.rows() && a.cols() == b.cols(), "add", a, b);
  Matrix out = a;
  auto o = out.values();
  auto v = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += v[i];
  return out;
}

inline Matrix scaled(const Matrix& m, double c) {
  Matrix out = m;
  for (double& v : out.values()) v *= c;
  return out;
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

inline double frobenius_sq(const Matrix& m) { return dot(m.values(), m.values()); }

inline std::vector<double> row_norms(const Matrix& m) {
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = norm2(m.row(i));
  return out;
}

/// Divides each row by its L2 norm. Rows with norm <= eps come back as zeros.
inline Matrix normalize_rows(const Matrix& m, double eps = 1e-12) {
  if (!(eps > 0.0)) throw DataError("normalize_rows: eps must be positive");
  Matrix out = m;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    const double n = norm2(r);
    if (n <= eps) {
      std::fill(r.begin(), r.end(), 0.0);
    } else {
      for (double& v : r) v /= n;
    }
  }
  return out;
}

/// Relative pivot threshold used by ridge_solve.
inline constexpr double kSingularPivotTolerance = 1e-12;

/// Solves (gram + gamma * I) X = rhs with a partially pivoted LU.
///
/// Throws SingularSystemError when the smallest |U_ii| falls below
/// kSingularPivotTolerance times the largest absolute entry of the system.
inline Matrix ridge_solve(const Matrix& gram, const Matrix& rhs, double gamma) {
  if (gram.rows() != gram.cols()) throw DimensionError("ridge_solve: gram " + gram.shape() + " is not square");
  detail::require(gram.rows() == rhs.rows(), "ridge_solve", gram, rhs);
  if (!(gamma >= 0.0)) throw DataError("ridge_solve: gamma must be >= 0");

  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const auto n = static_cast<Eigen::Index>(gram.rows());
  if (n == 0) return Matrix(0, rhs.cols());
  RowMat a = Eigen::Map<const RowMat>(gram.values().data(), n, n);
  a.diagonal().array() += gamma;

  const double scale = a.cwiseAbs().maxCoeff();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(scale > 0.0) || min_pivot < kSingularPivotTolerance * scale) {
    throw SingularSystemError("ridge_solve: singular system (min pivot " + std::to_string(min_pivot) +
                              ", scale " + std::to_string(scale) + ")");
  }

  const auto k = static_cast<Eigen::Index>(rhs.cols());
  Eigen::MatrixXd b = Eigen::Map<const RowMat>(rhs.values().data(), n, k);
  RowMat x = lu.solve(b);
  return Matrix(gram.rows(), rhs.cols(), std::vector<double>(x.data(), x.data() + x.size()));
}

}  // namespace sslzsl
