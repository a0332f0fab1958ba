#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "sslzsl/matrix.hpp"

namespace sslzsl {

/// Central-difference gradient of a scalar function of a matrix argument.
template <typename Objective>
Matrix numeric_gradient(Objective&& f, const Matrix& x, double step = 1e-4) {
  Matrix probe = x;
  Matrix grad(x.rows(), x.cols());
  auto p = probe.values();
  auto g = grad.values();
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double saved = p[k];
    p[k] = saved + step;
    const double up = f(probe);
    p[k] = saved - step;
    const double down = f(probe);
    p[k] = saved;
    g[k] = (up - down) / (2.0 * step);
  }
  return grad;
}

inline double max_abs(const Matrix& m) {
  double out = 0.0;
  for (double v : m.values()) out = std::max(out, std::abs(v));
  return out;
}

/// First-order stationarity of `f` at `x`: the largest finite-difference
/// gradient entry at x, relative to the largest one at the origin.
template <typename Objective>
double stationarity_residual(Objective&& f, const Matrix& x, double step = 1e-4) {
  const double at_x = max_abs(numeric_gradient(f, x, step));
  const double at_origin = max_abs(numeric_gradient(f, Matrix(x.rows(), x.cols()), step));
  return at_x / std::max(at_origin, 1e-300);
}

}  // namespace sslzsl
