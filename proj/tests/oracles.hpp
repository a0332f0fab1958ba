#pragma once

// Independent reference implementations used only by the tests. Each one is
// written as plainly as possible (scalar loops, explicit enumeration) and does
// not call the library routine it is checking.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sslzsl/matrix.hpp"
#include "sslzsl/rng.hpp"

namespace oracle {

using sslzsl::Matrix;

inline Matrix triple_loop_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

/// a_j^T V f_i + b_j as an explicit double sum.
inline double scalar_logit(const Matrix& V, const std::vector<double>& b, const Matrix& A,
                           const Matrix& F, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t k = 0; k < V.rows(); ++k)
    for (std::size_t l = 0; l < V.cols(); ++l) s += A(j, k) * V(k, l) * F(i, l);
  return s + b[j];
}

/// The full objective written term by term with scalar loops.
inline double scalar_ssl_loss(const Matrix& V, const std::vector<double>& b, const Matrix& F,
                              const std::vector<std::size_t>& y, const Matrix& A, double lambda,
                              double beta, double alpha) {
  const std::size_t m = F.rows();
  const std::size_t c = A.rows();
  double ce = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> z(c);
    for (std::size_t j = 0; j < c; ++j) z[j] = scalar_logit(V, b, A, F, i, j);
    double denom = 0.0;
    for (std::size_t j = 0; j < c; ++j) denom += std::exp(z[j]);
    ce += -std::log(std::exp(z[y[i]]) / denom);
  }
  double fro = 0.0;
  for (std::size_t k = 0; k < V.rows(); ++k)
    for (std::size_t l = 0; l < V.cols(); ++l) fro += V(k, l) * V(k, l);
  double pen = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double sq = 0.0;
    for (std::size_t l = 0; l < V.cols(); ++l) {
      double w = 0.0;
      for (std::size_t k = 0; k < V.rows(); ++k) w += V(k, l) * A(y[i], k);
      sq += (F(i, l) - w) * (F(i, l) - w);
    }
    pen += (std::sqrt(sq) - alpha) * (std::sqrt(sq) - alpha);
  }
  return ce / static_cast<double>(m) + lambda * fro + beta * pen / static_cast<double>(m);
}

/// Plain softmax cross-entropy with classifier rows W_j and biases b_j.
inline double softmax_loss(const Matrix& W, const std::vector<double>& b, const Matrix& F,
                           const std::vector<std::size_t>& y) {
  double total = 0.0;
  for (std::size_t i = 0; i < F.rows(); ++i) {
    std::vector<double> z(W.rows());
    for (std::size_t j = 0; j < W.rows(); ++j) {
      double s = b[j];
      for (std::size_t l = 0; l < F.cols(); ++l) s += W(j, l) * F(i, l);
      z[j] = s;
    }
    const double mx = *std::max_element(z.begin(), z.end());
    double denom = 0.0;
    for (double v : z) denom += std::exp(v - mx);
    total += std::log(denom) + mx - z[y[i]];
  }
  return total / static_cast<double>(F.rows());
}

/// AP from an explicitly materialized ranked list of relevance flags.
inline double brute_force_ap(const std::vector<double>& scores, const std::vector<bool>& rel) {
  struct Item {
    double score;
    std::size_t index;
    bool relevant;
  };
  std::vector<Item> items;
  for (std::size_t i = 0; i < scores.size(); ++i) items.push_back({scores[i], i, rel[i]});
  // Selection sort: highest score first, lower index first on ties.
  for (std::size_t a = 0; a < items.size(); ++a) {
    std::size_t best = a;
    for (std::size_t b = a + 1; b < items.size(); ++b) {
      if (items[b].score > items[best].score ||
          (items[b].score == items[best].score && items[b].index < items[best].index)) {
        best = b;
      }
    }
    std::swap(items[a], items[best]);
  }
  std::vector<double> precisions;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (!items[k].relevant) continue;
    std::size_t hits = 0;
    for (std::size_t t = 0; t <= k; ++t) hits += items[t].relevant ? 1 : 0;
    precisions.push_back(static_cast<double>(hits) / static_cast<double>(k + 1));
  }
  double s = 0.0;
  for (double p : precisions) s += p;
  return s / static_cast<double>(precisions.size());
}

inline Matrix random_matrix(sslzsl::Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  Matrix m(r, c);
  for (double& v : m.values()) v = scale * rng.gaussian();
  return m;
}

inline std::vector<std::size_t> random_labels(sslzsl::Rng& rng, std::size_t n, std::size_t classes) {
  std::vector<std::size_t> y(n);
  for (auto& v : y) v = static_cast<std::size_t>(rng.below(classes));
  return y;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double out = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) out = std::max(out, std::abs(a.values()[k] - b.values()[k]));
  return out;
}

}  // namespace oracle
