#pragma once

// Semantic softmax loss.
//
// Class j's classifier is generated from its descriptor, W_j = V^T a_j, so the
// logit of instance i for class j is a_j^T V f_i + b_j. The objective is
//
//   L = CE + lambda * ||V||_F^2 + (beta / M) * sum_i (||f_i - V^T a_{y_i}||_2 - alpha)^2
//
// where the last term is the soft form of the hypersphere constraint
// ||f_i - V^T a_{y_i}|| = alpha. beta = 0 gives the unconstrained variant.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sslzsl/error.hpp"
#include "sslzsl/io.hpp"
#include "sslzsl/matrix.hpp"
#include "sslzsl/rng.hpp"

namespace sslzsl {

struct ModelParams {
  Matrix V;               // descriptor_dim x feature_dim
  std::vector<double> b;  // one bias per seen class

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

enum class OptimizerKind { sgd, momentum, adam };

inline std::string to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::momentum: return "momentum";
    case OptimizerKind::adam: return "adam";
  }
  return "adam";
}

inline OptimizerKind parse_optimizer(std::string_view s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "momentum" || s == "sgd_momentum") return OptimizerKind::momentum;
  if (s == "adam") return OptimizerKind::adam;
  throw DataError("unknown optimizer '" + std::string(s) + "' (expected sgd, momentum or adam)");
}

struct Hyperparams {
  double lambda = 1e-4;  // Frobenius weight on V
  double beta = 1.0;     // hypersphere penalty weight
  double alpha = 1.0;    // hypersphere radius
  double lr = 1e-3;
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::adam;

  void validate() const {
    auto fail = [](const std::string& m) { throw DataError("hyperparameters: " + m); };
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be finite and >= 0");
    if (!(beta >= 0.0) || !std::isfinite(beta)) fail("beta must be finite and >= 0");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) fail("alpha must be finite and > 0");
    if (!(lr >= 0.0) || !std::isfinite(lr)) fail("lr must be finite and >= 0");
    if (batch_size == 0) fail("batch_size must be >= 1");
  }
};

struct LossTerms {
  double ce = 0.0;
  double reg = 0.0;
  double penalty = 0.0;

  double total() const { return ce + reg + penalty; }
};

struct Gradient {
  Matrix dV;
  std::vector<double> db;
};

/// Residual norms below this are treated as zero by the penalty gradient.
inline constexpr double kResidualEps = 1e-8;

namespace detail {

inline void check_model_shapes(const ModelParams& p, const Matrix& descriptors,
                               const Matrix& features) {
  if (descriptors.cols() != p.V.rows()) {
    throw DimensionError("descriptors " + descriptors.shape() + " do not match V " + p.V.shape());
  }
  if (features.cols() != p.V.cols()) {
    throw DimensionError("features " + features.shape() + " do not match V " + p.V.shape());
  }
  if (descriptors.rows() != p.b.size()) {
    throw DimensionError("descriptors " + descriptors.shape() + " vs bias length " +
                         std::to_string(p.b.size()));
  }
}

inline void check_labels(const Matrix& features, std::span<const std::size_t> labels,
                         std::size_t classes) {
  if (features.rows() == 0) throw DataError("empty batch");
  if (labels.size() != features.rows()) {
    throw DimensionError("features " + features.shape() + " vs " + std::to_string(labels.size()) +
                         " labels");
  }
  for (auto y : labels) {
    if (y >= classes) {
      throw DataError("label " + std::to_string(y) + " out of range for " +
                      std::to_string(classes) + " classes");
    }
  }
}

}  // namespace detail

/// Row j is the visual prototype V^T a_j.
inline Matrix reconstruct_prototypes(const Matrix& V, const Matrix& descriptors) {
  if (descriptors.cols() != V.rows()) {
    throw DimensionError("reconstruct_prototypes: descriptors " + descriptors.shape() +
                         " vs V " + V.shape());
  }
  return matmul(descriptors, V);
}

/// (M x C) matrix with entries a_j^T V f_i + b_j.
inline Matrix logits(const ModelParams& params, const Matrix& descriptors,
                     const Matrix& features) {
  detail::check_model_shapes(params, descriptors, features);
  Matrix z = matmul_nt(features, reconstruct_prototypes(params.V, descriptors));
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto r = z.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += params.b[j];
  }
  return z;
}

/// Row-wise softmax with max subtraction.
inline Matrix softmax_rows(const Matrix& z) {
  Matrix p = z;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    auto r = p.row(i);
    if (r.empty()) continue;
    const double mx = *std::max_element(r.begin(), r.end());
    double sum = 0.0;
    for (double& v : r) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (double& v : r) v /= sum;
  }
  return p;
}

struct LossAndGradient {
  LossTerms loss;
  Gradient grad;
};

/// Loss terms and, when `with_gradient`, the analytic gradient of their sum.
inline LossAndGradient ssl_evaluate(const ModelParams& params, const Matrix& features,
                                    std::span<const std::size_t> labels,
                                    const Matrix& descriptors, const Hyperparams& h,
                                    bool with_gradient = true) {
  detail::check_model_shapes(params, descriptors, features);
  detail::check_labels(features, labels, descriptors.rows());

  const std::size_t m = features.rows();
  const std::size_t classes = descriptors.rows();
  const double inv_m = 1.0 / static_cast<double>(m);

  const Matrix prototypes = reconstruct_prototypes(params.V, descriptors);
  Matrix z = matmul_nt(features, prototypes);

  LossAndGradient out;
  Matrix coef_ce;  // (P - Y) / M
  if (with_gradient) coef_ce = Matrix(m, classes);

  double ce = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    auto zi = z.row(i);
    for (std::size_t j = 0; j < classes; ++j) zi[j] += params.b[j];
    const double mx = *std::max_element(zi.begin(), zi.end());
    double sum = 0.0;
    for (double v : zi) sum += std::exp(v - mx);
    const double log_norm = mx + std::log(sum);
    ce -= zi[labels[i]] - log_norm;
    if (with_gradient) {
      auto gi = coef_ce.row(i);
      for (std::size_t j = 0; j < classes; ++j) gi[j] = std::exp(zi[j] - log_norm) * inv_m;
      gi[labels[i]] -= inv_m;
    }
  }
  out.loss.ce = ce * inv_m;
  out.loss.reg = h.lambda * frobenius_sq(params.V);

  // Penalty: per-instance residual r_i = f_i - W_{y_i}; gradient accumulates
  // coef_i * r_i into the row of the instance's class.
  Matrix residual_sum;
  if (with_gradient) residual_sum = Matrix(classes, features.cols());
  double penalty = 0.0;
  if (h.beta != 0.0) {
    std::vector<double> r(features.cols());
    for (std::size_t i = 0; i < m; ++i) {
      auto f = features.row(i);
      auto w = prototypes.row(labels[i]);
      for (std::size_t k = 0; k < r.size(); ++k) r[k] = f[k] - w[k];
      const double n = norm2(r);
      const double gap = n - h.alpha;
      penalty += gap * gap;
      if (with_gradient && !(n < kResidualEps && h.alpha == 0.0)) {
        const double c = -2.0 * h.beta * inv_m * gap / std::max(n, kResidualEps);
        auto acc = residual_sum.row(labels[i]);
        for (std::size_t k = 0; k < r.size(); ++k) acc[k] += c * r[k];
      }
    }
  }
  out.loss.penalty = h.beta * inv_m * penalty;

  if (!with_gradient) return out;

  // dV = A^T (G^T F) + 2 lambda V + A^T R
  Matrix class_dirs = matmul_tn(coef_ce, features);
  if (h.beta != 0.0) class_dirs = add(class_dirs, residual_sum);
  out.grad.dV = matmul_tn(descriptors, class_dirs);
  if (h.lambda != 0.0) {
    auto g = out.grad.dV.values();
    auto v = params.V.values();
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += 2.0 * h.lambda * v[k];
  }
  out.grad.db.assign(classes, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    auto gi = coef_ce.row(i);
    for (std::size_t j = 0; j < classes; ++j) out.grad.db[j] += gi[j];
  }
  return out;
}

inline LossTerms ssl_loss_terms(const ModelParams& params, const Matrix& features,
                                std::span<const std::size_t> labels, const Matrix& descriptors,
                                const Hyperparams& h) {
  return ssl_evaluate(params, features, labels, descriptors, h, false).loss;
}

inline double ssl_loss(const ModelParams& params, const Matrix& features,
                       std::span<const std::size_t> labels, const Matrix& descriptors,
                       const Hyperparams& h) {
  return ssl_loss_terms(params, features, labels, descriptors, h).total();
}

inline Gradient ssl_grad(const ModelParams& params, const Matrix& features,
                         std::span<const std::size_t> labels, const Matrix& descriptors,
                         const Hyperparams& h) {
  return ssl_evaluate(params, features, labels, descriptors, h, true).grad;
}

/// V ~ N(0, (0.01 / sqrt(d_a))^2), b = 0.
inline ModelParams init_params(std::size_t descriptor_dim, std::size_t feature_dim,
                               std::size_t seen_classes, std::uint64_t seed) {
  ModelParams p{Matrix(descriptor_dim, feature_dim), std::vector<double>(seen_classes, 0.0)};
  Rng rng(seed, 0x1417ULL);
  const double std_dev = 0.01 / std::sqrt(static_cast<double>(descriptor_dim));
  for (double& v : p.V.values()) v = std_dev * rng.gaussian();
  return p;
}

inline Matrix bias_column(const std::vector<double>& b) { return Matrix(b.size(), 1, b); }

// Checkpoint: model.txt manifest naming V.bin (BIN) and b.csv (one value per line).

inline std::filesystem::path save_model(const std::filesystem::path& dir, const ModelParams& p,
                                        const Hyperparams& h, std::size_t epochs_completed) {
  std::filesystem::create_directories(dir);
  save_matrix(dir / "V.bin", p.V);
  save_matrix(dir / "b.csv", bias_column(p.b));
  KeyValueFile kv;
  kv.set("kind", std::string("ssl"));
  kv.set("V", std::string("V.bin"));
  kv.set("b", std::string("b.csv"));
  kv.set("descriptor_dim", std::uint64_t{p.V.rows()});
  kv.set("feature_dim", std::uint64_t{p.V.cols()});
  kv.set("seen_classes", std::uint64_t{p.b.size()});
  kv.set("lambda", h.lambda);
  kv.set("beta", h.beta);
  kv.set("alpha", h.alpha);
  kv.set("lr", h.lr);
  kv.set("epochs", std::uint64_t{h.epochs});
  kv.set("epochs_completed", std::uint64_t{epochs_completed});
  kv.set("batch_size", std::uint64_t{h.batch_size});
  kv.set("optimizer", to_string(h.optimizer));
  kv.set("seed", h.seed);
  const auto manifest = dir / "model.txt";
  kv.save(manifest);
  return manifest;
}

struct LoadedModel {
  ModelParams params;
  Hyperparams hyperparams;
};

inline LoadedModel load_model(const std::filesystem::path& manifest) {
  const auto kv = KeyValueFile::load(manifest);
  const auto kind = kv.get("kind").value_or("ssl");
  if (kind != "ssl") throw DataError(manifest.string() + ": expected kind=ssl, found " + kind);
  const auto base = manifest.parent_path();
  LoadedModel out;
  out.params.V = load_matrix(base / kv.require("V"));
  const Matrix b = load_matrix(base / kv.require("b"));
  if (b.cols() != 1 && b.rows() != 1) throw DataError("bias file must be a vector, got " + b.shape());
  out.params.b.assign(b.values().begin(), b.values().end());

  Hyperparams h;
  h.lambda = kv.get_double("lambda", h.lambda);
  h.beta = kv.get_double("beta", h.beta);
  h.alpha = kv.get_double("alpha", h.alpha);
  h.lr = kv.get_double("lr", h.lr);
  h.epochs = kv.get_uint("epochs", h.epochs);
  h.batch_size = kv.get_uint("batch_size", h.batch_size);
  h.seed = kv.get_uint("seed", h.seed);
  if (auto o = kv.get("optimizer")) h.optimizer = parse_optimizer(*o);
  out.hyperparams = h;
  return out;
}

}  // namespace sslzsl
