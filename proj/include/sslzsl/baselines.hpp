#pragma once

// Closed-form comparison methods.
//
//   lr    : P = argmin ||F P - A_y||^2 + gamma ||P||^2            (feature -> descriptor)
//   rlr   : Q = argmin ||A_y Q - F||^2 + gamma ||Q||^2            (descriptor -> feature)
//   eszsl : M = (F^T F + gamma I)^-1 F^T Y A_s (A_s^T A_s + lam I)^-1, Y in {-1, +1}
//           (or {0, 1} with LabelEncoding::binary)
//
// F holds training feature rows, A_y the descriptor of each row's class.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <string_view>

#include "sslzsl/dataset.hpp"
#include "sslzsl/error.hpp"
#include "sslzsl/eval.hpp"
#include "sslzsl/io.hpp"
#include "sslzsl/matrix.hpp"

namespace sslzsl {

enum class BaselineKind { lr, rlr, eszsl };

inline std::string to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::lr: return "lr";
    case BaselineKind::rlr: return "rlr";
    case BaselineKind::eszsl: return "eszsl";
  }
  return "lr";
}

inline BaselineKind parse_baseline(std::string_view s) {
  if (s == "lr") return BaselineKind::lr;
  if (s == "rlr") return BaselineKind::rlr;
  if (s == "eszsl") return BaselineKind::eszsl;
  throw DataError("unknown baseline '" + std::string(s) + "' (expected lr, rlr or eszsl)");
}

enum class LabelEncoding { signed_one_hot, binary };

inline std::string to_string(LabelEncoding e) {
  return e == LabelEncoding::binary ? "binary" : "signed";
}

inline LabelEncoding parse_encoding(std::string_view s) {
  if (s == "signed") return LabelEncoding::signed_one_hot;
  if (s == "binary") return LabelEncoding::binary;
  throw DataError("unknown label encoding '" + std::string(s) + "' (expected signed or binary)");
}

struct BaselineModel {
  BaselineKind kind = BaselineKind::lr;
  Matrix weights;  // lr: d_f x d_a, rlr: d_a x d_f, eszsl: d_f x d_a
  double gamma = 1.0;
  double lam = 1.0;
  LabelEncoding encoding = LabelEncoding::signed_one_hot;  // eszsl only
  ScoreKind eszsl_score = ScoreKind::inner;                // eszsl only
};

/// Descriptor row of each instance's class, stacked (M x d_a).
inline Matrix class_descriptor_rows(std::span<const std::size_t> labels, const Matrix& descriptors) {
  Matrix out(labels.size(), descriptors.cols());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= descriptors.rows()) {
      throw DataError("label " + std::to_string(labels[i]) + " has no descriptor row");
    }
    auto src = descriptors.row(labels[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

/// M x C target matrix: 1 at the true class, -1 (signed) or 0 (binary) elsewhere.
inline Matrix label_targets(std::span<const std::size_t> labels, std::size_t classes,
                            LabelEncoding encoding = LabelEncoding::signed_one_hot) {
  Matrix y(labels.size(), classes, encoding == LabelEncoding::binary ? 0.0 : -1.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= classes) throw DataError("label out of range in label_targets");
    y(i, labels[i]) = 1.0;
  }
  return y;
}

inline BaselineModel lr_fit(const Matrix& features, std::span<const std::size_t> labels,
                            const Matrix& seen_descriptors, double gamma) {
  const Matrix targets = class_descriptor_rows(labels, seen_descriptors);
  return {BaselineKind::lr,
          ridge_solve(matmul_tn(features, features), matmul_tn(features, targets), gamma), gamma,
          0.0};
}

inline BaselineModel rlr_fit(const Matrix& features, std::span<const std::size_t> labels,
                             const Matrix& seen_descriptors, double gamma) {
  const Matrix inputs = class_descriptor_rows(labels, seen_descriptors);
  return {BaselineKind::rlr,
          ridge_solve(matmul_tn(inputs, inputs), matmul_tn(inputs, features), gamma), gamma, 0.0};
}

inline BaselineModel eszsl_fit(const Matrix& features, std::span<const std::size_t> labels,
                               const Matrix& seen_descriptors, double gamma, double lam,
                               LabelEncoding encoding = LabelEncoding::signed_one_hot) {
  if (!(lam >= 0.0)) throw DataError("eszsl: lam must be >= 0");
  const Matrix y = label_targets(labels, seen_descriptors.rows(), encoding);
  const Matrix left = ridge_solve(matmul_tn(features, features),
                                  matmul(matmul_tn(features, y), seen_descriptors), gamma);
  // M = left * (A^T A + lam I)^-1; the inverse is symmetric, so solve for M^T.
  const Matrix m_t =
      ridge_solve(matmul_tn(seen_descriptors, seen_descriptors), transpose(left), lam);
  return {BaselineKind::eszsl, transpose(m_t), gamma, lam, encoding, ScoreKind::inner};
}

inline BaselineModel fit_baseline(BaselineKind kind, const ZslDataset& d, double gamma,
                                  double lam,
                                  LabelEncoding encoding = LabelEncoding::signed_one_hot) {
  require_valid(d);
  switch (kind) {
    case BaselineKind::lr: return lr_fit(d.train_features, d.train_labels, d.seen_descriptors, gamma);
    case BaselineKind::rlr: return rlr_fit(d.train_features, d.train_labels, d.seen_descriptors, gamma);
    case BaselineKind::eszsl:
      return eszsl_fit(d.train_features, d.train_labels, d.seen_descriptors, gamma, lam,
                       encoding);
  }
  throw DataError("unknown baseline kind");
}

/// (M_test x C_u) compatibility scores under each method's own convention:
/// cosine nearest neighbour for lr/rlr, raw bilinear f^T M a for eszsl unless
/// the model asks for cosine.
inline Matrix baseline_scores(const BaselineModel& model, const Matrix& features,
                              const Matrix& descriptors) {
  switch (model.kind) {
    case BaselineKind::lr:
      return cosine_scores(matmul(features, model.weights), descriptors);
    case BaselineKind::rlr:
      return cosine_scores(features, matmul(descriptors, model.weights));
    case BaselineKind::eszsl:
      return compatibility_scores(features, matmul_nt(descriptors, model.weights),
                                  model.eszsl_score);
  }
  throw DataError("unknown baseline kind");
}

inline EvalReport evaluate_baseline(const BaselineModel& model, const ZslDataset& d) {
  return evaluate_scores(baseline_scores(model, d.test_features, d.unseen_descriptors),
                         d.test_labels);
}

/// Training objective each fit minimizes, evaluated at arbitrary `weights`.
inline double baseline_objective(BaselineKind kind, const Matrix& weights, const Matrix& features,
                                 std::span<const std::size_t> labels,
                                 const Matrix& seen_descriptors, double gamma, double lam,
                                 LabelEncoding encoding = LabelEncoding::signed_one_hot) {
  auto sq_diff = [](const Matrix& a, const Matrix& b) {
    double s = 0.0;
    auto x = a.values();
    auto y = b.values();
    for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
    return s;
  };
  switch (kind) {
    case BaselineKind::lr: {
      const Matrix targets = class_descriptor_rows(labels, seen_descriptors);
      return sq_diff(matmul(features, weights), targets) + gamma * frobenius_sq(weights);
    }
    case BaselineKind::rlr: {
      const Matrix inputs = class_descriptor_rows(labels, seen_descriptors);
      return sq_diff(matmul(inputs, weights), features) + gamma * frobenius_sq(weights);
    }
    case BaselineKind::eszsl: {
      const Matrix y = label_targets(labels, seen_descriptors.rows(), encoding);
      const Matrix ma = matmul_nt(weights, seen_descriptors);  // M A^T
      return sq_diff(matmul(features, ma), y) + gamma * frobenius_sq(ma) +
             lam * frobenius_sq(matmul(features, weights)) + gamma * lam * frobenius_sq(weights);
    }
  }
  throw DataError("unknown baseline kind");
}

inline void save_baseline(const std::filesystem::path& dir, const BaselineModel& m) {
  std::filesystem::create_directories(dir);
  save_matrix(dir / "weights.bin", m.weights);
  KeyValueFile kv;
  kv.set("kind", to_string(m.kind));
  kv.set("weights", std::string("weights.bin"));
  kv.set("gamma", m.gamma);
  kv.set("lam", m.lam);
  if (m.kind == BaselineKind::eszsl) {
    kv.set("encoding", to_string(m.encoding));
    kv.set("score", std::string(m.eszsl_score == ScoreKind::cosine ? "cosine" : "inner"));
  }
  kv.save(dir / "model.txt");
}

inline BaselineModel load_baseline(const std::filesystem::path& manifest) {
  const auto kv = KeyValueFile::load(manifest);
  BaselineModel m;
  m.kind = parse_baseline(kv.require("kind"));
  m.weights = load_matrix(manifest.parent_path() / kv.require("weights"));
  m.gamma = kv.get_double("gamma", m.gamma);
  m.lam = kv.get_double("lam", m.lam);
  if (auto e = kv.get("encoding")) m.encoding = parse_encoding(*e);
  if (auto sc = kv.get("score")) m.eszsl_score = parse_score_kind(*sc);
  return m;
}

}  // namespace sslzsl
