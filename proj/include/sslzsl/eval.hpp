#pragma once

// Zero-shot inference and metrics.
//
// Classification picks argmax_j S(f, W_j) over the unseen classes; retrieval
// uses each unseen class as a query and ranks the unseen test gallery by the
// same score. Ties: argmax prefers the lowest class index, rankings order
// equal scores by ascending gallery index.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sslzsl/dataset.hpp"
#include "sslzsl/error.hpp"
#include "sslzsl/matrix.hpp"
#include "sslzsl/model.hpp"

namespace sslzsl {

enum class ScoreKind { cosine, inner };

inline ScoreKind parse_score_kind(std::string_view s) {
  if (s == "cosine") return ScoreKind::cosine;
  if (s == "inner") return ScoreKind::inner;
  throw DataError("unknown score kind '" + std::string(s) + "' (expected cosine or inner)");
}

/// Entry (i, j) is cos(f_i, W_j); 0 when either vector has zero norm.
inline Matrix cosine_scores(const Matrix& features, const Matrix& prototypes) {
  if (features.cols() != prototypes.cols()) {
    throw DimensionError("cosine_scores: features " + features.shape() + " vs prototypes " +
                         prototypes.shape());
  }
  Matrix s = matmul_nt(features, prototypes);
  const auto fn = row_norms(features);
  const auto wn = row_norms(prototypes);
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t j = 0; j < s.cols(); ++j) {
      const double denom = fn[i] * wn[j];
      s(i, j) = denom > 0.0 ? s(i, j) / denom : 0.0;
    }
  }
  return s;
}

inline Matrix inner_scores(const Matrix& features, const Matrix& prototypes) {
  if (features.cols() != prototypes.cols()) {
    throw DimensionError("inner_scores: features " + features.shape() + " vs prototypes " +
                         prototypes.shape());
  }
  return matmul_nt(features, prototypes);
}

inline Matrix compatibility_scores(const Matrix& features, const Matrix& prototypes,
                                   ScoreKind kind) {
  return kind == ScoreKind::cosine ? cosine_scores(features, prototypes)
                                   : inner_scores(features, prototypes);
}

/// Row-wise argmax, lowest index on ties.
inline Labels classify(const Matrix& scores) {
  if (scores.cols() == 0) throw DataError("classify: score matrix has no columns");
  Labels out(scores.rows());
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    auto r = scores.row(i);
    out[i] = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

struct PerClassAccuracy {
  std::vector<double> per_class;
  double mean = 0.0;
};

/// Accuracy within each class, then the unweighted mean over classes.
inline PerClassAccuracy per_class_top1(std::span<const std::size_t> pred,
                                       std::span<const std::size_t> truth,
                                       std::size_t num_classes) {
  if (pred.size() != truth.size()) {
    throw DimensionError("per_class_top1: " + std::to_string(pred.size()) + " predictions vs " +
                         std::to_string(truth.size()) + " labels");
  }
  std::vector<std::size_t> correct(num_classes, 0);
  std::vector<std::size_t> count(num_classes, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= num_classes) {
      throw DataError("per_class_top1: label " + std::to_string(truth[i]) + " out of range");
    }
    ++count[truth[i]];
    if (pred[i] == truth[i]) ++correct[truth[i]];
  }
  PerClassAccuracy out;
  out.per_class.resize(num_classes);
  double sum = 0.0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (count[c] == 0) {
      throw DataError("per_class_top1: class " + std::to_string(c) + " has no test instances");
    }
    out.per_class[c] = static_cast<double>(correct[c]) / static_cast<double>(count[c]);
    sum += out.per_class[c];
  }
  out.mean = num_classes == 0 ? 0.0 : sum / static_cast<double>(num_classes);
  return out;
}

/// Gallery indices by descending score; equal scores keep ascending index.
inline std::vector<std::size_t> rank_gallery(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

namespace detail {

inline std::size_t check_retrieval_inputs(std::span<const double> scores,
                                          const std::vector<bool>& relevance) {
  if (scores.size() != relevance.size()) {
    throw DimensionError("retrieval: " + std::to_string(scores.size()) + " scores vs " +
                         std::to_string(relevance.size()) + " relevance flags");
  }
  const auto relevant = static_cast<std::size_t>(std::count(relevance.begin(), relevance.end(), true));
  if (relevant == 0) throw DataError("retrieval: query has no relevant gallery items");
  return relevant;
}

}  // namespace detail

/// Non-interpolated average precision: mean of precision@k over the ranks k
/// of the relevant items.
inline double retrieval_ap(std::span<const double> scores, const std::vector<bool>& relevance) {
  const std::size_t relevant = detail::check_retrieval_inputs(scores, relevance);
  const auto order = rank_gallery(scores);
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (relevance[order[k]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  return sum / static_cast<double>(relevant);
}

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

/// One point per rank k = 1..n.
inline std::vector<PrPoint> pr_curve(std::span<const double> scores,
                                     const std::vector<bool>& relevance) {
  const std::size_t relevant = detail::check_retrieval_inputs(scores, relevance);
  const auto order = rank_gallery(scores);
  std::vector<PrPoint> out;
  out.reserve(order.size());
  std::size_t hits = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (relevance[order[k]]) ++hits;
    out.push_back({static_cast<double>(hits) / static_cast<double>(relevant),
                   static_cast<double>(hits) / static_cast<double>(k + 1)});
  }
  return out;
}

struct EvalReport {
  std::vector<double> per_class_accuracy;
  double mean_accuracy = 0.0;
  std::vector<double> per_class_ap;
  double map = 0.0;
  std::vector<std::vector<PrPoint>> pr_curves;
  std::vector<std::vector<std::size_t>> confusion;  // [truth][pred]
};

inline std::vector<double> score_column(const Matrix& scores, std::size_t j) {
  std::vector<double> col(scores.rows());
  for (std::size_t i = 0; i < scores.rows(); ++i) col[i] = scores(i, j);
  return col;
}

/// Fills the retrieval fields: column j of `scores` ranks the gallery for class j.
inline void fill_retrieval(EvalReport& report, const Matrix& scores, const Labels& truth) {
  const std::size_t classes = scores.cols();
  report.per_class_ap.assign(classes, 0.0);
  report.pr_curves.assign(classes, {});
  double sum = 0.0;
  for (std::size_t j = 0; j < classes; ++j) {
    const auto col = score_column(scores, j);
    std::vector<bool> rel(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) rel[i] = truth[i] == j;
    report.per_class_ap[j] = retrieval_ap(col, rel);
    report.pr_curves[j] = pr_curve(col, rel);
    sum += report.per_class_ap[j];
  }
  report.map = classes == 0 ? 0.0 : sum / static_cast<double>(classes);
}

/// Fills the classification fields from row-wise argmax of `scores`.
inline void fill_classification(EvalReport& report, const Matrix& scores, const Labels& truth) {
  const std::size_t classes = scores.cols();
  const Labels pred = classify(scores);
  const auto acc = per_class_top1(pred, truth, classes);
  report.per_class_accuracy = acc.per_class;
  report.mean_accuracy = acc.mean;
  report.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) ++report.confusion[truth[i]][pred[i]];
}

/// Full report from an (M_test x C_u) score matrix.
inline EvalReport evaluate_scores(const Matrix& scores, const Labels& truth) {
  if (scores.rows() != truth.size()) {
    throw DimensionError("evaluate: scores " + scores.shape() + " vs " +
                         std::to_string(truth.size()) + " labels");
  }
  EvalReport report;
  fill_classification(report, scores, truth);
  fill_retrieval(report, scores, truth);
  return report;
}

/// Unseen-class prototypes V^T a_j for a trained model.
inline Matrix unseen_prototypes(const ModelParams& params, const ZslDataset& d) {
  return reconstruct_prototypes(params.V, d.unseen_descriptors);
}

/// Classification and retrieval on the unseen split. Bias is training-only and
/// does not enter the scores.
inline EvalReport evaluate(const ModelParams& params, const ZslDataset& d,
                           ScoreKind kind = ScoreKind::cosine) {
  return evaluate_scores(compatibility_scores(d.test_features, unseen_prototypes(params, d), kind),
                         d.test_labels);
}

/// Retrieval only: each reconstructed unseen prototype queries the test gallery.
inline EvalReport retrieval_map(const ModelParams& params, const ZslDataset& d,
                                ScoreKind kind = ScoreKind::cosine) {
  EvalReport report;
  fill_retrieval(report,
                 compatibility_scores(d.test_features, unseen_prototypes(params, d), kind),
                 d.test_labels);
  return report;
}

/// Distance from each unseen prototype to the mean of its class's test
/// features. With `unit_prototypes` the prototype is first scaled onto the
/// unit sphere the features live on, so only its direction is compared.
inline std::vector<double> prototype_diagnostic(const ModelParams& params, const ZslDataset& d,
                                                bool unit_prototypes = true) {
  Matrix protos = unseen_prototypes(params, d);
  if (unit_prototypes) protos = normalize_rows(protos);
  const std::size_t classes = d.unseen_classes();
  Matrix centers(classes, d.feature_dim());
  std::vector<std::size_t> counts(classes, 0);
  for (std::size_t i = 0; i < d.test_labels.size(); ++i) {
    const auto c = d.test_labels[i];
    auto src = d.test_features.row(i);
    auto dst = centers.row(c);
    for (std::size_t k = 0; k < src.size(); ++k) dst[k] += src[k];
    ++counts[c];
  }
  std::vector<double> out(classes, 0.0);
  for (std::size_t c = 0; c < classes; ++c) {
    auto center = centers.row(c);
    auto proto = protos.row(c);
    double s = 0.0;
    for (std::size_t k = 0; k < center.size(); ++k) {
      const double mean = counts[c] ? center[k] / static_cast<double>(counts[c]) : 0.0;
      s += (proto[k] - mean) * (proto[k] - mean);
    }
    out[c] = std::sqrt(s);
  }
  return out;
}

}  // namespace sslzsl
