#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sslzsl/error.hpp"
#include "sslzsl/io.hpp"
#include "sslzsl/matrix.hpp"
#include "sslzsl/rng.hpp"

namespace sslzsl {

/// Seen-class training split, unseen-class test split and both descriptor sets.
/// Descriptor row order defines class identity; labels are 0-based.
struct ZslDataset {
  Matrix train_features;
  Labels train_labels;
  Matrix test_features;
  Labels test_labels;
  Matrix seen_descriptors;
  Matrix unseen_descriptors;

  std::size_t seen_classes() const { return seen_descriptors.rows(); }
  std::size_t unseen_classes() const { return unseen_descriptors.rows(); }
  std::size_t feature_dim() const { return train_features.cols(); }
  std::size_t descriptor_dim() const { return seen_descriptors.cols(); }
};

/// Every violated invariant, one message each. Empty means valid.
inline std::vector<std::string> validate_dataset(const ZslDataset& d) {
  std::vector<std::string> out;
  auto check_split = [&](const char* name, const Matrix& x, const Labels& y, std::size_t classes,
                         bool require_coverage) {
    if (x.rows() != y.size()) {
      out.push_back(std::string(name) + ": " + std::to_string(x.rows()) + " feature rows but " +
                    std::to_string(y.size()) + " labels");
    }
    if (!x.all_finite()) out.push_back(std::string(name) + ": non-finite feature entry");
    std::vector<std::size_t> counts(classes, 0);
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] >= classes) {
        out.push_back(std::string(name) + ": label " + std::to_string(y[i]) + " at index " +
                      std::to_string(i) + " out of range [0, " + std::to_string(classes) + ")");
      } else {
        ++counts[y[i]];
      }
    }
    if (require_coverage) {
      for (std::size_t c = 0; c < classes; ++c) {
        if (counts[c] == 0) {
          out.push_back(std::string(name) + ": class " + std::to_string(c) + " has no instances");
        }
      }
    }
  };

  if (d.train_features.cols() != d.test_features.cols()) {
    out.push_back("feature dimension mismatch: train " + std::to_string(d.train_features.cols()) +
                  " vs test " + std::to_string(d.test_features.cols()));
  }
  if (d.seen_descriptors.cols() != d.unseen_descriptors.cols()) {
    out.push_back("descriptor dimension mismatch: seen " +
                  std::to_string(d.seen_descriptors.cols()) + " vs unseen " +
                  std::to_string(d.unseen_descriptors.cols()));
  }
  if (d.seen_descriptors.rows() == 0) out.push_back("no seen classes");
  if (d.unseen_descriptors.rows() == 0) out.push_back("no unseen classes");
  if (!d.seen_descriptors.all_finite()) out.push_back("seen descriptors: non-finite entry");
  if (!d.unseen_descriptors.all_finite()) out.push_back("unseen descriptors: non-finite entry");
  check_split("train", d.train_features, d.train_labels, d.seen_classes(), true);
  check_split("test", d.test_features, d.test_labels, d.unseen_classes(), false);
  return out;
}

inline void require_valid(const ZslDataset& d) {
  const auto issues = validate_dataset(d);
  if (!issues.empty()) {
    std::string msg = "invalid dataset:";
    for (const auto& s : issues) msg += "\n  " + s;
    throw DataError(msg);
  }
}

struct SyntheticSpec {
  std::size_t feature_dim = 16;
  std::size_t descriptor_dim = 8;
  std::size_t seen_classes = 10;
  std::size_t unseen_classes = 4;
  std::size_t per_class = 20;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  ZslDataset dataset;
  Matrix ground_truth;  // V*, descriptor_dim x feature_dim
  std::vector<std::string> warnings;
};

/// Draws a synthetic benchmark in which classifiers really are a linear map of
/// the descriptors.
///
/// Descriptors ~ N(0, 1); V* ~ N(0, 1/d_a); class prototype w_j = unit(V*^T a_j);
/// an instance of class j is unit(w_j + N(0, sigma^2 I)), or exactly w_j when
/// sigma is 0. Instances are laid out class-major.
inline SyntheticData make_synthetic(const SyntheticSpec& spec) {
  if (spec.feature_dim == 0 || spec.descriptor_dim == 0 || spec.seen_classes == 0 ||
      spec.unseen_classes == 0 || spec.per_class == 0) {
    throw DataError("synthetic spec: all counts must be >= 1");
  }
  if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma)) {
    throw DataError("synthetic spec: noise_sigma must be finite and >= 0");
  }

  SyntheticData out;
  if (spec.descriptor_dim > spec.feature_dim) {
    out.warnings.push_back("descriptor_dim " + std::to_string(spec.descriptor_dim) +
                           " exceeds feature_dim " + std::to_string(spec.feature_dim));
  }

  auto gaussian_matrix = [](Rng& rng, std::size_t r, std::size_t c, double std_dev) {
    Matrix m(r, c);
    for (double& v : m.values()) v = std_dev * rng.gaussian();
    return m;
  };

  Rng descriptor_rng(spec.seed, 1);
  Rng map_rng(spec.seed, 2);
  Rng noise_rng(spec.seed, 3);

  auto& d = out.dataset;
  d.seen_descriptors = gaussian_matrix(descriptor_rng, spec.seen_classes, spec.descriptor_dim, 1.0);
  d.unseen_descriptors =
      gaussian_matrix(descriptor_rng, spec.unseen_classes, spec.descriptor_dim, 1.0);
  out.ground_truth = gaussian_matrix(map_rng, spec.descriptor_dim, spec.feature_dim,
                                     1.0 / std::sqrt(static_cast<double>(spec.descriptor_dim)));

  auto sample = [&](const Matrix& descriptors, Matrix& features, Labels& labels) {
    const Matrix prototypes = normalize_rows(matmul(descriptors, out.ground_truth));
    features = Matrix(descriptors.rows() * spec.per_class, spec.feature_dim);
    labels.assign(features.rows(), 0);
    std::size_t i = 0;
    for (std::size_t c = 0; c < descriptors.rows(); ++c) {
      for (std::size_t k = 0; k < spec.per_class; ++k, ++i) {
        auto row = features.row(i);
        auto proto = prototypes.row(c);
        std::copy(proto.begin(), proto.end(), row.begin());
        labels[i] = c;
        if (spec.noise_sigma > 0.0) {
          for (double& v : row) v += spec.noise_sigma * noise_rng.gaussian();
          const double n = norm2(row);
          if (n > 0.0) {
            for (double& v : row) v /= n;
          }
        }
      }
    }
  };
  sample(d.seen_descriptors, d.train_features, d.train_labels);
  sample(d.unseen_descriptors, d.test_features, d.test_labels);
  return out;
}

/// Normalization applied when ingesting a dataset. Unset fields fall back to
/// the manifest, then to the defaults (features on, descriptors off).
struct NormalizationOptions {
  std::optional<bool> features;
  std::optional<bool> descriptors;
};

/// Loads a dataset from a key=value manifest. Component paths are relative to
/// the manifest's directory.
inline ZslDataset load_dataset(const std::filesystem::path& manifest,
                               const NormalizationOptions& opts = {}) {
  const auto kv = KeyValueFile::load(manifest);
  const auto base = manifest.parent_path();
  auto path_of = [&](const char* key) { return base / kv.require(key); };

  ZslDataset d;
  d.train_features = load_matrix(path_of("train_features"));
  d.train_labels = load_labels(path_of("train_labels"));
  d.test_features = load_matrix(path_of("test_features"));
  d.test_labels = load_labels(path_of("test_labels"));
  d.seen_descriptors = load_matrix(path_of("seen_descriptors"));
  d.unseen_descriptors = load_matrix(path_of("unseen_descriptors"));

  if (opts.features.value_or(kv.get_bool("normalize_features", true))) {
    d.train_features = normalize_rows(d.train_features);
    d.test_features = normalize_rows(d.test_features);
  }
  if (opts.descriptors.value_or(kv.get_bool("normalize_descriptors", false))) {
    d.seen_descriptors = normalize_rows(d.seen_descriptors);
    d.unseen_descriptors = normalize_rows(d.unseen_descriptors);
  }
  return d;
}

/// Writes the six component files (BIN matrices, text labels) plus `dataset.txt`.
/// Returns the manifest path.
inline std::filesystem::path save_dataset(const std::filesystem::path& dir, const ZslDataset& d) {
  std::filesystem::create_directories(dir);
  save_matrix(dir / "train_features.bin", d.train_features);
  save_labels(dir / "train_labels.txt", d.train_labels);
  save_matrix(dir / "test_features.bin", d.test_features);
  save_labels(dir / "test_labels.txt", d.test_labels);
  save_matrix(dir / "seen_descriptors.bin", d.seen_descriptors);
  save_matrix(dir / "unseen_descriptors.bin", d.unseen_descriptors);

  KeyValueFile kv;
  kv.set("train_features", std::string("train_features.bin"));
  kv.set("train_labels", std::string("train_labels.txt"));
  kv.set("test_features", std::string("test_features.bin"));
  kv.set("test_labels", std::string("test_labels.txt"));
  kv.set("seen_descriptors", std::string("seen_descriptors.bin"));
  kv.set("unseen_descriptors", std::string("unseen_descriptors.bin"));
  kv.set("normalize_features", std::string("1"));
  kv.set("normalize_descriptors", std::string("0"));
  const auto manifest = dir / "dataset.txt";
  kv.save(manifest);
  return manifest;
}

}  // namespace sslzsl
