#include <gtest/gtest.h>

#include <filesystem>

#include "sslzsl/dataset.hpp"
#include "sslzsl/eval.hpp"

using namespace sslzsl;

namespace {

SyntheticSpec small_spec(double noise, std::uint64_t seed) {
  SyntheticSpec s;
  s.feature_dim = 16;
  s.descriptor_dim = 8;
  s.seen_classes = 10;
  s.unseen_classes = 4;
  s.per_class = 20;
  s.noise_sigma = noise;
  s.seed = seed;
  return s;
}

}  // namespace

TEST(Validate, SyntheticIsValid) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (double noise : {0.0, 0.3}) {
      EXPECT_TRUE(validate_dataset(make_synthetic(small_spec(noise, seed)).dataset).empty());
    }
  }
}

TEST(Validate, LabelOutOfRange) {
  auto d = make_synthetic(small_spec(0.0, 1)).dataset;
  d.train_labels[3] = d.seen_classes();
  const auto issues = validate_dataset(d);
  ASSERT_FALSE(issues.empty());
  EXPECT_NE(issues.front().find("out of range"), std::string::npos);
}

TEST(Validate, DescriptorDimensionMismatch) {
  auto d = make_synthetic(small_spec(0.0, 1)).dataset;
  d.seen_descriptors = Matrix(d.seen_classes(), 5);
  d.unseen_descriptors = Matrix(d.unseen_classes(), 6);
  const auto issues = validate_dataset(d);
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_NE(issues[0].find("descriptor dimension mismatch"), std::string::npos);
}

TEST(Validate, MissingSeenClassAndLengthMismatch) {
  auto d = make_synthetic(small_spec(0.0, 1)).dataset;
  for (auto& y : d.train_labels) {
    if (y == 2) y = 1;
  }
  d.test_labels.pop_back();
  const auto issues = validate_dataset(d);
  EXPECT_EQ(issues.size(), 2u);
  EXPECT_THROW(require_valid(d), DataError);
}

TEST(Synthetic, ZeroNoiseRowsEqualPrototypes) {
  const auto syn = make_synthetic(small_spec(0.0, 4));
  const Matrix protos =
      normalize_rows(matmul(syn.dataset.seen_descriptors, syn.ground_truth));
  const auto& d = syn.dataset;
  for (std::size_t i = 0; i < d.train_features.rows(); ++i) {
    for (std::size_t k = 0; k < d.feature_dim(); ++k) {
      EXPECT_EQ(d.train_features(i, k), protos(d.train_labels[i], k));
    }
  }
}

TEST(Synthetic, DeterministicGivenSeed) {
  const auto a = make_synthetic(small_spec(0.3, 7));
  const auto b = make_synthetic(small_spec(0.3, 7));
  const auto c = make_synthetic(small_spec(0.3, 8));
  EXPECT_EQ(a.dataset.train_features, b.dataset.train_features);
  EXPECT_EQ(a.dataset.test_features, b.dataset.test_features);
  EXPECT_EQ(a.ground_truth, b.ground_truth);
  EXPECT_NE(a.dataset.train_features, c.dataset.train_features);
}

TEST(Synthetic, FeatureRowsAreUnitNorm) {
  for (double noise : {0.0, 0.3, 2.0}) {
    const auto d = make_synthetic(small_spec(noise, 3)).dataset;
    for (double n : row_norms(d.train_features)) EXPECT_NEAR(n, 1.0, 1e-12);
    for (double n : row_norms(d.test_features)) EXPECT_NEAR(n, 1.0, 1e-12);
  }
}

TEST(Synthetic, ZeroNoiseGroundTruthClassifiesPerfectly) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto syn = make_synthetic(small_spec(0.0, seed));
    const Matrix protos = matmul(syn.dataset.unseen_descriptors, syn.ground_truth);
    const Labels pred = classify(cosine_scores(syn.dataset.test_features, protos));
    EXPECT_EQ(pred, syn.dataset.test_labels) << "seed " << seed;
  }
}

TEST(Synthetic, WarnsWhenDescriptorDimExceedsFeatureDim) {
  auto spec = small_spec(0.0, 1);
  spec.descriptor_dim = 20;
  EXPECT_EQ(make_synthetic(spec).warnings.size(), 1u);
  spec.per_class = 0;
  EXPECT_THROW(make_synthetic(spec), DataError);
}

TEST(Manifest, SaveLoadRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "sslzsl_manifest";
  std::filesystem::remove_all(dir);
  const auto d = make_synthetic(small_spec(0.3, 2)).dataset;
  const auto manifest = save_dataset(dir, d);
  const auto back = load_dataset(manifest, {.features = false, .descriptors = false});
  EXPECT_EQ(back.train_features, d.train_features);
  EXPECT_EQ(back.train_labels, d.train_labels);
  EXPECT_EQ(back.test_features, d.test_features);
  EXPECT_EQ(back.test_labels, d.test_labels);
  EXPECT_EQ(back.seen_descriptors, d.seen_descriptors);
  EXPECT_EQ(back.unseen_descriptors, d.unseen_descriptors);

  const auto normalized = load_dataset(manifest, {.features = std::nullopt, .descriptors = true});
  for (double n : row_norms(normalized.seen_descriptors)) EXPECT_NEAR(n, 1.0, 1e-12);
}
