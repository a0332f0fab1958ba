#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sslzsl/matrix.hpp"
#include "sslzsl/rng.hpp"

using namespace sslzsl;

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  const Matrix m{{1.5, -2.0, 3.0}, {0.25, 4.0, -1.0}};
  EXPECT_EQ(matmul(Matrix::identity(2), m), m);
}

TEST(Matmul, SmallExample) {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{1}, {1}};
  EXPECT_EQ(matmul(a, b), (Matrix{{3}, {7}}));
}

TEST(Matmul, MatchesTripleLoopOracle) {
  Rng rng(11);
  const Matrix a = oracle::random_matrix(rng, 5, 4);
  const Matrix b = oracle::random_matrix(rng, 4, 3);
  const Matrix expect = oracle::triple_loop_matmul(a, b);
  EXPECT_LT(oracle::max_abs_diff(matmul(a, b), expect), 1e-14);
  EXPECT_LT(oracle::max_abs_diff(matmul_nt(a, transpose(b)), expect), 1e-14);
  EXPECT_LT(oracle::max_abs_diff(matmul_tn(transpose(a), b), expect), 1e-14);
}

TEST(Matmul, DimensionMismatchNamesBothShapes) {
  try {
    matmul(Matrix(2, 3), Matrix(2, 3));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos);
  }
}

TEST(Matmul, AssociativeOnRandomTriples) {
  Rng rng(3);
  for (int t = 0; t < 25; ++t) {
    const Matrix a = oracle::random_matrix(rng, 4, 6);
    const Matrix b = oracle::random_matrix(rng, 6, 5);
    const Matrix c = oracle::random_matrix(rng, 5, 3);
    const Matrix left = matmul(matmul(a, b), c);
    const Matrix right = matmul(a, matmul(b, c));
    for (std::size_t k = 0; k < left.size(); ++k) {
      const double l = left.values()[k];
      const double r = right.values()[k];
      EXPECT_LE(std::abs(l - r), 1e-9 * std::max(1.0, std::abs(l)));
    }
  }
}

TEST(NormalizeRows, Examples) {
  const Matrix out = normalize_rows(Matrix{{3, 4}, {0, 0}}, 1e-12);
  EXPECT_DOUBLE_EQ(out(0, 0), 0.6);
  EXPECT_DOUBLE_EQ(out(0, 1), 0.8);
  EXPECT_EQ(out(1, 0), 0.0);
  EXPECT_EQ(out(1, 1), 0.0);
}

TEST(NormalizeRows, UnitNormAndIdempotent) {
  Rng rng(5);
  const Matrix m = oracle::random_matrix(rng, 20, 7, 3.0);
  const Matrix once = normalize_rows(m);
  const Matrix twice = normalize_rows(once);
  for (double n : row_norms(once)) EXPECT_NEAR(n, 1.0, 1e-12);
  EXPECT_LT(oracle::max_abs_diff(once, twice), 1e-12);
}

TEST(NormalizeRows, RejectsNonPositiveEps) {
  EXPECT_THROW(normalize_rows(Matrix(1, 1, 1.0), 0.0), DataError);
}

TEST(RidgeSolve, IdentityGramReturnsRhs) {
  const Matrix rhs{{1, 2}, {3, 4}, {5, 6}};
  EXPECT_LT(oracle::max_abs_diff(ridge_solve(Matrix::identity(3), rhs, 0.0), rhs), 1e-15);
}

TEST(RidgeSolve, ScalarCase) {
  const Matrix x = ridge_solve(Matrix{{2}}, Matrix{{6}}, 1.0);
  EXPECT_DOUBLE_EQ(x(0, 0), 2.0);
}

TEST(RidgeSolve, ResidualOnRandomSpd) {
  Rng rng(17);
  for (int t = 0; t < 10; ++t) {
    const Matrix b = oracle::random_matrix(rng, 8, 8);
    const Matrix gram = matmul_tn(b, b);
    const Matrix rhs = oracle::random_matrix(rng, 8, 3);
    const double gamma = 0.1 * t;
    const Matrix x = ridge_solve(gram, rhs, gamma);
    Matrix system = gram;
    for (std::size_t i = 0; i < 8; ++i) system(i, i) += gamma;
    const Matrix lhs = oracle::triple_loop_matmul(system, x);
    EXPECT_LT(oracle::max_abs_diff(lhs, rhs), 1e-8);
  }
}

TEST(RidgeSolve, SingularSystemThrows) {
  const Matrix gram{{1, 1}, {1, 1}};
  EXPECT_THROW(ridge_solve(gram, Matrix{{1}, {1}}, 0.0), SingularSystemError);
  EXPECT_NO_THROW(ridge_solve(gram, Matrix{{1}, {1}}, 1e-3));
}

TEST(RidgeSolve, ShapeErrors) {
  EXPECT_THROW(ridge_solve(Matrix(2, 3), Matrix(2, 1), 1.0), DimensionError);
  EXPECT_THROW(ridge_solve(Matrix::identity(2), Matrix(3, 1), 1.0), DimensionError);
}

TEST(MatrixType, RejectsWrongDataLength) {
  EXPECT_THROW(Matrix(2, 2, std::vector<double>(3)), DimensionError);
}

TEST(RngTest, ShuffleIsPermutationAndDeterministic) {
  const auto a = epoch_permutation(50, 9, 2);
  const auto b = epoch_permutation(50, 9, 2);
  const auto c = epoch_permutation(50, 9, 3);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i);
}

TEST(RngTest, GaussianMoments) {
  Rng rng(1);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    s += g;
    s2 += g * g;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
}
