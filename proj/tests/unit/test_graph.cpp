#include "gllrss/error.hpp"
#include "gllrss/graph.hpp"
#include "gllrss/synth.hpp"

#include "../support/oracles.hpp"

#include <gtest/gtest.h>

using namespace gllrss;

namespace {

Matrix two_vertex() {
  Matrix w(2, 2);
  w << 0, 1, 1, 0;
  return w;
}

CglMatrix random_cgl(Eigen::Index n, std::mt19937_64& rng) {
  Matrix w = oracle::random_weights(n, rng, 1.0);
  return laplacian_from_graph(Graph(w));
}

}  // namespace

TEST(Graph, RejectsInvalidWeights) {
  Matrix asym = two_vertex();
  asym(0, 1) = 2.0;
  try {
    Graph g(asym);
    FAIL() << "accepted asymmetric weights";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("asymmetric"), std::string::npos) << e.what();
  }
  Matrix neg = two_vertex() * -1.0;
  EXPECT_THROW(Graph{neg}, ValidationError);
  Matrix diag = two_vertex();
  diag(1, 1) = 0.5;
  EXPECT_THROW(Graph{diag}, ValidationError);
  EXPECT_THROW(Graph{Matrix(2, 3)}, ValidationError);
}

TEST(Laplacian, TwoVertex) {
  const CglMatrix l = laplacian_from_graph(Graph(two_vertex()));
  Matrix expected(2, 2);
  expected << 1, -1, -1, 1;
  EXPECT_EQ(l.matrix(), expected);
}

TEST(Laplacian, EmptyGraphIsZero) {
  const CglMatrix l = laplacian_from_graph(Graph(Matrix::Zero(4, 4)));
  EXPECT_EQ(l.matrix(), Matrix::Zero(4, 4));
}

TEST(Laplacian, RandomGraphRowSumsAndOffDiagonals) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix w = oracle::random_weights(5, rng);
    const CglMatrix l = laplacian_from_graph(Graph(w));
    for (Eigen::Index i = 0; i < 5; ++i) {
      double row = 0.0;
      for (Eigen::Index j = 0; j < 5; ++j) {
        row += l(i, j);
        if (i != j) EXPECT_EQ(l(i, j), -w(i, j));
      }
      EXPECT_NEAR(row, 0.0, 1e-12);
    }
    EXPECT_TRUE(validate_cgl(l.matrix(), 1e-8).ok());
  }
}

TEST(NormalizeTrace, Examples) {
  const CglMatrix l = laplacian_from_graph(Graph(two_vertex()));
  Matrix expected(2, 2);
  expected << 2, -2, -2, 2;
  EXPECT_EQ(normalize_trace(l, 4.0).matrix(), expected);

  std::mt19937_64 rng(3);
  const CglMatrix r = random_cgl(30, rng);
  const CglMatrix n30 = normalize_trace(r, 30.0);
  EXPECT_NEAR(n30.trace(), 30.0, 30.0 * 1e-10);
  const CglMatrix again = normalize_trace(n30, 30.0);
  EXPECT_LE((again.matrix() - n30.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(validate_cgl(n30.matrix()).ok());
}

TEST(NormalizeTrace, ZeroTraceThrows) {
  const CglMatrix l = laplacian_from_graph(Graph(Matrix::Zero(3, 3)));
  EXPECT_THROW(normalize_trace(l, 3.0), Error);
}

TEST(Smoothness, Examples) {
  const CglMatrix l = laplacian_from_graph(Graph(two_vertex()));
  EXPECT_DOUBLE_EQ(smoothness(Vector::Ones(2), l), 0.0);
  Vector x(2);
  x << 1, 0;
  EXPECT_DOUBLE_EQ(smoothness(x, l), 1.0);
  EXPECT_THROW(smoothness(Vector::Ones(3), l), Error);
}

TEST(Smoothness, MatchesEdgeSum) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix w = oracle::random_weights(6, rng);
    const CglMatrix l = laplacian_from_graph(Graph(w));
    const Vector x = oracle::random_matrix(6, 1, rng);
    const double expected = oracle::edge_sum_smoothness(x, w);
    EXPECT_NEAR(smoothness(x, l), expected, 1e-9 * std::max(1.0, expected));
  }
}

TEST(Smoothness, PsdAndNullSpaceInvariance) {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const CglMatrix l = random_cgl(7, rng);
    const Vector x = oracle::random_matrix(7, 1, rng, 3.0);
    const double s = smoothness(x, l);
    EXPECT_GE(s, -1e-9 * x.squaredNorm());
    const double shifted = smoothness((x.array() + 2.5).matrix(), l);
    EXPECT_NEAR(shifted, s, 1e-8 * std::max(1.0, s));
  }
}

TEST(SpatiotemporalSmoothness, ConstantColumnsIdentity) {
  std::mt19937_64 rng(9);
  const CglMatrix l = random_cgl(5, rng);
  const Vector x1 = oracle::random_matrix(5, 1, rng);
  SignalMatrix x = x1.replicate(1, 6);
  const auto r = TransitionMatrix::identity(5);
  EXPECT_NEAR(spatiotemporal_smoothness(x, r, l), smoothness(x1, l), 1e-12);
  EXPECT_NEAR(spatiotemporal_smoothness(SignalMatrix::Ones(5, 6), r, l), 0.0, 1e-12);
}

TEST(SpatiotemporalSmoothness, MatchesPerInstantSum) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix w = oracle::random_weights(6, rng);
    const CglMatrix l = laplacian_from_graph(Graph(w));
    Vector c(6);
    for (auto& v : c) v = u(rng);
    const auto r = TransitionMatrix::diagonal(c);
    const SignalMatrix x = oracle::random_matrix(6, 9, rng);
    const Matrix diffs = oracle::difference_loop(x, Matrix(c.asDiagonal()));
    double expected = 0.0;
    for (Eigen::Index t = 0; t < x.cols(); ++t)
      expected += oracle::edge_sum_smoothness(diffs.col(t), w);
    EXPECT_NEAR(spatiotemporal_smoothness(x, r, l), expected, 1e-9 * expected);
  }
}

TEST(Eigendecompose, TwoVertex) {
  const Spectrum s = eigendecompose(laplacian_from_graph(Graph(two_vertex())));
  EXPECT_NEAR(s.eigenvalues(0), 0.0, 1e-12);
  EXPECT_NEAR(s.eigenvalues(1), 2.0, 1e-12);
  EXPECT_NEAR(std::abs(s.eigenvectors(0, 0)), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(s.eigenvectors(0, 0), s.eigenvectors(1, 0), 1e-12);
}

TEST(Eigendecompose, ZeroMatrix) {
  const Spectrum s = eigendecompose(laplacian_from_graph(Graph(Matrix::Zero(4, 4))));
  EXPECT_EQ(s.eigenvalues, Vector::Zero(4));
}

TEST(Eigendecompose, SpectrumInvariants) {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 5; ++rep) {
    const CglMatrix l = normalize_trace(random_cgl(8, rng), 8.0);
    const Spectrum s = eigendecompose(l);
    for (Eigen::Index i = 1; i < 8; ++i) EXPECT_LE(s.eigenvalues(i - 1), s.eigenvalues(i));
    const Matrix& u = s.eigenvectors;
    EXPECT_LE((u.transpose() * u - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-8);
    const Matrix rec = u * s.eigenvalues.asDiagonal() * u.transpose();
    EXPECT_LE((rec - l.matrix()).cwiseAbs().maxCoeff(),
              1e-7 * std::max(1.0, l.matrix().cwiseAbs().maxCoeff()));
    EXPECT_NEAR(s.eigenvalues.sum(), 8.0, 8.0 * 1e-8);
    EXPECT_NEAR(s.eigenvalues(0), 0.0, 1e-8);
    // Complete random graph is connected: first eigenvector is constant.
    for (Eigen::Index i = 0; i < 8; ++i)
      EXPECT_NEAR(std::abs(u(i, 0)), 1.0 / std::sqrt(8.0), 1e-6);
  }
}

TEST(ValidateCgl, Examples) {
  std::mt19937_64 rng(13);
  const CglMatrix l = random_cgl(5, rng);
  EXPECT_TRUE(validate_cgl(l.matrix()).ok());

  const CglReport id = validate_cgl(Matrix::Identity(3, 3));
  EXPECT_FALSE(id.ok());
  EXPECT_FALSE(id.row_sums.passed);
  EXPECT_NEAR(id.row_sums.worst, 1.0, 1e-12);
  EXPECT_TRUE(id.off_diagonal_sign.passed);

  Matrix flipped = l.matrix();
  flipped(1, 3) = flipped(3, 1) = 0.5;
  const CglReport rep = validate_cgl(flipped);
  EXPECT_FALSE(rep.off_diagonal_sign.passed);
  EXPECT_NEAR(rep.off_diagonal_sign.worst, 0.5, 1e-12);
  EXPECT_EQ(std::min(rep.off_diagonal_sign.row, rep.off_diagonal_sign.col), 1);
  EXPECT_EQ(std::max(rep.off_diagonal_sign.row, rep.off_diagonal_sign.col), 3);
  EXPECT_FALSE(rep.describe().empty());
}

TEST(CglMatrix, FromMatrixValidates) {
  EXPECT_THROW(CglMatrix::from_matrix(Matrix::Identity(3, 3)), ValidationError);
  Matrix l(2, 2);
  l << 1, -1, -1, 1;
  EXPECT_NO_THROW(CglMatrix::from_matrix(l));
}
