#include "tcb/numerics.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "tcb/errors.hpp"
#include "tcb/random.hpp"

namespace {

using tcb::CholeskyFactor;
using tcb::DenseMatrix;
using tcb::SparseVector;

DenseMatrix matrix2(double a, double b, double c, double d) {
  DenseMatrix m(2, 2);
  m.at(0, 0) = a;
  m.at(0, 1) = b;
  m.at(1, 0) = c;
  m.at(1, 1) = d;
  return m;
}

DenseMatrix identity(int n) {
  DenseMatrix m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

// Random symmetric positive-definite matrix A = M^T M + I.
DenseMatrix random_spd(int n, tcb::Rng& rng) {
  DenseMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m.at(i, j) = 2.0 * rng.next_double() - 1.0;
  DenseMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += m.at(k, i) * m.at(k, j);
      a.at(i, j) = s;
    }
  for (int i = 0; i < n; ++i) a.at(i, i) += 1.0;
  return a;
}

TEST(Cholesky, IdentityFactorsToIdentity) {
  const CholeskyFactor f = tcb::cholesky(identity(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(f.L.at(i, j), i == j ? 1.0 : 0.0);
}

TEST(Cholesky, HandExpandedTwoByTwo) {
  const CholeskyFactor f = tcb::cholesky(matrix2(4, 2, 2, 3));
  EXPECT_DOUBLE_EQ(f.L.at(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(f.L.at(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(f.L.at(1, 0), 1.0);
  EXPECT_NEAR(f.L.at(1, 1), std::sqrt(2.0), 1e-15);
}

TEST(Cholesky, IndefiniteFailsAtPivotOne) {
  try {
    tcb::cholesky(matrix2(1, 2, 2, 1));
    FAIL() << "expected NotPositiveDefinite";
  } catch (const tcb::NotPositiveDefinite& e) {
    EXPECT_EQ(e.pivot, 1);
    EXPECT_NE(std::string(e.what()).find("not positive definite"), std::string::npos);
  }
}

TEST(Cholesky, RejectsNonSquareAndAsymmetric) {
  DenseMatrix rect(2, 3);
  EXPECT_THROW(tcb::cholesky(rect), tcb::RuntimeError);
  EXPECT_THROW(tcb::cholesky(matrix2(1, 0.5, 0.2, 1)), tcb::RuntimeError);
}

TEST(Cholesky, RoundTripsRandomSpdUpToSize40) {
  tcb::Rng rng(123);
  for (int n = 1; n <= 40; ++n) {
    const DenseMatrix a = random_spd(n, rng);
    const CholeskyFactor f = tcb::cholesky(a);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double r = 0.0;
        for (int k = 0; k <= std::min(i, j); ++k) r += f.L.at(i, k) * f.L.at(j, k);
        num += (r - a.at(i, j)) * (r - a.at(i, j));
        den += a.at(i, j) * a.at(i, j);
      }
    EXPECT_LE(std::sqrt(num), 1e-8 * std::sqrt(den)) << "size " << n;
  }
}

TEST(Cholesky, JitterLadderIsLoggedForNearSingular) {
  DenseMatrix a(2, 2);  // rank-1: [[1,1],[1,1]]
  a.at(0, 0) = a.at(0, 1) = a.at(1, 0) = a.at(1, 1) = 1.0;
  std::vector<double> jitter;
  const CholeskyFactor f = tcb::cholesky(a, &jitter);
  EXPECT_FALSE(jitter.empty());
  EXPECT_GT(f.L.at(0, 0), 0.0);
  EXPECT_GT(f.L.at(1, 1), 0.0);
}

TEST(Solve, IdentityReturnsRhs) {
  const CholeskyFactor f = tcb::cholesky(identity(3));
  const std::vector<double> b = {3.0, -1.0, 2.5};
  EXPECT_EQ(tcb::solve(f, b), b);
}

TEST(Solve, HandInvertedTwoByTwo) {
  const CholeskyFactor f = tcb::cholesky(matrix2(4, 2, 2, 3));
  const std::vector<double> x = tcb::solve(f, {8.0, 7.0});
  EXPECT_NEAR(x[0], 1.25, 1e-12);
  EXPECT_NEAR(x[1], 1.5, 1e-12);
}

TEST(Solve, ZeroRhsGivesZero) {
  const CholeskyFactor f = tcb::cholesky(matrix2(4, 2, 2, 3));
  const std::vector<double> x = tcb::solve(f, {0.0, 0.0});
  EXPECT_DOUBLE_EQ(x[0], 0.0);
  EXPECT_DOUBLE_EQ(x[1], 0.0);
}

TEST(Solve, DimensionMismatchThrows) {
  const CholeskyFactor f = tcb::cholesky(identity(2));
  EXPECT_THROW(tcb::solve(f, {1.0, 2.0, 3.0}), tcb::RuntimeError);
}

TEST(Solve, ResidualSmallOnRandomSystems) {
  tcb::Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.bounded(12));
    const DenseMatrix a = random_spd(n, rng);
    std::vector<double> b(n);
    double bmax = 0.0;
    for (double& v : b) {
      v = 2.0 * rng.next_double() - 1.0;
      bmax = std::max(bmax, std::abs(v));
    }
    const std::vector<double> x = tcb::solve(tcb::cholesky(a), b);
    for (int i = 0; i < n; ++i) {
      double r = -b[i];
      for (int j = 0; j < n; ++j) r += a.at(i, j) * x[j];
      EXPECT_LE(std::abs(r), 1e-7 * std::max(bmax, 1.0)) << "trial " << trial;
    }
  }
}

TEST(LogDet, KnownValues) {
  EXPECT_DOUBLE_EQ(tcb::log_det(tcb::cholesky(identity(4))), 0.0);
  DenseMatrix d(2, 2);
  d.at(0, 0) = d.at(1, 1) = 2.0;
  EXPECT_NEAR(tcb::log_det(tcb::cholesky(d)), 2.0 * std::log(2.0), 1e-14);
  EXPECT_NEAR(tcb::log_det(tcb::cholesky(matrix2(4, 2, 2, 3))), std::log(8.0), 1e-14);
}

TEST(InverseSpd, MultipliesBackToIdentity) {
  const DenseMatrix a = matrix2(4, 2, 2, 3);
  const DenseMatrix inv = tcb::inverse_spd(tcb::cholesky(a));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double s = 0.0;
      for (int k = 0; k < 2; ++k) s += a.at(i, k) * inv.at(k, j);
      EXPECT_NEAR(s, i == j ? 1.0 : 0.0, 1e-12);
    }
  EXPECT_DOUBLE_EQ(inv.at(0, 1), inv.at(1, 0));
}

SparseVector sparse(std::vector<tcb::Entry> entries) {
  SparseVector v;
  v.entries = std::move(entries);
  return v;
}

TEST(Dot, DisjointIndexSetsGiveZero) {
  EXPECT_DOUBLE_EQ(tcb::dot(sparse({{0, 1.0}, {2, 2.0}}), sparse({{1, 5.0}, {3, 5.0}})), 0.0);
}

TEST(Dot, UnitVectorSelfDotIsOne) {
  const double inv = 1.0 / std::sqrt(3.0);
  const SparseVector v = sparse({{0, inv}, {4, inv}, {9, inv}});
  EXPECT_NEAR(tcb::dot(v, v), 1.0, 1e-9);
}

TEST(Dot, SingleSharedIndex) {
  EXPECT_DOUBLE_EQ(tcb::dot(sparse({{0, 0.6}, {2, 0.8}}), sparse({{2, 0.5}, {3, 1.0}})), 0.4);
}

TEST(Gram, OrthonormalSetGivesIdentity) {
  const std::vector<SparseVector> vs = {sparse({{0, 1.0}}), sparse({{1, 1.0}}),
                                        sparse({{2, 1.0}})};
  const DenseMatrix g = tcb::gram_matrix(vs);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(g.at(i, j), i == j ? 1.0 : 0.0);
}

TEST(Gram, DuplicatedUnitVectorGivesAllOnes) {
  const SparseVector v = sparse({{0, 0.6}, {1, 0.8}});
  const DenseMatrix g = tcb::gram_matrix({v, v});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(g.at(i, j), 1.0);
}

// Brute-force oracle: dot products via a plain index->weight map.
TEST(Gram, MatchesBruteForceOracle) {
  const std::vector<SparseVector> vs = {sparse({{0, 0.5}, {3, 1.5}, {7, -0.25}}),
                                        sparse({{1, 2.0}, {3, 0.5}}),
                                        sparse({{0, -1.0}, {7, 4.0}})};
  const DenseMatrix g = tcb::gram_matrix(vs);
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = 0; j < vs.size(); ++j) {
      std::map<int, double> lhs;
      for (const auto& e : vs[i].entries) lhs[e.index] = e.weight;
      double expected = 0.0;
      for (const auto& e : vs[j].entries)
        if (lhs.count(e.index)) expected += lhs[e.index] * e.weight;
      EXPECT_DOUBLE_EQ(g.at(static_cast<int>(i), static_cast<int>(j)), expected);
    }
}

TEST(Gram, BitwiseSymmetric) {
  tcb::Rng rng(9);
  std::vector<SparseVector> vs;
  for (int i = 0; i < 12; ++i) {
    SparseVector v;
    for (int j = 0; j < 6; ++j)
      if (rng.next_double() < 0.6) v.entries.push_back({j, 2.0 * rng.next_double() - 1.0});
    vs.push_back(std::move(v));
  }
  const DenseMatrix g = tcb::gram_matrix(vs);
  for (int i = 0; i < g.rows; ++i)
    for (int j = 0; j < g.cols; ++j) EXPECT_EQ(g.at(i, j), g.at(j, i));
}

TEST(Sigmoid, CenterAndSymmetry) {
  EXPECT_DOUBLE_EQ(tcb::sigmoid(0.0), 0.5);
  for (double z = -30.0; z <= 30.0; z += 0.37)
    EXPECT_NEAR(tcb::sigmoid(z) + tcb::sigmoid(-z), 1.0, 1e-15);
}

TEST(Sigmoid, StableAtExtremes) {
  EXPECT_DOUBLE_EQ(tcb::sigmoid(500.0), 1.0);
  const double tiny = tcb::sigmoid(-500.0);
  EXPECT_GT(tiny, 0.0);
  EXPECT_LT(tiny, 1e-200);
  EXPECT_TRUE(std::isfinite(tcb::sigmoid(1e6)));
  EXPECT_TRUE(std::isfinite(tcb::sigmoid(-1e6)));
}

TEST(StudentT, CenterIsOne) {
  EXPECT_DOUBLE_EQ(tcb::student_t_two_tailed_p(0.0, 5), 1.0);
}

// Reference values from an independent statistics library, frozen here.
TEST(StudentT, MatchesReferenceValues) {
  EXPECT_NEAR(tcb::student_t_two_tailed_p(2.262, 9), 0.050, 5e-4);
  EXPECT_NEAR(tcb::student_t_two_tailed_p(2.262, 9), 0.05001284550245455, 1e-10);
  EXPECT_NEAR(tcb::student_t_two_tailed_p(12.706, 1), 0.050, 5e-4);
  EXPECT_NEAR(tcb::student_t_two_tailed_p(12.706, 1), 0.05000080235813317, 1e-10);
  EXPECT_NEAR(tcb::student_t_two_tailed_p(2.0, 5), 0.10193947882985828, 1e-10);
  EXPECT_NEAR(tcb::student_t_two_tailed_p(1.0, 30), 0.32530861542602985, 1e-10);
  EXPECT_NEAR(tcb::student_t_two_tailed_p(0.5, 3), 0.651447964848151, 1e-10);
  const double far_tail = tcb::student_t_two_tailed_p(8.6, 19);
  EXPECT_NEAR(far_tail / 5.6321365255518645e-08, 1.0, 1e-8);
}

TEST(StudentT, SymmetricInT) {
  EXPECT_DOUBLE_EQ(tcb::student_t_two_tailed_p(2.5, 7), tcb::student_t_two_tailed_p(-2.5, 7));
}

TEST(StudentT, MonotonicallyDecreasingInAbsT) {
  for (const int df : {1, 4, 30}) {
    double prev = 1.0;
    for (double t = 0.5; t <= 10.0; t += 0.5) {
      const double p = tcb::student_t_two_tailed_p(t, df);
      EXPECT_LT(p, prev) << "df " << df << " t " << t;
      prev = p;
    }
  }
}

TEST(StudentT, EdgeCases) {
  EXPECT_THROW(tcb::student_t_two_tailed_p(1.0, 0), tcb::ConfigError);
  EXPECT_THROW(tcb::student_t_two_tailed_p(1.0, -3), tcb::ConfigError);
  EXPECT_DOUBLE_EQ(tcb::student_t_two_tailed_p(std::numeric_limits<double>::infinity(), 4), 0.0);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(tcb::student_t_two_tailed_p(nan, 4), tcb::ConfigError);
}

}  // namespace
