#include "dcopt/graph.hpp"

#include <gtest/gtest.h>

#include "dcopt/random.hpp"
#include "dcopt/verify.hpp"
#include "oracles.hpp"

namespace dcopt {
namespace {

// Left eigenvector of the five-agent digraph, solved by hand from xi^T L = 0:
// xi = [2, 4, 3, 1, 1] / 11. PowerLeftNull reproduces it to 1e-15.
const double kFig1Xi[] = {2.0 / 11, 4.0 / 11, 3.0 / 11, 1.0 / 11, 1.0 / 11};
// Spectra from oracle::JacobiEigenvalues.
const double kFig1Lambda2Bar = 0.20648681179482006;
const double kFig1LtL[] = {0.0, 1.2832608934133187, 2.5420380549139496,
                           5.4395931021451061, 8.7351079495276256};

Digraph TwoNode(double w12, double w21) {
  Eigen::MatrixXd a(2, 2);
  a << 0.0, w12, w21, 0.0;
  return Digraph(a);
}

TEST(Laplacian, TwoNodeBidirectional) {
  Eigen::MatrixXd expected(2, 2);
  expected << 1, -1, -1, 1;
  EXPECT_EQ(BuildLaplacian(TwoNode(1, 1)), expected);
}

TEST(Laplacian, Fig1RowsSumToZero) {
  const Eigen::MatrixXd l = BuildLaplacian(Fig1Digraph());
  EXPECT_LT(l.rowwise().sum().cwiseAbs().maxCoeff(), 1e-15);
  Eigen::RowVectorXd row1(5);
  row1 << 2, 0, -1, 0, -1;
  EXPECT_EQ(l.row(0), row1);
}

TEST(Laplacian, SingleNode) {
  EXPECT_EQ(BuildLaplacian(Digraph(Eigen::MatrixXd::Zero(1, 1))),
            Eigen::MatrixXd::Zero(1, 1));
}

TEST(Digraph, RejectsBadMatrices) {
  EXPECT_THROW(Digraph(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
  Eigen::MatrixXd neg(2, 2);
  neg << 0, -1, 1, 0;
  EXPECT_THROW(Digraph{neg}, std::invalid_argument);
  Eigen::MatrixXd loop(2, 2);
  loop << 1, 1, 1, 0;
  EXPECT_THROW(Digraph{loop}, std::invalid_argument);
}

TEST(Digraph, EdgeListRoundTrip) {
  const Digraph g = Fig1Digraph();
  const Digraph back = Digraph::FromEdgeListText(g.ToEdgeListText());
  EXPECT_EQ(back.adjacency(), g.adjacency());

  const Digraph w = Digraph::FromEdgeListText("# header\n1 2 0.5\n2 1 2\n");
  EXPECT_DOUBLE_EQ(w.weight(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(w.weight(0, 1), 2.0);
  EXPECT_THROW(Digraph::FromEdgeListText("1 1\n"), std::invalid_argument);
  EXPECT_THROW(Digraph::FromEdgeListText("1 2 3 4\n"), std::invalid_argument);
  EXPECT_THROW(Digraph::FromEdgeListText("1 x\n"), std::invalid_argument);
}

TEST(StrongConnectivity, Cases) {
  EXPECT_TRUE(IsStronglyConnected(Fig1Digraph()));
  EXPECT_FALSE(IsStronglyConnected(Digraph::FromEdges(2, {{0, 1}})));
  EXPECT_TRUE(IsStronglyConnected(Digraph(Eigen::MatrixXd::Zero(1, 1))));
  EXPECT_TRUE(IsStronglyConnected(SymmetricCycle(7)));
}

TEST(Balance, Cases) {
  EXPECT_TRUE(IsBalanced(SymmetricCycle(6)));
  EXPECT_FALSE(IsBalanced(Fig1Digraph()));
  EXPECT_TRUE(IsBalanced(Digraph(Eigen::MatrixXd::Zero(1, 1))));
}

TEST(LeftEigenvector, Fig1MatchesHandSolution) {
  const Eigen::VectorXd xi = LeftEigenvector(BuildLaplacian(Fig1Digraph()));
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(xi(i), kFig1Xi[i], 1e-14);
}

TEST(LeftEigenvector, OracleAgreesWithFrozenValue) {
  const auto l = oracle::Laplacian(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {1, 4}, {4, 0}, {2, 0}});
  const auto xi = oracle::PowerLeftNull(l);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(xi[i], kFig1Xi[i], 1e-14);
}

TEST(LeftEigenvector, BalancedIsUniform) {
  const Eigen::VectorXd xi = LeftEigenvector(BuildLaplacian(SymmetricCycle(6)));
  EXPECT_LT((xi.array() - 1.0 / 6).abs().maxCoeff(), 1e-14);
}

TEST(LeftEigenvector, TwoNodeWeighted) {
  // 1->2 weight 1, 2->1 weight 2: L = [[2,-2],[-1,1]], xi ∝ [1, 2].
  const Eigen::VectorXd xi = LeftEigenvector(BuildLaplacian(TwoNode(2, 1)));
  EXPECT_NEAR(xi(0), 1.0 / 3, 1e-15);
  EXPECT_NEAR(xi(1), 2.0 / 3, 1e-15);
}

TEST(LeftEigenvector, RejectsDisconnected) {
  EXPECT_THROW(LeftEigenvector(BuildLaplacian(Digraph::FromEdges(3, {{0, 1}, {1, 0}}))),
               std::domain_error);
  EXPECT_THROW(LeftEigenvector(BuildLaplacian(Digraph::FromEdges(2, {{0, 1}}))),
               std::domain_error);
}

TEST(LeftEigenvector, MatchesExponentialLimit) {
  const Eigen::MatrixXd l = BuildLaplacian(Fig1Digraph());
  const Eigen::MatrixXd e = LaplacianExponential(l, 200.0);
  const Eigen::VectorXd xi = LeftEigenvector(l);
  for (int i = 0; i < 5; ++i) {
    EXPECT_LT((e.row(i).transpose() - xi).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SpectralCertificate, TwoNode) {
  const Eigen::MatrixXd l = BuildLaplacian(TwoNode(1, 1));
  const Eigen::VectorXd xi = LeftEigenvector(l);
  Eigen::MatrixXd expected(2, 2);
  expected << 1, -1, -1, 1;
  EXPECT_LT((SymmetrizedLaplacian(l, xi) - expected).cwiseAbs().maxCoeff(), 1e-15);
  const auto cert = ComputeSpectralCertificate(l, xi);
  EXPECT_NEAR(cert.lambda2_bar, 2.0, 1e-14);
  EXPECT_NEAR(cert.lambdaN_bar, 4.0, 1e-14);
  EXPECT_NEAR(cert.lambda2_LtL, 4.0, 1e-14);
}

TEST(SpectralCertificate, Fig1FrozenValues) {
  const Eigen::MatrixXd l = BuildLaplacian(Fig1Digraph());
  const auto cert = ComputeSpectralCertificate(l, LeftEigenvector(l));
  EXPECT_NEAR(cert.lambda2_bar, kFig1Lambda2Bar, 1e-12);
  EXPECT_NEAR(cert.lambda2_LtL, kFig1LtL[1], 1e-12);
  EXPECT_NEAR(cert.lambdaN_bar, kFig1LtL[4], 1e-12);
  EXPECT_NEAR(cert.lambda1_bar, 0.0, 1e-12);
}

TEST(SpectralCertificate, JacobiOracleAgreesWithFrozenValues) {
  const auto l = oracle::Laplacian(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {1, 4}, {4, 0}, {2, 0}});
  oracle::Mat lbar = oracle::Zeros(5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) lbar[i][j] = kFig1Xi[i] * l[i][j] + l[j][i] * kFig1Xi[j];
  EXPECT_NEAR(oracle::JacobiEigenvalues(lbar)[1], kFig1Lambda2Bar, 1e-13);
  const auto ltl = oracle::JacobiEigenvalues(oracle::Mul(oracle::Transpose(l), l));
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(ltl[i], kFig1LtL[i], 1e-13);
}

TEST(ExponentialLimit, Fig1) {
  const Eigen::MatrixXd l = BuildLaplacian(Fig1Digraph());
  const auto rep = CheckExponentialLimit(l, LeftEigenvector(l), {0.0, 1.0, 10.0, 50.0});
  EXPECT_TRUE(rep.ok());
  EXPECT_LT(rep.limit_deviation.back(), 1e-8);
  EXPECT_EQ(LaplacianExponential(l, 0.0), Eigen::MatrixXd::Identity(5, 5));
}

TEST(ExponentialLimit, BalancedCycleRowsUniform) {
  const Eigen::MatrixXd e = LaplacianExponential(BuildLaplacian(SymmetricCycle(5)), 100.0);
  EXPECT_LT((e.array() - 0.2).abs().maxCoeff(), 1e-12);
}

// Spectral properties over random strongly connected digraphs.
TEST(GraphProperties, RandomDigraphs) {
  PortableRng rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng.Bits() % 7);
    const Digraph g = RandomStronglyConnectedDigraph(n, rng);
    ASSERT_TRUE(IsStronglyConnected(g));
    const Eigen::MatrixXd l = BuildLaplacian(g);
    const Eigen::VectorXd xi = LeftEigenvector(l);
    EXPECT_GT(xi.minCoeff(), 0.0);
    EXPECT_NEAR(xi.sum(), 1.0, 1e-12);
    EXPECT_LT((xi.transpose() * l).cwiseAbs().maxCoeff(), 1e-10);
    const auto cert = ComputeSpectralCertificate(l, xi);
    EXPECT_GE(SampledQuadraticFormMargin(l, cert, 200, rng), -1e-9);
    // L̄ annihilates 1.
    EXPECT_LT((SymmetrizedLaplacian(l, xi) * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff(),
              1e-12);
  }
}

}  // namespace
}  // namespace dcopt
