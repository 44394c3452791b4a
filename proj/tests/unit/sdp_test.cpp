#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <random>
#include <sstream>

#include "ergobound/sdp.hpp"

namespace ergobound {
namespace {

// min t  s.t.  [[t, 1], [1, t]] PSD, written with t free.
SdpProblem TwoByTwo() {
  SdpProblem p;
  p.block_sizes = {2};
  p.num_free = 1;
  p.free_objective = {1.0};
  p.block_objective = {{}};
  p.constraints = {
      {{{0, -1.0}}, {{{0, 0, 1.0}}}, 0.0},
      {{{0, -1.0}}, {{{1, 1, 1.0}}}, 0.0},
      {{}, {{{0, 1, 0.5}}}, 1.0},
  };
  return p;
}

// min x1 + x2  s.t.  diag(x1 - 1, x2 - 2) PSD.
SdpProblem DiagonalLp() {
  SdpProblem p;
  p.block_sizes = {1, 1};
  p.num_free = 2;
  p.free_objective = {1.0, 1.0};
  p.block_objective = {{}, {}};
  p.constraints = {
      {{{0, -1.0}}, {{{0, 0, 1.0}}, {}}, -1.0},
      {{{1, -1.0}}, {{}, {{0, 0, 1.0}}}, -2.0},
  };
  return p;
}

SparseSym Dense(const Eigen::MatrixXd& a) {
  SparseSym s;
  for (int j = 0; j < a.cols(); ++j) {
    for (int i = 0; i <= j; ++i) {
      if (a(i, j) != 0.0) s.push_back({i, j, a(i, j)});
    }
  }
  return s;
}

Eigen::MatrixXd RandomSymmetric(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  }
  return 0.5 * (a + a.transpose());
}

// max <C, X> s.t. tr X = 1, posed as min <-C, X>.
SdpProblem MaxEigenvalue(const Eigen::MatrixXd& c) {
  const int n = static_cast<int>(c.rows());
  SdpProblem p;
  p.block_sizes = {n};
  p.block_objective = {Dense(-c)};
  p.constraints = {{{}, {Dense(Eigen::MatrixXd::Identity(n, n))}, 1.0}};
  return p;
}

struct Planted {
  SdpProblem problem;
  double optimum = 0.0;
};

// Strictly complementary optimal pair fixed in advance: X* and Z* share
// eigenvectors with disjoint supports, b and C follow from random A_i and y.
Planted PlantedSdp(std::mt19937_64& rng, int n, int m, int nfree) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> pos(0.5, 2.0);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(RandomSymmetric(rng, n));
  const Eigen::MatrixXd q = qr.householderQ();
  const int rank = n / 2;
  Eigen::VectorXd lx = Eigen::VectorXd::Zero(n), lz = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) (i < rank ? lx[i] : lz[i]) = pos(rng);
  const Eigen::MatrixXd xs = q * lx.asDiagonal() * q.transpose();
  const Eigen::MatrixXd zs = q * lz.asDiagonal() * q.transpose();

  Planted out;
  SdpProblem& p = out.problem;
  p.block_sizes = {n};
  p.num_free = nfree;
  Eigen::VectorXd y(m), us(nfree);
  for (int i = 0; i < m; ++i) y[i] = g(rng);
  for (int k = 0; k < nfree; ++k) us[k] = g(rng);
  Eigen::MatrixXd c = zs;
  Eigen::VectorXd cfree = Eigen::VectorXd::Zero(nfree);
  for (int i = 0; i < m; ++i) {
    const Eigen::MatrixXd a = RandomSymmetric(rng, n);
    SdpConstraint con;
    con.blocks = {Dense(a)};
    con.rhs = (a.cwiseProduct(xs)).sum();
    for (int k = 0; k < nfree; ++k) {
      const double ak = g(rng);
      con.free.emplace_back(k, ak);
      con.rhs += ak * us[k];
      cfree[k] += y[i] * ak;
    }
    c += y[i] * a;
    p.constraints.push_back(std::move(con));
  }
  p.block_objective = {Dense(c)};
  p.free_objective.assign(cfree.data(), cfree.data() + nfree);
  out.optimum = (c.cwiseProduct(xs)).sum() + cfree.dot(us);
  return out;
}

// Replaces every free variable by the difference of two 1x1 PSD blocks.
SdpProblem SplitFree(const SdpProblem& p) {
  SdpProblem s = p;
  s.num_free = 0;
  s.free_objective.clear();
  const int base = static_cast<int>(p.block_sizes.size());
  for (int k = 0; k < p.num_free; ++k) {
    s.block_sizes.push_back(1);
    s.block_sizes.push_back(1);
    s.block_objective.push_back({{0, 0, p.free_objective[k]}});
    s.block_objective.push_back({{0, 0, -p.free_objective[k]}});
  }
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    auto& con = s.constraints[i];
    con.free.clear();
    con.blocks.resize(base + 2 * p.num_free);
    for (const auto& [k, v] : p.constraints[i].free) {
      con.blocks[base + 2 * k].push_back({0, 0, v});
      con.blocks[base + 2 * k + 1].push_back({0, 0, -v});
    }
  }
  return s;
}

TEST(SdpSolver, TwoByTwoOptimumIsOne) {
  const auto sol = SolveSdp(TwoByTwo());
  EXPECT_EQ(sol.status, SdpStatus::kConverged) << sol.message;
  EXPECT_NEAR(sol.free[0], 1.0, 1e-7);
  EXPECT_NEAR(sol.primal_objective, 1.0, 1e-7);
  EXPECT_EQ(sol.weak_duality_violations, 0);
}

TEST(SdpSolver, TwoByTwoWithoutFreeVariables) {
  // min (X00 + X11) / 2  s.t.  X00 = X11, X01 = 1.
  SdpProblem p;
  p.block_sizes = {2};
  p.block_objective = {{{0, 0, 0.5}, {1, 1, 0.5}}};
  p.constraints = {{{}, {{{0, 0, 1.0}, {1, 1, -1.0}}}, 0.0}, {{}, {{{0, 1, 0.5}}}, 1.0}};
  const auto sol = SolveSdp(p);
  EXPECT_EQ(sol.status, SdpStatus::kConverged);
  EXPECT_NEAR(sol.primal_objective, 1.0, 1e-7);
}

TEST(SdpSolver, DiagonalLpValueThree) {
  const auto sol = SolveSdp(DiagonalLp());
  EXPECT_EQ(sol.status, SdpStatus::kConverged);
  EXPECT_NEAR(sol.primal_objective, 3.0, 1e-7);
  EXPECT_NEAR(sol.free[0], 1.0, 1e-7);
  EXPECT_NEAR(sol.free[1], 2.0, 1e-7);
}

TEST(SdpSolver, RecoversLargestEigenvalue) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd c = RandomSymmetric(rng, 8);
    const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c).eigenvalues()(7);
    const auto sol = SolveSdp(MaxEigenvalue(c));
    EXPECT_EQ(sol.status, SdpStatus::kConverged) << "trial " << trial;
    EXPECT_NEAR(-sol.primal_objective, lmax, 1e-7 * (1.0 + std::abs(lmax))) << "trial " << trial;
    EXPECT_EQ(sol.weak_duality_violations, 0);
  }
}

TEST(SdpSolver, PlantedOptimaRecovered) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const int nfree = trial % 3;
    const auto planted = PlantedSdp(rng, 6 + trial % 4, 8 + trial % 5, nfree);
    const auto sol = SolveSdp(planted.problem);
    EXPECT_EQ(sol.status, SdpStatus::kConverged) << "trial " << trial << ": " << sol.message;
    EXPECT_NEAR(sol.primal_objective, planted.optimum, 1e-7 * (1.0 + std::abs(planted.optimum)))
        << "trial " << trial;
    EXPECT_EQ(sol.weak_duality_violations, 0);
  }
}

TEST(SdpSolver, FreeVariablesMatchSplitForm) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const auto planted = PlantedSdp(rng, 5, 8, 2);
    const auto native = SolveSdp(planted.problem);
    const auto split = SolveSdp(SplitFree(planted.problem));
    EXPECT_NEAR(native.primal_objective, split.primal_objective,
                1e-7 * (1.0 + std::abs(native.primal_objective)));
  }
  const auto lp = SolveSdp(SplitFree(DiagonalLp()));
  EXPECT_NEAR(lp.primal_objective, 3.0, 1e-7);
}

TEST(SdpSolver, RerunIsBitIdentical) {
  std::mt19937_64 rng(17);
  const auto planted = PlantedSdp(rng, 7, 10, 2);
  const auto a = SolveSdp(planted.problem);
  const auto b = SolveSdp(planted.problem);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_TRUE(a.free == b.free);
  EXPECT_TRUE(a.dual == b.dual);
  ASSERT_EQ(a.blocks.size(), b.blocks.size());
  for (std::size_t k = 0; k < a.blocks.size(); ++k) EXPECT_TRUE(a.blocks[k] == b.blocks[k]);
}

TEST(SdpSolver, InfeasibleProblemDoesNotConverge) {
  // X = -1 with X PSD.
  SdpProblem p;
  p.block_sizes = {1};
  p.block_objective = {{{0, 0, 1.0}}};
  p.constraints = {{{}, {{{0, 0, 1.0}}}, -1.0}};
  SdpOptions o;
  o.max_iterations = 60;
  const auto sol = SolveSdp(p, o);
  EXPECT_NE(sol.status, SdpStatus::kConverged);
}

TEST(SdpResiduals, AnalyticOptimumHasTinyResiduals) {
  const SdpProblem p = TwoByTwo();
  SdpSolution s;
  s.free = Eigen::VectorXd::Constant(1, 1.0);
  s.blocks = {Eigen::MatrixXd::Ones(2, 2)};
  s.dual = Eigen::Vector3d(-0.5, -0.5, 1.0);
  Eigen::MatrixXd z(2, 2);
  z << 0.5, -0.5, -0.5, 0.5;
  s.slacks = {z};
  const auto r = ComputeResiduals(p, s);
  EXPECT_LE(r.primal_infeasibility, 1e-12);
  EXPECT_LE(r.dual_infeasibility, 1e-12);
  EXPECT_LE(std::abs(r.gap), 1e-12);
}

TEST(SdpResiduals, ZeroPointHasInfeasibilityNormB) {
  const SdpProblem p = DiagonalLp();
  SdpSolution s;
  s.free = Eigen::VectorXd::Zero(2);
  s.blocks = {Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1)};
  s.dual = Eigen::VectorXd::Zero(2);
  s.slacks = {Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1)};
  EXPECT_NEAR(ComputeResiduals(p, s).primal_infeasibility, std::sqrt(5.0), 1e-15);
}

TEST(SdpProblem, ValidateRejectsBadIndices) {
  SdpProblem p = TwoByTwo();
  p.constraints[0].blocks[0].push_back({1, 0, 1.0});  // row > col
  EXPECT_THROW(p.Validate(), std::invalid_argument);
  p = TwoByTwo();
  p.constraints[0].blocks[0].push_back({0, 2, 1.0});
  EXPECT_THROW(p.Validate(), std::invalid_argument);
  p = TwoByTwo();
  p.constraints[0].free.emplace_back(3, 1.0);
  EXPECT_THROW(p.Validate(), std::invalid_argument);
}

TEST(Sdpa, RoundTripPreservesData) {
  std::mt19937_64 rng(3);
  for (const SdpProblem& p : {TwoByTwo(), DiagonalLp(), PlantedSdp(rng, 5, 7, 2).problem}) {
    std::stringstream a;
    WriteSdpa(p, a);
    const SdpProblem q = ReadSdpa(a);
    std::stringstream b;
    WriteSdpa(q, b);
    EXPECT_EQ(a.str(), b.str());
    const auto s1 = SolveSdp(p), s2 = SolveSdp(q);
    EXPECT_EQ(s1.primal_objective, s2.primal_objective);
  }
}

TEST(Sdpa, MalformedInputThrows) {
  std::stringstream bad("2\n1\n2\n1.0\n");
  EXPECT_THROW(ReadSdpa(bad), std::runtime_error);
  std::stringstream bad_entry("1\n1\n2\n1.0\n1 1 1 3 1.0\n");
  EXPECT_THROW(ReadSdpa(bad_entry), std::exception);
}

}  // namespace
}  // namespace ergobound
