#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ergobound/dynamics.hpp"

namespace ergobound {
namespace {

const std::vector<std::string> kXYZ = {"x", "y", "z"};
const std::vector<std::string> kXY = {"x", "y"};

Polynomial P(const std::string& s) { return ParsePolynomial(s, kXYZ); }

// x' = -y, y' = x: the unit circle traversed counterclockwise.
PolySystem Rotation() {
  return PolySystem({ParsePolynomial("-y", kXY), ParsePolynomial("x", kXY)}, kXY);
}

double RotationError(const Trajectory& traj) {
  const double t = traj.t_end();
  const auto x = traj.state(traj.num_points() - 1);
  return std::hypot(x[0] - std::cos(t), x[1] - std::sin(t));
}

TEST(Integrator, RotationReturnsAfterOnePeriod) {
  const std::vector<double> x0 = {1.0, 0.0};
  const auto traj = Integrate(Rotation(), x0, 2 * std::numbers::pi, 1e-12);
  const auto x = traj.state(traj.num_points() - 1);
  EXPECT_LE(std::hypot(x[0] - 1.0, x[1]), 1e-8);
  EXPECT_DOUBLE_EQ(traj.t_end(), 2 * std::numbers::pi);
}

TEST(Integrator, FixedStepOrderIsFive) {
  const std::vector<double> x0 = {1.0, 0.0};
  std::vector<double> errors;
  for (int n : {50, 100, 200}) {
    IntegratorOptions o;
    o.fixed_step = 10.0 / n;
    errors.push_back(RotationError(Integrate(Rotation(), x0, 10.0, o)));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double order = std::log2(errors[i - 1] / errors[i]);
    EXPECT_NEAR(order, 5.0, 0.5) << errors[i - 1] << " " << errors[i];
  }
}

TEST(Integrator, AdaptiveErrorScalesWithTolerance) {
  const std::vector<double> x0 = {1.0, 0.0};
  const double e1 = RotationError(Integrate(Rotation(), x0, 10.0, 1e-7));
  const double e2 = RotationError(Integrate(Rotation(), x0, 10.0, 1e-10));
  const double slope = std::log10(e1 / e2) / 3.0;
  EXPECT_NEAR(slope, 1.0, 0.2) << e1 << " " << e2;
}

TEST(Integrator, DenseOutputMatchesExactSolution) {
  const std::vector<double> x0 = {1.0, 0.0};
  const auto traj = Integrate(Rotation(), x0, 5.0, 1e-12);
  for (double t = 0.0; t <= 5.0; t += 0.137) {
    const auto x = traj.StateAt(t);
    EXPECT_NEAR(x[0], std::cos(t), 1e-9);
    EXPECT_NEAR(x[1], std::sin(t), 1e-9);
  }
  EXPECT_THROW(traj.StateAt(5.5), std::out_of_range);
}

TEST(Integrator, EquilibriumStaysPut) {
  const std::vector<double> origin = {0.0, 0.0, 0.0};
  const auto traj = Integrate(PolySystem::Lorenz(), origin, 10.0, 1e-10);
  for (std::size_t i = 0; i < traj.num_points(); ++i) {
    for (double v : traj.state(i)) EXPECT_EQ(v, 0.0);
  }
}

TEST(Integrator, LorenzStaysBounded) {
  const std::vector<double> x0 = {1.0, 1.0, 1.0};
  const auto traj = Integrate(PolySystem::Lorenz(), x0, 100.0, 1e-10);
  double peak = 0.0;
  for (std::size_t i = 0; i < traj.num_points(); ++i) {
    const auto x = traj.state(i);
    peak = std::max(peak, std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
  }
  EXPECT_LT(peak, 100.0);
  EXPECT_GT(peak, 20.0);
}

TEST(Integrator, BlowUpRaisesWithLastState) {
  // x' = x^2 from x = 1 blows up at t = 1.
  const std::vector<std::string> v = {"x"};
  const PolySystem f({ParsePolynomial("x^2", v)}, v);
  const std::vector<double> x0 = {1.0};
  try {
    Integrate(f, x0, 2.0, 1e-10);
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& e) {
    EXPECT_NEAR(e.time, 1.0, 1e-3);
    ASSERT_EQ(e.last_state.size(), 1u);
    EXPECT_GT(e.last_state[0], 1e3);
  }
}

TEST(Integrator, RejectsBadArguments) {
  const std::vector<double> x0 = {1.0, 0.0};
  EXPECT_THROW(Integrate(PolySystem::Lorenz(), x0, 1.0, 1e-10), std::invalid_argument);
  EXPECT_THROW(Integrate(Rotation(), x0, -1.0, 1e-10), std::invalid_argument);
}

TEST(Quadrature, GaussLegendreIntegratesPolynomials) {
  for (int n : {1, 4, 9, 16}) {
    const auto [x, w] = GaussLegendre(n);
    for (int k = 0; k < 2 * n; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += w[i] * std::pow(x[i], k);
      EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14) << n << " " << k;
    }
  }
}

TEST(TimeAverage, ConstantAndEquilibrium) {
  const std::vector<double> x0 = {1.0, 1.0, 1.0};
  const auto traj = Integrate(PolySystem::Lorenz(), x0, 30.0, 1e-10);
  EXPECT_NEAR(TimeAverage(traj, Polynomial::Constant(3, 1.0)), 1.0, 1e-14);
  const auto eq = LorenzEquilibria({})[1];
  const auto still = Integrate(PolySystem::Lorenz(), eq, 5.0, 1e-12);
  EXPECT_NEAR(TimeAverage(still, P("z")), 27.0, 1e-9);
  EXPECT_THROW(TimeAverage(traj, P("z"), 40.0), std::invalid_argument);
}

TEST(TimeAverage, RotationMeans) {
  const std::vector<double> x0 = {1.0, 0.0};
  const auto traj = Integrate(Rotation(), x0, 2 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(TimeAverage(traj, ParsePolynomial("x^2", kXY)), 0.5, 1e-10);
  EXPECT_NEAR(TimeAverage(traj, ParsePolynomial("x^4 + y", kXY)), 0.375, 1e-10);
}

TEST(Sections, RotationCrossesOncePerPeriod) {
  const std::vector<double> x0 = {1.0, 0.0};
  const auto traj = Integrate(Rotation(), x0, 20 * std::numbers::pi, 1e-12);
  SectionSpec s{{1.0, 0.0}, 0.0, -1};
  const auto down = SectionCrossings(traj, s);
  ASSERT_EQ(down.size(), 10u);
  for (std::size_t k = 0; k < down.size(); ++k) {
    EXPECT_NEAR(down[k].time, std::numbers::pi / 2 + 2 * std::numbers::pi * k, 1e-9);
    EXPECT_NEAR(down[k].state[0], 0.0, 1e-12);
  }
  s.direction = 0;
  EXPECT_EQ(SectionCrossings(traj, s).size(), 20u);
  EXPECT_THROW((SectionSpec{{0.0, 0.0}, 0.0, -1}).Validate(2), std::invalid_argument);
}

TEST(Sections, CountStableUnderTighterTolerance) {
  const std::vector<double> x0 = {1.0, 1.0, 1.0};
  SectionSpec s = SectionSpec::LorenzDefault();
  s.direction = -1;
  const auto a = SectionCrossings(Integrate(PolySystem::Lorenz(), x0, 15.0, 1e-10), s);
  const auto b = SectionCrossings(Integrate(PolySystem::Lorenz(), x0, 15.0, 5e-11), s);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_GT(a.size(), 5u);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k].time, b[k].time, 1e-5);
}

TEST(Sections, IntegrateToCrossingEndsOnSection) {
  const std::vector<double> x0 = {1.0, 0.0};
  SectionSpec s{{1.0, 0.0}, 0.0, -1};
  std::vector<Crossing> hits;
  const auto traj = IntegrateToCrossing(Rotation(), x0, s, 3, IntegratorOptions::WithTolerance(1e-12),
                                        100.0, &hits);
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_NEAR(traj.t_end(), std::numbers::pi / 2 + 4 * std::numbers::pi, 1e-9);
  EXPECT_EQ(traj.t_end(), hits.back().time);
}

TEST(Symbols, NormalizeAndRotate) {
  EXPECT_EQ(NormalizeSymbols("ABAB").root, "AB");
  EXPECT_EQ(NormalizeSymbols("ABAB").repetitions, 2);
  EXPECT_EQ(NormalizeSymbols("AABABB").root, "AABABB");
  EXPECT_EQ(NormalizeSymbols("AAAA").root, "A");
  EXPECT_THROW(NormalizeSymbols(""), std::invalid_argument);
  EXPECT_THROW(NormalizeSymbols("ABC"), std::invalid_argument);
  EXPECT_TRUE(IsRotation("AABABB", "ABBAAB"));
  EXPECT_FALSE(IsRotation("AABABB", "AABBAB"));
  EXPECT_FALSE(IsRotation("AB", "ABA"));
  const std::vector<double> left = {-1.0, 0.0, 0.0}, right = {1.0, 0.0, 0.0};
  EXPECT_EQ(SymbolOf(left), 'A');
  EXPECT_EQ(SymbolOf(right), 'B');
}

TEST(Equilibria, LorenzFixedPoints) {
  const auto eq = LorenzEquilibria({});
  ASSERT_EQ(eq.size(), 3u);
  const PolySystem f = PolySystem::Lorenz();
  for (const auto& e : eq) {
    for (double v : f.Evaluate(e)) EXPECT_NEAR(v, 0.0, 1e-12);
  }
  EXPECT_NEAR(eq[1][2], 27.0, 1e-14);
  LorenzParameters p;
  p.r = 1.0;
  EXPECT_EQ(LorenzEquilibria(p).size(), 1u);
}

class OrbitFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto seeds =
        CloseReturnSeeds(PolySystem::Lorenz(), SectionSpec::LorenzDefault(), "AB", 500.0);
    ASSERT_FALSE(seeds.empty());
    orbit_ = new PeriodicOrbit(FindPeriodicOrbit(PolySystem::Lorenz(),
                                                 SectionSpec::LorenzDefault(), "AB",
                                                 seeds.front().guess));
  }
  static void TearDownTestSuite() { delete orbit_; }
  static PeriodicOrbit* orbit_;
};
PeriodicOrbit* OrbitFixture::orbit_ = nullptr;

TEST_F(OrbitFixture, ShortestOrbitAverage) {
  ASSERT_NE(orbit_, nullptr);
  EXPECT_NEAR(orbit_->period, 1.5587, 1e-4);
  EXPECT_LE(orbit_->residual, 1e-9);
  EXPECT_NEAR(TimeAverage(orbit_->trajectory, P("z^4")), 592827.338, 0.05);
}

TEST_F(OrbitFixture, ExactGuessConvergesImmediately) {
  ASSERT_NE(orbit_, nullptr);
  const auto again = FindPeriodicOrbit(PolySystem::Lorenz(), SectionSpec::LorenzDefault(), "BA",
                                       orbit_->anchor);
  EXPECT_LE(again.newton_iterations, 2);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(again.anchor[i], orbit_->anchor[i], 1e-8);
  EXPECT_NEAR(again.period, orbit_->period, 1e-9);
}

TEST_F(OrbitFixture, QuadratureDoublingChangesNothing) {
  ASSERT_NE(orbit_, nullptr);
  const double a9 = TimeAverage(orbit_->trajectory, P("z^4"), 0.0, 9);
  const double a18 = TimeAverage(orbit_->trajectory, P("z^4"), 0.0, 18);
  EXPECT_NEAR(a9, a18, 1e-9 * a9);
}

TEST_F(OrbitFixture, LieDerivativeAveragesToZero) {
  ASSERT_NE(orbit_, nullptr);
  const Polynomial phi = P("z^4");
  const Polynomial v = P("x^2 + y^2 + (z - 38)^2 + x*y*z");
  const Polynomial shifted = phi + LieDerivative(PolySystem::Lorenz(), v);
  const double a = TimeAverage(orbit_->trajectory, phi);
  EXPECT_NEAR(TimeAverage(orbit_->trajectory, shifted), a, 1e-7 * a);
}

TEST_F(OrbitFixture, RebuildReproducesOrbit) {
  ASSERT_NE(orbit_, nullptr);
  const auto rebuilt = RebuildOrbit(PolySystem::Lorenz(), SectionSpec::LorenzDefault(),
                                    orbit_->anchor, orbit_->period, orbit_->symbols,
                                    orbit_->integration_tol);
  EXPECT_NEAR(TimeAverage(rebuilt.trajectory, P("z^4")),
              TimeAverage(orbit_->trajectory, P("z^4")), 1e-6);
  const std::string csv = TrajectoryToCsv(rebuilt.trajectory, kXYZ);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x,y,z");
  const Polynomial phi = P("z^4");
  const std::string json = OrbitToJson(*orbit_, &phi);
  EXPECT_NE(json.find("\"period\""), std::string::npos);
}

TEST(Orbits, SixAsHaveOnlyDistantSeedsAndFail) {
  const auto seeds =
      CloseReturnSeeds(PolySystem::Lorenz(), SectionSpec::LorenzDefault(), "AAAAAA", 500.0);
  for (const auto& s : seeds) EXPECT_TRUE(s.low_confidence);
  if (!seeds.empty()) {
    EXPECT_THROW(FindPeriodicOrbit(PolySystem::Lorenz(), SectionSpec::LorenzDefault(), "AAAAAA",
                                   seeds.front().guess),
                 ShootingError);
  }
}

TEST(Orbits, ShortRunHasNoSeeds) {
  EXPECT_TRUE(
      CloseReturnSeeds(PolySystem::Lorenz(), SectionSpec::LorenzDefault(), "AB", 0.5).empty());
}

}  // namespace
}  // namespace ergobound
