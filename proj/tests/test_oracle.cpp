#include <gtest/gtest.h>

#include <cmath>

#include "nsnl/errors.hpp"
#include "nsnl/oracle.hpp"
#include "oracles/frozen.hpp"

using namespace nsnl;
using namespace nsnl::oracle;

namespace {

PhysParams ratio(double r) {
  PhysParams p;
  p.mass = r;
  return p;
}

}  // namespace

TEST(Moments, RhsAtCriticalMassVanishes) {
  const MomentRates r = gaussian_moment_rhs({1.0, 0.0, 0.0}, ratio(1.0));
  EXPECT_EQ(r.dsigma, 0.0);
  EXPECT_EQ(r.db, 0.0);
}

TEST(Moments, RhsHeavyPacket) {
  const MomentRates r = gaussian_moment_rhs({1.0, 0.0, 0.0}, ratio(2.0));
  EXPECT_EQ(r.dsigma, 0.0);
  EXPECT_DOUBLE_EQ(r.db, -1.0 / 16.0);
}

TEST(Moments, MatchesFrozenHighOrderSolution) {
  for (const auto& s : frozen::kMoments) {
    const auto series = integrate_moments({1.0, 0.0, 0.0}, s.t, ratio(s.ratio), 1e-3);
    const auto& last = series.back();
    EXPECT_NEAR(last.time, s.t, 1e-12);
    EXPECT_NEAR(last.sigma / s.sigma, 1.0, 1e-9) << "ratio " << s.ratio << " t " << s.t;
    EXPECT_NEAR(last.b, s.b, 1e-9) << "ratio " << s.ratio << " t " << s.t;
  }
}

TEST(Moments, LinearLimitReproducesSpreading) {
  const PhysParams p = PhysParams::linear(1.5);
  const auto series = integrate_moments({0.8, 0.0, 0.0}, 3.0, p, 0.01);
  for (const auto& s : series)
    ASSERT_NEAR(s.sigma, linear_free_width(s.time, 0.8, 1.5, 1.0), 1e-6) << "t=" << s.time;
}

TEST(Moments, MonotoneOnEitherSideOfCriticalMass) {
  const auto heavy = integrate_moments({1.0, 0.0, 0.0}, 2.0, ratio(2.0), 0.01);
  const auto light = integrate_moments({1.0, 0.0, 0.0}, 2.0, ratio(0.5), 0.01);
  const auto critical = integrate_moments({1.0, 0.0, 0.0}, 2.0, ratio(1.0), 0.01);
  for (std::size_t i = 1; i < heavy.size(); ++i) {
    EXPECT_LT(heavy[i].sigma, heavy[i - 1].sigma);
    EXPECT_GT(light[i].sigma, light[i - 1].sigma);
    EXPECT_EQ(critical[i].sigma, 1.0);
  }
}

TEST(Moments, CollapseUnderflowIsReported) {
  EXPECT_THROW(integrate_moments({1.0, 0.0, 0.0}, 50.0, ratio(4.0), 0.01), SigmaUnderflow);
}

TEST(Moments, SigmaInterpolation) {
  const std::vector<GaussianMomentState> s{{1.0, 0.0, 0.0}, {3.0, 0.0, 1.0}};
  EXPECT_DOUBLE_EQ(sigma_at(s, 0.25), 1.5);
}

TEST(LinearGaussian, InitialStateMatchesPacket) {
  auto g = make_grid({{256, 32.0}});
  const WaveField a = gaussian_packet(g, {1.0}, 1.0, {0.5});
  const WaveField b = linear_free_gaussian(g, 0.0, 1.0, {0.5}, 1.0, 1.0, {1.0});
  for (std::size_t i = 0; i < g->size(); ++i) ASSERT_LE(std::abs(a.psi[i] - b.psi[i]), 1e-12);
}

TEST(LinearGaussian, WidthAndCentroid) {
  auto g = make_grid({{512, 64.0}});
  const double t = 2.0, mass = 1.5, k0 = 0.75, x0 = -2.0;
  const WaveField wf = linear_free_gaussian(g, t, 1.0, {k0}, mass, 1.0, {x0});
  const Observables o = observables(wf, PhysParams::linear(mass));
  EXPECT_NEAR(o.width[0], linear_free_width(t, 1.0, mass, 1.0), 1e-9);
  EXPECT_NEAR(o.mean_x[0], x0 + k0 * t / mass, 1e-9);
  EXPECT_DOUBLE_EQ(linear_free_width(2.0, 1.0, 1.0, 1.0), std::sqrt(2.0));
}

TEST(LinearGaussian, EdgeOverflowIsReported) {
  auto g = make_grid({{256, 32.0}});
  EXPECT_THROW(linear_free_gaussian(g, 30.0, 1.0, {0.0}, 1.0, 1.0, {0.0}), TailOverflow);
}
