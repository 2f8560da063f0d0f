#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "nsnl/dynamics.hpp"
#include "nsnl/errors.hpp"

using namespace nsnl;
using std::numbers::pi;

namespace {

GridPtr line(std::size_t n = 256, double length = 32.0) { return make_grid({{n, length}}); }

WaveField gaussian(double sigma = 1.0, double k0 = 0.0, double x0 = 0.0) {
  return gaussian_packet(line(), {x0}, sigma, {k0});
}

// Smooth, node-free, complex state built from a few random Fourier modes.
WaveField random_smooth(std::mt19937_64& rng, const GridPtr& g) {
  std::normal_distribution<double> nd;
  const double L = g->axis(0).length;
  double a[4], b[4];
  for (int m = 0; m < 4; ++m) {
    a[m] = 0.3 * nd(rng);
    b[m] = nd(rng);
  }
  WaveField wf{ComplexField(g), 0.0, {}};
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double s = 2.0 * pi * g->coord(i, 0) / L;
    double amp = 0.0, ph = 0.0;
    for (int m = 0; m < 4; ++m) {
      amp += a[m] * std::cos((m + 1) * s);
      ph += b[m] * std::sin((m + 1) * s + a[m]);
    }
    wf.psi[i] = std::polar(std::exp(amp), ph);
  }
  normalize(wf.psi);
  return wf;
}

double max_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(Omega, PlaneWave) {
  auto g = line();
  const double k = 2.0 * pi / 32.0 * 6.0;
  ComplexField psi(g);
  for (std::size_t i = 0; i < g->size(); ++i) psi[i] = std::polar(1.0, k * g->coord(i, 0));
  for (double w : omega_nl(psi, PhysParams{})) EXPECT_NEAR(w, -0.5 * k * k, 1e-12);
}

TEST(Omega, GaussianCentre) {
  const WaveField wf = gaussian();
  const RealField w = omega_nl(wf, PhysParams{});
  EXPECT_NEAR(w[128], -0.25, 1e-10);  // x = 0
  // Off-centre: (hbar/2mu)(x^2/(4 sigma^4) - 1/(2 sigma^2)).
  const double x = wf.grid().coord(140, 0);
  EXPECT_NEAR(w[140], 0.5 * (x * x / 4.0 - 0.5), 1e-9);
}

TEST(Omega, UniformIsZeroAndLinearLimitOff) {
  auto g = line(64, 8.0);
  const ComplexField c(g, cplx{0.3, 0.4});
  for (double w : omega_nl(c, PhysParams{})) EXPECT_EQ(w, 0.0);
  const WaveField wf = gaussian();
  for (double w : omega_nl(wf, PhysParams::linear(1.0))) EXPECT_EQ(w, 0.0);
}

TEST(Rhs, CancelsForRealStateAtCriticalMass) {
  PhysParams p;
  p.mass = p.mu = 1.7;
  // Floored points keep an uncancelled (1/2M) Lap Psi; push the floor far into the tails.
  p.eps_reg = 1e-14;
  const ComplexField r = rhs_full(gaussian(), p);
  for (const cplx& z : r) EXPECT_LE(std::abs(z), 1e-10);
}

TEST(Rhs, LinearLimitMatchesSchroedinger) {
  PhysParams p = PhysParams::linear(2.0);
  p.potential = HarmonicPotential{0.5};
  const WaveField wf = gaussian(1.0, 0.7, 0.5);
  const ComplexField r = rhs_full(wf, p);
  const ComplexField lap = laplacian_spectral(wf.psi);
  const RealField v = sample_potential(p.potential, wf.grid_ptr());
  const cplx i1{0.0, 1.0};
  double scale = 0.0;
  for (const cplx& z : r) scale = std::max(scale, std::abs(z));
  for (std::size_t i = 0; i < r.size(); ++i) {
    const cplx expected = i1 * (1.0 / (2.0 * p.mass)) * lap[i] - i1 * v[i] * wf.psi[i];
    ASSERT_LE(std::abs(r[i] - expected), 1e-12 * scale);
  }
}

TEST(Rhs, NonlinearPartIsPurePhase) {
  std::mt19937_64 rng(3);
  PhysParams p;
  p.mass = 2.0;
  for (int t = 0; t < 20; ++t) {
    const WaveField wf = random_smooth(rng, line(128, 16.0));
    const ComplexField nl = rhs_nonlinear(wf.psi, p);
    double scale = 0.0;
    for (const cplx& z : nl) scale = std::max(scale, std::abs(z));
    for (std::size_t i = 0; i < nl.size(); ++i)
      ASSERT_LE(std::abs(std::real(std::conj(wf.psi[i]) * nl[i])), 1e-13 * scale);
  }
}

TEST(Strang, NonlinearSubstepKeepsModulus) {
  std::mt19937_64 rng(5);
  PhysParams p;
  p.mass = 3.0;
  auto g = line(128, 16.0);
  Propagator prop(g, p, 1e-3, Scheme::strang);
  for (int t = 0; t < 20; ++t) {
    WaveField wf = random_smooth(rng, g);
    const ComplexField before = wf.psi;
    prop.nonlinear_substep(wf.psi, 1e-2);
    for (std::size_t i = 0; i < before.size(); ++i)
      ASSERT_LE(std::abs(std::norm(wf.psi[i]) - std::norm(before[i])), 1e-13);
  }
}

TEST(Strang, LinearFreeStepIsExact) {
  const PhysParams p = PhysParams::linear(1.3);
  const WaveField wf = gaussian(1.0, 0.4);
  const double dt = 1e-3;
  const WaveField stepped = step_strang(wf, dt, p);
  ComplexField spec = to_spectrum(wf.psi);
  auto k2 = wf.grid().k_squared();
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= std::polar(1.0, -k2[i] * dt / (2.0 * p.mass));
  EXPECT_LE(max_diff(stepped.psi, from_spectrum(spec)), 1e-12);
}

TEST(Rk4, CoherentStateFollowsClassicalOrbit) {
  PhysParams p = PhysParams::linear(1.0);
  p.potential = HarmonicPotential{1.0};
  const WaveField wf = gaussian_packet(line(256, 32.0), {2.0}, std::sqrt(0.5), {0.0});
  StepperConfig st;
  st.scheme = Scheme::rk4;
  st.dt = 5e-4;
  st.snapshot_every = 200;
  const Trajectory traj = evolve(wf, 2.0 * pi, st, p);
  for (const Snapshot& s : traj.snapshots)
    ASSERT_NEAR(s.obs.mean_x[0], 2.0 * std::cos(s.time), 2e-3) << "t=" << s.time;
}

TEST(Madelung, RealGaussianHasNoDensityFlow) {
  PhysParams p;
  p.mass = 2.0;
  const WaveField wf = periodic_packet(line(64, 8.0), {0.0}, 1.0, {0.0});
  const MadelungRates r = madelung_rhs(madelung_decompose(wf, p.eps_reg), p);
  for (double d : r.density_rate) EXPECT_LE(std::abs(d), 1e-12);
}

TEST(Madelung, PhaseFrozenAtCriticalMass) {
  PhysParams p;
  p.mass = p.mu = 1.0;
  std::mt19937_64 rng(9);
  const WaveField wf = random_smooth(rng, line(128, 16.0));
  const MadelungRates r = madelung_rhs(madelung_decompose(wf, p.eps_reg), p);
  for (double d : r.phase_rate) EXPECT_LE(std::abs(d), 1e-12);
}

TEST(Madelung, EulerStepAgreesWithWaveStepToSecondOrder) {
  PhysParams p;
  p.mass = 2.0;
  std::mt19937_64 rng(21);
  const WaveField wf = random_smooth(rng, line(128, 16.0));
  const MadelungField mf = madelung_decompose(wf, p.eps_reg);
  const MadelungRates r = madelung_rhs(mf, p);
  auto error = [&](double dt) {
    const WaveField next = step_rk4(wf, dt, p);
    double worst = 0.0;
    for (std::size_t i = 0; i < wf.psi.size(); ++i) {
      const double predicted = mf.amplitude[i] * mf.amplitude[i] + dt * r.density_rate[i];
      worst = std::max(worst, std::abs(std::norm(next.psi[i]) - predicted));
    }
    return worst;
  };
  const double e1 = error(1e-3), e2 = error(5e-4);
  EXPECT_NEAR(e1 / e2, 4.0, 0.5);
}

TEST(Evolve, SnapshotScheduleAndShrunkStep) {
  StepperConfig st;
  st.dt = 0.3;
  st.snapshot_every = 2;
  const WaveField wf = periodic_packet(line(16, 32.0), {0.0}, 4.0, {0.0});
  const Trajectory traj = evolve(wf, 1.0, st, PhysParams::linear(1.0));
  EXPECT_DOUBLE_EQ(traj.dt_effective, 0.25);
  ASSERT_EQ(traj.snapshots.size(), 3u);
  EXPECT_DOUBLE_EQ(traj.snapshots[0].time, 0.0);
  EXPECT_DOUBLE_EQ(traj.snapshots[1].time, 0.5);
  EXPECT_DOUBLE_EQ(traj.snapshots[2].time, 1.0);
}

TEST(Evolve, CriticalMassRealGaussianIsStationary) {
  PhysParams p;
  p.eps_reg = 1e-10;
  StepperConfig st;
  st.dt = 1e-4;
  st.snapshot_every = 0;
  const WaveField wf = gaussian();
  const Trajectory traj = evolve(wf, 1.0, st, p);
  EXPECT_LE(max_diff(traj.snapshots.back().state.psi, wf.psi), 1e-8);
}

TEST(Evolve, HeavyPacketNarrows) {
  PhysParams p;
  p.mass = 2.0;
  StepperConfig st;
  st.dt = 1e-3;
  st.k_cutoff = 5.0;
  const Trajectory traj = evolve(gaussian(), 1.0, st, p);
  EXPECT_LT(traj.snapshots.back().obs.width[0], traj.snapshots.front().obs.width[0]);
}

TEST(Evolve, GuardTripsOnOversizedStep) {
  StepperConfig st;
  st.dt = 0.5;
  EXPECT_THROW(evolve(gaussian(), 1.0, st, PhysParams::linear(1.0)), StabilityGuardTripped);
  EXPECT_THROW(check_guard(1.0, 0.5), StabilityGuardTripped);
  EXPECT_NO_THROW(check_guard(0.99, 0.5));
}

TEST(Evolve, BitwiseDeterministic) {
  PhysParams p;
  p.mass = 0.5;
  StepperConfig st;
  st.dt = 1e-3;
  const Trajectory a = evolve(gaussian(), 0.5, st, p);
  const Trajectory b = evolve(gaussian(), 0.5, st, p);
  const auto& x = a.snapshots.back().state.psi;
  const auto& y = b.snapshots.back().state.psi;
  EXPECT_EQ(std::memcmp(x.data(), y.data(), x.size() * sizeof(cplx)), 0);
}

TEST(Cutoff, OnlyForHeavyPackets) {
  PhysParams light;
  light.mass = 0.5;
  EXPECT_EQ(instability_rate(light, 3.0), 0.0);
  EXPECT_LT(auto_cutoff(light, 1.0), 0.0);

  PhysParams heavy;
  heavy.mass = 2.0;
  // (hbar k^2/2) sqrt((1/M)(1/mu - 1/M)) = (9/2) * sqrt(1/4)
  EXPECT_NEAR(instability_rate(heavy, 3.0), 2.25, 1e-14);
  const double kc = auto_cutoff(heavy, 2.0, 2);
  EXPECT_NEAR(instability_rate(heavy, 1.0) * 2.0 * kc * kc * 2.0, std::log(1e6), 1e-9);
  EXPECT_EQ(auto_cutoff(heavy, 0.2), auto_cutoff(heavy, 1.0));
}

TEST(Cutoff, RetainedWavenumber) {
  auto g = line(256, 32.0);
  EXPECT_DOUBLE_EQ(retained_k_max_squared(*g, -1.0), g->k_max_squared());
  EXPECT_LE(retained_k_max_squared(*g, 5.0), 25.0);
  EXPECT_GT(retained_k_max_squared(*g, 5.0), 24.0);
}

TEST(MirrorAverage, ExactlyParityEquivariant) {
  std::mt19937_64 rng(9);
  auto g = make_grid({{64, 16.0}, {32, 8.0}});
  ComplexField psi(g);
  std::normal_distribution<double> nd;
  for (auto& v : psi) v = 0.1 * cplx{nd(rng), nd(rng)} + 1.0;
  auto flip = [&](const ComplexField& f) {
    ComplexField out(g);
    for (std::size_t i = 0; i < 64; ++i)
      for (std::size_t j = 0; j < 32; ++j) out[((64 - i) % 64) * 32 + (32 - j) % 32] = f[i * 32 + j];
    return out;
  };
  PhysParams p;
  p.mass = 2.0;
  Propagator prop(g, p, 1e-3, Scheme::strang, 5.0, true);
  ComplexField a = psi, b = flip(psi);
  prop.step(a);
  prop.step(b);
  const ComplexField fa = flip(a);
  EXPECT_EQ(std::memcmp(fa.data(), b.data(), b.size() * sizeof(cplx)), 0);
}

TEST(MirrorAverage, EvenStateStaysEvenAndMatchesPlainStep) {
  PhysParams p;
  p.mass = 2.0;
  p.potential = DoubleWellPotential{0.0078125, 0.25};
  const WaveField wf = gaussian_packet(line(256, 24.0), {0.0}, 1.0, {0.0});
  StepperConfig st;
  st.dt = 1e-3;
  st.k_cutoff = 5.0;
  st.snapshot_every = 0;
  st.mirror_average = true;
  const ComplexField even = evolve(wf, 1.0, st, p).snapshots.back().state.psi;
  for (std::size_t i = 1; i < 256; ++i) ASSERT_EQ(even[i], even[256 - i]);
  st.mirror_average = false;
  const ComplexField plain = evolve(wf, 1.0, st, p).snapshots.back().state.psi;
  EXPECT_LE(max_diff(even, plain), 1e-10);
}
