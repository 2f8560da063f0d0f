#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nsnl/errors.hpp"
#include "nsnl/grid.hpp"

using namespace nsnl;
using std::numbers::pi;

namespace {

ComplexField plane_wave(const GridPtr& g, int mode) {
  ComplexField f(g);
  const double k = 2.0 * pi * mode / g->axis(0).length;
  for (std::size_t i = 0; i < g->size(); ++i) f[i] = std::polar(1.0, k * g->coord(i, 0));
  return f;
}

ComplexField centred_gaussian(const GridPtr& g, double sigma) {
  ComplexField f(g);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double x = g->coord(i, 0);
    f[i] = std::exp(-x * x / (2.0 * sigma * sigma));
  }
  return f;
}

double max_abs_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(Grid, AxisLayoutAndSignedWavenumbers) {
  auto g = make_grid({{8, 8.0}});
  const Axis& a = g->axis(0);
  EXPECT_DOUBLE_EQ(a.dx, 1.0);
  EXPECT_DOUBLE_EQ(a.x.front(), -4.0);
  const int expected[] = {0, 1, 2, 3, -4, -3, -2, -1};
  for (int j = 0; j < 8; ++j) EXPECT_DOUBLE_EQ(a.k[j], 2.0 * pi / 8.0 * expected[j]);
}

TEST(Grid, RejectsBadShapes) {
  EXPECT_THROW(make_grid({{7, 1.0}}), NonPowerOfTwo);
  EXPECT_THROW(make_grid({{8, 0.0}}), NonPositiveLength);
  EXPECT_THROW(make_grid({{8, 1.0}, {8, 1.0}, {8, 1.0}}), UnsupportedDimension);
}

TEST(Grid, TwoDimensionalShape) {
  auto g = make_grid({{16, 4.0}, {16, 4.0}});
  EXPECT_EQ(g->size(), 256u);
  EXPECT_DOUBLE_EQ(g->axis(0).dx, 0.25);
  EXPECT_DOUBLE_EQ(g->axis(1).dx, 0.25);
  EXPECT_EQ(g->stride(1), 1u);
  EXPECT_EQ(g->stride(0), 16u);
}

TEST(Grid, SpectralRoundTrip) {
  auto g = make_grid({{64, 10.0}});
  ComplexField f = centred_gaussian(g, 1.0);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= std::polar(1.0, 0.3 * g->coord(i, 0));
  EXPECT_LE(max_abs_diff(from_spectrum(to_spectrum(f)), f), 1e-14);
}

TEST(Grid, SpectralLaplacianOfPlaneWave) {
  auto g = make_grid({{64, 32.0}});
  for (int mode : {1, 5, 17, -9}) {
    const ComplexField f = plane_wave(g, mode);
    const double k = 2.0 * pi * mode / 32.0;
    const ComplexField lap = laplacian_spectral(f);
    for (std::size_t i = 0; i < f.size(); ++i)
      ASSERT_LE(std::abs(lap[i] + k * k * f[i]), 1e-12 * k * k) << "mode " << mode;
  }
}

TEST(Grid, LaplacianOfConstantIsZero) {
  auto g = make_grid({{32, 5.0}, {16, 3.0}});
  const ComplexField f(g, cplx{2.5, -1.0});
  for (const auto& lap : {laplacian_spectral(f), laplacian_fd2(f)})
    for (const cplx& v : lap) EXPECT_LE(std::abs(v), 1e-12);
}

TEST(Grid, Fd2StencilSymbol) {
  auto g = make_grid({{64, 32.0}});
  const ComplexField f = plane_wave(g, 7);
  const double k = 2.0 * pi * 7 / 32.0, dx = g->axis(0).dx;
  const double symbol = -(2.0 - 2.0 * std::cos(k * dx)) / (dx * dx);
  const ComplexField lap = laplacian_fd2(f);
  for (std::size_t i = 0; i < f.size(); ++i) ASSERT_LE(std::abs(lap[i] - symbol * f[i]), 1e-12);
}

TEST(Grid, Fd2ConvergesAtSecondOrderToSpectral) {
  double prev = 0.0;
  for (std::size_t n : {64u, 128u, 256u}) {
    auto g = make_grid({{n, 32.0}});
    const ComplexField f = centred_gaussian(g, 2.0);
    const double err = max_abs_diff(laplacian_fd2(f), laplacian_spectral(f));
    if (prev > 0.0) {
      EXPECT_NEAR(prev / err, 4.0, 0.2);
    }
    prev = err;
  }
}

TEST(Grid, GradientOfPlaneWaveAndConstant) {
  auto g = make_grid({{64, 32.0}});
  const ComplexField f = plane_wave(g, 3);
  const double k = 2.0 * pi * 3 / 32.0;
  const auto grad = gradient_spectral(f);
  ASSERT_EQ(grad.size(), 1u);
  for (std::size_t i = 0; i < f.size(); ++i)
    ASSERT_LE(std::abs(grad[0][i] - cplx{0.0, k} * f[i]), 1e-12);
  for (const cplx& v : gradient_spectral(ComplexField(g, 1.0))[0]) EXPECT_LE(std::abs(v), 1e-14);
}

TEST(Grid, GradientOfRealGaussianIsRealAndOdd) {
  auto g = make_grid({{128, 16.0}});
  const ComplexField f = centred_gaussian(g, 1.0);
  const ComplexField d = gradient_spectral(f)[0];
  const std::size_t n = g->size();
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_LE(std::abs(d[i].imag()), 1e-13);
    // x_j and x_{n-j} are mirror points about 0.
    if (i > 0) {
      EXPECT_NEAR(d[i].real(), -d[n - i].real(), 1e-13);
    }
  }
}

TEST(Grid, DivergenceOfPeriodicFieldIntegratesToZero) {
  auto g = make_grid({{64, 8.0}});
  RealField v(g);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double x = g->coord(i, 0);
    v[i] = std::exp(std::sin(2.0 * pi * x / 8.0)) * (1.0 + 0.1 * x * x);
  }
  const RealField div = divergence_spectral({v});
  double s = 0.0;
  for (double d : div) s += d;
  EXPECT_LE(std::abs(s), 1e-10);
}
