#pragma once

#include <vector>

#include "nsnl/wavefield.hpp"

// Low-dimensional reference solutions. Nothing in here touches the spectral
// operators used by the PDE integrators, so agreement with them is a real
// cross-check.
namespace nsnl::oracle {

/// Gaussian ansatz A ~ exp(-x^2/(4 sigma^2)), phi = b x^2 + const.
struct GaussianMomentState {
  double sigma = 1.0;
  double b = 0.0;
  double time = 0.0;
};

struct MomentRates {
  double dsigma = 0.0;
  double db = 0.0;
};

/// Closed moment equations for a free (V = 0) packet:
///   dsigma/dt = 2 hbar b sigma / M
///   db/dt     = (hbar/2)(1/mu - 1/M)(4 b^2 - 1/(4 sigma^4))
MomentRates gaussian_moment_rhs(const GaussianMomentState& s, const PhysParams& params);

/// RK4 integration of the moment equations. Output is sampled every `dt`
/// (plus t_final); internally the step is halved until two successive
/// refinements agree to 1e-10 in sigma at t_final. Throws SigmaUnderflow
/// once sigma drops below 1e-6.
std::vector<GaussianMomentState> integrate_moments(const GaussianMomentState& s0, double t_final,
                                                   const PhysParams& params, double dt);

/// Linear interpolation of sigma in a moment series.
double sigma_at(const std::vector<GaussianMomentState>& series, double t);

/// Exact linear (mu -> infinity) free evolution of a Gaussian packet with
/// initial width sigma0, carrier k0 and center x0, sampled on the grid
/// (product over axes in 2D). Not renormalized on the grid.
WaveField linear_free_gaussian(const GridPtr& grid, double t, double sigma0,
                               const std::vector<double>& k0, double mass, double hbar,
                               const std::vector<double>& x0);

/// sigma0 sqrt(1 + (hbar t / (2 M sigma0^2))^2)
double linear_free_width(double t, double sigma0, double mass, double hbar);

}  // namespace nsnl::oracle
