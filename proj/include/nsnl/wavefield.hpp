#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "nsnl/grid.hpp"

namespace nsnl {

/// Critical mass estimate in kilograms (mass of a 2e7-electron avalanche).
inline constexpr double kCriticalMassKg = 2e-23;

/// Converts a mass in kilograms to the dimensionless ratio M/mu.
double mass_ratio(double mass_kg);

struct NoPotential {};
/// V = k/2 * |x|^2
struct HarmonicPotential {
  double stiffness = 1.0;
};
/// V = a*x^4 - b*x^2, summed over axes in 2D.
struct DoubleWellPotential {
  double a = 0.0;
  double b = 0.0;
};
struct TabulatedPotential {
  RealField values;
};

using PotentialSpec =
    std::variant<NoPotential, HarmonicPotential, DoubleWellPotential, TabulatedPotential>;

RealField sample_potential(const PotentialSpec& spec, const GridPtr& grid);

/// Physical constants of the evolution. mu may be +infinity, which switches
/// the nonlinearity off (the linear Schroedinger limit).
struct PhysParams {
  double mass = 1.0;  // M, linear effective mass
  double mu = 1.0;    // critical mass
  double hbar = 1.0;
  PotentialSpec potential = NoPotential{};
  double eps_reg = 1e-6;  // relative amplitude floor

  double inv_mu() const noexcept { return 1.0 / mu; }
  /// 1/M - 1/mu; the coefficient that flips sign at M = mu.
  double kinetic_balance() const noexcept { return 1.0 / mass - 1.0 / mu; }
  double ratio() const noexcept { return mass / mu; }

  /// Throws ValidationError unless M, mu, hbar > 0 and 0 <= eps_reg < 1e-2.
  void validate() const;
  /// Short identifier stored with every evolved state.
  std::string tag() const;

  static PhysParams linear(double mass, double hbar = 1.0) {
    PhysParams p;
    p.mass = mass;
    p.hbar = hbar;
    p.mu = std::numeric_limits<double>::infinity();
    return p;
  }
  static PhysParams with_ratio(double ratio) {
    PhysParams p;
    p.mass = ratio;
    return p;
  }
};

struct WaveField {
  ComplexField psi;
  double time = 0.0;
  std::string params_tag;

  const Grid& grid() const { return psi.grid(); }
  const GridPtr& grid_ptr() const { return psi.grid_ptr(); }
};

/// |Psi|^2 samples; integrates to 1 for a normalized state.
struct DiagonalDensity {
  RealField values;
};

struct MadelungField {
  RealField amplitude;
  RealField phase;  // unwrapped along grid lines, interpolated across nodes
  std::vector<bool> node_mask;
  double time = 0.0;

  std::size_t node_count() const;
};

struct Observables {
  double norm = 0.0;
  std::vector<double> mean_x;
  std::vector<double> width;
  std::vector<double> mean_k;
  double energy_linear = 0.0;
};

/// dx-weighted integral of |Psi|^2.
double norm(const ComplexField& psi);
/// Scales to unit norm. Throws AllNodes on a zero field.
void normalize(ComplexField& psi);
DiagonalDensity density(const WaveField& wf);

/// Normalized packet exp(-(x-x0)^2/(4 sigma^2) + i k0 x), per axis product.
/// Throws UnresolvedWidth when sigma < 4 dx and TailOverflow when the
/// amplitude at the box edge exceeds 1e-12 of the peak.
WaveField gaussian_packet(const GridPtr& grid, const std::vector<double>& x0,
                          double sigma0, const std::vector<double>& k0);

/// Box-periodic analogue of a Gaussian, exp(kappa*cos(2 pi (x-x0)/L)) with
/// kappa matched to sigma0 at the center. Node-free everywhere.
WaveField periodic_packet(const GridPtr& grid, const std::vector<double>& x0,
                          double sigma0, const std::vector<double>& k0);

/// Widths use the box variance of the density with coordinates taken in
/// [-L/2, L/2); a delocalized state reports about L/sqrt(12).
Observables observables(const WaveField& wf, const PhysParams& params);

MadelungField madelung_decompose(const WaveField& wf, double eps_reg);
WaveField madelung_recompose(const MadelungField& mf);

/// Probability current (hbar/M) Im(Psi* grad Psi), one field per axis.
std::vector<RealField> current(const WaveField& wf, const PhysParams& params);

}  // namespace nsnl
