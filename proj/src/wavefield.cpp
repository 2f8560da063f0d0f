#include "nsnl/wavefield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nsnl/errors.hpp"

namespace nsnl {

double mass_ratio(double mass_kg) {
  if (!(mass_kg > 0.0) || !std::isfinite(mass_kg))
    throw NonPositiveMass("mass must be positive and finite");
  return mass_kg / kCriticalMassKg;
}

RealField sample_potential(const PotentialSpec& spec, const GridPtr& grid) {
  RealField v(grid);
  const Grid& g = *grid;
  if (const auto* h = std::get_if<HarmonicPotential>(&spec)) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      double r2 = 0.0;
      for (std::size_t d = 0; d < g.dims(); ++d) r2 += g.coord(i, d) * g.coord(i, d);
      v[i] = 0.5 * h->stiffness * r2;
    }
  } else if (const auto* w = std::get_if<DoubleWellPotential>(&spec)) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      double s = 0.0;
      for (std::size_t d = 0; d < g.dims(); ++d) {
        const double x2 = g.coord(i, d) * g.coord(i, d);
        s += w->a * x2 * x2 - w->b * x2;
      }
      v[i] = s;
    }
  } else if (const auto* t = std::get_if<TabulatedPotential>(&spec)) {
    if (!t->values.grid_ptr() || !t->values.grid().same_shape(g))
      throw ValidationError("tabulated potential does not match the grid shape");
    v = t->values;
  }
  for (double x : v)
    if (!std::isfinite(x)) throw ValidationError("potential has non-finite values");
  return v;
}

void PhysParams::validate() const {
  if (!(mass > 0.0) || !std::isfinite(mass)) throw ValidationError("params.mass must be > 0");
  if (!(mu > 0.0)) throw ValidationError("params.mu must be > 0");
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw ValidationError("params.hbar must be > 0");
  if (!(eps_reg >= 0.0 && eps_reg < 1e-2))
    throw ValidationError("params.eps_reg must satisfy 0 <= eps_reg < 1e-2");
  if (const auto* h = std::get_if<HarmonicPotential>(&potential); h && !std::isfinite(h->stiffness))
    throw ValidationError("harmonic stiffness must be finite");
  if (const auto* w = std::get_if<DoubleWellPotential>(&potential);
      w && !(std::isfinite(w->a) && std::isfinite(w->b)))
    throw ValidationError("double-well coefficients must be finite");
}

std::string PhysParams::tag() const {
  std::ostringstream os;
  os.precision(17);
  os << "M=" << mass << ";mu=" << mu << ";hbar=" << hbar << ";eps=" << eps_reg;
  return os.str();
}

std::size_t MadelungField::node_count() const {
  return static_cast<std::size_t>(std::count(node_mask.begin(), node_mask.end(), true));
}

double norm(const ComplexField& psi) {
  double s = 0.0;
  for (const auto& z : psi) s += std::norm(z);
  return s * psi.grid().cell_volume();
}

void normalize(ComplexField& psi) {
  const double n = norm(psi);
  if (!(n > 0.0) || !std::isfinite(n)) throw AllNodes("cannot normalize a zero or non-finite field");
  const double scale = 1.0 / std::sqrt(n);
  for (auto& z : psi) z *= scale;
}

DiagonalDensity density(const WaveField& wf) {
  RealField rho(wf.grid_ptr());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(wf.psi[i]);
  return {std::move(rho)};
}

namespace {

void check_packet_args(const Grid& g, const std::vector<double>& x0,
                       const std::vector<double>& k0) {
  if (x0.size() != g.dims() || k0.size() != g.dims())
    throw ValidationError("center and carrier need one entry per grid dimension");
}

}  // namespace

WaveField gaussian_packet(const GridPtr& grid, const std::vector<double>& x0, double sigma0,
                          const std::vector<double>& k0) {
  const Grid& g = *grid;
  check_packet_args(g, x0, k0);
  for (std::size_t d = 0; d < g.dims(); ++d) {
    if (!(sigma0 >= 4.0 * g.axis(d).dx))
      throw UnresolvedWidth("sigma0 = " + std::to_string(sigma0) + " is below 4*dx = " +
                            std::to_string(4.0 * g.axis(d).dx));
    // Distance from the center to the nearest box edge, measured periodically.
    const double half = 0.5 * g.axis(d).length;
    const double offset = std::abs(std::remainder(x0[d], g.axis(d).length));
    const double reach = half - offset;
    if (reach * reach / (4.0 * sigma0 * sigma0) < 12.0 * std::numbers::ln10)
      throw TailOverflow("packet amplitude at the box edge exceeds 1e-12 of its peak");
  }
  ComplexField psi(grid);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double arg = 0.0;
    double phase = 0.0;
    for (std::size_t d = 0; d < g.dims(); ++d) {
      const double dxc = g.coord(i, d) - x0[d];
      arg -= dxc * dxc / (4.0 * sigma0 * sigma0);
      phase += k0[d] * g.coord(i, d);
    }
    psi[i] = std::polar(std::exp(arg), phase);
  }
  normalize(psi);
  return {std::move(psi), 0.0, {}};
}

WaveField periodic_packet(const GridPtr& grid, const std::vector<double>& x0, double sigma0,
                          const std::vector<double>& k0) {
  const Grid& g = *grid;
  check_packet_args(g, x0, k0);
  ComplexField psi(grid);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double arg = 0.0;
    double phase = 0.0;
    for (std::size_t d = 0; d < g.dims(); ++d) {
      const double L = g.axis(d).length;
      const double kappa = L * L / (8.0 * std::numbers::pi * std::numbers::pi * sigma0 * sigma0);
      arg += kappa * (std::cos(2.0 * std::numbers::pi * (g.coord(i, d) - x0[d]) / L) - 1.0);
      phase += k0[d] * g.coord(i, d);
    }
    psi[i] = std::polar(std::exp(arg), phase);
  }
  normalize(psi);
  return {std::move(psi), 0.0, {}};
}

Observables observables(const WaveField& wf, const PhysParams& params) {
  const Grid& g = wf.grid();
  const std::size_t dims = g.dims();
  const double dv = g.cell_volume();
  Observables out;
  out.mean_x.assign(dims, 0.0);
  out.width.assign(dims, 0.0);
  out.mean_k.assign(dims, 0.0);

  std::vector<double> second(dims, 0.0);
  double total = 0.0;
  double potential = 0.0;
  const RealField v = sample_potential(params.potential, wf.grid_ptr());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double rho = std::norm(wf.psi[i]);
    total += rho;
    potential += v[i] * rho;
    for (std::size_t d = 0; d < dims; ++d) {
      const double x = g.coord(i, d);
      out.mean_x[d] += x * rho;
      second[d] += x * x * rho;
    }
  }
  out.norm = total * dv;
  for (std::size_t d = 0; d < dims; ++d) {
    out.mean_x[d] /= total;
    const double var = second[d] / total - out.mean_x[d] * out.mean_x[d];
    out.width[d] = std::sqrt(std::max(var, 0.0));
  }

  const ComplexField spec = to_spectrum(wf.psi);
  auto k2 = g.k_squared();
  double spec_total = 0.0;
  double kinetic = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double p = std::norm(spec[i]);
    spec_total += p;
    kinetic += k2[i] * p;
    for (std::size_t d = 0; d < dims; ++d) {
      const std::size_t j = g.index_along(i, d);
      // The Nyquist mode has no definite sign; leave it out of <k>.
      if (j != g.axis(d).n / 2) out.mean_k[d] += g.axis(d).k[j] * p;
    }
  }
  for (auto& mk : out.mean_k) mk /= spec_total;
  out.energy_linear = params.hbar * params.hbar / (2.0 * params.mass) * kinetic / spec_total +
                      potential / total;
  return out;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double nearest_branch(double raw, double reference) {
  return raw + kTwoPi * std::round((reference - raw) / kTwoPi);
}

// Unwraps one grid line in place. `line` holds raw arg values, `valid`
// marks non-node points. The entry at `start` is taken as already unwrapped
// (or as the interpolation anchor when it is a node). Masked points are
// filled by linear interpolation between the bracketing valid points, or by
// holding the last valid value when no bracket exists.
void unwrap_line(std::vector<double>& line, const std::vector<bool>& valid, std::size_t start) {
  const std::size_t n = line.size();
  auto sweep = [&](int dir) {
    double last = line[start];
    std::ptrdiff_t last_idx = static_cast<std::ptrdiff_t>(start);
    std::vector<std::size_t> pending;
    for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(start) + dir;
         j >= 0 && j < static_cast<std::ptrdiff_t>(n); j += dir) {
      const auto uj = static_cast<std::size_t>(j);
      if (!valid[uj]) {
        pending.push_back(uj);
        continue;
      }
      line[uj] = nearest_branch(line[uj], last);
      for (std::size_t p : pending) {
        const double t = static_cast<double>(std::abs(static_cast<std::ptrdiff_t>(p) - last_idx)) /
                         static_cast<double>(std::abs(j - last_idx));
        line[p] = last + t * (line[uj] - last);
      }
      pending.clear();
      last = line[uj];
      last_idx = j;
    }
    for (std::size_t p : pending) line[p] = last;
  };
  sweep(+1);
  sweep(-1);
}

}  // namespace

MadelungField madelung_decompose(const WaveField& wf, double eps_reg) {
  const Grid& g = wf.grid();
  const std::size_t n = g.size();
  MadelungField mf{RealField(wf.grid_ptr()), RealField(wf.grid_ptr()),
                   std::vector<bool>(n, false), wf.time};

  double max_rho = 0.0;
  std::size_t anchor = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double rho = std::norm(wf.psi[i]);
    mf.amplitude[i] = std::abs(wf.psi[i]);
    if (rho > max_rho) {
      max_rho = rho;
      anchor = i;
    }
  }
  if (!(max_rho > 0.0) || !std::isfinite(max_rho))
    throw AllNodes("field has no point above the node threshold");
  const double floor = eps_reg * eps_reg * max_rho;
  std::vector<bool> valid(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    mf.node_mask[i] = std::norm(wf.psi[i]) < floor;
    valid[i] = !mf.node_mask[i];
    mf.phase[i] = std::arg(wf.psi[i]);
  }

  if (g.dims() == 1) {
    std::vector<double> line(mf.phase.begin(), mf.phase.end());
    unwrap_line(line, valid, anchor);
    std::copy(line.begin(), line.end(), mf.phase.begin());
    return mf;
  }

  // 2D: unwrap the anchor's row first, then every column outward from that row.
  const std::size_t n0 = g.axis(0).n;
  const std::size_t n1 = g.axis(1).n;
  const std::size_t a0 = g.index_along(anchor, 0);
  const std::size_t a1 = g.index_along(anchor, 1);
  std::vector<double> row(n1);
  std::vector<bool> row_valid(n1);
  for (std::size_t j = 0; j < n1; ++j) {
    row[j] = mf.phase[a0 * n1 + j];
    row_valid[j] = valid[a0 * n1 + j];
  }
  unwrap_line(row, row_valid, a1);

  std::vector<double> col(n0);
  std::vector<bool> col_valid(n0);
  for (std::size_t j = 0; j < n1; ++j) {
    for (std::size_t i = 0; i < n0; ++i) {
      col[i] = mf.phase[i * n1 + j];
      col_valid[i] = valid[i * n1 + j];
    }
    col[a0] = row[j];
    // The row value is authoritative even on a node; unwrap_line treats the
    // start as a fixed anchor.
    col_valid[a0] = true;
    unwrap_line(col, col_valid, a0);
    for (std::size_t i = 0; i < n0; ++i) mf.phase[i * n1 + j] = col[i];
  }
  return mf;
}

WaveField madelung_recompose(const MadelungField& mf) {
  ComplexField psi(mf.amplitude.grid_ptr());
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = std::polar(mf.amplitude[i], mf.phase[i]);
  normalize(psi);
  return {std::move(psi), mf.time, {}};
}

std::vector<RealField> current(const WaveField& wf, const PhysParams& params) {
  const auto grads = gradient_spectral(wf.psi);
  std::vector<RealField> j;
  const double c = params.hbar / params.mass;
  for (const auto& gd : grads) {
    RealField jd(wf.grid_ptr());
    for (std::size_t i = 0; i < jd.size(); ++i) jd[i] = c * std::imag(std::conj(wf.psi[i]) * gd[i]);
    j.push_back(std::move(jd));
  }
  return j;
}

}  // namespace nsnl
