#include "nsnl/oracle.hpp"

#include <cmath>
#include <numbers>

#include "nsnl/errors.hpp"

namespace nsnl::oracle {

MomentRates gaussian_moment_rhs(const GaussianMomentState& s, const PhysParams& params) {
  if (!(s.sigma > 0.0)) throw SigmaUnderflow("sigma must stay positive");
  const double s4 = s.sigma * s.sigma * s.sigma * s.sigma;
  MomentRates r;
  r.dsigma = 2.0 * params.hbar * s.b * s.sigma / params.mass;
  r.db = 0.5 * params.hbar * (params.inv_mu() - 1.0 / params.mass) *
         (4.0 * s.b * s.b - 1.0 / (4.0 * s4));
  return r;
}

namespace {

constexpr double kSigmaFloor = 1e-6;

GaussianMomentState rk4_step(const GaussianMomentState& s, double h, const PhysParams& p) {
  auto shifted = [&](const MomentRates& k, double c) {
    return GaussianMomentState{s.sigma + c * k.dsigma, s.b + c * k.db, s.time + c};
  };
  const MomentRates k1 = gaussian_moment_rhs(s, p);
  const MomentRates k2 = gaussian_moment_rhs(shifted(k1, 0.5 * h), p);
  const MomentRates k3 = gaussian_moment_rhs(shifted(k2, 0.5 * h), p);
  const MomentRates k4 = gaussian_moment_rhs(shifted(k3, h), p);
  GaussianMomentState out;
  out.sigma = s.sigma + h / 6.0 * (k1.dsigma + 2.0 * k2.dsigma + 2.0 * k3.dsigma + k4.dsigma);
  out.b = s.b + h / 6.0 * (k1.db + 2.0 * k2.db + 2.0 * k3.db + k4.db);
  out.time = s.time + h;
  return out;
}

// Fixed-substep integration, recording every `per_sample` substeps.
std::vector<GaussianMomentState> run(const GaussianMomentState& s0, std::size_t samples,
                                     std::size_t per_sample, double sample_dt,
                                     const PhysParams& p) {
  std::vector<GaussianMomentState> out{s0};
  GaussianMomentState s = s0;
  const double h = sample_dt / static_cast<double>(per_sample);
  for (std::size_t k = 1; k <= samples; ++k) {
    for (std::size_t j = 0; j < per_sample; ++j) {
      s = rk4_step(s, h, p);
      if (!(s.sigma >= kSigmaFloor) || !std::isfinite(s.b))
        throw SigmaUnderflow("sigma fell below 1e-6 at t = " + std::to_string(s.time));
    }
    s.time = s0.time + static_cast<double>(k) * sample_dt;
    out.push_back(s);
  }
  return out;
}

}  // namespace

std::vector<GaussianMomentState> integrate_moments(const GaussianMomentState& s0, double t_final,
                                                   const PhysParams& params, double dt) {
  if (!(s0.sigma > 0.0)) throw SigmaUnderflow("initial sigma must be positive");
  if (!(t_final > 0.0) || !(dt > 0.0)) throw ValidationError("t_final and dt must be positive");
  const auto samples = static_cast<std::size_t>(std::ceil(t_final / dt * (1.0 - 1e-12)));
  const double sample_dt = t_final / static_cast<double>(samples);

  std::size_t per_sample = 1;
  auto coarse = run(s0, samples, per_sample, sample_dt, params);
  for (int refinement = 0; refinement < 24; ++refinement) {
    per_sample *= 2;
    auto fine = run(s0, samples, per_sample, sample_dt, params);
    const double diff = std::abs(fine.back().sigma - coarse.back().sigma);
    coarse = std::move(fine);
    if (diff <= 1e-10) break;
  }
  return coarse;
}

double sigma_at(const std::vector<GaussianMomentState>& series, double t) {
  if (series.empty()) throw ValidationError("empty moment series");
  if (t <= series.front().time) return series.front().sigma;
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (t <= series[i].time) {
      const auto& a = series[i - 1];
      const auto& b = series[i];
      const double w = (t - a.time) / (b.time - a.time);
      return a.sigma + w * (b.sigma - a.sigma);
    }
  }
  return series.back().sigma;
}

double linear_free_width(double t, double sigma0, double mass, double hbar) {
  const double r = hbar * t / (2.0 * mass * sigma0 * sigma0);
  return sigma0 * std::sqrt(1.0 + r * r);
}

WaveField linear_free_gaussian(const GridPtr& grid, double t, double sigma0,
                               const std::vector<double>& k0, double mass, double hbar,
                               const std::vector<double>& x0) {
  const Grid& g = *grid;
  if (k0.size() != g.dims() || x0.size() != g.dims())
    throw ValidationError("center and carrier need one entry per grid dimension");
  // Complex width parameter s = sigma0^2 + i hbar t / (2M).
  const cplx s(sigma0 * sigma0, hbar * t / (2.0 * mass));
  const double norm1d = std::pow(2.0 * std::numbers::pi * sigma0 * sigma0, -0.25);
  const cplx pref = norm1d * std::sqrt(cplx(sigma0 * sigma0, 0.0) / s);
  const double v_over_k = hbar / mass;

  for (std::size_t d = 0; d < g.dims(); ++d) {
    const double centre = x0[d] + v_over_k * k0[d] * t;
    const double reach = 0.5 * g.axis(d).length - std::abs(std::remainder(centre, g.axis(d).length));
    const double width = linear_free_width(t, sigma0, mass, hbar);
    if (reach * reach / (4.0 * width * width) < 12.0 * std::numbers::ln10)
      throw TailOverflow("evolved packet reaches the box edge");
  }

  ComplexField psi(grid);
  for (std::size_t i = 0; i < g.size(); ++i) {
    cplx value(1.0, 0.0);
    for (std::size_t d = 0; d < g.dims(); ++d) {
      const double x = g.coord(i, d);
      const double shifted = x - x0[d] - v_over_k * k0[d] * t;
      const double phase = k0[d] * x - 0.5 * v_over_k * k0[d] * k0[d] * t;
      value *= pref * std::exp(-shifted * shifted / (4.0 * s)) * std::polar(1.0, phase);
    }
    psi[i] = value;
  }
  return {std::move(psi), t, "linear-free-gaussian"};
}

}  // namespace nsnl::oracle
