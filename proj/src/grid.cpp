#include "nsnl/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>

#include "nsnl/errors.hpp"

namespace nsnl {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::shared_ptr<const SpectralPlan> shared_plan(const std::vector<std::size_t>& shape) {
  static std::map<std::pair<std::vector<std::size_t>, int>,
                  std::shared_ptr<const SpectralPlan>>
      cache;
  static std::mutex cache_mutex;
  std::lock_guard lock(cache_mutex);
  auto key = std::make_pair(shape, kernel_threads());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto plan = std::make_shared<const SpectralPlan>(shape);
  cache.emplace(key, plan);
  return plan;
}

}  // namespace

int kernel_threads() {
  const char* env = std::getenv("NSNL_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (end == env || v < 1) return 1;
  return static_cast<int>(std::min<long>(v, 64));
}

SpectralPlan::SpectralPlan(const std::vector<std::size_t>& shape) {
  std::vector<int> n_int(shape.begin(), shape.end());
  n_ = 1;
  for (auto n : shape) n_ *= n;

  std::lock_guard lock(planner_mutex());
  static bool threads_ready = [] { return fftw_init_threads() != 0; }();
  if (threads_ready) fftw_plan_with_nthreads(kernel_threads());

  auto* in = fftw_alloc_complex(n_);
  auto* out = fftw_alloc_complex(n_);
  // FFTW_ESTIMATE never times candidate plans, so the chosen plan (and with
  // it every rounding) is the same on every run.
  fwd_ = fftw_plan_dft(static_cast<int>(n_int.size()), n_int.data(), in, out,
                       FFTW_FORWARD, FFTW_ESTIMATE);
  bwd_ = fftw_plan_dft(static_cast<int>(n_int.size()), n_int.data(), in, out,
                       FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_free(in);
  fftw_free(out);
  if (fwd_ == nullptr || bwd_ == nullptr) throw Error("FFTW planning failed");
}

SpectralPlan::~SpectralPlan() {
  std::lock_guard lock(planner_mutex());
  if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void SpectralPlan::forward(const cplx* in, cplx* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(fwd_),
                   reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void SpectralPlan::inverse(const cplx* in, cplx* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(bwd_),
                   reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] *= scale;
}

bool Grid::same_shape(const Grid& other) const noexcept {
  if (dims() != other.dims()) return false;
  for (std::size_t d = 0; d < dims(); ++d) {
    if (axes_[d].n != other.axes_[d].n || axes_[d].length != other.axes_[d].length)
      return false;
  }
  return true;
}

GridPtr make_grid(const std::vector<AxisSpec>& dims) {
  if (dims.empty() || dims.size() > 2)
    throw UnsupportedDimension("grid must have 1 or 2 dimensions, got " +
                               std::to_string(dims.size()));
  std::shared_ptr<Grid> g(new Grid());
  for (const auto& spec : dims) {
    if (spec.n < 8 || !is_power_of_two(spec.n))
      throw NonPowerOfTwo("point count " + std::to_string(spec.n) +
                          " must be a power of two >= 8");
    if (!(spec.length > 0.0) || !std::isfinite(spec.length))
      throw NonPositiveLength("domain length must be positive and finite");
    Axis ax;
    ax.n = spec.n;
    ax.length = spec.length;
    ax.dx = spec.length / static_cast<double>(spec.n);
    ax.x.resize(spec.n);
    ax.k.resize(spec.n);
    const double dk = 2.0 * std::numbers::pi / spec.length;
    const auto half = static_cast<std::ptrdiff_t>(spec.n / 2);
    for (std::size_t j = 0; j < spec.n; ++j) {
      ax.x[j] = -0.5 * spec.length + static_cast<double>(j) * ax.dx;
      auto sj = static_cast<std::ptrdiff_t>(j);
      ax.k[j] = dk * static_cast<double>(sj < half ? sj : sj - static_cast<std::ptrdiff_t>(spec.n));
    }
    g->axes_.push_back(std::move(ax));
  }

  g->strides_.assign(g->axes_.size(), 1);
  for (std::size_t d = g->axes_.size(); d-- > 1;)
    g->strides_[d - 1] = g->strides_[d] * g->axes_[d].n;
  g->size_ = 1;
  g->cell_volume_ = 1.0;
  for (const auto& ax : g->axes_) {
    g->size_ *= ax.n;
    g->cell_volume_ *= ax.dx;
  }

  g->k2_.assign(g->size_, 0.0);
  for (std::size_t i = 0; i < g->size_; ++i) {
    double s = 0.0;
    for (std::size_t d = 0; d < g->axes_.size(); ++d) {
      double kd = g->axes_[d].k[g->index_along(i, d)];
      s += kd * kd;
    }
    g->k2_[i] = s;
  }
  g->k2_max_ = 0.0;
  for (const auto& ax : g->axes_) {
    double kn = std::numbers::pi / ax.dx;
    g->k2_max_ += kn * kn;
  }

  std::vector<std::size_t> shape;
  for (const auto& ax : g->axes_) shape.push_back(ax.n);
  g->plan_ = shared_plan(shape);
  return g;
}

ComplexField to_spectrum(const ComplexField& f) {
  ComplexField out(f.grid_ptr());
  f.grid().plan().forward(f.data(), out.data());
  return out;
}

ComplexField from_spectrum(const ComplexField& spectrum) {
  ComplexField out(spectrum.grid_ptr());
  spectrum.grid().plan().inverse(spectrum.data(), out.data());
  return out;
}

ComplexField laplacian_spectral(const ComplexField& f) {
  ComplexField spec = to_spectrum(f);
  auto k2 = f.grid().k_squared();
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= -k2[i];
  return from_spectrum(spec);
}

ComplexField laplacian_fd2(const ComplexField& f) {
  const Grid& g = f.grid();
  ComplexField out(f.grid_ptr());
  for (std::size_t d = 0; d < g.dims(); ++d) {
    const std::size_t n = g.axis(d).n;
    const std::size_t s = g.stride(d);
    const double inv_dx2 = 1.0 / (g.axis(d).dx * g.axis(d).dx);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const std::size_t j = g.index_along(i, d);
      const std::size_t base = i - j * s;
      const std::size_t ip = base + ((j + 1) % n) * s;
      const std::size_t im = base + ((j + n - 1) % n) * s;
      out[i] += (f[im] - 2.0 * f[i] + f[ip]) * inv_dx2;
    }
  }
  return out;
}

std::vector<ComplexField> gradient_spectral(const ComplexField& f) {
  const Grid& g = f.grid();
  ComplexField spec = to_spectrum(f);
  std::vector<ComplexField> grads;
  for (std::size_t d = 0; d < g.dims(); ++d) {
    ComplexField gd(f.grid_ptr());
    const auto& ax = g.axis(d);
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const std::size_t j = g.index_along(i, d);
      const double kd = (j == ax.n / 2) ? 0.0 : ax.k[j];
      gd[i] = spec[i] * cplx(0.0, kd);
    }
    grads.push_back(from_spectrum(gd));
  }
  return grads;
}

std::vector<ComplexField> gradient_fd2(const ComplexField& f) {
  const Grid& g = f.grid();
  std::vector<ComplexField> grads;
  for (std::size_t d = 0; d < g.dims(); ++d) {
    ComplexField gd(f.grid_ptr());
    const std::size_t n = g.axis(d).n;
    const std::size_t s = g.stride(d);
    const double inv_2dx = 0.5 / g.axis(d).dx;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const std::size_t j = g.index_along(i, d);
      const std::size_t base = i - j * s;
      gd[i] = (f[base + ((j + 1) % n) * s] - f[base + ((j + n - 1) % n) * s]) * inv_2dx;
    }
    grads.push_back(std::move(gd));
  }
  return grads;
}

RealField divergence_spectral(const std::vector<RealField>& v) {
  RealField out(v.at(0).grid_ptr());
  for (std::size_t d = 0; d < v.size(); ++d) {
    auto gd = gradient_spectral(to_complex(v[d]));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += gd[d][i].real();
  }
  return out;
}

ComplexField to_complex(const RealField& f) {
  ComplexField out(f.grid_ptr());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = cplx(f[i], 0.0);
  return out;
}

}  // namespace nsnl
