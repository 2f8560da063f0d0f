#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <new>
#include <span>
#include <vector>

namespace nsnl {

using cplx = std::complex<double>;

/// Minimal 64-byte aligned allocator so every field buffer can be handed to
/// the FFT plans that were created on aligned scratch arrays.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), kAlign));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

struct AxisSpec {
  std::size_t n;
  double length;
};

/// One periodic axis. Coordinates are x_j = -L/2 + j*dx, j = 0..n-1.
/// Wavenumbers use the signed FFT ordering k_j = 2*pi*j/L for j < n/2 and
/// 2*pi*(j-n)/L otherwise, so the Nyquist mode carries a negative sign.
struct Axis {
  std::size_t n = 0;
  double length = 0.0;
  double dx = 0.0;
  std::vector<double> x;
  std::vector<double> k;
};

class SpectralPlan;

/// Uniform periodic grid in one or two dimensions, stored row-major
/// (the last axis varies fastest).
class Grid {
 public:
  std::size_t dims() const noexcept { return axes_.size(); }
  const Axis& axis(std::size_t d) const { return axes_.at(d); }
  const std::vector<Axis>& axes() const noexcept { return axes_; }
  std::size_t size() const noexcept { return size_; }
  double cell_volume() const noexcept { return cell_volume_; }

  /// Stride of axis d in the flat index.
  std::size_t stride(std::size_t d) const { return strides_.at(d); }
  /// Per-axis index of flat index idx along axis d.
  std::size_t index_along(std::size_t idx, std::size_t d) const {
    return (idx / strides_[d]) % axes_[d].n;
  }
  double coord(std::size_t idx, std::size_t d) const {
    return axes_[d].x[index_along(idx, d)];
  }

  /// |k|^2 per flat index.
  std::span<const double> k_squared() const noexcept { return k2_; }
  /// Largest |k|^2 on the grid (sum of per-axis Nyquist squares).
  double k_max_squared() const noexcept { return k2_max_; }

  const SpectralPlan& plan() const noexcept { return *plan_; }

  bool same_shape(const Grid& other) const noexcept;

 private:
  friend std::shared_ptr<const Grid> make_grid(const std::vector<AxisSpec>&);
  Grid() = default;

  std::vector<Axis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
  double cell_volume_ = 0.0;
  std::vector<double> k2_;
  double k2_max_ = 0.0;
  std::shared_ptr<const SpectralPlan> plan_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Builds a grid; throws NonPowerOfTwo, NonPositiveLength or
/// UnsupportedDimension.
GridPtr make_grid(const std::vector<AxisSpec>& dims);

/// Samples on a grid. Value semantics; the grid itself is shared.
template <class T>
class Field {
 public:
  using value_type = T;
  using storage = std::vector<T, AlignedAllocator<T>>;

  Field() = default;
  explicit Field(GridPtr grid, T fill = T{})
      : grid_(std::move(grid)), data_(grid_->size(), fill) {}

  const GridPtr& grid_ptr() const noexcept { return grid_; }
  const Grid& grid() const noexcept { return *grid_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

 private:
  GridPtr grid_;
  storage data_;
};

using RealField = Field<double>;
using ComplexField = Field<cplx>;

/// FFTW plan pair for one grid shape. Forward is unnormalized with kernel
/// exp(-i k x); inverse applies the 1/N factor.
class SpectralPlan {
 public:
  explicit SpectralPlan(const std::vector<std::size_t>& shape);
  ~SpectralPlan();
  SpectralPlan(const SpectralPlan&) = delete;
  SpectralPlan& operator=(const SpectralPlan&) = delete;

  void forward(const cplx* in, cplx* out) const;
  void inverse(const cplx* in, cplx* out) const;

 private:
  void* fwd_ = nullptr;
  void* bwd_ = nullptr;
  std::size_t n_ = 0;
};

/// Thread count used for FFT plans created from now on (NSNL_THREADS, default 1).
int kernel_threads();

ComplexField to_spectrum(const ComplexField& f);
ComplexField from_spectrum(const ComplexField& spectrum);

ComplexField laplacian_spectral(const ComplexField& f);
/// Periodic second-order central differences. Fields that are not periodic
/// on the box (e.g. x^2) get wrap artifacts at the seam.
ComplexField laplacian_fd2(const ComplexField& f);
/// i*k multiplier per axis. The Nyquist mode is zeroed, as usual for odd
/// derivatives, so real input gives real output.
std::vector<ComplexField> gradient_spectral(const ComplexField& f);
/// Second-order central-difference gradient, periodic.
std::vector<ComplexField> gradient_fd2(const ComplexField& f);
/// Spectral divergence of a real vector field.
RealField divergence_spectral(const std::vector<RealField>& v);

ComplexField to_complex(const RealField& f);

}  // namespace nsnl
