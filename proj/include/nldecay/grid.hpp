#pragma once

// Uniform periodic grids on [-X, X)^n and the discrete Fourier transform
// scaled to approximate the continuous transform  f^(xi) = ∫ f(x) e^{-i x.xi} dx.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "nldecay/error.hpp"

namespace nldecay {

using Complex = std::complex<double>;

/// Uniform grid with `points` nodes per axis; node j sits at x = -X + j*h.
struct Grid {
  int dim = 1;
  double half_width = 1.0;
  std::size_t points = 2;

  double spacing() const { return 2.0 * half_width / static_cast<double>(points); }
  double cell_volume() const { return std::pow(spacing(), dim); }
  std::size_t size() const { return dim == 1 ? points : points * points; }
  double coordinate(std::size_t j) const {
    return -half_width + static_cast<double>(j) * spacing();
  }
  /// Signed frequency index of DFT bin m.
  long signed_index(std::size_t m) const {
    return m < points / 2 ? static_cast<long>(m) : static_cast<long>(m) - static_cast<long>(points);
  }
  double frequency(std::size_t m) const {
    return std::numbers::pi * static_cast<double>(signed_index(m)) / half_width;
  }
  double frequency_spacing() const { return std::numbers::pi / half_width; }
  double nyquist() const { return std::numbers::pi / spacing(); }

  /// |x| at flat index idx.
  double radius(std::size_t idx) const {
    if (dim == 1) return std::abs(coordinate(idx));
    const double a = coordinate(idx / points), b = coordinate(idx % points);
    return std::hypot(a, b);
  }
  /// max_i |x_i| at flat index idx.
  double max_coordinate(std::size_t idx) const {
    if (dim == 1) return std::abs(coordinate(idx));
    return std::max(std::abs(coordinate(idx / points)), std::abs(coordinate(idx % points)));
  }
  /// |xi| at flat DFT index idx.
  double frequency_radius(std::size_t idx) const {
    if (dim == 1) return std::abs(frequency(idx));
    return std::hypot(frequency(idx / points), frequency(idx % points));
  }
  /// Flat index of the node mirrored through the origin (x -> -x).
  std::size_t mirror(std::size_t idx) const {
    auto flip = [this](std::size_t j) { return (points - j) % points; };
    if (dim == 1) return flip(idx);
    return flip(idx / points) * points + flip(idx % points);
  }
  /// Flat index with the two axes swapped (identity in 1D).
  std::size_t transpose(std::size_t idx) const {
    if (dim == 1) return idx;
    return (idx % points) * points + idx / points;
  }
  std::size_t origin() const {
    return dim == 1 ? points / 2 : (points / 2) * points + points / 2;
  }

  void validate() const {
    if (dim != 1 && dim != 2) throw ArgumentError("grid: dim must be 1 or 2");
    if (!(half_width > 0.0) || !std::isfinite(half_width))
      throw ArgumentError("grid: half_width must be positive");
    if (points < 4 || (points & (points - 1)) != 0)
      throw ArgumentError("grid: points_per_axis must be a power of two >= 4");
  }

  bool operator==(const Grid&) const = default;
};

inline std::string describe(const Grid& g) {
  return "n=" + std::to_string(g.dim) + " X=" + std::to_string(g.half_width) +
         " M=" + std::to_string(g.points);
}

/// Trapezoid (= rectangle on the torus) Lp norms. p = 0 stands for sup.
inline double lp_norm(const Grid& g, std::span<const double> f, int p) {
  if (p == 0) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  if (p == 1) {
    for (double v : f) s += std::abs(v);
    return s * g.cell_volume();
  }
  for (double v : f) s += std::pow(std::abs(v), p);
  return std::pow(s * g.cell_volume(), 1.0 / p);
}

inline double integral(const Grid& g, std::span<const double> f) {
  double s = 0.0;
  for (double v : f) s += v;
  return s * g.cell_volume();
}

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// FFT workspace bound to one grid. Owns its buffer and plans; not shareable
/// across threads, but independent workspaces may run concurrently.
class Transform {
 public:
  explicit Transform(const Grid& grid) : grid_(grid) {
    grid_.validate();
    n_ = grid_.size();
    buf_ = fftw_alloc_complex(n_);
    if (buf_ == nullptr) throw std::bad_alloc();
    const int m = static_cast<int>(grid_.points);
    int dims[2] = {m, m};
    std::lock_guard lock(detail::fftw_planner_mutex());
    fwd_ = fftw_plan_dft(grid_.dim, dims, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft(grid_.dim, dims, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Transform() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }
  Transform(const Transform&) = delete;
  Transform& operator=(const Transform&) = delete;

  const Grid& grid() const { return grid_; }

  /// Approximate continuous transform at the grid frequencies (DFT order).
  std::vector<Complex> to_symbol(std::span<const double> samples) {
    check_size(samples.size());
    for (std::size_t i = 0; i < n_; ++i) {
      buf_[i][0] = samples[i];
      buf_[i][1] = 0.0;
    }
    fftw_execute(fwd_);
    const double h = grid_.cell_volume();
    std::vector<Complex> out(n_);
    for (std::size_t i = 0; i < n_; ++i)
      out[i] = Complex(buf_[i][0], buf_[i][1]) * (h * parity(i));
    return out;
  }

  /// Real grid samples whose scaled transform is `symbol`.
  std::vector<double> from_symbol(std::span<const Complex> symbol) {
    check_size(symbol.size());
    load_symbol(symbol);
    fftw_execute(bwd_);
    const double scale = 1.0 / (static_cast<double>(n_) * grid_.cell_volume());
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = buf_[i][0] * scale;
    return out;
  }

  /// Periodic convolution (J * u)(x) = ∫ J(x - y) u(y) dy given J's symbol.
  std::vector<double> convolve(std::span<const Complex> kernel_symbol, std::span<const double> u) {
    auto s = to_symbol(u);
    for (std::size_t i = 0; i < n_; ++i) s[i] *= kernel_symbol[i];
    return from_symbol(s);
  }

 private:
  // Nodes start at -X, so the scaled DFT carries a (-1)^m phase per axis.
  double parity(std::size_t idx) const {
    if (grid_.dim == 1) return (idx & 1u) ? -1.0 : 1.0;
    return ((idx / grid_.points + idx % grid_.points) & 1u) ? -1.0 : 1.0;
  }
  void load_symbol(std::span<const Complex> symbol) {
    for (std::size_t i = 0; i < n_; ++i) {
      const Complex v = symbol[i] * parity(i);
      buf_[i][0] = v.real();
      buf_[i][1] = v.imag();
    }
  }
  void check_size(std::size_t s) const {
    if (s != n_) throw ArgumentError("transform: array size does not match grid");
  }

  Grid grid_;
  std::size_t n_ = 0;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

/// Geometric sequence lo * ratio^j up to hi (inclusive within rounding).
inline std::vector<double> geometric_grid(double lo, double hi, double ratio) {
  if (!(lo > 0.0) || !(hi >= lo) || !(ratio > 1.0))
    throw ArgumentError("geometric grid: need 0 < lo <= hi and ratio > 1");
  std::vector<double> out;
  const double steps = std::log(hi / lo) / std::log(ratio);
  const auto n = static_cast<long>(std::floor(steps + 1e-9));
  for (long j = 0; j <= n; ++j) out.push_back(lo * std::pow(ratio, static_cast<double>(j)));
  return out;
}

/// Integer power by repeated squaring.
inline Complex ipow(Complex z, long k) {
  Complex r(1.0, 0.0);
  while (k > 0) {
    if (k & 1) r *= z;
    z *= z;
    k >>= 1;
  }
  return r;
}

}  // namespace nldecay
