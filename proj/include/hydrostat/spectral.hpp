#pragma once

// Fourier representation of periodic fields on (-1,1)^3.
//
// Coefficients are stored in centred order: index j on an axis of n modes
// corresponds to the integer mode m = j - n/2 and the wavenumber pi*m.
// The transform is mean-normalised, f(x) = sum_m c_m exp(i pi m.x), so the
// constant field 1 has c_0 = 1.

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "hydrostat/errors.hpp"

namespace hydrostat {

using Complex = std::complex<double>;

enum class Axis : int { x = 0, y = 1, z = 2 };

/// Symmetry class with respect to z -> -z.
enum class Parity : std::uint8_t { even = 0, odd = 1, none = 2 };

inline const char* to_string(Parity p) {
  switch (p) {
    case Parity::even: return "even";
    case Parity::odd: return "odd";
    default: return "none";
  }
}

/// Volume of the periodic box.
inline constexpr double kBoxVolume = 8.0;

namespace detail {

// FFTW planning is not thread safe; execution of an existing plan is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

class Grid {
 public:
  Grid(int nx, int ny, int nz) : n_{nx, ny, nz} {
    for (int a = 0; a < 3; ++a) {
      if (n_[a] < 4 || n_[a] % 2 != 0) {
        throw InvalidGrid("grid sizes must be even and >= 4, got " + std::to_string(nx) + "x" +
                          std::to_string(ny) + "x" + std::to_string(nz));
      }
      k_[a].resize(n_[a]);
      for (int j = 0; j < n_[a]; ++j) k_[a][j] = std::numbers::pi * (j - n_[a] / 2);
    }
    size_ = static_cast<std::size_t>(nx) * ny * nz;

    mask_.resize(size_);
    gather_.resize(size_);
    shift_sign_.resize(size_);
    for (int jx = 0; jx < nx; ++jx) {
      for (int jy = 0; jy < ny; ++jy) {
        for (int jz = 0; jz < nz; ++jz) {
          const std::size_t idx = index(jx, jy, jz);
          const int mx = jx - nx / 2, my = jy - ny / 2, mz = jz - nz / 2;
          mask_[idx] = (3 * std::abs(mx) < nx && 3 * std::abs(my) < ny && 3 * std::abs(mz) < nz) ? 1 : 0;
          const int qx = (mx + nx) % nx, qy = (my + ny) % ny, qz = (mz + nz) % nz;
          gather_[idx] = index(qx, qy, qz);
          // collocation points start at -1, which contributes exp(-i pi m (-1)) = (-1)^m
          shift_sign_[idx] = ((std::abs(mx) + std::abs(my) + std::abs(mz)) % 2 == 0) ? 1.0 : -1.0;
        }
      }
    }

    std::vector<Complex> scratch(size_);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    std::lock_guard lock(detail::planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_3d(nx, ny, nz, buf, buf, FFTW_FORWARD, flags);
    backward_ = fftw_plan_dft_3d(nx, ny, nz, buf, buf, FFTW_BACKWARD, flags);
  }

  ~Grid() {
    std::lock_guard lock(detail::planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  int n(Axis a) const { return n_[static_cast<int>(a)]; }
  int nx() const { return n_[0]; }
  int ny() const { return n_[1]; }
  int nz() const { return n_[2]; }
  std::size_t size() const { return size_; }

  std::size_t index(int jx, int jy, int jz) const {
    return (static_cast<std::size_t>(jx) * n_[1] + jy) * n_[2] + jz;
  }

  /// Integer mode number of centred index j.
  int mode(Axis a, int j) const { return j - n(a) / 2; }

  /// Centred index of the mode -m; the Nyquist mode maps to itself.
  int mirror(Axis a, int j) const { return j == 0 ? 0 : n(a) - j; }

  const std::vector<double>& wavenumbers(Axis a) const { return k_[static_cast<int>(a)]; }
  double k(Axis a, int j) const { return k_[static_cast<int>(a)][j]; }

  /// 2/3-rule mask: 3|m| < n on every axis.
  const std::vector<std::uint8_t>& dealias_mask() const { return mask_; }
  bool keeps(std::size_t idx) const { return mask_[idx] != 0; }

  bool same_shape(const Grid& other) const { return n_ == other.n_; }

  // Physical buffer <-> centred coefficients, both of length size().
  void forward(std::span<const double> values, std::span<Complex> coeffs) const {
    std::vector<Complex> buf(values.begin(), values.end());
    fftw_execute_dft(forward_, reinterpret_cast<fftw_complex*>(buf.data()),
                     reinterpret_cast<fftw_complex*>(buf.data()));
    const double scale = 1.0 / static_cast<double>(size_);
    for (std::size_t i = 0; i < size_; ++i) coeffs[i] = buf[gather_[i]] * (shift_sign_[i] * scale);
  }

  void inverse(std::span<const Complex> coeffs, std::span<double> values) const {
    std::vector<Complex> buf(size_);
    for (std::size_t i = 0; i < size_; ++i) buf[gather_[i]] = coeffs[i] * shift_sign_[i];
    fftw_execute_dft(backward_, reinterpret_cast<fftw_complex*>(buf.data()),
                     reinterpret_cast<fftw_complex*>(buf.data()));
    for (std::size_t i = 0; i < size_; ++i) values[i] = buf[i].real();
  }

  /// Collocation coordinate x_i = -1 + 2i/n.
  double coordinate(Axis a, int i) const { return -1.0 + 2.0 * i / n(a); }

 private:
  std::array<int, 3> n_;
  std::array<std::vector<double>, 3> k_;
  std::size_t size_ = 0;
  std::vector<std::uint8_t> mask_;
  std::vector<std::size_t> gather_;
  std::vector<double> shift_sign_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(int nx, int ny, int nz) { return std::make_shared<const Grid>(nx, ny, nz); }

inline void require_same_grid(const Grid& a, const Grid& b) {
  if (!a.same_shape(b)) throw ShapeError("fields live on grids of different shape");
}

/// Real field sampled on the collocation lattice, row-major (x slowest).
class PhysicalField {
 public:
  PhysicalField() = default;
  explicit PhysicalField(GridPtr grid) : grid_(std::move(grid)), values_(grid_->size(), 0.0) {}
  PhysicalField(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->size()) throw ShapeError("physical field size does not match grid");
  }

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Fill from f(x, y, z) evaluated on the lattice.
  template <class F>
  static PhysicalField sample(const GridPtr& grid, F&& f) {
    PhysicalField out(grid);
    const Grid& g = *grid;
    for (int ix = 0; ix < g.nx(); ++ix) {
      const double x = g.coordinate(Axis::x, ix);
      for (int iy = 0; iy < g.ny(); ++iy) {
        const double y = g.coordinate(Axis::y, iy);
        for (int iz = 0; iz < g.nz(); ++iz) {
          out.values_[g.index(ix, iy, iz)] = f(x, y, g.coordinate(Axis::z, iz));
        }
      }
    }
    return out;
  }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(GridPtr grid, Parity parity = Parity::none)
      : grid_(std::move(grid)), coeffs_(grid_->size()), parity_(parity) {}
  SpectralField(GridPtr grid, std::vector<Complex> coeffs, Parity parity)
      : grid_(std::move(grid)), coeffs_(std::move(coeffs)), parity_(parity) {
    if (coeffs_.size() != grid_->size()) throw ShapeError("coefficient array size does not match grid");
  }

  bool empty() const { return !grid_; }
  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  Parity parity() const { return parity_; }
  void set_parity(Parity p) { parity_ = p; }

  std::span<const Complex> coeffs() const { return coeffs_; }
  std::span<Complex> coeffs() { return coeffs_; }
  Complex& operator[](std::size_t i) { return coeffs_[i]; }
  const Complex& operator[](std::size_t i) const { return coeffs_[i]; }

  /// Coefficient of integer mode (mx, my, mz); |m| must not exceed n/2.
  Complex mode(int mx, int my, int mz) const { return coeffs_[mode_index(mx, my, mz)]; }
  void set_mode(int mx, int my, int mz, Complex value) { coeffs_[mode_index(mx, my, mz)] = value; }

  std::size_t mode_index(int mx, int my, int mz) const {
    const Grid& g = *grid_;
    return g.index(mx + g.nx() / 2, my + g.ny() / 2, mz + g.nz() / 2);
  }

  bool finite() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(),
                       [](const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
    return m;
  }

  SpectralField& operator+=(const SpectralField& o) {
    require_same_grid(*grid_, *o.grid_);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    if (parity_ != o.parity_) parity_ = Parity::none;
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    require_same_grid(*grid_, *o.grid_);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    if (parity_ != o.parity_) parity_ = Parity::none;
    return *this;
  }
  SpectralField& operator*=(double s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(SpectralField a, double s) { return a *= s; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  friend SpectralField operator-(SpectralField a) { return a *= -1.0; }

 private:
  GridPtr grid_;
  std::vector<Complex> coeffs_;
  Parity parity_ = Parity::none;
};

inline SpectralField forward_transform(const PhysicalField& f, Parity parity = Parity::none) {
  SpectralField out(f.grid_ptr(), parity);
  f.grid().forward(f.values(), out.coeffs());
  return out;
}

inline PhysicalField inverse_transform(const SpectralField& F) {
  PhysicalField out(F.grid_ptr());
  F.grid().inverse(F.coeffs(), out.values());
  return out;
}

/// Apply a real per-mode multiplier m(kx, ky, kz).
template <class Multiplier>
SpectralField apply_multiplier(const SpectralField& F, Multiplier&& mult) {
  SpectralField out = F;
  const Grid& g = F.grid();
  const auto& kx = g.wavenumbers(Axis::x);
  const auto& ky = g.wavenumbers(Axis::y);
  const auto& kz = g.wavenumbers(Axis::z);
  auto c = out.coeffs();
  for (int jx = 0; jx < g.nx(); ++jx)
    for (int jy = 0; jy < g.ny(); ++jy)
      for (int jz = 0; jz < g.nz(); ++jz) c[g.index(jx, jy, jz)] *= mult(kx[jx], ky[jy], kz[jz]);
  return out;
}

/// Multiply by (i k_axis)^order. Odd orders annihilate the Nyquist plane of
/// that axis and flip the z-parity when the axis is z.
inline SpectralField spectral_derivative(const SpectralField& F, Axis axis, int order = 1) {
  if (order < 1) throw InvalidParameter("derivative order must be >= 1");
  const Grid& g = F.grid();
  const auto& k = g.wavenumbers(axis);
  const int n = g.n(axis);
  std::vector<Complex> factor(n);
  for (int j = 0; j < n; ++j) {
    if (j == 0 && order % 2 == 1) {
      factor[j] = 0.0;
      continue;
    }
    factor[j] = std::pow(Complex(0.0, k[j]), order);
  }
  SpectralField out = F;
  auto c = out.coeffs();
  for (int jx = 0; jx < g.nx(); ++jx)
    for (int jy = 0; jy < g.ny(); ++jy)
      for (int jz = 0; jz < g.nz(); ++jz) {
        const int j = axis == Axis::x ? jx : axis == Axis::y ? jy : jz;
        c[g.index(jx, jy, jz)] *= factor[j];
      }
  if (axis == Axis::z && order % 2 == 1) {
    if (F.parity() == Parity::even) out.set_parity(Parity::odd);
    else if (F.parity() == Parity::odd) out.set_parity(Parity::even);
  }
  return out;
}

inline SpectralField& dealias_inplace(SpectralField& F) {
  const auto& mask = F.grid().dealias_mask();
  auto c = F.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i)
    if (!mask[i]) c[i] = 0.0;
  return F;
}

inline SpectralField dealias(SpectralField F) { return dealias_inplace(F); }

/// Orthogonal projection onto the even or odd subspace in z.
inline SpectralField& enforce_parity_inplace(SpectralField& F, Parity parity) {
  if (parity == Parity::none) {
    F.set_parity(Parity::none);
    return F;
  }
  const Grid& g = F.grid();
  const double sign = parity == Parity::even ? 1.0 : -1.0;
  auto c = F.coeffs();
  const int nz = g.nz();
  for (int jx = 0; jx < g.nx(); ++jx)
    for (int jy = 0; jy < g.ny(); ++jy) {
      const std::size_t base = g.index(jx, jy, 0);
      for (int jz = 0; jz <= nz / 2; ++jz) {
        const int jm = g.mirror(Axis::z, jz);
        if (jm == jz) {
          // kz = 0 and the Nyquist plane are their own mirror images
          if (parity == Parity::odd) c[base + jz] = 0.0;
          continue;
        }
        const Complex a = c[base + jz], b = c[base + jm];
        const Complex p = 0.5 * (a + sign * b);
        c[base + jz] = p;
        c[base + jm] = sign * p;
      }
    }
  F.set_parity(parity);
  return F;
}

inline SpectralField enforce_parity(SpectralField F, Parity parity) { return enforce_parity_inplace(F, parity); }

/// Delta_delta = d_xx + d_yy + delta d_zz.
inline SpectralField laplacian_delta(const SpectralField& F, double delta) {
  if (!(delta >= 0.0)) throw InvalidParameter("delta must be >= 0");
  return apply_multiplier(F, [delta](double kx, double ky, double kz) { return -(kx * kx + ky * ky) - delta * kz * kz; });
}

/// Discrete L2(Omega) pairing, Re int f conj(g).
inline double inner_product(const SpectralField& F, const SpectralField& G) {
  require_same_grid(F.grid(), G.grid());
  double s = 0.0;
  auto a = F.coeffs();
  auto b = G.coeffs();
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] * std::conj(b[i])).real();
  return kBoxVolume * s;
}

/// Largest violation of c(-k) = conj(c(k)); Nyquist modes pair with themselves.
inline double conjugate_symmetry_defect(const SpectralField& F) {
  const Grid& g = F.grid();
  double d = 0.0;
  for (int jx = 0; jx < g.nx(); ++jx)
    for (int jy = 0; jy < g.ny(); ++jy)
      for (int jz = 0; jz < g.nz(); ++jz) {
        const Complex a = F[g.index(jx, jy, jz)];
        const Complex b = F[g.index(g.mirror(Axis::x, jx), g.mirror(Axis::y, jy), g.mirror(Axis::z, jz))];
        d = std::max(d, std::abs(a - std::conj(b)));
      }
  return d;
}

/// Largest violation of the declared z-parity (0 for Parity::none).
inline double parity_defect(const SpectralField& F) {
  if (F.parity() == Parity::none) return 0.0;
  SpectralField p = enforce_parity(F, F.parity());
  double d = 0.0;
  for (std::size_t i = 0; i < p.coeffs().size(); ++i) d = std::max(d, std::abs(p[i] - F[i]));
  return d;
}

/// Keep only the kz = 0 plane (vertical average).
inline SpectralField vertical_mean(const SpectralField& F) {
  const Grid& g = F.grid();
  SpectralField out(F.grid_ptr(), F.parity() == Parity::odd ? Parity::odd : Parity::even);
  const int j0 = g.nz() / 2;
  if (F.parity() != Parity::odd) {
    for (int jx = 0; jx < g.nx(); ++jx)
      for (int jy = 0; jy < g.ny(); ++jy) out[g.index(jx, jy, j0)] = F[g.index(jx, jy, j0)];
  }
  return out;
}

/// Pointwise product of two real fields given in spectral form, dealiased.
inline SpectralField product(const SpectralField& a, const SpectralField& b) {
  require_same_grid(a.grid(), b.grid());
  PhysicalField pa = inverse_transform(a);
  const PhysicalField pb = inverse_transform(b);
  for (std::size_t i = 0; i < pa.values().size(); ++i) pa[i] *= pb[i];
  SpectralField out = forward_transform(pa);
  return dealias_inplace(out);
}

}  // namespace hydrostat
