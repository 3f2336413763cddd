#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "hydrostat/errors.hpp"
#include "hydrostat/spectral.hpp"

namespace hydrostat {

enum class System { NS_eps_delta, PE_delta, PE_H, NS2D, StokesScaled };

inline const char* to_string(System s) {
  switch (s) {
    case System::NS_eps_delta: return "NS_eps_delta";
    case System::PE_delta: return "PE_delta";
    case System::PE_H: return "PE_H";
    case System::NS2D: return "NS2D";
    case System::StokesScaled: return "StokesScaled";
  }
  return "unknown";
}

inline System system_from_string(const std::string& s) {
  for (System sys : {System::NS_eps_delta, System::PE_delta, System::PE_H, System::NS2D, System::StokesScaled})
    if (s == to_string(sys)) return sys;
  throw InvalidParameter("unknown system '" + s + "'");
}

/// Horizontal velocity pair.
struct HorizontalPair {
  SpectralField v1, v2;

  const Grid& grid() const { return v1.grid(); }
  const GridPtr& grid_ptr() const { return v1.grid_ptr(); }
};

/// u = (v1, v2, w). For difference states w holds W = eps (w_a - w_b).
struct VelocityState {
  SpectralField v1, v2, w;
  System system = System::NS_eps_delta;
  double time = 0.0;

  const Grid& grid() const { return v1.grid(); }
  const GridPtr& grid_ptr() const { return v1.grid_ptr(); }
  HorizontalPair horizontal() const { return {v1, v2}; }

  static VelocityState zeros(const GridPtr& grid, System system = System::NS_eps_delta) {
    return {SpectralField(grid, Parity::even), SpectralField(grid, Parity::even), SpectralField(grid, Parity::odd),
            system, 0.0};
  }
};

inline VelocityState operator-(const VelocityState& a, const VelocityState& b) {
  VelocityState d = a;
  d.v1 -= b.v1;
  d.v2 -= b.v2;
  d.w -= b.w;
  d.v1.set_parity(a.v1.parity());
  d.v2.set_parity(a.v2.parity());
  d.w.set_parity(a.w.parity());
  return d;
}

inline VelocityState& scale_inplace(VelocityState& u, double s) {
  u.v1 *= s;
  u.v2 *= s;
  u.w *= s;
  return u;
}

/// Barotropic/baroclinic decomposition of a velocity state.
struct SplitState {
  HorizontalPair vbar;    // kz = 0 plane only
  HorizontalPair vtilde;  // zero vertical mean
  SpectralField w;
};

namespace detail {

template <class Fn>
void for_each_mode(const Grid& g, Fn&& fn) {
  const auto& kx = g.wavenumbers(Axis::x);
  const auto& ky = g.wavenumbers(Axis::y);
  const auto& kz = g.wavenumbers(Axis::z);
  for (int jx = 0; jx < g.nx(); ++jx)
    for (int jy = 0; jy < g.ny(); ++jy)
      for (int jz = 0; jz < g.nz(); ++jz) fn(g.index(jx, jy, jz), kx[jx], ky[jy], kz[jz], jx, jy, jz);
}

inline bool is_zero_horizontal(int jx, int jy, const Grid& g) { return jx == g.nx() / 2 && jy == g.ny() / 2; }

// Odd-order derivatives annihilate Nyquist planes; the projections treat the
// corresponding wavenumber component as zero so they stay consistent with them.
inline double eff_k(double k, int j) { return j == 0 ? 0.0 : k; }

}  // namespace detail

/// Scaled Helmholtz projection: removes k_eps (k_eps . U)/|k_eps|^2 with
/// k_eps = (kx, ky, kz/eps). The third component of `u` is the scaled one.
inline VelocityState project_div_free_scaled(const VelocityState& u, double eps) {
  if (!(eps > 0.0)) throw InvalidParameter("eps must be > 0");
  require_same_grid(u.v1.grid(), u.v2.grid());
  require_same_grid(u.v1.grid(), u.w.grid());
  VelocityState out = u;
  const Grid& g = u.grid();
  detail::for_each_mode(g, [&](std::size_t i, double kx, double ky, double kz, int jx, int jy, int jz) {
    kx = detail::eff_k(kx, jx);
    ky = detail::eff_k(ky, jy);
    kz = detail::eff_k(kz, jz) / eps;
    const double k2 = kx * kx + ky * ky + kz * kz;
    if (k2 == 0.0) return;
    const Complex s = (kx * u.v1[i] + ky * u.v2[i] + kz * u.w[i]) / k2;
    out.v1[i] -= kx * s;
    out.v2[i] -= ky * s;
    out.w[i] -= kz * s;
  });
  return out;
}

/// Same projection for unscaled storage (v, w) with U = (v, eps w); no
/// division by eps occurs, so eps -> 0 is well conditioned.
inline void project_div_free_unscaled_inplace(VelocityState& u, double eps) {
  if (!(eps > 0.0)) throw InvalidParameter("eps must be > 0");
  const Grid& g = u.grid();
  const double e2 = eps * eps;
  detail::for_each_mode(g, [&](std::size_t i, double kx, double ky, double kz, int jx, int jy, int jz) {
    kx = detail::eff_k(kx, jx);
    ky = detail::eff_k(ky, jy);
    kz = detail::eff_k(kz, jz);
    const double kh2 = kx * kx + ky * ky;
    const double den = e2 * kh2 + kz * kz;
    if (den == 0.0) return;
    const Complex s = kx * u.v1[i] + ky * u.v2[i] + kz * u.w[i];
    u.v1[i] -= kx * s * (e2 / den);
    u.v2[i] -= ky * s * (e2 / den);
    u.w[i] -= kz * s / den;
  });
}

/// 2D Leray projection applied to the kz = 0 plane; other planes untouched.
inline HorizontalPair project_hydrostatic(const HorizontalPair& f) {
  require_same_grid(f.v1.grid(), f.v2.grid());
  HorizontalPair out = f;
  const Grid& g = f.grid();
  const int j0 = g.nz() / 2;
  for (int jx = 0; jx < g.nx(); ++jx)
    for (int jy = 0; jy < g.ny(); ++jy) {
      const double kx = detail::eff_k(g.k(Axis::x, jx), jx);
      const double ky = detail::eff_k(g.k(Axis::y, jy), jy);
      const double k2 = kx * kx + ky * ky;
      if (k2 == 0.0) continue;
      const std::size_t i = g.index(jx, jy, j0);
      const Complex s = (kx * f.v1[i] + ky * f.v2[i]) / k2;
      out.v1[i] -= kx * s;
      out.v2[i] -= ky * s;
    }
  return out;
}

/// L2(Omega) norm of div_H of the vertical mean (plus the kz Nyquist plane,
/// which cannot be absorbed by an odd w).
inline double vertical_mean_divergence_defect(const HorizontalPair& v) {
  const Grid& g = v.grid();
  double s = 0.0;
  for (int jz : {0, g.nz() / 2})
    for (int jx = 0; jx < g.nx(); ++jx)
      for (int jy = 0; jy < g.ny(); ++jy) {
        const std::size_t i = g.index(jx, jy, jz);
        const Complex d = detail::eff_k(g.k(Axis::x, jx), jx) * v.v1[i] + detail::eff_k(g.k(Axis::y, jy), jy) * v.v2[i];
        s += std::norm(d);
      }
  return std::sqrt(kBoxVolume * s);
}

inline constexpr double kCompatibilityTolerance = 1e-10;

/// w(v) = -int_{-1}^z div_H v.
inline SpectralField vertical_velocity_from_v(const HorizontalPair& v) {
  require_same_grid(v.v1.grid(), v.v2.grid());
  const double defect = vertical_mean_divergence_defect(v);
  if (!(defect < kCompatibilityTolerance))
    throw CompatibilityError("div_H of the vertical mean of v does not vanish", defect);
  const Grid& g = v.grid();
  SpectralField w(v.grid_ptr(), Parity::odd);
  const int j0 = g.nz() / 2;
  detail::for_each_mode(g, [&](std::size_t i, double kx, double ky, double kz, int jx, int jy, int jz) {
    if (jz == j0 || jz == 0) return;
    kx = detail::eff_k(kx, jx);
    ky = detail::eff_k(ky, jy);
    // i kz w = -(i kx v1 + i ky v2)
    w[i] = -(kx * v.v1[i] + ky * v.v2[i]) / kz;
  });
  return w;
}

inline SplitState barotropic_split(const HorizontalPair& v) {
  SplitState out;
  out.vbar = {vertical_mean(v.v1), vertical_mean(v.v2)};
  out.vtilde = {v.v1 - out.vbar.v1, v.v2 - out.vbar.v2};
  out.vtilde.v1.set_parity(v.v1.parity());
  out.vtilde.v2.set_parity(v.v2.parity());
  out.w = SpectralField(v.grid_ptr(), Parity::odd);
  return out;
}

inline SplitState barotropic_split(const VelocityState& u) {
  SplitState out = barotropic_split(u.horizontal());
  out.w = u.w;
  return out;
}

/// Copy the kz = 0 plane of `f` onto a grid with the same horizontal size.
inline SpectralField copy_kz0_plane(const SpectralField& f, const GridPtr& target) {
  const Grid& g = f.grid();
  if (g.nx() != target->nx() || g.ny() != target->ny()) throw ShapeError("horizontal grid sizes differ");
  SpectralField out(target, Parity::even);
  for (int jx = 0; jx < g.nx(); ++jx)
    for (int jy = 0; jy < g.ny(); ++jy)
      out[target->index(jx, jy, target->nz() / 2)] = f[g.index(jx, jy, g.nz() / 2)];
  return out;
}

/// Largest |coefficient| on the kz = 0 plane.
inline double vertical_mean_magnitude(const SpectralField& f) {
  const Grid& g = f.grid();
  double m = 0.0;
  for (int jx = 0; jx < g.nx(); ++jx)
    for (int jy = 0; jy < g.ny(); ++jy) m = std::max(m, std::abs(f[g.index(jx, jy, g.nz() / 2)]));
  return m;
}

/// Largest |coefficient| away from the kz = 0 plane.
inline double z_dependence_magnitude(const SpectralField& f) {
  const Grid& g = f.grid();
  double m = 0.0;
  for (int jx = 0; jx < g.nx(); ++jx)
    for (int jy = 0; jy < g.ny(); ++jy)
      for (int jz = 0; jz < g.nz(); ++jz)
        if (jz != g.nz() / 2) m = std::max(m, std::abs(f[g.index(jx, jy, jz)]));
  return m;
}

/// Physical-space carrier a = (a1, a2, a3) for repeated evaluation of a . grad f.
/// A missing a3 means a purely horizontal carrier.
class Advector {
 public:
  Advector(const SpectralField& a1, const SpectralField& a2, const SpectralField* a3 = nullptr)
      : grid_(a1.grid_ptr()), a1_(inverse_transform(a1)), a2_(inverse_transform(a2)) {
    require_same_grid(a1.grid(), a2.grid());
    standard_parity_ = a1.parity() == Parity::even && a2.parity() == Parity::even;
    if (a3) {
      require_same_grid(a1.grid(), a3->grid());
      a3_ = inverse_transform(*a3);
      standard_parity_ = standard_parity_ && a3->parity() == Parity::odd;
    }
  }

  explicit Advector(const VelocityState& u) : Advector(u.v1, u.v2, &u.w) {}

  /// Dealiased a . grad f.
  SpectralField apply(const SpectralField& f) const {
    require_same_grid(*grid_, f.grid());
    PhysicalField acc(grid_);
    auto out = acc.values();
    add_term(out, a1_, spectral_derivative(f, Axis::x));
    add_term(out, a2_, spectral_derivative(f, Axis::y));
    if (a3_) add_term(out, *a3_, spectral_derivative(f, Axis::z));
    SpectralField res = forward_transform(acc, standard_parity_ ? f.parity() : Parity::none);
    return dealias_inplace(res);
  }

  /// Dealiased a . grad_H f (vertical transport dropped).
  SpectralField apply_horizontal(const SpectralField& f) const {
    PhysicalField acc(grid_);
    auto out = acc.values();
    add_term(out, a1_, spectral_derivative(f, Axis::x));
    add_term(out, a2_, spectral_derivative(f, Axis::y));
    SpectralField res = forward_transform(acc, Parity::none);
    return dealias_inplace(res);
  }

  double max_speed() const {
    double m = 0.0;
    for (std::size_t i = 0; i < a1_.values().size(); ++i) {
      double s = a1_[i] * a1_[i] + a2_[i] * a2_[i];
      if (a3_) s += (*a3_)[i] * (*a3_)[i];
      m = std::max(m, std::sqrt(s));
    }
    return m;
  }

 private:
  static void add_term(std::span<double> out, const PhysicalField& a, const SpectralField& df) {
    const PhysicalField d = inverse_transform(df);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += a[i] * d[i];
  }

  GridPtr grid_;
  PhysicalField a1_, a2_;
  std::optional<PhysicalField> a3_;
  bool standard_parity_ = false;
};

/// Dealiased div(a (x) b) component i = sum_j d_j(a_i b_j).
inline SpectralField div_tensor_component(const SpectralField& ai, const SpectralField& b1, const SpectralField& b2,
                                          const SpectralField& b3) {
  SpectralField out = spectral_derivative(product(ai, b1), Axis::x);
  out += spectral_derivative(product(ai, b2), Axis::y);
  out += spectral_derivative(product(ai, b3), Axis::z);
  return out;
}

/// Right-hand sides (F_H, F_z) of the difference system between an
/// (eps, delta) Navier-Stokes solution and the hydrostatic limit (v, w).
struct DiffForcing {
  HorizontalPair FH;
  SpectralField Fz;
};

/// `limit` holds (v, w(v)); `dwdt` is d_t w of the limit; `diff` holds
/// (V, W) with W = eps (w_eps - w). W/eps is rebuilt from V as
/// -int_{-1}^z div_H V, so no division by eps takes place.
inline DiffForcing diff_rhs_F(const VelocityState& limit, const SpectralField& dwdt, const VelocityState& diff,
                              double eps, double delta) {
  if (!(eps > 0.0)) throw InvalidParameter("eps must be > 0");
  if (!(delta >= 0.0)) throw InvalidParameter("delta must be >= 0");
  const Grid& g = limit.grid();
  for (const SpectralField* f : {&limit.v2, &limit.w, &dwdt, &diff.v1, &diff.v2, &diff.w})
    require_same_grid(g, f->grid());

  const SpectralField W_over_eps = vertical_velocity_from_v(diff.horizontal());
  const Advector u(limit);
  const Advector U(diff.v1, diff.v2, &W_over_eps);

  DiffForcing out;
  auto horizontal = [&](const SpectralField& vi, const SpectralField& Vi) {
    SpectralField f = U.apply(vi);
    f += u.apply(Vi);
    f += U.apply(Vi);
    f *= -1.0;
    f += delta * spectral_derivative(vi, Axis::z, 2);
    return enforce_parity(f, Parity::even);
  };
  out.FH = {horizontal(limit.v1, diff.v1), horizontal(limit.v2, diff.v2)};

  SpectralField fz = U.apply(eps * limit.w);
  fz += u.apply(diff.w);
  fz += U.apply(diff.w);
  fz *= -1.0;
  SpectralField forcing = dwdt + u.apply(limit.w) - laplacian_delta(limit.w, delta);
  fz -= eps * forcing;
  out.Fz = enforce_parity(fz, Parity::odd);
  return out;
}

/// Independent evaluation of the same forcing from the tensor-divergence form.
inline DiffForcing diff_rhs_F_divform(const VelocityState& limit, const SpectralField& dwdt, const VelocityState& diff,
                                      double eps, double delta) {
  if (!(eps > 0.0)) throw InvalidParameter("eps must be > 0");
  const SpectralField W_over_eps = vertical_velocity_from_v(diff.horizontal());
  const SpectralField eps_w = eps * limit.w;
  const SpectralField* a[3] = {&limit.v1, &limit.v2, &eps_w};     // (v, eps w)
  const SpectralField* A[3] = {&diff.v1, &diff.v2, &diff.w};      // (V, W)
  const SpectralField* B[3] = {&diff.v1, &diff.v2, &W_over_eps};  // (V, W/eps)

  auto component = [&](int i) {
    SpectralField f = div_tensor_component(*a[i], *B[0], *B[1], *B[2]);
    f += div_tensor_component(*A[i], limit.v1, limit.v2, limit.w);
    f += div_tensor_component(*A[i], *B[0], *B[1], *B[2]);
    return f * -1.0;
  };

  DiffForcing out;
  SpectralField f1 = component(0) + delta * spectral_derivative(limit.v1, Axis::z, 2);
  SpectralField f2 = component(1) + delta * spectral_derivative(limit.v2, Axis::z, 2);
  out.FH = {enforce_parity(f1, Parity::even), enforce_parity(f2, Parity::even)};
  const Advector u(limit);
  SpectralField forcing = dwdt + u.apply(limit.w) - laplacian_delta(limit.w, delta);
  SpectralField fz = component(2) - eps * forcing;
  out.Fz = enforce_parity(fz, Parity::odd);
  return out;
}

/// Forcings of the barotropic/baroclinic form of the Navier-Stokes system.
struct BaroclinicForcing {
  HorizontalPair Fbar;     // z-independent
  HorizontalPair Ftilde1;  // zero vertical mean
  SpectralField Ftilde2;
};

inline BaroclinicForcing baroclinic_rhs(const HorizontalPair& vbar, const VelocityState& utilde) {
  const Grid& g = vbar.grid();
  require_same_grid(g, utilde.grid());
  const double mean = std::max(vertical_mean_magnitude(utilde.v1), vertical_mean_magnitude(utilde.v2));
  if (mean > kCompatibilityTolerance) throw CompatibilityError("baroclinic velocity has nonzero vertical mean", mean);
  const double zdep = std::max(z_dependence_magnitude(vbar.v1), z_dependence_magnitude(vbar.v2));
  if (zdep > kCompatibilityTolerance) throw CompatibilityError("barotropic velocity depends on z", zdep);

  const Advector ut(utilde);
  const Advector vb(vbar.v1, vbar.v2);
  const Advector vt(utilde.v1, utilde.v2);

  const SpectralField a1 = ut.apply(utilde.v1);
  const SpectralField a2 = ut.apply(utilde.v2);
  const SpectralField m1 = vertical_mean(a1);
  const SpectralField m2 = vertical_mean(a2);

  BaroclinicForcing out;
  out.Fbar = {-m1, -m2};
  out.Fbar.v1.set_parity(Parity::even);
  out.Fbar.v2.set_parity(Parity::even);

  auto tilde1 = [&](const SpectralField& vbar_i, const SpectralField& vt_i, const SpectralField& a, const SpectralField& m) {
    SpectralField f = vt.apply_horizontal(vbar_i);
    f += vb.apply_horizontal(vt_i);
    f += a;
    f *= -1.0;
    f += m;
    return enforce_parity(f, Parity::even);
  };
  out.Ftilde1 = {tilde1(vbar.v1, utilde.v1, a1, m1), tilde1(vbar.v2, utilde.v2, a2, m2)};

  SpectralField f2 = vb.apply_horizontal(utilde.w);
  f2 += ut.apply(utilde.w);
  f2 *= -1.0;
  out.Ftilde2 = enforce_parity(f2, Parity::odd);
  return out;
}

}  // namespace hydrostat
