#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "hydrostat/errors.hpp"
#include "hydrostat/fields.hpp"
#include "hydrostat/spectral.hpp"

namespace hydrostat {

namespace detail {

template <class Weight>
double weighted_sum(const SpectralField& F, Weight&& weight) {
  const Grid& g = F.grid();
  double s = 0.0;
  for_each_mode(g, [&](std::size_t i, double kx, double ky, double kz, int, int, int) {
    const double a = std::norm(F[i]);
    if (a != 0.0) s += weight(kx, ky, kz) * a;
  });
  return kBoxVolume * s;
}

}  // namespace detail

/// Squared H^s norm via the multiplier (1+|k|^2)^{s/2}.
inline double norm_sobolev_sq(const SpectralField& F, double s) {
  if (!(s >= 0.0)) throw InvalidParameter("Sobolev index must be >= 0");
  if (s == 0.0) return detail::weighted_sum(F, [](double, double, double) { return 1.0; });
  return detail::weighted_sum(F, [s](double kx, double ky, double kz) {
    return std::pow(1.0 + kx * kx + ky * ky + kz * kz, s);
  });
}

inline double norm_sobolev(const SpectralField& F, double s) { return std::sqrt(norm_sobolev_sq(F, s)); }

/// Squared H^r_z H^s_xy norm.
inline double norm_aniso_sq(const SpectralField& F, int r, int s) {
  if (r < 0 || r > 3 || s < 0 || s > 1) throw InvalidParameter("unsupported anisotropic index (r, s)");
  return detail::weighted_sum(F, [r, s](double kx, double ky, double kz) {
    return std::pow(1.0 + kz * kz, r) * std::pow(1.0 + kx * kx + ky * ky, s);
  });
}

inline double norm_aniso(const SpectralField& F, int r, int s) { return std::sqrt(norm_aniso_sq(F, r, s)); }

inline double norm_l2(const SpectralField& F) { return norm_sobolev(F, 0.0); }

/// Sum of a squared scalar norm over the three velocity components.
template <class Fn>
double state_norm_sq(const VelocityState& u, Fn&& fn) {
  return fn(u.v1) + fn(u.v2) + fn(u.w);
}

inline double state_l2(const VelocityState& u) {
  return std::sqrt(state_norm_sq(u, [](const SpectralField& f) { return norm_sobolev_sq(f, 0.0); }));
}

inline double state_sobolev(const VelocityState& u, double s) {
  return std::sqrt(state_norm_sq(u, [s](const SpectralField& f) { return norm_sobolev_sq(f, s); }));
}

enum class NormKind { E0, EHdelta, Ez, L4H32 };

inline const char* to_string(NormKind k) {
  switch (k) {
    case NormKind::E0: return "E0";
    case NormKind::EHdelta: return "EHdelta";
    case NormKind::Ez: return "Ez";
    case NormKind::L4H32: return "L4H32";
  }
  return "unknown";
}

/// Running space-time norm along a sampled trajectory.
///
/// Time integrals use, per interval, the exact integral of the exponential
/// through the two end values when both are positive, and the trapezoid
/// otherwise; both are second order and the former is exact for
/// exponentially decaying modes.
class NormAccumulator {
 public:
  struct Options {
    double delta = 0.0;   // EHdelta only
    bool planar = false;  // fields are z-independent; report norms over G
  };

  explicit NormAccumulator(NormKind kind) : NormAccumulator(kind, Options{}) {}
  NormAccumulator(NormKind kind, Options opt) : kind_(kind), opt_(opt) {
    if (!(opt_.delta >= 0.0)) throw InvalidParameter("delta must be >= 0");
  }

  static NormAccumulator EHdelta(double delta, bool planar = false) {
    return NormAccumulator(NormKind::EHdelta, Options{delta, planar});
  }

  NormKind kind() const { return kind_; }
  double delta() const { return opt_.delta; }
  int sample_count() const { return count_; }
  double t_start() const { return t_start_; }
  double t_last() const { return t_last_; }
  double running_max() const { return max_; }
  double integral(int part = 0) const { return integral_[part]; }

  /// Add a sample at time u.time; dudt is the semi-discrete tendency at the
  /// same instant (only read by EHdelta).
  void accumulate(const VelocityState& u, const VelocityState* dudt = nullptr) {
    sample(u.time, values(u, dudt));
  }

  /// Add precomputed per-part integrands at time t.
  void sample(double t, const std::array<double, 3>& f) {
    if (count_ > 0 && !(t > t_last_)) {
      throw OrderingError("norm sample at t = " + std::to_string(t) + " does not follow t = " + std::to_string(t_last_));
    }
    if (count_ == 0) {
      t_start_ = t;
    } else {
      const double dt = t - t_last_;
      for (int p = 0; p < 3; ++p) integral_[p] += interval_integral(last_[p], f[p], dt);
    }
    if (kind_ == NormKind::Ez) max_ = std::max(max_, std::sqrt(f[2]));
    last_ = f;
    t_last_ = t;
    ++count_;
  }

  double finalize() const {
    if (count_ < 2) throw InsufficientData("a space-time norm needs at least two samples");
    switch (kind_) {
      case NormKind::E0: return std::sqrt(integral_[0]);
      case NormKind::EHdelta: return std::sqrt(integral_[0]) + std::sqrt(integral_[1]) + std::sqrt(integral_[2]);
      case NormKind::Ez: return std::sqrt(integral_[0]) + max_;
      case NormKind::L4H32: return std::sqrt(std::sqrt(integral_[0]));
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

  /// Integrands for a single state: see finalize() for how parts combine.
  std::array<double, 3> values(const VelocityState& u, const VelocityState* dudt) const {
    const double scale = opt_.planar ? 0.5 : 1.0;
    std::array<double, 3> f{0.0, 0.0, 0.0};
    switch (kind_) {
      case NormKind::E0:
        f[0] = scale * state_norm_sq(u, [](const SpectralField& c) { return norm_sobolev_sq(c, 0.0); });
        break;
      case NormKind::EHdelta: {
        if (!dudt) throw InvalidParameter("EHdelta accumulation needs the time derivative");
        const double d = opt_.delta;
        f[0] = scale * state_norm_sq(u, [](const SpectralField& c) { return norm_sobolev_sq(c, 0.0); });
        f[1] = scale * state_norm_sq(*dudt, [](const SpectralField& c) { return norm_sobolev_sq(c, 0.0); });
        f[2] = scale * state_norm_sq(u, [d](const SpectralField& c) {
                 return detail::weighted_sum(c, [d](double kx, double ky, double kz) {
                   const double m = kx * kx + ky * ky + d * kz * kz;
                   return m * m;
                 });
               });
        break;
      }
      case NormKind::Ez:
        f[0] = scale * state_norm_sq(u, [](const SpectralField& c) { return norm_aniso_sq(c, 1, 1); });
        f[2] = scale * state_norm_sq(u, [](const SpectralField& c) { return norm_aniso_sq(c, 1, 0); });
        break;
      case NormKind::L4H32: {
        const double h = scale * state_norm_sq(u, [](const SpectralField& c) { return norm_sobolev_sq(c, 1.5); });
        f[0] = h * h;
        break;
      }
    }
    return f;
  }

  /// Integral over one interval of a positive sampled function.
  static double interval_integral(double f0, double f1, double dt) {
    if (f0 > 0.0 && f1 > 0.0) {
      const double r = f1 / f0;
      if (std::abs(r - 1.0) > 1e-6) return dt * (f1 - f0) / std::log(r);
    }
    return 0.5 * dt * (f0 + f1);
  }

 private:
  NormKind kind_;
  Options opt_;
  std::array<double, 3> integral_{0.0, 0.0, 0.0};
  std::array<double, 3> last_{0.0, 0.0, 0.0};
  double max_ = 0.0;
  int count_ = 0;
  double t_start_ = 0.0;
  double t_last_ = 0.0;
};

}  // namespace hydrostat
