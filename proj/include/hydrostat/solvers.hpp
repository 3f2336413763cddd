#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hydrostat/errors.hpp"
#include "hydrostat/fields.hpp"
#include "hydrostat/harness/initial_data.hpp"
#include "hydrostat/norms.hpp"
#include "hydrostat/spectral.hpp"

namespace hydrostat {

struct SimConfig {
  System system = System::NS_eps_delta;
  int nx = 32, ny = 32, nz = 32;
  double eps = 1.0;
  double delta = 1.0;
  std::optional<double> gamma;  // when set, delta = eps^(gamma - 2)
  double dt = 1e-3;
  double T = 0.25;
  std::string recipe = "bandlimited_random";
  std::uint64_t seed = 42;
  int record_every = 1;
  double baroclinic_scale = 1.0;

  double effective_delta() const { return gamma ? std::pow(eps, *gamma - 2.0) : delta; }

  void validate() const {
    if (!(eps > 0.0)) throw InvalidParameter("eps must be > 0");
    if (gamma && !(*gamma > 0.0)) throw InvalidParameter("gamma must be > 0");
    if (!(effective_delta() >= 0.0)) throw InvalidParameter("delta must be >= 0");
    if (!(dt > 0.0)) throw InvalidParameter("dt must be > 0");
    if (!(T > 0.0)) throw InvalidParameter("T must be > 0");
    if (dt > T) throw InvalidParameter("dt must not exceed T");
    if (record_every < 1) throw InvalidParameter("record_every must be >= 1");
  }

  long steps() const { return std::llround(T / dt); }
};

namespace detail {

/// phi_1(z) = (e^z - 1)/z and phi_2(z) = (e^z - 1 - z)/z^2.
inline std::pair<double, double> etd_phi(double z) {
  if (std::abs(z) < 1.0) {
    double term = 1.0, p1 = 0.0, p2 = 0.0;
    // term = z^k / k!
    for (int k = 0; k < 30; ++k) {
      p1 += term / (k + 1);
      p2 += term / ((k + 1) * (k + 2));
      term *= z / (k + 1);
    }
    return {p1, p2};
  }
  const double em1 = std::expm1(z);
  return {em1 / z, (em1 - z) / (z * z)};
}

}  // namespace detail

/// Time stepper for one of the five systems.
///
/// All systems are advanced with a second-order exponential time differencing
/// scheme (ETD2): the linear dissipation is integrated exactly per mode and the
/// projected nonlinearity is extrapolated linearly in time. The first step is
/// first order (ETD1). The Stokes system has no nonlinearity and is therefore
/// integrated exactly.
class Solver {
 public:
  Solver(const SimConfig& cfg, VelocityState initial) : cfg_(cfg), u_(std::move(initial)) {
    cfg_.validate();
    eps_ = cfg_.eps;
    delta_ = cfg_.effective_delta();
    u_.system = cfg_.system;
    u_.time = 0.0;
    const Grid& g = u_.grid();
    require_same_grid(g, u_.v2.grid());
    require_same_grid(g, u_.w.grid());
    check_initial();
    build_coefficients();
    max_k_ = 0.0;
    for (Axis a : {Axis::x, Axis::y, Axis::z})
      for (int j = 0; j < g.n(a); ++j)
        if (3 * std::abs(g.mode(a, j)) < g.n(a)) max_k_ = std::max(max_k_, std::abs(g.k(a, j)));
  }

  const VelocityState& state() const { return u_; }
  const SimConfig& config() const { return cfg_; }
  double eps() const { return eps_; }
  double delta() const { return delta_; }
  long step_index() const { return n_; }
  bool cfl_warned() const { return cfl_warned_; }

  /// Vertical diffusion coefficient in the linear operator.
  double linear_delta() const {
    return (cfg_.system == System::PE_H || cfg_.system == System::NS2D) ? 0.0 : delta_;
  }

  /// Semi-discrete right-hand side d_t u at the current state.
  VelocityState tendency() {
    const VelocityState& N = nonlinear();
    VelocityState out = u_;
    const double d = linear_delta();
    out.v1 = laplacian_delta(u_.v1, d) + N.v1;
    out.v2 = laplacian_delta(u_.v2, d) + N.v2;
    out.v1.set_parity(Parity::even);
    out.v2.set_parity(Parity::even);
    if (is_pe()) {
      out.w = vertical_velocity_from_v(out.horizontal());
    } else {
      out.w = laplacian_delta(u_.w, d) + N.w;
      out.w.set_parity(Parity::odd);
    }
    return out;
  }

  /// Projected nonlinear term at the current state (cached).
  const VelocityState& nonlinear() {
    if (!cached_n_) {
      cached_n_ = compute_nonlinear();
    }
    return *cached_n_;
  }

  /// Discrete L2 pairing of the dealiased advection term with the state,
  /// summed over the prognostic components.
  double advection_energy_pairing() const {
    const Advector a = carrier();
    double s = inner_product(a.apply(u_.v1), u_.v1) + inner_product(a.apply(u_.v2), u_.v2);
    if (cfg_.system == System::NS_eps_delta) s += eps_ * eps_ * inner_product(a.apply(u_.w), u_.w);
    return s;
  }

  /// Energy of the system: ||v||^2 + eps^2 ||w||^2 (NS), ||v||^2 otherwise,
  /// plus ||w||^2 for the Stokes system in unscaled form.
  double energy() const {
    double e = inner_product(u_.v1, u_.v1) + inner_product(u_.v2, u_.v2);
    if (cfg_.system == System::NS_eps_delta || cfg_.system == System::StokesScaled) e += eps_ * eps_ * inner_product(u_.w, u_.w);
    return e;
  }

  /// Dissipation rate ||grad_H u||^2 + delta ||d_z u||^2 in the energy metric.
  double dissipation() const {
    const double d = linear_delta();
    auto diss = [d](const SpectralField& f) {
      return -inner_product(laplacian_delta(f, d), f);
    };
    double s = diss(u_.v1) + diss(u_.v2);
    if (cfg_.system == System::NS_eps_delta || cfg_.system == System::StokesScaled) s += eps_ * eps_ * diss(u_.w);
    return s;
  }

  /// Relative residual of dE/dt + 2 D = 0 for the semi-discrete system.
  double energy_balance_residual() {
    const VelocityState du = tendency();
    double rate = inner_product(du.v1, u_.v1) + inner_product(du.v2, u_.v2);
    if (cfg_.system == System::NS_eps_delta || cfg_.system == System::StokesScaled)
      rate += eps_ * eps_ * inner_product(du.w, u_.w);
    const double D = dissipation();
    const double scale = std::max({2.0 * D, 2.0 * std::abs(rate), 1e-300});
    return std::abs(2.0 * rate + 2.0 * D) / scale;
  }

  /// Unscaled divergence d_x v1 + d_y v2 + d_z w (sup of coefficients).
  double divergence_defect() const {
    const SpectralField d = spectral_derivative(u_.v1, Axis::x) + spectral_derivative(u_.v2, Axis::y) +
                            spectral_derivative(u_.w, Axis::z);
    return d.max_abs();
  }

  void step() {
    if (cfg_.system == System::StokesScaled) {
      apply_linear_exact(u_.v1);
      apply_linear_exact(u_.v2);
      apply_linear_exact(u_.w);
    } else {
      const VelocityState N = nonlinear();
      advance(u_.v1, N.v1, prev_n_ ? &prev_n_->v1 : nullptr);
      advance(u_.v2, N.v2, prev_n_ ? &prev_n_->v2 : nullptr);
      if (!is_pe()) advance(u_.w, N.w, prev_n_ ? &prev_n_->w : nullptr);
      prev_n_ = N;
    }
    ++n_;
    u_.time = static_cast<double>(n_) * cfg_.dt;
    cached_n_.reset();
    restore_constraints();
    check_blowup();
  }

 private:
  bool is_pe() const { return cfg_.system == System::PE_delta || cfg_.system == System::PE_H; }

  void check_initial() {
    switch (cfg_.system) {
      case System::StokesScaled: {
        const double m = std::max(vertical_mean_magnitude(u_.v1), vertical_mean_magnitude(u_.v2));
        if (m > kCompatibilityTolerance) throw CompatibilityError("Stokes data must have zero vertical mean", m);
        break;
      }
      case System::NS2D: {
        const double m = std::max({z_dependence_magnitude(u_.v1), z_dependence_magnitude(u_.v2), u_.w.max_abs()});
        if (m > kCompatibilityTolerance) throw CompatibilityError("2D data must be z-independent with w = 0", m);
        break;
      }
      case System::PE_delta:
      case System::PE_H:
        u_.w = vertical_velocity_from_v(u_.horizontal());
        break;
      default: break;
    }
  }

  void build_coefficients() {
    const Grid& g = u_.grid();
    const double h = cfg_.dt;
    const double d = linear_delta();
    E_.resize(g.size());
    c1_.resize(g.size());
    c2_.resize(g.size());
    c0_.resize(g.size());
    detail::for_each_mode(g, [&](std::size_t i, double kx, double ky, double kz, int, int, int) {
      const double L = -(kx * kx + ky * ky) - d * kz * kz;
      const double z = h * L;
      const auto [p1, p2] = detail::etd_phi(z);
      E_[i] = std::exp(z);
      c0_[i] = h * p1;          // first step
      c1_[i] = h * (p1 + p2);   // current nonlinearity
      c2_[i] = h * p2;          // previous nonlinearity
    });
  }

  void advance(SpectralField& f, const SpectralField& N, const SpectralField* Nprev) {
    auto c = f.coeffs();
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (Nprev) c[i] = E_[i] * c[i] + c1_[i] * N[i] - c2_[i] * (*Nprev)[i];
      else c[i] = E_[i] * c[i] + c0_[i] * N[i];
    }
  }

  void apply_linear_exact(SpectralField& f) {
    auto c = f.coeffs();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= E_[i];
  }

  Advector carrier() const {
    if (cfg_.system == System::NS2D) return Advector(u_.v1, u_.v2);
    return Advector(u_);
  }

  VelocityState compute_nonlinear() {
    VelocityState N = VelocityState::zeros(u_.grid_ptr(), cfg_.system);
    if (cfg_.system == System::StokesScaled) return N;
    const Advector a = carrier();
    warn_cfl(a.max_speed());
    N.v1 = -a.apply(u_.v1);
    N.v2 = -a.apply(u_.v2);
    enforce_parity_inplace(N.v1, Parity::even);
    enforce_parity_inplace(N.v2, Parity::even);
    if (cfg_.system == System::NS_eps_delta) {
      N.w = -a.apply(u_.w);
      enforce_parity_inplace(N.w, Parity::odd);
      project_div_free_unscaled_inplace(N, eps_);
    } else {
      HorizontalPair p = project_hydrostatic(N.horizontal());
      N.v1 = p.v1;
      N.v2 = p.v2;
    }
    return N;
  }

  void restore_constraints() {
    enforce_parity_inplace(u_.v1, Parity::even);
    enforce_parity_inplace(u_.v2, Parity::even);
    switch (cfg_.system) {
      case System::NS_eps_delta:
        enforce_parity_inplace(u_.w, Parity::odd);
        project_div_free_unscaled_inplace(u_, eps_);
        break;
      case System::PE_delta:
      case System::PE_H: {
        HorizontalPair p = project_hydrostatic(u_.horizontal());
        u_.v1 = p.v1;
        u_.v2 = p.v2;
        if (u_.v1.finite() && u_.v2.finite()) u_.w = vertical_velocity_from_v(u_.horizontal());
        break;
      }
      case System::NS2D: {
        HorizontalPair p = project_hydrostatic(u_.horizontal());
        u_.v1 = p.v1;
        u_.v2 = p.v2;
        break;
      }
      case System::StokesScaled: enforce_parity_inplace(u_.w, Parity::odd); break;
    }
  }

  void check_blowup() const {
    const bool finite = u_.v1.finite() && u_.v2.finite() && u_.w.finite();
    if (!finite || !(state_l2(u_) <= 1e8)) throw BlowupDetected(u_.time);
  }

  void warn_cfl(double max_speed) {
    if (cfl_warned_) return;
    const double c = cfg_.dt * max_speed * max_k_;
    if (c > 0.5) {
      cfl_warned_ = true;
      std::clog << "hydrostat: warning: CFL number " << c << " exceeds 0.5 (" << to_string(cfg_.system)
                << ", dt = " << cfg_.dt << ")\n";
    }
  }

  SimConfig cfg_;
  VelocityState u_;
  double eps_ = 1.0, delta_ = 0.0, max_k_ = 0.0;
  long n_ = 0;
  bool cfl_warned_ = false;
  std::vector<double> E_, c0_, c1_, c2_;
  std::optional<VelocityState> cached_n_;
  std::optional<VelocityState> prev_n_;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> l2;  // ||u||_{L2} of (v1, v2, w) at each record
  VelocityState final_state;
  bool blowup_flag = false;
  double blowup_time = 0.0;
  bool cfl_warned = false;
};

/// Advance `initial` to cfg.T, recording every cfg.record_every steps. The
/// observer, if given, sees the solver at t = 0 and after each recorded step.
inline TrajectoryRecord run_simulation(const SimConfig& cfg, VelocityState initial,
                                       const std::function<void(Solver&)>& observer = {}) {
  Solver solver(cfg, std::move(initial));
  TrajectoryRecord rec;
  auto record = [&] {
    rec.times.push_back(solver.state().time);
    rec.l2.push_back(state_l2(solver.state()));
    if (observer) observer(solver);
  };
  record();
  const long steps = cfg.steps();
  try {
    for (long n = 1; n <= steps; ++n) {
      solver.step();
      if (n % cfg.record_every == 0 || n == steps) record();
    }
  } catch (const BlowupDetected& e) {
    rec.blowup_flag = true;
    rec.blowup_time = e.time();
  }
  rec.final_state = solver.state();
  rec.cfl_warned = solver.cfl_warned();
  return rec;
}

/// Grid for cfg; the 2D system lives on an nx x ny x 4 grid.
inline GridPtr grid_for(const SimConfig& cfg) {
  return make_grid(cfg.nx, cfg.ny, cfg.system == System::NS2D ? 4 : cfg.nz);
}

/// Initial data per cfg.recipe, adapted to the system (barotropic part for
/// NS2D, baroclinic part for the Stokes system).
inline VelocityState initial_state_for(const SimConfig& cfg, const GridPtr& grid) {
  if (cfg.system == System::NS2D) {
    const GridPtr full = make_grid(cfg.nx, cfg.ny, cfg.nz);
    const VelocityState u0 = generate_initial_data(cfg.recipe, cfg.seed, full, cfg.baroclinic_scale);
    VelocityState u = VelocityState::zeros(grid, cfg.system);
    u.v1 = copy_kz0_plane(u0.v1, grid);
    u.v2 = copy_kz0_plane(u0.v2, grid);
    return u;
  }
  VelocityState u = generate_initial_data(cfg.recipe, cfg.seed, grid, cfg.baroclinic_scale);
  if (cfg.system == System::StokesScaled) {
    const SplitState s = barotropic_split(u);
    u.v1 = s.vtilde.v1;
    u.v2 = s.vtilde.v2;
  }
  return u;
}

inline TrajectoryRecord run_simulation(const SimConfig& cfg, const std::function<void(Solver&)>& observer = {}) {
  cfg.validate();
  const GridPtr grid = grid_for(cfg);
  return run_simulation(cfg, initial_state_for(cfg, grid), observer);
}

}  // namespace hydrostat
