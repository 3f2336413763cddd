#pragma once

// Self-checks shared by the CLI (`hydrostat verify`) and the acceptance test.

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "hydrostat/bootstrap.hpp"
#include "hydrostat/fields.hpp"
#include "hydrostat/harness/initial_data.hpp"
#include "hydrostat/harness/sweep.hpp"
#include "hydrostat/norms.hpp"
#include "hydrostat/solvers.hpp"
#include "hydrostat/spectral.hpp"

namespace hydrostat::verify {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

using Suite = std::vector<Check>;

inline bool all_passed(const Suite& s) {
  for (const auto& c : s)
    if (!c.passed) return false;
  return true;
}

inline std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

namespace detail {

inline Check guarded(const std::string& name, const std::function<Check()>& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {name, false, std::string("exception: ") + e.what()};
  }
}

/// Relative L2 distance of two states.
inline double state_distance(const VelocityState& a, const VelocityState& b) { return state_l2(a - b); }

}  // namespace detail

// ---------------------------------------------------------------- oracles

/// Taylor-Green vortex under 2D Navier-Stokes: exact decay e^{-2 pi^2 t}.
inline Check taylor_green_2d_oracle() {
  return detail::guarded("taylor_green_2d_L2_error", [] {
    SimConfig cfg;
    cfg.system = System::NS2D;
    cfg.nx = cfg.ny = 64;
    cfg.nz = 4;
    cfg.dt = 1e-4;
    cfg.T = 0.1;
    const GridPtr g = make_grid(64, 64, 4);
    const TrajectoryRecord rec = run_simulation(cfg, taylor_green(g, false));
    VelocityState exact = taylor_green(g, false);
    scale_inplace(exact, std::exp(-2.0 * std::numbers::pi * std::numbers::pi * cfg.T));
    const double err = detail::state_distance(rec.final_state, exact);
    return Check{"taylor_green_2d_L2_error", err < 1e-8 && !rec.blowup_flag, "error " + fmt(err) + " (< 1e-8)"};
  });
}

/// v0 = (cos pi z, 0) decays like e^{-delta pi^2 t}.
inline Check heat_mode_oracle(System system) {
  const std::string name = std::string("heat_mode_decay_") + to_string(system);
  return detail::guarded(name, [&] {
    SimConfig cfg;
    cfg.system = system;
    cfg.nx = cfg.ny = cfg.nz = 8;
    cfg.eps = 0.5;
    cfg.delta = 1.0;
    cfg.dt = 1e-3;
    cfg.T = 0.1;
    const GridPtr g = make_grid(8, 8, 8);
    const TrajectoryRecord rec = run_simulation(cfg, heat_mode(g));
    const double expected = std::exp(-cfg.delta * std::numbers::pi * std::numbers::pi * cfg.T);
    const double amp = rec.final_state.v1.mode(0, 0, 1).real() / 0.5;
    VelocityState exact = heat_mode(g);
    scale_inplace(exact, expected);
    const double rel = detail::state_distance(rec.final_state, exact) / state_l2(exact);
    return Check{name, rel < 1e-6, "amplitude " + fmt(amp) + " vs " + fmt(expected) + ", relative error " + fmt(rel) + " (< 1e-6)"};
  });
}

/// Exact exponential integrator of the scaled Stokes system.
inline Check stokes_exact_oracle() {
  return detail::guarded("stokes_exact_exponential", [] {
    SimConfig cfg;
    cfg.system = System::StokesScaled;
    cfg.nx = cfg.ny = cfg.nz = 16;
    cfg.eps = 0.5;
    cfg.delta = 4.0;
    cfg.dt = 1e-3;
    cfg.T = 1.0;
    cfg.record_every = 50;
    const GridPtr g = make_grid(16, 16, 16);
    double worst = 0.0;
    // heat mode: every recorded L2 norm equals e^{-delta pi^2 t} ||u0||
    const double n0 = state_l2(heat_mode(g));
    const TrajectoryRecord rec = run_simulation(cfg, heat_mode(g));
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
      const double e = n0 * std::exp(-cfg.delta * std::numbers::pi * std::numbers::pi * rec.times[i]);
      worst = std::max(worst, std::abs(rec.l2[i] - e) / e);
    }
    // baroclinic random data: each coefficient is multiplied by e^{L T}
    VelocityState u0 = bandlimited_random(g, 7);
    const SplitState s = barotropic_split(u0);
    u0.v1 = s.vtilde.v1;
    u0.v2 = s.vtilde.v2;
    cfg.T = 0.05;
    const TrajectoryRecord r2 = run_simulation(cfg, u0);
    double scale = 0.0;
    double err = 0.0;
    for (const auto* pair : {&u0.v1, &u0.v2, &u0.w}) {
      const SpectralField& f0 = *pair;
      const SpectralField& f1 = pair == &u0.v1 ? r2.final_state.v1 : pair == &u0.v2 ? r2.final_state.v2 : r2.final_state.w;
      ::hydrostat::detail::for_each_mode(*g, [&](std::size_t i, double kx, double ky, double kz, int, int, int) {
        const double L = -(kx * kx + ky * ky) - cfg.delta * kz * kz;
        const Complex expect = f0[i] * std::exp(L * cfg.T);
        scale = std::max(scale, std::abs(f0[i]));
        err = std::max(err, std::abs(f1[i] - expect));
      });
    }
    worst = std::max(worst, err / scale);
    return Check{"stokes_exact_exponential", worst < 1e-12, "max relative deviation " + fmt(worst) + " (< 1e-12)"};
  });
}

inline Check transform_oracles() {
  return detail::guarded("transform_normalisation", [] {
    const GridPtr g = make_grid(8, 8, 8);
    const SpectralField one = forward_transform(PhysicalField::sample(g, [](double, double, double) { return 1.0; }));
    const SpectralField s = forward_transform(
        PhysicalField::sample(g, [](double x, double, double) { return std::sin(std::numbers::pi * x); }));
    double dev = std::abs(one.mode(0, 0, 0) - 1.0);
    dev = std::max(dev, std::abs(s.mode(1, 0, 0) - Complex(0.0, -0.5)));
    dev = std::max(dev, std::abs(s.mode(-1, 0, 0) - Complex(0.0, 0.5)));
    return Check{"transform_normalisation", dev < 1e-14, "max deviation " + fmt(dev)};
  });
}

inline Suite oracles() {
  return {transform_oracles(), taylor_green_2d_oracle(), heat_mode_oracle(System::PE_delta),
          heat_mode_oracle(System::NS_eps_delta), stokes_exact_oracle()};
}

// ------------------------------------------------------------- invariants

struct InvariantStats {
  double divergence = 0.0;
  double parity = 0.0;
  double advection = 0.0;
  double energy_rate = 0.0;
};

inline InvariantStats trajectory_invariants(System system, int n, int steps) {
  SimConfig cfg;
  cfg.system = system;
  cfg.nx = cfg.ny = cfg.nz = n;
  cfg.eps = 0.5;
  cfg.delta = 1.0;
  cfg.dt = 1e-3;
  cfg.T = steps * cfg.dt;
  const GridPtr g = make_grid(n, n, n);
  InvariantStats st;
  run_simulation(cfg, bandlimited_random(g, 42), [&](Solver& s) {
    const VelocityState& u = s.state();
    st.divergence = std::max(st.divergence, s.divergence_defect());
    st.parity = std::max({st.parity, parity_defect(u.v1), parity_defect(u.v2), parity_defect(u.w)});
    st.advection = std::max(st.advection, std::abs(s.advection_energy_pairing()));
    st.energy_rate = std::max(st.energy_rate, s.energy_balance_residual());
  });
  return st;
}

/// Finite-step energy balance of the exact Stokes integrator:
/// E(t+h) - E(t) + 2 int D = 0 per mode.
inline double stokes_step_energy_residual() {
  const GridPtr g = make_grid(16, 16, 16);
  VelocityState u0 = bandlimited_random(g, 3);
  const SplitState s = barotropic_split(u0);
  u0.v1 = s.vtilde.v1;
  u0.v2 = s.vtilde.v2;
  SimConfig cfg;
  cfg.system = System::StokesScaled;
  cfg.nx = cfg.ny = cfg.nz = 16;
  cfg.eps = 0.5;
  cfg.delta = 16.0;
  cfg.dt = 1e-3;
  cfg.T = 0.02;
  Solver solver(cfg, u0);
  double worst = 0.0;
  for (int n = 0; n < 20; ++n) {
    const VelocityState before = solver.state();
    const double e0 = solver.energy();
    solver.step();
    const double e1 = solver.energy();
    // exact time integral of 2 D over the step, mode by mode
    double diss = 0.0;
    const double e2 = cfg.eps * cfg.eps;
    for (const auto* f : {&before.v1, &before.v2, &before.w}) {
      const double wgt = f == &before.w ? e2 : 1.0;
      ::hydrostat::detail::for_each_mode(*g, [&](std::size_t i, double kx, double ky, double kz, int, int, int) {
        const double L = -(kx * kx + ky * ky) - cfg.delta * kz * kz;
        diss += wgt * kBoxVolume * std::norm((*f)[i]) * (-std::expm1(2.0 * L * cfg.dt));
      });
    }
    worst = std::max(worst, std::abs(e1 - e0 + diss) / e0);
  }
  return worst;
}

inline Suite invariants() {
  Suite out;
  for (System sys : {System::NS_eps_delta, System::PE_delta, System::PE_H}) {
    const std::string tag = to_string(sys);
    InvariantStats st;
    try {
      st = trajectory_invariants(sys, 16, 25);
    } catch (const std::exception& e) {
      out.push_back({"trajectory_" + tag, false, std::string("exception: ") + e.what()});
      continue;
    }
    out.push_back({"divergence_" + tag, st.divergence < 1e-11, "max defect " + fmt(st.divergence) + " (< 1e-11)"});
    out.push_back({"parity_" + tag, st.parity == 0.0, "max parity defect " + fmt(st.parity) + " (exact)"});
    out.push_back({"advection_neutrality_" + tag, st.advection < 1e-11, "max |<N(u),u>| " + fmt(st.advection) + " (< 1e-11)"});
    out.push_back({"energy_balance_" + tag, st.energy_rate < 1e-9, "max relative residual " + fmt(st.energy_rate) + " (< 1e-9)"});
  }
  out.push_back(detail::guarded("energy_balance_stokes_step", [] {
    const double r = stokes_step_energy_residual();
    return Check{"energy_balance_stokes_step", r < 1e-9, "max relative residual per step " + fmt(r) + " (< 1e-9)"};
  }));
  out.push_back(detail::guarded("EH_below_EHdelta", [] {
    SweepConfig cfg;
    cfg.mode = SweepMode::eps_delta_to_zero;
    cfg.sim.nx = cfg.sim.ny = cfg.sim.nz = 16;
    cfg.sim.dt = 1e-3;
    cfg.sim.T = 0.05;
    bool ok = true;
    double worst = -1e300;
    for (double e : {0.2, 0.1}) {
      const MatchedPairResult r = run_matched_pair({e, e, {}}, cfg);
      double eh = 0.0, ehd = 0.0;
      for (const auto& [name, v] : r.norms) {
        if (name == "EH") eh = v;
        if (name == "EHdelta") ehd = v;
      }
      ok = ok && eh <= ehd;
      worst = std::max(worst, eh - ehd);
    }
    return Check{"EH_below_EHdelta", ok, "max(EH - EHdelta) " + fmt(worst) + " (<= 0)"};
  }));
  out.push_back(detail::guarded("barotropic_parseval", [] {
    const GridPtr g = make_grid(16, 16, 16);
    const VelocityState u = bandlimited_random(g, 11);
    double worst = 0.0;
    for (const auto* f : {&u.v1, &u.v2}) {
      const SplitState s = barotropic_split(HorizontalPair{*f, *f});
      const double total = norm_sobolev_sq(*f, 0.0);
      // ||vbar||^2 over G is half its value over Omega
      const double bar_G = 0.5 * norm_sobolev_sq(s.vbar.v1, 0.0);
      const double split = 2.0 * bar_G + norm_sobolev_sq(s.vtilde.v1, 0.0);
      worst = std::max(worst, std::abs(total - split) / total);
    }
    return Check{"barotropic_parseval", worst < 1e-10, "relative defect " + fmt(worst) + " (< 1e-10)"};
  }));
  return out;
}

// -------------------------------------------------------------- bootstrap

inline SampledFunction constant_function(double x, int n = 11) {
  std::vector<double> ts(n), xs(n, x);
  for (int i = 0; i < n; ++i) ts[i] = static_cast<double>(i) / (n - 1);
  return SampledFunction(ts, xs);
}

inline Check bootstrap_examples() {
  return detail::guarded("bootstrap_examples", [] {
    std::vector<std::string> bad;
    auto expect = [&](const std::string& what, const BootstrapCertificate& c, Verdict v, double bound = -1.0) {
      const bool ok = c.verdict == v && (bound < 0.0 || std::abs(c.concluded_bound - bound) < 1e-15);
      if (!ok) bad.push_back(what + " -> " + c.describe());
    };
    expect("71 C=1 eps=0.01 X=0.02", check_lemma_71(constant_function(0.02), 1.0, 0.01), Verdict::CERTIFIED, 0.04);
    expect("71 C=1 eps=0.1", check_lemma_71(constant_function(0.02), 1.0, 0.1), Verdict::THRESHOLD_VIOLATED);
    expect("71 X=0", check_lemma_71(constant_function(0.0), 1.0, 0.01), Verdict::CERTIFIED, 0.04);
    expect("72 X=0.01", check_lemma_72(constant_function(0.01), 1.0, 1.0, 0.005), Verdict::HYPOTHESIS_FAILED);
    expect("72 X=0.007", check_lemma_72(constant_function(0.007), 1.0, 1.0, 0.005), Verdict::HYPOTHESIS_FAILED);
    expect("72 X=0.0067", check_lemma_72(constant_function(0.0067), 1.0, 1.0, 0.005), Verdict::CERTIFIED, 0.04);
    expect("72 X=0", check_lemma_72(constant_function(0.0), 1.0, 1.0, 0.005), Verdict::CERTIFIED, 0.04);
    std::string detail = bad.empty() ? "all verdicts reproduced" : bad.front();
    return Check{"bootstrap_examples", bad.empty(), detail};
  });
}

/// Random functions below the lower quadratic root certify; hiding one
/// violating sample always gets rejected.
inline std::pair<Check, Check> bootstrap_randomized(int trials = 1000, std::uint64_t seed = 2024) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int conforming_ok = 0, adversarial_ok = 0;
  for (int t = 0; t < trials; ++t) {
    const bool barrier = t % 2 == 1;
    const double C = 0.5 + 4.0 * unit(rng);
    const double K = 0.5 + 4.0 * unit(rng);
    const double eps_max = barrier ? std::min(1.0 / (64.0 * C), std::log(1.5) / (8.0 * K)) : 1.0 / (16.0 * C);
    const double eps = eps_max * (0.05 + 0.9 * unit(rng));
    const int n = 5 + static_cast<int>(unit(rng) * 60);
    // hypothesis holds whenever C x^2 - (3/4) x + eps >= 0, i.e. below its lower root
    const double top = barrier ? 2.0 * eps / (0.75 + std::sqrt(0.5625 - 4.0 * C * eps))
                              : 2.0 * eps / (0.5 + std::sqrt(0.25 - 4.0 * C * eps));
    std::vector<double> ts(n), xs(n);
    for (int i = 0; i < n; ++i) {
      ts[i] = i * 0.01;
      xs[i] = top * unit(rng);
    }
    const SampledFunction X(ts, xs);
    const BootstrapCertificate c = barrier ? check_lemma_72(X, C, K, eps) : check_lemma_71(X, C, eps);
    if (c.certified() && X.max() <= c.concluded_bound) ++conforming_ok;

    // one hidden sample with the hypothesis violated
    auto violates = [&](double x) {
      return barrier ? x > (C * x * x + 0.25 * x + eps) * std::exp(K * x) : x > C * x * x + 0.5 * x + eps;
    };
    const double mid = barrier ? 4.0 * eps : 1.0 / (4.0 * C);  // violating point for the admissible eps range
    double bad = mid;
    for (int tries = 0; tries < 100 && !violates(bad); ++tries) bad = mid * (0.5 + unit(rng));
    std::vector<double> ys = xs;
    const int hidden = 1 + static_cast<int>(unit(rng) * (n - 1)) % (n - 1);
    ys[hidden] = bad;
    const SampledFunction Y(ts, ys);
    const BootstrapCertificate d = barrier ? check_lemma_72(Y, C, K, eps) : check_lemma_71(Y, C, eps);
    if (violates(bad) && d.verdict == Verdict::HYPOTHESIS_FAILED && d.failed_sample == static_cast<std::size_t>(hidden))
      ++adversarial_ok;
  }
  return {Check{"bootstrap_random_conforming", conforming_ok == trials,
                std::to_string(conforming_ok) + "/" + std::to_string(trials) + " certified with max <= bound"},
          Check{"bootstrap_random_adversarial", adversarial_ok == trials,
                std::to_string(adversarial_ok) + "/" + std::to_string(trials) + " rejected at the hidden sample"}};
}

inline BudgetFunctions linear_budgets(double T, int samples = 201) {
  std::vector<double> ts(samples), g1(samples), g2(samples), g3(samples), f(samples, 1.0);
  for (int i = 0; i < samples; ++i) {
    ts[i] = T * i / (samples - 1);
    g1[i] = std::log(2.0) * ts[i];
    g2[i] = ts[i] / 8.0;
    g3[i] = ts[i] / 2.0;
  }
  BudgetFunctions b;
  b.G1 = SampledFunction(ts, g1);
  b.G2 = SampledFunction(ts, g2);
  b.G3 = SampledFunction(ts, g3);
  b.f = SampledFunction(ts, f);
  return b;
}

inline Check schedule_example() {
  return detail::guarded("continuation_schedule_linear", [] {
    const Schedule s = continuation_schedule(linear_budgets(2.0), 2.0);
    const std::vector<double> expected{0.5, 1.0, 1.5, 2.0};
    bool ok = std::abs(s.T_star - 1.0) < 1e-12 && s.N == 4 && s.T_n.size() == 4;
    for (std::size_t i = 0; ok && i < 4; ++i) ok = std::abs(s.T_n[i] - expected[i]) < 1e-12;
    std::string d = "T_star=" + fmt(s.T_star) + " N=" + std::to_string(s.N) + " T_n={";
    for (double t : s.T_n) d += fmt(t) + " ";
    d += "}";
    return Check{"continuation_schedule_linear", ok, d};
  });
}

inline Suite bootstrap() {
  Suite out{bootstrap_examples()};
  auto [a, b] = bootstrap_randomized();
  out.push_back(a);
  out.push_back(b);
  out.push_back(schedule_example());
  return out;
}

inline Suite run_suite(const std::string& name) {
  if (name == "oracles") return oracles();
  if (name == "invariants") return invariants();
  if (name == "bootstrap") return bootstrap();
  if (name == "all") {
    Suite s = oracles();
    for (auto& c : invariants()) s.push_back(c);
    for (auto& c : bootstrap()) s.push_back(c);
    return s;
  }
  throw InvalidParameter("unknown suite '" + name + "'");
}

}  // namespace hydrostat::verify
