#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hydrostat/harness/initial_data.hpp"
#include "hydrostat/norms.hpp"
#include "hydrostat/solvers.hpp"

using namespace hydrostat;

namespace {

constexpr double pi = std::numbers::pi;

SimConfig config(System s, int n, double dt, double T, double eps = 0.5, double delta = 1.0) {
  SimConfig c;
  c.system = s;
  c.nx = c.ny = c.nz = n;
  c.dt = dt;
  c.T = T;
  c.eps = eps;
  c.delta = delta;
  return c;
}

double state_max_diff(const VelocityState& a, const VelocityState& b) {
  return std::max({(a.v1 - b.v1).max_abs(), (a.v2 - b.v2).max_abs(), (a.w - b.w).max_abs()});
}

VelocityState flat_state(const GridPtr& g, const VelocityState& plane) {
  VelocityState u = VelocityState::zeros(g);
  u.v1 = copy_kz0_plane(plane.v1, g);
  u.v2 = copy_kz0_plane(plane.v2, g);
  return u;
}

}  // namespace

TEST(EtdPhi, MatchesClosedForm) {
  for (double z : {-40.0, -3.0, -0.5, -1e-3, -1e-9, 0.0, 0.2}) {
    const auto [p1, p2] = detail::etd_phi(z);
    if (std::abs(z) > 1e-2) {
      EXPECT_NEAR(p1, std::expm1(z) / z, 1e-14);
      EXPECT_NEAR(p2, (std::expm1(z) - z) / (z * z), 1e-12);
    } else {
      EXPECT_NEAR(p1, 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0, 1e-12);
      EXPECT_NEAR(p2, 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0, 1e-12);
    }
  }
}

TEST(Config, Validation) {
  SimConfig c;
  EXPECT_NO_THROW(c.validate());
  c.eps = 0.0;
  EXPECT_THROW(c.validate(), InvalidParameter);
  c = SimConfig{};
  c.dt = 1.0;
  c.T = 0.5;
  EXPECT_THROW(c.validate(), InvalidParameter);
  c = SimConfig{};
  c.gamma = 3.0;
  c.eps = 0.1;
  EXPECT_NEAR(c.effective_delta(), 0.1, 1e-15);
}

TEST(NSEpsDelta, HeatModeOneStep) {
  const SimConfig c = config(System::NS_eps_delta, 8, 1e-3, 1e-3, 0.3, 1.0);
  const GridPtr g = make_grid(8, 8, 8);
  Solver s(c, heat_mode(g));
  s.step();
  VelocityState exact = heat_mode(g);
  scale_inplace(exact, std::exp(-pi * pi * 1e-3));
  EXPECT_LT(state_max_diff(s.state(), exact), 1e-9);
  EXPECT_NEAR(s.state().time, 1e-3, 1e-18);
}

TEST(NSEpsDelta, FlatTaylorGreenMatches2D) {
  const GridPtr g3 = make_grid(16, 16, 8);
  const GridPtr g2 = make_grid(16, 16, 4);
  const VelocityState tg2 = taylor_green(g2, false);
  Solver ns(config(System::NS_eps_delta, 16, 1e-3, 0.02), flat_state(g3, tg2));
  Solver two(config(System::NS2D, 16, 1e-3, 0.02), tg2);
  for (int i = 0; i < 20; ++i) {
    ns.step();
    two.step();
  }
  EXPECT_LT(z_dependence_magnitude(ns.state().v1), 1e-14);
  EXPECT_LT(ns.state().w.max_abs(), 1e-14);
  EXPECT_LT((copy_kz0_plane(ns.state().v1, g2) - two.state().v1).max_abs(), 1e-12);
  EXPECT_LT((copy_kz0_plane(ns.state().v2, g2) - two.state().v2).max_abs(), 1e-12);
}

TEST(NSEpsDelta, ZeroStaysZero) {
  const GridPtr g = make_grid(8, 8, 8);
  const TrajectoryRecord r = run_simulation(config(System::NS_eps_delta, 8, 1e-2, 0.1), VelocityState::zeros(g));
  for (double v : r.l2) EXPECT_EQ(v, 0.0);
}

TEST(NSEpsDelta, RandomDataStaysDivergenceFree) {
  const GridPtr g = make_grid(16, 16, 16);
  run_simulation(config(System::NS_eps_delta, 16, 1e-3, 0.01, 0.2, 0.2), bandlimited_random(g, 42), [](Solver& s) {
    EXPECT_LT(s.divergence_defect(), 1e-11);
    EXPECT_LT(std::abs(s.advection_energy_pairing()), 1e-11);
  });
}

TEST(NSEpsDelta, NonlinearTermIsActive) {
  // guards the invariant tests against a vanishing nonlinearity
  const GridPtr g = make_grid(16, 16, 16);
  Solver s(config(System::NS_eps_delta, 16, 1e-3, 0.05), bandlimited_random(g, 42));
  EXPECT_GT(state_l2(s.nonlinear()), 1e-3);
}

TEST(PE, HydrostaticHeatModeStationary) {
  const GridPtr g = make_grid(8, 8, 8);
  const VelocityState u0 = heat_mode(g);
  const TrajectoryRecord r = run_simulation(config(System::PE_H, 8, 1e-2, 1.0, 1.0, 0.0), u0);
  EXPECT_LT(state_max_diff(r.final_state, u0), 1e-12);
  for (double v : r.l2) EXPECT_NEAR(v, r.l2.front(), 1e-12);
}

TEST(PE, DeltaHeatModeDecays) {
  const GridPtr g = make_grid(8, 8, 8);
  Solver s(config(System::PE_delta, 8, 1e-3, 1e-3, 1.0, 1.0), heat_mode(g));
  s.step();
  VelocityState exact = heat_mode(g);
  scale_inplace(exact, std::exp(-pi * pi * 1e-3));
  EXPECT_LT(state_max_diff(s.state(), exact), 1e-9);
}

TEST(PE, FlatTaylorGreenMatches2D) {
  const GridPtr g3 = make_grid(16, 16, 8);
  const GridPtr g2 = make_grid(16, 16, 4);
  const VelocityState tg2 = taylor_green(g2, false);
  Solver pe(config(System::PE_H, 16, 1e-3, 0.02, 1.0, 0.0), flat_state(g3, tg2));
  Solver two(config(System::NS2D, 16, 1e-3, 0.02), tg2);
  for (int i = 0; i < 20; ++i) {
    pe.step();
    two.step();
  }
  EXPECT_LT(pe.state().w.max_abs(), 1e-15);
  EXPECT_LT((copy_kz0_plane(pe.state().v1, g2) - two.state().v1).max_abs(), 1e-12);
}

TEST(PE, WTracksV) {
  const GridPtr g = make_grid(16, 16, 16);
  run_simulation(config(System::PE_delta, 16, 1e-3, 0.01, 1.0, 0.5), bandlimited_random(g, 9), [](Solver& s) {
    const VelocityState& u = s.state();
    EXPECT_LT((u.w - vertical_velocity_from_v(u.horizontal())).max_abs(), 1e-15);
    EXPECT_LT(vertical_mean_divergence_defect(u.horizontal()), 1e-12);
  });
}

TEST(NS2D, TaylorGreenDecay) {
  const GridPtr g = make_grid(64, 64, 4);
  const SimConfig c = [] {
    SimConfig s = config(System::NS2D, 64, 1e-4, 0.1);
    s.nz = 4;
    return s;
  }();
  const TrajectoryRecord r = run_simulation(c, taylor_green(g, false));
  VelocityState exact = taylor_green(g, false);
  scale_inplace(exact, std::exp(-2 * pi * pi * 0.1));
  EXPECT_LT(state_l2(r.final_state - exact), 1e-8);
}

TEST(NS2D, ZeroAndShear) {
  const GridPtr g = make_grid(16, 16, 4);
  SimConfig c = config(System::NS2D, 16, 1e-3, 0.1);
  c.nz = 4;
  EXPECT_EQ(run_simulation(c, VelocityState::zeros(g)).final_state.v1.max_abs(), 0.0);

  VelocityState shear = VelocityState::zeros(g);
  shear.v1 = forward_transform(PhysicalField::sample(g, [](double, double y, double) { return std::sin(pi * y); }),
                               Parity::even);
  const TrajectoryRecord r = run_simulation(c, shear);
  VelocityState exact = shear;
  scale_inplace(exact, std::exp(-pi * pi * 0.1));
  EXPECT_LT(state_max_diff(r.final_state, exact), 1e-13);
}

TEST(NS2D, RejectsZDependence) {
  const GridPtr g = make_grid(8, 8, 8);
  EXPECT_THROW(Solver(config(System::NS2D, 8, 1e-3, 0.1), heat_mode(g)), CompatibilityError);
}

TEST(Stokes, HeatModeExactExponential) {
  const GridPtr g = make_grid(8, 8, 8);
  const double delta = 3.0, dt = 1e-2;
  Solver s(config(System::StokesScaled, 8, dt, dt, 0.5, delta), heat_mode(g));
  s.step();
  EXPECT_NEAR(s.state().v1.mode(0, 0, 1).real(), 0.5 * std::exp(-delta * pi * pi * dt), 1e-16);
}

TEST(Stokes, IsotropicEigenmodeAtDeltaOne) {
  const GridPtr g = make_grid(8, 8, 8);
  // v = (cos(pi z) cos(pi y) ... ) mean free; |k|^2 = 2 pi^2
  VelocityState u = VelocityState::zeros(g);
  u.v1 = forward_transform(
      PhysicalField::sample(g, [](double, double y, double z) { return std::cos(pi * y) * std::cos(pi * z); }),
      Parity::even);
  const TrajectoryRecord r = run_simulation(config(System::StokesScaled, 8, 1e-2, 0.5, 0.5, 1.0), u);
  EXPECT_NEAR(r.l2.back() / r.l2.front(), std::exp(-2 * pi * pi * 0.5), 1e-13);
}

TEST(Stokes, RejectsVerticalMean) {
  const GridPtr g = make_grid(8, 8, 8);
  EXPECT_THROW(Solver(config(System::StokesScaled, 8, 1e-3, 0.1), bandlimited_random(g, 1)), CompatibilityError);
}

TEST(Stokes, L4H32ScaledByQuarterPowerIsBounded) {
  const GridPtr g = make_grid(16, 16, 16);
  VelocityState u0 = bandlimited_random(g, 42);
  const SplitState sp = barotropic_split(u0);
  u0.v1 = sp.vtilde.v1;
  u0.v2 = sp.vtilde.v2;
  std::vector<double> scaled;
  for (double delta : {4.0, 16.0, 64.0, 256.0}) {
    SimConfig c = config(System::StokesScaled, 16, 1e-3, 0.25, 0.5, delta);
    NormAccumulator acc(NormKind::L4H32);
    run_simulation(c, u0, [&](Solver& s) { acc.accumulate(s.state()); });
    scaled.push_back(acc.finalize() * std::pow(delta, 0.25));
  }
  for (double v : scaled) EXPECT_LE(v, 2.0 * scaled.front());
}

TEST(RunSimulation, StokesNormHistory) {
  const GridPtr g = make_grid(8, 8, 8);
  const double delta = 0.7;
  SimConfig c = config(System::StokesScaled, 8, 1e-3, 1.0, 0.5, delta);
  c.record_every = 100;
  const TrajectoryRecord r = run_simulation(c, heat_mode(g));
  ASSERT_EQ(r.times.size(), 11u);
  for (std::size_t i = 0; i < r.times.size(); ++i)
    EXPECT_NEAR(r.l2[i] / r.l2[0], std::exp(-delta * pi * pi * r.times[i]), 1e-12);
}

TEST(RunSimulation, HugeStepNeverRecordsNaN) {
  const GridPtr g = make_grid(16, 16, 16);
  VelocityState u0 = bandlimited_random(g, 5);
  scale_inplace(u0, 50.0);
  SimConfig c = config(System::NS_eps_delta, 16, 10.0, 100.0, 0.5, 0.0);
  const TrajectoryRecord r = run_simulation(c, u0);
  for (double v : r.l2) EXPECT_TRUE(std::isfinite(v));
  EXPECT_TRUE(r.cfl_warned);
  if (r.blowup_flag) { EXPECT_GT(r.blowup_time, 0.0); }
}

TEST(RunSimulation, EnergyBalanceHolds) {
  const GridPtr g = make_grid(16, 16, 16);
  for (System sys : {System::NS_eps_delta, System::PE_delta, System::PE_H}) {
    run_simulation(config(sys, 16, 1e-3, 0.01, 0.3, 0.4), bandlimited_random(g, 77),
                   [](Solver& s) { EXPECT_LT(s.energy_balance_residual(), 1e-9); });
  }
}

TEST(RunSimulation, DefaultInitialStates) {
  SimConfig c = config(System::NS2D, 16, 1e-3, 0.002);
  const TrajectoryRecord r = run_simulation(c);
  EXPECT_EQ(r.final_state.grid().nz(), 4);
  c = config(System::StokesScaled, 16, 1e-3, 0.002);
  EXPECT_NO_THROW(run_simulation(c));
}
