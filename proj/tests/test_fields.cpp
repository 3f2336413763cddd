#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hydrostat/fields.hpp"
#include "hydrostat/harness/initial_data.hpp"

using namespace hydrostat;

namespace {

constexpr double pi = std::numbers::pi;

SpectralField sample(const GridPtr& g, auto f, Parity p = Parity::none) {
  return forward_transform(PhysicalField::sample(g, f), p);
}

double max_diff(const SpectralField& a, const SpectralField& b) { return (a - b).max_abs(); }

SpectralField divergence_scaled(const VelocityState& u) {
  return spectral_derivative(u.v1, Axis::x) + spectral_derivative(u.v2, Axis::y) + spectral_derivative(u.w, Axis::z);
}

}  // namespace

TEST(ProjectScaled, AnnihilatesScaledGradient) {
  const GridPtr g = make_grid(8, 8, 8);
  const double eps = 0.3;
  const SpectralField phi = sample(g, [](double x, double y, double z) {
    return std::sin(pi * x) * std::cos(pi * y) * std::sin(2 * pi * z) + std::cos(pi * (x + z));
  });
  VelocityState u = VelocityState::zeros(g);
  u.v1 = dealias(spectral_derivative(phi, Axis::x));
  u.v2 = dealias(spectral_derivative(phi, Axis::y));
  u.w = dealias(spectral_derivative(phi, Axis::z) * (1.0 / eps));
  const VelocityState p = project_div_free_scaled(u, eps);
  EXPECT_LT(std::max({p.v1.max_abs(), p.v2.max_abs(), p.w.max_abs()}), 1e-12);
}

TEST(ProjectScaled, Idempotent) {
  const GridPtr g = make_grid(8, 8, 8);
  VelocityState u = bandlimited_random(g, 4);
  const VelocityState p1 = project_div_free_scaled(u, 0.5);
  const VelocityState p2 = project_div_free_scaled(p1, 0.5);
  EXPECT_LT(std::max({max_diff(p1.v1, p2.v1), max_diff(p1.v2, p2.v2), max_diff(p1.w, p2.w)}), 1e-12);
}

TEST(ProjectScaled, SingleMode) {
  const GridPtr g = make_grid(8, 8, 8);
  VelocityState u = VelocityState::zeros(g);
  u.v1.set_mode(1, 0, 1, 1.0);
  const VelocityState p = project_div_free_scaled(u, 1.0);
  EXPECT_NEAR(p.v1.mode(1, 0, 1).real(), 0.5, 1e-14);
  EXPECT_NEAR(std::abs(p.v2.mode(1, 0, 1)), 0.0, 1e-14);
  EXPECT_NEAR(p.w.mode(1, 0, 1).real(), -0.5, 1e-14);
}

TEST(ProjectUnscaled, RemovesDivergence) {
  const GridPtr g = make_grid(8, 8, 8);
  VelocityState u = bandlimited_random(g, 9);
  u.w = u.w + sample(g, [](double x, double, double z) { return std::cos(pi * x) * std::sin(pi * z); }, Parity::odd);
  project_div_free_unscaled_inplace(u, 0.25);
  EXPECT_LT(divergence_scaled(u).max_abs(), 1e-12);
}

TEST(ProjectHydrostatic, GradientAnnihilated) {
  const GridPtr g = make_grid(8, 8, 8);
  const SpectralField phi = sample(g, [](double x, double y, double) { return std::sin(pi * x) * std::cos(2 * pi * y); });
  const HorizontalPair f{spectral_derivative(phi, Axis::x), spectral_derivative(phi, Axis::y)};
  const HorizontalPair p = project_hydrostatic(f);
  EXPECT_LT(std::max(p.v1.max_abs(), p.v2.max_abs()), 1e-12);
}

TEST(ProjectHydrostatic, SineXAnnihilated) {
  const GridPtr g = make_grid(8, 8, 8);
  const HorizontalPair f{sample(g, [](double x, double, double) { return std::sin(pi * x); }), SpectralField(g)};
  const HorizontalPair p = project_hydrostatic(f);
  EXPECT_LT(std::max(p.v1.max_abs(), p.v2.max_abs()), 1e-14);
}

TEST(ProjectHydrostatic, IdempotentOnRange) {
  const GridPtr g = make_grid(8, 8, 8);
  // z-dependent part untouched, mean part solenoidal
  const HorizontalPair f{
      sample(g, [](double x, double y, double z) { return std::sin(pi * y) + std::cos(pi * x) * std::cos(pi * z); }),
      sample(g, [](double x, double, double) { return std::cos(pi * x); })};
  const HorizontalPair p = project_hydrostatic(f);
  EXPECT_LT(std::max(max_diff(p.v1, f.v1), max_diff(p.v2, f.v2)), 1e-14);
}

TEST(VerticalVelocity, AnalyticAntiderivative) {
  const GridPtr g = make_grid(8, 8, 8);
  const HorizontalPair v{
      sample(g, [](double x, double, double z) { return std::sin(pi * x) * std::cos(pi * z); }, Parity::even),
      SpectralField(g, Parity::even)};
  const SpectralField w = vertical_velocity_from_v(v);
  const SpectralField ref = sample(g, [](double x, double, double z) { return -std::cos(pi * x) * std::sin(pi * z); });
  EXPECT_LT(max_diff(w, ref), 1e-14);
  EXPECT_EQ(w.parity(), Parity::odd);
}

TEST(VerticalVelocity, ZeroForSolenoidalV) {
  const GridPtr g = make_grid(8, 8, 8);
  const HorizontalPair v{sample(g, [](double, double y, double z) { return std::sin(pi * y) * std::cos(pi * z); }),
                         sample(g, [](double x, double, double z) { return std::cos(pi * x) * std::cos(pi * z); })};
  EXPECT_LT(vertical_velocity_from_v(v).max_abs(), 1e-15);
}

TEST(VerticalVelocity, DefiningRelation) {
  const GridPtr g = make_grid(12, 12, 12);
  const VelocityState u = bandlimited_random(g, 17);
  const SpectralField w = vertical_velocity_from_v(u.horizontal());
  const SpectralField r = spectral_derivative(w, Axis::z) + spectral_derivative(u.v1, Axis::x) +
                          spectral_derivative(u.v2, Axis::y);
  EXPECT_LT(r.max_abs(), 1e-12);
}

TEST(VerticalVelocity, IncompatibleMeanThrows) {
  const GridPtr g = make_grid(8, 8, 8);
  const HorizontalPair v{sample(g, [](double x, double, double) { return std::sin(pi * x); }), SpectralField(g)};
  EXPECT_THROW(vertical_velocity_from_v(v), CompatibilityError);
}

TEST(BarotropicSplit, Cases) {
  const GridPtr g = make_grid(8, 8, 8);
  const HorizontalPair flat{sample(g, [](double x, double y, double) { return std::sin(pi * x + pi * y); }),
                            sample(g, [](double x, double, double) { return std::cos(pi * x); })};
  SplitState s = barotropic_split(flat);
  EXPECT_LT(max_diff(s.vbar.v1, flat.v1), 1e-15);
  EXPECT_LT(s.vtilde.v1.max_abs() + s.vtilde.v2.max_abs(), 1e-15);

  const HorizontalPair wavy{sample(g, [](double x, double, double z) { return std::sin(pi * x) * std::cos(pi * z); }),
                            SpectralField(g)};
  s = barotropic_split(wavy);
  EXPECT_LT(s.vbar.v1.max_abs(), 1e-15);

  const VelocityState u = bandlimited_random(g, 2);
  s = barotropic_split(u.horizontal());
  EXPECT_EQ(max_diff(s.vbar.v1 + s.vtilde.v1, u.v1), 0.0);
  EXPECT_EQ(max_diff(s.vbar.v2 + s.vtilde.v2, u.v2), 0.0);
}

TEST(DiffForcing, VanishingDifference) {
  const GridPtr g = make_grid(12, 12, 12);
  const double eps = 0.4;
  const VelocityState lim = bandlimited_random(g, 5);
  const SpectralField dwdt = vertical_velocity_from_v(
      HorizontalPair{laplacian_delta(lim.v1, 0.0), laplacian_delta(lim.v2, 0.0)});
  const VelocityState zero = VelocityState::zeros(g);
  const DiffForcing F = diff_rhs_F(lim, dwdt, zero, eps, 0.0);
  EXPECT_LT(std::max(F.FH.v1.max_abs(), F.FH.v2.max_abs()), 1e-15);
  // -eps (d_t w + u.grad w - Delta_0 w), assembled here from spectral pieces
  const Advector adv(lim);
  const SpectralField ref =
      enforce_parity((dwdt + adv.apply(lim.w) - laplacian_delta(lim.w, 0.0)) * (-eps), Parity::odd);
  EXPECT_LT(max_diff(F.Fz, ref), 1e-13);
}

TEST(DiffForcing, PureSelfAdvection) {
  const GridPtr g = make_grid(12, 12, 12);
  const VelocityState zero = VelocityState::zeros(g);
  const VelocityState D = bandlimited_random(g, 8);  // W = eps w(V) with eps = 1
  const DiffForcing F = diff_rhs_F(zero, SpectralField(g, Parity::odd), D, 1.0, 0.0);
  // -(V, W).grad V evaluated pointwise on the grid, then dealiased
  const PhysicalField a[3] = {inverse_transform(D.v1), inverse_transform(D.v2), inverse_transform(D.w)};
  const Axis ax[3] = {Axis::x, Axis::y, Axis::z};
  const SpectralField* V[2] = {&D.v1, &D.v2};
  for (int i = 0; i < 2; ++i) {
    PhysicalField acc(g);
    for (int j = 0; j < 3; ++j) {
      const PhysicalField d = inverse_transform(spectral_derivative(*V[i], ax[j]));
      for (std::size_t p = 0; p < g->size(); ++p) acc.values()[p] -= a[j].values()[p] * d.values()[p];
    }
    const SpectralField ref = enforce_parity(dealias(forward_transform(acc)), Parity::even);
    const SpectralField& got = i == 0 ? F.FH.v1 : F.FH.v2;
    EXPECT_LT(max_diff(got, ref), 1e-13);
  }
}

TEST(DiffForcing, AdvectiveAndDivergenceFormsAgree) {
  const GridPtr g = make_grid(16, 16, 16);
  const double eps = 0.3, delta = 0.2;
  const VelocityState lim = bandlimited_random(g, 31);
  VelocityState D = bandlimited_random(g, 32);
  scale_inplace(D, 0.7);
  D.w = D.w * eps;
  const SpectralField dwdt = vertical_velocity_from_v(
      HorizontalPair{laplacian_delta(lim.v1, 1.0), laplacian_delta(lim.v2, 1.0)});
  const DiffForcing a = diff_rhs_F(lim, dwdt, D, eps, delta);
  const DiffForcing b = diff_rhs_F_divform(lim, dwdt, D, eps, delta);
  EXPECT_LT(max_diff(a.FH.v1, b.FH.v1), 1e-10);
  EXPECT_LT(max_diff(a.FH.v2, b.FH.v2), 1e-10);
  EXPECT_LT(max_diff(a.Fz, b.Fz), 1e-10);
}

TEST(Baroclinic, ZeroBaroclinicPart) {
  const GridPtr g = make_grid(8, 8, 8);
  const VelocityState u = bandlimited_random(g, 1);
  const SplitState s = barotropic_split(u);
  const BaroclinicForcing F = baroclinic_rhs(s.vbar, VelocityState::zeros(g));
  EXPECT_LT(std::max({F.Fbar.v1.max_abs(), F.Ftilde1.v1.max_abs(), F.Ftilde1.v2.max_abs(), F.Ftilde2.max_abs()}), 1e-15);
}

TEST(Baroclinic, ZeroBarotropicPart) {
  const GridPtr g = make_grid(12, 12, 12);
  const VelocityState u = bandlimited_random(g, 6);
  const SplitState s = barotropic_split(u);
  VelocityState ut = VelocityState::zeros(g);
  ut.v1 = s.vtilde.v1;
  ut.v2 = s.vtilde.v2;
  ut.w = vertical_velocity_from_v(s.vtilde);
  const BaroclinicForcing F = baroclinic_rhs(HorizontalPair{SpectralField(g, Parity::even), SpectralField(g, Parity::even)}, ut);
  const Advector adv(ut);
  const SpectralField a1 = adv.apply(ut.v1);
  const SpectralField m1 = vertical_mean(a1);
  EXPECT_LT(max_diff(F.Fbar.v1, -m1), 1e-14);
  EXPECT_LT(max_diff(F.Ftilde1.v1, -a1 + m1), 1e-14);
}

TEST(Baroclinic, TildeForcingHasZeroMean) {
  const GridPtr g = make_grid(12, 12, 12);
  const VelocityState u = bandlimited_random(g, 12);
  const SplitState s = barotropic_split(u);
  VelocityState ut = VelocityState::zeros(g);
  ut.v1 = s.vtilde.v1;
  ut.v2 = s.vtilde.v2;
  ut.w = u.w;
  const BaroclinicForcing F = baroclinic_rhs(s.vbar, ut);
  // trapezoid in z on the collocation grid integrates band-limited fields exactly
  for (const SpectralField* f : {&F.Ftilde1.v1, &F.Ftilde1.v2}) {
    const PhysicalField p = inverse_transform(*f);
    double worst = 0.0;
    for (int ix = 0; ix < g->nx(); ++ix)
      for (int iy = 0; iy < g->ny(); ++iy) {
        double sum = 0.0;
        for (int iz = 0; iz < g->nz(); ++iz) sum += p.values()[g->index(ix, iy, iz)];
        worst = std::max(worst, std::abs(sum * 2.0 / g->nz()));
      }
    EXPECT_LT(worst, 1e-12);
  }
}

TEST(Baroclinic, RejectsMeanInTilde) {
  const GridPtr g = make_grid(8, 8, 8);
  const VelocityState u = bandlimited_random(g, 3);
  const SplitState s = barotropic_split(u);
  EXPECT_THROW(baroclinic_rhs(s.vbar, u), CompatibilityError);
}

TEST(Advector, PreservesParity) {
  const GridPtr g = make_grid(8, 8, 8);
  const VelocityState u = bandlimited_random(g, 14);
  const Advector a(u);
  EXPECT_EQ(a.apply(u.v1).parity(), Parity::even);
  EXPECT_EQ(a.apply(u.w).parity(), Parity::odd);
  EXPECT_LT(parity_defect(a.apply(u.v1)), 1e-15);
}
