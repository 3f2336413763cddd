#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hydrostat/errors.hpp"
#include "hydrostat/fields.hpp"
#include "hydrostat/norms.hpp"

namespace hydrostat {

inline const std::vector<std::string>& initial_data_recipes() {
  static const std::vector<std::string> names{"bandlimited_random", "heat_mode", "taylor_green_3d", "taylor_green_2d"};
  return names;
}

namespace detail {

inline SpectralField random_bandlimited_component(const GridPtr& grid, std::mt19937_64& rng) {
  const Grid& g = *grid;
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField f(grid, Parity::none);
  for_each_mode(g, [&](std::size_t i, double kx, double ky, double kz, int jx, int jy, int jz) {
    // draw for every mode so the stream does not depend on the band limit
    const double re = normal(rng), im = normal(rng);
    const bool in_band = 4 * std::abs(g.mode(Axis::x, jx)) <= g.nx() && 4 * std::abs(g.mode(Axis::y, jy)) <= g.ny() &&
                         4 * std::abs(g.mode(Axis::z, jz)) <= g.nz();
    if (!in_band) return;
    const double decay = std::pow(1.0 + kx * kx + ky * ky + kz * kz, -2.0);
    f[i] = Complex(re, im) * decay;
  });
  // real field: average each coefficient with the conjugate of its mirror
  SpectralField sym = f;
  for (int jx = 0; jx < g.nx(); ++jx)
    for (int jy = 0; jy < g.ny(); ++jy)
      for (int jz = 0; jz < g.nz(); ++jz) {
        const Complex a = f[g.index(jx, jy, jz)];
        const Complex b = f[g.index(g.mirror(Axis::x, jx), g.mirror(Axis::y, jy), g.mirror(Axis::z, jz))];
        sym[g.index(jx, jy, jz)] = 0.5 * (a + std::conj(b));
      }
  sym.set_mode(0, 0, 0, 0.0);
  return enforce_parity(sym, Parity::even);
}

}  // namespace detail

/// Band-limited random hydrostatic data with unit H^1 norm of (v, w(v)).
/// `baroclinic_scale` multiplies the z-dependent part after normalisation.
inline VelocityState bandlimited_random(const GridPtr& grid, std::uint64_t seed, double baroclinic_scale = 1.0) {
  std::mt19937_64 rng(seed);
  HorizontalPair v{detail::random_bandlimited_component(grid, rng), detail::random_bandlimited_component(grid, rng)};
  v = project_hydrostatic(v);
  VelocityState u{v.v1, v.v2, vertical_velocity_from_v(v), System::NS_eps_delta, 0.0};
  const double h1 = state_sobolev(u, 1.0);
  scale_inplace(u, 1.0 / h1);
  if (baroclinic_scale != 1.0) {
    const SplitState s = barotropic_split(u);
    u.v1 = s.vbar.v1 + baroclinic_scale * s.vtilde.v1;
    u.v2 = s.vbar.v2 + baroclinic_scale * s.vtilde.v2;
    u.v1.set_parity(Parity::even);
    u.v2.set_parity(Parity::even);
    u.w *= baroclinic_scale;
  }
  return u;
}

/// v = (cos(pi z), 0), w = 0.
inline VelocityState heat_mode(const GridPtr& grid) {
  VelocityState u = VelocityState::zeros(grid);
  u.v1.set_mode(0, 0, 1, 0.5);
  u.v1.set_mode(0, 0, -1, 0.5);
  return u;
}

/// (sin(pi x) cos(pi y) c(z), -cos(pi x) sin(pi y) c(z), 0) with c = cos(pi z) or 1.
inline VelocityState taylor_green(const GridPtr& grid, bool three_d) {
  VelocityState u = VelocityState::zeros(grid);
  const double amp = three_d ? 0.125 : 0.25;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : three_d ? std::vector<int>{-1, 1} : std::vector<int>{0}) {
        u.v1.set_mode(sx, sy, sz, Complex(0.0, -sx * amp));
        u.v2.set_mode(sx, sy, sz, Complex(0.0, sy * amp));
      }
  return u;
}

inline VelocityState generate_initial_data(const std::string& recipe, std::uint64_t seed, const GridPtr& grid,
                                           double baroclinic_scale = 1.0) {
  if (recipe == "bandlimited_random") return bandlimited_random(grid, seed, baroclinic_scale);
  if (recipe == "heat_mode") return heat_mode(grid);
  if (recipe == "taylor_green_3d") return taylor_green(grid, true);
  if (recipe == "taylor_green_2d") return taylor_green(grid, false);
  throw InvalidParameter("unknown initial-data recipe '" + recipe + "'");
}

}  // namespace hydrostat
