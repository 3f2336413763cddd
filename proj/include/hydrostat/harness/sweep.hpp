#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "hydrostat/errors.hpp"
#include "hydrostat/fields.hpp"
#include "hydrostat/harness/config.hpp"
#include "hydrostat/norms.hpp"
#include "hydrostat/solvers.hpp"

namespace hydrostat {

struct SweepPoint {
  double eps = 0.0;
  double delta = 0.0;
  std::optional<double> gamma;
};

struct SweepRow {
  SweepMode mode = SweepMode::eps_delta_to_zero;
  double eps = 0.0;
  double delta = 0.0;
  std::optional<double> gamma;
  std::string norm_name;
  double value = 0.0;
  bool blowup = false;
  long long wall_ms = 0;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;
};

struct RatePoint {
  double h = 0.0;
  double value = 0.0;
  bool blowup = false;
};

/// Least squares on (log h, log value).
inline RateFit fit_rate(const std::vector<RatePoint>& points, bool drop_blowups = true) {
  std::vector<std::pair<double, double>> xy;
  for (const auto& p : points) {
    if (drop_blowups && p.blowup) continue;
    if (!(p.h > 0.0) || !(p.value > 0.0) || !std::isfinite(p.h) || !std::isfinite(p.value)) continue;
    xy.emplace_back(std::log(p.h), std::log(p.value));
  }
  if (xy.size() < 3) throw InsufficientData("rate fit needs at least three finite positive points");
  const double n = static_cast<double>(xy.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : xy) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx == 0.0) throw InsufficientData("rate fit needs at least two distinct h values");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [x, y] : xy) {
    const double r = y - (fit.intercept + fit.slope * x);
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.points = static_cast<int>(xy.size());
  return fit;
}

/// Norm values of one matched pair of simulations.
struct MatchedPairResult {
  std::vector<std::pair<std::string, double>> norms;
  bool blowup = false;
  double blowup_time = 0.0;
};

namespace detail {

inline double finalize_or_nan(const NormAccumulator& acc) {
  return acc.sample_count() >= 2 ? acc.finalize() : std::numeric_limits<double>::quiet_NaN();
}

inline MatchedPairResult matched_hydrostatic(const SimConfig& base, const SweepPoint& pt) {
  const GridPtr grid = make_grid(base.nx, base.ny, base.nz);
  const VelocityState u0 = generate_initial_data(base.recipe, base.seed, grid, base.baroclinic_scale);

  SimConfig ns = base;
  ns.system = System::NS_eps_delta;
  ns.eps = pt.eps;
  ns.delta = pt.delta;
  ns.gamma.reset();
  SimConfig pe = ns;
  pe.system = System::PE_H;
  pe.delta = 0.0;

  Solver a(ns, u0);
  Solver b(pe, u0);
  NormAccumulator eh = NormAccumulator::EHdelta(pt.delta);
  NormAccumulator eh0 = NormAccumulator::EHdelta(0.0);
  NormAccumulator ez(NormKind::Ez);

  auto record = [&] {
    const VelocityState ta = a.tendency();
    const VelocityState tb = b.tendency();
    VelocityState U = a.state() - b.state();
    U.w *= pt.eps;
    VelocityState dU = ta - tb;
    dU.w *= pt.eps;
    U.time = a.state().time;
    eh.accumulate(U, &dU);
    eh0.accumulate(U, &dU);
    ez.accumulate(U);
  };

  MatchedPairResult res;
  record();
  const long steps = ns.steps();
  try {
    for (long n = 1; n <= steps; ++n) {
      a.step();
      b.step();
      if (n % ns.record_every == 0 || n == steps) record();
    }
  } catch (const BlowupDetected& e) {
    res.blowup = true;
    res.blowup_time = e.time();
  }
  const double vh = finalize_or_nan(eh), vz = finalize_or_nan(ez);
  res.norms = {{"EHdelta", vh}, {"Ez", vz}, {"EH", finalize_or_nan(eh0)}, {"total", vh + vz}};
  return res;
}

inline MatchedPairResult matched_barotropic(const SimConfig& base, const SweepPoint& pt) {
  const GridPtr grid = make_grid(base.nx, base.ny, base.nz);
  const GridPtr plane = make_grid(base.nx, base.ny, 4);
  const VelocityState u0 = generate_initial_data(base.recipe, base.seed, grid, base.baroclinic_scale);
  const SplitState s0 = barotropic_split(u0);

  SimConfig ns = base;
  ns.system = System::NS_eps_delta;
  ns.eps = pt.eps;
  ns.delta = pt.delta;
  ns.gamma.reset();
  SimConfig two_d = ns;
  two_d.system = System::NS2D;
  SimConfig stokes = ns;
  stokes.system = System::StokesScaled;

  VelocityState bar0 = VelocityState::zeros(plane, System::NS2D);
  bar0.v1 = copy_kz0_plane(u0.v1, plane);
  bar0.v2 = copy_kz0_plane(u0.v2, plane);
  VelocityState tilde0 = u0;
  tilde0.v1 = s0.vtilde.v1;
  tilde0.v2 = s0.vtilde.v2;

  Solver full(ns, u0);
  Solver flat(two_d, bar0);
  Solver lin(stokes, tilde0);
  NormAccumulator e1 = NormAccumulator::EHdelta(0.0, /*planar=*/true);
  NormAccumulator l4(NormKind::L4H32);
  NormAccumulator l4s(NormKind::L4H32);

  auto planar = [&](const SpectralField& a1, const SpectralField& a2) {
    VelocityState p = VelocityState::zeros(plane, System::NS2D);
    p.v1 = copy_kz0_plane(a1, plane);
    p.v2 = copy_kz0_plane(a2, plane);
    return p;
  };
  auto record = [&] {
    const double t = full.state().time;
    const VelocityState du = full.tendency();
    const VelocityState d2 = flat.tendency();
    VelocityState V = planar(full.state().v1, full.state().v2) - flat.state();
    VelocityState dV = planar(du.v1, du.v2) - d2;
    V.time = t;
    e1.accumulate(V, &dV);

    const SplitState s = barotropic_split(full.state());
    VelocityState ut = full.state();
    ut.v1 = s.vtilde.v1;
    ut.v2 = s.vtilde.v2;
    l4.accumulate(ut);
    l4s.accumulate(lin.state());
  };

  MatchedPairResult res;
  record();
  const long steps = ns.steps();
  try {
    for (long n = 1; n <= steps; ++n) {
      full.step();
      flat.step();
      lin.step();
      if (n % ns.record_every == 0 || n == steps) record();
    }
  } catch (const BlowupDetected& e) {
    res.blowup = true;
    res.blowup_time = e.time();
  }
  const double vb = finalize_or_nan(e1), vt = finalize_or_nan(l4);
  res.norms = {{"barotropic_E1", vb}, {"baroclinic_L4H32", vt}, {"total", vb + vt}, {"stokes_L4H32", finalize_or_nan(l4s)}};
  return res;
}

}  // namespace detail

/// Simulate one parameter point of a sweep; blowup is recorded, not raised.
inline MatchedPairResult run_matched_pair(const SweepPoint& pt, const SweepConfig& cfg) {
  if (!(pt.eps > 0.0)) throw InvalidParameter("eps must be > 0");
  if (!(pt.delta >= 0.0)) throw InvalidParameter("delta must be >= 0");
  switch (cfg.mode) {
    case SweepMode::eps_delta_to_zero:
    case SweepMode::gamma_scan: return detail::matched_hydrostatic(cfg.sim, pt);
    case SweepMode::delta_to_infty: return detail::matched_barotropic(cfg.sim, pt);
  }
  throw InvalidParameter("unknown sweep mode");
}

inline std::vector<SweepPoint> sweep_points(const SweepConfig& cfg) {
  std::vector<SweepPoint> pts;
  switch (cfg.mode) {
    case SweepMode::eps_delta_to_zero:
      for (std::size_t i = 0; i < cfg.eps_values.size(); ++i)
        pts.push_back({cfg.eps_values[i], cfg.delta_values.empty() ? cfg.eps_values[i] : cfg.delta_values[i], {}});
      break;
    case SweepMode::delta_to_infty:
      for (double e : cfg.eps_values)
        for (double d : cfg.delta_values) pts.push_back({e, d, {}});
      break;
    case SweepMode::gamma_scan:
      for (double g : cfg.gamma_values)
        for (double e : cfg.eps_values) pts.push_back({e, std::pow(e, g - 2.0), g});
      break;
  }
  return pts;
}

/// Rate variable of a point: eps + delta, delta, or eps by mode.
inline double rate_variable(SweepMode mode, const SweepRow& r) {
  switch (mode) {
    case SweepMode::eps_delta_to_zero: return r.eps + r.delta;
    case SweepMode::delta_to_infty: return r.delta;
    case SweepMode::gamma_scan: return r.eps;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

struct FitGroup {
  std::string norm_name;
  std::optional<double> gamma;  // gamma_scan
  std::optional<double> eps;    // delta_to_infty
  std::optional<RateFit> fit;
};

struct SweepResult {
  SweepMode mode = SweepMode::eps_delta_to_zero;
  std::vector<SweepRow> rows;
  std::vector<FitGroup> fits;
  /// Smallest rate variable at which a blowup was observed.
  std::optional<double> blowup_threshold;

  std::vector<SweepRow> rows_for(const std::string& norm, std::optional<double> gamma = {},
                                 std::optional<double> eps = {}) const {
    std::vector<SweepRow> out;
    for (const auto& r : rows)
      if (r.norm_name == norm && (!gamma || r.gamma == gamma) && (!eps || r.eps == *eps)) out.push_back(r);
    return out;
  }

  const FitGroup* fit_for(const std::string& norm, std::optional<double> gamma = {},
                          std::optional<double> eps = {}) const {
    for (const auto& f : fits)
      if (f.norm_name == norm && f.gamma == gamma && f.eps == eps) return &f;
    return nullptr;
  }
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "mode,eps,delta,gamma,norm_name,value,blowup,wall_ms\n";
  for (const auto& r : rows) {
    os << to_string(r.mode) << ',' << format_double(r.eps) << ',' << format_double(r.delta) << ','
       << (r.gamma ? format_double(*r.gamma) : std::string()) << ',' << r.norm_name << ',' << format_double(r.value)
       << ',' << (r.blowup ? 1 : 0) << ',' << r.wall_ms << '\n';
  }
  return os.str();
}

inline std::vector<SweepRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "mode,eps,delta,gamma,norm_name,value,blowup,wall_ms")
    throw FormatError("unexpected CSV header", 0);
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    if (line.back() == ',') cols.emplace_back();
    if (cols.size() != 8) throw FormatError("CSV row has " + std::to_string(cols.size()) + " columns", 0);
    SweepRow r;
    r.mode = sweep_mode_from_string(cols[0]);
    r.eps = std::stod(cols[1]);
    r.delta = std::stod(cols[2]);
    if (!cols[3].empty()) r.gamma = std::stod(cols[3]);
    r.norm_name = cols[4];
    r.value = cols[5] == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(cols[5]);
    r.blowup = cols[6] == "1";
    r.wall_ms = std::stoll(cols[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Fit every (norm, gamma or eps) group that has at least three usable points.
inline std::vector<FitGroup> fit_groups(SweepMode mode, const std::vector<SweepRow>& rows) {
  std::map<std::tuple<std::string, double, double>, std::vector<RatePoint>> groups;
  for (const auto& r : rows) {
    if (r.norm_name == "FAILED") continue;
    const double g = mode == SweepMode::gamma_scan && r.gamma ? *r.gamma : 0.0;
    const double e = mode == SweepMode::delta_to_infty ? r.eps : 0.0;
    groups[{r.norm_name, g, e}].push_back({rate_variable(mode, r), r.value, r.blowup});
  }
  std::vector<FitGroup> out;
  for (const auto& [key, pts] : groups) {
    FitGroup fg;
    fg.norm_name = std::get<0>(key);
    if (mode == SweepMode::gamma_scan) fg.gamma = std::get<1>(key);
    if (mode == SweepMode::delta_to_infty) fg.eps = std::get<2>(key);
    try {
      fg.fit = fit_rate(pts, true);
    } catch (const InsufficientData&) {
    }
    out.push_back(std::move(fg));
  }
  return out;
}

/// Run every point (in parallel when cfg.threads > 1) and assemble rows
/// sorted by (eps, delta, norm_name).
inline SweepResult run_sweep(const SweepConfig& cfg) {
  cfg.validate_sweep();
  const std::vector<SweepPoint> pts = sweep_points(cfg);
  std::vector<std::vector<SweepRow>> per_point(pts.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < pts.size(); i = next++) {
      const SweepPoint& p = pts[i];
      const auto t0 = std::chrono::steady_clock::now();
      std::vector<SweepRow> rows;
      try {
        const MatchedPairResult r = run_matched_pair(p, cfg);
        const auto t1 = std::chrono::steady_clock::now();
        const long long ms =
            cfg.record_timing ? std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count() : 0;
        for (const auto& [name, value] : r.norms) rows.push_back({cfg.mode, p.eps, p.delta, p.gamma, name, value, r.blowup, ms});
      } catch (const std::exception&) {
        rows.push_back({cfg.mode, p.eps, p.delta, p.gamma, "FAILED", std::numeric_limits<double>::quiet_NaN(), false, 0});
      }
      per_point[i] = std::move(rows);
    }
  };
  const int nthreads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(pts.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SweepResult res;
  res.mode = cfg.mode;
  for (auto& rows : per_point)
    for (auto& r : rows) res.rows.push_back(std::move(r));
  std::stable_sort(res.rows.begin(), res.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.eps, a.delta, a.norm_name) < std::tie(b.eps, b.delta, b.norm_name);
  });
  for (const auto& r : res.rows)
    if (r.blowup) {
      const double h = rate_variable(cfg.mode, r);
      res.blowup_threshold = res.blowup_threshold ? std::min(*res.blowup_threshold, h) : h;
    }
  res.fits = fit_groups(cfg.mode, res.rows);
  return res;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

/// Log-log polyline chart of value against the rate variable, one line per norm.
inline std::string render_svg(const SweepResult& res) {
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  for (const auto& r : res.rows) {
    if (r.norm_name == "FAILED" || !(r.value > 0.0) || !std::isfinite(r.value)) continue;
    std::string key = r.norm_name;
    if (r.gamma) key += " gamma=" + format_double(*r.gamma);
    if (res.mode == SweepMode::delta_to_infty) key += " eps=" + format_double(r.eps);
    series[key].emplace_back(std::log10(rate_variable(res.mode, r)), std::log10(r.value));
  }
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& [k, pts] : series)
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  if (series.empty()) x0 = y0 = 0.0, x1 = y1 = 1.0;
  if (x1 - x0 < 1e-12) x1 = x0 + 1.0;
  if (y1 - y0 < 1e-12) y1 = y0 + 1.0;
  const double W = 640, H = 480, m = 60;
  auto px = [&](double x) { return m + (x - x0) / (x1 - x0) * (W - 2 * m); };
  auto py = [&](double y) { return H - m - (y - y0) / (y1 - y0) * (H - 2 * m); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << W - 2 * m << "\" height=\"" << H - 2 * m
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">log10 h</text>\n";
  os << "<text x=\"15\" y=\"" << H / 2 << "\" transform=\"rotate(-90 15 " << H / 2
     << ")\" text-anchor=\"middle\">log10 norm</text>\n";
  int c = 0;
  for (auto& [name, pts] : series) {
    std::sort(pts.begin(), pts.end());
    const char* col = colors[c % 7];
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" points=\"";
    for (const auto& [x, y] : pts) os << px(x) << ',' << py(y) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << m + 10 << "\" y=\"" << m + 18 + 16 * c << "\" fill=\"" << col << "\">" << name << "</text>\n";
    ++c;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace hydrostat
