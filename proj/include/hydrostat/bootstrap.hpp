#pragma once

// Sampled verification of quadratic-inequality bootstrap arguments.
//
// A continuous X cannot jump from the lower to the upper root of the
// quadratic; on samples we replace that argument by requiring every sample to
// sit below the lower root (up to the declared continuity tolerance).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hydrostat/errors.hpp"

namespace hydrostat {

struct SampledFunction {
  std::vector<double> ts;
  std::vector<double> xs;
  double continuity_tolerance = 0.0;

  SampledFunction() = default;
  SampledFunction(std::vector<double> t, std::vector<double> x, double tol = 0.0)
      : ts(std::move(t)), xs(std::move(x)), continuity_tolerance(tol) {
    validate();
  }

  void validate() const {
    if (ts.size() != xs.size()) throw ShapeError("sampled function: ts and xs differ in length");
    if (ts.size() < 2) throw InsufficientData("sampled function needs at least two samples");
    for (std::size_t i = 1; i < ts.size(); ++i)
      if (!(ts[i] > ts[i - 1])) throw OrderingError("sampled function: times must be strictly increasing");
    for (double x : xs)
      if (!std::isfinite(x)) throw InvalidParameter("sampled function: non-finite value");
    if (!(continuity_tolerance >= 0.0)) throw InvalidParameter("continuity tolerance must be >= 0");
  }

  double front() const { return xs.front(); }
  double max() const { return *std::max_element(xs.begin(), xs.end()); }

  /// Piecewise-linear interpolant, clamped outside the sample range.
  double operator()(double t) const {
    if (t <= ts.front()) return xs.front();
    if (t >= ts.back()) return xs.back();
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - ts.begin());
    const double a = ts[j - 1], b = ts[j];
    const double s = (t - a) / (b - a);
    return xs[j - 1] + s * (xs[j] - xs[j - 1]);
  }

  bool nondecreasing(double tol = 0.0) const {
    for (std::size_t i = 1; i < xs.size(); ++i)
      if (xs[i] < xs[i - 1] - tol) return false;
    return true;
  }

  bool nonincreasing(double tol = 0.0) const {
    for (std::size_t i = 1; i < xs.size(); ++i)
      if (xs[i] > xs[i - 1] + tol) return false;
    return true;
  }
};

enum class Verdict { CERTIFIED, HYPOTHESIS_FAILED, THRESHOLD_VIOLATED };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::CERTIFIED: return "CERTIFIED";
    case Verdict::HYPOTHESIS_FAILED: return "HYPOTHESIS_FAILED";
    case Verdict::THRESHOLD_VIOLATED: return "THRESHOLD_VIOLATED";
  }
  return "UNKNOWN";
}

struct BootstrapCertificate {
  Verdict verdict = Verdict::CERTIFIED;
  std::optional<std::size_t> failed_sample;  // HYPOTHESIS_FAILED only
  std::string which;                         // failed condition
  double concluded_bound = std::numeric_limits<double>::quiet_NaN();
  std::map<std::string, double> thresholds;
  std::string caveat;

  bool certified() const { return verdict == Verdict::CERTIFIED; }

  std::string describe() const {
    std::ostringstream os;
    os << to_string(verdict);
    if (!which.empty()) os << "(" << which << ")";
    if (failed_sample) os << " at sample " << *failed_sample;
    return os.str();
  }
};

namespace detail {

/// Smaller root of a x^2 - b x + c with a, b, c > 0 and b^2 > 4ac, in the
/// cancellation-free form 2c / (b + sqrt(b^2 - 4ac)).
inline double lower_root(double a, double b, double c) { return 2.0 * c / (b + std::sqrt(b * b - 4.0 * a * c)); }

inline BootstrapCertificate threshold_violation(std::string which, std::map<std::string, double> thresholds) {
  BootstrapCertificate cert;
  cert.verdict = Verdict::THRESHOLD_VIOLATED;
  cert.which = std::move(which);
  cert.thresholds = std::move(thresholds);
  return cert;
}

inline BootstrapCertificate hypothesis_failure(std::size_t i, std::string which, std::map<std::string, double> thresholds) {
  BootstrapCertificate cert;
  cert.verdict = Verdict::HYPOTHESIS_FAILED;
  cert.failed_sample = i;
  cert.which = std::move(which);
  cert.thresholds = std::move(thresholds);
  return cert;
}

inline void assert_sound(const SampledFunction& X, const BootstrapCertificate& cert) {
  if (cert.certified() && !(X.max() <= cert.concluded_bound + X.continuity_tolerance))
    throw std::logic_error("bootstrap certificate is unsound: max(X) exceeds the concluded bound");
}

}  // namespace detail

/// X <= C X^2 + X/2 + eps on [a, b), X(a) <= 1/(4C), 0 < eps < 1/(16C)
/// gives sup X <= 4 eps.
inline BootstrapCertificate check_lemma_71(const SampledFunction& X, double C, double eps) {
  X.validate();
  std::map<std::string, double> th{{"C", C}, {"eps", eps}};
  if (!(C > 0.0)) return detail::threshold_violation("C > 0", th);
  th["eps_max"] = 1.0 / (16.0 * C);
  th["X_a_max"] = 1.0 / (4.0 * C);
  if (!(eps > 0.0) || !(eps < th["eps_max"])) return detail::threshold_violation("eps < 1/(16C)", th);
  if (!(X.front() <= th["X_a_max"])) return detail::threshold_violation("X(a) <= 1/(4C)", th);

  const double root = detail::lower_root(C, 0.5, eps);
  th["lower_root"] = root;
  for (std::size_t i = 0; i < X.xs.size(); ++i) {
    const double x = X.xs[i];
    if (!(x <= C * x * x + 0.5 * x + eps)) return detail::hypothesis_failure(i, "quadratic inequality", th);
  }
  for (std::size_t i = 0; i < X.xs.size(); ++i)
    if (!(X.xs[i] <= root + X.continuity_tolerance)) return detail::hypothesis_failure(i, "continuity", th);

  BootstrapCertificate cert;
  cert.concluded_bound = 4.0 * eps;
  cert.thresholds = std::move(th);
  detail::assert_sound(X, cert);
  return cert;
}

/// X <= (C X^2 + X/4 + eps) e^{K X} on [a, b) with
/// 0 < eps < min{1/(64C), ln(3/2)/(8K)} and X(a) <= min{1/(8C), ln(3/2)/K}
/// gives sup X <= 8 eps.
inline BootstrapCertificate check_lemma_72(const SampledFunction& X, double C, double K, double eps) {
  X.validate();
  std::map<std::string, double> th{{"C", C}, {"K", K}, {"eps", eps}};
  if (!(C > 0.0)) return detail::threshold_violation("C > 0", th);
  if (!(K > 0.0)) return detail::threshold_violation("K > 0", th);
  const double ln32 = std::log(1.5);
  th["eps_max"] = std::min(1.0 / (64.0 * C), ln32 / (8.0 * K));
  th["X_a_max"] = std::min(1.0 / (8.0 * C), ln32 / K);
  th["barrier"] = std::log(2.0) / K;
  if (!(eps > 0.0) || !(eps < th["eps_max"]))
    return detail::threshold_violation("eps < min{1/(64C), ln(3/2)/(8K)}", th);
  if (!(X.front() <= th["X_a_max"])) return detail::threshold_violation("X(a) <= min{1/(8C), ln(3/2)/K}", th);

  for (std::size_t i = 0; i < X.xs.size(); ++i) {
    const double x = X.xs[i];
    if (!(x <= (C * x * x + 0.25 * x + eps) * std::exp(K * x)))
      return detail::hypothesis_failure(i, "exponential quadratic inequality", th);
  }
  for (std::size_t i = 0; i < X.xs.size(); ++i)
    if (!(X.xs[i] < th["barrier"])) return detail::hypothesis_failure(i, "barrier ln(2)/K", th);

  // below the barrier e^{KX} <= 2, so X <= 2C X^2 + X/2 + 2 eps
  const double root = detail::lower_root(2.0 * C, 0.5, 2.0 * eps);
  th["lower_root"] = root;
  for (std::size_t i = 0; i < X.xs.size(); ++i)
    if (!(X.xs[i] <= root + X.continuity_tolerance)) return detail::hypothesis_failure(i, "continuity", th);

  BootstrapCertificate cert;
  cert.concluded_bound = 8.0 * eps;
  cert.thresholds = std::move(th);
  detail::assert_sound(X, cert);
  return cert;
}

struct BudgetFunctions {
  SampledFunction G1, G2, G3;  // increasing
  SampledFunction f;           // decreasing
  double k = 1.0, K = 1.0;

  void validate() const {
    for (const SampledFunction* G : {&G1, &G2, &G3}) {
      G->validate();
      if (!G->nondecreasing()) throw InvalidParameter("budget functions G_i must be increasing");
    }
    f.validate();
    if (!f.nonincreasing()) throw InvalidParameter("budget function f must be decreasing");
    if (!(k > 0.0) || !(K > 0.0)) throw InvalidParameter("k and K must be positive");
  }
};

struct Schedule {
  double T_star = 0.0;
  int N = 0;
  std::vector<double> T_n;  // T_1, ..., T_N
};

namespace detail {

inline bool within(double value, double bound) { return value <= bound * (1.0 + 1e-12) + 1e-300; }

inline bool budget_step_feasible(const BudgetFunctions& b, double h, double T) {
  const double span = T - h;
  if (span < 0.0) return false;
  std::vector<double> points{0.0, span};
  for (const SampledFunction* G : {&b.G1, &b.G2, &b.G3})
    for (double t : G->ts) {
      if (t >= 0.0 && t <= span) points.push_back(t);
      if (t - h >= 0.0 && t - h <= span) points.push_back(t - h);
    }
  const double bounds[3] = {std::log(2.0), 0.125, 0.5};
  const SampledFunction* Gs[3] = {&b.G1, &b.G2, &b.G3};
  for (double t : points)
    for (int i = 0; i < 3; ++i)
      if (!within((*Gs[i])(t + h) - (*Gs[i])(t), bounds[i])) return false;
  return true;
}

}  // namespace detail

/// Largest sampled step h with g1 <= ln 2, g2 <= 1/8, g3 <= 1/2 uniformly,
/// then the half-step partition of [0, T].
inline Schedule continuation_schedule(const BudgetFunctions& budgets, double T) {
  budgets.validate();
  if (!(T > 0.0)) throw InvalidParameter("T must be > 0");
  std::vector<double> candidates;
  for (const SampledFunction* G : {&budgets.G1, &budgets.G2, &budgets.G3})
    for (double t : G->ts) {
      const double h = t - G->ts.front();
      if (h > 0.0 && h <= T * (1.0 + 1e-15)) candidates.push_back(std::min(h, T));
    }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (candidates.empty() || !detail::budget_step_feasible(budgets, candidates.front(), T))
    throw ScheduleInfeasible("no admissible continuation step: budget increments exceed the bounds at the sample spacing");

  // feasibility is monotone in h because the G_i are increasing
  std::size_t lo = 0, hi = candidates.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi + 1) / 2;
    if (detail::budget_step_feasible(budgets, candidates[mid], T)) lo = mid;
    else hi = mid - 1;
  }
  Schedule s;
  s.T_star = candidates[lo];
  const double q = T / (s.T_star / 2.0);
  s.N = static_cast<int>(std::ceil(q * (1.0 - 1e-12)));
  s.N = std::max(s.N, 1);
  for (int n = 1; n <= s.N; ++n) s.T_n.push_back(n < s.N ? n * s.T_star / 2.0 : T);
  return s;
}

struct FamilyMember {
  double eta = 0.0;
  SampledFunction X;
  std::optional<double> blowup_time;  // simulation stopped before T
};

struct WindowResult {
  int index = 0;  // 1-based
  double t_begin = 0.0, t_end = 0.0;
  BootstrapCertificate certificate;
};

struct MemberResult {
  double eta = 0.0;
  BootstrapCertificate certificate;  // overall verdict
  std::vector<WindowResult> windows;
  std::optional<int> failed_window;
};

struct PropQIResult {
  Schedule schedule;
  double eta_star = 0.0;
  double C_star = 0.0;         // C_N of the recursion C_{n+1} = 8 (1 + C_n f(T*/2))
  double sup_constant = 0.0;   // constant that bounds sup X / eta over [0, T]
  std::vector<double> C_n;     // C_1, ..., C_N
  std::vector<MemberResult> members;
  bool certified = false;

  /// One line per window: eta, interval, verdict, bound.
  std::string report() const {
    std::ostringstream os;
    os << std::setprecision(6);
    os << "# T_star=" << schedule.T_star << " N=" << schedule.N << " eta_star=" << eta_star << " C_star=" << C_star
       << " sup_constant=" << sup_constant << "\n";
    for (const auto& m : members) {
      if (m.windows.empty()) {
        os << "eta=" << m.eta << " [-, -] " << m.certificate.describe() << " bound=nan\n";
        continue;
      }
      for (const auto& w : m.windows) {
        os << "eta=" << m.eta << " window " << w.index << " [" << w.t_begin << ", " << w.t_end << "] "
           << w.certificate.describe() << " bound=" << w.certificate.concluded_bound;
        if (!w.certificate.caveat.empty()) os << " # " << w.certificate.caveat;
        os << "\n";
      }
    }
    os << (certified ? "CERTIFIED" : "NOT CERTIFIED") << "\n";
    return os.str();
  }
};

inline constexpr const char* kBlowupCaveat =
    "sampled data stop before T: blowup of the flow cannot be distinguished from under-resolution";

namespace detail {

/// Samples of X restricted to [a, b] with interpolated end values.
inline SampledFunction window_samples(const SampledFunction& X, double a, double b, double shift) {
  std::vector<double> ts{a}, xs{X(a) - shift};
  for (std::size_t i = 0; i < X.ts.size(); ++i)
    if (X.ts[i] > a && X.ts[i] < b) {
      ts.push_back(X.ts[i]);
      xs.push_back(X.xs[i] - shift);
    }
  ts.push_back(b);
  xs.push_back(X(b) - shift);
  for (double& x : xs) x = std::max(x, 0.0);
  return SampledFunction(std::move(ts), std::move(xs), X.continuity_tolerance);
}

}  // namespace detail

/// Windowed bootstrap over [0, T] for a family X_eta.
inline PropQIResult verify_prop_QI(const std::vector<FamilyMember>& family, const BudgetFunctions& budgets, double T) {
  PropQIResult res;
  res.schedule = continuation_schedule(budgets, T);
  const Schedule& sch = res.schedule;
  const double k = budgets.k, K = budgets.K;
  const double fh = budgets.f(sch.T_star / 2.0);
  const double ln32 = std::log(1.5);
  const double base = std::min(1.0 / (128.0 * k), ln32 / (8.0 * K));

  // constants of the induction
  std::vector<double> C{8.0}, D{0.0, 8.0};
  double eta_n = base;
  for (int n = 1; n < sch.N; ++n) {
    const double Cn = C.back();
    const double eta1 = std::min({eta_n, 1.0 / (16.0 * k * Cn), ln32 / (K * Cn)});
    const double eta2 = base / (1.0 + Cn * fh);
    eta_n = std::min(eta1, eta2);
    C.push_back(8.0 * (1.0 + Cn * fh));
    D.push_back(std::max(D[D.size() - 1], D[D.size() - 2] + C.back()));
  }
  res.C_n = C;
  res.C_star = C.back();
  res.sup_constant = D.back();
  res.eta_star = eta_n;

  res.certified = true;
  for (const FamilyMember& mem : family) {
    MemberResult mr;
    mr.eta = mem.eta;
    mem.X.validate();
    if (!(mem.eta > 0.0) || !(mem.eta < res.eta_star)) {
      mr.certificate = detail::threshold_violation("eta < eta*", {{"eta", mem.eta}, {"eta_star", res.eta_star}});
      res.certified = false;
      res.members.push_back(std::move(mr));
      continue;
    }
    if (!mem.X.nondecreasing(mem.X.continuity_tolerance)) {
      mr.certificate = detail::hypothesis_failure(0, "X_eta increasing", {{"eta", mem.eta}});
      res.certified = false;
      res.members.push_back(std::move(mr));
      continue;
    }

    bool ok = true;
    for (int n = 0; n < sch.N && ok; ++n) {
      const double a = n == 0 ? 0.0 : sch.T_n[n - 1];
      const double b = sch.T_n[n];
      const double t1 = n <= 1 ? 0.0 : sch.T_n[n - 2];
      WindowResult w;
      w.index = n + 1;
      w.t_begin = a;
      w.t_end = b;
      const bool blown = mem.blowup_time && *mem.blowup_time <= b;
      const bool uncovered = mem.X.ts.back() < b * (1.0 - 1e-12);
      if (blown || uncovered) {
        w.certificate = detail::hypothesis_failure(0, "existence on window", {{"eta", mem.eta}});
        w.certificate.caveat = kBlowupCaveat;
      } else {
        const double shift = n == 0 ? 0.0 : mem.X(t1);
        const double eps_n = n == 0 ? mem.eta : mem.eta * (1.0 + C[n - 1] * fh);
        w.certificate = check_lemma_72(detail::window_samples(mem.X, a, b, shift), 2.0 * k, K, eps_n);
        w.certificate.thresholds["t1"] = t1;
      }
      if (!w.certificate.certified()) {
        ok = false;
        mr.failed_window = w.index;
        mr.certificate = w.certificate;
      }
      mr.windows.push_back(std::move(w));
    }
    if (ok) {
      mr.certificate.verdict = Verdict::CERTIFIED;
      mr.certificate.concluded_bound = res.sup_constant * mem.eta;
      mr.certificate.thresholds = {{"eta", mem.eta}, {"C_star", res.C_star}, {"sup_constant", res.sup_constant}};
      detail::assert_sound(mem.X, mr.certificate);
    } else {
      res.certified = false;
    }
    res.members.push_back(std::move(mr));
  }
  return res;
}

}  // namespace hydrostat
