#ifndef TWOCON_SWEEP_HPP
#define TWOCON_SWEEP_HPP

// Parameter sweeps over certification verdicts, condition-value curves, and
// fixed-step RK4 simulation.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/LU>

#include "twocon/errors.hpp"
#include "twocon/models.hpp"
#include "twocon/smallgain.hpp"

namespace twocon {

// Parameter -> polytopic model.
using ModelFamily = std::function<PolytopicModel(double)>;

inline ModelFamily builtin_family(Example kind, HullKind hull = HullKind::Interval) {
  return [kind, hull](double p) { return hull_vertices(kind, p, hull); };
}

struct CurvePoint {
  double param = 0.0;
  double gamma1 = std::numeric_limits<double>::quiet_NaN();
  double gamma2 = std::numeric_limits<double>::quiet_NaN();
  double gamma12 = std::numeric_limits<double>::quiet_NaN();
  double Gamma1 = std::numeric_limits<double>::quiet_NaN();
  double Gamma2 = std::numeric_limits<double>::quiet_NaN();
  Verdict verdict = Verdict::Unknown;  // partitioned-route verdict
  Verdict verdict2 = Verdict::Unknown; // single-gain-route verdict
};

struct SweepResult {
  Method method = Method::Thm1;
  std::vector<double> parameter_grid;    // sorted
  std::vector<double> condition_values;  // NaN where Unknown
  std::vector<Verdict> verdicts;
  std::optional<double> threshold;
  // (last certified, first uncertified) parameter values.
  std::pair<double, double> bracket{std::numeric_limits<double>::quiet_NaN(),
                                    std::numeric_limits<double>::quiet_NaN()};
  double tolerance_achieved = std::numeric_limits<double>::quiet_NaN();
  std::vector<CurvePoint> curve;  // filled by curve()
  std::vector<std::string> flags;
};

struct BisectOptions {
  double tol = 1e-3;
  CertifyOptions certify{};
};

namespace detail {

inline CertificationReport certify_with_retry(const PolytopicModel& m, Method method, const CertifyOptions& opts,
                                              bool& retried) {
  auto r = certify(m, method, opts);
  retried = false;
  if (r.verdict != Verdict::Unknown) return r;
  retried = true;
  CertifyOptions tight = opts;
  tight.solver.feasibility_tol *= 0.1;
  tight.solver.gap_tol *= 0.1;
  tight.solver.max_newton *= 2;
  return certify(m, method, tight);
}

}  // namespace detail

// Bisects on the verdict of `method` over [lo, hi]. Which end is certified is
// read from the endpoint verdicts; they must differ. Unknown verdicts are
// retried once with tightened solver tolerances and then counted as
// uncertified, which can only move the reported threshold toward the
// certified side; such steps are flagged.
inline SweepResult bisect_threshold(const ModelFamily& family, Method method, double lo, double hi,
                                    const BisectOptions& opts = {}) {
  if (!(opts.tol > 0.0)) throw InvalidParameter("tol must be > 0");
  if (!(lo < hi)) throw InvalidParameter("parameter range must satisfy lo < hi");
  SweepResult res;
  res.method = method;
  std::vector<std::pair<double, CertificationReport>> evals;
  auto eval = [&](double p) {
    bool retried = false;
    auto r = detail::certify_with_retry(family(p), method, opts.certify, retried);
    if (retried) {
      res.flags.push_back("retried with tightened tolerance at " + std::to_string(p) + " -> " +
                          to_string(r.verdict));
    }
    if (r.verdict == Verdict::Unknown)
      res.flags.push_back("unknown verdict treated as uncertified at " + std::to_string(p) + ": " + r.message);
    evals.emplace_back(p, r);
    return r.verdict == Verdict::Certified;
  };
  const bool c_lo = eval(lo), c_hi = eval(hi);
  if (c_lo == c_hi) {
    throw NoSignChange(std::string("verdicts agree at both ends of [") + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]: " + (c_lo ? "certified" : "not certified"));
  }
  // Keep `good` certified and `bad` uncertified.
  double good = c_lo ? lo : hi, bad = c_lo ? hi : lo;
  while (std::abs(bad - good) > opts.tol) {
    const double mid = 0.5 * (good + bad);
    (eval(mid) ? good : bad) = mid;
  }
  res.bracket = {good, bad};
  res.threshold = 0.5 * (good + bad);
  res.tolerance_achieved = std::abs(bad - good);
  std::sort(evals.begin(), evals.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [p, r] : evals) {
    res.parameter_grid.push_back(p);
    res.verdicts.push_back(r.verdict);
    res.condition_values.push_back(r.verdict == Verdict::Unknown ? std::numeric_limits<double>::quiet_NaN()
                                                                 : r.condition_value);
  }
  return res;
}

// Evaluates both small-gain conditions at every grid point.
// Gamma1 = partitioned objective, Gamma2 = gamma12^2 (gamma1^2 + gamma2^2).
inline CurvePoint curve_point(const PolytopicModel& m, double param, const CertifyOptions& opts = {}) {
  CurvePoint pt;
  pt.param = param;
  const auto r1 = certify_thm1(m, opts);
  const auto r2 = certify_thm2(m, opts);
  pt.verdict = r1.verdict;
  pt.verdict2 = r2.verdict;
  const auto& g = r2.gamma1 ? r2 : r1;
  if (g.gamma1) pt.gamma1 = g.gamma1->gamma;
  if (g.gamma2) pt.gamma2 = g.gamma2->gamma;
  if (r2.gamma12) pt.gamma12 = r2.gamma12->gamma;
  if (r1.verdict != Verdict::Unknown && r1.partitioned) pt.Gamma1 = r1.condition_value;
  if (r2.verdict != Verdict::Unknown && r2.gamma12) pt.Gamma2 = r2.condition_value;
  return pt;
}

// Tabulates Gamma1 and Gamma2 over `grid`; points run on up to `jobs` threads.
inline SweepResult curve(const ModelFamily& family, std::vector<double> grid, const CertifyOptions& opts = {},
                         unsigned jobs = 1) {
  if (grid.empty()) throw InvalidParameter("parameter grid is empty");
  std::sort(grid.begin(), grid.end());
  SweepResult res;
  res.method = Method::Thm1;
  res.parameter_grid = grid;
  res.curve.resize(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) res.curve[i] = curve_point(family(grid[i]), grid[i], opts);
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(grid.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& pt : res.curve) {
    res.verdicts.push_back(pt.verdict);
    res.condition_values.push_back(pt.Gamma1);
  }
  return res;
}

// -- simulation -------------------------------------------------------------

using VectorField = std::function<Vector(const Vector&)>;

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  double step = 0.0;
  const char* integrator = "rk4";

  const Vector& final_state() const { return states.back(); }
};

struct SimulateOptions {
  double step = 1e-2;
  double guard = 1e6;      // |x_i| beyond this raises NonFinite
  std::size_t stride = 1;  // keep every stride-th state (the last is always kept)
};

inline Trajectory simulate(const VectorField& f, const Vector& x0, double t_end, const SimulateOptions& opts = {}) {
  if (!(opts.step > 0.0)) throw InvalidParameter("step must be > 0");
  if (!(t_end >= 0.0)) throw InvalidParameter("t_end must be >= 0");
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / opts.step - 1e-9));
  const double h = steps ? t_end / static_cast<double>(steps) : opts.step;
  const std::size_t stride = std::max<std::size_t>(1, opts.stride);
  Trajectory tr;
  tr.step = h;
  Vector x = x0;
  tr.times.push_back(0.0);
  tr.states.push_back(x);
  for (std::size_t k = 1; k <= steps; ++k) {
    const Vector k1 = f(x);
    const Vector k2 = f(x + 0.5 * h * k1);
    const Vector k3 = f(x + 0.5 * h * k2);
    const Vector k4 = f(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > opts.guard)
      throw NonFinite("trajectory left the guard box at t = " + std::to_string(static_cast<double>(k) * h));
    if (k % stride == 0 || k == steps) {
      tr.times.push_back(static_cast<double>(k) * h);
      tr.states.push_back(x);
    }
  }
  return tr;
}

inline Trajectory simulate(const ExampleSystem& sys, const Vector& x0, double t_end, const SimulateOptions& opts = {}) {
  if (x0.size() != sys.dim()) throw DimensionMismatch("initial state dimension does not match the system");
  return simulate([&sys](const Vector& x) { return sys.field(x); }, x0, t_end, opts);
}

// Peak-to-peak amplitude of one coordinate over the trailing fraction of a run.
inline double trailing_amplitude(const Trajectory& tr, Index coord = 0, double window = 0.2) {
  if (tr.states.empty()) return 0.0;
  const double t0 = tr.times.back() * (1.0 - window);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    if (tr.times[i] < t0) continue;
    lo = std::min(lo, tr.states[i](coord));
    hi = std::max(hi, tr.states[i](coord));
  }
  return hi - lo;
}

inline bool oscillates(const Trajectory& tr, Index coord = 0, double threshold = 0.1) {
  return trailing_amplitude(tr, coord) > threshold;
}

// Damped Newton on f(x) = 0 from x0.
inline Vector find_equilibrium(const ExampleSystem& sys, Vector x, double tol = 1e-12, int max_iter = 200) {
  for (int it = 0; it < max_iter; ++it) {
    const Vector f = sys.field(x);
    const double r = f.norm();
    if (r < tol) return x;
    const Vector dx = sys.jacobian(x).fullPivLu().solve(-f);
    double s = 1.0;
    while (s > 1e-8 && sys.field(x + s * dx).norm() >= r) s *= 0.5;
    if (s <= 1e-8) break;
    x += s * dx;
  }
  if (sys.field(x).norm() > std::sqrt(tol)) throw NumericalFailure("equilibrium search did not converge");
  return x;
}

// -- CSV ------------------------------------------------------------------

namespace detail {

inline std::string fmt12(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detail

inline void write_curve_csv(std::ostream& out, const SweepResult& r) {
  out << "param,gamma1,gamma2,gamma12,Gamma1,Gamma2,verdict\n";
  for (const auto& p : r.curve) {
    out << detail::fmt12(p.param) << ',' << detail::fmt12(p.gamma1) << ',' << detail::fmt12(p.gamma2) << ','
        << detail::fmt12(p.gamma12) << ',' << detail::fmt12(p.Gamma1) << ',' << detail::fmt12(p.Gamma2) << ','
        << to_string(p.verdict) << '\n';
  }
}

inline void write_bisect_csv(std::ostream& out, const SweepResult& r) {
  out << "param,condition_value,verdict\n";
  for (std::size_t i = 0; i < r.parameter_grid.size(); ++i)
    out << detail::fmt12(r.parameter_grid[i]) << ',' << detail::fmt12(r.condition_values[i]) << ','
        << to_string(r.verdicts[i]) << '\n';
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& tr) {
  out << 't';
  const Index n = tr.states.empty() ? 0 : tr.states.front().size();
  for (Index i = 0; i < n; ++i) out << ",x" << (i + 1);
  out << '\n';
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    out << detail::fmt12(tr.times[k]);
    for (Index i = 0; i < n; ++i) out << ',' << detail::fmt12(tr.states[k](i));
    out << '\n';
  }
}

}  // namespace twocon

#endif  // TWOCON_SWEEP_HPP
