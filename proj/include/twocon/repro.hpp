#ifndef TWOCON_REPRO_HPP
#define TWOCON_REPRO_HPP

// Reference values for the three built-in examples and the pipelines that
// measure them. The acceptance tests and `twocon repro` both read this table.

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "twocon/models.hpp"
#include "twocon/smallgain.hpp"
#include "twocon/sweep.hpp"

namespace twocon::repro {

inline constexpr int kFixturesVersion = 1;
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Fixture {
  const char* example;
  const char* quantity;
  double reference;
  double tolerance;
};

// clang-format off
inline const std::vector<Fixture>& fixtures() {
  static const std::vector<Fixture> table = {
      {"1",       "gamma1 at k=0.5",                 0.5,                          1e-4},
      {"1",       "gamma2 at k=0.5",                 0.25,                         1e-4},
      {"1",       "thm1 threshold k*",               0.755,                        0.01},
      {"1",       "thm2 threshold k*",               0.715,                        0.01},
      {"1",       "direct: certified fraction of k=0.1..1.0", 1.0,                 0.0},
      {"thomas4", "gamma1 at b=0.9",                 0.7856742013183862,           1e-3},
      {"thomas4", "gamma2 at b=0.9",                 0.7856742013183862,           1e-3},
      {"thomas4", "thm1 threshold b*",               0.841,                        0.01},
      {"thomas4", "thm2 threshold b*",               0.841,                        0.01},
      {"thomas4", "direct threshold b*",             0.5,                          0.01},
      {"thomas3", "gamma_s at b=0.9",                0.5555555555555556,           1e-3},
      {"thomas3", "n3 threshold b*",                 0.575,                        0.01},
      {"thomas3", "direct threshold b*",             0.44,                         0.01},
  };
  return table;
}
// clang-format on

inline const Fixture& fixture(const std::string& example, const std::string& quantity) {
  for (const auto& f : fixtures())
    if (example == f.example && quantity == f.quantity) return f;
  throw InvalidParameter("no fixture '" + quantity + "' for example " + example);
}

struct Row {
  std::string quantity;
  double reference = std::numeric_limits<double>::quiet_NaN();  // NaN: informative only
  double measured = std::numeric_limits<double>::quiet_NaN();
  double tolerance = 0.0;
  std::string note;

  bool checked() const { return !std::isnan(reference); }
  bool pass() const { return !checked() || std::abs(measured - reference) <= tolerance + 1e-12; }
};

struct Options {
  CertifyOptions certify{};
  double bisect_tol = 1e-3;
};

namespace detail {

inline Row fixture_row(const std::string& example, const std::string& quantity, double measured,
                       std::string note = {}) {
  const auto& f = fixture(example, quantity);
  return Row{quantity, f.reference, measured, f.tolerance, std::move(note)};
}

inline double threshold(const ModelFamily& family, Method m, double lo, double hi, const Options& o) {
  BisectOptions bo;
  bo.tol = o.bisect_tol;
  bo.certify = o.certify;
  const auto r = bisect_threshold(family, m, lo, hi, bo);
  return r.threshold ? *r.threshold : std::numeric_limits<double>::quiet_NaN();
}

inline double safe_threshold(const ModelFamily& family, Method m, double lo, double hi, const Options& o,
                             std::string& note) {
  try {
    return threshold(family, m, lo, hi, o);
  } catch (const NoSignChange& e) {
    note = e.what();
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace detail

// Multistable 4D system, parameter k.
inline std::vector<Row> example1(const Options& o = {}) {
  std::vector<Row> rows;
  const auto fam = builtin_family(Example::Multistable4);
  const auto r = certify_thm1(fam(0.5), o.certify);
  rows.push_back(detail::fixture_row("1", "gamma1 at k=0.5", r.gamma1 ? r.gamma1->gamma : kNaN));
  rows.push_back(detail::fixture_row("1", "gamma2 at k=0.5", r.gamma2 ? r.gamma2->gamma : kNaN));
  std::string note;
  rows.push_back(detail::fixture_row("1", "thm1 threshold k*",
                                     detail::safe_threshold(fam, Method::Thm3, 0.0, 1.0, o, note), note));
  note.clear();
  rows.push_back(detail::fixture_row("1", "thm2 threshold k*",
                                     detail::safe_threshold(fam, Method::Thm4, 0.0, 1.0, o, note), note));
  int certified = 0;
  std::string missing;
  for (int i = 1; i <= 10; ++i) {
    const double k = 0.1 * i;
    const auto d = certify_direct(fam(k), o.certify);
    if (d.verdict == Verdict::Certified) {
      ++certified;
    } else {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%s%.1f (max eig %.3g)", missing.empty() ? "not certified at k=" : ", ", k,
                    d.condition_value);
      missing += buf;
    }
  }
  rows.push_back(detail::fixture_row("1", "direct: certified fraction of k=0.1..1.0", certified / 10.0, missing));
  return rows;
}

// Thresholds for the Thomas systems are searched on the invariant-box hull
// (exact cosine ranges over [-1/b, 1/b]^n); the cube hull [-1, 1]^n is
// reported alongside for the direct route.
inline std::vector<Row> thomas4(const Options& o = {}) {
  std::vector<Row> rows;
  const auto fam = builtin_family(Example::Thomas4, HullKind::InvariantBox);
  const auto r = certify_thm1(fam(0.9), o.certify);
  rows.push_back(detail::fixture_row("thomas4", "gamma1 at b=0.9", r.gamma1 ? r.gamma1->gamma : kNaN));
  rows.push_back(detail::fixture_row("thomas4", "gamma2 at b=0.9", r.gamma2 ? r.gamma2->gamma : kNaN));
  std::string note;
  rows.push_back(detail::fixture_row("thomas4", "thm1 threshold b*",
                                     detail::safe_threshold(fam, Method::Thm3, 0.6, 1.2, o, note), note));
  note.clear();
  rows.push_back(detail::fixture_row("thomas4", "thm2 threshold b*",
                                     detail::safe_threshold(fam, Method::Thm4, 0.6, 1.2, o, note), note));
  note.clear();
  rows.push_back(detail::fixture_row("thomas4", "direct threshold b*",
                                     detail::safe_threshold(fam, Method::Direct, 0.3, 1.2, o, note), note));
  note.clear();
  rows.push_back(Row{"direct threshold b* (cube hull)", kNaN,
                     detail::safe_threshold(builtin_family(Example::Thomas4), Method::Direct, 0.3, 1.2, o, note),
                     0.0, note.empty() ? "informative" : note});
  return rows;
}

inline std::vector<Row> thomas3(const Options& o = {}) {
  std::vector<Row> rows;
  const auto fam = builtin_family(Example::Thomas3, HullKind::InvariantBox);
  const auto r = certify_n3(fam(0.9), o.certify);
  // Partition (x1 | x2, x3): the scalar compound block is X22.
  rows.push_back(detail::fixture_row("thomas3", "gamma_s at b=0.9", r.gamma2 ? r.gamma2->gamma : kNaN));
  std::string note;
  rows.push_back(detail::fixture_row("thomas3", "n3 threshold b*",
                                     detail::safe_threshold(fam, Method::N3Special, 0.3, 1.5, o, note), note));
  note.clear();
  rows.push_back(detail::fixture_row("thomas3", "direct threshold b*",
                                     detail::safe_threshold(fam, Method::Direct, 0.3, 1.5, o, note), note));
  note.clear();
  rows.push_back(Row{"direct threshold b* (cube hull)", kNaN,
                     detail::safe_threshold(builtin_family(Example::Thomas3), Method::Direct, 0.3, 1.5, o, note),
                     0.0, note.empty() ? "informative" : note});
  return rows;
}

inline std::vector<Row> run(const std::string& example, const Options& o = {}) {
  if (example == "1") return example1(o);
  if (example == "thomas4") return thomas4(o);
  if (example == "thomas3") return thomas3(o);
  throw InvalidParameter("unknown example '" + example + "' (expected 1, thomas4 or thomas3)");
}

inline void print_table(std::ostream& out, const std::string& example, const std::vector<Row>& rows) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "example %s (fixtures v%d)\n%-44s %12s %12s %10s  %s\n", example.c_str(),
                kFixturesVersion, "quantity", "reference", "measured", "tolerance", "status");
  out << buf;
  for (const auto& r : rows) {
    const char* status = !r.checked() ? "info" : (r.pass() ? "ok" : "MISMATCH");
    if (r.checked())
      std::snprintf(buf, sizeof buf, "%-44s %12.6g %12.6g %10.3g  %s", r.quantity.c_str(), r.reference, r.measured,
                    r.tolerance, status);
    else
      std::snprintf(buf, sizeof buf, "%-44s %12s %12.6g %10s  %s", r.quantity.c_str(), "-", r.measured, "-", status);
    out << buf;
    if (!r.note.empty()) out << "  (" << r.note << ')';
    out << '\n';
  }
}

}  // namespace twocon::repro

#endif  // TWOCON_REPRO_HPP
