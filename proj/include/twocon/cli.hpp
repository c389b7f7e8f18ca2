#ifndef TWOCON_CLI_HPP
#define TWOCON_CLI_HPP

// Command-line front end. Exit codes: 0 ok, 1 not certified, 2 usage error,
// 3 numerical failure or unknown verdict.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "twocon/models.hpp"
#include "twocon/report.hpp"
#include "twocon/repro.hpp"
#include "twocon/smallgain.hpp"
#include "twocon/sweep.hpp"

namespace twocon::cli {

enum ExitCode : int { kOk = 0, kNotCertified = 1, kUsage = 2, kNumerical = 3 };

// Environment variable holding the default solver tolerance (feasibility
// and duality gap). Flags and config files override it.
inline constexpr const char* kToleranceEnv = "TWOCON_SOLVER_TOL";

struct RunConfig {
  std::string subcommand;
  std::string builtin;
  std::optional<double> param;
  std::string file;
  std::string hull = "interval";
  std::string method = "thm1";
  double eps = 0.01;
  double margin = 1e-6;
  std::optional<double> solver_tol;
  std::string output;
  std::string csv;
  unsigned jobs = 1;
  // sweep
  bool bisect = false;
  bool curve = false;
  std::vector<double> range;
  std::vector<double> grid;
  double tol = 1e-3;
  // simulate
  std::vector<double> x0;
  double t_end = 100.0;
  double step = 1e-2;
  std::size_t stride = 1;
  // repro
  std::string example;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(what) {}
};

namespace detail {

// Fills fields that were not given on the command line from a JSON config
// whose keys are the long flag names (dashes as underscores).
inline void apply_config(RunConfig& c, const std::string& path, const CLI::App& app) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
  if (!j.is_object()) throw SchemaError("<root>", "config must be an object");
  auto given = [&](const std::string& flag) {
    for (const auto* sub : app.get_subcommands())
      if (const auto* o = sub->get_option_no_throw("--" + flag); o && o->count() > 0) return true;
    const auto* o = app.get_option_no_throw("--" + flag);
    return o && o->count() > 0;
  };
  auto take = [&](const char* key, const char* flag, auto& field) {
    if (!j.contains(key) || given(flag)) return;
    try {
      using T = std::decay_t<decltype(field)>;
      if constexpr (std::is_same_v<T, std::optional<double>>) field = j.at(key).get<double>();
      else field = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(key, e.what());
    }
  };
  take("builtin", "builtin", c.builtin);
  take("param", "param", c.param);
  take("file", "file", c.file);
  take("hull", "hull", c.hull);
  take("method", "method", c.method);
  take("eps", "eps", c.eps);
  take("margin", "margin", c.margin);
  take("solver_tol", "solver-tol", c.solver_tol);
  take("output", "output", c.output);
  take("csv", "csv", c.csv);
  take("jobs", "jobs", c.jobs);
  take("range", "range", c.range);
  take("grid", "grid", c.grid);
  take("tol", "tol", c.tol);
  take("x0", "x0", c.x0);
  take("t_end", "t-end", c.t_end);
  take("step", "step", c.step);
  take("stride", "stride", c.stride);
  take("example", "example", c.example);
  if (j.contains("bisect") && !given("bisect")) c.bisect = j.at("bisect").get<bool>();
  if (j.contains("curve") && !given("curve")) c.curve = j.at("curve").get<bool>();
}

inline HullKind hull_kind(const std::string& s) {
  if (s == "interval") return HullKind::Interval;
  if (s == "box") return HullKind::InvariantBox;
  throw UsageError("--hull must be 'interval' or 'box'");
}

inline Method method_of(const std::string& s) {
  if (s == "thm1") return Method::Thm1;
  if (s == "thm2") return Method::Thm2;
  if (s == "n3") return Method::N3Special;
  if (s == "direct") return Method::Direct;
  throw UsageError("--method must be thm1, thm2, n3 or direct");
}

inline void require_one_source(const RunConfig& c) {
  const bool b = !c.builtin.empty(), f = !c.file.empty();
  if (b == f) throw UsageError("give exactly one model source: --builtin NAME --param P, or --file PATH");
  if (b && !c.param) throw UsageError("--builtin needs --param");
}

inline PolytopicModel load(const RunConfig& c) {
  require_one_source(c);
  if (!c.file.empty()) return load_model(c.file);
  return hull_vertices(example_from_string(c.builtin), *c.param, hull_kind(c.hull));
}

inline ModelFamily family(const RunConfig& c) {
  if (c.builtin.empty()) throw UsageError("sweeps need --builtin NAME");
  return builtin_family(example_from_string(c.builtin), hull_kind(c.hull));
}

inline CertifyOptions certify_options(const RunConfig& c) {
  CertifyOptions o;
  o.eps = c.eps;
  o.margin = c.margin;
  if (c.solver_tol) {
    if (!(*c.solver_tol > 0.0)) throw UsageError("solver tolerance must be > 0");
    o.solver.feasibility_tol = *c.solver_tol;
    o.solver.gap_tol = *c.solver_tol;
  }
  return o;
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw UsageError("cannot write '" + path + "'");
      out_ = &file_;
    }
  }
  std::ostream& operator*() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

inline void emit_json(const RunConfig& c, std::ostream& out, const nlohmann::json& j) {
  Output o(c.output, out);
  *o << j.dump(2) << '\n';
}

inline int cmd_decompose(const RunConfig& c, std::ostream& out) {
  const auto m = load(c);
  nlohmann::json vs = nlohmann::json::array();
  for (const auto& v : m.vertices()) {
    auto j = decomposition_json(decompose(v));
    j["A"] = matrix_json(v.entries());
    j["A_compound"] = matrix_json(second_additive_compound(v.entries()));
    vs.push_back(std::move(j));
  }
  emit_json(c, out, {{"model", m.description()}, {"n1", m.n1()}, {"n2", m.n2()}, {"vertices", std::move(vs)}});
  return kOk;
}

inline int cmd_gain(const RunConfig& c, std::ostream& out) {
  const auto m = load(c);
  const auto ds = m.decompositions();
  const auto go = certify_options(c).gain_options();
  nlohmann::json j = {{"model", m.description()}, {"vertex_count", ds.size()}};
  for (auto [name, fn] : {std::pair{"gamma1", &gamma1}, std::pair{"gamma2", &gamma2}, std::pair{"gamma12", &gamma12}}) {
    try {
      j[name] = gain_json(fn(ds, go));
    } catch (const NoFiniteGain& e) {
      j[name] = {{"gamma", "inf"}, {"message", e.what()}};
    }
  }
  emit_json(c, out, j);
  return kOk;
}

inline int cmd_certify(const RunConfig& c, std::ostream& out) {
  const Method method = method_of(c.method);
  const auto m = load(c);
  const auto r = certify(m, method, certify_options(c));
  auto j = report_json(r);
  j["model"] = m.description();
  emit_json(c, out, j);
  if (r.verdict == Verdict::Certified) return kOk;
  return r.verdict == Verdict::NotCertified ? kNotCertified : kNumerical;
}

inline int cmd_sweep(const RunConfig& c, std::ostream& out) {
  if (c.bisect == c.curve) throw UsageError("sweep needs exactly one of --bisect or --curve");
  const auto fam = family(c);
  if (c.bisect) {
    if (c.range.size() != 2) throw UsageError("--bisect needs --range LO HI");
    BisectOptions bo;
    bo.tol = c.tol;
    bo.certify = certify_options(c);
    Method method = method_of(c.method);
    const auto r = bisect_threshold(fam, method, c.range[0], c.range[1], bo);
    emit_json(c, out, bisect_json(r));
    if (!c.csv.empty()) {
      Output o(c.csv, out);
      write_bisect_csv(*o, r);
    }
    return kOk;
  }
  if (c.grid.size() != 3) throw UsageError("--curve needs --grid LO STEP HI");
  const double lo = c.grid[0], h = c.grid[1], hi = c.grid[2];
  if (!(h > 0.0) || hi < lo) throw UsageError("--grid needs STEP > 0 and HI >= LO");
  std::vector<double> pts;
  for (long i = 0;; ++i) {
    const double p = lo + static_cast<double>(i) * h;
    if (p > hi + 1e-9 * h) break;
    pts.push_back(p);
  }
  const auto r = curve(fam, pts, certify_options(c), c.jobs);
  Output o(c.csv.empty() ? c.output : c.csv, out);
  write_curve_csv(*o, r);
  return kOk;
}

inline int cmd_simulate(const RunConfig& c, std::ostream& out) {
  if (c.builtin.empty() || !c.param) throw UsageError("simulate needs --builtin NAME --param P");
  const ExampleSystem sys(example_from_string(c.builtin), *c.param);
  Vector x0(sys.dim());
  if (c.x0.empty()) {
    x0.setConstant(0.1);
  } else {
    if (static_cast<Index>(c.x0.size()) != sys.dim())
      throw UsageError("--x0 needs " + std::to_string(sys.dim()) + " values");
    for (Index i = 0; i < sys.dim(); ++i) x0(i) = c.x0[static_cast<std::size_t>(i)];
  }
  SimulateOptions so;
  so.step = c.step;
  so.stride = c.stride;
  const auto tr = simulate(sys, x0, c.t_end, so);
  Output o(c.csv.empty() ? c.output : c.csv, out);
  write_trajectory_csv(*o, tr);
  return kOk;
}

inline int cmd_repro(const RunConfig& c, std::ostream& out) {
  repro::Options o;
  o.certify = certify_options(c);
  o.bisect_tol = c.tol;
  const auto rows = repro::run(c.example, o);
  Output dst(c.output, out);
  repro::print_table(*dst, c.example, rows);
  for (const auto& r : rows)
    if (!r.pass()) return kNotCertified;
  return kOk;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig c;
  if (const char* env = std::getenv(kToleranceEnv)) {
    try {
      c.solver_tol = std::stod(env);
    } catch (const std::exception&) {
      err << "ignoring malformed " << kToleranceEnv << "='" << env << "'\n";
    }
  }
  CLI::App app{"2-contraction certification by modular small-gain conditions", "twocon"};
  app.require_subcommand(1);
  std::string config;
  app.add_option("--config", config, "JSON file with default values for any flag");

  auto model_flags = [&](CLI::App* s) {
    s->add_option("--builtin", c.builtin, "multistable4 | thomas4 | thomas3");
    s->add_option("--param", c.param, "k (multistable4) or b (thomas*)");
    s->add_option("--file", c.file, "JSON polytopic model");
    s->add_option("--hull", c.hull, "interval | box (Thomas hulls)");
  };
  auto solver_flags = [&](CLI::App* s) {
    s->add_option("--eps", c.eps, "lower bound P >= eps I in gain LMIs");
    s->add_option("--margin", c.margin, "strictness margin on small-gain conditions");
    s->add_option("--solver-tol", c.solver_tol, "SDP feasibility and gap tolerance");
  };
  auto out_flag = [&](CLI::App* s) { s->add_option("-o,--output", c.output, "output file (default stdout)"); };

  auto* dec = app.add_subcommand("decompose", "modular blocks of every vertex as JSON");
  model_flags(dec);
  out_flag(dec);
  auto* gain = app.add_subcommand("gain", "gamma1, gamma2, gamma12 certificates as JSON");
  model_flags(gain);
  solver_flags(gain);
  out_flag(gain);
  auto* cert = app.add_subcommand("certify", "certification report as JSON");
  model_flags(cert);
  solver_flags(cert);
  out_flag(cert);
  cert->add_option("--method", c.method, "thm1 | thm2 | n3 | direct");
  auto* sw = app.add_subcommand("sweep", "threshold bisection or condition-value curve");
  model_flags(sw);
  solver_flags(sw);
  out_flag(sw);
  sw->add_flag("--bisect", c.bisect, "bisect the verdict of --method over --range");
  sw->add_flag("--curve", c.curve, "tabulate Gamma1 and Gamma2 over --grid (CSV)");
  sw->add_option("--method", c.method, "thm1 | thm2 | n3 | direct");
  sw->add_option("--range", c.range, "LO HI")->expected(2);
  sw->add_option("--grid", c.grid, "LO STEP HI")->expected(3);
  sw->add_option("--tol", c.tol, "bisection bracket width");
  sw->add_option("--csv", c.csv, "CSV output file");
  sw->add_option("--jobs", c.jobs, "worker threads for --curve");
  auto* sim = app.add_subcommand("simulate", "RK4 trajectory as CSV");
  model_flags(sim);
  out_flag(sim);
  sim->add_option("--x0", c.x0, "initial state");
  sim->add_option("--t-end", c.t_end, "final time");
  sim->add_option("--step", c.step, "RK4 step");
  sim->add_option("--stride", c.stride, "keep every N-th sample");
  sim->add_option("--csv", c.csv, "CSV output file");
  auto* rep = app.add_subcommand("repro", "reproduce an example's reported numbers");
  solver_flags(rep);
  out_flag(rep);
  rep->add_option("--example", c.example, "1 | thomas4 | thomas3")->required();
  rep->add_option("--tol", c.tol, "bisection bracket width");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kUsage;
  }

  try {
    if (!config.empty()) detail::apply_config(c, config, app);
    const auto* sub = app.get_subcommands().front();
    c.subcommand = sub->get_name();
    if (c.subcommand == "decompose") return detail::cmd_decompose(c, out);
    if (c.subcommand == "gain") return detail::cmd_gain(c, out);
    if (c.subcommand == "certify") return detail::cmd_certify(c, out);
    if (c.subcommand == "sweep") return detail::cmd_sweep(c, out);
    if (c.subcommand == "simulate") return detail::cmd_simulate(c, out);
    if (c.subcommand == "repro") return detail::cmd_repro(c, out);
    throw UsageError("unknown subcommand");
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << e.what() << '\n';
    return kUsage;
  } catch (const SchemaError& e) {
    err << e.what() << '\n';
    return kUsage;
  } catch (const InvalidParameter& e) {
    err << e.what() << '\n';
    return kUsage;
  } catch (const InvalidModel& e) {
    err << e.what() << '\n';
    return kUsage;
  } catch (const NoSignChange& e) {
    err << e.what() << '\n';
    return kUsage;
  } catch (const NumericalFailure& e) {
    err << e.what() << '\n';
    return kNumerical;
  } catch (const NonFinite& e) {
    err << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace twocon::cli

#endif  // TWOCON_CLI_HPP
