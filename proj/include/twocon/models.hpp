#ifndef TWOCON_MODELS_HPP
#define TWOCON_MODELS_HPP

// Built-in example systems and the JSON polytopic model format.
//
// Fields and raw Jacobians use the natural state order x1..xn. Partitioned
// Jacobians and hull vertices use the partition order, which for Thomas4 is
// (x1, x3, x2, x4); `ordering()` maps partition slot -> natural index.

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "twocon/compound.hpp"
#include "twocon/errors.hpp"
#include "twocon/smallgain.hpp"

namespace twocon {

enum class Example { Multistable4, Thomas4, Thomas3 };

// Interval: every cos(x_i) in [-1, 1] (the cube hull).
// InvariantBox: cos(x_i) over |x_i| <= 1/b exactly, i.e. [cos(1/b), 1] while
// 1/b < pi. Both hulls contain the Jacobian on the invariant box; the second
// is tighter. Multistable4 is the same under both.
enum class HullKind { Interval, InvariantBox };

inline const char* to_string(Example e) {
  switch (e) {
    case Example::Multistable4: return "multistable4";
    case Example::Thomas4: return "thomas4";
    case Example::Thomas3: return "thomas3";
  }
  return "?";
}

inline Example example_from_string(const std::string& s) {
  if (s == "multistable4") return Example::Multistable4;
  if (s == "thomas4") return Example::Thomas4;
  if (s == "thomas3") return Example::Thomas3;
  throw InvalidParameter("unknown builtin model '" + s + "' (expected multistable4, thomas4 or thomas3)");
}

class ExampleSystem {
 public:
  ExampleSystem(Example kind, double param) : kind_(kind), param_(param) {
    if (!std::isfinite(param)) throw InvalidParameter("parameter must be finite");
    if (kind == Example::Multistable4 && param < 0.0) throw InvalidParameter("k must be >= 0");
    if (kind != Example::Multistable4 && !(param > 0.0)) throw InvalidParameter("b must be > 0");
  }

  Example kind() const noexcept { return kind_; }
  std::string name() const { return to_string(kind_); }
  double parameter() const noexcept { return param_; }
  Index dim() const { return kind_ == Example::Thomas3 ? 3 : 4; }
  Index n1() const { return kind_ == Example::Thomas3 ? 1 : 2; }
  Index n2() const { return dim() - n1(); }

  std::vector<Index> ordering() const {
    switch (kind_) {
      case Example::Multistable4: return {0, 1, 2, 3};
      case Example::Thomas4: return {0, 2, 1, 3};
      case Example::Thomas3: return {0, 1, 2};
    }
    return {};
  }

  // Per-state forward-invariant bounds; empty for Multistable4, whose hull
  // holds for every x.
  std::vector<std::pair<double, double>> invariant_box() const {
    if (kind_ == Example::Multistable4) return {};
    const double r = 1.0 / param_;
    return std::vector<std::pair<double, double>>(static_cast<std::size_t>(dim()), {-r, r});
  }

  Vector field(const Vector& x) const {
    check(x);
    Vector f(dim());
    const double p = param_;
    switch (kind_) {
      case Example::Multistable4:
        f << x(1), -x(0) + std::atan(2.0 * x(0)) - 2.0 * x(1) + x(2), -x(2) + x(3), -p * x(0) - x(3);
        break;
      case Example::Thomas4:
      case Example::Thomas3: {
        const Index n = dim();
        for (Index i = 0; i < n; ++i) f(i) = -p * x(i) + std::sin(x((i + 1) % n));
        break;
      }
    }
    return f;
  }

  // Jacobian in natural state order.
  Matrix jacobian(const Vector& x) const {
    check(x);
    const Index n = dim();
    Matrix j = Matrix::Zero(n, n);
    switch (kind_) {
      case Example::Multistable4:
        j << 0, 1, 0, 0,
             -1.0 + 2.0 / (1.0 + 4.0 * x(0) * x(0)), -2, 1, 0,
             0, 0, -1, 1,
             -param_, 0, 0, -1;
        break;
      case Example::Thomas4:
      case Example::Thomas3:
        for (Index i = 0; i < n; ++i) {
          j(i, i) = -param_;
          j(i, (i + 1) % n) = std::cos(x((i + 1) % n));
        }
        break;
    }
    return j;
  }

  // Jacobian permuted into partition order.
  PartitionedMatrix partitioned_jacobian(const Vector& x) const { return partition(jacobian(x)); }

  PartitionedMatrix partition(const Matrix& natural) const {
    const auto ord = ordering();
    const Index n = dim();
    Matrix p(n, n);
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) p(r, c) = natural(ord[r], ord[c]);
    return PartitionedMatrix(p, n1(), n2());
  }

  // Vertices of the interval hull of the Jacobian over the invariant box.
  // Multistable4: the atan slope term spans [-1, 1] (2 vertices).
  // Thomas: one vertex per endpoint choice of each cos(x_i) (2^n, kept verbatim).
  PolytopicModel hull(HullKind kind = HullKind::Interval) const {
    std::vector<PartitionedMatrix> vs;
    const Index n = dim();
    if (kind_ == Example::Multistable4) {
      for (double a : {-1.0, 1.0}) {
        Matrix j(4, 4);
        j << 0, 1, 0, 0,
             a, -2, 1, 0,
             0, 0, -1, 1,
             -param_, 0, 0, -1;
        vs.push_back(partition(j));
      }
    } else {
      const double lo = cos_lower(kind);
      for (unsigned mask = 0; mask < (1u << n); ++mask) {
        Matrix j = -param_ * Matrix::Identity(n, n);
        for (Index i = 0; i < n; ++i) j(i, (i + 1) % n) = (mask >> ((i + 1) % n)) & 1u ? 1.0 : lo;
        vs.push_back(partition(j));
      }
    }
    std::ostringstream d;
    d << name();
    if (kind == HullKind::InvariantBox && kind_ != Example::Multistable4) d << " (box hull)";
    d << " at " << (kind_ == Example::Multistable4 ? "k" : "b") << " = " << param_;
    PolytopicModel m(std::move(vs), d.str());
    m.parameter = param_;
    m.invariant_box = invariant_box();
    return m;
  }

 private:
  double cos_lower(HullKind kind) const {
    const double r = 1.0 / param_;
    return kind == HullKind::InvariantBox && r < std::numbers::pi ? std::cos(r) : -1.0;
  }

  void check(const Vector& x) const {
    if (x.size() != dim())
      throw DimensionMismatch("state has " + std::to_string(x.size()) + " entries, expected " + std::to_string(dim()));
  }

  Example kind_;
  double param_;
};

inline PolytopicModel hull_vertices(Example kind, double param, HullKind hull = HullKind::Interval) {
  return ExampleSystem(kind, param).hull(hull);
}
inline Vector evaluate_field(const ExampleSystem& sys, const Vector& x) { return sys.field(x); }
inline PartitionedMatrix evaluate_jacobian(const ExampleSystem& sys, const Vector& x) {
  return sys.partitioned_jacobian(x);
}

// JSON model format:
//   { "name": str, "n1": int, "n2": int, "vertices": [[n*n numbers, row-major], ...],
//     "parameter": number?, "invariant_box": [[lo, hi], ...]? }
// A vertex may also be given as a list of rows.

namespace detail {

inline double json_number(const nlohmann::json& v, const std::string& field) {
  if (!v.is_number()) throw SchemaError(field, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(field, "number is not finite");
  return d;
}

inline Index json_dim(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key)) throw SchemaError(key, "missing");
  const auto& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1) throw SchemaError(key, "expected a positive integer");
  return static_cast<Index>(v.get<long long>());
}

inline Matrix json_vertex(const nlohmann::json& v, Index n, const std::string& field) {
  if (!v.is_array()) throw SchemaError(field, "expected an array");
  Matrix m(n, n);
  if (!v.empty() && v.front().is_array()) {
    if (static_cast<Index>(v.size()) != n) throw SchemaError(field, "expected " + std::to_string(n) + " rows");
    for (Index r = 0; r < n; ++r) {
      const auto& row = v[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Index>(row.size()) != n)
        throw SchemaError(field, "row " + std::to_string(r) + " must have " + std::to_string(n) + " entries");
      for (Index c = 0; c < n; ++c)
        m(r, c) = json_number(row[static_cast<std::size_t>(c)], field);
    }
  } else {
    if (static_cast<Index>(v.size()) != n * n)
      throw SchemaError(field, "expected " + std::to_string(n * n) + " numbers (n1 + n2 = " + std::to_string(n) + ")");
    for (Index k = 0; k < n * n; ++k) m(k / n, k % n) = json_number(v[static_cast<std::size_t>(k)], field);
  }
  return m;
}

}  // namespace detail

inline PolytopicModel model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("<root>", "expected an object");
  std::string name;
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) throw SchemaError("name", "expected a string");
    name = doc.at("name").get<std::string>();
  } else {
    throw SchemaError("name", "missing");
  }
  const Index n1 = detail::json_dim(doc, "n1"), n2 = detail::json_dim(doc, "n2");
  const Index n = n1 + n2;
  if (!doc.contains("vertices")) throw SchemaError("vertices", "missing");
  const auto& vs = doc.at("vertices");
  if (!vs.is_array() || vs.empty()) throw SchemaError("vertices", "expected a nonempty array");
  std::vector<PartitionedMatrix> verts;
  for (std::size_t i = 0; i < vs.size(); ++i)
    verts.emplace_back(detail::json_vertex(vs[i], n, "vertices[" + std::to_string(i) + "]"), n1, n2);
  PolytopicModel m(std::move(verts), name);
  if (doc.contains("parameter") && !doc.at("parameter").is_null())
    m.parameter = detail::json_number(doc.at("parameter"), "parameter");
  if (doc.contains("invariant_box") && !doc.at("invariant_box").is_null()) {
    const auto& box = doc.at("invariant_box");
    if (!box.is_array() || static_cast<Index>(box.size()) != n)
      throw SchemaError("invariant_box", "expected " + std::to_string(n) + " [lo, hi] pairs");
    for (const auto& b : box) {
      if (!b.is_array() || b.size() != 2) throw SchemaError("invariant_box", "expected [lo, hi] pairs");
      const double lo = detail::json_number(b[0], "invariant_box"), hi = detail::json_number(b[1], "invariant_box");
      if (lo > hi) throw SchemaError("invariant_box", "lo > hi");
      m.invariant_box.emplace_back(lo, hi);
    }
  }
  return m;
}

inline nlohmann::json model_to_json(const PolytopicModel& m) {
  nlohmann::json doc;
  doc["name"] = m.description();
  doc["n1"] = m.n1();
  doc["n2"] = m.n2();
  auto verts = nlohmann::json::array();
  for (const auto& v : m.vertices()) {
    auto flat = nlohmann::json::array();
    const Matrix& e = v.entries();
    for (Index r = 0; r < e.rows(); ++r)
      for (Index c = 0; c < e.cols(); ++c) flat.push_back(e(r, c));
    verts.push_back(std::move(flat));
  }
  doc["vertices"] = std::move(verts);
  if (m.parameter) doc["parameter"] = *m.parameter;
  if (!m.invariant_box.empty()) {
    auto box = nlohmann::json::array();
    for (const auto& [lo, hi] : m.invariant_box) box.push_back({lo, hi});
    doc["invariant_box"] = std::move(box);
  }
  return doc;
}

inline PolytopicModel parse_model(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
  try {
    return model_from_json(doc);
  } catch (const InvalidPartition& e) {
    throw SchemaError("n1", e.what());
  } catch (const InvalidModel& e) {
    throw SchemaError("vertices", e.what());
  }
}

inline PolytopicModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

inline void save_model(const PolytopicModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidParameter("cannot write '" + path + "'");
  // max_digits10 output from the serializer round-trips doubles exactly.
  out << model_to_json(m).dump(2) << '\n';
}

}  // namespace twocon

#endif  // TWOCON_MODELS_HPP
