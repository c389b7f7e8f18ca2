// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "twocon/oracle.hpp"
#include "twocon/repro.hpp"
#include "twocon/sweep.hpp"

using namespace twocon;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " FAIL:" << what << ";";
    }
  }
};

// Every certified report seen anywhere, re-verified by criterion 7.
std::vector<std::pair<CertificationReport, PolytopicModel>> g_certified;

CertificationReport keep(const CertificationReport& r, const PolytopicModel& m) {
  if (r.verdict == Verdict::Certified) g_certified.emplace_back(r, m);
  return r;
}

double threshold(const ModelFamily& fam, Method m, double lo, double hi) {
  const auto r = bisect_threshold(fam, m, lo, hi);
  return r.threshold.value_or(std::nan(""));
}

bool near(double got, double want, double tol) { return std::abs(got - want) <= tol + 1e-12; }

std::mt19937 rng(2024);

Matrix random_matrix(Index r, Index c, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

Matrix shift_stable(Matrix a, double margin) {
  Eigen::EigenSolver<Matrix> es(a, false);
  a -= (es.eigenvalues().real().maxCoeff() + margin) * Matrix::Identity(a.rows(), a.cols());
  return a;
}

// Largest real part over all vertex compounds; >= 0 rules out any strict
// common Lyapunov certificate.
double max_vertex_abscissa(const PolytopicModel& m) {
  double worst = -1e300;
  for (const auto& v : m.vertices()) {
    Eigen::EigenSolver<Matrix> es(second_additive_compound(v.entries()), false);
    worst = std::max(worst, es.eigenvalues().real().maxCoeff());
  }
  return worst;
}

// ---------------------------------------------------------------------------

void c1(Outcome& o) {
  Matrix m4(16, 6);
  m4 << 0, 0, 0, 0, 0, 0,
        1, 0, 0, 0, 0, 0,
        0, 1, 0, 0, 0, 0,
        0, 0, 1, 0, 0, 0,
        -1, 0, 0, 0, 0, 0,
        0, 0, 0, 0, 0, 0,
        0, 0, 0, 1, 0, 0,
        0, 0, 0, 0, 1, 0,
        0, -1, 0, 0, 0, 0,
        0, 0, -1, 0, 0, 0,
        0, 0, 0, 0, 0, 0,
        0, 0, 0, 0, 0, 1,
        0, 0, 0, -1, 0, 0,
        0, 0, 0, 0, -1, 0,
        0, 0, 0, 0, 0, -1,
        0, 0, 0, 0, 0, 0;
  Matrix l4 = Matrix::Zero(6, 16);
  l4(0, 1) = l4(1, 2) = l4(2, 3) = l4(3, 6) = l4(4, 7) = l4(5, 11) = 1;
  const auto t0 = std::chrono::steady_clock::now();
  const Matrix m = build_M(4), l = build_L(4);
  const double us = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
  o.require(m == m4, "M_4 differs");
  o.require(l == l4, "L_4 differs");
  o.require(us < 1000.0, "slower than 1 ms");
  if (m != m4) {
    // Diagnose: does build_M satisfy vec(X) = M vec_skew(X), and where does it differ?
    const Matrix x = random_matrix(4, 4);
    const Matrix skew = x - x.transpose();
    o.detail << " build_M vec identity err " << (vec_row(skew) - m * vec_skew(skew)).cwiseAbs().maxCoeff()
             << ", printed M_4 err " << (vec_row(skew) - m4 * vec_skew(skew)).cwiseAbs().maxCoeff() << ";";
    o.detail << " differing rows (1-based):";
    for (Index r = 0; r < 16; ++r)
      if (m.row(r) != m4.row(r)) o.detail << " " << r + 1;
    o.detail << ";";
  }
  o.detail << " build time " << us << " us;";
}

void c2(Outcome& o) {
  double worst_entry = 0.0, worst_spec = 0.0;
  int cases = 0;
  for (int t = 0; t < 50; ++t) {
    const Index n = 4 + t % 4;
    const Matrix a = random_matrix(n, n);
    const Matrix a2 = second_additive_compound(a);
    Eigen::EigenSolver<Matrix> es(a, false);
    std::vector<std::complex<double>> sums;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) sums.push_back(es.eigenvalues()(i) + es.eigenvalues()(j));
    for (Index n1 = 1; n1 < n; ++n1) {
      const auto d = decompose(PartitionedMatrix(a, n1, n - n1));
      const Matrix s = permutation_to_compound(d);
      const Matrix acal = d.assemble();
      worst_entry = std::max(worst_entry, (s.transpose() * a2 * s - acal).cwiseAbs().maxCoeff());
      Eigen::EigenSolver<Matrix> ec(acal, false);
      std::vector<std::complex<double>> got(ec.eigenvalues().data(), ec.eigenvalues().data() + ec.eigenvalues().size());
      // Greedy matching of the two multisets.
      std::vector<bool> used(sums.size(), false);
      for (const auto& g : got) {
        double best = 1e300;
        std::size_t bi = 0;
        for (std::size_t k = 0; k < sums.size(); ++k)
          if (!used[k] && std::abs(g - sums[k]) < best) best = std::abs(g - sums[k]), bi = k;
        used[bi] = true;
        worst_spec = std::max(worst_spec, best);
      }
      ++cases;
    }
  }
  o.require(worst_entry <= 1e-12, "S^T A2 S != Acal");
  o.require(worst_spec <= 1e-9, "spectrum mismatch");
  o.detail << " " << cases << " partitions, max entry err " << worst_entry << ", max eig err " << worst_spec << ";";
}

void c3(Outcome& o) {
  for (double k : {0.2, 0.5, 0.755}) {
    const auto ds = hull_vertices(Example::Multistable4, k).decompositions();
    const double g1 = gamma1(ds).gamma, g2 = gamma2(ds).gamma;
    o.require(near(g1, 0.5, 1e-4), "gamma1 at k=" + std::to_string(k));
    o.require(near(g2, k / 2, 1e-4), "gamma2 at k=" + std::to_string(k));
    o.detail << " k=" << k << ": g1=" << g1 << " g2=" << g2 << ";";
  }
}

void c4(Outcome& o) {
  const auto fam = builtin_family(Example::Multistable4);
  const auto& f1 = repro::fixture("1", "thm1 threshold k*");
  const auto& f2 = repro::fixture("1", "thm2 threshold k*");
  const double t1 = threshold(fam, Method::Thm3, 0.0, 1.0), t2 = threshold(fam, Method::Thm4, 0.0, 1.0);
  o.require(near(t1, f1.reference, f1.tolerance), "thm1 k*");
  o.require(near(t2, f2.reference, f2.tolerance), "thm2 k*");
  o.detail << " thm1 k*=" << t1 << " thm2 k*=" << t2 << ";";
  for (double k : {0.3, 0.6, 0.7}) {
    const auto m = fam(k);
    keep(certify_thm1(m), m);
    keep(certify_thm2(m), m);
  }
  int certified = 0;
  for (int i = 1; i <= 10; ++i) {
    const double k = 0.1 * i;
    const auto m = fam(k);
    const auto r = keep(certify_direct(m), m);
    if (r.verdict == Verdict::Certified) ++certified;
    else o.detail << " direct not certified at k=" << k << " (max eig " << r.condition_value
                  << ", vertex compound spectral abscissa " << max_vertex_abscissa(m) << ");";
  }
  o.require(certified == 10, "direct grid k=0.1..1.0");
  o.detail << " direct certified " << certified << "/10;";
}

void c5(Outcome& o) {
  for (double b : {0.9, 1.2}) {
    const auto ds = hull_vertices(Example::Thomas4, b).decompositions();
    const double g1 = gamma1(ds).gamma, g2 = gamma2(ds).gamma, want = 1.0 / (std::sqrt(2.0) * b);
    o.require(near(g1, want, 1e-3) && near(g2, want, 1e-3), "gains at b=" + std::to_string(b));
    o.detail << " b=" << b << ": g1=" << g1 << " g2=" << g2 << ";";
  }
  const auto fam = builtin_family(Example::Thomas4, HullKind::InvariantBox);
  const auto& f1 = repro::fixture("thomas4", "thm1 threshold b*");
  const auto& f2 = repro::fixture("thomas4", "thm2 threshold b*");
  const auto& fd = repro::fixture("thomas4", "direct threshold b*");
  const double t1 = threshold(fam, Method::Thm3, 0.6, 1.2), t2 = threshold(fam, Method::Thm4, 0.6, 1.2);
  const double td = threshold(fam, Method::Direct, 0.3, 1.2);
  o.require(near(t1, f1.reference, f1.tolerance), "thm1 b*");
  o.require(near(t2, f2.reference, f2.tolerance), "thm2 b*");
  o.require(near(td, fd.reference, fd.tolerance), "direct b*");
  o.detail << " thm1 b*=" << t1 << " thm2 b*=" << t2 << " direct b*=" << td << ";";
  if (!near(td, fd.reference, fd.tolerance))
    o.detail << " vertex compound spectral abscissa at b=" << fd.reference << ": "
             << max_vertex_abscissa(fam(fd.reference)) << " (cube hull " 
             << max_vertex_abscissa(hull_vertices(Example::Thomas4, fd.reference)) << ");";
  for (double b : {0.9, 1.0}) {
    const auto m = fam(b);
    keep(certify_thm1(m), m);
    keep(certify_thm2(m), m);
    keep(certify_direct(m), m);
  }
}

void c6(Outcome& o) {
  const auto fam = builtin_family(Example::Thomas3, HullKind::InvariantBox);
  for (double b : {0.9, 1.2}) {
    const auto r = keep(certify_n3(fam(b)), fam(b));
    const double gs = r.gamma2 ? r.gamma2->gamma : std::nan("");
    o.require(near(gs, 1.0 / (2 * b), 1e-3), "gamma_s at b=" + std::to_string(b));
    o.detail << " b=" << b << ": gamma_s=" << gs << ";";
  }
  const auto& fm = repro::fixture("thomas3", "n3 threshold b*");
  const auto& fd = repro::fixture("thomas3", "direct threshold b*");
  const double tm = threshold(fam, Method::N3Special, 0.3, 1.5), td = threshold(fam, Method::Direct, 0.3, 1.5);
  o.require(near(tm, fm.reference, fm.tolerance), "modular b*");
  o.require(near(td, fd.reference, fd.tolerance), "direct b*");
  o.detail << " modular b*=" << tm << " direct b*=" << td << ";";
  const auto m = fam(0.6);
  keep(certify_n3(m), m);
  keep(certify_thm1(m), m);
  keep(certify_direct(m), m);
}

void c7(Outcome& o) {
  int random_certified = 0;
  for (int t = 0; t < 100; ++t) {
    const Index n = 3 + t % 3;
    const Index n1 = 1 + t % (n - 1);
    const Matrix center = random_matrix(n, n);
    std::vector<PartitionedMatrix> vs;
    const int nv = 2 + t % 3;
    for (int v = 0; v < nv; ++v) vs.emplace_back(shift_stable(center + 0.3 * random_matrix(n, n), 0.3), n1, n - n1);
    const PolytopicModel m(vs, "random " + std::to_string(t));
    for (auto meth : {Method::Thm1, Method::Thm2, Method::Direct}) {
      if (keep(certify(m, meth), m).verdict == Verdict::Certified) ++random_certified;
    }
  }
  int failures = 0;
  for (const auto& [r, m] : g_certified)
    if (!verify_certificate(r, m, 1e-9)) ++failures;
  o.require(failures == 0, std::to_string(failures) + " certified reports fail verification");
  o.require(random_certified > 0, "no random model was certified");
  o.detail << " " << g_certified.size() << " certified reports re-verified (" << random_certified
           << " from random models), " << failures << " failures;";
}

void c8(Outcome& o) {
  double worst = -1e300;
  for (int i = 1; i <= 7; ++i) {
    const double k = 0.1 * i;
    const auto pt = curve_point(hull_vertices(Example::Multistable4, k), k);
    worst = std::max(worst, pt.Gamma1 - pt.Gamma2);
    o.require(pt.Gamma1 <= pt.Gamma2 + 1e-6, "Gamma1 > Gamma2 at k=" + std::to_string(k));
  }
  o.detail << " max(Gamma1 - Gamma2) = " << worst << ";";
}

void c9(Outcome& o) {
  int ok = 0;
  for (int t = 0; t < 20; ++t) {
    const Index n1 = 2 + t % 2, n2 = 2 + (t / 2) % 2, n = n1 + n2;
    Matrix a = Matrix::Zero(n, n);
    a.topLeftCorner(n1, n1) = shift_stable(random_matrix(n1, n1), 0.3);
    a.bottomRightCorner(n2, n2) = shift_stable(random_matrix(n2, n2), 0.3);
    a.bottomLeftCorner(n2, n1) = random_matrix(n2, n1, 2.0);
    const auto m = PolytopicModel::linear(PartitionedMatrix(a, n1, n2));
    const auto d = m.decompositions().front();
    if (!oracle::hurwitz(d.a11c2) || !oracle::hurwitz(d.a22c2) || !oracle::hurwitz(d.ksum)) {
      o.require(false, "generated cascade has a non-Hurwitz diagonal block");
      continue;
    }
    const auto r = keep(certify_thm1(m), m);
    if (r.verdict == Verdict::Certified && r.condition_value <= 1e-6) ++ok;
    else o.detail << " cascade " << t << ": " << to_string(r.verdict) << " objective " << r.condition_value << ";";
  }
  o.require(ok == 20, "cascades not all tight");
  Matrix a(4, 4);
  a << -1, 0.5, 0, 0,
       -0.5, -1, 0, 0,
       20, 10, -1, 0.5,
       -10, 20, -0.5, -1;
  const auto m = PolytopicModel::linear(PartitionedMatrix(a, 2, 2));
  const auto r1 = keep(certify_thm1(m), m), r2 = keep(certify_thm2(m), m);
  o.require(r1.verdict == Verdict::Certified, "strong cascade not certified by thm1");
  o.require(r2.verdict == Verdict::NotCertified, "strong cascade certified by thm2");
  o.detail << " " << ok << "/20 tight; strong cascade thm1 " << r1.condition_value << " ("
           << to_string(r1.verdict) << "), thm2 " << r2.condition_value << " (" << to_string(r2.verdict) << ");";
}

void c10(Outcome& o) {
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Index n = 3 + t % 5, n1 = 1 + t % (n - 1);
    const Matrix x = random_matrix(n, n);
    worst = std::max(worst, oracle::matrix_ode_check(PartitionedMatrix(random_matrix(n, n), n1, n - n1),
                                                     Matrix(x - x.transpose()), 1.0));
  }
  o.require(worst < 1e-6, "matrix ODE deviation");
  o.detail << " max ODE deviation " << worst << ";";

  const auto tr = simulate(ExampleSystem(Example::Multistable4, 1.1), Vector::Constant(4, 0.1), 500.0,
                           {0.01, 1e6, 10});
  const double amp = trailing_amplitude(tr);
  o.require(oscillates(tr), "no sustained oscillation at k=1.1");
  o.detail << " k=1.1 trailing amplitude " << amp << ";";

  const ExampleSystem th(Example::Thomas3, 0.58);
  const Vector xp = find_equilibrium(th, Vector::Constant(3, 1.5));
  std::uniform_real_distribution<double> u(-1.0 / 0.58, 1.0 / 0.58);
  int plus = 0, minus = 0, other = 0;
  for (int s = 0; s < 10; ++s) {
    Vector x0(3);
    for (Index i = 0; i < 3; ++i) x0(i) = u(rng);
    const Vector xf = simulate(th, x0, 300.0).final_state();
    if ((xf - xp).norm() < 1e-6) ++plus;
    else if ((xf + xp).norm() < 1e-6) ++minus;
    else ++other;
  }
  o.require(other == 0, "Thomas3 trajectories missed both equilibria");
  o.detail << " thomas3 b=0.58: +x* " << plus << ", -x* " << minus << ", other " << other << ";";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {"1 exact M4/L4 fixtures", c1},
      {"2 structural equivalence", c2},
      {"3 multistable gains", c3},
      {"4 multistable thresholds and direct grid", c4},
      {"5 thomas4 gains and thresholds", c5},
      {"6 thomas3 gains and thresholds", c6},
      {"7 certificate soundness", c7},
      {"8 conservatism ordering", c8},
      {"9 cascade tightness", c9},
      {"10 dynamics consistency", c10},
  };
  const double limits[] = {1e9, 5.0, 1e9, 60.0, 120.0, 30.0, 1e9, 1e9, 1e9, 1e9};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(s < limits[i], "over time budget");
    if (!o.pass) ++failed;
    std::printf("%s criterion %-42s %8.2f s |%s\n", o.pass ? "PASS" : "FAIL", criteria[i].first, s,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}
