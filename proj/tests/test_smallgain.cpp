#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"
#include "twocon/models.hpp"
#include "twocon/smallgain.hpp"

using namespace twocon;

namespace {

// Block lower-triangular model (A12 = 0) with stable diagonal blocks.
PartitionedMatrix cascade(std::mt19937& rng, Index n1, Index n2, double coupling) {
  Matrix a = Matrix::Zero(n1 + n2, n1 + n2);
  a.topLeftCorner(n1, n1) = twocon::testing::random_stable(rng, n1, 0.5);
  a.bottomRightCorner(n2, n2) = twocon::testing::random_stable(rng, n2, 0.5);
  a.bottomLeftCorner(n2, n1) = coupling * twocon::testing::random_matrix(rng, n2, n1);
  return PartitionedMatrix(a, n1, n2);
}

}  // namespace

TEST(PolytopicModel, RejectsBadInput) {
  EXPECT_THROW(PolytopicModel({}, "empty"), InvalidModel);
  const PartitionedMatrix a(-Matrix::Identity(4, 4), 2, 2), b(-Matrix::Identity(4, 4), 1, 3);
  EXPECT_THROW(PolytopicModel({a, b}, "mixed"), InvalidModel);
}

TEST(Certify, MultistableBelowAndAboveThresholds) {
  const auto good = hull_vertices(Example::Multistable4, 0.7);
  for (auto m : {Method::Thm1, Method::Thm2}) {
    const auto r = certify(good, m);
    EXPECT_EQ(r.verdict, Verdict::Certified) << to_string(m) << ": " << r.message;
    EXPECT_TRUE(verify_certificate(r, good));
    EXPECT_EQ(r.method, m == Method::Thm1 ? Method::Thm3 : Method::Thm4);
  }
  const auto r2 = certify(hull_vertices(Example::Multistable4, 0.74), Method::Thm2);
  EXPECT_EQ(r2.verdict, Verdict::NotCertified);
  const auto r1 = certify(hull_vertices(Example::Multistable4, 0.74), Method::Thm1);
  EXPECT_EQ(r1.verdict, Verdict::Certified);
}

TEST(Certify, EveryMethodRefusesOscillatingRegime) {
  const auto m = hull_vertices(Example::Multistable4, 1.1);
  for (auto meth : {Method::Thm1, Method::Thm2, Method::Direct})
    EXPECT_NE(certify(m, meth).verdict, Verdict::Certified) << to_string(meth);
}

TEST(Certify, LinearModelUsesSingleVertexLabels) {
  Matrix a(4, 4);
  a << -2, 0.1, 0, 0, 0, -2, 0.1, 0, 0, 0, -2, 0.1, 0.1, 0, 0, -2;
  const auto m = PolytopicModel::linear(PartitionedMatrix(a, 2, 2));
  const auto r1 = certify(m, Method::Thm1);
  EXPECT_EQ(r1.method, Method::Thm1);
  EXPECT_EQ(r1.verdict, Verdict::Certified);
  EXPECT_EQ(certify(m, Method::Thm2).method, Method::Thm2);
}

TEST(Certify, TamperedCertificateFailsVerification) {
  const auto m = hull_vertices(Example::Multistable4, 0.7);
  auto r = certify(m, Method::Thm1);
  ASSERT_EQ(r.verdict, Verdict::Certified);
  Matrix& p = *r.lyapunov;
  p(0, 0) *= 1e-6;
  p(p.rows() - 1, 0) = p(0, p.rows() - 1) = 10.0;
  EXPECT_FALSE(verify_certificate(r, m));
  auto uncertified = r;
  uncertified.verdict = Verdict::NotCertified;
  EXPECT_FALSE(verify_certificate(uncertified, m));
}

TEST(Certify, PartitionedNeverWorseThanSingleGain) {
  for (double k : {0.1, 0.3, 0.5, 0.7}) {
    const auto m = hull_vertices(Example::Multistable4, k);
    EXPECT_LE(certify(m, Method::Thm1).condition_value, certify(m, Method::Thm2).condition_value + 1e-6);
  }
}

TEST(Certify, LambdaWindowIsStrict) {
  const auto r = certify(hull_vertices(Example::Multistable4, 0.5), Method::Thm2);
  ASSERT_EQ(r.verdict, Verdict::Certified);
  EXPECT_GT(r.lambda, r.lambda_window.first);
  EXPECT_LT(r.lambda, r.lambda_window.second);
}

TEST(Certify, PartitionedMultipliersAbovePartitionedGains) {
  const auto r = certify(hull_vertices(Example::Multistable4, 0.5), Method::Thm1);
  ASSERT_EQ(r.verdict, Verdict::Certified);
  EXPECT_GT(r.lambda1, r.partitioned->eta1sq);
  EXPECT_GT(r.lambda2, r.partitioned->eta2sq);
  EXPECT_GT(r.sigma, 0.0);
}

TEST(Certify, CascadesAreTight) {
  std::mt19937 rng(31);
  for (int t = 0; t < 6; ++t) {
    const auto m = PolytopicModel::linear(cascade(rng, 2 + t % 2, 2 + (t / 2) % 2, 1.0));
    const auto r = certify(m, Method::Thm1);
    EXPECT_EQ(r.verdict, Verdict::Certified) << r.message;
    EXPECT_LE(r.condition_value, 1e-6);
  }
}

TEST(Certify, StrongCascadeDefeatsSingleGain) {
  std::mt19937 rng(32);
  const auto m = PolytopicModel::linear(cascade(rng, 2, 2, 30.0));
  EXPECT_EQ(certify(m, Method::Thm1).verdict, Verdict::Certified);
  EXPECT_EQ(certify(m, Method::Thm2).verdict, Verdict::NotCertified);
}

TEST(Certify, ThreeDimensionalRoute) {
  const auto m = hull_vertices(Example::Thomas3, 2.0);
  const auto r = certify(m, Method::N3Special);
  EXPECT_EQ(r.verdict, Verdict::Certified) << r.message;
  EXPECT_TRUE(verify_certificate(r, m));
  EXPECT_EQ(certify(hull_vertices(Example::Thomas3, 0.4), Method::N3Special).verdict, Verdict::NotCertified);
  EXPECT_THROW(certify_n3(hull_vertices(Example::Multistable4, 0.5)), InvalidModel);
}

TEST(Certify, DirectRoute) {
  const auto m = hull_vertices(Example::Multistable4, 0.5);
  const auto r = certify(m, Method::Direct);
  ASSERT_EQ(r.verdict, Verdict::Certified) << r.message;
  EXPECT_LT(r.condition_value, -1e-9);
  EXPECT_TRUE(verify_certificate(r, m));
  EXPECT_GE(twocon::testing::min_sym_eig(*r.lyapunov), 1.0 - 1e-7);
}

TEST(Certify, DirectRefusesUnstableVertex) {
  Matrix a = -Matrix::Identity(3, 3);
  a(0, 0) = 2.0;
  const auto r = certify(PolytopicModel::linear(PartitionedMatrix(a, 1, 2)), Method::Direct);
  EXPECT_EQ(r.verdict, Verdict::NotCertified);
}

TEST(Certify, RandomStablePolytopesAreSound) {
  std::mt19937 rng(33);
  for (int t = 0; t < 15; ++t) {
    const Index n = 3 + t % 3;
    const Matrix center = twocon::testing::random_stable(rng, n, 1.0, 0.5);
    std::vector<PartitionedMatrix> vs;
    for (int v = 0; v < 3; ++v)
      vs.emplace_back(Matrix(center + 0.2 * twocon::testing::random_matrix(rng, n, n)), 1 + t % (n - 1),
                      n - 1 - t % (n - 1));
    const PolytopicModel m(vs, "random");
    for (auto meth : {Method::Thm1, Method::Thm2, Method::Direct}) {
      const auto r = certify(m, meth);
      if (r.verdict == Verdict::Certified) {
        EXPECT_TRUE(verify_certificate(r, m)) << t << " " << to_string(meth);
      }
    }
  }
}
