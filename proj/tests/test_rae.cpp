#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "pbgeo/learn/resnet.hpp"
#include "pbgeo/rae.hpp"

using namespace pbgeo;

namespace {

Vec v(std::initializer_list<double> xs) {
  Vec r(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) r(i++) = x;
  return r;
}

Vec randn(int n, std::mt19937_64& rng, double s = 1.0) {
  std::normal_distribution<double> g(0.0, s);
  Vec r(n);
  for (int i = 0; i < n; ++i) r(i) = g(rng);
  return r;
}

PullbackSpace learned_space(ChartKind chart, std::mt19937_64& rng, int d = 2) {
  auto net = InvertibleResNet::random(d, 3, 5, 0.8, 10, rng, 0.5);
  for (auto& b : net.blocks()) b.b1 = randn(5, rng, 0.2);
  return PullbackSpace::of(CompositeDiffeo(randn(d, rng, 0.2), Mat::Identity(d, d),
                                           std::make_shared<const InvertibleResNet>(net), chart, d));
}

}  // namespace

TEST(GramSchmidt, Examples) {
  auto id = PullbackSpace::of(CompositeDiffeo::translation(v({0, 0})));
  auto out = gram_schmidt_pb(id, v({0, 0}), {v({1, 0}), v({1, 1})});
  EXPECT_NEAR((out[0] - v({1, 0})).norm(), 0.0, 1e-15);
  EXPECT_NEAR((out[1] - v({0, 1})).norm(), 0.0, 1e-15);
  out = gram_schmidt_pb(id, v({0, 0}), {v({0, 1}), v({-1, 0})});
  EXPECT_NEAR((out[0] - v({0, 1})).norm(), 0.0, 1e-15);
  EXPECT_NEAR((out[1] - v({-1, 0})).norm(), 0.0, 1e-15);

  std::mt19937_64 rng(1);
  auto s = learned_space(ChartKind::Hyperboloid, rng, 3);
  Vec z = randn(3, rng, 0.3);
  std::vector<Vec> in{randn(3, rng), randn(3, rng), randn(3, rng)};
  out = gram_schmidt_pb(s, z, in);
  Mat g = s.gram(z);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(out[i].dot(g * out[j]), i == j ? 1.0 : 0.0, 1e-10);
  // Span preservation: out[0] parallel to in[0], out[1] in span(in[0], in[1]).
  Mat a(3, 2);
  a << in[0], in[1];
  Vec coef = a.colPivHouseholderQr().solve(out[1]);
  EXPECT_NEAR((a * coef - out[1]).norm(), 0.0, 1e-8);

  try {
    gram_schmidt_pb(id, v({0, 0}), {v({1, 1}), v({2, 2})});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DependentInput);
  }
}

TEST(CoefficientMatrix, Examples) {
  auto id = PullbackSpace::of(CompositeDiffeo::translation(v({0, 0})));
  Vec z = v({1, -1});
  auto frame = standard_frame(id, z);
  Mat a = build_coefficient_matrix(id, z, frame, {z, v({3, 2}), v({0, 0})});
  EXPECT_EQ(a.row(0).norm(), 0.0);
  EXPECT_NEAR((a.row(1).transpose() - v({2, 3})).norm(), 0.0, 1e-15);
  EXPECT_NEAR((a.row(2).transpose() - v({-1, 1})).norm(), 0.0, 1e-15);

  std::mt19937_64 rng(2);
  auto s = learned_space(ChartKind::Stereographic, rng);
  frame = standard_frame(s, z);
  std::vector<Vec> data{randn(2, rng, 0.5), randn(2, rng, 0.5)};
  a = build_coefficient_matrix(s, z, frame, data);
  for (int i = 0; i < 2; ++i) {
    Vec rec = frame.matrix() * a.row(i).transpose();
    EXPECT_NEAR((rec - s.log(z, data[i])).norm(), 0.0, 1e-8);
  }
}

TEST(TangentSvd, Examples) {
  Vec u = v({0.6, 0.8, 0.0}), w = v({0.0, 1.0});
  Mat a = 5.0 * u * w.transpose();
  auto s = tangent_svd(a, 1);
  EXPECT_NEAR(s.sigma(0), 5.0, 1e-12);
  EXPECT_NEAR((s.W.col(0) - w).norm(), 0.0, 1e-12);
  EXPECT_NEAR((s.U.col(0) - u).norm(), 0.0, 1e-12);

  Mat b(2, 3);
  b << 3, 0, 0, 0, 0, -2;
  s = tangent_svd(b, 2);
  EXPECT_NEAR(s.sigma(0), 3.0, 1e-12);
  EXPECT_NEAR(s.sigma(1), 2.0, 1e-12);
  EXPECT_NEAR((s.U.transpose() * s.U - Mat::Identity(2, 2)).norm(), 0.0, 1e-10);
  EXPECT_NEAR((s.W.transpose() * s.W - Mat::Identity(2, 2)).norm(), 0.0, 1e-10);
  for (int l = 0; l < 2; ++l) {
    Eigen::Index k;
    s.W.col(l).cwiseAbs().maxCoeff(&k);
    EXPECT_GE(s.W(k, l), 0.0);
  }

  try {
    tangent_svd(a, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
  }
}

// Random rank-r candidates never beat the truncated SVD in Frobenius error.
TEST(TangentSvd, RandomSearchOracle) {
  std::mt19937_64 rng(3);
  Mat a(4, 3);
  for (int i = 0; i < 4; ++i) a.row(i) = randn(3, rng).transpose();
  for (int r = 1; r <= 2; ++r) {
    auto s = tangent_svd(a, r);
    const double best = (a - s.U * s.sigma.asDiagonal() * s.W.transpose()).norm();
    for (int k = 0; k < 10000; ++k) {
      Mat p(4, r), q(3, r);
      for (int j = 0; j < r; ++j) {
        p.col(j) = randn(4, rng);
        q.col(j) = randn(3, rng);
      }
      // Best scaling of the random factors for a fair comparison.
      Mat cand = p * q.transpose();
      const double alpha = (cand.array() * a.array()).sum() / cand.squaredNorm();
      EXPECT_GE((a - alpha * cand).norm(), best - 1e-12);
    }
  }
}

TEST(CurvatureCorrection, EuclideanMatchesSvd) {
  std::mt19937_64 rng(4);
  auto s = learned_space(ChartKind::Identity, rng);
  Vec z = v({0.1, 0.0});
  std::vector<Vec> data;
  for (int i = 0; i < 12; ++i) data.push_back(randn(2, rng, 0.6));
  auto frame = standard_frame(s, z);
  Mat a = build_coefficient_matrix(s, z, frame, data);
  auto svd = tangent_svd(a, 1);
  auto cd = curvature_corrected_directions(s, z, svd.U, frame, data);
  Mat expected = svd.sigma.asDiagonal() * svd.W.transpose();
  EXPECT_NEAR((cd.V - expected).norm(), 0.0, 1e-10);

  auto rae = fit_rae(s, data, z, 1, RaeMode::RAE);
  auto cc = fit_rae(s, data, z, 1, RaeMode::CCRAE);
  EXPECT_NEAR((rae.directions[0] - cc.directions[0]).norm(), 0.0, 1e-10);
  EXPECT_NEAR((rae.codes - cc.codes).norm(), 0.0, 1e-10);
}

TEST(CurvatureCorrection, SinglePointClosedForm) {
  // N = 1, r = 1: the objective is a weighted quadratic in V with minimizer
  // V = a / u (unique when all weights are positive), residual zero.
  std::mt19937_64 rng(5);
  auto s = learned_space(ChartKind::Stereographic, rng);
  Vec z = v({0.0, 0.1});
  std::vector<Vec> data{v({0.5, -0.3})};
  auto frame = standard_frame(s, z);
  auto p = build_cc_problem(s, z, frame, data);
  Mat U(1, 1);
  U << 0.7;
  Mat V = solve_cc(p, U);
  EXPECT_NEAR((V.row(0).transpose() - p.A.row(0).transpose() / 0.7).norm(), 0.0, 1e-10);
  EXPECT_NEAR(cc_objective(p, U, V), 0.0, 1e-20);
}

TEST(CurvatureCorrection, RandomSearchOracle) {
  std::mt19937_64 rng(6);
  auto s = PullbackSpace::of(CompositeDiffeo::chart_at(ChartKind::Stereographic, v({0, 0})));
  Vec z = v({0.1, 0.0});
  std::vector<Vec> data{v({0.9, 0.4}), v({-0.6, 0.7}), v({0.3, -1.1})};
  auto frame = standard_frame(s, z);
  Mat a = build_coefficient_matrix(s, z, frame, data);
  auto svd = tangent_svd(a, 1);
  auto p = build_cc_problem(s, z, frame, data);
  EXPECT_GT(p.kappa[0].maxCoeff(), 0.1);
  Mat V = solve_cc(p, svd.U);
  const double best = cc_objective(p, svd.U, V);
  const double uncorrected = cc_objective(p, svd.U, svd.sigma.asDiagonal() * svd.W.transpose());
  EXPECT_LE(best, uncorrected + 1e-10);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < 10000; ++k) {
    Mat c = V;
    const double scale = k % 2 ? 1e-3 : 1.0;
    for (int m = 0; m < 2; ++m) c(0, m) += scale * g(rng);
    EXPECT_GE(cc_objective(p, svd.U, c), best - 1e-9);
  }
}

TEST(Rae, EncodeDecodeExamples) {
  auto id = PullbackSpace::of(CompositeDiffeo::translation(v({0, 0})));
  Vec z = v({1, 1});
  std::vector<Vec> data{v({2, 1}), v({0, 2}), v({3, 3}), v({1, 0})};
  auto m = fit_rae(id, data, z, 2, RaeMode::RAE);
  EXPECT_EQ(rae_encode(m, z), Vec::Zero(2));
  EXPECT_EQ(rae_decode(m, Vec::Zero(2)), z);
  Vec x = v({-0.5, 4});
  Vec c = rae_encode(m, x);
  EXPECT_NEAR(c(0), (x - z).dot(m.directions[0]), 1e-14);
  EXPECT_NEAR((rae_decode(m, c) - x).norm(), 0.0, 1e-12);
  Vec code = v({0.3, -2});
  EXPECT_NEAR((rae_decode(m, code) - (z + 0.3 * m.directions[0] - 2 * m.directions[1])).norm(), 0.0, 1e-14);
  for (size_t i = 0; i < data.size(); ++i)
    EXPECT_NEAR((rae_encode(m, data[i]) - m.codes.row(static_cast<Eigen::Index>(i)).transpose()).norm(), 0.0, 1e-12);
}

TEST(Rae, FullRankRoundTrip) {
  std::mt19937_64 rng(7);
  for (ChartKind chart : {ChartKind::Hyperboloid, ChartKind::Stereographic}) {
    auto s = learned_space(chart, rng);
    Vec z = v({0.1, -0.1});
    std::vector<Vec> data;
    for (int i = 0; i < 10; ++i) data.push_back(randn(2, rng, 0.6));
    for (RaeMode mode : {RaeMode::RAE, RaeMode::CCRAE}) {
      auto m = fit_rae(s, data, z, 2, mode);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) EXPECT_NEAR(s.inner(z, m.directions[i], m.directions[j]), i == j, 1e-8);
      for (const Vec& x : data) EXPECT_NEAR((rae_project(m, x) - x).norm(), 0.0, 1e-5);
    }
  }
}

TEST(Rae, ExactRecoveryOnGeodesic) {
  std::mt19937_64 rng(8);
  for (ChartKind chart : {ChartKind::Identity, ChartKind::Hyperboloid, ChartKind::Stereographic}) {
    auto s = learned_space(chart, rng);
    Vec z = v({0.2, 0.3});
    Vec dir = v({0.6, -0.4});
    std::vector<Vec> data;
    for (double t : {-1.0, -0.6, -0.2, 0.3, 0.7, 1.2}) data.push_back(s.exp(z, t * dir));
    for (RaeMode mode : {RaeMode::RAE, RaeMode::CCRAE}) {
      auto m = fit_rae(s, data, z, 1, mode);
      for (const Vec& x : data) EXPECT_NEAR((rae_project(m, x) - x).norm(), 0.0, 1e-5);
      Vec code = v({0.37});
      EXPECT_NEAR((rae_encode(m, rae_decode(m, code)) - code).norm(), 0.0, 1e-6);
    }
  }
}

TEST(Rae, ReconstructionBoundedByTangentResidual) {
  // Flat pullback through an isometry: reconstruction error equals the
  // tangent-space low-rank residual.
  std::mt19937_64 rng(9);
  Mat o = Eigen::Rotation2Dd(0.4).toRotationMatrix();
  auto s = PullbackSpace::of(CompositeDiffeo(v({0.5, 0}), o, nullptr, ChartKind::Identity, 2));
  Vec z = v({0, 0});
  std::vector<Vec> data;
  for (int i = 0; i < 20; ++i) data.push_back(randn(2, rng) .cwiseProduct(v({1.0, 0.1})));
  auto m = fit_rae(s, data, z, 1, RaeMode::RAE);
  for (size_t i = 0; i < data.size(); ++i) {
    Vec lg = s.log(z, data[i]);
    const double res = (lg - m.codes(static_cast<Eigen::Index>(i), 0) * m.directions[0]).norm();
    EXPECT_LE((rae_project(m, data[i]) - data[i]).norm(), res + 1e-12);
  }
}
