#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "pbgeo/learn/resnet.hpp"
#include "pbgeo/pullback.hpp"

using namespace pbgeo;
using std::numbers::pi;

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

PullbackSpace learned_space(ChartKind chart, std::mt19937_64& rng) {
  auto net = InvertibleResNet::random(2, 3, 5, 0.8, 10, rng, 0.5);
  for (auto& b : net.blocks()) b.b1 = randn(5, rng, 0.2);
  return PullbackSpace::of(
      CompositeDiffeo(v({0.2, -0.1}), Mat::Identity(2, 2), std::make_shared<const InvertibleResNet>(net), chart, 2));
}

// FD Jacobian oracle for the pullback Gram matrix.
Mat fd_gram(const PullbackSpace& s, const Vec& x) {
  const int d = s.dim();
  const double h = 1e-6;
  Mat j(s.model().ambient_dim(), d);
  for (int k = 0; k < d; ++k) {
    Vec e = Vec::Unit(d, k);
    j.col(k) = (s.phi().forward(x + h * e) - s.phi().forward(x - h * e)) / (2 * h);
  }
  return j.transpose() * s.model().metric_matrix() * j;
}

}  // namespace

TEST(PbInner, Examples) {
  auto s = PullbackSpace::of(CompositeDiffeo::translation(v({0, 0})));
  EXPECT_EQ(s.inner(v({1, 2}), v({1, 3}), v({-2, 5})), 13.0);
  EXPECT_EQ(s.inner(v({1, 2}), v({0, 0}), v({0, 0})), 0.0);
  std::mt19937_64 rng(1);
  for (ChartKind chart : {ChartKind::Identity, ChartKind::Hyperboloid, ChartKind::Stereographic}) {
    auto ls = learned_space(chart, rng);
    for (int k = 0; k < 10; ++k) {
      Vec x = randn(2, rng);
      Mat g = ls.gram(x), f = fd_gram(ls, x);
      EXPECT_LT((g - f).norm(), 1e-4 * g.norm());
      Vec a = randn(2, rng), b = randn(2, rng);
      EXPECT_NEAR(ls.inner(x, a, b), a.dot(g * b), 1e-10);
      EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat>(g).eigenvalues().minCoeff(), 0.0);
    }
  }
}

TEST(PbMappings, FlatIdentity) {
  auto s = PullbackSpace::of(CompositeDiffeo::translation(v({3, -1})));
  Vec x = v({1, 2}), y = v({-2, 0.5});
  EXPECT_NEAR((s.geodesic(x, y, 0.3) - (0.7 * x + 0.3 * y)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((s.log(x, y) - (y - x)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((s.exp(x, v({1, 1})) - v({2, 3})).norm(), 0.0, 1e-15);
  EXPECT_NEAR(s.distance(x, y), (x - y).norm(), 1e-15);
  EXPECT_NEAR((s.transport(x, y, v({4, 5})) - v({4, 5})).norm(), 0.0, 1e-15);
  EXPECT_EQ(s.distance(x, x), 0.0);
}

TEST(PbMappings, GeodesicEndpoints) {
  std::mt19937_64 rng(2);
  for (ChartKind chart : {ChartKind::Identity, ChartKind::Hyperboloid, ChartKind::Stereographic}) {
    auto s = learned_space(chart, rng);
    Vec x = randn(2, rng, 0.5), y = randn(2, rng, 0.5);
    EXPECT_NEAR((s.geodesic(x, y, 0.0) - x).norm(), 0.0, 1e-6);
    EXPECT_NEAR((s.geodesic(x, y, 1.0) - y).norm(), 0.0, 1e-6);
  }
}

// Reflection symmetric data about the vertical axis through z = (0, 1).
TEST(PbMappings, HyperbolicMidpointOnAxis) {
  auto s = PullbackSpace::of(CompositeDiffeo::chart_at(ChartKind::Hyperboloid, v({0, 1})));
  Vec x = v({-1.3, 2.4}), y = v({1.3, 2.4});
  Vec mid = s.geodesic(x, y, 0.5);
  EXPECT_NEAR(mid(0), 0.0, 1e-12);
}

TEST(PbMappings, Conjugation) {
  std::mt19937_64 rng(3);
  for (ChartKind chart : {ChartKind::Identity, ChartKind::Hyperboloid, ChartKind::Stereographic}) {
    auto s = learned_space(chart, rng);
    for (int k = 0; k < 30; ++k) {
      Vec x = randn(2, rng, 0.6), y = randn(2, rng, 0.6), w = randn(2, rng);
      EXPECT_NEAR((s.exp(x, s.log(x, y)) - y).norm(), 0.0, 1e-6);
      EXPECT_EQ(s.distance(x, y), s.model().distance(s.phi().forward(x), s.phi().forward(y)));
      EXPECT_NEAR(s.distance(x, y), s.distance(y, x), 1e-12);
      EXPECT_NEAR(s.norm(y, s.transport(x, y, w)), s.norm(x, w), 1e-6);
      EXPECT_NEAR(s.norm(x, s.log(x, y)), s.distance(x, y), 1e-8);
    }
  }
}

TEST(Beta, Examples) {
  EXPECT_EQ(beta_geo(0.0, 0.37), 0.37);
  EXPECT_NEAR(beta_geo(-1.0, 0.5), 0.44340944, 1e-8);
  EXPECT_NEAR(beta_geo(-1.0, 0.5), std::sinh(0.5) / std::sinh(1.0), 1e-15);
  for (double k : {-5.0, -1.0, 1e-9, 2.0, 9.0}) EXPECT_NEAR(beta_geo(k, 1.0), 1.0, 1e-12);
  EXPECT_EQ(beta_logpoint(0.0), 1.0);
  EXPECT_NEAR(beta_logpoint(-1.0), 0.85091813, 1e-8);
  EXPECT_LT(std::abs(beta_logpoint(1e-10) - 1.0), 1e-9);
  EXPECT_EQ(beta_exp(0.0), 1.0);
  EXPECT_NEAR(beta_exp(-1.0), 1.17520119, 1e-8);
  for (double k : {-3.0, -1e-9, 1e-9, 0.5, 9.0}) EXPECT_NEAR(beta_exp(k), 1.0 / beta_logpoint(k), 1e-12);
}

TEST(Beta, KappaTooLarge) {
  for (double k : {pi * pi, pi * pi - 1e-10, 20.0}) {
    try {
      beta_geo(k, 0.5);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::KappaTooLarge);
    }
    EXPECT_THROW(beta_logpoint(k), Error);
    EXPECT_THROW(beta_exp(k), Error);
  }
  EXPECT_NO_THROW(beta_geo(pi * pi - 1e-6, 0.5));
}

TEST(PbSpectrum, Examples) {
  std::mt19937_64 rng(4);
  auto flat = learned_space(ChartKind::Identity, rng);
  auto sflat = flat.curvature_spectrum(v({0.1, 0.2}), v({1, -1}));
  EXPECT_EQ(sflat.eigenvalues.cwiseAbs().maxCoeff(), 0.0);

  auto sph = learned_space(ChartKind::Stereographic, rng);
  Vec x = v({0.3, 0.1}), y = v({-0.4, 0.6});
  const double delta = sph.distance(x, y);
  auto spec = sph.curvature_spectrum(x, sph.log(x, y));
  EXPECT_NEAR(spec.eigenvalues(0), 0.0, 1e-10);
  EXPECT_NEAR(spec.eigenvalues(1), delta * delta, 1e-8);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(sph.inner(x, spec.frame[i], spec.frame[j]), i == j ? 1.0 : 0.0, 1e-6);
}

// Curvature of the pullback metric is the conjugated model curvature.
TEST(PbSpectrum, CurvaturePullbackOracle) {
  std::mt19937_64 rng(5);
  for (ChartKind chart : {ChartKind::Hyperboloid, ChartKind::Stereographic}) {
    auto s = learned_space(chart, rng);
    for (int k = 0; k < 10; ++k) {
      Vec x = randn(2, rng, 0.5), w = randn(2, rng);
      auto spec = s.curvature_spectrum(x, w);
      const Vec p = s.phi().forward(x);
      const Vec pw = s.phi().pushforward(x, w);
      for (int j = 0; j < 2; ++j) {
        const Vec r = s.model().curvature_operator(p, s.phi().pushforward(x, spec.frame[j]), pw);
        const Vec pulled = s.phi().pullback_vector(x, r);
        EXPECT_LT((pulled - spec.eigenvalues(j) * spec.frame[j]).norm(), 1e-5);
      }
    }
  }
}

TEST(PbSpectrum, TranslationInvariance) {
  Vec c = v({0.5, 0.5});
  auto s1 = PullbackSpace::of(CompositeDiffeo::chart_at(ChartKind::Stereographic, c));
  auto s2 = PullbackSpace::of(CompositeDiffeo::chart_at(ChartKind::Stereographic, c + v({2, -1})));
  Vec x = v({0.2, 0.9}), w = v({0.4, -0.3});
  auto a = s1.curvature_spectrum(x, w);
  auto b = s2.curvature_spectrum(x + v({2, -1}), w);
  EXPECT_NEAR((a.eigenvalues - b.eigenvalues).norm(), 0.0, 1e-12);
}

TEST(Lipschitz, Examples) {
  auto iso = PullbackSpace::of(CompositeDiffeo::translation(v({1, 1})));
  auto l = local_lipschitz(iso, v({0.3, 0.3}));
  EXPECT_NEAR(l.fwd, 1.0, 1e-15);
  EXPECT_NEAR(l.inv, 1.0, 1e-15);

  Mat a = Mat::Zero(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 1.0;
  auto lin = PullbackSpace::of(CompositeDiffeo(Vec::Zero(2), Mat::Identity(2, 2),
                                               std::make_shared<const LinearMap>(a), ChartKind::Identity, 2));
  l = local_lipschitz(lin, v({1, 1}));
  EXPECT_NEAR(l.fwd, 2.0, 1e-14);
  EXPECT_NEAR(l.inv, 1.0, 1e-14);

  std::mt19937_64 rng(6);
  auto ls = learned_space(ChartKind::Hyperboloid, rng);
  for (int k = 0; k < 20; ++k) {
    l = local_lipschitz(ls, randn(2, rng));
    EXPECT_GE(l.fwd * l.inv, 1.0 - 1e-12);
  }

  Mat sing = Mat::Identity(2, 2);
  sing(1, 1) = 1e-8;
  auto sp = PullbackSpace::of(CompositeDiffeo(Vec::Zero(2), Mat::Identity(2, 2),
                                              std::make_shared<const LinearMap>(sing), ChartKind::Identity, 2));
  try {
    local_lipschitz(sp, v({0, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularJacobian);
  }
}

TEST(StabilityBound, Examples) {
  auto iso = PullbackSpace::of(CompositeDiffeo::translation(v({0, 0})));
  Vec x = v({0, 0}), y = v({2, 1});
  for (double t : {0.0, 0.3, 0.7, 1.0}) {
    auto r = geodesic_stability_bound(iso, x, y, Endpoint::Start, t);
    EXPECT_NEAR(r.bound, 1.0 - t, 1e-12);
    EXPECT_NEAR(r.bound, r.lipschitz_inv * r.beta_factor * r.lipschitz_fwd, 1e-15);
    EXPECT_NEAR(geodesic_stability_bound(iso, x, y, Endpoint::End, t).bound, t, 1e-12);
  }
  auto hyp = PullbackSpace::of(CompositeDiffeo::chart_at(ChartKind::Hyperboloid, v({0, 1})));
  EXPECT_EQ(geodesic_stability_bound(hyp, v({-1, 1}), v({1, 2}), Endpoint::Start, 1.0).bound, 0.0);
  for (double t : {0.1, 0.5, 0.9}) {
    auto r = geodesic_stability_bound(hyp, v({-1, 1}), v({1, 2}), Endpoint::Start, t);
    EXPECT_LE(r.beta_factor, 1.0 - t);
    EXPECT_GE(r.beta_factor, 0.0);
  }
}

TEST(BarycentreBound, Examples) {
  auto iso = PullbackSpace::of(CompositeDiffeo::translation(v({0, 0})));
  std::vector<Vec> data{v({0, 0}), v({1, 2}), v({-3, 1})};
  EXPECT_NEAR(barycentre_stability_bound(iso, data, v({-0.5, 0.7})), 1.0, 1e-12);

  auto sph = PullbackSpace::of(CompositeDiffeo::chart_at(ChartKind::Stereographic, v({0, 0})));
  Vec xs = v({0, 0});
  Vec xi = v({0.4, 0});
  const double delta = sph.distance(xi, xs);
  const double expected = local_lipschitz(sph, xs).inv * beta_logpoint(delta * delta) * local_lipschitz(sph, xi).fwd;
  EXPECT_NEAR(barycentre_stability_bound(sph, {xi}, xs), expected, 1e-10);

  // Curvature factor grows without bound as the distance approaches pi.
  double prev = 0.0;
  for (double r : {1.0, 3.0, 10.0, 100.0, 1000.0}) {
    const Vec x1 = v({r, 0});
    const double b = barycentre_stability_bound(sph, {x1}, xs) /
                     (local_lipschitz(sph, xs).inv * local_lipschitz(sph, x1).fwd);
    EXPECT_GT(b, prev);
    prev = b;
  }
  EXPECT_GT(prev, 100.0);
}

TEST(Reflection, Residual) {
  std::mt19937_64 rng(8);
  auto iso = PullbackSpace::of(CompositeDiffeo::translation(v({0, 0})));
  std::vector<std::pair<Vec, Vec>> pairs;
  for (int k = 0; k < 20; ++k) pairs.emplace_back(randn(2, rng, 0.3), randn(2, rng, 0.3));
  EXPECT_LT(geodesic_reflection_residual(iso, v({0.1, 0.1}), pairs), 1e-14);
  for (ChartKind chart : {ChartKind::Hyperboloid, ChartKind::Stereographic}) {
    auto s = learned_space(chart, rng);
    EXPECT_LT(geodesic_reflection_residual(s, v({0.1, 0.1}), pairs), 1e-6);
  }
}
