#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "pbgeo/diffeo.hpp"
#include "pbgeo/learn/resnet.hpp"

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

Mat random_orthogonal(int d, std::mt19937_64& rng) {
  Mat a(d, d);
  for (int j = 0; j < d; ++j) a.col(j) = randn(d, rng);
  Eigen::HouseholderQR<Mat> qr(a);
  return qr.householderQ() * Mat::Identity(d, d);
}

// Central differences of f at x along v with step h.
template <class F>
Vec central_diff(F f, const Vec& x, const Vec& dir, double h = 1e-5) {
  return (f(x + h * dir) - f(x - h * dir)) / (2.0 * h);
}

std::shared_ptr<const InvertibleResNet> small_net(int d, std::mt19937_64& rng) {
  auto net = InvertibleResNet::random(d, 4, 6, 0.8, 10, rng, 1.0);
  // Non-zero biases so the network is not odd-symmetric.
  for (auto& b : net.blocks()) {
    b.b1 = randn(6, rng, 0.3);
    b.b2 = randn(6, rng, 0.3);
    b.b3 = randn(d, rng, 0.1);
  }
  return std::make_shared<const InvertibleResNet>(net);
}

}  // namespace

TEST(Charts, HyperboloidExamples) {
  EXPECT_EQ(hyperboloid_chart_inverse(v({0, 0})), v({0, 0, 1}));
  EXPECT_NEAR((hyperboloid_chart_inverse(v({1})) - v({1, std::sqrt(2.0)})).norm(), 0.0, 1e-15);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> radius(0.0, 10.0);
  for (int k = 0; k < 200; ++k) {
    Vec x = randn(3, rng);
    x *= radius(rng) / x.norm();
    Vec p = hyperboloid_chart_inverse(x);
    EXPECT_TRUE(ModelManifold::hyperboloid(3).contains(p));
    EXPECT_NEAR((hyperboloid_chart_forward(p) - x).norm(), 0.0, 1e-12);
  }
}

TEST(Charts, StereographicExamples) {
  EXPECT_EQ(stereographic_chart_inverse(v({0, 0})), v({0, 0, -1}));
  EXPECT_EQ(stereographic_chart_inverse(v({1})), v({1, 0}));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> radius(0.0, 10.0);
  for (int k = 0; k < 200; ++k) {
    Vec x = randn(2, rng);
    x *= radius(rng) / x.norm();
    Vec p = stereographic_chart_inverse(x);
    EXPECT_TRUE(ModelManifold::sphere(2).contains(p));
    EXPECT_LT(p(2), 1.0);
    EXPECT_NEAR((stereographic_chart_forward(p) - x).norm(), 0.0, 1e-12 * (1.0 + x.squaredNorm()));
  }
  try {
    stereographic_chart_forward(v({0, 0, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PoleExcluded);
  }
}

TEST(Charts, JacobiansMatchFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    Vec x = randn(2, rng), dir = randn(2, rng);
    Vec fd = central_diff(hyperboloid_chart_inverse, x, dir);
    Vec an = hyperboloid_chart_inverse_jvp(x, dir);
    EXPECT_LT((fd - an).norm(), 1e-4 * an.norm());
    fd = central_diff(stereographic_chart_inverse, x, dir);
    an = stereographic_chart_inverse_jvp(x, dir);
    EXPECT_LT((fd - an).norm(), 1e-4 * an.norm());
    // Forward chart differential inverts the inverse-chart differential.
    Vec p = stereographic_chart_inverse(x);
    EXPECT_NEAR((stereographic_chart_forward_jvp(p, an) - dir).norm(), 0.0, 1e-10);
    p = hyperboloid_chart_inverse(x);
    EXPECT_NEAR((hyperboloid_chart_forward_jvp(p, hyperboloid_chart_inverse_jvp(x, dir)) - dir).norm(), 0.0, 1e-12);
  }
}

TEST(Composite, Examples) {
  Vec c = v({0.5, -1.0});
  auto phi = CompositeDiffeo::chart_at(ChartKind::Hyperboloid, c);
  EXPECT_EQ(phi.forward(c), v({0, 0, 1}));
  EXPECT_EQ(phi.codomain(), ModelManifold::product(ModelManifold::hyperboloid(2), 0));

  auto tr = CompositeDiffeo::translation(c);
  EXPECT_EQ(tr.forward(v({2, 2})), v({1.5, 3.0}));
  EXPECT_EQ(tr.pushforward(v({2, 2}), v({0.3, -4})), v({0.3, -4}));
  EXPECT_EQ(tr.pushforward(v({2, 2}), v({0, 0})), v({0, 0}));

  CompositeDiffeo split(Vec::Zero(3), Mat::Identity(3, 3), nullptr, ChartKind::Identity, 1);
  Vec m = split.forward(v({2.5, 0, 0}));
  EXPECT_EQ(m.tail(2), v({0, 0}));
  EXPECT_EQ(split.codomain().euclidean_dim(), 2);
}

TEST(Composite, RejectsNonOrthogonal) {
  Mat o = Mat::Identity(2, 2);
  o(0, 1) = 1e-6;
  try {
    CompositeDiffeo(Vec::Zero(2), o, nullptr, ChartKind::Identity, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

class CompositeProperty : public ::testing::TestWithParam<std::pair<ChartKind, int>> {};

TEST_P(CompositeProperty, InverseFiniteDifferenceLinearity) {
  const auto [chart, split] = GetParam();
  std::mt19937_64 rng(7 + split);
  const int d = 3;
  auto net = small_net(d, rng);
  CompositeDiffeo phi(randn(d, rng), random_orthogonal(d, rng), net, chart, split);
  const ModelManifold& m = phi.codomain();
  for (int k = 0; k < 30; ++k) {
    Vec x = phi.center() + randn(d, rng, 0.7);
    Vec p = phi.forward(x);
    ASSERT_TRUE(m.contains(p, 1e-10));
    EXPECT_NEAR((phi.inverse(p) - x).norm(), 0.0, 1e-6);

    Vec dir = randn(d, rng);
    Vec pf = phi.pushforward(x, dir);
    EXPECT_TRUE(m.is_tangent(p, pf, 1e-9));
    Vec fd = central_diff([&](const Vec& y) { return phi.forward(y); }, x, dir);
    EXPECT_LT((fd - pf).norm(), 1e-4 * pf.norm());
    EXPECT_NEAR((phi.inverse_pushforward(p, pf) - dir).norm(), 0.0, 1e-5);
    EXPECT_NEAR((phi.pullback_vector(x, pf) - dir).norm(), 0.0, 1e-8);

    Vec other = randn(d, rng);
    Vec lin = phi.pushforward(x, 2.0 * dir - 0.5 * other);
    EXPECT_NEAR((lin - (2.0 * pf - 0.5 * phi.pushforward(x, other))).norm(), 0.0, 1e-10);

    Mat j = phi.jacobian(x);
    EXPECT_NEAR((j * dir - pf).norm(), 0.0, 1e-10);
  }
}

INSTANTIATE_TEST_SUITE_P(Charts, CompositeProperty,
                         ::testing::Values(std::make_pair(ChartKind::Identity, 3),
                                           std::make_pair(ChartKind::Identity, 1),
                                           std::make_pair(ChartKind::Hyperboloid, 3),
                                           std::make_pair(ChartKind::Hyperboloid, 2),
                                           std::make_pair(ChartKind::Stereographic, 3),
                                           std::make_pair(ChartKind::Stereographic, 1)));
