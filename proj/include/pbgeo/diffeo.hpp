#pragma once

// Diffeomorphisms R^d -> model manifold. The composite class is
//   phi = (zeta^{-1}, I) o psi o O o T_c,   T_c(x) = x - c,
// whose codomain is always M_{d'} x R^{d-d'} (the flat factor may be empty).

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <string>

#include "pbgeo/error.hpp"
#include "pbgeo/euclidean_map.hpp"
#include "pbgeo/geometry.hpp"

namespace pbgeo {

enum class ChartKind { Identity, Hyperboloid, Stereographic };

inline std::string to_string(ChartKind k) {
  switch (k) {
    case ChartKind::Hyperboloid: return "hyperboloid";
    case ChartKind::Stereographic: return "stereographic";
    default: return "identity";
  }
}

inline ChartKind chart_from_string(const std::string& s) {
  if (s == "identity") return ChartKind::Identity;
  if (s == "hyperboloid") return ChartKind::Hyperboloid;
  if (s == "stereographic") return ChartKind::Stereographic;
  throw Error(ErrorCode::InvalidArgument, "unknown chart '" + s + "'");
}

/// Model manifold that a chart of the given kind parametrizes in dimension d.
inline ModelManifold chart_manifold(ChartKind k, int d) {
  switch (k) {
    case ChartKind::Hyperboloid: return ModelManifold::hyperboloid(d);
    case ChartKind::Stereographic: return ModelManifold::sphere(d);
    default: return ModelManifold::euclidean(d);
  }
}

// -----------------------------------------------------------------------------
// Hyperboloid chart: zeta^{-1}(x) = (x, sqrt(|x|^2 + 1)), zeta(p) = p_{1:d}.

inline Vec hyperboloid_chart_inverse(const Vec& x) {
  Vec p(x.size() + 1);
  p.head(x.size()) = x;
  p(x.size()) = std::sqrt(x.squaredNorm() + 1.0);
  return p;
}

inline Vec hyperboloid_chart_forward(const Vec& p) { return p.head(p.size() - 1); }

inline Vec hyperboloid_chart_inverse_jvp(const Vec& x, const Vec& v) {
  Vec w(x.size() + 1);
  w.head(x.size()) = v;
  w(x.size()) = x.dot(v) / std::sqrt(x.squaredNorm() + 1.0);
  return w;
}

inline Vec hyperboloid_chart_forward_jvp(const Vec& p, const Vec& w) {
  (void)p;
  return w.head(w.size() - 1);
}

// -----------------------------------------------------------------------------
// Stereographic chart from the north pole (0, ..., 0, 1):
//   zeta^{-1}(x) = (2x, |x|^2 - 1) / (1 + |x|^2),  zeta(p) = p_{1:d} / (1 - p_{d+1}).

inline Vec stereographic_chart_inverse(const Vec& x) {
  const double n2 = x.squaredNorm();
  const double s = 1.0 + n2;
  Vec p(x.size() + 1);
  p.head(x.size()) = (2.0 / s) * x;
  p(x.size()) = (n2 - 1.0) / s;
  return p;
}

inline Vec stereographic_chart_forward(const Vec& p) {
  const int d = static_cast<int>(p.size()) - 1;
  if (p(d) > 1.0 - 1e-12) throw Error(ErrorCode::PoleExcluded, "point at the excluded pole of the stereographic chart");
  return p.head(d) / (1.0 - p(d));
}

inline Vec stereographic_chart_inverse_jvp(const Vec& x, const Vec& v) {
  const double s = 1.0 + x.squaredNorm();
  const double xv = x.dot(v);
  Vec w(x.size() + 1);
  w.head(x.size()) = (2.0 / s) * v - (4.0 * xv / (s * s)) * x;
  w(x.size()) = 4.0 * xv / (s * s);
  return w;
}

inline Vec stereographic_chart_forward_jvp(const Vec& p, const Vec& w) {
  const int d = static_cast<int>(p.size()) - 1;
  if (p(d) > 1.0 - 1e-12) throw Error(ErrorCode::PoleExcluded, "point at the excluded pole of the stereographic chart");
  const double a = 1.0 - p(d);
  return w.head(d) / a + (w(d) / (a * a)) * p.head(d);
}

inline Vec chart_inverse(ChartKind k, const Vec& x) {
  switch (k) {
    case ChartKind::Hyperboloid: return hyperboloid_chart_inverse(x);
    case ChartKind::Stereographic: return stereographic_chart_inverse(x);
    default: return x;
  }
}

inline Vec chart_forward(ChartKind k, const Vec& p) {
  switch (k) {
    case ChartKind::Hyperboloid: return hyperboloid_chart_forward(p);
    case ChartKind::Stereographic: return stereographic_chart_forward(p);
    default: return p;
  }
}

inline Vec chart_inverse_jvp(ChartKind k, const Vec& x, const Vec& v) {
  switch (k) {
    case ChartKind::Hyperboloid: return hyperboloid_chart_inverse_jvp(x, v);
    case ChartKind::Stereographic: return stereographic_chart_inverse_jvp(x, v);
    default: return v;
  }
}

inline Vec chart_forward_jvp(ChartKind k, const Vec& p, const Vec& w) {
  switch (k) {
    case ChartKind::Hyperboloid: return hyperboloid_chart_forward_jvp(p, w);
    case ChartKind::Stereographic: return stereographic_chart_forward_jvp(p, w);
    default: return w;
  }
}

// -----------------------------------------------------------------------------

class Diffeomorphism {
 public:
  virtual ~Diffeomorphism() = default;

  virtual const ModelManifold& codomain() const = 0;
  virtual int dim() const = 0;
  virtual Vec forward(const Vec& x) const = 0;
  virtual Vec inverse(const Vec& m) const = 0;
  /// D_x phi [v], an ambient tangent vector at phi(x).
  virtual Vec pushforward(const Vec& x, const Vec& v) const = 0;
  /// D_m phi^{-1} [w].
  virtual Vec inverse_pushforward(const Vec& m, const Vec& w) const = 0;

  /// (D_x phi)^{-1} [w] for w tangent at phi(x); avoids recomputing phi^{-1}.
  virtual Vec pullback_vector(const Vec& x, const Vec& w) const { return inverse_pushforward(forward(x), w); }

  /// Ambient x d matrix of D_x phi.
  virtual Mat jacobian(const Vec& x) const {
    const int d = dim();
    Mat j(codomain().ambient_dim(), d);
    for (int k = 0; k < d; ++k) j.col(k) = pushforward(x, Vec::Unit(d, k));
    return j;
  }
};

class CompositeDiffeo final : public Diffeomorphism {
 public:
  CompositeDiffeo(Vec center, Mat orthogonal, std::shared_ptr<const EuclideanMap> network, ChartKind chart,
                  int split_dim)
      : c_(std::move(center)), o_(std::move(orthogonal)), net_(std::move(network)), chart_(chart), split_(split_dim) {
    const int d = static_cast<int>(c_.size());
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "empty center");
    if (o_.rows() != d || o_.cols() != d) throw Error(ErrorCode::InvalidArgument, "orthogonal factor has wrong shape");
    if ((o_ * o_.transpose() - Mat::Identity(d, d)).lpNorm<Eigen::Infinity>() > 1e-10)
      throw Error(ErrorCode::InvalidArgument, "matrix is not orthogonal");
    if (!net_) net_ = std::make_shared<IdentityMap>(d);
    if (net_->dim() != d) throw Error(ErrorCode::InvalidArgument, "network dimension does not match the center");
    if (split_ < 0 || split_ > d) throw Error(ErrorCode::InvalidArgument, "split dimension out of range");
    if (chart_ != ChartKind::Identity && split_ < 1)
      throw Error(ErrorCode::InvalidArgument, "curved chart needs a positive split dimension");
    m_ = ModelManifold::product(chart_manifold(chart_, split_), d - split_);
  }

  /// Translation only, identity chart: phi(x) = x - c in R^d (as R^d x R^0).
  static CompositeDiffeo translation(const Vec& c) {
    const int d = static_cast<int>(c.size());
    return CompositeDiffeo(c, Mat::Identity(d, d), nullptr, ChartKind::Identity, d);
  }

  /// phi = zeta^{-1} o T_c with d' = d.
  static CompositeDiffeo chart_at(ChartKind chart, const Vec& c) {
    const int d = static_cast<int>(c.size());
    return CompositeDiffeo(c, Mat::Identity(d, d), nullptr, chart, d);
  }

  const ModelManifold& codomain() const override { return m_; }
  int dim() const override { return static_cast<int>(c_.size()); }

  const Vec& center() const { return c_; }
  const Mat& orthogonal() const { return o_; }
  const std::shared_ptr<const EuclideanMap>& network() const { return net_; }
  ChartKind chart() const { return chart_; }
  int split_dim() const { return split_; }

  /// psi(O(x - c)), the point before the chart.
  Vec latent(const Vec& x) const { return net_->forward(o_ * (x - c_)); }

  Vec forward(const Vec& x) const override {
    check(x);
    return lift(latent(x));
  }

  Vec inverse(const Vec& m) const override {
    if (m.size() != m_.ambient_dim()) throw Error(ErrorCode::InvalidArgument, "point has the wrong ambient size");
    return o_.transpose() * net_->inverse(lower(m)) + c_;
  }

  Vec pushforward(const Vec& x, const Vec& v) const override {
    check(x);
    check(v);
    const Vec u = o_ * (x - c_);
    const Vec y = net_->forward(u);
    return lift_jvp(y, net_->jvp(u, o_ * v));
  }

  Vec inverse_pushforward(const Vec& m, const Vec& w) const override {
    const Vec y = lower(m);
    const Vec u = net_->inverse(y);
    return o_.transpose() * net_->solve_jvp(u, lower_jvp(m, w));
  }

  Vec pullback_vector(const Vec& x, const Vec& w) const override {
    check(x);
    const Vec u = o_ * (x - c_);
    const Vec y = net_->forward(u);
    return o_.transpose() * net_->solve_jvp(u, lower_jvp(lift(y), w));
  }

  Mat jacobian(const Vec& x) const override {
    check(x);
    const Vec u = o_ * (x - c_);
    const Vec y = net_->forward(u);
    const Mat jn = net_->jacobian(u) * o_;
    Mat j(m_.ambient_dim(), dim());
    for (int k = 0; k < dim(); ++k) j.col(k) = lift_jvp(y, jn.col(k));
    return j;
  }

 private:
  void check(const Vec& x) const {
    if (x.size() != dim()) throw Error(ErrorCode::InvalidArgument, "input has the wrong dimension");
  }

  Vec lift(const Vec& y) const {
    const int d = dim();
    const Vec head = chart_inverse(chart_, y.head(split_));
    Vec m(m_.ambient_dim());
    m.head(head.size()) = head;
    m.tail(d - split_) = y.tail(d - split_);
    return m;
  }

  Vec lift_jvp(const Vec& y, const Vec& v) const {
    const int d = dim();
    const Vec head = chart_inverse_jvp(chart_, y.head(split_), v.head(split_));
    Vec w(m_.ambient_dim());
    w.head(head.size()) = head;
    w.tail(d - split_) = v.tail(d - split_);
    return w;
  }

  Vec lower(const Vec& m) const {
    const int d = dim();
    const int a = m_.base_ambient_dim();
    Vec y(d);
    y.head(split_) = chart_forward(chart_, m.head(a));
    y.tail(d - split_) = m.tail(d - split_);
    return y;
  }

  Vec lower_jvp(const Vec& m, const Vec& w) const {
    const int d = dim();
    const int a = m_.base_ambient_dim();
    if (w.size() != m_.ambient_dim()) throw Error(ErrorCode::InvalidArgument, "tangent vector has the wrong size");
    Vec v(d);
    v.head(split_) = chart_forward_jvp(chart_, m.head(a), w.head(a));
    v.tail(d - split_) = w.tail(d - split_);
    return v;
  }

  Vec c_;
  Mat o_;
  std::shared_ptr<const EuclideanMap> net_;
  ChartKind chart_;
  int split_;
  ModelManifold m_;
};

}  // namespace pbgeo
