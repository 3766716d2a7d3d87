#pragma once

// Model Riemannian manifolds with closed-form geometry: Euclidean space, the
// unit sphere (ambient Euclidean metric), the unit hyperboloid (Minkowski
// metric) and products M x R^e of one of these with a flat factor.
//
// Points and tangent vectors are stored in ambient coordinates. Every
// manifold is internally a product "curved factor x R^e" where e may be 0,
// which gives one code path for all the operations below.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pbgeo/error.hpp"

namespace pbgeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ManifoldKind { Euclidean, Sphere, Hyperboloid, Product };

/// Eigen-decomposition of Theta -> R(Theta, w) w at a point.
struct CurvatureSpectrum {
  Vec eigenvalues;
  std::vector<Vec> frame;  // orthonormal in the manifold metric

  double max_eigenvalue() const { return eigenvalues.size() ? eigenvalues.maxCoeff() : 0.0; }
};

/// Tolerance below which a tangent vector counts as zero.
inline constexpr double kZeroVector = 1e-12;

class ModelManifold {
 public:
  ModelManifold() = default;

  static ModelManifold euclidean(int n) { return ModelManifold(ManifoldKind::Euclidean, n, 0, false); }
  static ModelManifold sphere(int n) { return ModelManifold(ManifoldKind::Sphere, n, 0, false); }
  static ModelManifold hyperboloid(int n) { return ModelManifold(ManifoldKind::Hyperboloid, n, 0, false); }

  /// inner x R^euclidean_dim. Products of products are flattened.
  static ModelManifold product(const ModelManifold& inner, int euclidean_dim) {
    if (euclidean_dim < 0) throw Error(ErrorCode::InvalidArgument, "negative Euclidean factor dimension");
    return ModelManifold(inner.base_kind_, inner.base_dim_, inner.euclid_dim_ + euclidean_dim, true);
  }

  ManifoldKind kind() const { return is_product_ ? ManifoldKind::Product : base_kind_; }
  ManifoldKind base_kind() const { return base_kind_; }
  bool is_product() const { return is_product_; }
  int base_dim() const { return base_dim_; }
  int euclidean_dim() const { return euclid_dim_; }
  int intrinsic_dim() const { return base_dim_ + euclid_dim_; }
  int base_ambient_dim() const { return base_kind_ == ManifoldKind::Euclidean ? base_dim_ : base_dim_ + 1; }
  int ambient_dim() const { return base_ambient_dim() + euclid_dim_; }

  /// Constant sectional curvature K of the curved factor.
  double sectional_curvature() const {
    switch (base_kind_) {
      case ManifoldKind::Sphere: return 1.0;
      case ManifoldKind::Hyperboloid: return -1.0;
      default: return 0.0;
    }
  }

  /// Zero curvature everywhere.
  bool is_flat() const { return base_kind_ == ManifoldKind::Euclidean; }

  /// The curved factor on its own.
  ModelManifold base() const { return ModelManifold(base_kind_, base_dim_, 0, false); }

  std::string name() const {
    std::string b;
    switch (base_kind_) {
      case ManifoldKind::Sphere: b = "S^" + std::to_string(base_dim_); break;
      case ManifoldKind::Hyperboloid: b = "H^" + std::to_string(base_dim_); break;
      default: b = "R^" + std::to_string(base_dim_); break;
    }
    if (!is_product_) return b;
    return b + " x R^" + std::to_string(euclid_dim_);
  }

  bool operator==(const ModelManifold& o) const {
    return base_kind_ == o.base_kind_ && base_dim_ == o.base_dim_ && euclid_dim_ == o.euclid_dim_ &&
           is_product_ == o.is_product_;
  }

  // ---------------------------------------------------------------------------
  // Metric

  double metric(const Vec& p, const Vec& u, const Vec& v) const {
    check_ambient(p);
    check_ambient(u);
    check_ambient(v);
    (void)p;
    return raw_metric(u, v);
  }

  double norm(const Vec& p, const Vec& v) const { return std::sqrt(std::max(metric(p, v, v), 0.0)); }

  /// Ambient Gram matrix G with <u, v> = u^T G v.
  Mat metric_matrix() const {
    Mat g = Mat::Identity(ambient_dim(), ambient_dim());
    if (base_kind_ == ManifoldKind::Hyperboloid) g(base_dim_, base_dim_) = -1.0;
    return g;
  }

  // ---------------------------------------------------------------------------
  // Constraint sets

  Vec origin() const {
    Vec p = Vec::Zero(ambient_dim());
    if (base_kind_ == ManifoldKind::Sphere) p(base_dim_) = -1.0;
    if (base_kind_ == ManifoldKind::Hyperboloid) p(base_dim_) = 1.0;
    return p;
  }

  bool contains(const Vec& p, double tol = 1e-10) const {
    if (p.size() != ambient_dim()) return false;
    const auto b = p.head(base_ambient_dim());
    switch (base_kind_) {
      case ManifoldKind::Sphere: return std::abs(b.squaredNorm() - 1.0) < tol;
      case ManifoldKind::Hyperboloid: return std::abs(minkowski(b, b) + 1.0) < tol && b(base_dim_) > 0.0;
      default: return true;
    }
  }

  bool is_tangent(const Vec& p, const Vec& v, double tol = 1e-10) const {
    if (v.size() != ambient_dim()) return false;
    const auto pb = p.head(base_ambient_dim());
    const auto vb = v.head(base_ambient_dim());
    switch (base_kind_) {
      case ManifoldKind::Sphere: return std::abs(pb.dot(vb)) < tol;
      case ManifoldKind::Hyperboloid: return std::abs(minkowski(pb, vb)) < tol;
      default: return true;
    }
  }

  /// Re-projects a point that drifted off the constraint set.
  Vec project(const Vec& p) const {
    check_ambient(p);
    Vec q = p;
    auto b = q.head(base_ambient_dim());
    if (base_kind_ == ManifoldKind::Sphere) {
      const double n = b.norm();
      if (std::abs(n - 1.0) > 1e-12) b /= n;
    } else if (base_kind_ == ManifoldKind::Hyperboloid) {
      const double t = std::sqrt(1.0 + b.head(base_dim_).squaredNorm());
      if (std::abs(b(base_dim_) - t) > 1e-12) b(base_dim_) = t;
    }
    return q;
  }

  Vec project_tangent(const Vec& p, const Vec& v) const {
    check_ambient(p);
    check_ambient(v);
    Vec w = v;
    const auto pb = p.head(base_ambient_dim());
    auto wb = w.head(base_ambient_dim());
    if (base_kind_ == ManifoldKind::Sphere) wb -= pb.dot(wb) * pb;
    if (base_kind_ == ManifoldKind::Hyperboloid) wb += minkowski(wb, pb) * pb;
    return w;
  }

  // ---------------------------------------------------------------------------
  // Exponential, logarithm, distance, transport

  Vec exp(const Vec& p, const Vec& v) const {
    check_ambient(p);
    check_ambient(v);
    Vec q(ambient_dim());
    const int m = base_ambient_dim();
    q.head(m) = base_exp(p.head(m), v.head(m));
    q.tail(euclid_dim_) = p.tail(euclid_dim_) + v.tail(euclid_dim_);
    return q;
  }

  Vec log(const Vec& p, const Vec& q) const {
    check_ambient(p);
    check_ambient(q);
    Vec v(ambient_dim());
    const int m = base_ambient_dim();
    v.head(m) = base_log(p.head(m), q.head(m));
    v.tail(euclid_dim_) = q.tail(euclid_dim_) - p.tail(euclid_dim_);
    return v;
  }

  /// Distance of the curved factor only.
  double base_distance(const Vec& p, const Vec& q) const {
    const int m = base_ambient_dim();
    return base_dist(p.head(m), q.head(m));
  }

  double distance(const Vec& p, const Vec& q) const {
    check_ambient(p);
    check_ambient(q);
    const double dm = base_distance(p, q);
    if (euclid_dim_ == 0) return dm;
    const double de = (q.tail(euclid_dim_) - p.tail(euclid_dim_)).norm();
    return std::sqrt(dm * dm + de * de);
  }

  /// exp(p, t log(p, q)).
  Vec geodesic(const Vec& p, const Vec& q, double t) const { return exp(p, t * log(p, q)); }

  /// Geodesic reflection of q about p.
  Vec reflect(const Vec& p, const Vec& q) const { return exp(p, -log(p, q)); }

  /// Parallel transport of u from T_p to T_q along the connecting geodesic.
  Vec transport(const Vec& p, const Vec& q, const Vec& u) const {
    check_ambient(p);
    check_ambient(q);
    check_ambient(u);
    Vec w = u;
    const int m = base_ambient_dim();
    const auto pb = p.head(m);
    const auto qb = q.head(m);
    const auto ub = u.head(m);
    if (base_kind_ == ManifoldKind::Sphere) {
      const double c = pb.dot(qb);
      if (c < -1.0 + 1e-12) throw Error(ErrorCode::AntipodalPoints, "transport between antipodal points");
      w.head(m) = ub - (qb.dot(ub) / (1.0 + c)) * (pb + qb);
    } else if (base_kind_ == ManifoldKind::Hyperboloid) {
      const double c = minkowski(pb, qb);
      w.head(m) = ub + (minkowski(qb, ub) / (1.0 - c)) * (pb + qb);
    }
    return w;
  }

  // ---------------------------------------------------------------------------
  // Curvature

  /// R(u, w) w = K (<w_M, w_M> u_M - <u_M, w_M> w_M) on the curved factor, 0 on R^e.
  Vec curvature_operator(const Vec& p, const Vec& u, const Vec& w) const {
    check_ambient(p);
    check_ambient(u);
    check_ambient(w);
    Vec r = Vec::Zero(ambient_dim());
    const int m = base_ambient_dim();
    const auto ub = u.head(m);
    const auto wb = w.head(m);
    r.head(m) = sectional_curvature() * (raw_metric(wb, wb) * ub - raw_metric(ub, wb) * wb);
    return r;
  }

  /// Eigenpairs of Theta -> R(Theta, w) w. The first frame vector is w / |w|
  /// (eigenvalue 0); the curved-factor directions orthogonal to w carry
  /// K |w_M|^2.
  CurvatureSpectrum curvature_spectrum(const Vec& p, const Vec& w) const {
    check_ambient(p);
    check_ambient(w);
    if (norm(p, w) < kZeroVector) throw Error(ErrorCode::ZeroDirection, "curvature spectrum along a zero vector");

    const int m = base_ambient_dim();
    const int n = intrinsic_dim();

    std::vector<Vec> candidates;
    candidates.push_back(w);
    Vec wm = Vec::Zero(ambient_dim());
    wm.head(m) = w.head(m);
    if (raw_metric(wm, wm) > kZeroVector * kZeroVector) candidates.push_back(wm);
    for (int k = 0; k < euclid_dim_; ++k) candidates.push_back(Vec::Unit(ambient_dim(), m + k));
    for (int k = 0; k < m; ++k) candidates.push_back(project_tangent(p, Vec::Unit(ambient_dim(), k)));

    CurvatureSpectrum spec;
    for (const Vec& c : candidates) {
      if (static_cast<int>(spec.frame.size()) == n) break;
      Vec r = c;
      for (int pass = 0; pass < 2; ++pass)
        for (const Vec& f : spec.frame) r -= raw_metric(r, f) * f;
      const double rn = std::sqrt(std::max(raw_metric(r, r), 0.0));
      if (rn < 1e-8) continue;
      spec.frame.push_back(r / rn);
    }
    if (static_cast<int>(spec.frame.size()) != n)
      throw Error(ErrorCode::InvalidArgument, "could not complete a tangent frame");

    const double k = sectional_curvature();
    const double ww = raw_metric(wm, wm);
    spec.eigenvalues.resize(n);
    for (int j = 0; j < n; ++j) {
      const auto tb = spec.frame[j].head(m);
      const auto wb = wm.head(m);
      const double tw = raw_metric(tb, wb);
      spec.eigenvalues(j) = k * (ww * raw_metric(tb, tb) - tw * tw);
    }
    return spec;
  }

 private:
  ModelManifold(ManifoldKind base, int dim, int edim, bool product)
      : base_kind_(base), base_dim_(dim), euclid_dim_(edim), is_product_(product) {
    if (dim < 0) throw Error(ErrorCode::InvalidArgument, "negative manifold dimension");
  }

  void check_ambient(const Vec& x) const {
    if (x.size() != ambient_dim())
      throw Error(ErrorCode::InvalidArgument, "vector of size " + std::to_string(x.size()) + " on " + name() +
                                                  " (ambient dimension " + std::to_string(ambient_dim()) + ")");
  }

  template <class A, class B>
  double minkowski(const A& u, const B& v) const {
    return u.head(base_dim_).dot(v.head(base_dim_)) - u(base_dim_) * v(base_dim_);
  }

  template <class A, class B>
  double raw_metric(const A& u, const B& v) const {
    if (base_kind_ != ManifoldKind::Hyperboloid) return u.dot(v);
    const int m = base_ambient_dim();
    double s = minkowski(u.head(m), v.head(m));
    if (u.size() > m) s += u.tail(u.size() - m).dot(v.tail(v.size() - m));
    return s;
  }

  template <class A, class B>
  Vec base_exp(const A& p, const B& v) const {
    switch (base_kind_) {
      case ManifoldKind::Sphere: {
        const double n = v.norm();
        if (n < kZeroVector) return p;
        Vec q = std::cos(n) * p + (std::sin(n) / n) * v;
        const double qn = q.norm();
        if (std::abs(qn - 1.0) > 1e-12) q /= qn;
        return q;
      }
      case ManifoldKind::Hyperboloid: {
        const double n = std::sqrt(std::max(minkowski(v, v), 0.0));
        if (n < kZeroVector) return p;
        Vec q = std::cosh(n) * p + (std::sinh(n) / n) * v;
        const double t = std::sqrt(1.0 + q.head(base_dim_).squaredNorm());
        if (std::abs(q(base_dim_) - t) > 1e-12) q(base_dim_) = t;
        return q;
      }
      default: return p + v;
    }
  }

  // Angle and unit direction of the curved-factor logarithm.
  template <class A, class B>
  void base_log_polar(const A& p, const B& q, double& theta, Vec& u, double& un) const {
    if (base_kind_ == ManifoldKind::Sphere) {
      const double c = p.dot(q);
      if (c < -1.0 + 1e-12) throw Error(ErrorCode::AntipodalPoints, "logarithm of an antipodal point");
      u = q - c * p;
      un = u.norm();
      theta = sphere_angle(p, q, c, un);
    } else {
      // Chord form 2 asinh(|q - p|_M / 2) near p, arccosh further out.
      const Vec diff = q - p;
      const double m2 = std::max(minkowski(diff, diff), 0.0);
      double a = 0.0;
      if (m2 < 4.0) {
        theta = 2.0 * std::asinh(0.5 * std::sqrt(m2));
        a = 1.0 + 0.5 * m2;
      } else {
        a = std::max(-minkowski(p, q), 1.0);
        theta = std::acosh(a);
      }
      u = q - a * p;
      un = std::sinh(theta);
    }
  }

  // Chord form 2 asin(|q - p| / 2) near p, atan2 elsewhere.
  template <class A, class B>
  static double sphere_angle(const A& p, const B& q, double c, double sin_part) {
    const double chord = (q - p).norm();
    if (chord < 1.0) return 2.0 * std::asin(0.5 * chord);
    return std::atan2(sin_part, std::clamp(c, -1.0, 1.0));
  }

  template <class A, class B>
  Vec base_log(const A& p, const B& q) const {
    if (base_kind_ == ManifoldKind::Euclidean) return q - p;
    double theta = 0.0, un = 0.0;
    Vec u;
    base_log_polar(p, q, theta, u, un);
    if (theta < kZeroVector || un < kZeroVector * kZeroVector) return Vec::Zero(p.size());
    return (theta / un) * u;
  }

  template <class A, class B>
  double base_dist(const A& p, const B& q) const {
    if (base_kind_ == ManifoldKind::Euclidean) return (q - p).norm();
    if (base_kind_ == ManifoldKind::Sphere) {
      // Antipodal points are at distance pi; only log/transport are undefined there.
      const double c = p.dot(q);
      return sphere_angle(p, q, c, (q - c * p).norm());
    }
    double theta = 0.0, un = 0.0;
    Vec u;
    base_log_polar(p, q, theta, u, un);
    return theta;
  }

  ManifoldKind base_kind_ = ManifoldKind::Euclidean;
  int base_dim_ = 0;
  int euclid_dim_ = 0;
  bool is_product_ = false;
};

// -----------------------------------------------------------------------------
// Typed point / tangent-vector interface. Tangent vectors carry their base
// point so mismatches are detected.

struct ManifoldPoint {
  Vec coords;
};

struct TangentVector {
  Vec base;
  Vec coords;
};

namespace detail {
inline void check_base(const ManifoldPoint& p, const TangentVector& v) {
  if (p.coords.size() != v.base.size() || (p.coords - v.base).lpNorm<Eigen::Infinity>() > 1e-12)
    throw Error(ErrorCode::MismatchedBase, "tangent vector is not based at the given point");
}
}  // namespace detail

inline double metric_inner(const ModelManifold& m, const ManifoldPoint& p, const TangentVector& u,
                           const TangentVector& v) {
  detail::check_base(p, u);
  detail::check_base(p, v);
  return m.metric(p.coords, u.coords, v.coords);
}

inline ManifoldPoint exp_map(const ModelManifold& m, const ManifoldPoint& p, const TangentVector& v) {
  detail::check_base(p, v);
  return {m.exp(p.coords, v.coords)};
}

inline TangentVector log_map(const ModelManifold& m, const ManifoldPoint& p, const ManifoldPoint& q) {
  return {p.coords, m.log(p.coords, q.coords)};
}

inline double distance(const ModelManifold& m, const ManifoldPoint& p, const ManifoldPoint& q) {
  return m.distance(p.coords, q.coords);
}

inline TangentVector parallel_transport(const ModelManifold& m, const ManifoldPoint& p, const ManifoldPoint& q,
                                        const TangentVector& u) {
  detail::check_base(p, u);
  return {q.coords, m.transport(p.coords, q.coords, u.coords)};
}

inline CurvatureSpectrum curvature_spectrum(const ModelManifold& m, const ManifoldPoint& p, const TangentVector& w) {
  detail::check_base(p, w);
  return m.curvature_spectrum(p.coords, w.coords);
}

}  // namespace pbgeo
