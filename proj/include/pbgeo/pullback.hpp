#pragma once

// Riemannian geometry on R^d pulled back through a diffeomorphism into a model
// manifold, curvature-dependent beta functions and first-order stability bounds.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <utility>
#include <vector>

#include "pbgeo/diffeo.hpp"
#include "pbgeo/error.hpp"
#include "pbgeo/geometry.hpp"

namespace pbgeo {

/// Curvature spectrum with the frame expressed as vectors of R^d.
struct PullbackSpectrum {
  Vec eigenvalues;
  std::vector<Vec> frame;

  double max_eigenvalue() const { return eigenvalues.size() ? eigenvalues.maxCoeff() : 0.0; }
};

class PullbackSpace {
 public:
  explicit PullbackSpace(std::shared_ptr<const Diffeomorphism> phi) : phi_(std::move(phi)) {
    if (!phi_) throw Error(ErrorCode::InvalidArgument, "null diffeomorphism");
  }

  template <class D>
  static PullbackSpace of(D phi) {
    return PullbackSpace(std::make_shared<const D>(std::move(phi)));
  }

  const ModelManifold& model() const { return phi_->codomain(); }
  const Diffeomorphism& phi() const { return *phi_; }
  const std::shared_ptr<const Diffeomorphism>& phi_ptr() const { return phi_; }
  int dim() const { return phi_->dim(); }

  double inner(const Vec& x, const Vec& u, const Vec& v) const {
    const Vec p = phi_->forward(x);
    return model().metric(p, phi_->pushforward(x, u), phi_->pushforward(x, v));
  }

  double norm(const Vec& x, const Vec& v) const { return std::sqrt(std::max(inner(x, v, v), 0.0)); }

  /// Gram matrix J^T G J of the pullback metric at x.
  Mat gram(const Vec& x) const {
    const Mat j = phi_->jacobian(x);
    return j.transpose() * model().metric_matrix() * j;
  }

  Vec geodesic(const Vec& x, const Vec& y, double t) const {
    const Vec p = phi_->forward(x);
    const Vec q = phi_->forward(y);
    return phi_->inverse(model().geodesic(p, q, t));
  }

  Vec log(const Vec& x, const Vec& y) const {
    const Vec p = phi_->forward(x);
    return phi_->pullback_vector(x, model().log(p, phi_->forward(y)));
  }

  Vec exp(const Vec& x, const Vec& v) const {
    const Vec p = phi_->forward(x);
    return phi_->inverse(model().exp(p, phi_->pushforward(x, v)));
  }

  double distance(const Vec& x, const Vec& y) const { return model().distance(phi_->forward(x), phi_->forward(y)); }

  /// Parallel transport of v in T_x to T_y.
  Vec transport(const Vec& x, const Vec& y, const Vec& v) const {
    const Vec p = phi_->forward(x);
    const Vec q = phi_->forward(y);
    return phi_->pullback_vector(y, model().transport(p, q, phi_->pushforward(x, v)));
  }

  /// Geodesic reflection of y about x.
  Vec reflect(const Vec& x, const Vec& y) const { return exp(x, -log(x, y)); }

  PullbackSpectrum curvature_spectrum(const Vec& x, const Vec& w) const {
    const Vec p = phi_->forward(x);
    const CurvatureSpectrum s = model().curvature_spectrum(p, phi_->pushforward(x, w));
    PullbackSpectrum out;
    out.eigenvalues = s.eigenvalues;
    for (const Vec& f : s.frame) out.frame.push_back(phi_->pullback_vector(x, f));
    return out;
  }

 private:
  std::shared_ptr<const Diffeomorphism> phi_;
};

// Free-function spellings of the pullback mappings.
inline double pb_inner(const PullbackSpace& s, const Vec& x, const Vec& u, const Vec& v) { return s.inner(x, u, v); }
inline Vec pb_geodesic(const PullbackSpace& s, const Vec& x, const Vec& y, double t) { return s.geodesic(x, y, t); }
inline Vec pb_log(const PullbackSpace& s, const Vec& x, const Vec& y) { return s.log(x, y); }
inline Vec pb_exp(const PullbackSpace& s, const Vec& x, const Vec& v) { return s.exp(x, v); }
inline double pb_distance(const PullbackSpace& s, const Vec& x, const Vec& y) { return s.distance(x, y); }
inline Vec pb_transport(const PullbackSpace& s, const Vec& x, const Vec& y, const Vec& v) {
  return s.transport(x, y, v);
}
inline PullbackSpectrum pb_curvature_spectrum(const PullbackSpace& s, const Vec& x, const Vec& w) {
  return s.curvature_spectrum(x, w);
}

// -----------------------------------------------------------------------------
// beta functions. kappa is an eigenvalue of the curvature operator along a
// geodesic of length 1 (it already carries the squared length).

inline constexpr double kBetaSeriesThreshold = 1e-8;

namespace detail {
inline void check_kappa(double kappa) {
  if (!(kappa < std::numbers::pi * std::numbers::pi - 1e-9))
    throw Error(ErrorCode::KappaTooLarge, "curvature eigenvalue " + std::to_string(kappa) + " is at or beyond pi^2");
}
}  // namespace detail

inline double beta_geo(double kappa, double t) {
  detail::check_kappa(kappa);
  if (std::abs(kappa) < kBetaSeriesThreshold) {
    const double t2 = t * t;
    return t * (1.0 + kappa * (1.0 - t2) / 6.0 + kappa * kappa * (7.0 - 10.0 * t2 + 3.0 * t2 * t2) / 360.0);
  }
  if (kappa < 0.0) {
    const double s = std::sqrt(-kappa);
    return std::sinh(s * t) / std::sinh(s);
  }
  const double s = std::sqrt(kappa);
  return std::sin(s * t) / std::sin(s);
}

inline double beta_logpoint(double kappa) {
  detail::check_kappa(kappa);
  if (std::abs(kappa) < kBetaSeriesThreshold) return 1.0 + kappa / 6.0 + 7.0 * kappa * kappa / 360.0;
  if (kappa < 0.0) {
    const double s = std::sqrt(-kappa);
    return s / std::sinh(s);
  }
  const double s = std::sqrt(kappa);
  return s / std::sin(s);
}

inline double beta_exp(double kappa) {
  detail::check_kappa(kappa);
  if (std::abs(kappa) < kBetaSeriesThreshold) return 1.0 - kappa / 6.0 + kappa * kappa / 120.0;
  if (kappa < 0.0) {
    const double s = std::sqrt(-kappa);
    return std::sinh(s) / s;
  }
  const double s = std::sqrt(kappa);
  return std::sin(s) / s;
}

// -----------------------------------------------------------------------------
// Local Lipschitz constants and stability bounds.

struct LocalLipschitz {
  double fwd = 0.0;
  double inv = 0.0;
};

/// Extremal singular values of D_x phi measured l2 -> model metric.
inline LocalLipschitz local_lipschitz(const PullbackSpace& s, const Vec& x) {
  Eigen::SelfAdjointEigenSolver<Mat> es(s.gram(x), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (lmin < 1e-14) throw Error(ErrorCode::SingularJacobian, "pullback metric is singular");
  return {std::sqrt(lmax), 1.0 / std::sqrt(lmin)};
}

struct StabilityReport {
  double lipschitz_fwd = 0.0;
  double lipschitz_inv = 0.0;
  double beta_factor = 0.0;
  double bound = 0.0;
};

enum class Endpoint { Start, End };

/// Largest curvature eigenvalue along the geodesic from x towards y (0 if x == y).
inline double max_curvature_along(const PullbackSpace& s, const Vec& x, const Vec& y) {
  const Vec w = s.log(x, y);
  if (s.norm(x, w) < kZeroVector) return 0.0;
  return s.curvature_spectrum(x, w).max_eigenvalue();
}

/// First-order sensitivity of gamma_{x,y}(t) to a perturbation of one endpoint.
inline StabilityReport geodesic_stability_bound(const PullbackSpace& s, const Vec& x, const Vec& y, Endpoint which,
                                                double t) {
  if (t < 0.0 || t > 1.0) throw Error(ErrorCode::InvalidArgument, "geodesic parameter outside [0, 1]");
  StabilityReport r;
  const Vec g = s.geodesic(x, y, t);
  r.lipschitz_inv = local_lipschitz(s, g).inv;
  if (which == Endpoint::Start) {
    r.beta_factor = beta_geo(max_curvature_along(s, x, y), 1.0 - t);
    r.lipschitz_fwd = local_lipschitz(s, x).fwd;
  } else {
    r.beta_factor = beta_geo(max_curvature_along(s, y, x), t);
    r.lipschitz_fwd = local_lipschitz(s, y).fwd;
  }
  r.bound = r.lipschitz_inv * r.beta_factor * r.lipschitz_fwd;
  return r;
}

/// Per-unit-perturbation coefficient bounding the approximate barycentre's shift.
inline double barycentre_stability_bound(const PullbackSpace& s, const std::vector<Vec>& data, const Vec& xstar) {
  if (data.empty()) throw Error(ErrorCode::EmptyData, "no data points");
  double sum = 0.0;
  for (const Vec& xi : data) {
    const double kappa = std::max(0.0, max_curvature_along(s, xi, xstar));
    sum += beta_logpoint(kappa) * local_lipschitz(s, xi).fwd;
  }
  return local_lipschitz(s, xstar).inv * sum / static_cast<double>(data.size());
}

/// First-order bound on |approximate barycentre of new_data - xstar| with each
/// point weighted by its own displacement.
inline double barycentre_stability_bound(const PullbackSpace& s, const std::vector<Vec>& data, const Vec& xstar,
                                         const std::vector<Vec>& new_data) {
  if (data.empty()) throw Error(ErrorCode::EmptyData, "no data points");
  if (new_data.size() != data.size()) throw Error(ErrorCode::InvalidArgument, "perturbed data has the wrong size");
  double sum = 0.0;
  for (size_t i = 0; i < data.size(); ++i) {
    const double kappa = std::max(0.0, max_curvature_along(s, data[i], xstar));
    sum += beta_logpoint(kappa) * local_lipschitz(s, data[i]).fwd * (new_data[i] - data[i]).norm();
  }
  return local_lipschitz(s, xstar).inv * sum / static_cast<double>(data.size());
}

/// max |d(s(y), s(z)) - d(y, z)| over the pairs, s the geodesic reflection about x0.
inline double geodesic_reflection_residual(const PullbackSpace& s, const Vec& x0,
                                           const std::vector<std::pair<Vec, Vec>>& samples) {
  double worst = 0.0;
  for (const auto& [y, z] : samples) {
    const double d0 = s.distance(y, z);
    const double d1 = s.distance(s.reflect(x0, y), s.reflect(x0, z));
    worst = std::max(worst, std::abs(d1 - d0));
  }
  return worst;
}

}  // namespace pbgeo
