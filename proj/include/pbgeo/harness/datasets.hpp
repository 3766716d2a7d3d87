#pragma once

// Toy data sets. (a) and (b) are preimages of model-space geodesics through
// phi(z), so the noiseless sets lie exactly on a pullback geodesic; (c) is by
// default a point-symmetric two-armed Archimedean spiral (an S) through z = 0.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "pbgeo/diffeo.hpp"
#include "pbgeo/error.hpp"

namespace pbgeo {

enum class DatasetKind { HyperbolicBranch, CircleArc, Spiral };

inline std::string to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::HyperbolicBranch: return "hyperbolic";
    case DatasetKind::CircleArc: return "circle";
    case DatasetKind::Spiral: return "spiral";
  }
  return "?";
}

inline DatasetKind dataset_from_string(const std::string& s) {
  if (s == "hyperbolic" || s == "a") return DatasetKind::HyperbolicBranch;
  if (s == "circle" || s == "b") return DatasetKind::CircleArc;
  if (s == "spiral" || s == "c") return DatasetKind::Spiral;
  throw Error(ErrorCode::InvalidArgument, "unknown data set '" + s + "'");
}

struct DatasetParams {
  DatasetKind kind = DatasetKind::Spiral;
  int n_points = 200;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  // (a): model geodesic s in [-half_length, half_length] through the apex.
  double hyperbolic_half_length = 2.5;
  double hyperbolic_angle = M_PI / 4.0;
  // (b): great-circle arc of total length 2 * half_length through the south pole.
  double circle_half_length = 1.5;
  double circle_angle = M_PI / 2.0;
  // (c): r = spiral_a + spiral_b * theta, theta in [0, spiral_theta_max]. Two arms
  // join point-symmetrically at the origin (spiral_a must then be 0).
  int spiral_arms = 2;
  double spiral_a = 0.0;
  double spiral_b = 0.5;
  double spiral_theta_max = M_PI;

  void validate() const {
    if (n_points < 2) throw Error(ErrorCode::InvalidArgument, "need at least two points");
    if (noise_sigma < 0.0) throw Error(ErrorCode::InvalidArgument, "noise must be non-negative");
    if (!(hyperbolic_half_length > 0.0) || !(spiral_b > 0.0) || !(spiral_theta_max > 0.0))
      throw Error(ErrorCode::InvalidArgument, "data set extent must be positive");
    if (spiral_arms != 1 && spiral_arms != 2) throw Error(ErrorCode::InvalidArgument, "spiral has one or two arms");
    if (spiral_a < 0.0 || (spiral_arms == 2 && spiral_a != 0.0))
      throw Error(ErrorCode::InvalidArgument, "two-armed spiral must start at the origin");
    if (!(circle_half_length > 0.0 && circle_half_length < M_PI / 2.0 + 0.5))
      throw Error(ErrorCode::InvalidArgument, "circle arc must stay short of the pole");
  }
};

struct Dataset {
  DatasetKind kind = DatasetKind::Spiral;
  std::vector<Vec> points;  // in curve order
  std::vector<Vec> clean;   // noiseless counterparts
  Vec base_point;           // z
};

inline Vec default_base_point(DatasetKind k) {
  Vec z(2);
  switch (k) {
    case DatasetKind::HyperbolicBranch: z << 0.0, 1.0; break;
    case DatasetKind::CircleArc: z << 1.0, 0.0; break;
    case DatasetKind::Spiral: z << 0.0, 0.0; break;
  }
  return z;
}

/// Hand-modelled diffeomorphism for (a) and (b): chart at z with O = I, psi = id.
inline CompositeDiffeo native_diffeo(DatasetKind k) {
  switch (k) {
    case DatasetKind::HyperbolicBranch: return CompositeDiffeo::chart_at(ChartKind::Hyperboloid, default_base_point(k));
    case DatasetKind::CircleArc: return CompositeDiffeo::chart_at(ChartKind::Stereographic, default_base_point(k));
    case DatasetKind::Spiral: break;
  }
  throw Error(ErrorCode::InvalidArgument, "the spiral has no hand-modelled geometry");
}

namespace detail {

// Arc length of r = b theta from 0 to theta.
inline double spiral_arc(double b, double theta) {
  return 0.5 * b * (theta * std::sqrt(1.0 + theta * theta) + std::asinh(theta));
}

inline double spiral_theta_at(double b, double arc, double theta_max) {
  double lo = 0.0, hi = theta_max;
  for (int k = 0; k < 200 && hi - lo > 1e-15 * (1.0 + theta_max); ++k) {
    const double mid = 0.5 * (lo + hi);
    (spiral_arc(b, mid) < arc ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Noiseless curve point for parameter u in [0, 1] (curve order).
inline Vec dataset_curve(const DatasetParams& p, double u) {
  const double s = 2.0 * u - 1.0;  // [-1, 1], z at s = 0
  Vec x(2);
  switch (p.kind) {
    case DatasetKind::HyperbolicBranch: {
      const double t = s * p.hyperbolic_half_length;
      x << std::cos(p.hyperbolic_angle), std::sin(p.hyperbolic_angle);
      // Chart image of the hyperboloid geodesic cosh(t) o + sinh(t) (dir, 0).
      return default_base_point(p.kind) + std::sinh(t) * x;
    }
    case DatasetKind::CircleArc: {
      const double t = s * p.circle_half_length;
      x << std::cos(p.circle_angle), std::sin(p.circle_angle);
      // Stereographic image of the great circle through the south pole.
      return default_base_point(p.kind) + std::tan(0.5 * t) * x;
    }
    case DatasetKind::Spiral: {
      // r = b (theta + theta0) with theta0 = a / b; arc length measured from theta0.
      const double t0 = p.spiral_a / p.spiral_b;
      const double start = detail::spiral_arc(p.spiral_b, t0);
      const double total = detail::spiral_arc(p.spiral_b, t0 + p.spiral_theta_max) - start;
      const double frac = p.spiral_arms == 2 ? std::abs(s) : u;
      const double theta =
          detail::spiral_theta_at(p.spiral_b, start + frac * total, t0 + p.spiral_theta_max) - t0;
      const double sign = (p.spiral_arms == 2 && s < 0.0) ? -1.0 : 1.0;
      x << std::cos(theta), std::sin(theta);
      return sign * (p.spiral_a + p.spiral_b * theta) * x;
    }
  }
  return x;
}

inline Dataset generate_dataset(const DatasetParams& p) {
  p.validate();
  Dataset d;
  d.kind = p.kind;
  d.base_point = default_base_point(p.kind);
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int i = 0; i < p.n_points; ++i) {
    const Vec c = dataset_curve(p, double(i) / double(p.n_points - 1));
    Vec x = c;
    if (p.noise_sigma > 0.0)
      for (Eigen::Index k = 0; k < x.size(); ++k) x(k) += p.noise_sigma * noise(rng);
    d.clean.push_back(c);
    d.points.push_back(x);
  }
  return d;
}

inline double diameter(const std::vector<Vec>& data) {
  double out = 0.0;
  for (size_t i = 0; i < data.size(); ++i)
    for (size_t j = i + 1; j < data.size(); ++j) out = std::max(out, (data[i] - data[j]).norm());
  return out;
}

/// Dense samples of the noiseless curve.
inline std::vector<Vec> curve_polyline(const DatasetParams& p, int samples = 4001) {
  if (samples < 2) throw Error(ErrorCode::InvalidArgument, "polyline needs at least two samples");
  std::vector<Vec> out;
  out.reserve(samples);
  for (int k = 0; k < samples; ++k) out.push_back(dataset_curve(p, double(k) / double(samples - 1)));
  return out;
}

inline double distance_to_polyline(const std::vector<Vec>& poly, const Vec& x) {
  double best = std::numeric_limits<double>::infinity();
  for (size_t k = 1; k < poly.size(); ++k) {
    const Vec seg = poly[k] - poly[k - 1];
    const double len2 = seg.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((x - poly[k - 1]).dot(seg) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (poly[k - 1] + t * seg - x).norm());
  }
  return best;
}

inline double distance_to_curve(const DatasetParams& p, const Vec& x, int samples = 4001) {
  return distance_to_polyline(curve_polyline(p, samples), x);
}

}  // namespace pbgeo
