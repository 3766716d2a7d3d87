#pragma once

// Curve-fit error metrics with the cumulative chord-length parameterization.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "pbgeo/error.hpp"
#include "pbgeo/pullback.hpp"

namespace pbgeo {

struct ErrorStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over points
  std::vector<double> pointwise;
};

/// How consecutive points are measured for the curve parameterization:
/// Euclidean l2 chords, or pullback distances (exact for points on a geodesic).
enum class Chord { Euclidean, Pullback };

/// t_1 = 0, t_k = (sum of chords up to k) / (total chord length).
inline std::vector<double> chord_parameters(const std::vector<Vec>& data, const PullbackSpace* space = nullptr) {
  if (data.size() < 2) throw Error(ErrorCode::DegenerateCurve, "need at least two points");
  std::vector<double> t(data.size(), 0.0);
  for (size_t k = 1; k < data.size(); ++k)
    t[k] = t[k - 1] + (space ? space->distance(data[k - 1], data[k]) : (data[k] - data[k - 1]).norm());
  const double total = t.back();
  if (total < 1e-12) throw Error(ErrorCode::DegenerateCurve, "total chord length vanishes");
  for (double& x : t) x /= total;
  t.back() = 1.0;
  return t;
}

inline ErrorStats make_stats(std::vector<double> e) {
  ErrorStats s;
  for (double x : e) s.mean += x / e.size();
  for (double x : e) s.std += (x - s.mean) * (x - s.mean) / e.size();
  s.std = std::sqrt(s.std);
  s.pointwise = std::move(e);
  return s;
}

inline ErrorStats geodesic_error_stats(const PullbackSpace& s, const std::vector<Vec>& data,
                                       Chord chord = Chord::Euclidean) {
  const auto t = chord_parameters(data, chord == Chord::Pullback ? &s : nullptr);
  std::vector<double> e(data.size());
  for (size_t k = 0; k < data.size(); ++k) e[k] = (s.geodesic(data.front(), data.back(), t[k]) - data[k]).norm();
  return make_stats(std::move(e));
}

inline ErrorStats variation_error_stats(const PullbackSpace& s, const std::vector<Vec>& data, const Vec& z_new,
                                        Chord chord = Chord::Euclidean) {
  const auto t = chord_parameters(data, chord == Chord::Pullback ? &s : nullptr);
  std::vector<double> e(data.size());
  for (size_t k = 0; k < data.size(); ++k)
    e[k] = (s.geodesic(z_new, data.back(), t[k]) - s.geodesic(data.front(), data.back(), t[k])).norm();
  return make_stats(std::move(e));
}

inline double geodesic_error(const PullbackSpace& s, const std::vector<Vec>& data, Chord chord = Chord::Euclidean) {
  return geodesic_error_stats(s, data, chord).mean;
}

inline double variation_error(const PullbackSpace& s, const std::vector<Vec>& data, const Vec& z_new,
                              Chord chord = Chord::Euclidean) {
  return variation_error_stats(s, data, z_new, chord).mean;
}

/// Out-of-distribution start point: x^1 moved by `fraction` of the chord
/// length along the chord's left normal.
inline Vec default_variation_point(const std::vector<Vec>& data, double fraction = 0.1) {
  const Vec chord = data.back() - data.front();
  if (chord.norm() < 1e-12) throw Error(ErrorCode::DegenerateCurve, "endpoints coincide");
  Vec n(chord.size());
  if (chord.size() == 2) {
    n << -chord(1), chord(0);
  } else {
    Eigen::Index k = 0;
    chord.cwiseAbs().minCoeff(&k);
    const Vec c = chord.normalized();
    n = Vec::Unit(chord.size(), k) - c(k) * c;
  }
  return data.front() + fraction * chord.norm() * n.normalized();
}

}  // namespace pbgeo
