#pragma once

// Karcher barycentres in a pullback geometry, computed on the model manifold
// by Riemannian gradient descent and mapped back through phi^{-1}.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <vector>

#include "pbgeo/error.hpp"
#include "pbgeo/pullback.hpp"

namespace pbgeo {

struct BarycentreOptions {
  double step_size = 1.0;
  double rel_grad_tol = 1e-3;
  int max_iters = 1000;
  std::optional<Vec> init;  // first data point when empty
};

struct BarycentreResult {
  Vec x;  // barycentre in R^d
  Vec p;  // its image on the model manifold
  int iterations = 0;
  std::vector<double> energy_history;  // (1/2N) sum d^2, one entry per iterate
  std::vector<double> grad_norms;      // |mean log| per iterate
};

/// Pairwise (tree) sum, independent of how the terms are scheduled.
inline Vec tree_sum(const std::vector<Vec>& terms, size_t lo, size_t hi) {
  if (hi - lo == 1) return terms[lo];
  const size_t mid = lo + (hi - lo) / 2;
  return tree_sum(terms, lo, mid) + tree_sum(terms, mid, hi);
}

inline Vec tree_sum(const std::vector<Vec>& terms) {
  if (terms.empty()) throw Error(ErrorCode::EmptyData, "sum over no terms");
  return tree_sum(terms, 0, terms.size());
}

namespace detail {
inline Vec mean_log(const ModelManifold& m, const Vec& p, const std::vector<Vec>& images) {
  std::vector<Vec> logs;
  logs.reserve(images.size());
  for (const Vec& q : images) logs.push_back(m.log(p, q));
  return tree_sum(logs) / static_cast<double>(images.size());
}

inline double karcher_energy(const ModelManifold& m, const Vec& p, const std::vector<Vec>& images) {
  std::vector<Vec> sq;
  for (const Vec& q : images) {
    const double d = m.distance(p, q);
    sq.push_back(Vec::Constant(1, d * d));
  }
  return 0.5 * tree_sum(sq)(0) / static_cast<double>(images.size());
}
}  // namespace detail

inline BarycentreResult barycentre_detailed(const PullbackSpace& s, const std::vector<Vec>& data,
                                            const BarycentreOptions& opts = {}) {
  if (data.empty()) throw Error(ErrorCode::EmptyData, "barycentre of an empty data set");
  if (!(opts.step_size > 0.0) || !(opts.rel_grad_tol > 0.0))
    throw Error(ErrorCode::InvalidArgument, "step size and tolerance must be positive");
  const ModelManifold& m = s.model();
  std::vector<Vec> images;
  images.reserve(data.size());
  for (const Vec& x : data) images.push_back(s.phi().forward(x));

  BarycentreResult r;
  Vec p = opts.init ? s.phi().forward(*opts.init) : images.front();
  Vec g = detail::mean_log(m, p, images);
  const double g0 = m.norm(p, g);
  r.energy_history.push_back(detail::karcher_energy(m, p, images));
  r.grad_norms.push_back(g0);
  if (g0 > kZeroVector) {
    for (;;) {
      if (r.iterations >= opts.max_iters)
        throw Error(ErrorCode::MaxItersExceeded,
                    "barycentre iteration stopped after " + std::to_string(opts.max_iters) + " steps");
      p = m.exp(p, opts.step_size * g);
      g = detail::mean_log(m, p, images);
      ++r.iterations;
      const double gn = m.norm(p, g);
      r.energy_history.push_back(detail::karcher_energy(m, p, images));
      r.grad_norms.push_back(gn);
      if (gn / g0 < opts.rel_grad_tol) break;
    }
  }
  r.p = p;
  r.x = s.phi().inverse(p);
  return r;
}

inline Vec barycentre(const PullbackSpace& s, const std::vector<Vec>& data, const BarycentreOptions& opts = {}) {
  return barycentre_detailed(s, data, opts).x;
}

/// phi^{-1}(mean of phi(x^i)); requires a flat model.
inline Vec euclidean_barycentre(const PullbackSpace& s, const std::vector<Vec>& data) {
  if (!s.model().is_flat()) throw Error(ErrorCode::ModelNotEuclidean, "closed-form barycentre needs a flat model");
  if (data.empty()) throw Error(ErrorCode::EmptyData, "barycentre of an empty data set");
  std::vector<Vec> images;
  for (const Vec& x : data) images.push_back(s.phi().forward(x));
  return s.phi().inverse(tree_sum(images) / static_cast<double>(images.size()));
}

/// One unit gradient step on the new data starting from xstar.
inline Vec approximate_barycentre(const PullbackSpace& s, const Vec& xstar, const std::vector<Vec>& new_data) {
  if (new_data.empty()) throw Error(ErrorCode::EmptyData, "approximate barycentre of an empty data set");
  const ModelManifold& m = s.model();
  const Vec p = s.phi().forward(xstar);
  std::vector<Vec> images;
  for (const Vec& y : new_data) images.push_back(s.phi().forward(y));
  return s.phi().inverse(m.exp(p, detail::mean_log(m, p, images)));
}

}  // namespace pbgeo
