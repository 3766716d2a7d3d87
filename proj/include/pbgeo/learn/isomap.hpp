#pragma once

// Graph-completed geodesic distance targets and the local-PCA orthogonal factor.

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "pbgeo/error.hpp"
#include "pbgeo/geometry.hpp"

namespace pbgeo {

/// All-pairs shortest paths over the symmetric k-nearest-neighbour graph
/// (union of directed kNN edges, l2 edge weights).
inline Mat isomap_distances(const std::vector<Vec>& data, int k) {
  const int n = static_cast<int>(data.size());
  if (n == 0) throw Error(ErrorCode::EmptyData, "no data points");
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "neighbour count must be at least 1");

  std::vector<std::vector<std::pair<int, double>>> adj(n);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> dist(n);
    for (int j = 0; j < n; ++j) dist[j] = (data[i] - data[j]).norm();
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dist[a] < dist[b]; });
    int taken = 0;
    for (int j : order) {
      if (taken == k) break;
      if (j == i) continue;
      adj[i].emplace_back(j, dist[j]);
      adj[j].emplace_back(i, dist[j]);
      ++taken;
    }
  }

  const double inf = std::numeric_limits<double>::infinity();
  Mat out = Mat::Constant(n, n, inf);
  using Item = std::pair<double, int>;
  for (int s = 0; s < n; ++s) {
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    out(s, s) = 0.0;
    pq.emplace(0.0, s);
    while (!pq.empty()) {
      const auto [d, u] = pq.top();
      pq.pop();
      if (d > out(s, u)) continue;
      for (const auto& [v, w] : adj[u]) {
        if (d + w < out(s, v)) {
          out(s, v) = d + w;
          pq.emplace(d + w, v);
        }
      }
    }
  }

  // Components, reported through the error message.
  int components = 0;
  std::vector<int> label(n, -1);
  for (int i = 0; i < n; ++i) {
    if (label[i] >= 0) continue;
    for (int j = 0; j < n; ++j)
      if (out(i, j) < inf) label[j] = components;
    ++components;
  }
  if (components > 1)
    throw Error(ErrorCode::DisconnectedGraph,
                "neighbour graph has " + std::to_string(components) + " components for k = " + std::to_string(k));
  // Symmetrize rounding differences between the two Dijkstra runs.
  return 0.5 * (out + out.transpose());
}

/// Raises k from k_start until the neighbour graph is connected.
inline Mat isomap_distances_connected(const std::vector<Vec>& data, int k_start, int* k_used = nullptr) {
  const int n = static_cast<int>(data.size());
  for (int k = std::max(1, k_start);; ++k) {
    try {
      Mat d = isomap_distances(data, k);
      if (k_used) *k_used = k;
      return d;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DisconnectedGraph || k >= n - 1) throw;
    }
  }
}

struct LocalPca {
  Mat O;             // rows = principal directions, descending variance
  Vec eigenvalues;   // descending
  int neighbours = 0;
};

/// Covariance of the points within `radius` of `center`; O = U^T with the
/// largest-magnitude entry of every principal direction made non-negative.
inline LocalPca local_pca(const std::vector<Vec>& data, const Vec& center, double radius) {
  const int d = static_cast<int>(center.size());
  Mat cov = Mat::Zero(d, d);
  int count = 0;
  for (const Vec& x : data) {
    const Vec dx = x - center;
    const double r = dx.norm();
    if (r > radius || r == 0.0) continue;
    cov += dx * dx.transpose();
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::EmptyNeighborhood, "no data within the PCA radius");
  Eigen::SelfAdjointEigenSolver<Mat> es(cov);
  LocalPca out;
  out.neighbours = count;
  out.eigenvalues = es.eigenvalues().reverse();
  Mat u = es.eigenvectors().rowwise().reverse();
  for (int j = 0; j < d; ++j) {
    Eigen::Index k = 0;
    u.col(j).cwiseAbs().maxCoeff(&k);
    if (u(k, j) < 0.0) u.col(j) *= -1.0;
  }
  // Re-orthonormalize to machine precision.
  Eigen::HouseholderQR<Mat> qr(u);
  Mat q = qr.householderQ() * Mat::Identity(d, d);
  for (int j = 0; j < d; ++j)
    if (q.col(j).dot(u.col(j)) < 0.0) q.col(j) *= -1.0;
  out.O = q.transpose();
  return out;
}

inline Mat local_pca_frame(const std::vector<Vec>& data, const Vec& center, double radius) {
  return local_pca(data, center, radius).O;
}

}  // namespace pbgeo
