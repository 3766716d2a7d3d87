#pragma once

// Three-term training objective for phi = zeta o psi o O(. - c):
//   distance term  mean over ordered pairs of (d^phi(x_i, x_j) - D_ij)^2
//   subspace term  mean l1 norm of the Euclidean-factor coordinates
//   isometry term  mean ||Gram^phi(x_i) - I||_F^2
// The gradient is hand-derived: the network is run forward with its tangent
// matrix, the head is differentiated in closed form, and both the primal and
// the tangent path are back-propagated through every block.

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <numeric>
#include <vector>

#include "pbgeo/diffeo.hpp"
#include "pbgeo/error.hpp"
#include "pbgeo/geometry.hpp"
#include "pbgeo/learn/resnet.hpp"

namespace pbgeo {

struct LossBreakdown {
  double distance_term = 0.0;
  double subspace_term = 0.0;
  double isometry_term = 0.0;
  double total = 0.0;
};

/// Fixed part of the diffeomorphism during training.
struct LearningHead {
  Vec center;
  Mat orthogonal;
  ChartKind chart = ChartKind::Identity;
  int split_dim = 0;

  static LearningHead of(const CompositeDiffeo& phi) {
    return {phi.center(), phi.orthogonal(), phi.chart(), phi.split_dim()};
  }
  int dim() const { return static_cast<int>(center.size()); }
  ModelManifold model() const { return ModelManifold::product(chart_manifold(chart, split_dim), dim() - split_dim); }
};

namespace detail {

inline Vec head_lift(const LearningHead& h, const Vec& y) {
  const int d = h.dim();
  const Vec head = chart_inverse(h.chart, y.head(h.split_dim));
  Vec m(head.size() + d - h.split_dim);
  m.head(head.size()) = head;
  m.tail(d - h.split_dim) = y.tail(d - h.split_dim);
  return m;
}

// Columns are d(lift)/dy_k.
inline Mat head_lift_jacobian(const LearningHead& h, const Vec& y) {
  const int d = h.dim();
  const int s = h.split_dim;
  const Vec x = y.head(s);
  const int a = static_cast<int>(chart_inverse(h.chart, x).size());
  Mat l = Mat::Zero(a + d - s, d);
  for (int k = 0; k < s; ++k) l.col(k).head(a) = chart_inverse_jvp(h.chart, x, Vec::Unit(s, k));
  l.bottomRightCorner(d - s, d - s).setIdentity();
  return l;
}

// Chart-pulled metric H(y) = Dlift^T G Dlift in latent coordinates.
inline Mat head_metric(const LearningHead& h, const Vec& y) {
  const int d = h.dim();
  const int s = h.split_dim;
  Mat out = Mat::Identity(d, d);
  const Vec x = y.head(s);
  const double q = 1.0 + x.squaredNorm();
  switch (h.chart) {
    case ChartKind::Identity:
      break;
    case ChartKind::Hyperboloid:
      out.topLeftCorner(s, s) -= x * x.transpose() / q;
      break;
    case ChartKind::Stereographic:
      out.topLeftCorner(s, s) *= 4.0 / (q * q);
      break;
  }
  return out;
}

// g_k = <A, dH/dy_k> for symmetric A.
inline Vec head_metric_grad(const LearningHead& h, const Vec& y, const Mat& a) {
  const int d = h.dim();
  const int s = h.split_dim;
  Vec g = Vec::Zero(d);
  const Vec x = y.head(s);
  const double q = 1.0 + x.squaredNorm();
  switch (h.chart) {
    case ChartKind::Identity:
      break;
    case ChartKind::Hyperboloid: {
      const Mat as = a.topLeftCorner(s, s);
      const Vec ax = as * x;
      g.head(s) = -2.0 * ax / q + 2.0 * x * x.dot(ax) / (q * q);
      break;
    }
    case ChartKind::Stereographic:
      g.head(s) = -16.0 * a.topLeftCorner(s, s).trace() / (q * q * q) * x;
      break;
  }
  return g;
}

inline double sign0(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

struct LatentSample {
  Vec y;  // psi(O(x - c))
  Mat M;  // d psi at O(x - c)
};

// Loss on latent samples; fills y/M adjoints when requested.
inline LossBreakdown latent_objective(const LearningHead& h, const ModelManifold& model,
                                      const std::vector<LatentSample>& s, const std::vector<int>& idx,
                                      const Mat& targets, double alpha_sub, double alpha_iso,
                                      std::vector<Vec>* ybar, std::vector<Mat>* mbar) {
  const int m = static_cast<int>(s.size());
  const int d = h.dim();
  const int tail = d - h.split_dim;
  LossBreakdown out;
  if (m == 0) throw Error(ErrorCode::EmptyData, "empty batch");
  const bool grad = ybar != nullptr;
  if (grad) {
    ybar->assign(m, Vec::Zero(d));
    mbar->assign(m, Mat::Zero(d, d));
  }

  std::vector<Vec> p(m);
  for (int i = 0; i < m; ++i) p[i] = head_lift(h, s[i].y);

  if (m > 1) {
    const double w = 1.0 / (double(m) * double(m - 1));
    std::vector<Mat> lj;
    if (grad) {
      lj.resize(m);
      for (int i = 0; i < m; ++i) lj[i] = head_lift_jacobian(h, s[i].y);
    }
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        const double dist = model.distance(p[i], p[j]);
        const double r = dist - targets(idx[i], idx[j]);
        // Both ordered pairs (i, j) and (j, i).
        out.distance_term += 2.0 * w * r * r;
        if (!grad || dist == 0.0) continue;
        const double c = 2.0 * 2.0 * w * r;
        const Vec gi = -model.log(p[i], p[j]) / dist;
        const Vec gj = -model.log(p[j], p[i]) / dist;
        for (int k = 0; k < d; ++k) {
          (*ybar)[i](k) += c * model.metric(p[i], lj[i].col(k), gi);
          (*ybar)[j](k) += c * model.metric(p[j], lj[j].col(k), gj);
        }
      }
    }
  }

  for (int i = 0; i < m; ++i) {
    const Vec t = s[i].y.tail(tail);
    out.subspace_term += t.lpNorm<1>() / m;
    if (grad && alpha_sub != 0.0)
      for (int k = 0; k < tail; ++k) (*ybar)[i](h.split_dim + k) += alpha_sub * sign0(t(k)) / m;

    const Mat hm = head_metric(h, s[i].y);
    const Mat e = s[i].M.transpose() * hm * s[i].M - Mat::Identity(d, d);
    out.isometry_term += e.squaredNorm() / m;
    if (grad && alpha_iso != 0.0) {
      (*mbar)[i] += alpha_iso * 4.0 / m * hm * s[i].M * e;
      const Mat a = s[i].M * e * s[i].M.transpose();
      (*ybar)[i] += alpha_iso * 2.0 / m * head_metric_grad(h, s[i].y, a);
    }
  }
  out.total = out.distance_term + alpha_sub * out.subspace_term + alpha_iso * out.isometry_term;
  return out;
}

// Per-block record of the forward pass with tangents.
struct BlockTape {
  Vec x;  // block input
  Mat M;  // tangent matrix at block input
};

inline LatentSample network_forward(const InvertibleResNet& net, const Vec& u, std::vector<BlockTape>* tape) {
  const int d = net.dim();
  Vec x = u;
  Mat mt = Mat::Identity(d, d);
  if (tape) tape->resize(net.num_blocks());
  int k = 0;
  for (const auto& b : net.blocks()) {
    if (tape) (*tape)[k] = {x, mt};
    const Vec a1 = b.W1 * x + b.b1;
    const Vec h1 = elu(a1);
    const Vec a2 = b.W2 * h1 + b.b2;
    const Mat s1 = elu_prime(a1).asDiagonal() * (b.W1 * mt);
    const Mat s2 = elu_prime(a2).asDiagonal() * (b.W2 * s1);
    x += b.W3 * elu(a2) + b.b3;
    mt += b.W3 * s2;
    ++k;
  }
  return {x, mt};
}

// Adds the parameter gradient of <xbar, y> + <Mbar, M> to grad (params() layout).
inline void network_backward(const InvertibleResNet& net, const std::vector<BlockTape>& tape, Vec xbar, Mat mbar,
                             Vec& grad) {
  const auto& blocks = net.blocks();
  std::vector<int> offset(blocks.size() + 1, 0);
  for (size_t k = 0; k < blocks.size(); ++k) offset[k + 1] = offset[k] + blocks[k].num_params();
  auto add_mat = [&](int& o, const Mat& g) {
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j) grad(o++) += g(i, j);
  };
  auto add_vec = [&](int& o, const Vec& g) {
    for (int i = 0; i < g.size(); ++i) grad(o++) += g(i);
  };
  auto elu_second_v = [](const Vec& a) { return Vec(a.unaryExpr([](double t) { return elu_second(t); })); };

  for (int k = static_cast<int>(blocks.size()) - 1; k >= 0; --k) {
    const auto& b = blocks[k];
    const Vec& x = tape[k].x;
    const Mat& mt = tape[k].M;
    const Vec a1 = b.W1 * x + b.b1;
    const Vec h1 = elu(a1);
    const Vec d1 = elu_prime(a1);
    const Vec a2 = b.W2 * h1 + b.b2;
    const Vec h2 = elu(a2);
    const Vec d2 = elu_prime(a2);
    const Mat t1 = b.W1 * mt;
    const Mat s1 = d1.asDiagonal() * t1;
    const Mat t2 = b.W2 * s1;
    const Mat s2 = d2.asDiagonal() * t2;

    const Mat gw3 = xbar * h2.transpose() + mbar * s2.transpose();
    const Vec gb3 = xbar;
    const Vec h2bar = b.W3.transpose() * xbar;
    const Mat s2bar = b.W3.transpose() * mbar;

    const Mat t2bar = d2.asDiagonal() * s2bar;
    const Vec d2bar = s2bar.cwiseProduct(t2).rowwise().sum();
    const Vec a2bar = d2.cwiseProduct(h2bar) + elu_second_v(a2).cwiseProduct(d2bar);

    const Mat gw2 = t2bar * s1.transpose() + a2bar * h1.transpose();
    const Vec gb2 = a2bar;
    const Mat s1bar = b.W2.transpose() * t2bar;
    const Vec h1bar = b.W2.transpose() * a2bar;

    const Mat t1bar = d1.asDiagonal() * s1bar;
    const Vec d1bar = s1bar.cwiseProduct(t1).rowwise().sum();
    const Vec a1bar = d1.cwiseProduct(h1bar) + elu_second_v(a1).cwiseProduct(d1bar);

    const Mat gw1 = t1bar * mt.transpose() + a1bar * x.transpose();
    const Vec gb1 = a1bar;
    mbar += b.W1.transpose() * t1bar;
    xbar += b.W1.transpose() * a1bar;

    int o = offset[k];
    add_mat(o, gw1);
    add_vec(o, gb1);
    add_mat(o, gw2);
    add_vec(o, gb2);
    add_mat(o, gw3);
    add_vec(o, gb3);
  }
}

inline std::vector<int> all_indices(int n) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

inline void check_targets(const std::vector<Vec>& data, const Mat& targets) {
  const auto n = static_cast<Eigen::Index>(data.size());
  if (targets.rows() != n || targets.cols() != n)
    throw Error(ErrorCode::InvalidArgument, "target matrix does not match the data size");
}

}  // namespace detail

/// Objective (and optionally its parameter gradient) on data[idx] for a
/// network being trained behind a fixed head.
inline LossBreakdown network_objective(const InvertibleResNet& net, const LearningHead& head,
                                       const std::vector<Vec>& data, const Mat& targets, const std::vector<int>& idx,
                                       double alpha_sub, double alpha_iso, Vec* grad) {
  detail::check_targets(data, targets);
  if (net.dim() != head.dim()) throw Error(ErrorCode::InvalidArgument, "network dimension does not match the head");
  const int m = static_cast<int>(idx.size());
  std::vector<detail::LatentSample> s(m);
  std::vector<std::vector<detail::BlockTape>> tapes(grad ? m : 0);
  for (int i = 0; i < m; ++i) {
    const Vec u = head.orthogonal * (data[idx[i]] - head.center);
    s[i] = detail::network_forward(net, u, grad ? &tapes[i] : nullptr);
  }
  const ModelManifold model = head.model();
  if (!grad) return detail::latent_objective(head, model, s, idx, targets, alpha_sub, alpha_iso, nullptr, nullptr);

  std::vector<Vec> ybar;
  std::vector<Mat> mbar;
  const LossBreakdown out = detail::latent_objective(head, model, s, idx, targets, alpha_sub, alpha_iso, &ybar, &mbar);
  *grad = Vec::Zero(net.num_params());
  for (int i = 0; i < m; ++i) detail::network_backward(net, tapes[i], ybar[i], mbar[i], *grad);
  return out;
}

/// Loss of any composite diffeomorphism over all of data.
inline LossBreakdown loss(const CompositeDiffeo& phi, const std::vector<Vec>& data, const Mat& targets,
                          double alpha_sub, double alpha_iso) {
  detail::check_targets(data, targets);
  const LearningHead head = LearningHead::of(phi);
  const int n = static_cast<int>(data.size());
  std::vector<detail::LatentSample> s(n);
  for (int i = 0; i < n; ++i) {
    const Vec u = phi.orthogonal() * (data[i] - phi.center());
    s[i] = {phi.network()->forward(u), phi.network()->jacobian(u)};
  }
  return detail::latent_objective(head, phi.codomain(), s, detail::all_indices(n), targets, alpha_sub, alpha_iso,
                                  nullptr, nullptr);
}

/// Gradient of the loss on data[batch] with respect to the network parameters.
inline Vec grad_loss(const CompositeDiffeo& phi, const std::vector<Vec>& data, const Mat& targets,
                     const std::vector<int>& batch, double alpha_sub, double alpha_iso) {
  const auto* net = dynamic_cast<const InvertibleResNet*>(phi.network().get());
  if (!net) throw Error(ErrorCode::InvalidArgument, "gradient needs a residual-network diffeomorphism");
  Vec g;
  network_objective(*net, LearningHead::of(phi), data, targets, batch, alpha_sub, alpha_iso, &g);
  return g;
}

}  // namespace pbgeo
