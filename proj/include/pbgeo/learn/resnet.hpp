#pragma once

// Invertible residual network: a stack of blocks x -> x + f(x) with
//   f(x) = W3 elu(W2 elu(W1 x + b1) + b2) + b3,
// each weight matrix kept at spectral norm <= c < 1 so Lip(f) <= c^3 and every
// block is inverted by fixed-point iteration.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "pbgeo/error.hpp"
#include "pbgeo/euclidean_map.hpp"

namespace pbgeo {

inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_prime(double x) { return x > 0.0 ? 1.0 : std::exp(x); }
inline double elu_second(double x) { return x > 0.0 ? 0.0 : std::exp(x); }

inline Vec elu(const Vec& x) { return x.unaryExpr([](double t) { return elu(t); }); }
inline Vec elu_prime(const Vec& x) { return x.unaryExpr([](double t) { return elu_prime(t); }); }

struct ResidualBlock {
  Mat W1, W2, W3;  // h x d, h x h, d x h
  Vec b1, b2, b3;
  // Warm-started power-iteration vectors (right singular vector estimates).
  Vec u1, u2, u3;

  Vec residual(const Vec& x) const { return W3 * elu(Vec(W2 * elu(Vec(W1 * x + b1)) + b2)) + b3; }

  Vec residual_jvp(const Vec& x, const Vec& v) const {
    const Vec a1 = W1 * x + b1;
    const Vec h1 = elu(a1);
    const Vec a2 = W2 * h1 + b2;
    const Vec t1 = elu_prime(a1).cwiseProduct(W1 * v);
    const Vec t2 = elu_prime(a2).cwiseProduct(W2 * t1);
    return W3 * t2;
  }

  Mat residual_jacobian(const Vec& x) const {
    const Vec a1 = W1 * x + b1;
    const Vec a2 = W2 * elu(a1) + b2;
    return W3 * elu_prime(a2).asDiagonal() * W2 * elu_prime(a1).asDiagonal() * W1;
  }

  int num_params() const {
    return static_cast<int>(W1.size() + b1.size() + W2.size() + b2.size() + W3.size() + b3.size());
  }
};

struct InverseStats {
  int max_iterations = 0;    // over blocks
  double max_residual = 0.0;  // final fixed-point step size, max over blocks
};

/// Largest singular value by power iteration, warm-started from u (updated).
inline double power_iteration(const Mat& w, Vec& u, int iters) {
  if (w.size() == 0) return 0.0;
  if (u.size() != w.cols() || u.norm() == 0.0) {
    // Cold start from the largest row, which already leans towards the top singular vector.
    Eigen::Index r = 0;
    w.rowwise().squaredNorm().maxCoeff(&r);
    u = w.row(r).transpose();
    if (u.norm() == 0.0) return 0.0;
    u.normalize();
  }
  double sigma = 0.0;
  for (int k = 0; k < iters; ++k) {
    Vec v = w * u;
    const double vn = v.norm();
    if (vn == 0.0) return 0.0;
    v /= vn;
    Vec nu = w.transpose() * v;
    const double un = nu.norm();
    if (un == 0.0) return 0.0;
    u = nu / un;
    sigma = un;
  }
  return sigma;
}

class InvertibleResNet final : public EuclideanMap {
 public:
  InvertibleResNet(int dim, int width, double lipschitz_scale = 0.8, int power_iters = 10)
      : dim_(dim), width_(width), c_(lipschitz_scale), power_iters_(power_iters) {
    if (dim < 1 || width < 1) throw Error(ErrorCode::InvalidArgument, "network dimensions must be positive");
    if (!(c_ > 0.0 && c_ < 1.0)) throw Error(ErrorCode::InvalidArgument, "Lipschitz scale must lie in (0, 1)");
  }

  /// Gaussian fan-in init, last matrix of every branch scaled by 1e-2 so the
  /// network starts close to the identity.
  static InvertibleResNet random(int dim, int n_blocks, int width, double lipschitz_scale, int power_iters,
                                 std::mt19937_64& rng, double last_layer_scale = 1e-2) {
    InvertibleResNet net(dim, width, lipschitz_scale, power_iters);
    std::normal_distribution<double> n01(0.0, 1.0);
    auto gauss = [&](int r, int c, double s) {
      Mat m(r, c);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = s * n01(rng);
      return m;
    };
    auto gvec = [&](int n) {
      Vec v(n);
      for (int i = 0; i < n; ++i) v(i) = n01(rng);
      return Vec(v / v.norm());
    };
    for (int k = 0; k < n_blocks; ++k) {
      ResidualBlock b;
      b.W1 = gauss(width, dim, 1.0 / std::sqrt(double(dim)));
      b.W2 = gauss(width, width, 1.0 / std::sqrt(double(width)));
      b.W3 = gauss(dim, width, last_layer_scale / std::sqrt(double(width)));
      b.b1 = Vec::Zero(width);
      b.b2 = Vec::Zero(width);
      b.b3 = Vec::Zero(dim);
      b.u1 = gvec(dim);
      b.u2 = gvec(width);
      b.u3 = gvec(width);
      // Converge the persistent vectors once so later warm starts are accurate.
      power_iteration(b.W1, b.u1, 100);
      power_iteration(b.W2, b.u2, 100);
      power_iteration(b.W3, b.u3, 100);
      net.blocks_.push_back(std::move(b));
    }
    net.spectral_normalize();
    return net;
  }

  int dim() const override { return dim_; }
  int width() const { return width_; }
  double lipschitz_scale() const { return c_; }
  int power_iters() const { return power_iters_; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }

  const std::vector<ResidualBlock>& blocks() const { return blocks_; }
  std::vector<ResidualBlock>& blocks() { return blocks_; }

  void add_block(ResidualBlock b) {
    if (b.W1.rows() != width_ || b.W1.cols() != dim_ || b.W2.rows() != width_ || b.W2.cols() != width_ ||
        b.W3.rows() != dim_ || b.W3.cols() != width_ || b.b1.size() != width_ || b.b2.size() != width_ ||
        b.b3.size() != dim_)
      throw Error(ErrorCode::InvalidArgument, "residual block shape does not match the network");
    blocks_.push_back(std::move(b));
  }

  Vec forward(const Vec& x) const override {
    check(x);
    Vec y = x;
    for (const auto& b : blocks_) y += b.residual(y);
    return y;
  }

  Vec jvp(const Vec& x, const Vec& v) const override {
    check(x);
    check(v);
    Vec y = x, t = v;
    for (const auto& b : blocks_) {
      const Vec dt = b.residual_jvp(y, t);
      y += b.residual(y);
      t += dt;
    }
    return t;
  }

  Mat jacobian(const Vec& x) const override {
    check(x);
    Vec y = x;
    Mat j = Mat::Identity(dim_, dim_);
    for (const auto& b : blocks_) {
      j = (Mat::Identity(dim_, dim_) + b.residual_jacobian(y)) * j;
      y += b.residual(y);
    }
    return j;
  }

  Vec inverse(const Vec& y) const override { return inverse(y, 1e-10, 200, nullptr); }

  /// Blockwise fixed-point inversion x <- y - f(x), blocks in reverse order.
  Vec inverse(const Vec& y, double tol, int max_iter, InverseStats* stats) const {
    check(y);
    Vec x = y;
    InverseStats st;
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
      const Vec target = x;
      Vec xk = target;
      bool converged = false;
      double step = 0.0;
      int k = 0;
      while (k < max_iter) {
        const Vec next = target - it->residual(xk);
        step = (next - xk).norm();
        xk = next;
        ++k;
        if (!std::isfinite(step)) break;
        if (step < tol) {
          converged = true;
          break;
        }
      }
      if (!converged)
        throw Error(ErrorCode::FixedPointDivergence,
                    "block inverse did not reach tolerance after " + std::to_string(k) + " iterations");
      st.max_iterations = std::max(st.max_iterations, k);
      st.max_residual = std::max(st.max_residual, step);
      x = xk;
    }
    if (stats) *stats = st;
    return x;
  }

  /// W <- W / max(1, sigma(W) / c) with sigma from warm-started power iteration.
  void spectral_normalize() {
    for (auto& b : blocks_) {
      normalize(b.W1, b.u1);
      normalize(b.W2, b.u2);
      normalize(b.W3, b.u3);
    }
  }

  /// Power-iteration estimate of every weight matrix's spectral norm.
  std::vector<double> spectral_norm_estimates() {
    std::vector<double> out;
    for (auto& b : blocks_) {
      out.push_back(power_iteration(b.W1, b.u1, power_iters_));
      out.push_back(power_iteration(b.W2, b.u2, power_iters_));
      out.push_back(power_iteration(b.W3, b.u3, power_iters_));
    }
    return out;
  }

  // Flat parameter vector: per block W1 (row-major), b1, W2, b2, W3, b3.
  int num_params() const {
    int n = 0;
    for (const auto& b : blocks_) n += b.num_params();
    return n;
  }

  Vec params() const {
    Vec p(num_params());
    int o = 0;
    auto put = [&](const Mat& m) {
      for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) p(o++) = m(i, j);
    };
    for (const auto& b : blocks_) {
      put(b.W1);
      put(b.b1);
      put(b.W2);
      put(b.b2);
      put(b.W3);
      put(b.b3);
    }
    return p;
  }

  void set_params(const Vec& p) {
    if (p.size() != num_params()) throw Error(ErrorCode::InvalidArgument, "parameter vector has the wrong size");
    int o = 0;
    auto get = [&](auto& m) {
      for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m(i, j) = p(o++);
    };
    for (auto& b : blocks_) {
      get(b.W1);
      get(b.b1);
      get(b.W2);
      get(b.b2);
      get(b.W3);
      get(b.b3);
    }
  }

 private:
  void check(const Vec& x) const {
    if (x.size() != dim_) throw Error(ErrorCode::InvalidArgument, "network input has the wrong dimension");
  }

  void normalize(Mat& w, Vec& u) const {
    const double s = power_iteration(w, u, power_iters_);
    if (s > c_) w *= c_ / s;
  }

  int dim_;
  int width_;
  double c_;
  int power_iters_;
  std::vector<ResidualBlock> blocks_;
};

}  // namespace pbgeo
