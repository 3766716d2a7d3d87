#pragma once

// Invertible maps R^d -> R^d used as the learnable factor of a composite
// diffeomorphism.

#include <Eigen/Dense>

#include "pbgeo/error.hpp"

namespace pbgeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class EuclideanMap {
 public:
  virtual ~EuclideanMap() = default;

  virtual int dim() const = 0;
  virtual Vec forward(const Vec& x) const = 0;
  virtual Vec inverse(const Vec& y) const = 0;
  /// D_x psi [v].
  virtual Vec jvp(const Vec& x, const Vec& v) const = 0;

  virtual Mat jacobian(const Vec& x) const {
    const int d = dim();
    Mat j(d, d);
    for (int k = 0; k < d; ++k) j.col(k) = jvp(x, Vec::Unit(d, k));
    return j;
  }

  /// (D_x psi)^{-1} [w], x a point of the domain.
  virtual Vec solve_jvp(const Vec& x, const Vec& w) const {
    Eigen::PartialPivLU<Mat> lu(jacobian(x));
    return lu.solve(w);
  }

  /// D_y psi^{-1} [w].
  Vec inverse_jvp(const Vec& y, const Vec& w) const { return solve_jvp(inverse(y), w); }
};

class IdentityMap final : public EuclideanMap {
 public:
  explicit IdentityMap(int d) : d_(d) {}
  int dim() const override { return d_; }
  Vec forward(const Vec& x) const override { return x; }
  Vec inverse(const Vec& y) const override { return y; }
  Vec jvp(const Vec&, const Vec& v) const override { return v; }
  Mat jacobian(const Vec&) const override { return Mat::Identity(d_, d_); }
  Vec solve_jvp(const Vec&, const Vec& w) const override { return w; }

 private:
  int d_;
};

/// x -> A x + b with A invertible.
class LinearMap final : public EuclideanMap {
 public:
  LinearMap(Mat a, Vec b) : a_(std::move(a)), b_(std::move(b)), lu_(a_) {
    if (a_.rows() != a_.cols() || b_.size() != a_.rows())
      throw Error(ErrorCode::InvalidArgument, "linear map needs a square matrix and matching offset");
    if (std::abs(lu_.determinant()) < 1e-300) throw Error(ErrorCode::SingularJacobian, "linear map is singular");
  }
  explicit LinearMap(Mat a) : LinearMap(a, Vec::Zero(a.rows())) {}

  int dim() const override { return static_cast<int>(a_.rows()); }
  Vec forward(const Vec& x) const override { return a_ * x + b_; }
  Vec inverse(const Vec& y) const override { return lu_.solve(y - b_); }
  Vec jvp(const Vec&, const Vec& v) const override { return a_ * v; }
  Mat jacobian(const Vec&) const override { return a_; }
  Vec solve_jvp(const Vec&, const Vec& w) const override { return lu_.solve(w); }

  const Mat& matrix() const { return a_; }
  const Vec& offset() const { return b_; }

 private:
  Mat a_;
  Vec b_;
  Eigen::PartialPivLU<Mat> lu_;
};

}  // namespace pbgeo
