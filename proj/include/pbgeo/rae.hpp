#pragma once

// Low-rank approximation of log-mapped data in the tangent space at a base
// point, the curvature-corrected coefficient solve, and the resulting
// (curvature-corrected) Riemannian autoencoder.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pbgeo/error.hpp"
#include "pbgeo/pullback.hpp"

namespace pbgeo {

enum class RaeMode { RAE, CCRAE };

inline std::string to_string(RaeMode m) { return m == RaeMode::RAE ? "rae" : "ccrae"; }

inline RaeMode rae_mode_from_string(const std::string& s) {
  if (s == "rae") return RaeMode::RAE;
  if (s == "ccrae") return RaeMode::CCRAE;
  throw Error(ErrorCode::InvalidArgument, "unknown autoencoder mode '" + s + "'");
}

struct TangentFrame {
  Vec base;
  std::vector<Vec> vectors;  // pb-orthonormal at base

  /// d x d matrix with the frame vectors as columns.
  Mat matrix() const {
    Mat m(base.size(), static_cast<Eigen::Index>(vectors.size()));
    for (size_t k = 0; k < vectors.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = vectors[k];
    return m;
  }
};

/// Gram-Schmidt in the pullback metric at z (two passes per vector).
inline std::vector<Vec> gram_schmidt_pb(const PullbackSpace& s, const Vec& z, const std::vector<Vec>& vectors) {
  const Mat g = s.gram(z);
  std::vector<Vec> out;
  for (const Vec& v : vectors) {
    Vec r = v;
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& q : out) r -= (q.dot(g * r)) * q;
    const double n = std::sqrt(std::max(r.dot(g * r), 0.0));
    if (n < 1e-10) throw Error(ErrorCode::DependentInput, "vectors are linearly dependent");
    out.push_back(r / n);
  }
  return out;
}

/// pb-orthonormalized standard basis at z.
inline TangentFrame standard_frame(const PullbackSpace& s, const Vec& z) {
  std::vector<Vec> e;
  for (int k = 0; k < s.dim(); ++k) e.push_back(Vec::Unit(s.dim(), k));
  return {z, gram_schmidt_pb(s, z, e)};
}

/// A(i, k) = (log_z x^i, Phi^k)_z.
inline Mat build_coefficient_matrix(const PullbackSpace& s, const Vec& z, const TangentFrame& frame,
                                    const std::vector<Vec>& data) {
  if (data.empty()) throw Error(ErrorCode::EmptyData, "no data points");
  const Mat gphi = s.gram(z) * frame.matrix();
  Mat a(static_cast<Eigen::Index>(data.size()), gphi.cols());
  for (size_t i = 0; i < data.size(); ++i) a.row(static_cast<Eigen::Index>(i)) = s.log(z, data[i]).transpose() * gphi;
  return a;
}

struct TangentSvd {
  Mat U;  // N x r
  Vec sigma;
  Mat W;  // d x r
};

/// Truncated thin SVD A ~ U diag(sigma) W^T, the largest-magnitude entry of each
/// column of W made non-negative.
inline TangentSvd tangent_svd(const Mat& a, int r) {
  if (r < 1 || r > std::min(a.rows(), a.cols())) throw Error(ErrorCode::InvalidArgument, "rank out of range");
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(r - 1) < 1e-12 * sv(0))
    throw Error(ErrorCode::RankDeficient, "requested rank exceeds the numerical rank");
  TangentSvd out{svd.matrixU().leftCols(r), sv.head(r), svd.matrixV().leftCols(r)};
  for (int l = 0; l < r; ++l) {
    Eigen::Index k = 0;
    out.W.col(l).cwiseAbs().maxCoeff(&k);
    if (out.W(k, l) < 0.0) {
      out.W.col(l) *= -1.0;
      out.U.col(l) *= -1.0;
    }
  }
  return out;
}

/// Data of the weighted least-squares problem for the corrected coefficients,
/// all expressed in frame coordinates.
struct CurvatureCorrectionProblem {
  Mat A;                           // N x d, frame coordinates of the logs
  std::vector<Mat> psi;            // per point, d x d, columns = eigenvectors in frame coordinates
  std::vector<Vec> kappa;          // per point, eigenvalues
  std::vector<Vec> weights;        // per point, beta_E(kappa)^2
};

inline CurvatureCorrectionProblem build_cc_problem(const PullbackSpace& s, const Vec& z, const TangentFrame& frame,
                                                   const std::vector<Vec>& data) {
  CurvatureCorrectionProblem p;
  p.A = build_coefficient_matrix(s, z, frame, data);
  const int d = s.dim();
  const Mat phi = frame.matrix();
  const Mat gphi = s.gram(z) * phi;
  for (size_t i = 0; i < data.size(); ++i) {
    const Vec w = phi * p.A.row(static_cast<Eigen::Index>(i)).transpose();
    Mat psi;
    Vec kappa;
    if (s.norm(z, w) < kZeroVector) {
      psi = Mat::Identity(d, d);
      kappa = Vec::Zero(d);
    } else {
      const PullbackSpectrum spec = s.curvature_spectrum(z, w);
      psi.resize(d, d);
      for (int j = 0; j < d; ++j) psi.col(j) = gphi.transpose() * spec.frame[j];
      kappa = spec.eigenvalues;
    }
    Vec wt(d);
    for (int j = 0; j < d; ++j) {
      const double b = beta_exp(kappa(j));
      wt(j) = b * b;
    }
    p.psi.push_back(psi);
    p.kappa.push_back(kappa);
    p.weights.push_back(wt);
  }
  return p;
}

/// sum_i sum_j beta_E(kappa_ij)^2 ((V^T u_i - a_i) . psi_ij)^2 for V of size r x d.
inline double cc_objective(const CurvatureCorrectionProblem& p, const Mat& U, const Mat& V) {
  double f = 0.0;
  for (Eigen::Index i = 0; i < p.A.rows(); ++i) {
    const Vec res = V.transpose() * U.row(i).transpose() - p.A.row(i).transpose();
    const Vec proj = p.psi[static_cast<size_t>(i)].transpose() * res;
    f += p.weights[static_cast<size_t>(i)].dot(proj.cwiseAbs2());
  }
  return f;
}

/// Exact minimizer of cc_objective over V via the (r d) x (r d) normal equations.
inline Mat solve_cc(const CurvatureCorrectionProblem& p, const Mat& U) {
  const int r = static_cast<int>(U.cols());
  const int d = static_cast<int>(p.A.cols());
  const int n = r * d;
  Mat h = Mat::Zero(n, n);
  Vec b = Vec::Zero(n);
  for (Eigen::Index i = 0; i < p.A.rows(); ++i) {
    const auto& psi = p.psi[static_cast<size_t>(i)];
    const auto& wt = p.weights[static_cast<size_t>(i)];
    for (int j = 0; j < d; ++j) {
      Vec k(n);
      for (int l = 0; l < r; ++l) k.segment(l * d, d) = U(i, l) * psi.col(j);
      const double t = p.A.row(i).dot(psi.col(j));
      h.noalias() += wt(j) * k * k.transpose();
      b += wt(j) * t * k;
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmax > 0.0)) throw Error(ErrorCode::SingularNormalEquations, "normal equations vanish");
  if (lmin <= 0.0 || lmax / lmin > 1e12) h.diagonal().array() += 1e-10 * h.trace();
  Eigen::LLT<Mat> llt(h);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularNormalEquations, "normal equations are singular");
  const Vec v = llt.solve(b);
  Mat V(r, d);
  for (int l = 0; l < r; ++l) V.row(l) = v.segment(l * d, d).transpose();
  return V;
}

struct CorrectedDirections {
  Mat V;                 // r x d coefficients in the frame
  std::vector<Vec> w_hat;  // w_hat^l = sum_m V(l, m) Phi^m
};

inline CorrectedDirections curvature_corrected_directions(const PullbackSpace& s, const Vec& z, const Mat& U,
                                                          const TangentFrame& frame, const std::vector<Vec>& data) {
  const CurvatureCorrectionProblem p = build_cc_problem(s, z, frame, data);
  CorrectedDirections out;
  out.V = solve_cc(p, U);
  const Mat phi = frame.matrix();
  for (Eigen::Index l = 0; l < out.V.rows(); ++l) out.w_hat.push_back(phi * out.V.row(l).transpose());
  return out;
}

// -----------------------------------------------------------------------------

struct RaeModel {
  std::shared_ptr<const PullbackSpace> space;
  Vec base;
  int rank = 0;
  RaeMode mode = RaeMode::RAE;
  std::vector<Vec> directions;  // pb-orthonormal w^1..w^r
  Mat codes;                    // N x r, training-set coefficients U~
  Vec singular_values;
  std::vector<Vec> corrected;  // w_hat (CC mode only)
};

inline RaeModel fit_rae(std::shared_ptr<const PullbackSpace> space, const std::vector<Vec>& data, const Vec& z, int r,
                        RaeMode mode) {
  if (!space) throw Error(ErrorCode::InvalidArgument, "null space");
  const PullbackSpace& s = *space;
  const TangentFrame frame = standard_frame(s, z);
  const Mat a = build_coefficient_matrix(s, z, frame, data);
  const TangentSvd svd = tangent_svd(a, r);
  const Mat phi = frame.matrix();

  RaeModel m;
  m.space = space;
  m.base = z;
  m.rank = r;
  m.mode = mode;
  m.singular_values = svd.sigma;
  if (mode == RaeMode::RAE) {
    for (int l = 0; l < r; ++l) m.directions.push_back(phi * svd.W.col(l));
    m.codes = svd.U * svd.sigma.asDiagonal();
  } else {
    const CorrectedDirections cd = curvature_corrected_directions(s, z, svd.U, frame, data);
    m.corrected = cd.w_hat;
    m.directions = gram_schmidt_pb(s, z, cd.w_hat);
    const Mat g = s.gram(z);
    Mat c(r, r);  // c(l', l) = (w_hat^l', w^l)_z
    for (int lp = 0; lp < r; ++lp)
      for (int l = 0; l < r; ++l) c(lp, l) = cd.w_hat[lp].dot(g * m.directions[l]);
    m.codes = svd.U * c;
  }
  return m;
}

inline RaeModel fit_rae(const PullbackSpace& space, const std::vector<Vec>& data, const Vec& z, int r, RaeMode mode) {
  return fit_rae(std::make_shared<const PullbackSpace>(space), data, z, r, mode);
}

/// E(x)_l = (log_z x, w^l)_z.
inline Vec rae_encode(const RaeModel& m, const Vec& x) {
  const Vec lg = m.space->log(m.base, x);
  const Mat g = m.space->gram(m.base);
  Vec code(m.rank);
  for (int l = 0; l < m.rank; ++l) code(l) = lg.dot(g * m.directions[l]);
  return code;
}

/// D(code) = exp_z(sum_l code_l w^l).
inline Vec rae_decode(const RaeModel& m, const Vec& code) {
  if (code.size() != m.rank) throw Error(ErrorCode::InvalidArgument, "code has the wrong length");
  Vec v = Vec::Zero(m.base.size());
  for (int l = 0; l < m.rank; ++l) v += code(l) * m.directions[l];
  return m.space->exp(m.base, v);
}

inline Vec rae_project(const RaeModel& m, const Vec& x) { return rae_decode(m, rae_encode(m, x)); }

}  // namespace pbgeo
