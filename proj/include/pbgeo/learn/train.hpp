#pragma once

// Mini-batch ADAM training of the residual network behind a fixed head.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "pbgeo/diffeo.hpp"
#include "pbgeo/error.hpp"
#include "pbgeo/learn/isomap.hpp"
#include "pbgeo/learn/objective.hpp"
#include "pbgeo/learn/resnet.hpp"

namespace pbgeo {

struct TrainConfig {
  int epochs = 20;
  int batch_size = 64;
  double lr = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.99;
  double adam_eps = 1e-8;
  double alpha_sub = 0.0;
  double alpha_iso = 0.0;
  std::uint64_t seed = 0;
  int knn_k = 2;
  // Network shape.
  int blocks = 100;
  int width = 10;
  double lipschitz_scale = 0.8;
  int power_iters = 10;
  double init_scale = 1e-2;
  // Round-trip check on a few points after every update (0 disables).
  int probe_points = 0;
  double probe_tol = 1e-6;

  void validate() const {
    if (epochs < 1 || batch_size < 1 || !(lr > 0.0) || !(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
        !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) || !(adam_eps > 0.0) || alpha_sub < 0.0 || alpha_iso < 0.0 ||
        knn_k < 1 || blocks < 0 || width < 1 || power_iters < 1 || probe_points < 0)
      throw Error(ErrorCode::InvalidArgument, "invalid training configuration");
  }
};

class Adam {
 public:
  Adam(int n, double lr, double beta1, double beta2, double eps)
      : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps), m_(Vec::Zero(n)), v_(Vec::Zero(n)) {}

  /// Returns the update to add to the parameters.
  Vec step(const Vec& g) {
    ++t_;
    m_ = b1_ * m_ + (1.0 - b1_) * g;
    v_ = b2_ * v_ + (1.0 - b2_) * g.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1_, t_);
    const double c2 = 1.0 - std::pow(b2_, t_);
    return (-lr_ * (m_ / c1).array() / ((v_ / c2).array().sqrt() + eps_)).matrix();
  }

  int steps() const { return t_; }

 private:
  double lr_, b1_, b2_, eps_;
  Vec m_, v_;
  int t_ = 0;
};

struct TrainResult {
  std::shared_ptr<const InvertibleResNet> network;
  std::shared_ptr<const CompositeDiffeo> diffeo;
  std::vector<LossBreakdown> history;  // per-epoch mean of the batch losses
  LossBreakdown final_loss;            // full-data loss after training
  Mat targets;
  int knn_k = 0;  // neighbour count that produced a connected graph
  double max_probe_error = 0.0;
};

/// Trains psi for phi = zeta o psi o O(. - c). Targets are computed on the full
/// data set when not supplied, raising k until the neighbour graph is connected.
inline TrainResult train(const std::vector<Vec>& data, const TrainConfig& cfg, ChartKind chart, int split_dim,
                         const Vec& center, const Mat& orthogonal, const Mat* targets = nullptr,
                         const std::function<void(int, const LossBreakdown&)>& on_epoch = {}) {
  cfg.validate();
  const int n = static_cast<int>(data.size());
  if (n < 2) throw Error(ErrorCode::EmptyData, "training needs at least two points");
  const int d = static_cast<int>(center.size());
  // Validates the head before any work is done.
  CompositeDiffeo(center, orthogonal, nullptr, chart, split_dim);

  TrainResult out;
  if (targets) {
    out.targets = *targets;
    out.knn_k = cfg.knn_k;
  } else {
    out.targets = isomap_distances_connected(data, cfg.knn_k, &out.knn_k);
  }
  const LearningHead head{center, orthogonal, chart, split_dim};

  std::seed_seq init_seq{cfg.seed, std::uint64_t(0x1)};
  std::seed_seq shuffle_seq{cfg.seed, std::uint64_t(0x2)};
  std::mt19937_64 init_rng(init_seq), shuffle_rng(shuffle_seq);
  auto net = std::make_shared<InvertibleResNet>(InvertibleResNet::random(
      d, cfg.blocks, cfg.width, cfg.lipschitz_scale, cfg.power_iters, init_rng, cfg.init_scale));

  Adam adam(net->num_params(), cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  std::vector<int> order = detail::all_indices(n);
  Vec grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    LossBreakdown acc;
    int batches = 0;
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int stop = std::min(n, start + cfg.batch_size);
      const std::vector<int> batch(order.begin() + start, order.begin() + stop);
      const LossBreakdown l = network_objective(*net, head, data, out.targets, batch, cfg.alpha_sub, cfg.alpha_iso, &grad);
      net->set_params(net->params() + adam.step(grad));
      net->spectral_normalize();
      acc.distance_term += l.distance_term;
      acc.subspace_term += l.subspace_term;
      acc.isometry_term += l.isometry_term;
      acc.total += l.total;
      ++batches;

      for (int k = 0; k < std::min(cfg.probe_points, stop - start); ++k) {
        const Vec u = orthogonal * (data[batch[k]] - center);
        const double err = (net->inverse(net->forward(u)) - u).norm();
        out.max_probe_error = std::max(out.max_probe_error, err);
        if (err > cfg.probe_tol)
          throw Error(ErrorCode::FixedPointDivergence, "network round trip failed after a training step");
      }
    }
    acc.distance_term /= batches;
    acc.subspace_term /= batches;
    acc.isometry_term /= batches;
    acc.total /= batches;
    out.history.push_back(acc);
    if (on_epoch) on_epoch(epoch, acc);
  }

  out.final_loss = network_objective(*net, head, data, out.targets, detail::all_indices(n), cfg.alpha_sub,
                                     cfg.alpha_iso, nullptr);
  out.network = net;
  out.diffeo = std::make_shared<const CompositeDiffeo>(center, orthogonal, net, chart, split_dim);
  return out;
}

}  // namespace pbgeo
