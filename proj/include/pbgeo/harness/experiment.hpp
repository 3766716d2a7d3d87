#pragma once

// End-to-end experiments on the toy data sets: interpolation, barycentres,
// tangent-space logs and RAE projections under one pullback geometry, plus the
// four-setting sweep on the spiral.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pbgeo/barycentre.hpp"
#include "pbgeo/diffeo.hpp"
#include "pbgeo/error.hpp"
#include "pbgeo/harness/datasets.hpp"
#include "pbgeo/harness/metrics.hpp"
#include "pbgeo/harness/output.hpp"
#include "pbgeo/learn/isomap.hpp"
#include "pbgeo/learn/train.hpp"
#include "pbgeo/pullback.hpp"
#include "pbgeo/rae.hpp"
#include "pbgeo/serialize.hpp"

namespace pbgeo {

enum class GeometryKind { HyperbolicPullback, SphericalPullback, LearnedEuclidean };

inline std::string to_string(GeometryKind g) {
  switch (g) {
    case GeometryKind::HyperbolicPullback: return "hyperbolic";
    case GeometryKind::SphericalPullback: return "spherical";
    case GeometryKind::LearnedEuclidean: return "learned";
  }
  return "?";
}

inline GeometryKind geometry_from_string(const std::string& s) {
  if (s == "hyperbolic") return GeometryKind::HyperbolicPullback;
  if (s == "spherical") return GeometryKind::SphericalPullback;
  if (s == "learned") return GeometryKind::LearnedEuclidean;
  throw Error(ErrorCode::InvalidArgument, "unknown geometry '" + s + "'");
}

inline GeometryKind default_geometry(DatasetKind k) {
  switch (k) {
    case DatasetKind::HyperbolicBranch: return GeometryKind::HyperbolicPullback;
    case DatasetKind::CircleArc: return GeometryKind::SphericalPullback;
    case DatasetKind::Spiral: break;
  }
  return GeometryKind::LearnedEuclidean;
}

struct ExperimentConfig {
  DatasetParams data;
  GeometryKind geometry = GeometryKind::LearnedEuclidean;
  TrainConfig train;  // alpha_sub / alpha_iso select the learned setting
  std::optional<Vec> base_point;  // data set default when empty
  std::string output_dir;         // no files are written when empty
  int interpolation_samples = 101;
  double variation_fraction = 0.1;  // out-of-distribution start point, see default_variation_point
  std::vector<double> perturbation_scales{1e-3, 1e-2};  // times the data diameter
  int perturbation_trials = 20;
  int rae_rank = 1;
  RaeMode rae_mode = RaeMode::RAE;
  double pca_radius_fraction = 0.1;  // local PCA radius for O, times the diameter
  // Stage selection.
  bool run_interpolation = true;
  bool run_barycentre = true;
  bool run_rae = true;
  // Replaces the configured geometry when set (e.g. a loaded checkpoint).
  std::shared_ptr<const CompositeDiffeo> diffeo;

  void validate() const {
    data.validate();
    train.validate();
    if (interpolation_samples < 2 || perturbation_trials < 0 || rae_rank < 1 || !(variation_fraction >= 0.0) ||
        !(pca_radius_fraction > 0.0))
      throw Error(ErrorCode::InvalidArgument, "invalid experiment configuration");
    for (double s : perturbation_scales)
      if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "perturbation scales must be positive");
    if (base_point && base_point->size() != 2) throw Error(ErrorCode::InvalidArgument, "base point must be planar");
  }

  Vec z() const { return base_point ? *base_point : default_base_point(data.kind); }
};

/// Spiral defaults shared by the learned experiments and the sweep.
inline ExperimentConfig spiral_experiment_config() {
  ExperimentConfig c;
  c.data.kind = DatasetKind::Spiral;
  c.data.n_points = 2000;
  c.data.noise_sigma = 0.01;
  c.geometry = GeometryKind::LearnedEuclidean;
  c.train.alpha_sub = 10.0;
  c.train.alpha_iso = 0.01;
  return c;
}

inline Json to_json(const ExperimentConfig& c) {
  Json j = {{"dataset", to_string(c.data.kind)},
            {"n_points", c.data.n_points},
            {"noise_sigma", c.data.noise_sigma},
            {"seed", c.data.seed},
            {"hyperbolic_half_length", c.data.hyperbolic_half_length},
            {"hyperbolic_angle", c.data.hyperbolic_angle},
            {"circle_half_length", c.data.circle_half_length},
            {"circle_angle", c.data.circle_angle},
            {"spiral_arms", c.data.spiral_arms},
            {"spiral_a", c.data.spiral_a},
            {"spiral_b", c.data.spiral_b},
            {"spiral_theta_max", c.data.spiral_theta_max},
            {"geometry", to_string(c.geometry)},
            {"train", to_json(c.train)},
            {"output_dir", c.output_dir},
            {"interpolation_samples", c.interpolation_samples},
            {"variation_fraction", c.variation_fraction},
            {"perturbation_scales", c.perturbation_scales},
            {"perturbation_trials", c.perturbation_trials},
            {"rae_rank", c.rae_rank},
            {"rae_mode", to_string(c.rae_mode)},
            {"pca_radius_fraction", c.pca_radius_fraction}};
  if (c.base_point) {
    Json z = Json::array();
    for (Eigen::Index k = 0; k < c.base_point->size(); ++k) z.push_back((*c.base_point)(k));
    j["base_point"] = z;
  }
  return j;
}

/// Missing keys keep the values in `c`; a dataset key without a geometry key
/// selects that data set's native geometry.
inline ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig c = {}) {
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    if (j.contains("dataset")) {
      c.data.kind = dataset_from_string(j.at("dataset").get<std::string>());
      c.geometry = default_geometry(c.data.kind);
    }
    get("n_points", c.data.n_points);
    get("noise_sigma", c.data.noise_sigma);
    get("seed", c.data.seed);
    get("hyperbolic_half_length", c.data.hyperbolic_half_length);
    get("hyperbolic_angle", c.data.hyperbolic_angle);
    get("circle_half_length", c.data.circle_half_length);
    get("circle_angle", c.data.circle_angle);
    get("spiral_arms", c.data.spiral_arms);
    get("spiral_a", c.data.spiral_a);
    get("spiral_b", c.data.spiral_b);
    get("spiral_theta_max", c.data.spiral_theta_max);
    if (j.contains("geometry")) c.geometry = geometry_from_string(j.at("geometry").get<std::string>());
    if (j.contains("train")) c.train = train_config_from_json(j.at("train"), c.train);
    if (j.contains("base_point")) {
      const auto z = j.at("base_point").get<std::vector<double>>();
      c.base_point = Eigen::Map<const Vec>(z.data(), static_cast<Eigen::Index>(z.size()));
    }
    get("output_dir", c.output_dir);
    get("interpolation_samples", c.interpolation_samples);
    get("variation_fraction", c.variation_fraction);
    get("perturbation_scales", c.perturbation_scales);
    get("perturbation_trials", c.perturbation_trials);
    get("rae_rank", c.rae_rank);
    if (j.contains("rae_mode")) c.rae_mode = rae_mode_from_string(j.at("rae_mode").get<std::string>());
    get("pca_radius_fraction", c.pca_radius_fraction);
    c.validate();
    return c;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Format, e.what());
  }
}

struct StageStatus {
  std::string name;
  bool ok = true;
  std::string error;
};

struct BarycentreTrial {
  double fraction = 0.0;  // perturbation sigma as a fraction of the diameter
  double scale = 0.0;     // perturbation sigma in data units
  int trial = 0;
  bool converged = false;
  Vec full;    // barycentre of the perturbed data, initialised at x*
  Vec approx;  // one-step approximation from x*
  double full_displacement = 0.0;
  double approx_displacement = 0.0;
  double bound = 0.0;  // first-order bound for approx_displacement
};

struct GeodesicStabilityRow {
  double t = 0.0;
  double deviation = 0.0;
  double bound = 0.0;
};

struct ExperimentResult {
  Dataset data;
  std::shared_ptr<const PullbackSpace> space;
  std::optional<TrainResult> training;
  std::vector<StageStatus> stages;

  std::vector<double> interpolation_t;
  std::vector<Vec> interpolation, perturbed_interpolation;
  Vec variation_point;
  std::optional<ErrorStats> geodesic, variation;
  std::vector<GeodesicStabilityRow> geodesic_stability;

  std::optional<BarycentreResult> barycentre;
  std::vector<BarycentreTrial> barycentre_trials;

  std::vector<Vec> logs;
  std::optional<RaeModel> rae;
  std::vector<Vec> projections;
  std::vector<double> projection_residuals;  // distance to the noiseless curve

  Json summary;

  bool ok() const {
    return std::all_of(stages.begin(), stages.end(), [](const StageStatus& s) { return s.ok; });
  }
  const StageStatus* first_failure() const {
    for (const auto& s : stages)
      if (!s.ok) return &s;
    return nullptr;
  }
};

namespace detail {

inline std::vector<std::string> coord_header(const std::string& prefix, int d) {
  std::vector<std::string> h;
  for (int k = 0; k < d; ++k) h.push_back(prefix + std::to_string(k));
  return h;
}

inline void append(std::vector<std::string>& row, const Vec& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) row.push_back(fmt_double(v(k)));
}

inline std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

inline Json stats_json(const ErrorStats& s) { return {{"mean", s.mean}, {"std", s.std}}; }

inline bool run_stage(ExperimentResult& r, const std::string& name, const std::function<void()>& body) {
  StageStatus st{name, true, ""};
  try {
    body();
  } catch (const std::exception& e) {
    st.ok = false;
    st.error = e.what();
  }
  r.stages.push_back(st);
  return st.ok;
}

inline std::vector<Vec> perturb(const std::vector<Vec>& data, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Vec> out = data;
  for (Vec& x : out)
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) += sigma * n(rng);
  return out;
}

}  // namespace detail

/// Pullback space for the configured geometry; trains a network when learned.
inline std::shared_ptr<const PullbackSpace> build_space(const ExperimentConfig& cfg, const Dataset& data,
                                                        std::optional<TrainResult>* training = nullptr) {
  const Vec z = cfg.z();
  if (cfg.diffeo) return std::make_shared<const PullbackSpace>(cfg.diffeo);
  switch (cfg.geometry) {
    case GeometryKind::HyperbolicPullback:
      return std::make_shared<const PullbackSpace>(
          std::make_shared<const CompositeDiffeo>(CompositeDiffeo::chart_at(ChartKind::Hyperboloid, z)));
    case GeometryKind::SphericalPullback:
      return std::make_shared<const PullbackSpace>(
          std::make_shared<const CompositeDiffeo>(CompositeDiffeo::chart_at(ChartKind::Stereographic, z)));
    case GeometryKind::LearnedEuclidean: break;
  }
  const Mat O = local_pca_frame(data.points, z, cfg.pca_radius_fraction * diameter(data.points));
  TrainResult tr = train(data.points, cfg.train, ChartKind::Identity, 1, z, O);
  auto space = std::make_shared<const PullbackSpace>(tr.diffeo);
  if (training) *training = std::move(tr);
  return space;
}

/// Runs every stage; failures are recorded per stage and later stages that do
/// not depend on the failed one still run.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult r;
  const Vec z = cfg.z();

  detail::run_stage(r, "data", [&] { r.data = generate_dataset(cfg.data); });
  if (r.stages.back().ok) detail::run_stage(r, "geometry", [&] { r.space = build_space(cfg, r.data, &r.training); });

  if (r.space) {
    const PullbackSpace& s = *r.space;
    const auto& pts = r.data.points;

    if (cfg.run_interpolation) {
    detail::run_stage(r, "interpolation", [&] {
      r.variation_point = default_variation_point(pts, cfg.variation_fraction);
      for (int k = 0; k < cfg.interpolation_samples; ++k) {
        const double t = double(k) / double(cfg.interpolation_samples - 1);
        r.interpolation_t.push_back(t);
        r.interpolation.push_back(s.geodesic(pts.front(), pts.back(), t));
        r.perturbed_interpolation.push_back(s.geodesic(r.variation_point, pts.back(), t));
      }
      r.geodesic = geodesic_error_stats(s, pts);
      r.variation = variation_error_stats(s, pts, r.variation_point);
    });

    detail::run_stage(r, "geodesic_stability", [&] {
      if (r.variation_point.size() == 0) r.variation_point = default_variation_point(pts, cfg.variation_fraction);
      const double delta = (r.variation_point - pts.front()).norm();
      for (int k = 1; k <= 9; ++k) {
        const double t = 0.1 * k;
        GeodesicStabilityRow row;
        row.t = t;
        row.deviation = (s.geodesic(r.variation_point, pts.back(), t) - s.geodesic(pts.front(), pts.back(), t)).norm();
        row.bound = geodesic_stability_bound(s, pts.front(), pts.back(), Endpoint::Start, t).bound * delta;
        r.geodesic_stability.push_back(row);
      }
    });
    }

    if (cfg.run_barycentre) detail::run_stage(r, "barycentre", [&] { r.barycentre = barycentre_detailed(s, pts); });

    if (r.barycentre) {
      detail::run_stage(r, "perturbed_barycentre", [&] {
        const Vec xs = r.barycentre->x;
        const double diam = diameter(pts);
        std::seed_seq seq{cfg.data.seed, std::uint64_t(0x3)};
        std::mt19937_64 rng(seq);
        BarycentreOptions opts;
        opts.init = xs;
        for (double frac : cfg.perturbation_scales) {
          for (int trial = 0; trial < cfg.perturbation_trials; ++trial) {
            BarycentreTrial bt;
            bt.fraction = frac;
            bt.scale = frac * diam;
            bt.trial = trial;
            const std::vector<Vec> moved = detail::perturb(pts, bt.scale, rng);
            bt.approx = approximate_barycentre(s, xs, moved);
            bt.approx_displacement = (bt.approx - xs).norm();
            bt.bound = barycentre_stability_bound(s, pts, xs, moved);
            try {
              bt.full = barycentre(s, moved, opts);
              bt.full_displacement = (bt.full - xs).norm();
              bt.converged = true;
            } catch (const Error& e) {
              if (e.code() != ErrorCode::MaxItersExceeded) throw;
              bt.full = Vec::Constant(xs.size(), std::nan(""));
              bt.full_displacement = std::nan("");
            }
            r.barycentre_trials.push_back(bt);
          }
        }
      });
    }

    if (cfg.run_rae) {
    detail::run_stage(r, "logs", [&] {
      for (const Vec& x : pts) r.logs.push_back(s.log(z, x));
    });

    detail::run_stage(r, "rae", [&] {
      r.rae = fit_rae(r.space, pts, z, cfg.rae_rank, cfg.rae_mode);
      const std::vector<Vec> poly = curve_polyline(cfg.data);
      for (const Vec& x : pts) {
        r.projections.push_back(rae_project(*r.rae, x));
        r.projection_residuals.push_back(distance_to_polyline(poly, r.projections.back()));
      }
    });
    }
  }

  // Summary.
  Json& j = r.summary;
  j["dataset"] = to_string(cfg.data.kind);
  j["geometry"] = to_string(cfg.geometry);
  j["n_points"] = cfg.data.n_points;
  j["noise_sigma"] = cfg.data.noise_sigma;
  j["seed"] = cfg.data.seed;
  j["base_point"] = detail::vec_json(z);
  Json stages = Json::array();
  for (const auto& st : r.stages) {
    Json e = {{"stage", st.name}, {"ok", st.ok}};
    if (!st.ok) e["error"] = st.error;
    stages.push_back(e);
  }
  j["stages"] = stages;
  if (r.training) {
    j["training"] = {{"alpha_sub", cfg.train.alpha_sub},
                     {"alpha_iso", cfg.train.alpha_iso},
                     {"epochs", cfg.train.epochs},
                     {"knn_k", r.training->knn_k},
                     {"first_epoch", to_json(r.training->history.front())},
                     {"final", to_json(r.training->final_loss)}};
  }
  if (r.geodesic) j["geodesic_error"] = detail::stats_json(*r.geodesic);
  if (r.variation) {
    j["variation_error"] = detail::stats_json(*r.variation);
    j["variation_point"] = detail::vec_json(r.variation_point);
  }
  if (!r.geodesic_stability.empty()) {
    double worst = 0.0;
    for (const auto& g : r.geodesic_stability) worst = std::max(worst, g.bound > 0.0 ? g.deviation / g.bound : 0.0);
    j["geodesic_stability"] = {{"max_deviation_over_bound", worst}};
  }
  if (r.barycentre) {
    j["barycentre"] = {{"x", detail::vec_json(r.barycentre->x)},
                       {"iterations", r.barycentre->iterations},
                       {"distance_to_base_point", (r.barycentre->x - z).norm()}};
  }
  if (!r.barycentre_trials.empty()) {
    Json scales = Json::array();
    for (double frac : cfg.perturbation_scales) {
      double mean_full = 0.0, max_full = 0.0, mean_apx = 0.0, max_apx = 0.0, max_ratio = 0.0;
      int n = 0, failed = 0;
      for (const auto& t : r.barycentre_trials) {
        if (t.fraction != frac) continue;
        mean_apx += t.approx_displacement;
        max_apx = std::max(max_apx, t.approx_displacement);
        if (t.bound > 0.0) max_ratio = std::max(max_ratio, t.approx_displacement / t.bound);
        if (t.converged) {
          mean_full += t.full_displacement;
          max_full = std::max(max_full, t.full_displacement);
          ++n;
        } else {
          ++failed;
        }
      }
      const int total = n + failed;
      scales.push_back({{"scale_fraction", frac},
                        {"full_mean", n ? mean_full / n : 0.0},
                        {"full_max", max_full},
                        {"approx_mean", total ? mean_apx / total : 0.0},
                        {"approx_max", max_apx},
                        {"max_approx_over_bound", max_ratio},
                        {"unconverged", failed}});
    }
    j["perturbed_barycentre"] = scales;
  }
  if (r.rae) {
    double worst = 0.0;
    for (double e : r.projection_residuals) worst = std::max(worst, e);
    j["rae"] = {{"rank", r.rae->rank},
                {"mode", to_string(r.rae->mode)},
                {"singular_values", detail::vec_json(r.rae->singular_values)},
                {"max_residual_to_curve", worst}};
  }

  if (cfg.output_dir.empty()) return r;

  // Files.
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  auto path = [&](const std::string& f) { return (fs::path(cfg.output_dir) / f).string(); };
  const int d = r.data.points.empty() ? 2 : static_cast<int>(r.data.points.front().size());
  const auto X = detail::coord_header("x", d);

  if (!r.data.points.empty()) {
    CsvTable t(detail::concat(detail::concat({"index"}, X), detail::coord_header("clean_x", d)));
    for (size_t i = 0; i < r.data.points.size(); ++i) {
      std::vector<std::string> row{std::to_string(i)};
      detail::append(row, r.data.points[i]);
      detail::append(row, r.data.clean[i]);
      t.add_row(row);
    }
    t.write(path("data.csv"));
  }
  if (!r.interpolation.empty()) {
    CsvTable t(detail::concat(detail::concat({"t"}, X), detail::coord_header("perturbed_x", d)));
    for (size_t k = 0; k < r.interpolation.size(); ++k) {
      std::vector<std::string> row{fmt_double(r.interpolation_t[k])};
      detail::append(row, r.interpolation[k]);
      detail::append(row, r.perturbed_interpolation[k]);
      t.add_row(row);
    }
    t.write(path("interpolation.csv"));

    CsvTable e({"index", "t", "geodesic_error", "variation_error"});
    const auto tk = chord_parameters(r.data.points);
    for (size_t i = 0; i < tk.size(); ++i)
      e.add_row({std::to_string(i), fmt_double(tk[i]), fmt_double(r.geodesic->pointwise[i]),
                 fmt_double(r.variation->pointwise[i])});
    e.write(path("errors.csv"));

    SvgPlot svg("interpolation (" + to_string(cfg.geometry) + ")");
    svg.scatter(r.data.points, "#bbbbbb", 1.5);
    svg.polyline(r.interpolation, "#d95f02");
    svg.polyline(r.perturbed_interpolation, "#1b9e77");
    svg.write(path("interpolation.svg"));
  }
  if (!r.geodesic_stability.empty()) {
    CsvTable t({"t", "deviation", "bound"});
    for (const auto& g : r.geodesic_stability) t.add_row(std::vector<double>{g.t, g.deviation, g.bound});
    t.write(path("geodesic_stability.csv"));
  }
  if (!r.barycentre_trials.empty()) {
    CsvTable t(detail::concat(
        detail::concat(detail::concat({"scale", "trial", "converged"}, detail::coord_header("full_x", d)),
                       detail::coord_header("approx_x", d)),
        {"full_displacement", "approx_displacement", "bound"}));
    for (const auto& b : r.barycentre_trials) {
      std::vector<std::string> row{fmt_double(b.scale), std::to_string(b.trial), b.converged ? "1" : "0"};
      detail::append(row, b.full);
      detail::append(row, b.approx);
      row.push_back(fmt_double(b.full_displacement));
      row.push_back(fmt_double(b.approx_displacement));
      row.push_back(fmt_double(b.bound));
      t.add_row(row);
    }
    t.write(path("barycentre.csv"));
  }
  if (r.barycentre) {
    SvgPlot svg("barycentre (" + to_string(cfg.geometry) + ")");
    svg.scatter(r.data.points, "#bbbbbb", 1.5);
    std::vector<Vec> moved;
    for (const auto& b : r.barycentre_trials)
      if (b.converged) moved.push_back(b.full);
    svg.scatter(moved, "#1b9e77", 3.0);
    svg.scatter({r.barycentre->x}, "#d95f02", 5.0);
    svg.write(path("barycentre.svg"));
  }
  if (!r.logs.empty()) {
    CsvTable t(detail::concat({"index"}, detail::coord_header("log_x", d)));
    for (size_t i = 0; i < r.logs.size(); ++i) {
      std::vector<std::string> row{std::to_string(i)};
      detail::append(row, r.logs[i]);
      t.add_row(row);
    }
    t.write(path("logs.csv"));
    SvgPlot svg("tangent-space logs at z (" + to_string(cfg.geometry) + ")");
    svg.scatter(r.logs, "#7570b3", 1.5);
    svg.write(path("logs.svg"));
  }
  if (r.rae) {
    CsvTable t(detail::concat(
        detail::concat(detail::concat({"index"}, detail::coord_header("code", r.rae->rank)),
                       detail::coord_header("projection_x", d)),
        {"residual_to_curve"}));
    for (size_t i = 0; i < r.projections.size(); ++i) {
      std::vector<std::string> row{std::to_string(i)};
      detail::append(row, rae_encode(*r.rae, r.data.points[i]));
      detail::append(row, r.projections[i]);
      row.push_back(fmt_double(r.projection_residuals[i]));
      t.add_row(row);
    }
    t.write(path("rae.csv"));
    SvgPlot svg("RAE projection (" + to_string(cfg.geometry) + ")");
    svg.scatter(r.data.points, "#bbbbbb", 1.5);
    svg.scatter(r.projections, "#e7298a", 1.5);
    svg.write(path("rae.svg"));
  }
  if (r.training) {
    CsvTable t({"epoch", "distance", "subspace", "isometry", "total"});
    for (size_t e = 0; e < r.training->history.size(); ++e) {
      const auto& l = r.training->history[e];
      t.add_row({std::to_string(e + 1), fmt_double(l.distance_term), fmt_double(l.subspace_term),
                 fmt_double(l.isometry_term), fmt_double(l.total)});
    }
    t.write(path("training.csv"));
    write_json(path("checkpoint.json"), checkpoint_json(*r.training->diffeo, cfg.train, r.training->history));
  }
  write_json(path("summary.json"), r.summary);
  return r;
}

// -----------------------------------------------------------------------------
// Four-setting sweep on the spiral.

struct Table1Setting {
  double alpha_sub = 0.0;
  double alpha_iso = 0.0;
};

inline std::vector<Table1Setting> table1_settings() { return {{10.0, 0.01}, {10.0, 0.0}, {0.0, 0.01}, {0.0, 0.0}}; }

struct Table1Run {
  int setting = 0;  // 0-based index into table1_settings()
  std::uint64_t seed = 0;
  ErrorStats geodesic, variation;
  TrainResult training;
};

struct Table1Row {
  Table1Setting setting;
  ErrorStats geodesic, variation;  // pooled over seeds and points
};

struct Table1Result {
  std::vector<Table1Run> runs;
  std::vector<Table1Row> rows;
};

/// Trains each setting on seeds 0..seeds-1 (data noise and network init share
/// the seed) and evaluates geodesic and variation errors.
inline Table1Result reproduce_table1(const ExperimentConfig& base, int seeds,
                                     const std::function<void(const Table1Run&)>& on_run = {}) {
  if (seeds < 1) throw Error(ErrorCode::InvalidArgument, "need at least one seed");
  base.validate();
  const auto settings = table1_settings();
  Table1Result out;
  std::vector<std::vector<double>> geo(settings.size()), var(settings.size());
  for (int sd = 0; sd < seeds; ++sd) {
    ExperimentConfig cfg = base;
    cfg.data.seed = static_cast<std::uint64_t>(sd);
    cfg.train.seed = static_cast<std::uint64_t>(sd);
    cfg.geometry = GeometryKind::LearnedEuclidean;
    const Dataset data = generate_dataset(cfg.data);
    const Vec z = cfg.z();
    const Mat O = local_pca_frame(data.points, z, cfg.pca_radius_fraction * diameter(data.points));
    const Mat targets = isomap_distances_connected(data.points, cfg.train.knn_k, &cfg.train.knn_k);
    const Vec z_new = default_variation_point(data.points, cfg.variation_fraction);
    for (size_t k = 0; k < settings.size(); ++k) {
      cfg.train.alpha_sub = settings[k].alpha_sub;
      cfg.train.alpha_iso = settings[k].alpha_iso;
      Table1Run run;
      run.setting = static_cast<int>(k);
      run.seed = cfg.data.seed;
      run.training = train(data.points, cfg.train, ChartKind::Identity, 1, z, O, &targets);
      const PullbackSpace s(run.training.diffeo);
      run.geodesic = geodesic_error_stats(s, data.points);
      run.variation = variation_error_stats(s, data.points, z_new);
      geo[k].insert(geo[k].end(), run.geodesic.pointwise.begin(), run.geodesic.pointwise.end());
      var[k].insert(var[k].end(), run.variation.pointwise.begin(), run.variation.pointwise.end());
      if (on_run) on_run(run);
      out.runs.push_back(std::move(run));
    }
  }
  for (size_t k = 0; k < settings.size(); ++k) out.rows.push_back({settings[k], make_stats(geo[k]), make_stats(var[k])});
  return out;
}

/// One row per (setting, seed) plus a pooled row per setting with seed "all".
inline CsvTable table1_csv(const Table1Result& t) {
  CsvTable csv({"setting", "alpha_sub", "alpha_iso", "seed", "geodesic_mean", "geodesic_std", "variation_mean",
                "variation_std"});
  const auto settings = table1_settings();
  for (const auto& r : t.runs)
    csv.add_row({"phi" + std::to_string(r.setting + 1), fmt_double(settings[r.setting].alpha_sub),
                 fmt_double(settings[r.setting].alpha_iso), std::to_string(r.seed), fmt_double(r.geodesic.mean),
                 fmt_double(r.geodesic.std), fmt_double(r.variation.mean), fmt_double(r.variation.std)});
  for (size_t k = 0; k < t.rows.size(); ++k) {
    const auto& r = t.rows[k];
    csv.add_row({"phi" + std::to_string(k + 1), fmt_double(r.setting.alpha_sub), fmt_double(r.setting.alpha_iso), "all",
                 fmt_double(r.geodesic.mean), fmt_double(r.geodesic.std), fmt_double(r.variation.mean),
                 fmt_double(r.variation.std)});
  }
  return csv;
}

}  // namespace pbgeo
