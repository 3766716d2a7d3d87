// Command-line front end for the experiment harness.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "pbgeo/pbgeo.hpp"

namespace {

using namespace pbgeo;
namespace fs = std::filesystem;

// Flags shared by the subcommands; each overrides the JSON config only when given.
struct CommonFlags {
  std::string config, dataset, geometry, out;
  int n_points = 0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  double alpha_sub = 0.0, alpha_iso = 0.0;
  int epochs = 0, knn_k = 0;
  std::string checkpoint;
  CLI::Option *o_dataset = nullptr, *o_geometry = nullptr, *o_n = nullptr, *o_noise = nullptr, *o_seed = nullptr,
              *o_asub = nullptr, *o_aiso = nullptr, *o_epochs = nullptr, *o_k = nullptr;

  void add(CLI::App* app, bool training_flags) {
    app->add_option("--config", config, "JSON experiment configuration")->check(CLI::ExistingFile);
    o_dataset = app->add_option("--dataset", dataset, "hyperbolic | circle | spiral");
    o_geometry = app->add_option("--geometry", geometry, "hyperbolic | spherical | learned");
    o_n = app->add_option("--n-points", n_points, "number of data points");
    o_noise = app->add_option("--noise", noise, "Gaussian noise sigma");
    o_seed = app->add_option("--seed", seed, "seed for data, network init and shuffling");
    app->add_option("--out", out, "output directory");
    if (training_flags) {
      o_asub = app->add_option("--alpha-sub", alpha_sub, "subspace weight");
      o_aiso = app->add_option("--alpha-iso", alpha_iso, "isometry weight");
      o_epochs = app->add_option("--epochs", epochs, "training epochs");
      o_k = app->add_option("--knn-k", knn_k, "initial neighbour count for graph distances");
      app->add_option("--checkpoint", checkpoint, "load a trained diffeomorphism instead of training")
          ->check(CLI::ExistingFile);
    }
  }

  ExperimentConfig resolve(ExperimentConfig base) const {
    ExperimentConfig c = config.empty() ? base : experiment_config_from_json(read_json(config), base);
    if (o_dataset && o_dataset->count()) {
      c.data.kind = dataset_from_string(dataset);
      c.geometry = default_geometry(c.data.kind);
    }
    if (o_geometry && o_geometry->count()) c.geometry = geometry_from_string(geometry);
    if (o_n && o_n->count()) c.data.n_points = n_points;
    if (o_noise && o_noise->count()) c.data.noise_sigma = noise;
    if (o_seed && o_seed->count()) c.data.seed = c.train.seed = seed;
    if (o_asub && o_asub->count()) c.train.alpha_sub = alpha_sub;
    if (o_aiso && o_aiso->count()) c.train.alpha_iso = alpha_iso;
    if (o_epochs && o_epochs->count()) c.train.epochs = epochs;
    if (o_k && o_k->count()) c.train.knn_k = knn_k;
    if (!out.empty()) c.output_dir = out;
    if (!checkpoint.empty()) {
      const Json j = read_json(checkpoint);
      c.diffeo = std::make_shared<const CompositeDiffeo>(diffeo_from_json(j.contains("diffeo") ? j.at("diffeo") : j));
    }
    c.validate();
    return c;
  }
};

struct StageFailure : std::runtime_error {
  std::string stage;
  StageFailure(std::string s, const std::string& what) : std::runtime_error(what), stage(std::move(s)) {}
};

template <class F>
auto stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const StageFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw StageFailure(name, e.what());
  }
}

void report(const ExperimentResult& r) {
  std::cout << r.summary.dump(2) << '\n';
  if (const StageStatus* f = r.first_failure()) throw StageFailure(f->name, f->error);
}

int cmd_generate(const CommonFlags& f) {
  const ExperimentConfig c = stage("config", [&] { return f.resolve(ExperimentConfig{}); });
  const Dataset d = stage("data", [&] { return generate_dataset(c.data); });
  CsvTable t({"index", "x0", "x1", "clean_x0", "clean_x1"});
  for (size_t i = 0; i < d.points.size(); ++i)
    t.add_row({std::to_string(i), fmt_double(d.points[i](0)), fmt_double(d.points[i](1)), fmt_double(d.clean[i](0)),
               fmt_double(d.clean[i](1))});
  if (c.output_dir.empty()) {
    std::cout << t.str();
  } else {
    stage("output", [&] {
      fs::create_directories(c.output_dir);
      t.write((fs::path(c.output_dir) / "data.csv").string());
      return 0;
    });
  }
  return 0;
}

int cmd_train(const CommonFlags& f) {
  ExperimentConfig base = spiral_experiment_config();
  const ExperimentConfig c = stage("config", [&] { return f.resolve(base); });
  const Dataset d = stage("data", [&] { return generate_dataset(c.data); });
  const Vec z = c.z();
  const TrainResult tr = stage("train", [&] {
    const Mat O = local_pca_frame(d.points, z, c.pca_radius_fraction * diameter(d.points));
    return train(d.points, c.train, ChartKind::Identity, 1, z, O, nullptr, [](int epoch, const LossBreakdown& l) {
      std::fprintf(stderr, "epoch %3d  total %.6g  distance %.6g  subspace %.6g  isometry %.6g\n", epoch + 1, l.total,
                   l.distance_term, l.subspace_term, l.isometry_term);
    });
  });
  Json ck = checkpoint_json(*tr.diffeo, c.train, tr.history);
  ck["knn_k"] = tr.knn_k;
  if (c.output_dir.empty()) {
    std::cout << ck.dump(2) << '\n';
  } else {
    stage("output", [&] {
      fs::create_directories(c.output_dir);
      write_json((fs::path(c.output_dir) / "checkpoint.json").string(), ck);
      return 0;
    });
  }
  return 0;
}

int cmd_experiment(const CommonFlags& f, bool interp, bool bary, bool rae) {
  ExperimentConfig c = stage("config", [&] { return f.resolve(spiral_experiment_config()); });
  c.run_interpolation = interp;
  c.run_barycentre = bary;
  c.run_rae = rae;
  report(run_experiment(c));
  return 0;
}

int cmd_table1(const CommonFlags& f, int seeds) {
  const ExperimentConfig c = stage("config", [&] { return f.resolve(spiral_experiment_config()); });
  const Table1Result t = stage("train", [&] {
    return reproduce_table1(c, seeds, [](const Table1Run& r) {
      std::fprintf(stderr, "seed %llu phi%d  geodesic %.4f  variation %.4f\n",
                   static_cast<unsigned long long>(r.seed), r.setting + 1, r.geodesic.mean, r.variation.mean);
    });
  });
  const CsvTable csv = table1_csv(t);
  if (c.output_dir.empty()) {
    std::cout << csv.str();
  } else {
    stage("output", [&] {
      fs::create_directories(c.output_dir);
      csv.write((fs::path(c.output_dir) / "table1.csv").string());
      return 0;
    });
  }
  return 0;
}

int cmd_bench(const CommonFlags& f, int reps) {
  const ExperimentConfig c = stage("config", [&] { return f.resolve(ExperimentConfig{}); });
  CsvTable t({"operation", "geometry", "calls", "seconds_per_call"});
  std::mt19937_64 rng(c.data.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rnd = [&] {
    Vec x(2);
    x << u(rng), u(rng);
    return x;
  };
  auto time = [&](const std::string& op, const std::string& geo, int calls, const std::function<void()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < calls; ++i) body();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    t.add_row({op, geo, std::to_string(calls), fmt_double(s / calls)});
  };
  stage("bench", [&] {
    const std::pair<std::string, ChartKind> charts[] = {
        {"identity", ChartKind::Identity}, {"hyperbolic", ChartKind::Hyperboloid}, {"spherical", ChartKind::Stereographic}};
    for (const auto& [name, chart] : charts) {
      const PullbackSpace s(std::make_shared<const CompositeDiffeo>(CompositeDiffeo::chart_at(chart, Vec::Zero(2))));
      const Vec x = rnd(), y = rnd(), v = rnd();
      time("geodesic", name, reps, [&] { (void)s.geodesic(x, y, 0.3); });
      time("log", name, reps, [&] { (void)s.log(x, y); });
      time("exp", name, reps, [&] { (void)s.exp(x, v); });
      time("distance", name, reps, [&] { (void)s.distance(x, y); });
    }
    ExperimentConfig bc = c;
    bc.data.kind = DatasetKind::HyperbolicBranch;
    const Dataset d = generate_dataset(bc.data);
    const PullbackSpace hs(std::make_shared<const CompositeDiffeo>(native_diffeo(DatasetKind::HyperbolicBranch)));
    time("barycentre", "hyperbolic", 10, [&] { (void)barycentre(hs, d.points); });

    ExperimentConfig sc = spiral_experiment_config();
    sc.data.n_points = 256;
    const Dataset sd = generate_dataset(sc.data);
    TrainConfig tc = sc.train;
    tc.epochs = 1;
    const Mat O = local_pca_frame(sd.points, Vec::Zero(2), 0.1 * diameter(sd.points));
    const Mat targets = isomap_distances_connected(sd.points, tc.knn_k, &tc.knn_k);
    time("train_epoch_256_points", "learned", 1, [&] { (void)train(sd.points, tc, ChartKind::Identity, 1, Vec::Zero(2), O, &targets); });
    return 0;
  });
  if (c.output_dir.empty()) {
    std::cout << t.str();
  } else {
    fs::create_directories(c.output_dir);
    t.write((fs::path(c.output_dir) / "bench.csv").string());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pullback geometry experiments"};
  app.require_subcommand(1);

  CommonFlags gen, tr, interp, bary, rae, run, bench, table;
  int seeds = 3, reps = 10000;
  auto* s_gen = app.add_subcommand("generate", "write a toy data set as CSV");
  gen.add(s_gen, false);
  auto* s_tr = app.add_subcommand("train", "train a diffeomorphism on a data set and write a checkpoint");
  tr.add(s_tr, true);
  auto* s_interp = app.add_subcommand("interpolate", "geodesic interpolation, its variation and error metrics");
  interp.add(s_interp, true);
  auto* s_bary = app.add_subcommand("barycentre", "barycentre and its stability under perturbed data");
  bary.add(s_bary, true);
  auto* s_rae = app.add_subcommand("autoencode", "tangent-space logs and RAE projections");
  rae.add(s_rae, true);
  auto* s_run = app.add_subcommand("run", "every experiment stage");
  run.add(s_run, true);
  auto* s_bench = app.add_subcommand("bench", "time the main operations");
  bench.add(s_bench, false);
  s_bench->add_option("--reps", reps, "calls per timed operation")->check(CLI::PositiveNumber);
  auto* s_table = app.add_subcommand("reproduce-table1", "four regularisation settings on the spiral over several seeds");
  table.add(s_table, true);
  s_table->add_option("--seeds", seeds, "number of seeds")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (s_gen->parsed()) return cmd_generate(gen);
    if (s_tr->parsed()) return cmd_train(tr);
    if (s_interp->parsed()) return cmd_experiment(interp, true, false, false);
    if (s_bary->parsed()) return cmd_experiment(bary, false, true, false);
    if (s_rae->parsed()) return cmd_experiment(rae, false, false, true);
    if (s_run->parsed()) return cmd_experiment(run, true, true, true);
    if (s_bench->parsed()) return cmd_bench(bench, reps);
    if (s_table->parsed()) return cmd_table1(table, seeds);
  } catch (const StageFailure& e) {
    std::cerr << "pbgeo: stage '" << e.stage << "' failed: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "pbgeo: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
