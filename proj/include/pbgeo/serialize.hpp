#pragma once

// JSON documents for diffeomorphisms, RAE models and training checkpoints.
// Every double is written as a C99 hex-float string so round trips are bit-exact.

#include <Eigen/Dense>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pbgeo/diffeo.hpp"
#include "pbgeo/error.hpp"
#include "pbgeo/euclidean_map.hpp"
#include "pbgeo/learn/objective.hpp"
#include "pbgeo/learn/resnet.hpp"
#include "pbgeo/learn/train.hpp"
#include "pbgeo/pullback.hpp"
#include "pbgeo/rae.hpp"

namespace pbgeo {

using Json = nlohmann::json;

inline std::string hex_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

inline double parse_double(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) throw Error(ErrorCode::Format, "expected a number or hex-float string");
  const std::string s = j.get<std::string>();
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw Error(ErrorCode::Format, "malformed number '" + s + "'");
  return x;
}

inline Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(hex_double(v(i)));
  return a;
}

inline Vec vec_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::Format, "expected an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_double(j[i]);
  return v;
}

inline Json to_json(const Mat& m) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) data.push_back(hex_double(m(i, k)));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

inline Mat mat_from_json(const Json& j) {
  try {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const Json& data = j.at("data");
    if (rows < 0 || cols < 0 || data.size() != static_cast<size_t>(rows * cols))
      throw Error(ErrorCode::Format, "matrix size does not match its data");
    Mat m(rows, cols);
    size_t o = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = parse_double(data[o++]);
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Format, e.what());
  }
}

inline Json network_to_json(const EuclideanMap& map) {
  if (const auto* net = dynamic_cast<const InvertibleResNet*>(&map)) {
    Json blocks = Json::array();
    for (const auto& b : net->blocks())
      blocks.push_back({{"W1", to_json(b.W1)},
                        {"b1", to_json(b.b1)},
                        {"W2", to_json(b.W2)},
                        {"b2", to_json(b.b2)},
                        {"W3", to_json(b.W3)},
                        {"b3", to_json(b.b3)},
                        {"u1", to_json(b.u1)},
                        {"u2", to_json(b.u2)},
                        {"u3", to_json(b.u3)}});
    return {{"type", "iresnet"},
            {"dim", net->dim()},
            {"width", net->width()},
            {"lipschitz_scale", hex_double(net->lipschitz_scale())},
            {"power_iters", net->power_iters()},
            {"blocks", blocks}};
  }
  if (const auto* lin = dynamic_cast<const LinearMap*>(&map))
    return {{"type", "linear"}, {"matrix", to_json(lin->matrix())}, {"offset", to_json(lin->offset())}};
  if (dynamic_cast<const IdentityMap*>(&map)) return {{"type", "identity"}, {"dim", map.dim()}};
  throw Error(ErrorCode::Format, "network type cannot be serialized");
}

inline std::shared_ptr<const EuclideanMap> network_from_json(const Json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "identity") return std::make_shared<IdentityMap>(j.at("dim").get<int>());
    if (type == "linear") return std::make_shared<LinearMap>(mat_from_json(j.at("matrix")), vec_from_json(j.at("offset")));
    if (type != "iresnet") throw Error(ErrorCode::Format, "unknown network type '" + type + "'");
    auto net = std::make_shared<InvertibleResNet>(j.at("dim").get<int>(), j.at("width").get<int>(),
                                                  parse_double(j.at("lipschitz_scale")), j.at("power_iters").get<int>());
    for (const Json& jb : j.at("blocks")) {
      ResidualBlock b;
      b.W1 = mat_from_json(jb.at("W1"));
      b.b1 = vec_from_json(jb.at("b1"));
      b.W2 = mat_from_json(jb.at("W2"));
      b.b2 = vec_from_json(jb.at("b2"));
      b.W3 = mat_from_json(jb.at("W3"));
      b.b3 = vec_from_json(jb.at("b3"));
      b.u1 = vec_from_json(jb.at("u1"));
      b.u2 = vec_from_json(jb.at("u2"));
      b.u3 = vec_from_json(jb.at("u3"));
      net->add_block(std::move(b));
    }
    return net;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Format, e.what());
  }
}

inline Json to_json(const CompositeDiffeo& phi) {
  return {{"center", to_json(phi.center())},
          {"orthogonal", to_json(phi.orthogonal())},
          {"chart", to_string(phi.chart())},
          {"split_dim", phi.split_dim()},
          {"network", network_to_json(*phi.network())}};
}

inline CompositeDiffeo diffeo_from_json(const Json& j) {
  try {
    return CompositeDiffeo(vec_from_json(j.at("center")), mat_from_json(j.at("orthogonal")),
                           network_from_json(j.at("network")), chart_from_string(j.at("chart").get<std::string>()),
                           j.at("split_dim").get<int>());
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Format, e.what());
  }
}

inline Json to_json(const RaeModel& m) {
  const auto* phi = dynamic_cast<const CompositeDiffeo*>(&m.space->phi());
  if (!phi) throw Error(ErrorCode::Format, "only composite diffeomorphisms can be serialized");
  Json dirs = Json::array();
  for (const Vec& w : m.directions) dirs.push_back(to_json(w));
  Json corr = Json::array();
  for (const Vec& w : m.corrected) corr.push_back(to_json(w));
  return {{"diffeo", to_json(*phi)},
          {"base", to_json(m.base)},
          {"rank", m.rank},
          {"mode", to_string(m.mode)},
          {"directions", dirs},
          {"codes", to_json(m.codes)},
          {"singular_values", to_json(m.singular_values)},
          {"corrected", corr}};
}

inline RaeModel rae_from_json(const Json& j) {
  try {
    RaeModel m;
    m.space = std::make_shared<const PullbackSpace>(
        std::make_shared<const CompositeDiffeo>(diffeo_from_json(j.at("diffeo"))));
    m.base = vec_from_json(j.at("base"));
    m.rank = j.at("rank").get<int>();
    m.mode = rae_mode_from_string(j.at("mode").get<std::string>());
    for (const Json& w : j.at("directions")) m.directions.push_back(vec_from_json(w));
    m.codes = mat_from_json(j.at("codes"));
    m.singular_values = vec_from_json(j.at("singular_values"));
    for (const Json& w : j.at("corrected")) m.corrected.push_back(vec_from_json(w));
    if (static_cast<int>(m.directions.size()) != m.rank) throw Error(ErrorCode::Format, "rank does not match directions");
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Format, e.what());
  }
}

inline Json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"lr", c.lr},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_eps", c.adam_eps},
          {"alpha_sub", c.alpha_sub},
          {"alpha_iso", c.alpha_iso},
          {"seed", c.seed},
          {"knn_k", c.knn_k},
          {"blocks", c.blocks},
          {"width", c.width},
          {"lipschitz_scale", c.lipschitz_scale},
          {"power_iters", c.power_iters},
          {"init_scale", c.init_scale}};
}

/// Missing keys keep their defaults.
inline TrainConfig train_config_from_json(const Json& j, TrainConfig c = {}) {
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("epochs", c.epochs);
    get("batch_size", c.batch_size);
    get("lr", c.lr);
    get("adam_beta1", c.adam_beta1);
    get("adam_beta2", c.adam_beta2);
    get("adam_eps", c.adam_eps);
    get("alpha_sub", c.alpha_sub);
    get("alpha_iso", c.alpha_iso);
    get("seed", c.seed);
    get("knn_k", c.knn_k);
    get("blocks", c.blocks);
    get("width", c.width);
    get("lipschitz_scale", c.lipschitz_scale);
    get("power_iters", c.power_iters);
    get("init_scale", c.init_scale);
    c.validate();
    return c;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Format, e.what());
  }
}

inline Json to_json(const LossBreakdown& l) {
  return {{"distance", l.distance_term}, {"subspace", l.subspace_term}, {"isometry", l.isometry_term}, {"total", l.total}};
}

inline Json checkpoint_json(const CompositeDiffeo& phi, const TrainConfig& cfg, const std::vector<LossBreakdown>& history) {
  Json losses = Json::array();
  for (const auto& l : history) losses.push_back(to_json(l));
  return {{"config", to_json(cfg)}, {"epoch_losses", losses}, {"diffeo", to_json(phi)}};
}

inline void write_json(const std::string& path, const Json& j) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Format, "cannot open '" + path + "' for writing");
  f << j.dump(2) << '\n';
}

inline Json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Format, "cannot open '" + path + "'");
  try {
    return Json::parse(f);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Format, "'" + path + "': " + e.what());
  }
}

}  // namespace pbgeo
