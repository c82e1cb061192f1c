#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "spinchain/chain.hpp"
#include "spinchain/density.hpp"
#include "spinchain/initial_state.hpp"
#include "spinchain/measurement.hpp"
#include "spinchain/transfer.hpp"

namespace spinchain {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridConfig {
  double t_min = 0.0;
  double t_max = 10.0;
  int points = 201;

  void validate() const {
    if (!(t_min < t_max)) throw ConfigError("grid.t_min: must be below grid.t_max");
    if (points < 2) throw ConfigError("grid.points: need at least 2");
  }
};

struct NoiseConfig {
  double sigma = 0.0;
  std::uint64_t seed = 1;
};

struct OutputConfig {
  std::string dir = ".";
  std::string format = "csv";  // csv | json
};

// Everything a command needs: the chain, the rest state, the time grid or
// measurement time, the readout directions, noise, tolerances and outputs.
struct RunConfig {
  ChainSpec chain{3};
  bool thermal = false;        // rest-state kind; beta lives in chain.beta
  GridConfig grid;
  DirectionSet directions;
  BlochVector sender_x{0.3, 0.1, -0.2};
  double measure_time = 0.0;
  NoiseConfig noise;
  double det_tol = kDefaultDetTol;
  double rank_tol = kDefaultRankTol;
  double pst_tol = kDefaultPstTol;
  int workers = 1;
  std::optional<TransferGrade> expect_classification;
  OutputConfig output;

  RestStateKind rest_kind() const {
    if (!thermal) return RestStateKind::ground();
    return RestStateKind::thermal(chain.beta.value_or(0.0));
  }

  void validate() const {
    try {
      chain.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("chain.") + e.what());
    }
    if (thermal && chain.beta && !(*chain.beta >= 0.0))
      throw ConfigError("chain.beta: need >= 0 for a thermal rest state");
    grid.validate();
    try {
      directions.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (!sender_x.in_ball())
      throw ConfigError("sender_state: outside the Bloch ball by " +
                        detail::sci(sender_x.ball_excess()));
    if (!(noise.sigma >= 0.0)) throw ConfigError("noise.sigma: need >= 0");
    if (!(det_tol > 0.0)) throw ConfigError("tolerances.det: need > 0");
    if (!(rank_tol > 0.0)) throw ConfigError("tolerances.rank: need > 0");
    if (!(pst_tol > 0.0)) throw ConfigError("tolerances.pst: need > 0");
    if (workers < 0) throw ConfigError("workers: need >= 0 (0 = all cores)");
    if (output.format != "csv" && output.format != "json")
      throw ConfigError("output.format: need \"csv\" or \"json\", got \"" + output.format +
                        "\"");
  }
};

namespace detail {

template <typename T>
T field(const nlohmann::json& j, const std::string& key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(key + ": unexpected value type");
  }
}

}  // namespace detail

inline ChainSpec chain_from_json(const nlohmann::json& j) {
  ChainSpec spec(detail::field<int>(j, "sites", 3));
  spec.coupling = detail::field<double>(j, "coupling", 1.0);
  if (j.contains("larmor")) spec.larmor = j.at("larmor").get<std::vector<double>>();
  if (j.contains("beta")) spec.beta = j.at("beta").get<double>();
  spec.sender = detail::field<int>(j, "sender", 1);
  spec.receiver = detail::field<int>(j, "receiver", spec.sites);
  return spec;
}

inline nlohmann::json chain_to_json(const ChainSpec& spec) {
  nlohmann::json j{{"sites", spec.sites},
                   {"coupling", spec.coupling},
                   {"larmor", spec.larmor},
                   {"sender", spec.sender},
                   {"receiver", spec.receiver_site()}};
  if (spec.beta) j["beta"] = *spec.beta;
  return j;
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  if (j.contains("chain")) cfg.chain = chain_from_json(j.at("chain"));
  if (j.contains("rest")) {
    const auto& rest = j.at("rest");
    const auto kind = detail::field<std::string>(rest, "kind", "ground");
    if (kind == "ground") {
      cfg.thermal = false;
    } else if (kind == "thermal") {
      cfg.thermal = true;
      if (rest.contains("beta")) cfg.chain.beta = rest.at("beta").get<double>();
    } else {
      throw ConfigError("rest.kind: need \"ground\" or \"thermal\", got \"" + kind + "\"");
    }
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    cfg.grid.t_min = detail::field<double>(g, "t_min", 0.0);
    cfg.grid.t_max = detail::field<double>(g, "t_max", 10.0);
    cfg.grid.points = detail::field<int>(g, "points", 201);
  }
  if (j.contains("directions")) {
    const auto rows = j.at("directions").get<std::vector<std::vector<double>>>();
    if (rows.size() != 3) throw ConfigError("directions: need exactly 3 rows");
    for (int n = 0; n < 3; ++n) {
      if (rows[static_cast<std::size_t>(n)].size() != 3)
        throw ConfigError("directions: row " + std::to_string(n + 1) + " needs 3 entries");
      for (int i = 0; i < 3; ++i)
        cfg.directions.rows(n, i) = rows[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)];
    }
  }
  if (j.contains("sender_state")) {
    const auto x = j.at("sender_state").get<std::vector<double>>();
    if (x.size() != 3) throw ConfigError("sender_state: need [x1, x2, x3]");
    cfg.sender_x = BlochVector{x[0], x[1], x[2]};
  }
  cfg.measure_time = detail::field<double>(j, "measure_time", 0.0);
  if (j.contains("noise")) {
    cfg.noise.sigma = detail::field<double>(j.at("noise"), "sigma", 0.0);
    cfg.noise.seed = detail::field<std::uint64_t>(j.at("noise"), "seed", 1);
  }
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    cfg.det_tol = detail::field<double>(t, "det", kDefaultDetTol);
    cfg.rank_tol = detail::field<double>(t, "rank", kDefaultRankTol);
    cfg.pst_tol = detail::field<double>(t, "pst", kDefaultPstTol);
  }
  cfg.workers = detail::field<int>(j, "workers", 1);
  if (j.contains("expect") && j.at("expect").contains("classification")) {
    const auto want = j.at("expect").at("classification").get<std::string>();
    if (want == "complete")
      cfg.expect_classification = TransferGrade::complete;
    else if (want == "partial")
      cfg.expect_classification = TransferGrade::partial;
    else if (want == "none")
      cfg.expect_classification = TransferGrade::none;
    else
      throw ConfigError("expect.classification: need complete|partial|none, got \"" + want +
                        "\"");
  }
  if (j.contains("output")) {
    cfg.output.dir = detail::field<std::string>(j.at("output"), "dir", ".");
    cfg.output.format = detail::field<std::string>(j.at("output"), "format", "csv");
  }
  return cfg;
}

inline nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["chain"] = chain_to_json(cfg.chain);
  j["rest"] = {{"kind", cfg.thermal ? "thermal" : "ground"}};
  if (cfg.thermal && cfg.chain.beta) j["rest"]["beta"] = *cfg.chain.beta;
  j["grid"] = {{"t_min", cfg.grid.t_min}, {"t_max", cfg.grid.t_max}, {"points", cfg.grid.points}};
  j["directions"] = {{cfg.directions.rows(0, 0), cfg.directions.rows(0, 1), cfg.directions.rows(0, 2)},
                     {cfg.directions.rows(1, 0), cfg.directions.rows(1, 1), cfg.directions.rows(1, 2)},
                     {cfg.directions.rows(2, 0), cfg.directions.rows(2, 1), cfg.directions.rows(2, 2)}};
  j["sender_state"] = {cfg.sender_x.x1, cfg.sender_x.x2, cfg.sender_x.x3};
  j["measure_time"] = cfg.measure_time;
  j["noise"] = {{"sigma", cfg.noise.sigma}, {"seed", cfg.noise.seed}};
  j["tolerances"] = {{"det", cfg.det_tol}, {"rank", cfg.rank_tol}, {"pst", cfg.pst_tol}};
  j["workers"] = cfg.workers;
  if (cfg.expect_classification)
    j["expect"] = {{"classification", to_string(*cfg.expect_classification)}};
  j["output"] = {{"dir", cfg.output.dir}, {"format", cfg.output.format}};
  return j;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open \"" + path + "\"");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  return config_from_json(j);
}

}  // namespace spinchain
