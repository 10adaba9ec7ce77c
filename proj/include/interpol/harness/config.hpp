#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "interpol/adversary.hpp"
#include "interpol/field.hpp"
#include "interpol/multiparty.hpp"
#include "json.hpp"

namespace interpol::harness {

enum class Mode { eval, attack, adaptive, multiparty, multivar, bench };

inline std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::eval: return "eval";
    case Mode::attack: return "attack";
    case Mode::adaptive: return "adaptive";
    case Mode::multiparty: return "multiparty";
    case Mode::multivar: return "multivar";
    case Mode::bench: return "bench";
  }
  return "?";
}

inline std::optional<Mode> parse_mode(std::string_view s) {
  for (auto m : {Mode::eval, Mode::attack, Mode::adaptive, Mode::multiparty, Mode::multivar, Mode::bench})
    if (mode_name(m) == s) return m;
  return std::nullopt;
}

/// Raised for any invalid configuration, listing every violation found.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : std::runtime_error(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid configuration:";
    for (const auto& e : v) s += "\n  - " + e;
    return s;
  }
  std::vector<std::string> violations_;
};

struct ExperimentConfig {
  Mode mode = Mode::eval;
  std::uint64_t seed = 1;
  std::uint64_t trials = 1000;
  std::uint64_t modulus = FieldContext::kMersenne61;
  std::size_t degree_bound = 16;
  std::optional<std::string> polynomial_file;
  std::size_t c = 1;
  std::size_t rounds = 1;
  std::vector<StrategyKind> adversaries{StrategyKind::random_forgery, StrategyKind::fixed_offset};
  // multiparty
  std::size_t nodes = 4;
  std::vector<std::size_t> malicious;
  StrategyKind malicious_strategy = StrategyKind::fixed_offset;
  bool colluding = false;
  RoundPolicy policy = RoundPolicy::recompute;
  std::optional<std::size_t> data_shards;
  // multivar
  std::size_t variables = 2;
  std::size_t variable_degree_bound = 3;
  // bench
  std::vector<std::size_t> bench_degree_bounds{10000, 40000, 160000};
  std::optional<std::string> output_path;
};

namespace detail {

inline bool is_non_negative_integer(const nlohmann::json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  void only_keys(const nlohmann::json& obj, std::string_view where, std::initializer_list<std::string_view> keys) {
    if (!obj.is_object()) {
      errors_.push_back(std::string(where) + " must be an object");
      return;
    }
    for (const auto& [k, _] : obj.items()) {
      bool known = false;
      for (auto allowed : keys) known = known || k == allowed;
      if (!known) errors_.push_back("unknown key '" + std::string(where) + "." + k + "'");
    }
  }

  template <class T>
  void unsigned_field(const nlohmann::json& obj, std::string_view key, std::string_view where, T& out) {
    if (!obj.is_object() || !obj.contains(key)) return;
    const auto& v = obj.at(std::string(key));
    if (!is_non_negative_integer(v)) {
      errors_.push_back(std::string(where) + "." + std::string(key) + " must be a non-negative integer");
      return;
    }
    out = static_cast<T>(v.get<std::uint64_t>());
  }

  std::optional<std::string> string_field(const nlohmann::json& obj, std::string_view key, std::string_view where) {
    if (!obj.is_object() || !obj.contains(key)) return std::nullopt;
    const auto& v = obj.at(std::string(key));
    if (!v.is_string()) {
      errors_.push_back(std::string(where) + "." + std::string(key) + " must be a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  void error(std::string e) { errors_.push_back(std::move(e)); }

 private:
  std::vector<std::string>& errors_;
};

inline const nlohmann::json& section(const nlohmann::json& root, std::string_view key) {
  static const nlohmann::json empty = nlohmann::json::object();
  auto it = root.find(std::string(key));
  return it == root.end() ? empty : *it;
}

}  // namespace detail

/// Reads and validates a configuration for `mode`. All violations are
/// collected before anything runs.
inline ExperimentConfig parse_config(const nlohmann::json& root, Mode mode) {
  std::vector<std::string> errors;
  detail::Reader rd(errors);
  ExperimentConfig cfg;
  cfg.mode = mode;
  if (!root.is_object()) throw ConfigError({"configuration root must be an object"});
  rd.only_keys(root, "config",
               {"mode", "seed", "trials", "rounds", "field", "polynomial", "security", "adversary", "network",
                "multivariate", "bench", "output"});

  if (auto m = rd.string_field(root, "mode", "config")) {
    auto parsed = parse_mode(*m);
    if (!parsed)
      rd.error("unknown mode '" + *m + "'");
    else if (*parsed != mode)
      rd.error("config mode '" + *m + "' does not match subcommand '" + std::string(mode_name(mode)) + "'");
  }
  rd.unsigned_field(root, "seed", "config", cfg.seed);
  rd.unsigned_field(root, "trials", "config", cfg.trials);
  rd.unsigned_field(root, "rounds", "config", cfg.rounds);

  const auto& field = detail::section(root, "field");
  rd.only_keys(field, "field", {"modulus"});
  rd.unsigned_field(field, "modulus", "field", cfg.modulus);

  const auto& poly = detail::section(root, "polynomial");
  rd.only_keys(poly, "polynomial", {"degree_bound", "file"});
  rd.unsigned_field(poly, "degree_bound", "polynomial", cfg.degree_bound);
  cfg.polynomial_file = rd.string_field(poly, "file", "polynomial");

  const auto& security = detail::section(root, "security");
  rd.only_keys(security, "security", {"c"});
  rd.unsigned_field(security, "c", "security", cfg.c);

  const auto& adv = detail::section(root, "adversary");
  rd.only_keys(adv, "adversary", {"kinds"});
  if (adv.is_object() && adv.contains("kinds")) {
    cfg.adversaries.clear();
    if (!adv["kinds"].is_array() || adv["kinds"].empty()) {
      rd.error("adversary.kinds must be a non-empty array of strategy names");
    } else {
      for (const auto& k : adv["kinds"]) {
        auto kind = k.is_string() ? parse_strategy_kind(k.get<std::string>()) : std::nullopt;
        if (!kind)
          rd.error("unknown adversary kind " + k.dump());
        else
          cfg.adversaries.push_back(*kind);
      }
    }
  }

  const auto& net = detail::section(root, "network");
  rd.only_keys(net, "network", {"nodes", "malicious", "strategy", "colluding", "policy", "rs"});
  rd.unsigned_field(net, "nodes", "network", cfg.nodes);
  if (net.is_object() && net.contains("malicious")) {
    if (!net["malicious"].is_array()) {
      rd.error("network.malicious must be an array of node ids");
    } else {
      for (const auto& id : net["malicious"]) {
        if (!detail::is_non_negative_integer(id))
          rd.error("network.malicious entries must be non-negative integers");
        else
          cfg.malicious.push_back(id.get<std::size_t>());
      }
    }
  }
  if (auto s = rd.string_field(net, "strategy", "network")) {
    auto kind = parse_strategy_kind(*s);
    if (!kind)
      rd.error("unknown network.strategy '" + *s + "'");
    else
      cfg.malicious_strategy = *kind;
  }
  if (net.is_object() && net.contains("colluding")) {
    if (!net["colluding"].is_boolean())
      rd.error("network.colluding must be a boolean");
    else
      cfg.colluding = net["colluding"].get<bool>();
  }
  if (auto p = rd.string_field(net, "policy", "network")) {
    auto pol = parse_policy(*p);
    if (!pol)
      rd.error("unknown network.policy '" + *p + "'");
    else
      cfg.policy = *pol;
  }
  const auto& rs = detail::section(net, "rs");
  rd.only_keys(rs, "network.rs", {"data_shards"});
  if (rs.is_object() && rs.contains("data_shards")) {
    std::size_t t = 0;
    rd.unsigned_field(rs, "data_shards", "network.rs", t);
    cfg.data_shards = t;
  }

  const auto& mv = detail::section(root, "multivariate");
  rd.only_keys(mv, "multivariate", {"variables", "degree_bound"});
  rd.unsigned_field(mv, "variables", "multivariate", cfg.variables);
  rd.unsigned_field(mv, "degree_bound", "multivariate", cfg.variable_degree_bound);

  const auto& bench = detail::section(root, "bench");
  rd.only_keys(bench, "bench", {"degree_bounds"});
  if (bench.is_object() && bench.contains("degree_bounds")) {
    cfg.bench_degree_bounds.clear();
    if (!bench["degree_bounds"].is_array() || bench["degree_bounds"].empty()) {
      rd.error("bench.degree_bounds must be a non-empty array");
    } else {
      for (const auto& k : bench["degree_bounds"]) {
        if (!detail::is_non_negative_integer(k) || k.get<std::uint64_t>() == 0)
          rd.error("bench.degree_bounds entries must be positive integers");
        else
          cfg.bench_degree_bounds.push_back(k.get<std::size_t>());
      }
    }
  }

  const auto& out = detail::section(root, "output");
  rd.only_keys(out, "output", {"path"});
  cfg.output_path = rd.string_field(out, "path", "output");

  // Semantic checks.
  if (cfg.modulus >= FieldContext::kMaxModulus || !is_prime_u64(cfg.modulus))
    rd.error("field.modulus " + std::to_string(cfg.modulus) + " must be a prime below 2^62");
  if (cfg.c == 0) rd.error("security.c must be >= 1");
  if (cfg.degree_bound == 0) rd.error("polynomial.degree_bound must be >= 1");
  if (cfg.rounds == 0) rd.error("rounds must be >= 1");
  if (mode == Mode::multiparty) {
    if (cfg.nodes < 2) rd.error("network.nodes must be >= 2");
    std::set<std::size_t> seen;
    for (auto id : cfg.malicious) {
      if (id >= cfg.nodes) rd.error("network.malicious id " + std::to_string(id) + " is not a node");
      if (!seen.insert(id).second) rd.error("network.malicious id " + std::to_string(id) + " listed twice");
    }
    if (cfg.data_shards) {
      if (*cfg.data_shards == 0 || *cfg.data_shards > cfg.nodes)
        rd.error("network.rs.data_shards must be in [1, nodes]");
      if (cfg.modulus <= cfg.nodes) rd.error("Reed-Solomon coding needs field.modulus > network.nodes");
    }
    if (cfg.policy == RoundPolicy::rs_decode && !cfg.data_shards)
      rd.error("network.policy rs-decode needs network.rs.data_shards");
  }
  if (mode == Mode::multivar) {
    if (cfg.variables == 0) rd.error("multivariate.variables must be >= 1");
    if (cfg.variable_degree_bound == 0) rd.error("multivariate.degree_bound must be >= 1");
    double size = 1;
    for (std::size_t i = 0; i < cfg.variables + 1; ++i) size *= static_cast<double>(cfg.variable_degree_bound);
    if (size > static_cast<double>(1ULL << 24)) rd.error("multivariate coefficient array is too large");
  }
  if (cfg.polynomial_file) {
    std::ifstream in(*cfg.polynomial_file);
    if (!in) rd.error("polynomial.file '" + *cfg.polynomial_file + "' cannot be read");
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path, Mode mode) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({"config file '" + path + "' is not valid JSON: " + e.what()});
  }
  return parse_config(root, mode);
}

/// Normalized echo of the configuration, written into every report.
inline nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["mode"] = mode_name(cfg.mode);
  j["seed"] = cfg.seed;
  j["trials"] = cfg.trials;
  j["rounds"] = cfg.rounds;
  j["field"] = {{"modulus", cfg.modulus}};
  j["polynomial"] = {{"degree_bound", cfg.degree_bound}};
  if (cfg.polynomial_file) j["polynomial"]["file"] = *cfg.polynomial_file;
  j["security"] = {{"c", cfg.c}};
  switch (cfg.mode) {
    case Mode::attack: {
      auto kinds = nlohmann::json::array();
      for (auto k : cfg.adversaries) kinds.push_back(strategy_name(k));
      j["adversary"] = {{"kinds", kinds}};
      break;
    }
    case Mode::multiparty: {
      j["network"] = {{"nodes", cfg.nodes},
                      {"malicious", cfg.malicious},
                      {"strategy", strategy_name(cfg.malicious_strategy)},
                      {"colluding", cfg.colluding},
                      {"policy", policy_name(cfg.policy)}};
      if (cfg.data_shards) j["network"]["rs"] = {{"data_shards", *cfg.data_shards}};
      break;
    }
    case Mode::multivar:
      j["multivariate"] = {{"variables", cfg.variables}, {"degree_bound", cfg.variable_degree_bound}};
      break;
    case Mode::bench:
      j["bench"] = {{"degree_bounds", cfg.bench_degree_bounds}};
      break;
    default:
      break;
  }
  return j;
}

}  // namespace interpol::harness
