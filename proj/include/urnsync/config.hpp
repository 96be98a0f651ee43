#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "urnsync/io/table.hpp"
#include "urnsync/model.hpp"
#include "urnsync/montecarlo.hpp"

namespace urnsync {

/// Fully resolved parameters of one CLI run. Everything that influences the
/// output bytes lives here; worker count and output paths do not.
struct ExperimentConfig {
  std::string command = "simulate";
  std::uint64_t n = 5;
  std::int64_t a = 1;
  std::int64_t b = 1;
  double alpha = 0.5;
  std::uint64_t horizon = 100;
  std::uint64_t replicas = 1;
  std::uint64_t seed = 1;
  std::string format; // empty: command default
  std::uint64_t record_every = 1;
  std::vector<std::uint64_t> record_times; // overrides record_every when non-empty
  unsigned log_per_decade = 0;             // > 0: log-spaced record times
  bool full = false;
  bool ensemble = false;
  std::uint64_t replica = 0; // replica index of a single trajectory
  std::vector<double> alphas; // asymptotics sweep; empty: {alpha}
  std::uint64_t t_lo = 1000;
  std::uint64_t t_hi = 1000000;
  unsigned per_decade = 50;
  bool finite = false; // asymptotics on the finite-N recursion instead of the limit
  double budget = default_budget;
  bool budget_override = false;
  bool quick = false;

  [[nodiscard]] ModelParams params() const {
    return ModelParams(static_cast<std::size_t>(n), a, b, alpha);
  }

  [[nodiscard]] std::string resolved_format() const {
    if (!format.empty()) return format;
    return command == "asymptotics" || command == "clt" ? "jsonl" : "csv";
  }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> c{"simulate", "moments", "asymptotics", "clt", "verify"};
  return c;
}

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = nlohmann::json{{"command", c.command},
                     {"n", c.n},
                     {"a", c.a},
                     {"b", c.b},
                     {"alpha", c.alpha},
                     {"horizon", c.horizon},
                     {"replicas", c.replicas},
                     {"seed", c.seed},
                     {"format", c.resolved_format()},
                     {"record_every", c.record_every},
                     {"record_times", c.record_times},
                     {"log_per_decade", c.log_per_decade},
                     {"full", c.full},
                     {"ensemble", c.ensemble},
                     {"replica", c.replica},
                     {"alphas", c.alphas},
                     {"t_lo", c.t_lo},
                     {"t_hi", c.t_hi},
                     {"per_decade", c.per_decade},
                     {"finite", c.finite},
                     {"budget", c.budget},
                     {"budget_override", c.budget_override},
                     {"quick", c.quick}};
}

/// Missing keys keep their current values; unknown keys are rejected.
inline void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    const auto& v = it.value();
    if (k == "command") v.get_to(c.command);
    else if (k == "n") v.get_to(c.n);
    else if (k == "a") v.get_to(c.a);
    else if (k == "b") v.get_to(c.b);
    else if (k == "alpha") v.get_to(c.alpha);
    else if (k == "horizon") v.get_to(c.horizon);
    else if (k == "replicas") v.get_to(c.replicas);
    else if (k == "seed") v.get_to(c.seed);
    else if (k == "format") v.get_to(c.format);
    else if (k == "record_every") v.get_to(c.record_every);
    else if (k == "record_times") v.get_to(c.record_times);
    else if (k == "log_per_decade") v.get_to(c.log_per_decade);
    else if (k == "full") v.get_to(c.full);
    else if (k == "ensemble") v.get_to(c.ensemble);
    else if (k == "replica") v.get_to(c.replica);
    else if (k == "alphas") v.get_to(c.alphas);
    else if (k == "t_lo") v.get_to(c.t_lo);
    else if (k == "t_hi") v.get_to(c.t_hi);
    else if (k == "per_decade") v.get_to(c.per_decade);
    else if (k == "finite") v.get_to(c.finite);
    else if (k == "budget") v.get_to(c.budget);
    else if (k == "budget_override") v.get_to(c.budget_override);
    else if (k == "quick") v.get_to(c.quick);
    else throw std::invalid_argument("unknown config key '" + k + "'");
  }
}

/// Config object from a JSON file, or from the metadata of a prior CSV or
/// JSONL output.
[[nodiscard]] inline nlohmann::json load_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
  std::string first;
  std::getline(in, first);
  if (first.rfind("# ", 0) == 0) return io::parse_csv_metadata(first).config;
  auto j = nlohmann::json::parse(first, nullptr, false);
  if (!j.is_discarded() && j.is_object() && j.contains("meta")) return io::parse_jsonl_metadata(j).config;
  in.clear();
  in.seekg(0);
  std::stringstream all;
  all << in.rdbuf();
  j = nlohmann::json::parse(all.str(), nullptr, false);
  if (j.is_discarded()) throw std::invalid_argument("config file '" + path + "' is not valid JSON");
  return j;
}

} // namespace urnsync
