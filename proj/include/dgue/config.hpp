#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <map>
#include <string>

#include "json.hpp"

#include "dgue/errors.hpp"

namespace dgue {

inline constexpr const char* kVersion = "0.1.0";

struct Tolerances {
  double kernel_rtol = 1e-6;
  double fredholm_tol = 1e-10;
  double subordination_tol = 1e-13;
};

struct GlobalConfig {
  std::uint64_t seed = 20240601;
  unsigned threads = 0;  // 0: DGUE_THREADS or hardware concurrency
  std::string out_dir;   // empty: stdout
  Tolerances tol;
};

enum class ParamType { Number, Integer, String, Bool };

/// Allowed parameter keys per subcommand.
inline const std::map<std::string, std::map<std::string, ParamType>>& param_schema() {
  using P = ParamType;
  static const std::map<std::string, std::map<std::string, ParamType>> schema{
      {"density", {{"source", P::String}, {"grid", P::String}}},
      {"edge", {{"source", P::String}, {"side", P::String}, {"bracket", P::String}, {"n", P::Integer}}},
      {"contour", {{"source", P::String}, {"n", P::Integer}}},
      {"kernel",
       {{"source", P::String},
        {"n", P::Integer},
        {"xi_grid", P::String},
        {"eta_grid", P::String},
        {"window", P::Number},
        {"output", P::String}}},
      {"fredholm", {{"interval", P::String}, {"phi_scale", P::Number}}},
      {"tw-table", {{"s_grid", P::String}}},
      {"simulate",
       {{"source", P::String}, {"n", P::Integer}, {"samples", P::Integer}, {"intervals", P::String}}},
      {"verify", {{"suite", P::String}}},
  };
  return schema;
}

struct RunConfig {
  std::string command;
  GlobalConfig global;
  nlohmann::json params = nlohmann::json::object();
};

namespace detail {

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ValidationError("unknown key '" + k + "' in " + where);
  }
}

inline double positive(const nlohmann::json& j, const char* key) {
  if (!j.at(key).is_number()) throw ValidationError(std::string("tolerance ") + key + " must be a number");
  const double v = j.at(key).get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string("tolerance ") + key + " must be positive");
  return v;
}

}  // namespace detail

inline void validate_params(const std::string& command, const nlohmann::json& params) {
  const auto& schema = param_schema();
  const auto it = schema.find(command);
  if (it == schema.end()) throw ValidationError("unknown command '" + command + "'");
  if (!params.is_object()) throw ValidationError("params must be an object");
  for (const auto& [k, v] : params.items()) {
    const auto t = it->second.find(k);
    if (t == it->second.end()) throw ValidationError("unknown parameter '" + k + "' for " + command);
    bool ok = false;
    switch (t->second) {
      case ParamType::Number: ok = v.is_number() && std::isfinite(v.get<double>()); break;
      case ParamType::Integer: ok = v.is_number_integer() && v.get<std::int64_t>() > 0; break;
      case ParamType::String: ok = v.is_string(); break;
      case ParamType::Bool: ok = v.is_boolean(); break;
    }
    if (!ok) throw ValidationError("parameter '" + k + "' has the wrong type");
  }
}

inline nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json g{{"seed", c.global.seed},
                   {"threads", c.global.threads},
                   {"out_dir", c.global.out_dir},
                   {"tolerances",
                    {{"kernel_rtol", c.global.tol.kernel_rtol},
                     {"fredholm_tol", c.global.tol.fredholm_tol},
                     {"subordination_tol", c.global.tol.subordination_tol}}}};
  return {{"command", c.command}, {"global", g}, {"params", c.params}};
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  detail::check_keys(j, {"command", "global", "params"}, "config");
  RunConfig c;
  if (!j.contains("command") || !j.at("command").is_string()) throw ValidationError("config: command must be a string");
  c.command = j.at("command").get<std::string>();
  if (j.contains("global")) {
    const auto& g = j.at("global");
    detail::check_keys(g, {"seed", "threads", "out_dir", "tolerances"}, "global");
    if (g.contains("seed")) {
      if (!g.at("seed").is_number_unsigned()) throw ValidationError("global.seed must be a non-negative integer");
      c.global.seed = g.at("seed").get<std::uint64_t>();
    }
    if (g.contains("threads")) {
      if (!g.at("threads").is_number_unsigned()) throw ValidationError("global.threads must be a non-negative integer");
      c.global.threads = g.at("threads").get<unsigned>();
    }
    if (g.contains("out_dir")) {
      if (!g.at("out_dir").is_string()) throw ValidationError("global.out_dir must be a string");
      c.global.out_dir = g.at("out_dir").get<std::string>();
    }
    if (g.contains("tolerances")) {
      const auto& t = g.at("tolerances");
      detail::check_keys(t, {"kernel_rtol", "fredholm_tol", "subordination_tol"}, "tolerances");
      if (t.contains("kernel_rtol")) c.global.tol.kernel_rtol = detail::positive(t, "kernel_rtol");
      if (t.contains("fredholm_tol")) c.global.tol.fredholm_tol = detail::positive(t, "fredholm_tol");
      if (t.contains("subordination_tol")) c.global.tol.subordination_tol = detail::positive(t, "subordination_tol");
    }
  }
  if (j.contains("params")) c.params = j.at("params");
  validate_params(c.command, c.params);
  return c;
}

/// Canonical form: sorted keys, no whitespace.
inline std::string canonical_dump(const RunConfig& c) { return config_to_json(c).dump(); }

inline RunConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return config_from_json(j);
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Hash of the canonical config; out_dir and threads do not change results and are left out.
inline std::string config_hash(const RunConfig& c) {
  RunConfig k = c;
  k.global.out_dir.clear();
  k.global.threads = 0;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical_dump(k))));
  return buf;
}

inline std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json meta_json(const RunConfig& c, bool timestamp) {
  nlohmann::json m{{"version", kVersion}, {"command", c.command}, {"seed", c.global.seed}, {"config_hash", config_hash(c)}};
  if (timestamp) m["timestamp"] = utc_timestamp();
  return m;
}

inline std::string csv_header(const RunConfig& c, bool timestamp) {
  std::string h = std::string("# dgue version=") + kVersion + " command=" + c.command +
                  " seed=" + std::to_string(c.global.seed) + " config_hash=" + config_hash(c);
  if (timestamp) h += " timestamp=" + utc_timestamp();
  return h + "\n";
}

}  // namespace dgue
