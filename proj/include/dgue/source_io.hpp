#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dgue/spectrum.hpp"

namespace dgue {

enum class SourceKind { Atomic, Semicircle, TwoPoint };

/// Source description as read from / written to JSON:
///   {"kind": "atomic", "atoms": [...]}
///   {"kind": "semicircle", "variance": v}
///   {"kind": "two_point", "a": a}
struct SourceSpec {
  SourceKind kind = SourceKind::Atomic;
  std::vector<double> atoms;
  double variance = 1.0;
  double a = 1.0;

  static SourceSpec atomic(std::vector<double> atoms) {
    SourceSpec s;
    s.kind = SourceKind::Atomic;
    s.atoms = std::move(atoms);
    return s;
  }
  static SourceSpec semicircle(double variance) {
    SourceSpec s;
    s.kind = SourceKind::Semicircle;
    s.variance = variance;
    return s;
  }
  static SourceSpec two_point(double a) {
    SourceSpec s;
    s.kind = SourceKind::TwoPoint;
    s.a = a;
    return s;
  }

  /// Limiting measure. An atomic source is its own limit (uniform weights).
  MeasurePtr limit() const {
    switch (kind) {
      case SourceKind::Atomic:
        return point_masses(AtomicSpectrum(atoms));
      case SourceKind::Semicircle:
        return dgue::semicircle(variance);
      case SourceKind::TwoPoint:
        return dgue::two_point(a);
    }
    throw ValidationError("unknown source kind");
  }

  /// Finite source of size n: each atom repeated n/k times (k atoms, n a
  /// multiple of k), midpoint quantiles of the semicircle, or n/2 atoms at each of -a, a.
  AtomicSpectrum atoms_for(std::size_t n) const {
    if (n == 0) throw ValidationError("source size must be positive");
    switch (kind) {
      case SourceKind::Atomic: {
        if (n % atoms.size() != 0) throw ValidationError("n must be a multiple of the number of atoms in the source");
        std::vector<double> h;
        h.reserve(n);
        for (double x : atoms) h.insert(h.end(), n / atoms.size(), x);
        return AtomicSpectrum(std::move(h));
      }
      case SourceKind::Semicircle:
        return AtomicSpectrum(semicircle_quantiles(n, variance));
      case SourceKind::TwoPoint: {
        std::vector<double> h(n);
        for (std::size_t i = 0; i < n; ++i) h[i] = (i < n / 2) ? -a : a;
        return AtomicSpectrum(std::move(h));
      }
    }
    throw ValidationError("unknown source kind");
  }
};

inline const char* to_string(SourceKind k) {
  switch (k) {
    case SourceKind::Atomic:
      return "atomic";
    case SourceKind::Semicircle:
      return "semicircle";
    case SourceKind::TwoPoint:
      return "two_point";
  }
  return "?";
}

namespace detail {

inline void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) throw ValidationError("unknown key in source: " + it.key());
  }
}

inline double finite_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw ValidationError(std::string("source: missing number '") + key + "'");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw ValidationError(std::string("source: '") + key + "' must be finite");
  return v;
}

}  // namespace detail

inline SourceSpec source_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ValidationError("source: object with string 'kind' required");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "atomic") {
    detail::require_keys(j, {"kind", "atoms"});
    if (!j.contains("atoms") || !j.at("atoms").is_array() || j.at("atoms").empty()) {
      throw ValidationError("source: non-empty 'atoms' array required");
    }
    std::vector<double> atoms;
    for (const auto& v : j.at("atoms")) {
      if (!v.is_number()) throw ValidationError("source: atoms must be numbers");
      atoms.push_back(v.get<double>());
    }
    AtomicSpectrum check(atoms);
    return SourceSpec::atomic(std::move(atoms));
  }
  if (kind == "semicircle") {
    detail::require_keys(j, {"kind", "variance"});
    const double v = detail::finite_number(j, "variance");
    if (!(v > 0.0)) throw ValidationError("source: variance must be positive");
    return SourceSpec::semicircle(v);
  }
  if (kind == "two_point") {
    detail::require_keys(j, {"kind", "a"});
    const double a = detail::finite_number(j, "a");
    if (!(a > 0.0)) throw ValidationError("source: 'a' must be positive");
    return SourceSpec::two_point(a);
  }
  throw ValidationError("source: unknown kind '" + kind + "'");
}

inline nlohmann::json source_to_json(const SourceSpec& s) {
  nlohmann::json j;
  j["kind"] = to_string(s.kind);
  switch (s.kind) {
    case SourceKind::Atomic:
      j["atoms"] = s.atoms;
      break;
    case SourceKind::Semicircle:
      j["variance"] = s.variance;
      break;
    case SourceKind::TwoPoint:
      j["a"] = s.a;
      break;
  }
  return j;
}

inline SourceSpec parse_source(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("source: invalid JSON: ") + e.what());
  }
  return source_from_json(j);
}

inline SourceSpec load_source(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open source file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_source(ss.str());
}

/// Keys sorted, fixed indentation, trailing newline.
inline std::string dump_source(const SourceSpec& s) { return source_to_json(s).dump(2) + "\n"; }

}  // namespace dgue
