#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rcmik/bench/paths.hpp"
#include "rcmik/chain.hpp"
#include "rcmik/surgical.hpp"

namespace rcmik::bench {

/// Shaft-to-trocar distance above which a constrained run is considered diverged.
inline constexpr double kRcmDivergence = 5e-3;

struct ScenarioConfig {
  std::string name;
  std::filesystem::path chain_file;  ///< resolved against the scenario directory
  PathSpec path;
  bool constrained = true;
  std::optional<Vector3> trocar;
  GainSet gains;
  double dt = 1e-3;        ///< integration period
  double limit_dt = 1e-3;  ///< cycle time in the joint-limit rows
  bool optimize_manipulability = true;
  VectorX initial_q;
  bool record_timing = true;
};

struct Scenario {
  ScenarioConfig config;
  KinematicChain chain;
};

namespace detail {

inline Vector3 vec3(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw ParseError("'" + what + "' must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline Matrix3 mat3(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw ParseError("'" + what + "' must be a 3x3 array");
  Matrix3 m;
  for (int r = 0; r < 3; ++r) m.row(r) = vec3(j[r], what).transpose();
  return m;
}

inline std::optional<double> parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline std::optional<bool> parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "on") return true;
  if (s == "false" || s == "0" || s == "off") return false;
  return std::nullopt;
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

/// Parses a scenario document. Relative chain paths resolve against base_dir.
/// Schema problems raise ParseError; semantic checks live in validate_scenario.
inline ScenarioConfig parse_scenario(const std::string& document,
                                     const std::filesystem::path& base_dir = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("scenario document: ") + e.what());
  }
  try {
    ScenarioConfig c;
    c.name = j.at("name").get<std::string>();
    const std::filesystem::path chain = j.at("chain").get<std::string>();
    c.chain_file = chain.is_absolute() ? chain : base_dir / chain;

    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "constrained") {
      c.constrained = true;
    } else if (mode == "unconstrained") {
      c.constrained = false;
    } else {
      throw ParseError("scenario: mode must be 'constrained' or 'unconstrained'");
    }

    const auto& pj = j.at("path");
    c.path.kind = path_kind_from_string(pj.at("kind").get<std::string>());
    c.path.origin = detail::vec3(pj.at("origin"), "path.origin");
    c.path.amp_a = pj.at("A").get<double>();
    c.path.amp_b = pj.value("B", 0.0);
    c.path.amp_c = pj.value("C", 0.0);
    c.path.orientation = detail::mat3(pj.at("orientation"), "path.orientation");
    c.path.n_steps = pj.at("n_steps").get<int>();
    c.path.t_start = pj.at("t_start").get<double>();
    c.path.t_end = pj.at("t_end").get<double>();

    if (j.contains("trocar") && !j.at("trocar").is_null()) {
      c.trocar = detail::vec3(j.at("trocar"), "trocar");
    }

    const auto& gj = j.at("gains");
    for (const auto& [key, field] : std::initializer_list<std::pair<const char*, double GainSet::*>>{
             {"Kt1", &GainSet::Kt1}, {"Kt2", &GainSet::Kt2}, {"Kt3", &GainSet::Kt3},
             {"Kr1", &GainSet::Kr1}, {"Kr2", &GainSet::Kr2}, {"Kr3", &GainSet::Kr3},
             {"Kd1", &GainSet::Kd1}, {"Kd2", &GainSet::Kd2}, {"Kw1", &GainSet::Kw1},
             {"Kw2", &GainSet::Kw2}}) {
      c.gains.*field = gj.at(key).get<double>();
    }

    c.dt = j.at("dt").get<double>();
    c.limit_dt = j.value("limit_dt", c.dt);
    c.optimize_manipulability = j.at("optimize_manipulability").get<bool>();
    const auto q0 = j.at("initial_q").get<std::vector<double>>();
    c.initial_q = Eigen::Map<const VectorX>(q0.data(), static_cast<Eigen::Index>(q0.size()));
    c.record_timing = j.value("record_timing", true);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario document: ") + e.what());
  }
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  ScenarioConfig config = parse_scenario(read_text_file(path), path.parent_path());
  KinematicChain chain = load_chain_file(config.chain_file);
  return {std::move(config), std::move(chain)};
}

/// Canonical JSON of every field that defines the experiment, excluding the
/// manipulability flag and timing capture (the two things a paired run varies).
inline nlohmann::ordered_json scenario_identity(const ScenarioConfig& c, const std::string& chain_name) {
  nlohmann::ordered_json j;
  j["chain"] = chain_name;
  j["constrained"] = c.constrained;
  j["path"] = {{"kind", to_string(c.path.kind)},
               {"origin", {c.path.origin.x(), c.path.origin.y(), c.path.origin.z()}},
               {"A", c.path.amp_a}, {"B", c.path.amp_b}, {"C", c.path.amp_c},
               {"n_steps", c.path.n_steps}, {"t_start", c.path.t_start}, {"t_end", c.path.t_end}};
  nlohmann::ordered_json rot = nlohmann::ordered_json::array();
  for (int r = 0; r < 3; ++r) {
    rot.push_back({c.path.orientation(r, 0), c.path.orientation(r, 1), c.path.orientation(r, 2)});
  }
  j["path"]["orientation"] = rot;
  j["trocar"] = c.trocar ? nlohmann::ordered_json{c.trocar->x(), c.trocar->y(), c.trocar->z()}
                         : nlohmann::ordered_json(nullptr);
  const GainSet& g = c.gains;
  j["gains"] = {{"Kt1", g.Kt1}, {"Kt2", g.Kt2}, {"Kt3", g.Kt3}, {"Kr1", g.Kr1}, {"Kr2", g.Kr2},
                {"Kr3", g.Kr3}, {"Kd1", g.Kd1}, {"Kd2", g.Kd2}, {"Kw1", g.Kw1}, {"Kw2", g.Kw2}};
  j["dt"] = c.dt;
  j["limit_dt"] = c.limit_dt;
  j["initial_q"] = std::vector<double>(c.initial_q.data(), c.initial_q.data() + c.initial_q.size());
  return j;
}

/// FNV-1a 64 of the canonical identity document, as 16 hex digits.
inline std::string scenario_fingerprint(const ScenarioConfig& c, const std::string& chain_name) {
  const std::string text = scenario_identity(c, chain_name).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

// ---------------------------------------------------------------------------
// Overrides

/// One `key=value` override target. Every key maps to exactly one config field.
struct OverrideField {
  std::string key;
  std::function<std::string(const ScenarioConfig&)> get;
  std::function<bool(ScenarioConfig&, const std::string&)> set;
};

inline const std::vector<OverrideField>& override_fields() {
  static const std::vector<OverrideField> fields = [] {
    std::vector<OverrideField> f;
    auto number = [&f](std::string key, auto accessor) {
      f.push_back({key,
                   [accessor](const ScenarioConfig& c) { return detail::format_double(accessor(c)); },
                   [accessor](ScenarioConfig& c, const std::string& v) {
                     const auto parsed = detail::parse_double(v);
                     if (!parsed) return false;
                     accessor(c) = *parsed;
                     return true;
                   }});
    };
    auto flag = [&f](std::string key, auto accessor) {
      f.push_back({key,
                   [accessor](const ScenarioConfig& c) {
                     return std::string(accessor(c) ? "true" : "false");
                   },
                   [accessor](ScenarioConfig& c, const std::string& v) {
                     const auto parsed = detail::parse_bool(v);
                     if (!parsed) return false;
                     accessor(c) = *parsed;
                     return true;
                   }});
    };
    number("Kt1", [](auto& c) -> auto& { return c.gains.Kt1; });
    number("Kt2", [](auto& c) -> auto& { return c.gains.Kt2; });
    number("Kt3", [](auto& c) -> auto& { return c.gains.Kt3; });
    number("Kr1", [](auto& c) -> auto& { return c.gains.Kr1; });
    number("Kr2", [](auto& c) -> auto& { return c.gains.Kr2; });
    number("Kr3", [](auto& c) -> auto& { return c.gains.Kr3; });
    number("Kd1", [](auto& c) -> auto& { return c.gains.Kd1; });
    number("Kd2", [](auto& c) -> auto& { return c.gains.Kd2; });
    number("Kw1", [](auto& c) -> auto& { return c.gains.Kw1; });
    number("Kw2", [](auto& c) -> auto& { return c.gains.Kw2; });
    number("dt", [](auto& c) -> auto& { return c.dt; });
    number("limit_dt", [](auto& c) -> auto& { return c.limit_dt; });
    number("t_start", [](auto& c) -> auto& { return c.path.t_start; });
    number("t_end", [](auto& c) -> auto& { return c.path.t_end; });
    number("A", [](auto& c) -> auto& { return c.path.amp_a; });
    number("B", [](auto& c) -> auto& { return c.path.amp_b; });
    number("C", [](auto& c) -> auto& { return c.path.amp_c; });
    f.push_back({"n_steps",
                 [](const ScenarioConfig& c) { return std::to_string(c.path.n_steps); },
                 [](ScenarioConfig& c, const std::string& v) {
                   const auto parsed = detail::parse_double(v);
                   if (!parsed || *parsed != std::floor(*parsed)) return false;
                   c.path.n_steps = static_cast<int>(*parsed);
                   return true;
                 }});
    flag("optimize", [](auto& c) -> auto& { return c.optimize_manipulability; });
    flag("record_timing", [](auto& c) -> auto& { return c.record_timing; });
    return f;
  }();
  return fields;
}

inline const OverrideField* find_override(const std::string& key) {
  for (const auto& f : override_fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

/// Applies "key=value". Unknown keys and unparsable values raise ParseError.
inline void apply_override(ScenarioConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ParseError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  const OverrideField* field = find_override(key);
  if (field == nullptr) throw ParseError("unknown override key '" + key + "'");
  if (!field->set(c, value)) {
    throw ParseError("override '" + key + "': cannot parse value '" + value + "'");
  }
}

// ---------------------------------------------------------------------------
// Validation

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string message;
};

/// Runs every scenario invariant and returns one entry per check.
inline std::vector<CheckResult> check_scenario(const Scenario& s) {
  std::vector<CheckResult> out;
  auto run = [&out](std::string name, const std::function<void()>& body) {
    try {
      body();
      out.push_back({std::move(name), true, "ok"});
    } catch (const std::exception& e) {
      out.push_back({std::move(name), false, e.what()});
    }
  };
  const ScenarioConfig& c = s.config;
  run("gains", [&] { c.gains.validate(); });
  run("path", [&] { c.path.validate(); });
  run("timing", [&] {
    if (!(c.dt > 0.0)) throw ValidationError("dt must be positive");
    if (!(c.limit_dt > 0.0)) throw ValidationError("limit_dt must be positive");
  });
  run("initial_q", [&] {
    s.chain.check_size(c.initial_q);
    if (!s.chain.within_limits(c.initial_q)) {
      throw ValidationError("initial_q lies outside the joint limits");
    }
  });
  run("trocar", [&] {
    if (c.constrained && !c.trocar) {
      throw ValidationError("field 'trocar' is required in constrained mode");
    }
  });
  if (c.constrained && c.trocar && c.initial_q.size() == s.chain.dof()) {
    run("initial_rcm_error", [&] {
      const double e = rcm_state(s.chain, c.initial_q, *c.trocar).error();
      if (!(e < kRcmDivergence)) {
        throw ValidationError("initial shaft-to-trocar distance " + std::to_string(e) +
                              " m exceeds " + std::to_string(kRcmDivergence) + " m");
      }
    });
  }
  return out;
}

inline void validate_scenario(const Scenario& s) {
  for (const auto& r : check_scenario(s)) {
    if (!r.passed) throw ValidationError(r.name + ": " + r.message);
  }
}

}  // namespace rcmik::bench
