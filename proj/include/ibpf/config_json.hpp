#pragma once

// SweepConfig <-> JSON. Every key is optional; missing keys keep defaults.
//
// {
//   "formulation": "ib-th", "variant": "alg1",
//   "alpha": [1.0], "c": [8.0], "tradeoff": [0.154],   (lists, a number, or "lo:hi:steps")
//   "nz": 3, "restarts": 50, "seed": 1, "threads": 0, "trace": false,
//   "stop": {"tol": 2e-6, "max_iters": 20000},
//   "inner": {"inner_steps": 1, "step0": 0.01, "backtrack": 0.5, "max_backtracks": 40},
//   "profile": {"eps_z": 0.01, "eps_zx": 0.01, "eps_zy": 0.01},
//   "input": {"joint_csv": "data/synthetic_3x3.csv"}
//         or {"records": "heart.csv", "y_cols": ["sex", "DEATH_EVENT"], "x_cols": [...], "smoothing": 1e-3}
// }

#include <string>
#include <vector>

#include "ibpf/error.hpp"
#include "ibpf/harness.hpp"
#include "json.hpp"

namespace ibpf {

namespace detail {

inline std::vector<double> json_grid(const nlohmann::json& v, const char* key) {
  if (v.is_number()) return {v.get<double>()};
  if (v.is_string()) return parse_grid(v.get<std::string>());
  if (v.is_array()) {
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(std::string("config: ") + key + " entries must be numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  throw ConfigError(std::string("config: ") + key + " must be a number, list or range string");
}

}  // namespace detail

inline SweepConfig sweep_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  SweepConfig cfg;
  try {
    if (j.contains("formulation")) cfg.formulation = parse_formulation(j["formulation"].get<std::string>());
    if (j.contains("variant")) cfg.variant = parse_variant(j["variant"].get<std::string>());
    if (j.contains("alpha")) cfg.alphas = detail::json_grid(j["alpha"], "alpha");
    if (j.contains("c")) cfg.cs = detail::json_grid(j["c"], "c");
    if (j.contains("tradeoff")) cfg.tradeoffs = detail::json_grid(j["tradeoff"], "tradeoff");
    if (j.contains("nz")) cfg.nz = j["nz"].get<std::size_t>();
    if (j.contains("restarts")) cfg.restarts = j["restarts"].get<std::size_t>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<std::size_t>();
    if (j.contains("trace")) cfg.keep_traces = j["trace"].get<bool>();
    if (j.contains("stop")) {
      const auto& s = j["stop"];
      cfg.stop.tol = s.value("tol", cfg.stop.tol);
      cfg.stop.max_iters = s.value("max_iters", cfg.stop.max_iters);
    }
    if (j.contains("inner")) {
      const auto& s = j["inner"];
      cfg.inner.inner_steps = s.value("inner_steps", cfg.inner.inner_steps);
      cfg.inner.step0 = s.value("step0", cfg.inner.step0);
      cfg.inner.backtrack = s.value("backtrack", cfg.inner.backtrack);
      cfg.inner.max_backtracks = s.value("max_backtracks", cfg.inner.max_backtracks);
    }
    if (j.contains("profile")) {
      const auto& s = j["profile"];
      cfg.profile.eps_z = s.value("eps_z", cfg.profile.eps_z);
      cfg.profile.eps_zx = s.value("eps_zx", cfg.profile.eps_zx);
      cfg.profile.eps_zy = s.value("eps_zy", cfg.profile.eps_zy);
    }
    if (j.contains("input")) {
      const auto& s = j["input"];
      if (s.contains("joint_csv")) {
        cfg.input.kind = InputSpec::Kind::JointCsv;
        cfg.input.path = s["joint_csv"].get<std::string>();
      } else if (s.contains("records")) {
        cfg.input.kind = InputSpec::Kind::Records;
        cfg.input.path = s["records"].get<std::string>();
        cfg.input.y_cols = s.value("y_cols", std::vector<std::string>{});
        cfg.input.x_cols = s.value("x_cols", std::vector<std::string>{});
        cfg.input.smoothing = s.value("smoothing", cfg.input.smoothing);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline nlohmann::json sweep_config_to_json(const SweepConfig& cfg) {
  nlohmann::json j;
  j["formulation"] = to_string(cfg.formulation);
  j["variant"] = to_string(cfg.effective_variant());
  j["alpha"] = cfg.alphas;
  j["c"] = cfg.cs;
  j["tradeoff"] = cfg.tradeoffs;
  j["nz"] = cfg.nz;
  j["restarts"] = cfg.restarts;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["trace"] = cfg.keep_traces;
  j["stop"] = {{"tol", cfg.stop.tol}, {"max_iters", cfg.stop.max_iters}};
  j["inner"] = {{"inner_steps", cfg.inner.inner_steps},
                {"step0", cfg.inner.step0},
                {"backtrack", cfg.inner.backtrack},
                {"max_backtracks", cfg.inner.max_backtracks}};
  j["profile"] = {{"eps_z", cfg.profile.eps_z}, {"eps_zx", cfg.profile.eps_zx}, {"eps_zy", cfg.profile.eps_zy}};
  switch (cfg.input.kind) {
    case InputSpec::Kind::Builtin: break;
    case InputSpec::Kind::JointCsv: j["input"] = {{"joint_csv", cfg.input.path}}; break;
    case InputSpec::Kind::Records:
      j["input"] = {{"records", cfg.input.path},
                    {"y_cols", cfg.input.y_cols},
                    {"x_cols", cfg.input.x_cols},
                    {"smoothing", cfg.input.smoothing}};
      break;
  }
  return j;
}

}  // namespace ibpf
