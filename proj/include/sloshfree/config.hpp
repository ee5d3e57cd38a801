#pragma once

#include "sloshfree/common.hpp"
#include "sloshfree/simulation.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

namespace sloshfree {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

inline Vec3 parse_vec3(const nlohmann::json& j, const char* key, const Vec3& fallback) {
  if (!j.contains(key)) return fallback;
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.size() != 3)
    throw ParseError(std::string("config field '") + key + "' must be an array of length 3");
  return Vec3(arr.at(0).get<double>(), arr.at(1).get<double>(), arr.at(2).get<double>());
}

/// Accepts either one number (broadcast) or a full array for a weight/gain.
inline VecX parse_scalar_or_array(const nlohmann::json& j, Eigen::Index n) {
  if (j.is_number()) return VecX::Constant(n, j.get<double>());
  if (j.is_array() && static_cast<Eigen::Index>(j.size()) == n) {
    VecX out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = j.at(i).get<double>();
    return out;
  }
  throw ParseError("expected a number or an array of length " + std::to_string(n));
}

inline std::vector<HarmonicTerm> parse_harmonics(const nlohmann::json& arr) {
  std::vector<HarmonicTerm> out;
  if (!arr.is_array()) throw ParseError("harmonic series must be an array of [amp, freq, phase]");
  for (const auto& h : arr) {
    if (!h.is_array() || h.size() < 2 || h.size() > 3)
      throw ParseError("each harmonic must be [amplitude, frequency] or [amplitude, frequency, phase]");
    HarmonicTerm term;
    term.amplitude = h.at(0).get<double>();
    term.frequency = h.at(1).get<double>();
    term.phase = h.size() == 3 ? h.at(2).get<double>() : 0.0;
    out.push_back(term);
  }
  return out;
}

}  // namespace detail

inline Shape parse_shape(const nlohmann::json& j) {
  const std::string kind = j.value("kind", std::string("loop"));
  const Vec3 default_center{0.45, 0.0, 0.35};
  if (kind == "loop") {
    LoopShape s;
    s.center = detail::parse_vec3(j, "center", default_center);
    s.radius = j.value("radius", 0.25);
    s.tilt = j.value("tilt", 0.3);
    return s;
  }
  if (kind == "lissajous") {
    LissajousShape s;
    s.center = detail::parse_vec3(j, "center", default_center);
    s.amplitude = detail::parse_vec3(j, "amplitude", Vec3(0.25, 0.2, 0.1));
    if (j.contains("omega")) s.omega = j.at("omega").get<double>();
    return s;
  }
  if (kind == "helix") {
    HelixShape s;
    s.center = detail::parse_vec3(j, "center", default_center);
    s.radius = j.value("radius", 0.2);
    s.turns = j.value("turns", 2.0);
    s.height = j.value("height", 0.4);
    return s;
  }
  if (kind == "custom") {
    CustomShape s;
    s.center = detail::parse_vec3(j, "center", default_center);
    const char* axes[3] = {"x", "y", "z"};
    if (!j.contains("harmonics"))
      throw ParseError("custom trajectory requires a 'harmonics' object");
    for (int a = 0; a < 3; ++a)
      if (j.at("harmonics").contains(axes[a]))
        s.harmonics[static_cast<size_t>(a)] =
            detail::parse_harmonics(j.at("harmonics").at(axes[a]));
    return s;
  }
  throw ParseError("unknown trajectory kind '" + kind + "'");
}

/// Load a full experiment description from a JSON config file.  The model
/// path inside the config is resolved relative to the config file location.
/// `mode_override` / `time_override` let the sweep command reuse one config
/// across its grid.
inline ExperimentConfig load_experiment(const std::filesystem::path& config_path,
                                        std::optional<ControlMode> mode_override = {},
                                        std::optional<double> time_override = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(config_path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config parse error in " + config_path.string() + ": " + e.what());
  }
  ExperimentConfig cfg;
  try {
    if (!j.contains("model")) throw ParseError("config must name a 'model' file");
    const std::filesystem::path model_path =
        config_path.parent_path() / j.at("model").get<std::string>();
    cfg.model = load_model(read_file(model_path));
    const int n = cfg.model.n();

    const double T = time_override.value_or(j.value("navigation_time", 6.0));
    if (!(T > 0.0)) throw ParseError("navigation_time must be positive");
    const Shape shape = j.contains("trajectory") ? parse_shape(j.at("trajectory")) : Shape(LoopShape{});
    cfg.trajectory = Trajectory(shape, 0.0, T);

    cfg.mode = mode_override.value_or(parse_mode(j.value("mode", std::string("slosh_free"))));
    cfg.dt = j.value("dt", 1e-3);

    if (j.contains("gains")) {
      const auto& g = j.at("gains");
      if (g.contains("k_task"))
        cfg.gains.k_task = detail::parse_scalar_or_array(g.at("k_task"), 6);
      if (g.contains("k_vel")) cfg.gains.k_vel = detail::parse_scalar_or_array(g.at("k_vel"), 6);
    }
    cfg.weights = RacWeights::defaults(n);
    if (j.contains("weights")) {
      const auto& w = j.at("weights");
      if (w.contains("w_q")) cfg.weights.w_q = detail::parse_scalar_or_array(w.at("w_q"), n);
      if (w.contains("w_qd")) cfg.weights.w_qd = detail::parse_scalar_or_array(w.at("w_qd"), n);
      if (w.contains("w_qdd")) cfg.weights.w_qdd = detail::parse_scalar_or_array(w.at("w_qdd"), n);
      if (w.contains("w_slack"))
        cfg.weights.w_slack = detail::parse_scalar_or_array(w.at("w_slack"), 6);
    }
    cfg.flatness.psi = j.value("psi", 0.0);
    if (j.contains("q_init")) {
      const auto& arr = j.at("q_init");
      if (!arr.is_null()) {
        cfg.q_init.resize(n);
        for (int i = 0; i < n; ++i) cfg.q_init(i) = arr.at(static_cast<size_t>(i)).get<double>();
      }
    }
    cfg.transient = j.value("transient", 0.2);
    cfg.eps_sf_deg = j.value("eps_sf_deg", 1.0);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config parse error in " + config_path.string() + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

}  // namespace sloshfree
