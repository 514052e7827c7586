#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "anchorkit/anchors.hpp"
#include "anchorkit/corpus.hpp"
#include "anchorkit/errors.hpp"
#include "anchorkit/losses.hpp"
#include "anchorkit/viou.hpp"

namespace anchorkit {

/// Every tunable in one bag. JSON keys mirror the field names; unknown keys
/// are rejected rather than ignored so typos fail loudly.
struct RunConfig {
  std::vector<int> strides = {8, 16, 32, 64};
  double sigma = 8.0;
  double sigma1 = 0.2;
  double sigma2 = 0.5;
  double eps_l = 0.1;
  std::vector<double> scales = {1.0};
  std::vector<double> ratios = {0.5, 1.0, 2.0};
  SamplePreset preset = SamplePreset::kNine;
  FocalParams focal;
  LossWeights weights;
  double beta = 1.0;
  std::vector<double> eps_list = {0.0, 0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<std::size_t> budgets = {100, 300, 1000};
  NoiseSpec noise;
  std::uint64_t noise_seed = 0;
  SynthesisSpec synthesis;
};

namespace detail {

inline double config_number(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("config: '" + key + "' must be a number");
  return j.get<double>();
}

inline std::int64_t config_integer(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError("config: '" + key + "' must be an integer");
  return j.get<std::int64_t>();
}

template <typename T, typename Fn>
std::vector<T> config_list(const nlohmann::json& j, const std::string& key, Fn parse) {
  if (!j.is_array()) throw ConfigError("config: '" + key + "' must be an array");
  std::vector<T> out;
  for (const nlohmann::json& v : j) out.push_back(parse(v, key));
  return out;
}

inline SamplePreset parse_preset(const nlohmann::json& j) {
  if (!j.is_string()) throw ConfigError("config: 'preset' must be a string");
  const std::string s = j.get<std::string>();
  if (s == "three") return SamplePreset::kThree;
  if (s == "nine") return SamplePreset::kNine;
  if (s == "fifteen") return SamplePreset::kFifteen;
  throw ConfigError("config: unknown preset '" + s + "' (expected three/nine/fifteen)");
}

inline const char* preset_name(SamplePreset p) {
  switch (p) {
    case SamplePreset::kThree: return "three";
    case SamplePreset::kFifteen: return "fifteen";
    case SamplePreset::kNine: break;
  }
  return "nine";
}

inline void apply_synthesis_json(const nlohmann::json& j, SynthesisSpec& spec) {
  if (!j.is_object()) throw ConfigError("config: 'synthesis' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "num_scenes") spec.num_scenes = static_cast<int>(config_integer(value, key));
    else if (key == "image_w") spec.image_w = static_cast<int>(config_integer(value, key));
    else if (key == "image_h") spec.image_h = static_cast<int>(config_integer(value, key));
    else if (key == "min_objects") spec.min_objects = static_cast<int>(config_integer(value, key));
    else if (key == "max_objects") spec.max_objects = static_cast<int>(config_integer(value, key));
    else if (key == "min_scale") spec.min_scale = config_number(value, key);
    else if (key == "max_scale") spec.max_scale = config_number(value, key);
    else if (key == "min_ratio") spec.min_ratio = config_number(value, key);
    else if (key == "max_ratio") spec.max_ratio = config_number(value, key);
    else if (key == "extreme_fraction") spec.extreme_fraction = config_number(value, key);
    else if (key == "seed") spec.seed = static_cast<std::uint64_t>(config_integer(value, key));
    else throw ConfigError("config: unknown key 'synthesis." + key + "'");
  }
}

}  // namespace detail

inline void apply_config_json(const nlohmann::json& j, RunConfig& cfg) {
  if (!j.is_object()) throw ConfigError("config: root must be an object");
  const auto num = [](const nlohmann::json& v, const std::string& k) {
    return detail::config_number(v, k);
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "strides") {
      cfg.strides = detail::config_list<int>(value, key, [](const nlohmann::json& v, const std::string& k) {
        return static_cast<int>(detail::config_integer(v, k));
      });
    } else if (key == "sigma") cfg.sigma = num(value, key);
    else if (key == "sigma1") cfg.sigma1 = num(value, key);
    else if (key == "sigma2") cfg.sigma2 = num(value, key);
    else if (key == "eps_l") cfg.eps_l = num(value, key);
    else if (key == "scales") cfg.scales = detail::config_list<double>(value, key, num);
    else if (key == "ratios") cfg.ratios = detail::config_list<double>(value, key, num);
    else if (key == "preset") cfg.preset = detail::parse_preset(value);
    else if (key == "focal_alpha") cfg.focal.alpha = num(value, key);
    else if (key == "focal_gamma") cfg.focal.gamma = num(value, key);
    else if (key == "lambda1") cfg.weights.lambda1 = num(value, key);
    else if (key == "lambda2") cfg.weights.lambda2 = num(value, key);
    else if (key == "beta") cfg.beta = num(value, key);
    else if (key == "eps_list") cfg.eps_list = detail::config_list<double>(value, key, num);
    else if (key == "budgets") {
      cfg.budgets = detail::config_list<std::size_t>(value, key, [](const nlohmann::json& v, const std::string& k) {
        const std::int64_t b = detail::config_integer(v, k);
        if (b <= 0) throw ConfigError("config: budgets must be positive");
        return static_cast<std::size_t>(b);
      });
    } else if (key == "noise_p_sigma") cfg.noise.p_sigma = num(value, key);
    else if (key == "noise_d_sigma") cfg.noise.d_sigma = num(value, key);
    else if (key == "noise_seed") cfg.noise_seed = static_cast<std::uint64_t>(detail::config_integer(value, key));
    else if (key == "synthesis") detail::apply_synthesis_json(value, cfg.synthesis);
    else throw ConfigError("config: unknown key '" + key + "'");
  }

  if (cfg.strides.empty()) throw ConfigError("config: strides must be non-empty");
  for (std::size_t i = 0; i < cfg.strides.size(); ++i) {
    if (cfg.strides[i] <= 0) throw ConfigError("config: strides must be positive");
    if (i > 0 && cfg.strides[i] <= cfg.strides[i - 1]) {
      throw ConfigError("config: strides must be strictly increasing");
    }
  }
  if (!(cfg.sigma > 0.0)) throw ConfigError("config: sigma must be positive");
  if (!(cfg.sigma1 > 0.0 && cfg.sigma1 < cfg.sigma2 && cfg.sigma2 <= 1.0)) {
    throw ConfigError("config: need 0 < sigma1 < sigma2 <= 1");
  }
  if (!(cfg.eps_l >= 0.0 && cfg.eps_l <= 1.0)) {
    throw ConfigError("config: eps_l must lie in [0, 1]");
  }
  if (cfg.noise.p_sigma < 0.0 || cfg.noise.d_sigma < 0.0) {
    throw ConfigError("config: noise scales must be non-negative");
  }
  if (cfg.budgets.empty()) throw ConfigError("config: budgets must be non-empty");
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  RunConfig cfg;
  apply_config_json(j, cfg);
  return cfg;
}

inline nlohmann::json config_to_json(const RunConfig& cfg) {
  return {{"strides", cfg.strides},
          {"sigma", cfg.sigma},
          {"sigma1", cfg.sigma1},
          {"sigma2", cfg.sigma2},
          {"eps_l", cfg.eps_l},
          {"scales", cfg.scales},
          {"ratios", cfg.ratios},
          {"preset", detail::preset_name(cfg.preset)},
          {"focal_alpha", cfg.focal.alpha},
          {"focal_gamma", cfg.focal.gamma},
          {"lambda1", cfg.weights.lambda1},
          {"lambda2", cfg.weights.lambda2},
          {"beta", cfg.beta},
          {"eps_list", cfg.eps_list},
          {"budgets", cfg.budgets},
          {"noise_p_sigma", cfg.noise.p_sigma},
          {"noise_d_sigma", cfg.noise.d_sigma},
          {"noise_seed", cfg.noise_seed},
          {"synthesis",
           {{"num_scenes", cfg.synthesis.num_scenes},
            {"image_w", cfg.synthesis.image_w},
            {"image_h", cfg.synthesis.image_h},
            {"min_objects", cfg.synthesis.min_objects},
            {"max_objects", cfg.synthesis.max_objects},
            {"min_scale", cfg.synthesis.min_scale},
            {"max_scale", cfg.synthesis.max_scale},
            {"min_ratio", cfg.synthesis.min_ratio},
            {"max_ratio", cfg.synthesis.max_ratio},
            {"extreme_fraction", cfg.synthesis.extreme_fraction},
            {"seed", cfg.synthesis.seed}}}};
}

inline PyramidConfig pyramid_for(const RunConfig& cfg, int image_w, int image_h) {
  const std::vector<double> strides(cfg.strides.begin(), cfg.strides.end());
  return make_pyramid(strides, image_w, image_h, cfg.sigma, cfg.sigma1, cfg.sigma2);
}

}  // namespace anchorkit
