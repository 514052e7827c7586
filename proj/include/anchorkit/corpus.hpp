#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "anchorkit/errors.hpp"
#include "anchorkit/pyramid.hpp"

namespace anchorkit {

enum class CorpusSource { kCocoFile, kSynthetic };

/// Scenes plus the image ids they were keyed by (parallel vectors, ascending id).
/// `seed` is meaningful only for synthetic corpora.
struct Corpus {
  std::vector<std::int64_t> image_ids;
  std::vector<GroundTruthScene> scenes;
  CorpusSource source = CorpusSource::kCocoFile;
  std::uint64_t seed = 0;
};

struct LoadStats {
  std::size_t clipped = 0;  // boxes pulled back inside the image
  std::size_t dropped = 0;  // boxes with no area left (or none to begin with)
};

namespace detail {

inline double json_number(const nlohmann::json& j, const std::string& context) {
  if (!j.is_number()) throw DataError(context + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw DataError(context + ": value is not finite");
  return v;
}

inline std::int64_t json_integer(const nlohmann::json& j, const std::string& context) {
  if (!j.is_number_integer()) throw DataError(context + ": expected an integer");
  return j.get<std::int64_t>();
}

// [cx, cy, w, h] from either center form (preferred: exact roundtrip) or
// top-left corner form.
inline Box annotation_box(const nlohmann::json& ann, const std::string& context) {
  const bool center = ann.contains("bbox_center");
  const char* key = center ? "bbox_center" : "bbox";
  if (!ann.contains(key)) throw DataError(context + ": missing bbox");
  const nlohmann::json& arr = ann.at(key);
  if (!arr.is_array() || arr.size() != 4) {
    throw DataError(context + ": bbox must be an array of 4 numbers");
  }
  double v[4];
  for (std::size_t k = 0; k < 4; ++k) {
    v[k] = json_number(arr[k], context + ": bbox");
  }
  if (center) return {v[0], v[1], v[2], v[3]};
  return {v[0] + v[2] / 2.0, v[1] + v[3] / 2.0, v[2], v[3]};
}

}  // namespace detail

inline Corpus load_corpus_json(const nlohmann::json& j, LoadStats* stats = nullptr) {
  LoadStats local;
  LoadStats& st = stats ? *stats : local;
  if (!j.is_object() || !j.contains("images") || !j.at("images").is_array()) {
    throw DataError("corpus: missing 'images' array");
  }
  if (!j.contains("annotations") || !j.at("annotations").is_array()) {
    throw DataError("corpus: missing 'annotations' array");
  }

  std::map<std::int64_t, GroundTruthScene> by_id;
  std::size_t idx = 0;
  for (const nlohmann::json& im : j.at("images")) {
    const std::string ctx = "corpus: images[" + std::to_string(idx++) + "]";
    if (!im.is_object() || !im.contains("id")) throw DataError(ctx + ": missing id");
    const std::int64_t id = detail::json_integer(im.at("id"), ctx + ": id");
    if (!im.contains("width") || !im.contains("height")) {
      throw DataError(ctx + ": missing width/height");
    }
    GroundTruthScene scene;
    scene.image_w = static_cast<int>(detail::json_integer(im.at("width"), ctx + ": width"));
    scene.image_h = static_cast<int>(detail::json_integer(im.at("height"), ctx + ": height"));
    if (scene.image_w < 1 || scene.image_h < 1) {
      throw DataError(ctx + ": image dimensions must be positive");
    }
    if (!by_id.emplace(id, std::move(scene)).second) {
      throw DataError(ctx + ": duplicate image id " + std::to_string(id));
    }
  }

  idx = 0;
  for (const nlohmann::json& ann : j.at("annotations")) {
    const std::string ctx = "corpus: annotations[" + std::to_string(idx++) + "]";
    if (!ann.is_object() || !ann.contains("image_id")) {
      throw DataError(ctx + ": missing image_id");
    }
    const std::int64_t image_id = detail::json_integer(ann.at("image_id"), ctx + ": image_id");
    auto it = by_id.find(image_id);
    if (it == by_id.end()) {
      throw DataError(ctx + ": unknown image id " + std::to_string(image_id));
    }
    GroundTruthScene& scene = it->second;
    const Box raw = detail::annotation_box(ann, ctx);
    if (!(raw.w > 0.0) || !(raw.h > 0.0)) {
      ++st.dropped;
      continue;
    }
    const double img_w = scene.image_w;
    const double img_h = scene.image_h;
    const double l = std::clamp(raw.left(), 0.0, img_w);
    const double r = std::clamp(raw.right(), 0.0, img_w);
    const double t = std::clamp(raw.top(), 0.0, img_h);
    const double b = std::clamp(raw.bottom(), 0.0, img_h);
    if (!(r > l) || !(b > t)) {
      ++st.dropped;
      continue;
    }
    if (l != raw.left() || r != raw.right() || t != raw.top() || b != raw.bottom()) {
      ++st.clipped;
    }
    scene.boxes.push_back({(l + r) / 2.0, (t + b) / 2.0, r - l, b - t});
  }

  Corpus corpus;
  for (auto& [id, scene] : by_id) {
    corpus.image_ids.push_back(id);
    corpus.scenes.push_back(std::move(scene));
  }
  return corpus;
}

inline Corpus load_corpus(const std::string& path, LoadStats* stats = nullptr) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("corpus: " + path + ": " + e.what());
  }
  return load_corpus_json(j, stats);
}

inline nlohmann::json corpus_to_json(const Corpus& corpus) {
  nlohmann::json images = nlohmann::json::array();
  nlohmann::json annotations = nlohmann::json::array();
  std::int64_t ann_id = 1;
  for (std::size_t s = 0; s < corpus.scenes.size(); ++s) {
    const GroundTruthScene& scene = corpus.scenes[s];
    images.push_back({{"id", corpus.image_ids[s]},
                      {"width", scene.image_w},
                      {"height", scene.image_h}});
    for (const Box& b : scene.boxes) {
      annotations.push_back({{"id", ann_id++},
                             {"image_id", corpus.image_ids[s]},
                             {"bbox", {b.left(), b.top(), b.w, b.h}},
                             {"bbox_center", {b.x, b.y, b.w, b.h}}});
    }
  }
  return {{"images", images}, {"annotations", annotations}};
}

inline void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file: " + path);
  out << corpus_to_json(corpus).dump(2) << '\n';
}

/// Random scene generator. Scales are sqrt(area) in pixels; ratios are h/w.
/// An `extreme_fraction` share of boxes instead draws its ratio magnitude
/// from [4.5, 8] (inverted for half of them), stressing shapes a fixed
/// anchor vocabulary cannot cover.
struct SynthesisSpec {
  int num_scenes = 200;
  int image_w = 256;
  int image_h = 256;
  int min_objects = 1;
  int max_objects = 6;
  double min_scale = 24.0;
  double max_scale = 160.0;
  double min_ratio = 0.5;
  double max_ratio = 2.0;
  double extreme_fraction = 0.0;
  std::uint64_t seed = 0;
};

inline Corpus synthesize_corpus(const SynthesisSpec& spec) {
  if (spec.num_scenes <= 0) throw ConfigError("synthesis: num_scenes must be positive");
  if (spec.image_w < 1 || spec.image_h < 1) {
    throw ConfigError("synthesis: image dimensions must be positive");
  }
  if (spec.min_objects < 0 || spec.max_objects < spec.min_objects) {
    throw ConfigError("synthesis: bad object count range");
  }
  if (!(spec.min_scale > 0.0) || spec.max_scale < spec.min_scale) {
    throw ConfigError("synthesis: bad scale range");
  }
  if (!(spec.min_ratio > 0.0) || spec.max_ratio < spec.min_ratio) {
    throw ConfigError("synthesis: bad ratio range");
  }
  if (spec.extreme_fraction < 0.0 || spec.extreme_fraction > 1.0) {
    throw ConfigError("synthesis: extreme_fraction must lie in [0, 1]");
  }

  // 1/64 px grid keeps every coordinate an exact dyadic rational, so a
  // save/load cycle reproduces the corpus bit for bit.
  const auto quantize = [](double v) { return std::round(v * 64.0) / 64.0; };

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> count_dist(spec.min_objects, spec.max_objects);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double log_scale_lo = std::log2(spec.min_scale);
  const double log_scale_hi = std::log2(spec.max_scale);
  const double log_ratio_lo = std::log2(spec.min_ratio);
  const double log_ratio_hi = std::log2(spec.max_ratio);
  const double log_extreme_lo = std::log2(4.5);
  const double log_extreme_hi = std::log2(8.0);

  Corpus corpus;
  corpus.source = CorpusSource::kSynthetic;
  corpus.seed = spec.seed;
  const double img_w = spec.image_w;
  const double img_h = spec.image_h;
  for (int s = 0; s < spec.num_scenes; ++s) {
    GroundTruthScene scene;
    scene.image_w = spec.image_w;
    scene.image_h = spec.image_h;
    const int n = count_dist(rng);
    for (int k = 0; k < n; ++k) {
      const double scale = std::exp2(log_scale_lo + (log_scale_hi - log_scale_lo) * unit(rng));
      double log_ratio;
      if (unit(rng) < spec.extreme_fraction) {
        log_ratio = log_extreme_lo + (log_extreme_hi - log_extreme_lo) * unit(rng);
        if (unit(rng) < 0.5) log_ratio = -log_ratio;
      } else {
        log_ratio = log_ratio_lo + (log_ratio_hi - log_ratio_lo) * unit(rng);
      }
      const double ratio = std::exp2(log_ratio);
      double w = scale / std::sqrt(ratio);
      double h = scale * std::sqrt(ratio);
      const double fit = std::min({1.0, 0.95 * img_w / w, 0.95 * img_h / h});
      w = quantize(w * fit);
      h = quantize(h * fit);
      const double cx =
          std::clamp(quantize(w / 2.0 + (img_w - w) * unit(rng)), w / 2.0, img_w - w / 2.0);
      const double cy =
          std::clamp(quantize(h / 2.0 + (img_h - h) * unit(rng)), h / 2.0, img_h - h / 2.0);
      scene.boxes.push_back({cx, cy, w, h});
    }
    corpus.image_ids.push_back(s + 1);
    corpus.scenes.push_back(std::move(scene));
  }
  return corpus;
}

}  // namespace anchorkit
