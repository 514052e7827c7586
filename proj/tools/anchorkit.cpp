// Command-line front end: corpus synthesis, anchor generation, target
// inspection, and recall/coverage evaluation over annotation corpora.
//
// Exit codes: 0 success, 1 bad usage or configuration, 2 bad input data.
// All file outputs (proposal lists, JSON reports) are byte-deterministic
// for a given input, seed, and version, independent of --threads.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "anchorkit/anchorkit.hpp"

namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_metric(double v) {
  return std::isnan(v) ? std::string("n/a") : format_double(v);
}

template <typename T>
T parse_field(std::string_view s, const std::string& context) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw anchorkit::DataError(context + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

void write_report(const std::string& path, const json& j) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw anchorkit::DataError("cannot write report: " + path);
  out << j.dump(2) << '\n';
}

anchorkit::Corpus load_corpus_with_warnings(const std::string& path) {
  anchorkit::LoadStats stats;
  anchorkit::Corpus corpus = anchorkit::load_corpus(path, &stats);
  if (stats.clipped) {
    std::cerr << "warning: clipped " << stats.clipped << " boxes to image bounds\n";
  }
  if (stats.dropped) {
    std::cerr << "warning: dropped " << stats.dropped << " boxes without area\n";
  }
  return corpus;
}

std::size_t total_objects(const anchorkit::Corpus& corpus) {
  std::size_t n = 0;
  for (const anchorkit::GroundTruthScene& s : corpus.scenes) n += s.boxes.size();
  return n;
}

// One line per proposal: image_id level x y w h score (shortest round-trip
// decimal form, so a reload reproduces the numbers exactly).
void write_proposals(const std::string& path, const anchorkit::Corpus& corpus,
                     const std::vector<anchorkit::AnchorSet>& sets) {
  std::ofstream out(path);
  if (!out) throw anchorkit::DataError("cannot write proposals file: " + path);
  for (std::size_t s = 0; s < corpus.scenes.size(); ++s) {
    for (const anchorkit::Anchor& a : sets[s].anchors) {
      out << corpus.image_ids[s] << ' ' << a.level << ' ' << format_double(a.box.x) << ' '
          << format_double(a.box.y) << ' ' << format_double(a.box.w) << ' '
          << format_double(a.box.h) << ' ' << format_double(a.score) << '\n';
    }
  }
}

std::vector<anchorkit::AnchorSet> read_proposals(const std::string& path,
                                                 const anchorkit::Corpus& corpus) {
  std::ifstream in(path);
  if (!in) throw anchorkit::DataError("cannot open proposals file: " + path);
  std::map<std::int64_t, std::size_t> index;
  for (std::size_t s = 0; s < corpus.image_ids.size(); ++s) index[corpus.image_ids[s]] = s;
  std::vector<anchorkit::AnchorSet> sets(corpus.scenes.size());
  std::vector<int> next_j(corpus.scenes.size(), 0);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string ctx = "proposals: line " + std::to_string(line_no);
    std::vector<std::string_view> tok;
    std::string_view rest = line;
    while (!rest.empty()) {
      const std::size_t cut = rest.find(' ');
      const std::string_view t = rest.substr(0, cut);
      if (!t.empty()) tok.push_back(t);
      rest = cut == std::string_view::npos ? std::string_view{} : rest.substr(cut + 1);
    }
    if (tok.size() != 7) throw anchorkit::DataError(ctx + ": expected 7 fields");
    const auto image_id = parse_field<std::int64_t>(tok[0], ctx);
    const auto it = index.find(image_id);
    if (it == index.end()) {
      throw anchorkit::DataError(ctx + ": unknown image id " + std::to_string(image_id));
    }
    anchorkit::Anchor a;
    a.level = parse_field<int>(tok[1], ctx);
    a.box = {parse_field<double>(tok[2], ctx), parse_field<double>(tok[3], ctx),
             parse_field<double>(tok[4], ctx), parse_field<double>(tok[5], ctx)};
    a.score = parse_field<double>(tok[6], ctx);
    if (!(a.box.w > 0.0) || !(a.box.h > 0.0)) {
      throw anchorkit::DataError(ctx + ": box has no area");
    }
    a.i = 0;
    a.j = next_j[it->second]++;
    sets[it->second].anchors.push_back(a);
  }
  return sets;
}

std::vector<anchorkit::AnchorSet> gt_proposals(const anchorkit::Corpus& corpus) {
  std::vector<anchorkit::AnchorSet> sets(corpus.scenes.size());
  for (std::size_t s = 0; s < corpus.scenes.size(); ++s) {
    const anchorkit::GroundTruthScene& scene = corpus.scenes[s];
    for (std::size_t g = 0; g < scene.boxes.size(); ++g) {
      sets[s].anchors.push_back({0, 0, static_cast<int>(g), scene.boxes[g], 1.0});
    }
  }
  return sets;
}

struct CommonOpts {
  std::string config_path;
  std::string report_path;
  unsigned threads = 1;
};

void add_common(CLI::App* sub, CommonOpts& c) {
  sub->add_option("--config", c.config_path, "JSON config file (defaults used otherwise)");
  sub->add_option("--report", c.report_path, "write a JSON report here");
  sub->add_option("--threads", c.threads, "worker threads (results identical for any value)")
      ->check(CLI::Range(1u, 256u));
}

anchorkit::RunConfig load_config(const CommonOpts& c) {
  if (c.config_path.empty()) return {};
  return anchorkit::load_run_config(c.config_path);
}

// ---------------------------------------------------------------------------
// synth

struct SynthOpts {
  CommonOpts common;
  std::string out;
  int scenes = -1;
  std::int64_t seed = -1;
  double extreme = -1.0;
};

int run_synth(const SynthOpts& opt, const CLI::App* sub) {
  anchorkit::RunConfig cfg = load_config(opt.common);
  if (sub->count("--scenes")) cfg.synthesis.num_scenes = opt.scenes;
  if (sub->count("--seed")) cfg.synthesis.seed = static_cast<std::uint64_t>(opt.seed);
  if (sub->count("--extreme-fraction")) cfg.synthesis.extreme_fraction = opt.extreme;

  const anchorkit::Corpus corpus = anchorkit::synthesize_corpus(cfg.synthesis);
  anchorkit::save_corpus(corpus, opt.out);
  const std::size_t objects = total_objects(corpus);
  std::cout << "wrote " << corpus.scenes.size() << " scenes (" << objects << " objects) to "
            << opt.out << '\n';
  write_report(opt.common.report_path, json{{"command", "synth"},
                                            {"scenes", corpus.scenes.size()},
                                            {"objects", objects},
                                            {"out", opt.out},
                                            {"config", anchorkit::config_to_json(cfg)}});
  return 0;
}

// ---------------------------------------------------------------------------
// anchors

struct AnchorsOpts {
  CommonOpts common;
  std::string corpus_path;
  std::string out;
  std::string scheme = "guided";
  double eps = -1.0;
  double noise_p = -1.0;
  double noise_d = -1.0;
  std::int64_t noise_seed = -1;
  double nms_thr = 0.0;
  std::int64_t top_k = 0;
};

int run_anchors(const AnchorsOpts& opt, const CLI::App* sub) {
  anchorkit::RunConfig cfg = load_config(opt.common);
  if (sub->count("--eps")) cfg.eps_l = opt.eps;
  if (sub->count("--noise-p")) cfg.noise.p_sigma = opt.noise_p;
  if (sub->count("--noise-d")) cfg.noise.d_sigma = opt.noise_d;
  if (sub->count("--noise-seed")) cfg.noise_seed = static_cast<std::uint64_t>(opt.noise_seed);
  if (cfg.noise.p_sigma < 0.0 || cfg.noise.d_sigma < 0.0) {
    throw anchorkit::ConfigError("noise scales must be non-negative");
  }
  const bool use_nms = sub->count("--nms") > 0;
  const bool use_top_k = sub->count("--top-k") > 0;
  if (use_top_k && opt.top_k <= 0) throw anchorkit::ConfigError("--top-k must be positive");

  const anchorkit::Corpus corpus = load_corpus_with_warnings(opt.corpus_path);
  std::vector<anchorkit::AnchorSet> sets(corpus.scenes.size());
  std::vector<double> coverage_sum(corpus.scenes.size(), 0.0);
  anchorkit::parallel_for(corpus.scenes.size(), opt.common.threads, [&](std::size_t s) {
    const anchorkit::GroundTruthScene& scene = corpus.scenes[s];
    const anchorkit::PyramidConfig pyr =
        anchorkit::pyramid_for(cfg, scene.image_w, scene.image_h);
    anchorkit::AnchorSet set;
    if (opt.scheme == "guided") {
      const anchorkit::PredictorOutput pred =
          anchorkit::noisy_oracle_maps(scene, pyr, cfg.noise, cfg.noise_seed + s);
      set = anchorkit::guided_anchors(pred, pyr, cfg.eps_l);
    } else {
      set = anchorkit::sliding_window_anchors(pyr, cfg.scales, cfg.ratios);
    }
    if (use_nms) set = anchorkit::nms(set, opt.nms_thr);
    if (use_top_k) set = anchorkit::top_k(set, static_cast<std::size_t>(opt.top_k));
    for (double c : anchorkit::best_coverage(set, scene)) coverage_sum[s] += c;
    sets[s] = std::move(set);
  });

  std::size_t total = 0;
  double cov = 0.0;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    total += sets[s].anchors.size();
    cov += coverage_sum[s];
  }
  const std::size_t objects = total_objects(corpus);
  const double mean_anchors =
      corpus.scenes.empty() ? 0.0 : static_cast<double>(total) / corpus.scenes.size();
  const double mean_cov = objects ? cov / static_cast<double>(objects)
                                  : std::numeric_limits<double>::quiet_NaN();

  write_proposals(opt.out, corpus, sets);
  std::cout << "scheme " << opt.scheme << ": " << total << " anchors over "
            << corpus.scenes.size() << " scenes (mean " << format_double(mean_anchors)
            << "/scene), mean best coverage " << format_metric(mean_cov) << '\n';
  write_report(opt.common.report_path, json{{"command", "anchors"},
                                            {"scheme", opt.scheme},
                                            {"scenes", corpus.scenes.size()},
                                            {"total_objects", objects},
                                            {"total_anchors", total},
                                            {"mean_anchors", mean_anchors},
                                            {"mean_best_coverage", mean_cov},
                                            {"out", opt.out},
                                            {"config", anchorkit::config_to_json(cfg)}});
  return 0;
}

// ---------------------------------------------------------------------------
// targets

struct TargetsOpts {
  CommonOpts common;
  std::string corpus_path;
  bool print_rasters = false;
  std::int64_t raster_scene = 0;
};

int run_targets(const TargetsOpts& opt, const CLI::App*) {
  const anchorkit::RunConfig cfg = load_config(opt.common);
  const anchorkit::Corpus corpus = load_corpus_with_warnings(opt.corpus_path);

  struct SceneStats {
    std::vector<std::array<std::size_t, 3>> label_counts;  // per level: neg/ign/pos
    double focal_raw = 0.0;
    std::size_t positives = 0;
    double shape_loss_sum = 0.0;
    std::size_t shape_cells = 0;
  };
  std::vector<SceneStats> stats(corpus.scenes.size());
  anchorkit::parallel_for(corpus.scenes.size(), opt.common.threads, [&](std::size_t s) {
    const anchorkit::GroundTruthScene& scene = corpus.scenes[s];
    const anchorkit::PyramidConfig pyr =
        anchorkit::pyramid_for(cfg, scene.image_w, scene.image_h);
    const anchorkit::LocationTargets loc = anchorkit::location_targets(scene, pyr);
    std::vector<anchorkit::SamplePairSet> samples;
    for (const anchorkit::PyramidLevel& lv : pyr.levels) {
      samples.push_back(anchorkit::sample_pairs(lv.stride, pyr.sigma, cfg.preset));
    }
    const std::vector<anchorkit::ShapeAssignment> shapes =
        anchorkit::shape_targets(scene, pyr, loc, samples);
    const anchorkit::PredictorOutput pred =
        anchorkit::noisy_oracle_maps(scene, pyr, cfg.noise, cfg.noise_seed + s);

    SceneStats& st = stats[s];
    st.label_counts.assign(pyr.levels.size(), {0, 0, 0});
    for (std::size_t l = 0; l < pyr.levels.size(); ++l) {
      for (anchorkit::CellLabel c : loc.levels[l].labels.cells) {
        ++st.label_counts[l][static_cast<int>(c)];
      }
      const std::size_t pos = st.label_counts[l][2];
      st.positives += pos;
      const double norm =
          anchorkit::focal_loss_map(pred.probabilities[l], loc.levels[l], cfg.focal);
      st.focal_raw += norm * static_cast<double>(std::max<std::size_t>(1, pos));
      const anchorkit::PyramidLevel& lv = pyr.levels[l];
      for (int j = 0; j < lv.grid_h; ++j) {
        for (int i = 0; i < lv.grid_w; ++i) {
          const auto& target = shapes[l].cells.at(i, j);
          if (!target) continue;
          const anchorkit::Size pred_size = anchorkit::decode_shape(
              pred.shapes[l].deltas.at(i, j), lv.stride, pyr.sigma);
          st.shape_loss_sum += anchorkit::bounded_iou_loss(
              pred_size, {target->w, target->h}, cfg.beta);
          ++st.shape_cells;
        }
      }
    }
  });

  std::vector<std::array<std::size_t, 3>> level_counts(cfg.strides.size(), {0, 0, 0});
  double focal_raw = 0.0, shape_sum = 0.0;
  std::size_t positives = 0, shape_cells = 0;
  for (const SceneStats& st : stats) {
    for (std::size_t l = 0; l < st.label_counts.size(); ++l) {
      for (int c = 0; c < 3; ++c) level_counts[l][c] += st.label_counts[l][c];
    }
    focal_raw += st.focal_raw;
    positives += st.positives;
    shape_sum += st.shape_loss_sum;
    shape_cells += st.shape_cells;
  }
  const double focal = focal_raw / static_cast<double>(std::max<std::size_t>(1, positives));
  const double shape_loss =
      shape_sum / static_cast<double>(std::max<std::size_t>(1, shape_cells));

  if (opt.print_rasters) {
    const auto idx = static_cast<std::size_t>(opt.raster_scene);
    if (idx >= corpus.scenes.size()) {
      throw anchorkit::ConfigError("--raster-scene is out of range");
    }
    const anchorkit::GroundTruthScene& scene = corpus.scenes[idx];
    const anchorkit::PyramidConfig pyr =
        anchorkit::pyramid_for(cfg, scene.image_w, scene.image_h);
    const anchorkit::LocationTargets loc = anchorkit::location_targets(scene, pyr);
    std::cout << "image " << corpus.image_ids[idx] << " rasters (+ positive, i ignore, . negative):\n";
    for (std::size_t l = 0; l < pyr.levels.size(); ++l) {
      const anchorkit::PyramidLevel& lv = pyr.levels[l];
      std::cout << "level " << lv.index << " stride " << format_double(lv.stride) << " ("
                << lv.grid_w << 'x' << lv.grid_h << "):\n";
      for (int j = 0; j < lv.grid_h; ++j) {
        std::string row;
        for (int i = 0; i < lv.grid_w; ++i) {
          const anchorkit::CellLabel c = loc.levels[l].labels.at(i, j);
          row += c == anchorkit::CellLabel::kPositive ? '+'
                 : c == anchorkit::CellLabel::kIgnore ? 'i'
                                                      : '.';
        }
        std::cout << "  " << row << '\n';
      }
    }
  }

  json levels = json::array();
  for (std::size_t l = 0; l < level_counts.size(); ++l) {
    levels.push_back({{"level", l},
                      {"negative", level_counts[l][0]},
                      {"ignore", level_counts[l][1]},
                      {"positive", level_counts[l][2]}});
  }
  std::cout << "targets over " << corpus.scenes.size() << " scenes: " << positives
            << " positive cells, " << shape_cells << " shape targets, focal loss "
            << format_double(focal) << ", shape loss " << format_double(shape_loss) << '\n';
  write_report(opt.common.report_path, json{{"command", "targets"},
                                            {"scenes", corpus.scenes.size()},
                                            {"total_objects", total_objects(corpus)},
                                            {"levels", levels},
                                            {"positives", positives},
                                            {"shape_targets", shape_cells},
                                            {"focal_loss", focal},
                                            {"shape_loss", shape_loss},
                                            {"config", anchorkit::config_to_json(cfg)}});
  return 0;
}

// ---------------------------------------------------------------------------
// eval-recall

struct EvalOpts {
  CommonOpts common;
  std::string corpus_path;
  std::string proposals_path;
  bool gt_as_proposals = false;
};

std::vector<anchorkit::AnchorSet> load_proposal_sets(const EvalOpts& opt,
                                                     const anchorkit::Corpus& corpus) {
  if (opt.gt_as_proposals) return gt_proposals(corpus);
  if (opt.proposals_path.empty()) {
    throw anchorkit::ConfigError("need --proposals FILE or --gt-as-proposals");
  }
  return read_proposals(opt.proposals_path, corpus);
}

int run_eval_recall(const EvalOpts& opt, const CLI::App*) {
  const anchorkit::RunConfig cfg = load_config(opt.common);
  const anchorkit::Corpus corpus = load_corpus_with_warnings(opt.corpus_path);
  const std::vector<anchorkit::AnchorSet> sets = load_proposal_sets(opt, corpus);
  const anchorkit::RecallReport rep =
      anchorkit::recall_report(sets, corpus.scenes, opt.common.threads);

  std::cout << "AR@100   " << format_metric(rep.ar_100) << '\n'
            << "AR@300   " << format_metric(rep.ar_300) << '\n'
            << "AR@1000  " << format_metric(rep.ar_1000) << '\n'
            << "AR small " << format_metric(rep.ar_small) << " / medium "
            << format_metric(rep.ar_medium) << " / large " << format_metric(rep.ar_large)
            << " (at 100 proposals)\n";

  write_report(opt.common.report_path,
               json{{"command", "eval-recall"},
                    {"scenes", corpus.scenes.size()},
                    {"total_objects", total_objects(corpus)},
                    {"ar_100", rep.ar_100},
                    {"ar_300", rep.ar_300},
                    {"ar_1000", rep.ar_1000},
                    {"ar_small", rep.ar_small},
                    {"ar_medium", rep.ar_medium},
                    {"ar_large", rep.ar_large},
                    {"iou_thresholds", anchorkit::kRecallThresholds},
                    {"recall_curve_1000", rep.recall_curve_1000},
                    {"config", anchorkit::config_to_json(cfg)}});
  return 0;
}

// ---------------------------------------------------------------------------
// iou-dist

struct IoUDistOpts {
  EvalOpts eval;
  std::vector<double> edges = {0.9, 0.8, 0.7, 0.6, 0.5};
};

int run_iou_dist(const IoUDistOpts& opt, const CLI::App*) {
  const anchorkit::RunConfig cfg = load_config(opt.eval.common);
  const anchorkit::Corpus corpus = load_corpus_with_warnings(opt.eval.corpus_path);
  const std::vector<anchorkit::AnchorSet> sets = load_proposal_sets(opt.eval, corpus);
  const anchorkit::IoUDistribution dist =
      anchorkit::iou_distribution(sets, corpus.scenes, opt.edges, opt.eval.common.threads);

  std::size_t total = 0;
  for (const anchorkit::AnchorSet& s : sets) total += s.anchors.size();
  for (std::size_t e = 0; e < dist.edges.size(); ++e) {
    std::cout << "IoU >= " << format_double(dist.edges[e]) << ": " << dist.counts[e] << " of "
              << total << " proposals\n";
  }
  write_report(opt.eval.common.report_path, json{{"command", "iou-dist"},
                                                 {"scenes", corpus.scenes.size()},
                                                 {"total_proposals", total},
                                                 {"edges", dist.edges},
                                                 {"counts", dist.counts},
                                                 {"config", anchorkit::config_to_json(cfg)}});
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOpts {
  CommonOpts common;
  std::string corpus_path;
  std::vector<double> eps;
  double noise_p = -1.0;
  double noise_d = -1.0;
  std::int64_t noise_seed = -1;
};

int run_sweep(const SweepOpts& opt, const CLI::App* sub) {
  anchorkit::RunConfig cfg = load_config(opt.common);
  if (sub->count("--eps")) cfg.eps_list = opt.eps;
  if (sub->count("--noise-p")) cfg.noise.p_sigma = opt.noise_p;
  if (sub->count("--noise-d")) cfg.noise.d_sigma = opt.noise_d;
  if (sub->count("--noise-seed")) cfg.noise_seed = static_cast<std::uint64_t>(opt.noise_seed);
  if (cfg.noise.p_sigma < 0.0 || cfg.noise.d_sigma < 0.0) {
    throw anchorkit::ConfigError("noise scales must be non-negative");
  }

  const anchorkit::Corpus corpus = load_corpus_with_warnings(opt.corpus_path);
  std::vector<anchorkit::PyramidConfig> pyramids(corpus.scenes.size());
  std::vector<anchorkit::PredictorOutput> preds(corpus.scenes.size());
  anchorkit::parallel_for(corpus.scenes.size(), opt.common.threads, [&](std::size_t s) {
    const anchorkit::GroundTruthScene& scene = corpus.scenes[s];
    pyramids[s] = anchorkit::pyramid_for(cfg, scene.image_w, scene.image_h);
    preds[s] = anchorkit::noisy_oracle_maps(scene, pyramids[s], cfg.noise, cfg.noise_seed + s);
  });
  const anchorkit::SweepReport sweep = anchorkit::threshold_sweep(
      preds, pyramids, corpus.scenes, cfg.eps_list, opt.common.threads);

  json rows = json::array();
  std::cout << "eps      mean_anchors  retention  mean_best_coverage\n";
  for (const anchorkit::SweepRow& row : sweep.rows) {
    std::cout << format_double(row.eps) << '\t' << format_double(row.mean_anchors) << '\t'
              << format_double(row.retention) << '\t' << format_metric(row.mean_best_coverage)
              << '\n';
    rows.push_back({{"eps", row.eps},
                    {"mean_anchors", row.mean_anchors},
                    {"retention", row.retention},
                    {"mean_best_coverage", row.mean_best_coverage}});
  }
  write_report(opt.common.report_path, json{{"command", "sweep"},
                                            {"scenes", corpus.scenes.size()},
                                            {"total_objects", total_objects(corpus)},
                                            {"rows", rows},
                                            {"config", anchorkit::config_to_json(cfg)}});
  return 0;
}

// ---------------------------------------------------------------------------
// shape-stats

struct ShapeStatsOpts {
  CommonOpts common;
  std::string corpus_path;
  std::string population = "gt";
  double bin_width = 0.25;
  std::string tsv_prefix;
};

void write_bins_tsv(const std::string& path, const std::map<int, std::size_t>& bins,
                    double bin_width) {
  std::ofstream out(path);
  if (!out) throw anchorkit::DataError("cannot write histogram file: " + path);
  out << "left_edge\tcount\n";
  for (const auto& [key, count] : bins) {
    out << format_double(key * bin_width) << '\t' << count << '\n';
  }
}

int run_shape_stats(const ShapeStatsOpts& opt, const CLI::App*) {
  const anchorkit::RunConfig cfg = load_config(opt.common);
  const anchorkit::Corpus corpus = load_corpus_with_warnings(opt.corpus_path);

  std::vector<anchorkit::Size> shapes;
  anchorkit::Population pop = anchorkit::Population::kGroundTruth;
  if (opt.population == "gt") {
    shapes = anchorkit::collect_shapes(corpus.scenes);
  } else {
    pop = opt.population == "guided" ? anchorkit::Population::kGuided
                                     : anchorkit::Population::kSlidingWindow;
    std::vector<anchorkit::AnchorSet> sets(corpus.scenes.size());
    anchorkit::parallel_for(corpus.scenes.size(), opt.common.threads, [&](std::size_t s) {
      const anchorkit::GroundTruthScene& scene = corpus.scenes[s];
      const anchorkit::PyramidConfig pyr =
          anchorkit::pyramid_for(cfg, scene.image_w, scene.image_h);
      if (pop == anchorkit::Population::kGuided) {
        const anchorkit::PredictorOutput pred =
            anchorkit::noisy_oracle_maps(scene, pyr, cfg.noise, cfg.noise_seed + s);
        sets[s] = anchorkit::guided_anchors(pred, pyr, cfg.eps_l);
      } else {
        sets[s] = anchorkit::sliding_window_anchors(pyr, cfg.scales, cfg.ratios);
      }
    });
    for (const anchorkit::AnchorSet& set : sets) {
      for (const anchorkit::Size& s : anchorkit::collect_shapes(set)) shapes.push_back(s);
    }
  }

  const anchorkit::ShapeHistogram hist =
      anchorkit::shape_distribution(shapes, pop, opt.bin_width);
  json scale_bins = json::object();
  json ratio_bins = json::object();
  for (const auto& [k, v] : hist.scale_bins) scale_bins[std::to_string(k)] = v;
  for (const auto& [k, v] : hist.ratio_bins) ratio_bins[std::to_string(k)] = v;

  std::cout << "population " << opt.population << ": " << hist.total << " boxes, "
            << hist.scale_bins.size() << " scale bins, " << hist.ratio_bins.size()
            << " ratio bins (log2, width " << format_double(hist.bin_width) << ")\n";
  if (!opt.tsv_prefix.empty()) {
    write_bins_tsv(opt.tsv_prefix + ".scale.tsv", hist.scale_bins, hist.bin_width);
    write_bins_tsv(opt.tsv_prefix + ".ratio.tsv", hist.ratio_bins, hist.bin_width);
  }
  write_report(opt.common.report_path, json{{"command", "shape-stats"},
                                            {"population", opt.population},
                                            {"bin_width", hist.bin_width},
                                            {"total", hist.total},
                                            {"scale_bins", scale_bins},
                                            {"ratio_bins", ratio_bins},
                                            {"config", anchorkit::config_to_json(cfg)}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anchor pyramid toolkit: synthesize corpora, generate guided or "
               "sliding-window anchors, inspect training targets, evaluate recall"};
  app.require_subcommand(1);

  SynthOpts synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a random annotation corpus");
  add_common(synth_cmd, synth.common);
  synth_cmd->add_option("--out", synth.out, "corpus JSON output path")->required();
  synth_cmd->add_option("--scenes", synth.scenes, "number of scenes");
  synth_cmd->add_option("--seed", synth.seed, "random seed");
  synth_cmd->add_option("--extreme-fraction", synth.extreme,
                        "share of boxes with aspect ratio magnitude in [4.5, 8]")
      ->check(CLI::Range(0.0, 1.0));

  AnchorsOpts anchors;
  CLI::App* anchors_cmd =
      app.add_subcommand("anchors", "generate anchors for every scene in a corpus");
  add_common(anchors_cmd, anchors.common);
  anchors_cmd->add_option("--corpus", anchors.corpus_path, "corpus JSON file")->required();
  anchors_cmd->add_option("--out", anchors.out, "proposals text output path")->required();
  anchors_cmd->add_option("--scheme", anchors.scheme, "anchor scheme")
      ->check(CLI::IsMember({"guided", "sliding"}));
  anchors_cmd->add_option("--eps", anchors.eps, "location probability threshold");
  anchors_cmd->add_option("--noise-p", anchors.noise_p, "probability logit noise scale");
  anchors_cmd->add_option("--noise-d", anchors.noise_d, "shape delta noise scale");
  anchors_cmd->add_option("--noise-seed", anchors.noise_seed, "noise seed base");
  anchors_cmd->add_option("--nms", anchors.nms_thr, "suppress overlaps above this IoU");
  anchors_cmd->add_option("--top-k", anchors.top_k, "keep only the k best anchors per scene");

  TargetsOpts targets;
  CLI::App* targets_cmd =
      app.add_subcommand("targets", "compute location and shape targets plus oracle losses");
  add_common(targets_cmd, targets.common);
  targets_cmd->add_option("--corpus", targets.corpus_path, "corpus JSON file")->required();
  targets_cmd->add_flag("--print-rasters", targets.print_rasters,
                        "print per-level label rasters for one scene");
  targets_cmd->add_option("--raster-scene", targets.raster_scene,
                          "scene index for --print-rasters");

  EvalOpts eval;
  CLI::App* eval_cmd = app.add_subcommand("eval-recall", "average recall of a proposal set");
  add_common(eval_cmd, eval.common);
  eval_cmd->add_option("--corpus", eval.corpus_path, "corpus JSON file")->required();
  eval_cmd->add_option("--proposals", eval.proposals_path, "proposals text file");
  eval_cmd->add_flag("--gt-as-proposals", eval.gt_as_proposals,
                     "evaluate the annotations against themselves");

  IoUDistOpts iou_dist;
  CLI::App* iou_cmd =
      app.add_subcommand("iou-dist", "best-coverage counts above descending IoU edges");
  add_common(iou_cmd, iou_dist.eval.common);
  iou_cmd->add_option("--corpus", iou_dist.eval.corpus_path, "corpus JSON file")->required();
  iou_cmd->add_option("--proposals", iou_dist.eval.proposals_path, "proposals text file");
  iou_cmd->add_flag("--gt-as-proposals", iou_dist.eval.gt_as_proposals,
                    "evaluate the annotations against themselves");
  iou_cmd->add_option("--edges", iou_dist.edges, "descending IoU edges");

  SweepOpts sweep;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "anchor count and coverage across probability thresholds");
  add_common(sweep_cmd, sweep.common);
  sweep_cmd->add_option("--corpus", sweep.corpus_path, "corpus JSON file")->required();
  sweep_cmd->add_option("--eps", sweep.eps, "thresholds to sweep (ascending)");
  sweep_cmd->add_option("--noise-p", sweep.noise_p, "probability logit noise scale");
  sweep_cmd->add_option("--noise-d", sweep.noise_d, "shape delta noise scale");
  sweep_cmd->add_option("--noise-seed", sweep.noise_seed, "noise seed base");

  ShapeStatsOpts shape_stats;
  CLI::App* shape_cmd =
      app.add_subcommand("shape-stats", "log2 scale and aspect histograms of a box population");
  add_common(shape_cmd, shape_stats.common);
  shape_cmd->add_option("--corpus", shape_stats.corpus_path, "corpus JSON file")->required();
  shape_cmd->add_option("--population", shape_stats.population, "which boxes to histogram")
      ->check(CLI::IsMember({"gt", "guided", "sliding"}));
  shape_cmd->add_option("--bin-width", shape_stats.bin_width, "log2 bin width")
      ->check(CLI::PositiveNumber);
  shape_cmd->add_option("--tsv-prefix", shape_stats.tsv_prefix,
                        "also write <prefix>.scale.tsv and <prefix>.ratio.tsv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (synth_cmd->parsed()) return run_synth(synth, synth_cmd);
    if (anchors_cmd->parsed()) return run_anchors(anchors, anchors_cmd);
    if (targets_cmd->parsed()) return run_targets(targets, targets_cmd);
    if (eval_cmd->parsed()) return run_eval_recall(eval, eval_cmd);
    if (iou_cmd->parsed()) return run_iou_dist(iou_dist, iou_cmd);
    if (sweep_cmd->parsed()) return run_sweep(sweep, sweep_cmd);
    if (shape_cmd->parsed()) return run_shape_stats(shape_stats, shape_cmd);
  } catch (const anchorkit::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const anchorkit::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
