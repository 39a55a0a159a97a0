#include "xmodal/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xmodal/agg.hpp"
#include "xmodal/align.hpp"
#include "xmodal/enrich.hpp"
#include "xmodal/error.hpp"
#include "xmodal/evalkit.hpp"
#include "xmodal/io.hpp"
#include "xmodal/pairkit.hpp"
#include "xmodal/perm.hpp"
#include "xmodal/report.hpp"
#include "xmodal/rng.hpp"
#include "xmodal/sim.hpp"
#include "xmodal/store.hpp"
#include "xmodal/synth.hpp"

namespace xmodal::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct GlobalState {
  std::string config_path;
  int threads = 1;
  CLI::Option* config_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  json config = json::object();
  std::string config_bytes;  // raw file content, digested when present

  void load_config() {
    if (config_path.empty()) return;
    config_bytes = io::read_file(config_path);
    json parsed = json::parse(config_bytes, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object())
      fail(errc::config_invalid, config_path + ": config must be a JSON object");
    config = std::move(parsed);
  }

  json section(std::initializer_list<const char*> path) const {
    const json* cur = &config;
    for (const char* name : path) {
      if (!cur->is_object() || !cur->contains(name)) return json::object();
      cur = &(*cur)[name];
    }
    return cur->is_object() ? *cur : json::object();
  }

  int resolve_threads() const {
    long value = 1;
    if (threads_opt && threads_opt->count() > 0) {
      value = threads;
    } else if (config.contains("threads")) {
      if (!config["threads"].is_number_integer())
        fail(errc::config_invalid, "config key 'threads' must be an integer");
      value = config["threads"].get<long>();
    } else if (const char* env = std::getenv("XMODAL_THREADS")) {
      char* end = nullptr;
      value = std::strtol(env, &end, 10);
      if (end == env || *end != '\0')
        fail(errc::config_invalid, std::string("XMODAL_THREADS is not an integer: ") + env);
    }
    if (value < 1 || value > 1024) fail(errc::config_invalid, "threads must lie in [1,1024]");
    return static_cast<int>(value);
  }

  // artifacts made under one --config file share its digest; without a config
  // file each command digests its own effective parameter echo
  json make_artifact(const std::string& kind, json params, std::optional<std::uint64_t> seed) const {
    json artifact = report::artifact_envelope(kind, std::move(params), seed);
    if (!config_bytes.empty()) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                    static_cast<unsigned long long>(report::fnv1a64(config_bytes)));
      artifact["config_digest"] = buf;
    }
    return artifact;
  }
};

// flag wins, then config value, then the compiled-in default
template <class T>
void merge_opt(const CLI::Option* opt, const json& section, const char* key, T& value) {
  if (opt && opt->count() > 0) return;
  if (!section.is_object() || !section.contains(key)) return;
  try {
    value = section[key].get<T>();
  } catch (...) {
    fail(errc::config_invalid, std::string("config key '") + key + "' has the wrong type");
  }
}

std::uint64_t resolve_seed(const CLI::Option* opt, std::string seed_str, const json& section) {
  if ((!opt || opt->count() == 0) && section.is_object() && section.contains("seed")) {
    const auto& s = section["seed"];
    seed_str = s.is_string() ? s.get<std::string>() : std::to_string(s.get<std::uint64_t>());
  }
  if (seed_str.empty())
    fail(errc::config_invalid, "this command is randomized: pass --seed <uint64> or --seed auto");
  if (seed_str == "auto") {
    std::random_device rd;
    const auto seed = (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
    std::printf("seed: %llu\n", static_cast<unsigned long long>(seed));
    return seed;
  }
  try {
    std::size_t pos = 0;
    const auto value = std::stoull(seed_str, &pos);
    if (pos != seed_str.size()) throw std::invalid_argument(seed_str);
    return value;
  } catch (const std::exception&) {
    fail(errc::config_invalid, "seed must be a decimal uint64 or 'auto', got '" + seed_str + "'");
  }
}

fs::path ensure_out_dir(const std::string& out) {
  fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(errc::io_failure, "cannot create output directory " + dir.string());
  return dir;
}

std::vector<double> parse_fraction_list(const std::string& csv) {
  std::vector<double> fractions;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto comma = csv.find(',', start);
    const auto token = csv.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!token.empty()) {
      try {
        std::size_t pos = 0;
        fractions.push_back(std::stod(token, &pos));
        if (pos != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        fail(errc::config_invalid, "bad fraction '" + token + "' in list");
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (fractions.empty()) fail(errc::config_invalid, "fraction list is empty");
  return fractions;
}

json histogram_params(const align::HistogramSpec& spec) {
  return json{{"bin_count", spec.bin_count},
              {"lo", spec.lo},
              {"hi", spec.hi},
              {"smoothing_eps", spec.smoothing_eps}};
}

json scoring_params(const sim::ScoreConfig& cfg) {
  return json{{"pooling", sim::pooling_name(cfg.pooling)},
              {"frames_per_clip", cfg.frames_per_clip},
              {"w", cfg.w},
              {"clip_negative", cfg.clip_negative},
              {"embedding_precision", "float32"}};
}

std::vector<perm::PairKey> corpus_keys(const store::Corpus& corpus) {
  std::vector<perm::PairKey> keys;
  keys.reserve(corpus.size());
  for (const auto& p : corpus.pairs) keys.push_back(perm::PairKey{p.pair_id, p.text_id, p.group_id});
  return keys;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string out, seed_str, name = "synthetic";
  std::uint64_t pairs = 1000, dim = 32, groups = 10;
  int frames = 1;
  double text_noise = 0.6, visual_noise = 0.6;
  CLI::Option *seed_opt = nullptr, *pairs_opt = nullptr, *dim_opt = nullptr, *groups_opt = nullptr,
              *frames_opt = nullptr, *tn_opt = nullptr, *vn_opt = nullptr, *name_opt = nullptr;
};

void run_synth(const GlobalState& g, SynthArgs& a) {
  const json section = g.section({"synth"});
  merge_opt(a.pairs_opt, section, "pairs", a.pairs);
  merge_opt(a.dim_opt, section, "dim", a.dim);
  merge_opt(a.groups_opt, section, "groups", a.groups);
  merge_opt(a.frames_opt, section, "frames_per_pair", a.frames);
  merge_opt(a.tn_opt, section, "text_noise", a.text_noise);
  merge_opt(a.vn_opt, section, "visual_noise", a.visual_noise);
  merge_opt(a.name_opt, section, "dataset_name", a.name);
  const auto seed = resolve_seed(a.seed_opt, a.seed_str, section);
  const auto dir = ensure_out_dir(a.out);

  synth::SynthConfig cfg;
  cfg.n_pairs = a.pairs;
  cfg.dim = a.dim;
  cfg.n_groups = a.groups;
  cfg.frames_per_pair = a.frames;
  cfg.text_noise = a.text_noise;
  cfg.visual_noise = a.visual_noise;
  cfg.seed = seed;
  cfg.dataset_name = a.name;
  const auto corpus = synth::make_corpus(cfg);
  synth::write_corpus(corpus, dir, seed);

  json params{{"pairs", cfg.n_pairs},        {"dim", cfg.dim},
              {"groups", cfg.n_groups},      {"frames_per_pair", cfg.frames_per_pair},
              {"text_noise", cfg.text_noise}, {"visual_noise", cfg.visual_noise},
              {"dataset_name", cfg.dataset_name}};
  json artifact = g.make_artifact("synth_report", params, seed);
  artifact["dataset"] = corpus.dataset_name;
  artifact["n_pairs"] = corpus.size();
  report::write_json_artifact(artifact, dir / "synth_report.json");
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::string manifest, out;
};

void run_ingest(const GlobalState& g, IngestArgs& a) {
  const auto corpus = store::join_corpus(store::load_manifest(a.manifest));
  const auto dir = ensure_out_dir(a.out);
  std::size_t frames = 0;
  for (const auto& rows : corpus.visual_row) frames += rows.size();

  json params{{"manifest", fs::path(a.manifest).filename().string()},
              {"embedding_precision", "float32"}};
  json artifact = g.make_artifact("ingest_report", params, std::nullopt);
  artifact["dataset"] = corpus.dataset_name;
  artifact["n_pairs"] = corpus.size();
  artifact["n_frames"] = frames;
  artifact["text"] = json{{"rows", corpus.text.rows()},
                          {"dim", corpus.text.dim},
                          {"normalized", corpus.text.normalized}};
  artifact["visual"] = json{{"rows", corpus.visual.rows()},
                            {"dim", corpus.visual.dim},
                            {"normalized", corpus.visual.normalized}};
  report::write_json_artifact(artifact, dir / "ingest_report.json");
}

// ---------------------------------------------------------------- score

struct ScoreArgs {
  std::string manifest, plan, out, pooling = "per_frame";
  double w = 1.0;
  bool clip_negative = false;
  int frames_per_clip = 8;
  CLI::Option *pooling_opt = nullptr, *w_opt = nullptr, *clip_opt = nullptr, *fpc_opt = nullptr;
};

sim::ScoreConfig score_config_from(const ScoreArgs& a, const json& section) {
  ScoreArgs merged = a;
  merge_opt(a.pooling_opt, section, "pooling", merged.pooling);
  merge_opt(a.w_opt, section, "w", merged.w);
  merge_opt(a.clip_opt, section, "clip_negative", merged.clip_negative);
  merge_opt(a.fpc_opt, section, "frames_per_clip", merged.frames_per_clip);
  sim::ScoreConfig cfg;
  cfg.pooling = sim::parse_pooling(merged.pooling);
  cfg.w = merged.w;
  cfg.clip_negative = merged.clip_negative;
  cfg.frames_per_clip = merged.frames_per_clip;
  return cfg;
}

void run_score(const GlobalState& g, ScoreArgs& a) {
  const json section = g.section({"score"});
  const auto cfg = score_config_from(a, section);
  const auto corpus = store::join_corpus(store::load_manifest(a.manifest));
  const auto dir = ensure_out_dir(a.out);

  std::optional<std::uint64_t> plan_seed;
  std::unordered_map<std::string, std::string> condition_map;
  if (!a.plan.empty()) {
    const auto plan = perm::load_plan(a.plan);
    plan_seed = plan.seed;
    condition_map = plan.mapping();
  } else {
    condition_map = sim::identity_condition_map(corpus);
  }

  const auto samples = sim::score_corpus(corpus, condition_map, cfg);
  sim::write_scores_csv(samples, dir / "scores.csv");

  json params = scoring_params(cfg);
  params["manifest"] = fs::path(a.manifest).filename().string();
  params["plan"] = a.plan.empty() ? "" : fs::path(a.plan).filename().string();
  json artifact = g.make_artifact("scores", params, plan_seed);
  artifact["dataset"] = corpus.dataset_name;
  artifact["n_samples"] = samples.size();
  report::write_json_artifact(artifact, dir / "scores.meta.json");
}

// ---------------------------------------------------------------- shuffle-plan

struct PlanArgs {
  std::string manifest, out, seed_str, constraint = "none";
  double fraction = 1.0;
  CLI::Option *seed_opt = nullptr, *fraction_opt = nullptr, *constraint_opt = nullptr;
};

void run_shuffle_plan(const GlobalState& g, PlanArgs& a) {
  const json section = g.section({"shuffle-plan"});
  merge_opt(a.fraction_opt, section, "fraction", a.fraction);
  merge_opt(a.constraint_opt, section, "constraint", a.constraint);
  const auto seed = resolve_seed(a.seed_opt, a.seed_str, section);
  const auto constraint = perm::parse_constraint(a.constraint);
  const auto corpus = store::join_corpus(store::load_manifest(a.manifest));
  const auto dir = ensure_out_dir(a.out);

  const auto plan = perm::make_plan(corpus_keys(corpus), a.fraction, seed, constraint);
  perm::write_plan(plan, dir / "shuffle_plan.jsonl");

  json params{{"manifest", fs::path(a.manifest).filename().string()},
              {"fraction", a.fraction},
              {"constraint", perm::constraint_name(constraint)}};
  json artifact = g.make_artifact("shuffle_plan", params, seed);
  artifact["dataset"] = corpus.dataset_name;
  artifact["reassigned"] = plan.reassigned_count();
  report::write_json_artifact(artifact, dir / "shuffle_plan.meta.json");
}

// ---------------------------------------------------------------- align

struct AlignArgs {
  ScoreArgs score;  // reuses scoring knobs (manifest/out too)
  std::string seed_str, constraint = "none";
  int replicates = 1000, bins = 100;
  double level = 0.95, lo = -1.0, hi = 1.0, eps = 1e-10;
  CLI::Option *seed_opt = nullptr, *constraint_opt = nullptr, *replicates_opt = nullptr,
              *bins_opt = nullptr, *level_opt = nullptr, *lo_opt = nullptr, *hi_opt = nullptr,
              *eps_opt = nullptr;
};

align::HistogramSpec histogram_from(const AlignArgs& a, const json& section) {
  AlignArgs merged = a;
  merge_opt(a.bins_opt, section, "bins", merged.bins);
  merge_opt(a.lo_opt, section, "lo", merged.lo);
  merge_opt(a.hi_opt, section, "hi", merged.hi);
  merge_opt(a.eps_opt, section, "smoothing_eps", merged.eps);
  align::HistogramSpec spec;
  spec.bin_count = merged.bins;
  spec.lo = merged.lo;
  spec.hi = merged.hi;
  spec.smoothing_eps = merged.eps;
  return spec;
}

json alignment_report_json(const align::AlignmentReport& r) {
  return json{{"A", r.A},
              {"ci_low", r.ci_low},
              {"ci_high", r.ci_high},
              {"n_matched", r.n_matched},
              {"n_shuffled", r.n_shuffled},
              {"bootstrap_replicates", r.bootstrap_replicates}};
}

void run_align(const GlobalState& g, AlignArgs& a) {
  const json section = g.section({"align"});
  merge_opt(a.replicates_opt, section, "replicates", a.replicates);
  merge_opt(a.level_opt, section, "level", a.level);
  merge_opt(a.constraint_opt, section, "constraint", a.constraint);
  const auto seed = resolve_seed(a.seed_opt, a.seed_str, section);
  const auto constraint = perm::parse_constraint(a.constraint);
  const auto cfg = score_config_from(a.score, section);
  const auto spec = histogram_from(a, section);
  const int threads = g.resolve_threads();

  const auto corpus = store::join_corpus(store::load_manifest(a.score.manifest));
  const auto dir = ensure_out_dir(a.score.out);

  const auto keys = corpus_keys(corpus);
  const auto matched_plan = perm::identity_plan(keys);
  const auto shuffled_plan = perm::make_plan(keys, 1.0, derive_seed(seed, 0), constraint);
  const auto scores = align::paired_scores(corpus, matched_plan, shuffled_plan, cfg);
  auto result = align::bootstrap_ci(scores, a.replicates, a.level, spec, derive_seed(seed, 1), threads);
  result.seed = seed;
  result.shuffle_constraint = constraint;

  json params = scoring_params(cfg);
  params["manifest"] = fs::path(a.score.manifest).filename().string();
  params["histogram"] = histogram_params(spec);
  params["replicates"] = a.replicates;
  params["level"] = a.level;
  params["constraint"] = perm::constraint_name(constraint);
  json artifact = g.make_artifact("alignment_report", params, seed);
  artifact["dataset"] = corpus.dataset_name;
  artifact.update(alignment_report_json(result));
  artifact["level"] = a.level;
  artifact["constraint"] = perm::constraint_name(constraint);
  report::write_json_artifact(artifact, dir / "alignment_report.json");
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
  AlignArgs align_args;
  std::string fractions = "0,0.25,0.5,0.75,1.0";
  CLI::Option* fractions_opt = nullptr;
};

void run_calibrate(const GlobalState& g, CalibrateArgs& a) {
  const json section = g.section({"calibrate"});
  auto& al = a.align_args;
  merge_opt(al.replicates_opt, section, "replicates", al.replicates);
  merge_opt(al.level_opt, section, "level", al.level);
  merge_opt(al.constraint_opt, section, "constraint", al.constraint);
  merge_opt(a.fractions_opt, section, "fractions", a.fractions);
  const auto seed = resolve_seed(al.seed_opt, al.seed_str, section);
  const auto constraint = perm::parse_constraint(al.constraint);
  const auto cfg = score_config_from(al.score, section);
  const auto spec = histogram_from(al, section);
  const auto fractions = parse_fraction_list(a.fractions);
  const int threads = g.resolve_threads();

  const auto corpus = store::join_corpus(store::load_manifest(al.score.manifest));
  const auto dir = ensure_out_dir(al.score.out);

  const auto points = align::calibration_sweep(corpus, fractions, spec, cfg, constraint,
                                               al.replicates, al.level, seed, threads);

  std::string csv = "fraction,A,ci_low,ci_high\n";
  json points_json = json::array();
  for (const auto& point : points) {
    csv += io::format_double(point.fraction, 9);
    csv += ',';
    csv += io::format_double(point.report.A, 9);
    csv += ',';
    csv += io::format_double(point.report.ci_low, 9);
    csv += ',';
    csv += io::format_double(point.report.ci_high, 9);
    csv += '\n';
    json pj = alignment_report_json(point.report);
    pj["fraction"] = point.fraction;
    points_json.push_back(std::move(pj));
  }
  io::write_file(dir / "calibration.csv", csv);

  json params = scoring_params(cfg);
  params["manifest"] = fs::path(al.score.manifest).filename().string();
  params["histogram"] = histogram_params(spec);
  params["replicates"] = al.replicates;
  params["level"] = al.level;
  params["constraint"] = perm::constraint_name(constraint);
  params["fractions"] = fractions;
  json artifact = g.make_artifact("calibration", params, seed);
  artifact["dataset"] = corpus.dataset_name;
  artifact["points"] = std::move(points_json);
  report::write_json_artifact(artifact, dir / "calibration.json");
}

// ---------------------------------------------------------------- enrich

struct EnrichArgs {
  std::string captions, images, precision_scores, out, seed_str;
  std::uint64_t k = 30;
  double threshold = 0.9;
  int cap = 5;
  bool allow_shared_images = false;
  std::uint64_t fill = 0;
  CLI::Option *k_opt = nullptr, *threshold_opt = nullptr, *cap_opt = nullptr, *shared_opt = nullptr,
              *fill_opt = nullptr, *seed_opt = nullptr;
};

void run_enrich(const GlobalState& g, EnrichArgs& a) {
  const json section = g.section({"enrich"});
  merge_opt(a.k_opt, section, "k", a.k);
  merge_opt(a.threshold_opt, section, "threshold", a.threshold);
  merge_opt(a.cap_opt, section, "cap", a.cap);
  merge_opt(a.shared_opt, section, "allow_shared_images", a.allow_shared_images);
  merge_opt(a.fill_opt, section, "fill", a.fill);

  const auto captions = store::load_matrix(a.captions);
  const auto images = store::load_matrix(a.images);
  const auto dir = ensure_out_dir(a.out);

  auto candidates = enrich::topk_recall(captions, images, a.k);

  // external verifier scores keyed by (caption,image)
  const auto csv = io::read_csv(a.precision_scores, /*has_header=*/false);
  std::map<std::pair<std::string, std::string>, double> precision;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& row = csv.rows[i];
    if (i == 0 && !row.empty() && row[0] == "caption_id") continue;  // optional header
    if (row.size() != 3)
      fail(errc::malformed_record, a.precision_scores + ": row " + std::to_string(i + 1) +
                                       " must be caption_id,image_id,precision_score");
    try {
      precision[{row[0], row[1]}] = std::stod(row[2]);
    } catch (const std::exception&) {
      fail(errc::malformed_record, a.precision_scores + ": bad score '" + row[2] + "'");
    }
  }
  for (auto& c : candidates) {
    auto it = precision.find({c.caption_id, c.image_id});
    if (it == precision.end())
      fail(errc::missing_field,
           "no precision score for candidate (" + c.caption_id + ", " + c.image_id + ")");
    c.precision_score = it->second;
  }

  std::string cand_csv = "caption_id,image_id,recall_score,precision_score\n";
  for (const auto& c : candidates) {
    cand_csv += io::csv_field(c.caption_id);
    cand_csv += ',';
    cand_csv += io::csv_field(c.image_id);
    cand_csv += ',';
    cand_csv += io::format_double(c.recall_score, 9);
    cand_csv += ',';
    cand_csv += io::format_double(c.precision_score, 9);
    cand_csv += '\n';
  }
  io::write_file(dir / "candidates.csv", cand_csv);

  enrich::AssignConfig cfg;
  cfg.threshold = a.threshold;
  cfg.per_caption_cap = a.cap;
  cfg.unique_images = !a.allow_shared_images;
  const auto assignment = enrich::greedy_assign(candidates, cfg);
  enrich::write_assignment_jsonl(assignment, dir / "assignment.jsonl");
  enrich::write_rejections_csv(assignment.rejections, dir / "rejections.csv");

  std::size_t accepted = 0;
  std::set<std::string> assigned_images;
  for (const auto& [caption, ids] : assignment.by_caption) {
    accepted += ids.size();
    assigned_images.insert(ids.begin(), ids.end());
  }

  std::optional<std::uint64_t> seed;
  json fill_ids = json::array();
  if (a.fill > 0) {
    seed = resolve_seed(a.seed_opt, a.seed_str, section);
    std::vector<std::string> pool;
    for (const auto& id : images.item_ids)
      if (!assigned_images.count(id)) pool.push_back(id);
    for (auto& id : enrich::sample_fill(pool, a.fill, *seed)) fill_ids.push_back(std::move(id));
  }

  json params{{"k", a.k},
              {"threshold", a.threshold},
              {"cap", a.cap},
              {"unique_images", cfg.unique_images},
              {"fill", a.fill}};
  json artifact = g.make_artifact("enrich_report", params, seed);
  artifact["n_captions"] = captions.rows();
  artifact["n_images"] = images.rows();
  artifact["n_candidates"] = candidates.size();
  artifact["n_accepted"] = accepted;
  std::map<std::string, std::size_t> reason_counts;
  for (const auto& r : assignment.rejections) ++reason_counts[enrich::reject_reason_name(r.reason)];
  artifact["rejections"] = reason_counts;
  if (a.fill > 0) artifact["fill_ids"] = std::move(fill_ids);
  report::write_json_artifact(artifact, dir / "enrich_report.json");
}

// ---------------------------------------------------------------- eval abx

struct AbxArgs {
  std::string matrix, labels, out, seed_str;
  int triplets = 100;
  CLI::Option *triplets_opt = nullptr, *seed_opt = nullptr;
};

std::unordered_map<std::string, std::string> load_labels(const std::string& path) {
  std::unordered_map<std::string, std::string> labels;
  for (const auto& line : io::read_jsonl(path)) {
    if (!line.is_object() || !line.contains("id") || !line.contains("label"))
      fail(errc::malformed_record, path + ": label lines must be {\"id\",\"label\"}");
    labels[line["id"].get<std::string>()] = line["label"].get<std::string>();
  }
  return labels;
}

void run_eval_abx(const GlobalState& g, AbxArgs& a) {
  const json section = g.section({"eval", "abx"});
  merge_opt(a.triplets_opt, section, "triplets", a.triplets);
  const auto seed = resolve_seed(a.seed_opt, a.seed_str, section);
  const auto set = evalkit::make_labeled_set(store::load_matrix(a.matrix), load_labels(a.labels));
  const auto dir = ensure_out_dir(a.out);

  const double accuracy = evalkit::abx_accuracy(set, a.triplets, seed);

  std::set<std::string> classes(set.labels.begin(), set.labels.end());
  json params{{"matrix", fs::path(a.matrix).filename().string()},
              {"triplets_per_class_pair", a.triplets},
              {"distance", "cosine"}};
  json artifact = g.make_artifact("abx_report", params, seed);
  artifact["accuracy"] = accuracy;
  artifact["n_items"] = set.labels.size();
  artifact["n_classes"] = classes.size();
  artifact["tie_rule"] = "half_credit";
  report::write_json_artifact(artifact, dir / "abx_report.json");
}

// ---------------------------------------------------------------- eval knn

struct KnnArgs {
  std::string train_matrix, train_labels, query_matrix, query_labels, out;
  std::uint64_t k = 10;
  double temperature = 0.07;
  CLI::Option *k_opt = nullptr, *temp_opt = nullptr;
};

void run_eval_knn(const GlobalState& g, KnnArgs& a) {
  const json section = g.section({"eval", "knn"});
  merge_opt(a.k_opt, section, "k", a.k);
  merge_opt(a.temp_opt, section, "temperature", a.temperature);

  const auto train = evalkit::make_labeled_set(store::load_matrix(a.train_matrix),
                                               load_labels(a.train_labels));
  const auto queries = store::load_matrix(a.query_matrix);
  const auto dir = ensure_out_dir(a.out);

  std::string csv = "item_id,label\n";
  std::vector<std::string> predictions;
  predictions.reserve(queries.rows());
  for (std::size_t r = 0; r < queries.rows(); ++r) {
    predictions.push_back(evalkit::knn_predict(train, queries.row(r), a.k, a.temperature));
    csv += io::csv_field(queries.item_ids[r]);
    csv += ',';
    csv += io::csv_field(predictions.back());
    csv += '\n';
  }
  io::write_file(dir / "knn_predictions.csv", csv);

  json params{{"k", a.k}, {"temperature", a.temperature}, {"vote", "softmax_cosine"}};
  json artifact = g.make_artifact("knn_report", params, std::nullopt);
  artifact["n_train"] = train.matrix.rows();
  artifact["n_queries"] = queries.rows();
  artifact["tie_rule"] = "lexicographic_label";
  if (!a.query_labels.empty()) {
    const auto truth = load_labels(a.query_labels);
    std::size_t hit = 0;
    for (std::size_t r = 0; r < queries.rows(); ++r) {
      auto it = truth.find(queries.item_ids[r]);
      if (it == truth.end())
        fail(errc::missing_field, "query item '" + queries.item_ids[r] + "' has no label");
      if (it->second == predictions[r]) ++hit;
    }
    artifact["accuracy"] = static_cast<double>(hit) / static_cast<double>(queries.rows());
  }
  report::write_json_artifact(artifact, dir / "knn_report.json");
}

// ---------------------------------------------------------------- eval trials

struct TrialsArgs {
  std::string trials, text_matrix, visual_matrix, out;
};

std::vector<evalkit::TrialRecord> load_trials(const std::string& path) {
  std::vector<evalkit::TrialRecord> trials;
  for (const auto& line : io::read_jsonl(path)) {
    if (!line.is_object() || !line.contains("trial_id") || !line.contains("task") ||
        !line.contains("captions") || !line.contains("images") || !line.contains("correct"))
      fail(errc::malformed_record, path + ": trial lines need trial_id/task/captions/images/correct");
    evalkit::TrialRecord t;
    t.trial_id = line["trial_id"].get<std::string>();
    t.task = evalkit::parse_trial_task(line["task"].get<std::string>());
    for (const auto& c : line["captions"]) t.captions.push_back(c.get<std::string>());
    for (const auto& i : line["images"]) t.images.push_back(i.get<std::string>());
    t.correct = line["correct"].get<int>();
    t.frequency_bin = line.value("frequency_bin", 0);
    t.style = evalkit::parse_trial_style(line.value("style", "realistic"));
    trials.push_back(std::move(t));
  }
  if (trials.empty()) fail(errc::empty_samples, path + ": no trials");
  return trials;
}

void run_eval_trials(const GlobalState& g, TrialsArgs& a) {
  const auto trials = load_trials(a.trials);
  const auto text = store::load_matrix(a.text_matrix);
  const auto visual = store::load_matrix(a.visual_matrix);
  const auto dir = ensure_out_dir(a.out);

  std::vector<double> credits;
  credits.reserve(trials.size());
  std::map<std::string, std::pair<double, std::size_t>> by_task;
  double total = 0.0;
  for (const auto& trial : trials) {
    const auto score = evalkit::score_trial(trial, text, visual);
    credits.push_back(score.credit);
    auto& [sum, count] = by_task[evalkit::trial_task_name(trial.task)];
    sum += score.credit;
    ++count;
    total += score.credit;
  }

  const auto bins = evalkit::accuracy_by_bin(trials, credits);
  json by_bin = json::object();
  std::string bin_csv = "bin,accuracy\n";
  for (const auto& [bin, acc] : bins) {
    const auto key = std::to_string(bin);
    by_bin[key] = acc ? json(*acc) : json(nullptr);
    bin_csv += key;
    bin_csv += ',';
    if (acc) bin_csv += io::format_double(*acc, 9);
    bin_csv += '\n';
  }
  io::write_file(dir / "bin_accuracy.csv", bin_csv);

  json tasks = json::object();
  for (const auto& [task, sc] : by_task) tasks[task] = sc.first / static_cast<double>(sc.second);

  json params{{"trials", fs::path(a.trials).filename().string()}, {"tie_rule", "half_credit"}};
  json artifact = g.make_artifact("trial_report", params, std::nullopt);
  artifact["n_trials"] = trials.size();
  artifact["accuracy"] = total / static_cast<double>(trials.size());
  artifact["by_task"] = std::move(tasks);
  artifact["by_bin"] = std::move(by_bin);
  report::write_json_artifact(artifact, dir / "trial_report.json");
}

// ---------------------------------------------------------------- eval minpairs

struct MinpairArgs {
  std::string pairs, logp, out;
};

void run_eval_minpairs(const GlobalState& g, MinpairArgs& a) {
  struct Slot {
    std::optional<double> s1, s1p, s2, s2p;
  };
  std::map<std::string, Slot> logps;
  const auto csv = io::read_csv(a.logp, /*has_header=*/false);
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& row = csv.rows[i];
    if (i == 0 && !row.empty() && row[0] == "pair_id") continue;
    if (row.size() != 3)
      fail(errc::malformed_record,
           a.logp + ": row " + std::to_string(i + 1) + " must be pair_id,field,logp");
    double value = 0.0;
    try {
      value = std::stod(row[2]);
    } catch (const std::exception&) {
      fail(errc::malformed_record, a.logp + ": bad logp '" + row[2] + "'");
    }
    auto& slot = logps[row[0]];
    std::optional<double>* field = nullptr;
    if (row[1] == "s1") field = &slot.s1;
    else if (row[1] == "s1p") field = &slot.s1p;
    else if (row[1] == "s2") field = &slot.s2;
    else if (row[1] == "s2p") field = &slot.s2p;
    else fail(errc::malformed_record, a.logp + ": unknown field '" + row[1] + "'");
    if (field->has_value())
      fail(errc::malformed_record, a.logp + ": duplicate " + row[1] + " for pair '" + row[0] + "'");
    *field = value;
  }

  std::vector<evalkit::MinimalPairRecord> records;
  for (const auto& line : io::read_jsonl(a.pairs)) {
    if (!line.is_object() || !line.contains("pair_id") || !line.contains("task"))
      fail(errc::malformed_record, a.pairs + ": record lines must be {\"pair_id\",\"task\"}");
    evalkit::MinimalPairRecord rec;
    rec.pair_id = line["pair_id"].get<std::string>();
    rec.task = evalkit::parse_minpair_task(line["task"].get<std::string>());
    auto it = logps.find(rec.pair_id);
    if (it == logps.end() || !it->second.s1 || !it->second.s1p)
      fail(errc::missing_field, "pair '" + rec.pair_id + "' lacks s1/s1p log-probabilities");
    rec.logp_s1 = *it->second.s1;
    rec.logp_s1_alt = *it->second.s1p;
    rec.logp_s2 = it->second.s2;
    rec.logp_s2_alt = it->second.s2p;
    records.push_back(std::move(rec));
  }
  const auto accuracy = evalkit::minimal_pair_accuracy(records);
  const auto dir = ensure_out_dir(a.out);

  json by_task = json::object();
  for (const auto& [task, acc] : accuracy) by_task[evalkit::minpair_task_name(task)] = acc;
  json params{{"pairs", fs::path(a.pairs).filename().string()}, {"tie_rule", "ties_fail"}};
  json artifact = g.make_artifact("minpair_report", params, std::nullopt);
  artifact["n_records"] = records.size();
  artifact["by_task"] = std::move(by_task);
  report::write_json_artifact(artifact, dir / "minpair_report.json");
}

// ---------------------------------------------------------------- eval human-sim / rsa

struct HumanSimArgs {
  std::string model_scores, human, out;
};

void run_eval_human_sim(const GlobalState& g, HumanSimArgs& a) {
  const json model = io::read_json(a.model_scores);
  const json human = io::read_json(a.human);
  if (!model.is_array() || !human.is_array())
    fail(errc::malformed_record, "model scores and human probabilities must be JSON arrays");
  std::vector<double> scores, probs;
  for (const auto& v : model) scores.push_back(v.get<double>());
  for (const auto& v : human) probs.push_back(v.get<double>());

  const auto result = evalkit::human_similarity(scores, probs);
  const auto dir = ensure_out_dir(a.out);

  json params{{"model_scores", fs::path(a.model_scores).filename().string()},
              {"optimized", "temperature_only"},
              {"search", "golden_section_log_t"}};
  json artifact = g.make_artifact("human_similarity", params, std::nullopt);
  artifact["kl"] = result.kl;
  artifact["sim"] = result.sim;
  artifact["temperature"] = result.temperature;
  artifact["degenerate"] = result.degenerate;
  report::write_json_artifact(artifact, dir / "human_similarity.json");
}

struct RsaArgs {
  std::string matrix, human, out;
};

void run_eval_rsa(const GlobalState& g, RsaArgs& a) {
  const auto model = store::load_matrix(a.matrix);
  const json human = io::read_json(a.human);
  if (!human.is_array()) fail(errc::malformed_record, a.human + ": expected an array of arrays");
  std::vector<std::vector<double>> rdm;
  for (const auto& row : human) {
    if (!row.is_array()) fail(errc::malformed_record, a.human + ": expected an array of arrays");
    std::vector<double> r;
    for (const auto& v : row) r.push_back(v.get<double>());
    rdm.push_back(std::move(r));
  }
  const double rho = evalkit::rsa_spearman(model, rdm);
  const auto dir = ensure_out_dir(a.out);

  json params{{"matrix", fs::path(a.matrix).filename().string()},
              {"distance", "cosine"},
              {"tie_handling", "average_rank"}};
  json artifact = g.make_artifact("rsa_report", params, std::nullopt);
  artifact["spearman"] = rho;
  artifact["n_items"] = model.rows();
  report::write_json_artifact(artifact, dir / "rsa_report.json");
}

// ---------------------------------------------------------------- aggregate

struct AggregateArgs {
  std::string scores, suite, baseline, out;
  std::vector<std::string> seed_runs;
};

void run_aggregate(const GlobalState& g, AggregateArgs& a) {
  const auto csv = io::read_csv(a.scores, /*has_header=*/false);
  std::vector<agg::TaskScore> scores;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& row = csv.rows[i];
    if (i == 0 && !row.empty() && row[0] == "task") continue;
    if (row.size() != 3 && row.size() != 4)
      fail(errc::malformed_record,
           a.scores + ": row " + std::to_string(i + 1) + " must be task,kind,raw[,k]");
    agg::TaskScore score;
    score.task_name = row[0];
    score.kind = agg::parse_score_kind(row[1]);
    try {
      score.raw = std::stod(row[2]);
      if (row.size() == 4 && !row[3].empty()) score.k_classes = std::stoi(row[3]);
    } catch (const std::exception&) {
      fail(errc::malformed_record, a.scores + ": bad number in row " + std::to_string(i + 1));
    }
    scores.push_back(std::move(score));
  }

  const json suite = io::read_json(a.suite);
  if (!suite.is_object() || !suite.contains("subgroups") || !suite["subgroups"].is_array())
    fail(errc::config_invalid, a.suite + ": suite needs a 'subgroups' array");
  std::vector<agg::SubgroupSpec> subgroups;
  for (const auto& sg : suite["subgroups"]) {
    if (!sg.contains("name") || !sg.contains("members"))
      fail(errc::config_invalid, a.suite + ": each subgroup needs name and members");
    agg::SubgroupSpec spec;
    spec.name = sg["name"].get<std::string>();
    for (const auto& m : sg["members"]) spec.members.push_back(m.get<std::string>());
    spec.domain = agg::parse_domain(sg.value("domain", "vision_object"));
    subgroups.push_back(std::move(spec));
  }

  const auto result = agg::aggregate_suite(scores, subgroups);
  const auto dir = ensure_out_dir(a.out);

  json artifact_params{{"scores", fs::path(a.scores).filename().string()},
                       {"suite", suite.value("name", std::string("suite"))},
                       {"std_estimator", "sample"}};
  json artifact = g.make_artifact("aggregate", artifact_params, std::nullopt);
  json subgroups_json = json::object();
  std::string csv_head, csv_row;
  for (const auto& [name, value] : result.subgroups) {
    subgroups_json[name] = value;
    csv_head += io::csv_field(name);
    csv_head += ',';
    char rounded[32];
    std::snprintf(rounded, sizeof(rounded), "%.1f", value);
    csv_row += rounded;
    csv_row += ',';
  }
  csv_head += "overall\n";
  char rounded[32];
  std::snprintf(rounded, sizeof(rounded), "%.1f", result.overall);
  csv_row += rounded;
  csv_row += '\n';
  io::write_file(dir / "aggregate.csv", csv_head + csv_row);

  json normalized = json::object();
  for (const auto& [task, value] : result.normalized) normalized[task] = value;
  artifact["subgroups"] = std::move(subgroups_json);
  artifact["overall"] = result.overall;
  artifact["normalized"] = std::move(normalized);

  if (!a.baseline.empty()) {
    const json base = io::read_json(a.baseline);
    if (!base.contains("overall"))
      fail(errc::schema_mismatch, a.baseline + ": baseline artifact lacks 'overall'");
    artifact["baseline_overall"] = base["overall"];
    artifact["delta_vs_baseline"] =
        agg::delta_vs_baseline(result.overall, base["overall"].get<double>());
  }
  if (!a.seed_runs.empty()) {
    // mean/std over this run plus every --seed-run overall
    std::vector<double> overalls{result.overall};
    for (const auto& path : a.seed_runs) {
      const json run = io::read_json(path);
      if (!run.contains("overall"))
        fail(errc::schema_mismatch, path + ": seed-run artifact lacks 'overall'");
      overalls.push_back(run["overall"].get<double>());
    }
    const auto [mean, sd] = agg::mean_std_across_seeds(overalls, /*sample=*/true);
    artifact["across_seeds"] =
        json{{"mean", mean}, {"std", sd}, {"n", overalls.size()}, {"estimator", "sample"}};
  }
  report::write_json_artifact(artifact, dir / "aggregate.json");
}

// ---------------------------------------------------------------- stats

struct StatsArgs {
  std::string utterances, out, drop_speakers = "key_child";
  double video_hours = 0.0;
  double min_confidence = 0.0;
  CLI::Option *drop_opt = nullptr, *minconf_opt = nullptr;
};

void run_stats(const GlobalState& g, StatsArgs& a) {
  const json section = g.section({"stats"});
  merge_opt(a.drop_opt, section, "drop_speakers", a.drop_speakers);
  merge_opt(a.minconf_opt, section, "min_confidence", a.min_confidence);
  if (a.video_hours <= 0.0) fail(errc::config_invalid, "--video-hours must be > 0");

  std::vector<pairkit::UtteranceRecord> records;
  for (const auto& line : io::read_jsonl(a.utterances)) {
    if (!line.is_object() || !line.contains("utt_id") || !line.contains("t_start") ||
        !line.contains("t_end"))
      fail(errc::malformed_record, a.utterances + ": utterance lines need utt_id/t_start/t_end");
    pairkit::UtteranceRecord rec;
    rec.utt_id = line["utt_id"].get<std::string>();
    rec.group_id = line.value("group_id", "");
    rec.t_start = line["t_start"].get<double>();
    rec.t_end = line["t_end"].get<double>();
    if (line.contains("words"))
      for (const auto& w : line["words"]) {
        if (!w.is_array() || w.size() != 2)
          fail(errc::malformed_record, a.utterances + ": words must be [token, confidence] pairs");
        rec.words.emplace_back(w[0].get<std::string>(), w[1].get<double>());
      }
    if (line.contains("speaker") && !line["speaker"].is_null())
      rec.speaker = pairkit::parse_speaker(line["speaker"].get<std::string>());
    records.push_back(std::move(rec));
  }

  std::set<pairkit::Speaker> drop;
  std::size_t start = 0;
  while (start <= a.drop_speakers.size() && !a.drop_speakers.empty()) {
    const auto comma = a.drop_speakers.find(',', start);
    const auto token =
        a.drop_speakers.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!token.empty()) {
      try {
        drop.insert(pairkit::parse_speaker(token));
      } catch (const Error&) {
        fail(errc::config_invalid, "unknown speaker '" + token + "' in --drop-speakers");
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }

  const auto kept = pairkit::filter_utterances(records, a.min_confidence, drop);
  if (kept.empty()) fail(errc::empty_corpus, "no utterances survive the filters");
  const auto stats = pairkit::corpus_stats(kept, a.video_hours);
  const auto dir = ensure_out_dir(a.out);

  json drop_json = json::array();
  for (const auto s : drop) drop_json.push_back(pairkit::speaker_name(s));
  json params{{"utterances", fs::path(a.utterances).filename().string()},
              {"video_hours", a.video_hours},
              {"min_confidence", a.min_confidence},
              {"drop_speakers", drop_json}};
  json artifact = g.make_artifact("corpus_stats", params, std::nullopt);
  artifact["n_utterances"] = records.size();
  artifact["n_kept"] = kept.size();
  artifact["speech_hours"] = stats.speech_hours;
  artifact["coverage_ratio"] = stats.coverage_ratio;
  artifact["avg_utterance_words"] = stats.avg_utterance_words;
  report::write_json_artifact(artifact, dir / "corpus_stats.json");
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out, schema;
};

void run_report(const GlobalState& g, ReportArgs& a) {
  std::vector<fs::path> files(a.inputs.begin(), a.inputs.end());
  std::vector<std::string> warnings;
  json merged = report::merge_artifacts(files, &warnings);
  for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

  if (!a.schema.empty()) {
    std::string error;
    if (!report::validate_schema(merged, io::read_json(a.schema), &error))
      fail(errc::schema_mismatch, "report does not match schema: " + error);
  }

  const auto dir = ensure_out_dir(a.out);
  report::write_json_artifact(merged, dir / "report.json");
  report::write_calibration_curve_csv(merged, dir / "calibration_curve.csv");
  report::write_bin_accuracy_csv(merged, dir / "bin_accuracy.csv");
  (void)g;
}

}  // namespace

int run(int argc, const char* const* argv) {
  GlobalState g;
  CLI::App app{"cross-modal alignment toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  g.config_opt = app.add_option("--config", g.config_path, "JSON config file; flags override it");
  g.threads_opt = app.add_option("--threads", g.threads, "worker threads (default: XMODAL_THREADS or 1)");
  app.set_version_flag("--version", std::string(report::kToolName) + " " + report::kToolVersion);

  // synth
  auto synth_args = std::make_shared<SynthArgs>();
  auto* synth_cmd = app.add_subcommand("synth", "generate a seeded synthetic paired corpus");
  synth_cmd->add_option("--out", synth_args->out, "output directory")->required();
  synth_args->pairs_opt = synth_cmd->add_option("--pairs", synth_args->pairs, "number of pairs");
  synth_args->dim_opt = synth_cmd->add_option("--dim", synth_args->dim, "embedding dimension");
  synth_args->groups_opt = synth_cmd->add_option("--groups", synth_args->groups, "number of groups");
  synth_args->frames_opt = synth_cmd->add_option("--frames", synth_args->frames, "frames per pair");
  synth_args->tn_opt = synth_cmd->add_option("--text-noise", synth_args->text_noise, "text noise scale");
  synth_args->vn_opt =
      synth_cmd->add_option("--visual-noise", synth_args->visual_noise, "visual noise scale");
  synth_args->name_opt = synth_cmd->add_option("--name", synth_args->name, "dataset name");
  synth_args->seed_opt = synth_cmd->add_option("--seed", synth_args->seed_str, "uint64 or 'auto'");
  synth_cmd->callback([&g, synth_args] { g.load_config(); run_synth(g, *synth_args); });

  // ingest
  auto ingest_args = std::make_shared<IngestArgs>();
  auto* ingest_cmd = app.add_subcommand("ingest", "load and validate a paired corpus");
  ingest_cmd->add_option("--manifest", ingest_args->manifest, "manifest.json path")->required();
  ingest_cmd->add_option("--out", ingest_args->out, "output directory");
  ingest_cmd->callback([&g, ingest_args] { g.load_config(); run_ingest(g, *ingest_args); });

  auto add_score_opts = [](CLI::App* cmd, ScoreArgs& args, bool manifest_required) {
    auto* m = cmd->add_option("--manifest", args.manifest, "manifest.json path");
    if (manifest_required) m->required();
    cmd->add_option("--out", args.out, "output directory");
    args.pooling_opt = cmd->add_option("--pooling", args.pooling, "per_frame or mean_pool");
    args.w_opt = cmd->add_option("--w", args.w, "CLIPScore weight");
    args.clip_opt = cmd->add_flag("--clip-negative", args.clip_negative, "clamp negative cosines to 0");
    args.fpc_opt = cmd->add_option("--frames-per-clip", args.frames_per_clip, "mean_pool frame budget");
  };

  // score
  auto score_args = std::make_shared<ScoreArgs>();
  auto* score_cmd = app.add_subcommand("score", "CLIPScore samples for a corpus");
  add_score_opts(score_cmd, *score_args, true);
  score_cmd->add_option("--plan", score_args->plan, "shuffle plan to score under");
  score_cmd->callback([&g, score_args] { g.load_config(); run_score(g, *score_args); });

  // shuffle-plan
  auto plan_args = std::make_shared<PlanArgs>();
  auto* plan_cmd = app.add_subcommand("shuffle-plan", "build a seeded text reassignment plan");
  plan_cmd->add_option("--manifest", plan_args->manifest, "manifest.json path")->required();
  plan_cmd->add_option("--out", plan_args->out, "output directory");
  plan_args->fraction_opt = plan_cmd->add_option("--fraction", plan_args->fraction, "shuffled fraction");
  plan_args->constraint_opt =
      plan_cmd->add_option("--constraint", plan_args->constraint, "none or cross_group");
  plan_args->seed_opt = plan_cmd->add_option("--seed", plan_args->seed_str, "uint64 or 'auto'");
  plan_cmd->callback([&g, plan_args] { g.load_config(); run_shuffle_plan(g, *plan_args); });

  auto add_align_opts = [&add_score_opts](CLI::App* cmd, AlignArgs& args) {
    add_score_opts(cmd, args.score, true);
    args.seed_opt = cmd->add_option("--seed", args.seed_str, "uint64 or 'auto'");
    args.constraint_opt = cmd->add_option("--constraint", args.constraint, "none or cross_group");
    args.replicates_opt = cmd->add_option("--replicates", args.replicates, "bootstrap replicates");
    args.level_opt = cmd->add_option("--level", args.level, "confidence level");
    args.bins_opt = cmd->add_option("--bins", args.bins, "histogram bin count");
    args.lo_opt = cmd->add_option("--lo", args.lo, "histogram lower edge");
    args.hi_opt = cmd->add_option("--hi", args.hi, "histogram upper edge");
    args.eps_opt = cmd->add_option("--eps", args.eps, "histogram smoothing epsilon");
  };

  // align
  auto align_args = std::make_shared<AlignArgs>();
  auto* align_cmd = app.add_subcommand("align", "matched-vs-shuffled alignment score with bootstrap CI");
  add_align_opts(align_cmd, *align_args);
  align_cmd->callback([&g, align_args] { g.load_config(); run_align(g, *align_args); });

  // calibrate
  auto calibrate_args = std::make_shared<CalibrateArgs>();
  auto* calibrate_cmd = app.add_subcommand("calibrate", "alignment across partial-shuffle fractions");
  add_align_opts(calibrate_cmd, calibrate_args->align_args);
  calibrate_args->fractions_opt =
      calibrate_cmd->add_option("--fractions", calibrate_args->fractions, "comma-separated fractions");
  calibrate_cmd->callback([&g, calibrate_args] { g.load_config(); run_calibrate(g, *calibrate_args); });

  // enrich
  auto enrich_args = std::make_shared<EnrichArgs>();
  auto* enrich_cmd = app.add_subcommand("enrich", "two-stage retrieval and greedy assignment");
  enrich_cmd->add_option("--captions", enrich_args->captions, "caption matrix")->required();
  enrich_cmd->add_option("--images", enrich_args->images, "image matrix")->required();
  enrich_cmd->add_option("--precision-scores", enrich_args->precision_scores,
                         "caption_id,image_id,precision_score CSV")
      ->required();
  enrich_cmd->add_option("--out", enrich_args->out, "output directory");
  enrich_args->k_opt = enrich_cmd->add_option("--k", enrich_args->k, "recall candidates per caption");
  enrich_args->threshold_opt =
      enrich_cmd->add_option("--threshold", enrich_args->threshold, "acceptance threshold (strict)");
  enrich_args->cap_opt = enrich_cmd->add_option("--cap", enrich_args->cap, "max images per caption");
  enrich_args->shared_opt = enrich_cmd->add_flag("--allow-shared-images",
                                                 enrich_args->allow_shared_images,
                                                 "let several captions accept one image");
  enrich_args->fill_opt =
      enrich_cmd->add_option("--fill", enrich_args->fill, "extra unassigned images to sample");
  enrich_args->seed_opt = enrich_cmd->add_option("--seed", enrich_args->seed_str, "uint64 or 'auto'");
  enrich_cmd->callback([&g, enrich_args] { g.load_config(); run_enrich(g, *enrich_args); });

  // eval family
  auto* eval_cmd = app.add_subcommand("eval", "evaluation protocols");
  eval_cmd->require_subcommand(1);
  eval_cmd->fallthrough();

  auto abx_args = std::make_shared<AbxArgs>();
  auto* abx_cmd = eval_cmd->add_subcommand("abx", "ABX discriminability");
  abx_cmd->add_option("--matrix", abx_args->matrix, "embedding matrix")->required();
  abx_cmd->add_option("--labels", abx_args->labels, "{\"id\",\"label\"} JSONL")->required();
  abx_cmd->add_option("--out", abx_args->out, "output directory");
  abx_args->triplets_opt = abx_cmd->add_option("--triplets", abx_args->triplets, "triplets per class pair");
  abx_args->seed_opt = abx_cmd->add_option("--seed", abx_args->seed_str, "uint64 or 'auto'");
  abx_cmd->callback([&g, abx_args] { g.load_config(); run_eval_abx(g, *abx_args); });

  auto knn_args = std::make_shared<KnnArgs>();
  auto* knn_cmd = eval_cmd->add_subcommand("knn", "softmax-weighted kNN prediction");
  knn_cmd->add_option("--train-matrix", knn_args->train_matrix, "training matrix")->required();
  knn_cmd->add_option("--train-labels", knn_args->train_labels, "training labels JSONL")->required();
  knn_cmd->add_option("--query-matrix", knn_args->query_matrix, "query matrix")->required();
  knn_cmd->add_option("--query-labels", knn_args->query_labels, "query labels JSONL (for accuracy)");
  knn_cmd->add_option("--out", knn_args->out, "output directory");
  knn_args->k_opt = knn_cmd->add_option("--k", knn_args->k, "neighbours");
  knn_args->temp_opt = knn_cmd->add_option("--temperature", knn_args->temperature, "vote temperature");
  knn_cmd->callback([&g, knn_args] { g.load_config(); run_eval_knn(g, *knn_args); });

  auto trials_args = std::make_shared<TrialsArgs>();
  auto* trials_cmd = eval_cmd->add_subcommand("trials", "two-image contrastive trials");
  trials_cmd->add_option("--trials", trials_args->trials, "trials JSONL")->required();
  trials_cmd->add_option("--text-matrix", trials_args->text_matrix, "caption matrix")->required();
  trials_cmd->add_option("--visual-matrix", trials_args->visual_matrix, "image matrix")->required();
  trials_cmd->add_option("--out", trials_args->out, "output directory");
  trials_cmd->callback([&g, trials_args] { g.load_config(); run_eval_trials(g, *trials_args); });

  auto minpair_args = std::make_shared<MinpairArgs>();
  auto* minpair_cmd = eval_cmd->add_subcommand("minpairs", "minimal-pair log-probability tests");
  minpair_cmd->add_option("--pairs", minpair_args->pairs, "{\"pair_id\",\"task\"} JSONL")->required();
  minpair_cmd->add_option("--logp", minpair_args->logp, "pair_id,field,logp CSV")->required();
  minpair_cmd->add_option("--out", minpair_args->out, "output directory");
  minpair_cmd->callback([&g, minpair_args] { g.load_config(); run_eval_minpairs(g, *minpair_args); });

  auto humansim_args = std::make_shared<HumanSimArgs>();
  auto* humansim_cmd = eval_cmd->add_subcommand("human-sim", "temperature-fit KL against human choices");
  humansim_cmd->add_option("--model-scores", humansim_args->model_scores, "JSON array")->required();
  humansim_cmd->add_option("--human", humansim_args->human, "JSON array of probabilities")->required();
  humansim_cmd->add_option("--out", humansim_args->out, "output directory");
  humansim_cmd->callback([&g, humansim_args] { g.load_config(); run_eval_human_sim(g, *humansim_args); });

  auto rsa_args = std::make_shared<RsaArgs>();
  auto* rsa_cmd = eval_cmd->add_subcommand("rsa", "RSA Spearman against a human RDM");
  rsa_cmd->add_option("--matrix", rsa_args->matrix, "embedding matrix")->required();
  rsa_cmd->add_option("--human", rsa_args->human, "square dissimilarity matrix JSON")->required();
  rsa_cmd->add_option("--out", rsa_args->out, "output directory");
  rsa_cmd->callback([&g, rsa_args] { g.load_config(); run_eval_rsa(g, *rsa_args); });

  // aggregate
  auto aggregate_args = std::make_shared<AggregateArgs>();
  auto* aggregate_cmd = app.add_subcommand("aggregate", "chance-corrected suite aggregation");
  aggregate_cmd->add_option("--scores", aggregate_args->scores, "task,kind,raw[,k] CSV")->required();
  aggregate_cmd->add_option("--suite", aggregate_args->suite, "suite JSON")->required();
  aggregate_cmd->add_option("--baseline", aggregate_args->baseline, "baseline aggregate.json");
  aggregate_cmd->add_option("--seed-run", aggregate_args->seed_runs,
                            "aggregate.json from another seed (repeatable)");
  aggregate_cmd->add_option("--out", aggregate_args->out, "output directory");
  aggregate_cmd->callback([&g, aggregate_args] { g.load_config(); run_aggregate(g, *aggregate_args); });

  // stats
  auto stats_args = std::make_shared<StatsArgs>();
  auto* stats_cmd = app.add_subcommand("stats", "utterance filtering and corpus statistics");
  stats_cmd->add_option("--utterances", stats_args->utterances, "utterances JSONL")->required();
  stats_cmd->add_option("--video-hours", stats_args->video_hours, "total video hours")->required();
  stats_args->minconf_opt =
      stats_cmd->add_option("--min-confidence", stats_args->min_confidence, "mean-confidence floor");
  stats_args->drop_opt = stats_cmd->add_option("--drop-speakers", stats_args->drop_speakers,
                                               "comma-separated speaker labels to drop");
  stats_cmd->add_option("--out", stats_args->out, "output directory");
  stats_cmd->callback([&g, stats_args] { g.load_config(); run_stats(g, *stats_args); });

  // report
  auto report_args = std::make_shared<ReportArgs>();
  auto* report_cmd = app.add_subcommand("report", "merge artifacts into one report");
  report_cmd->add_option("inputs", report_args->inputs, "artifact JSON files")->required();
  report_cmd->add_option("--out", report_args->out, "output directory");
  report_cmd->add_option("--schema", report_args->schema, "validate the merged report against this schema");
  report_cmd->callback([&g, report_args] { g.load_config(); run_report(g, *report_args); });

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 4;
  }
}

}  // namespace xmodal::cli
