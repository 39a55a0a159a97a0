#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "xmodal/store.hpp"

namespace xmodal::sim {

enum class Pooling { per_frame, mean_pool };
enum class Condition { matched, shuffled };

const char* pooling_name(Pooling p);
Pooling parse_pooling(std::string_view name);

struct ScoreConfig {
  double w = 1.0;              // CLIPScore weight; the unscaled default
  bool clip_negative = false;  // clamp negative cosines to zero before weighting
  Pooling pooling = Pooling::per_frame;
  int frames_per_clip = 8;  // mean_pool subsample budget
};

struct ScoreSample {
  std::string pair_id;
  double score;
  Condition condition;
};

// cosine of two same-length vectors, accumulated in double; clamped to [-1,1]
double cosine(std::span<const float> a, std::span<const float> b);
double cosine(std::span<const double> a, std::span<const double> b);

// w * max(cos,0) when clip_negative, else w * cos
double clipscore(std::span<const float> text, std::span<const float> visual, const ScoreConfig& cfg);

// floor(k*n/target) for k=0..target-1; identity when n <= target
std::vector<std::size_t> uniform_subsample_indices(std::size_t n, std::size_t target);

// Per-pair score lists under a pair_id -> text_id condition map (identity map
// means the matched condition). per_frame yields one score per frame,
// mean_pool one score per pair from the (implicitly renormalized) frame mean.
std::vector<std::vector<double>> per_pair_scores(
    const store::Corpus& corpus, const std::unordered_map<std::string, std::string>& condition_map,
    const ScoreConfig& cfg);

std::vector<ScoreSample> score_corpus(const store::Corpus& corpus,
                                      const std::unordered_map<std::string, std::string>& condition_map,
                                      const ScoreConfig& cfg);
// identity condition map: every pair scored against its own text
std::vector<ScoreSample> score_corpus(const store::Corpus& corpus, const ScoreConfig& cfg);

std::unordered_map<std::string, std::string> identity_condition_map(const store::Corpus& corpus);

// CSV dump `pair_id,condition,score` with 9 significant digits
void write_scores_csv(const std::vector<ScoreSample>& samples, const std::filesystem::path& path);

}  // namespace xmodal::sim
