#include "xmodal/sim.hpp"

#include <algorithm>
#include <cmath>

#include "xmodal/error.hpp"
#include "xmodal/io.hpp"

namespace xmodal::sim {

const char* pooling_name(Pooling p) {
  return p == Pooling::per_frame ? "per_frame" : "mean_pool";
}

Pooling parse_pooling(std::string_view name) {
  if (name == "per_frame") return Pooling::per_frame;
  if (name == "mean_pool") return Pooling::mean_pool;
  fail(errc::config_invalid, "unknown pooling '" + std::string(name) + "'");
}

namespace {

template <class A, class B>
double cosine_impl(const A& a, const B& b) {
  if (a.size() != b.size())
    fail(errc::dim_mismatch, "cosine of vectors with dims " + std::to_string(a.size()) + " and " +
                                 std::to_string(b.size()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = static_cast<double>(a[i]);
    const double y = static_cast<double>(b[i]);
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) fail(errc::zero_vector, "cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace

double cosine(std::span<const float> a, std::span<const float> b) { return cosine_impl(a, b); }
double cosine(std::span<const double> a, std::span<const double> b) { return cosine_impl(a, b); }

double clipscore(std::span<const float> text, std::span<const float> visual, const ScoreConfig& cfg) {
  const double c = cosine(text, visual);
  return cfg.w * (cfg.clip_negative ? std::max(c, 0.0) : c);
}

std::vector<std::size_t> uniform_subsample_indices(std::size_t n, std::size_t target) {
  std::vector<std::size_t> idx;
  if (n <= target) {
    idx.resize(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
  }
  idx.reserve(target);
  for (std::size_t k = 0; k < target; ++k) idx.push_back(k * n / target);
  return idx;
}

namespace {

// cosine between a float row and the mean of several float rows; everything
// accumulates in double, and cosine's own normalization makes the pooled
// mean an exact unit-direction representative (so n identical frames score
// exactly like a single frame)
double pooled_score(const store::Corpus& corpus, std::span<const float> text,
                    const std::vector<std::size_t>& frame_rows, const ScoreConfig& cfg) {
  const auto idx = uniform_subsample_indices(frame_rows.size(), static_cast<std::size_t>(cfg.frames_per_clip));
  const std::size_t dim = corpus.visual.dim;
  std::vector<double> mean(dim, 0.0);
  for (std::size_t k : idx) {
    const auto row = corpus.visual.row(frame_rows[k]);
    for (std::size_t d = 0; d < dim; ++d) mean[d] += static_cast<double>(row[d]);
  }
  const double count = static_cast<double>(idx.size());
  for (double& v : mean) v /= count;
  std::vector<double> text_d(text.begin(), text.end());
  const double c = cosine(std::span<const double>(text_d), std::span<const double>(mean));
  return cfg.w * (cfg.clip_negative ? std::max(c, 0.0) : c);
}

}  // namespace

std::vector<std::vector<double>> per_pair_scores(
    const store::Corpus& corpus, const std::unordered_map<std::string, std::string>& condition_map,
    const ScoreConfig& cfg) {
  if (cfg.frames_per_clip < 1) fail(errc::config_invalid, "frames_per_clip must be >= 1");
  if (cfg.w < 0.0) fail(errc::config_invalid, "CLIPScore weight w must be >= 0");
  std::vector<std::vector<double>> out;
  out.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& pair = corpus.pairs[i];
    auto mapped = condition_map.find(pair.pair_id);
    if (mapped == condition_map.end())
      fail(errc::missing_mapping, "condition map has no entry for pair '" + pair.pair_id + "'");
    const auto text = corpus.text.row(corpus.text.row_of(mapped->second));
    std::vector<double> scores;
    if (cfg.pooling == Pooling::per_frame) {
      scores.reserve(corpus.visual_row[i].size());
      for (std::size_t frame_row : corpus.visual_row[i])
        scores.push_back(clipscore(text, corpus.visual.row(frame_row), cfg));
    } else {
      scores.push_back(pooled_score(corpus, text, corpus.visual_row[i], cfg));
    }
    out.push_back(std::move(scores));
  }
  return out;
}

std::unordered_map<std::string, std::string> identity_condition_map(const store::Corpus& corpus) {
  std::unordered_map<std::string, std::string> map;
  map.reserve(corpus.size());
  for (const auto& p : corpus.pairs) map.emplace(p.pair_id, p.text_id);
  return map;
}

std::vector<ScoreSample> score_corpus(const store::Corpus& corpus,
                                      const std::unordered_map<std::string, std::string>& condition_map,
                                      const ScoreConfig& cfg) {
  const auto per_pair = per_pair_scores(corpus, condition_map, cfg);
  std::vector<ScoreSample> samples;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& pair = corpus.pairs[i];
    const auto condition =
        condition_map.at(pair.pair_id) == pair.text_id ? Condition::matched : Condition::shuffled;
    for (double s : per_pair[i]) samples.push_back(ScoreSample{pair.pair_id, s, condition});
  }
  return samples;
}

std::vector<ScoreSample> score_corpus(const store::Corpus& corpus, const ScoreConfig& cfg) {
  return score_corpus(corpus, identity_condition_map(corpus), cfg);
}

void write_scores_csv(const std::vector<ScoreSample>& samples, const std::filesystem::path& path) {
  std::string out = "pair_id,condition,score\n";
  for (const auto& s : samples) {
    out += io::csv_field(s.pair_id);
    out += s.condition == Condition::matched ? ",matched," : ",shuffled,";
    out += io::format_double(s.score, 9);
    out += '\n';
  }
  io::write_file(path, out);
}

}  // namespace xmodal::sim
