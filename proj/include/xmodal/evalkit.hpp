#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "xmodal/store.hpp"

namespace xmodal::evalkit {

struct LabeledSet {
  store::EmbeddingMatrix matrix;
  std::vector<std::string> labels;  // aligned with matrix rows
};

LabeledSet make_labeled_set(store::EmbeddingMatrix matrix,
                            const std::unordered_map<std::string, std::string>& label_by_id);

// ABX discriminability on cosine distance d = 1 - cos. For every ordered
// class pair (a,b): X and A are distinct items of a, B an item of b; credit
// 1 when d(X,A) < d(X,B), 0.5 on an exact tie. Each class pair contributes
// `triplets_per_class_pair` sampled triplets drawn from its own derived seed
// (derive_seed(seed, pair_index)), or every possible triplet when there are
// no more than that many; the result is the unweighted mean over class pairs.
double abx_accuracy(const LabeledSet& set, int triplets_per_class_pair, std::uint64_t seed);

// Softmax-weighted k-nearest-neighbour vote: each of the k highest-cosine
// neighbours (ties: ascending item id) votes exp(cos/temperature) for its
// label; vote ties go to the lexicographically smaller label.
std::string knn_predict(const LabeledSet& train, std::span<const float> query, std::size_t k,
                        double temperature = 0.07);

enum class TrialTask {
  noun, adjective,                                   // lexical (one caption)
  subj_verb, subj_adj, negation, word_order,
  prepositions, comparatives, counting, relative,    // grammatical (two captions)
};
enum class TrialStyle { realistic, cartoon };

const char* trial_task_name(TrialTask t);
TrialTask parse_trial_task(std::string_view name);
const char* trial_style_name(TrialStyle s);
TrialStyle parse_trial_style(std::string_view name);

struct TrialRecord {
  std::string trial_id;
  TrialTask task = TrialTask::noun;
  std::vector<std::string> captions;       // 1 or 2 caption ids
  std::vector<std::string> images;         // exactly 2 distinct image ids
  int correct = 0;                         // 1-caption: index of the right image;
                                           // 2-caption: 0 = caption i <-> image i, 1 = crossed
  int frequency_bin = 0;
  TrialStyle style = TrialStyle::realistic;
};

struct TrialScore {
  double credit = 0.0;  // 1, 0.5 (exact tie) or 0
  bool correct = false;
  double margin = 0.0;  // cosine gap, correct option minus alternative
};

// One-caption trials pick the argmax-cosine image; two-caption trials credit
// the trial iff the correct bipartite matching beats the swapped one.
TrialScore score_trial(const TrialRecord& trial, const store::EmbeddingMatrix& text,
                       const store::EmbeddingMatrix& visual);

// Mean credit per frequency bin over the inclusive [min,max] bin range seen;
// bins without trials are reported as nullopt.
std::map<int, std::optional<double>> accuracy_by_bin(std::span<const TrialRecord> trials,
                                                     std::span<const double> credits);

enum class MinPairTask { zorro, wordswap, inflswap, agrswap, vpswap };

const char* minpair_task_name(MinPairTask t);
MinPairTask parse_minpair_task(std::string_view name);
bool is_quadruplet(MinPairTask t);

struct MinimalPairRecord {
  std::string pair_id;
  MinPairTask task = MinPairTask::zorro;
  double logp_s1 = 0.0;
  double logp_s1_alt = 0.0;
  std::optional<double> logp_s2;      // quadruplet tasks only
  std::optional<double> logp_s2_alt;
};

// zorro credits P(S1) > P(S1'); the quadruplet tasks credit
// P(S1) > P(S1') AND P(S2) > P(S2'). Ties fail.
double minimal_pair_credit(const MinimalPairRecord& rec);
std::map<MinPairTask, double> minimal_pair_accuracy(std::span<const MinimalPairRecord> records);

struct HumanSimilarity {
  double kl = 0.0;           // nats, KL(human || softmax(model/t*))
  double sim = 0.0;          // 1 / (1 + kl)
  double temperature = 1.0;  // argmin t
  bool degenerate = false;   // all model scores equal: KL reported at uniform
};

// Golden-section search over log t in [-6,6] (tolerance 1e-6) for the
// temperature minimizing KL(human || softmax(model/t)).
HumanSimilarity human_similarity(std::span<const double> model_scores,
                                 std::span<const double> human_probs);

// Spearman rank correlation with average ranks on ties.
double spearman(std::span<const double> a, std::span<const double> b);

// Spearman between the strict upper triangles of the model's cosine-distance
// RDM and a human dissimilarity matrix (symmetric, zero diagonal, same size).
double rsa_spearman(const store::EmbeddingMatrix& model,
                    const std::vector<std::vector<double>>& human_dissimilarity);

}  // namespace xmodal::evalkit
