#include "xmodal/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xmodal/error.hpp"
#include "xmodal/rng.hpp"
#include "xmodal/sim.hpp"

namespace xmodal::evalkit {

LabeledSet make_labeled_set(store::EmbeddingMatrix matrix,
                            const std::unordered_map<std::string, std::string>& label_by_id) {
  LabeledSet set;
  set.labels.reserve(matrix.rows());
  for (const auto& id : matrix.item_ids) {
    auto it = label_by_id.find(id);
    if (it == label_by_id.end()) fail(errc::missing_field, "item '" + id + "' has no label");
    set.labels.push_back(it->second);
  }
  set.matrix = std::move(matrix);
  return set;
}

namespace {

double cosine_distance(const store::EmbeddingMatrix& m, std::size_t a, std::size_t b) {
  return 1.0 - sim::cosine(m.row(a), m.row(b));
}

double triplet_credit(const store::EmbeddingMatrix& m, std::size_t x, std::size_t a, std::size_t b) {
  const double da = cosine_distance(m, x, a);
  const double db = cosine_distance(m, x, b);
  if (da < db) return 1.0;
  if (da == db) return 0.5;
  return 0.0;
}

}  // namespace

double abx_accuracy(const LabeledSet& set, int triplets_per_class_pair, std::uint64_t seed) {
  if (triplets_per_class_pair < 1) fail(errc::config_invalid, "need at least 1 triplet per class pair");
  if (set.labels.size() != set.matrix.rows())
    fail(errc::length_mismatch, "labels and matrix rows disagree");

  // class -> item rows, classes in sorted label order so pair seeds are stable
  std::map<std::string, std::vector<std::size_t>> classes;
  for (std::size_t r = 0; r < set.labels.size(); ++r) classes[set.labels[r]].push_back(r);
  if (classes.size() < 2) fail(errc::class_too_small, "ABX needs at least 2 classes");
  for (const auto& [label, items] : classes)
    if (items.size() < 2)
      fail(errc::class_too_small, "class '" + label + "' has " + std::to_string(items.size()) +
                                      " item(s); ABX needs at least 2 per class");

  std::vector<const std::vector<std::size_t>*> by_class;
  by_class.reserve(classes.size());
  for (const auto& [label, items] : classes) by_class.push_back(&items);

  const auto target = static_cast<std::size_t>(triplets_per_class_pair);
  double pair_mean_sum = 0.0;
  std::size_t pair_count = 0;
  std::uint64_t pair_index = 0;
  for (std::size_t ca = 0; ca < by_class.size(); ++ca) {
    for (std::size_t cb = 0; cb < by_class.size(); ++cb) {
      if (ca == cb) continue;
      const auto& xa = *by_class[ca];
      const auto& xb = *by_class[cb];
      const std::size_t na = xa.size(), nb = xb.size();
      const std::size_t total = na * (na - 1) * nb;
      double credit_sum = 0.0;
      std::size_t credit_count = 0;
      if (total <= target) {
        // few enough triplets: score every (X,A,B) instead of sampling
        for (std::size_t xi = 0; xi < na; ++xi)
          for (std::size_t ai = 0; ai < na; ++ai) {
            if (ai == xi) continue;
            for (std::size_t bi = 0; bi < nb; ++bi) {
              credit_sum += triplet_credit(set.matrix, xa[xi], xa[ai], xb[bi]);
              ++credit_count;
            }
          }
      } else {
        // per-class-pair seed stream keeps any parallel or reordered
        // evaluation of class pairs bit-reproducible
        Rng rng(derive_seed(seed, pair_index));
        for (std::size_t t = 0; t < target; ++t) {
          const std::size_t xi = static_cast<std::size_t>(rng.below(na));
          std::size_t ai = static_cast<std::size_t>(rng.below(na - 1));
          if (ai >= xi) ++ai;
          const std::size_t bi = static_cast<std::size_t>(rng.below(nb));
          credit_sum += triplet_credit(set.matrix, xa[xi], xa[ai], xb[bi]);
          ++credit_count;
        }
      }
      pair_mean_sum += credit_sum / static_cast<double>(credit_count);
      ++pair_count;
      ++pair_index;
    }
  }
  return pair_mean_sum / static_cast<double>(pair_count);
}

std::string knn_predict(const LabeledSet& train, std::span<const float> query, std::size_t k,
                        double temperature) {
  if (train.matrix.rows() == 0) fail(errc::empty_train, "kNN over an empty training set");
  if (k < 1 || k > train.matrix.rows())
    fail(errc::k_too_large, "k = " + std::to_string(k) + " outside [1, " +
                                std::to_string(train.matrix.rows()) + "]");
  if (temperature <= 0.0) fail(errc::config_invalid, "temperature must be > 0");

  std::vector<double> cos(train.matrix.rows());
  for (std::size_t r = 0; r < train.matrix.rows(); ++r)
    cos[r] = sim::cosine(query, train.matrix.row(r));

  std::vector<std::size_t> order(train.matrix.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // neighbour order must not depend on training-row order: break cosine ties
  // on the item id
  auto better = [&](std::size_t a, std::size_t b) {
    if (cos[a] != cos[b]) return cos[a] > cos[b];
    return train.matrix.item_ids[a] < train.matrix.item_ids[b];
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);

  std::map<std::string, double> votes;
  for (std::size_t i = 0; i < k; ++i)
    votes[train.labels[order[i]]] += std::exp(cos[order[i]] / temperature);

  // argmax vote; exact ties go to the lexicographically smaller label, which
  // the sorted map order gives us for free
  const std::string* best = nullptr;
  double best_vote = 0.0;
  for (const auto& [label, vote] : votes) {
    if (!best || vote > best_vote) {
      best = &label;
      best_vote = vote;
    }
  }
  return *best;
}

const char* trial_task_name(TrialTask t) {
  switch (t) {
    case TrialTask::noun: return "noun";
    case TrialTask::adjective: return "adjective";
    case TrialTask::subj_verb: return "subj_verb";
    case TrialTask::subj_adj: return "subj_adj";
    case TrialTask::negation: return "negation";
    case TrialTask::word_order: return "word_order";
    case TrialTask::prepositions: return "prepositions";
    case TrialTask::comparatives: return "comparatives";
    case TrialTask::counting: return "counting";
    case TrialTask::relative: return "relative";
  }
  return "unknown";
}

TrialTask parse_trial_task(std::string_view name) {
  for (int t = 0; t <= static_cast<int>(TrialTask::relative); ++t)
    if (name == trial_task_name(static_cast<TrialTask>(t))) return static_cast<TrialTask>(t);
  fail(errc::malformed_record, "unknown trial task '" + std::string(name) + "'");
}

const char* trial_style_name(TrialStyle s) {
  return s == TrialStyle::realistic ? "realistic" : "cartoon";
}

TrialStyle parse_trial_style(std::string_view name) {
  if (name == "realistic") return TrialStyle::realistic;
  if (name == "cartoon") return TrialStyle::cartoon;
  fail(errc::malformed_record, "unknown trial style '" + std::string(name) + "'");
}

TrialScore score_trial(const TrialRecord& trial, const store::EmbeddingMatrix& text,
                       const store::EmbeddingMatrix& visual) {
  if (trial.images.size() != 2 || trial.images[0] == trial.images[1])
    fail(errc::malformed_record, "trial '" + trial.trial_id + "' needs two distinct images");
  if (trial.correct != 0 && trial.correct != 1)
    fail(errc::malformed_record, "trial '" + trial.trial_id + "': correct must be 0 or 1");
  const auto img0 = visual.row(visual.row_of(trial.images[0]));
  const auto img1 = visual.row(visual.row_of(trial.images[1]));

  double correct_total = 0.0, other_total = 0.0;
  if (trial.captions.size() == 1) {
    const auto cap = text.row(text.row_of(trial.captions[0]));
    const double s0 = sim::cosine(cap, img0);
    const double s1 = sim::cosine(cap, img1);
    correct_total = trial.correct == 0 ? s0 : s1;
    other_total = trial.correct == 0 ? s1 : s0;
  } else if (trial.captions.size() == 2) {
    const auto cap0 = text.row(text.row_of(trial.captions[0]));
    const auto cap1 = text.row(text.row_of(trial.captions[1]));
    // identity matching (caption i <-> image i) vs the crossed one
    const double identity = sim::cosine(cap0, img0) + sim::cosine(cap1, img1);
    const double crossed = sim::cosine(cap0, img1) + sim::cosine(cap1, img0);
    correct_total = trial.correct == 0 ? identity : crossed;
    other_total = trial.correct == 0 ? crossed : identity;
  } else {
    fail(errc::malformed_record, "trial '" + trial.trial_id + "' needs 1 or 2 captions");
  }

  TrialScore score;
  score.margin = correct_total - other_total;
  score.credit = score.margin > 0.0 ? 1.0 : (score.margin == 0.0 ? 0.5 : 0.0);
  score.correct = score.credit == 1.0;
  return score;
}

std::map<int, std::optional<double>> accuracy_by_bin(std::span<const TrialRecord> trials,
                                                     std::span<const double> credits) {
  if (trials.size() != credits.size())
    fail(errc::length_mismatch, "every trial needs exactly one credit");
  if (trials.empty()) fail(errc::empty_samples, "no trials to bin");

  int lo = trials[0].frequency_bin, hi = trials[0].frequency_bin;
  for (const auto& t : trials) {
    lo = std::min(lo, t.frequency_bin);
    hi = std::max(hi, t.frequency_bin);
  }
  std::map<int, std::pair<double, std::size_t>> sums;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    auto& [sum, count] = sums[trials[i].frequency_bin];
    sum += credits[i];
    ++count;
  }
  std::map<int, std::optional<double>> out;
  for (int b = lo; b <= hi; ++b) {
    auto it = sums.find(b);
    if (it == sums.end())
      out[b] = std::nullopt;  // empty bins stay visible in reports
    else
      out[b] = it->second.first / static_cast<double>(it->second.second);
  }
  return out;
}

const char* minpair_task_name(MinPairTask t) {
  switch (t) {
    case MinPairTask::zorro: return "zorro";
    case MinPairTask::wordswap: return "wordswap";
    case MinPairTask::inflswap: return "inflswap";
    case MinPairTask::agrswap: return "agrswap";
    case MinPairTask::vpswap: return "vpswap";
  }
  return "unknown";
}

MinPairTask parse_minpair_task(std::string_view name) {
  for (int t = 0; t <= static_cast<int>(MinPairTask::vpswap); ++t)
    if (name == minpair_task_name(static_cast<MinPairTask>(t))) return static_cast<MinPairTask>(t);
  fail(errc::malformed_record, "unknown minimal-pair task '" + std::string(name) + "'");
}

bool is_quadruplet(MinPairTask t) { return t != MinPairTask::zorro; }

double minimal_pair_credit(const MinimalPairRecord& rec) {
  const bool first = rec.logp_s1 > rec.logp_s1_alt;  // ties fail
  if (!is_quadruplet(rec.task)) return first ? 1.0 : 0.0;
  if (!rec.logp_s2 || !rec.logp_s2_alt)
    fail(errc::missing_field,
         "record '" + rec.pair_id + "' (" + minpair_task_name(rec.task) + ") needs both swapped-side log-probabilities");
  return (first && *rec.logp_s2 > *rec.logp_s2_alt) ? 1.0 : 0.0;
}

std::map<MinPairTask, double> minimal_pair_accuracy(std::span<const MinimalPairRecord> records) {
  if (records.empty()) fail(errc::empty_samples, "no minimal-pair records");
  std::map<MinPairTask, std::pair<double, std::size_t>> sums;
  for (const auto& rec : records) {
    auto& [sum, count] = sums[rec.task];
    sum += minimal_pair_credit(rec);
    ++count;
  }
  std::map<MinPairTask, double> out;
  for (const auto& [task, sc] : sums) out[task] = sc.first / static_cast<double>(sc.second);
  return out;
}

namespace {

// KL(human || softmax(scores / t)) in nats
double kl_at_temperature(std::span<const double> scores, std::span<const double> human, double t) {
  const std::size_t n = scores.size();
  std::vector<double> logits(n);
  double max_logit = -1e300;
  for (std::size_t i = 0; i < n; ++i) {
    logits[i] = scores[i] / t;
    max_logit = std::max(max_logit, logits[i]);
  }
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) z += std::exp(logits[i] - max_logit);
  const double log_z = std::log(z) + max_logit;
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (human[i] > 0.0) kl += human[i] * (std::log(human[i]) - (logits[i] - log_z));
  return std::max(kl, 0.0);
}

}  // namespace

HumanSimilarity human_similarity(std::span<const double> model_scores,
                                 std::span<const double> human_probs) {
  if (model_scores.size() != human_probs.size())
    fail(errc::length_mismatch, "model scores and human probabilities differ in length");
  if (model_scores.size() < 2) fail(errc::empty_samples, "need at least 2 options");
  double human_sum = 0.0;
  for (double h : human_probs) {
    if (h < 0.0) fail(errc::not_normalized, "human probabilities must be >= 0");
    human_sum += h;
  }
  if (std::fabs(human_sum - 1.0) > 1e-9)
    fail(errc::not_normalized, "human probabilities must sum to 1 within 1e-9");
  for (double s : model_scores)
    if (!std::isfinite(s)) fail(errc::non_finite_value, "model scores must be finite");

  HumanSimilarity result;
  const bool all_equal =
      std::all_of(model_scores.begin(), model_scores.end(),
                  [&](double s) { return s == model_scores.front(); });
  if (all_equal) {
    // softmax of a constant vector is uniform at every temperature, so the
    // minimum is flat: report KL against uniform
    result.degenerate = true;
    result.temperature = 1.0;
    const double n = static_cast<double>(model_scores.size());
    double kl = 0.0;
    for (double h : human_probs)
      if (h > 0.0) kl += h * std::log(h * n);
    result.kl = std::max(kl, 0.0);
    result.sim = 1.0 / (1.0 + result.kl);
    return result;
  }

  // golden-section over log t: KL is convex in 1/t, hence unimodal here
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = -6.0, b = 6.0;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = kl_at_temperature(model_scores, human_probs, std::exp(c));
  double fd = kl_at_temperature(model_scores, human_probs, std::exp(d));
  while (b - a > 1e-6) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = kl_at_temperature(model_scores, human_probs, std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = kl_at_temperature(model_scores, human_probs, std::exp(d));
    }
  }
  const double log_t = 0.5 * (a + b);
  result.temperature = std::exp(log_t);
  result.kl = kl_at_temperature(model_scores, human_probs, result.temperature);
  result.sim = 1.0 / (1.0 + result.kl);
  return result;
}

namespace {

// average ranks (1-based) with ties sharing their mean rank
std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mean_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va == 0.0 || vb == 0.0)
    fail(errc::empty_samples, "rank correlation undefined for a constant vector");
  return cov / std::sqrt(va * vb);
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(errc::length_mismatch, "spearman inputs differ in length");
  if (a.size() < 2) fail(errc::too_few_items, "spearman needs at least 2 observations");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

double rsa_spearman(const store::EmbeddingMatrix& model,
                    const std::vector<std::vector<double>>& human_dissimilarity) {
  const std::size_t n = model.rows();
  if (n < 3) fail(errc::too_few_items, "RSA needs at least 3 items");
  if (human_dissimilarity.size() != n)
    fail(errc::length_mismatch, "human matrix has " + std::to_string(human_dissimilarity.size()) +
                                    " rows for " + std::to_string(n) + " items");
  for (std::size_t i = 0; i < n; ++i) {
    if (human_dissimilarity[i].size() != n)
      fail(errc::length_mismatch, "human matrix is not square");
    if (human_dissimilarity[i][i] != 0.0)
      fail(errc::malformed_record, "human dissimilarity diagonal must be zero");
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::fabs(human_dissimilarity[i][j] - human_dissimilarity[j][i]) > 1e-12)
        fail(errc::malformed_record, "human dissimilarity matrix must be symmetric");
  }

  std::vector<double> model_rdm, human_rdm;
  model_rdm.reserve(n * (n - 1) / 2);
  human_rdm.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      model_rdm.push_back(cosine_distance(model, i, j));
      human_rdm.push_back(human_dissimilarity[i][j]);
    }
  return spearman(model_rdm, human_rdm);
}

}  // namespace xmodal::evalkit
