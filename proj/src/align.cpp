#include "xmodal/align.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "xmodal/error.hpp"
#include "xmodal/rng.hpp"

namespace xmodal::align {

namespace {

void check_spec(const HistogramSpec& spec) {
  if (spec.bin_count < 1) fail(errc::config_invalid, "bin_count must be >= 1");
  if (!(spec.lo < spec.hi)) fail(errc::config_invalid, "histogram range must satisfy lo < hi");
  if (spec.smoothing_eps < 0.0) fail(errc::config_invalid, "smoothing_eps must be >= 0");
}

std::size_t bin_of(double x, const HistogramSpec& spec) {
  if (x < spec.lo || x > spec.hi)
    fail(errc::sample_out_of_range,
         "sample " + std::to_string(x) + " outside [" + std::to_string(spec.lo) + ", " +
             std::to_string(spec.hi) + "]");
  const double width = (spec.hi - spec.lo) / spec.bin_count;
  auto idx = static_cast<long long>(std::floor((x - spec.lo) / width));
  if (idx < 0) idx = 0;  // boundary values go to the edge bins
  if (idx >= spec.bin_count) idx = spec.bin_count - 1;
  return static_cast<std::size_t>(idx);
}

std::vector<double> normalize_counts(std::vector<double> counts, double eps) {
  double total = 0.0;
  for (double& c : counts) {
    c += eps;
    total += c;
  }
  for (double& c : counts) c /= total;
  return counts;
}

// jsd on histogram counts (saves materializing intermediate prob vectors in
// the bootstrap loop): smooth+normalize each side, then base-2 JSD
double jsd_from_counts(const std::vector<double>& p_counts, const std::vector<double>& q_counts,
                       double eps) {
  const auto p = normalize_counts(p_counts, eps);
  const auto q = normalize_counts(q_counts, eps);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    const double pt = p[i] > 0.0 ? p[i] * std::log2(p[i] / m) : 0.0;
    const double qt = q[i] > 0.0 ? q[i] * std::log2(q[i] / m) : 0.0;
    acc += 0.5 * (pt + qt);
  }
  return std::clamp(acc, 0.0, 1.0);
}

}  // namespace

std::vector<double> histogram(std::span<const double> samples, const HistogramSpec& spec) {
  check_spec(spec);
  if (samples.empty()) fail(errc::empty_samples, "histogram of an empty sample set");
  std::vector<double> counts(static_cast<std::size_t>(spec.bin_count), 0.0);
  for (double x : samples) counts[bin_of(x, spec)] += 1.0;
  return normalize_counts(std::move(counts), spec.smoothing_eps);
}

double jsd(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    fail(errc::length_mismatch, "jsd of vectors with lengths " + std::to_string(p.size()) + " and " +
                                    std::to_string(q.size()));
  if (p.empty()) fail(errc::empty_samples, "jsd of empty distributions");
  double p_sum = 0.0, q_sum = 0.0;
  for (double v : p) {
    if (v < 0.0) fail(errc::not_normalized, "probability vector has a negative entry");
    p_sum += v;
  }
  for (double v : q) {
    if (v < 0.0) fail(errc::not_normalized, "probability vector has a negative entry");
    q_sum += v;
  }
  if (std::fabs(p_sum - 1.0) > 1e-9 || std::fabs(q_sum - 1.0) > 1e-9)
    fail(errc::not_normalized, "probability vectors must sum to 1 within 1e-9");

  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    const double pt = p[i] > 0.0 ? p[i] * std::log2(p[i] / m) : 0.0;
    const double qt = q[i] > 0.0 ? q[i] * std::log2(q[i] / m) : 0.0;
    acc += 0.5 * (pt + qt);  // per-bin pairing keeps jsd(p,q) == jsd(q,p) bit-exact
  }
  return std::clamp(acc, 0.0, 1.0);
}

double alignment_score(std::span<const double> matched, std::span<const double> shuffled,
                       const HistogramSpec& spec) {
  const auto p = histogram(matched, spec);
  const auto q = histogram(shuffled, spec);
  return jsd(p, q);
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) fail(errc::empty_samples, "quantile of an empty vector");
  if (sorted.size() == 1) return sorted[0];
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

PairedScores paired_scores(const store::Corpus& corpus, const perm::ShufflePlan& matched_plan,
                           const perm::ShufflePlan& shuffled_plan, const sim::ScoreConfig& cfg) {
  PairedScores out;
  out.matched = sim::per_pair_scores(corpus, matched_plan.mapping(), cfg);
  out.shuffled = sim::per_pair_scores(corpus, shuffled_plan.mapping(), cfg);
  return out;
}

namespace {

// flat sample storage with per-pair extents, so replicates can gather fast
struct FlatScores {
  std::vector<double> values;
  std::vector<std::size_t> offsets;  // pair i spans [offsets[i], offsets[i+1])

  explicit FlatScores(const std::vector<std::vector<double>>& per_pair) {
    offsets.reserve(per_pair.size() + 1);
    offsets.push_back(0);
    for (const auto& scores : per_pair) {
      values.insert(values.end(), scores.begin(), scores.end());
      offsets.push_back(values.size());
    }
  }
};

void accumulate_counts(const FlatScores& flat, std::size_t pair, const HistogramSpec& spec,
                       std::vector<double>& counts) {
  for (std::size_t s = flat.offsets[pair]; s < flat.offsets[pair + 1]; ++s)
    counts[bin_of(flat.values[s], spec)] += 1.0;
}

}  // namespace

AlignmentReport bootstrap_ci(const PairedScores& scores, int replicates, double level,
                             const HistogramSpec& spec, std::uint64_t seed, int threads) {
  check_spec(spec);
  if (scores.matched.size() != scores.shuffled.size())
    fail(errc::length_mismatch, "matched and shuffled pair counts differ");
  if (replicates < 1) fail(errc::config_invalid, "bootstrap needs at least 1 replicate");
  if (!(level > 0.0 && level < 1.0)) fail(errc::config_invalid, "confidence level must be in (0,1)");
  if (threads < 1) threads = 1;

  const std::size_t n_pairs = scores.pair_count();
  if (n_pairs == 0) fail(errc::empty_samples, "bootstrap over an empty corpus");

  const FlatScores matched(scores.matched);
  const FlatScores shuffled(scores.shuffled);
  if (matched.values.empty() || shuffled.values.empty())
    fail(errc::empty_samples, "bootstrap needs samples on both sides");

  AlignmentReport report;
  report.A = alignment_score(matched.values, shuffled.values, spec);
  report.n_matched = matched.values.size();
  report.n_shuffled = shuffled.values.size();
  report.bootstrap_replicates = replicates;
  report.histogram = spec;
  report.seed = seed;

  // one statistic per replicate, each from its own derived seed; the filling
  // order is irrelevant, which is what makes --threads deterministic
  std::vector<double> stats(static_cast<std::size_t>(replicates));
  auto run_range = [&](int begin, int end) {
    std::vector<double> p_counts(static_cast<std::size_t>(spec.bin_count));
    std::vector<double> q_counts(static_cast<std::size_t>(spec.bin_count));
    for (int r = begin; r < end; ++r) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
      std::fill(p_counts.begin(), p_counts.end(), 0.0);
      std::fill(q_counts.begin(), q_counts.end(), 0.0);
      for (std::size_t d = 0; d < n_pairs; ++d) {
        const auto pick = static_cast<std::size_t>(rng.below(n_pairs));
        accumulate_counts(matched, pick, spec, p_counts);
        accumulate_counts(shuffled, pick, spec, q_counts);
      }
      stats[static_cast<std::size_t>(r)] = jsd_from_counts(p_counts, q_counts, spec.smoothing_eps);
    }
  };

  if (threads == 1) {
    run_range(0, replicates);
  } else {
    std::vector<std::thread> workers;
    const int chunk = (replicates + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(replicates, begin + chunk);
      if (begin >= end) break;
      workers.emplace_back(run_range, begin, end);
    }
    for (auto& w : workers) w.join();
  }

  std::sort(stats.begin(), stats.end());
  const double alpha = 1.0 - level;
  report.ci_low = quantile_sorted(stats, alpha / 2.0);
  report.ci_high = quantile_sorted(stats, 1.0 - alpha / 2.0);
  return report;
}

std::vector<CalibrationPoint> calibration_sweep(const store::Corpus& corpus,
                                                std::span<const double> fractions,
                                                const HistogramSpec& spec, const sim::ScoreConfig& cfg,
                                                perm::Constraint constraint, int replicates, double level,
                                                std::uint64_t seed, int threads) {
  if (fractions.empty()) fail(errc::config_invalid, "calibration needs at least one fraction");
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (fractions[i] < 0.0 || fractions[i] > 1.0)
      fail(errc::config_invalid, "calibration fractions must lie in [0,1]");
    if (i > 0 && fractions[i] < fractions[i - 1])
      fail(errc::config_invalid, "calibration fractions must be ascending");
  }

  std::vector<perm::PairKey> keys;
  keys.reserve(corpus.size());
  for (const auto& p : corpus.pairs) keys.push_back(perm::PairKey{p.pair_id, p.text_id, p.group_id});

  std::vector<CalibrationPoint> points;
  points.reserve(fractions.size());
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    // three independent seed streams per fraction: the partial shuffle, the
    // fresh full shuffle it is scored against, and the bootstrap
    const auto partial_seed = derive_seed(seed, 3 * i);
    const auto full_seed = derive_seed(seed, 3 * i + 1);
    const auto boot_seed = derive_seed(seed, 3 * i + 2);

    const auto matched_plan = perm::partial_shuffle(keys, fractions[i], partial_seed);
    const auto shuffled_plan = perm::make_plan(keys, 1.0, full_seed, constraint);

    const auto scores = paired_scores(corpus, matched_plan, shuffled_plan, cfg);
    auto report = bootstrap_ci(scores, replicates, level, spec, boot_seed, threads);
    report.seed = seed;  // reports carry the sweep-level master seed
    report.shuffle_constraint = constraint;
    points.push_back(CalibrationPoint{fractions[i], std::move(report)});
  }
  return points;
}

}  // namespace xmodal::align
