#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "xmodal/perm.hpp"
#include "xmodal/sim.hpp"
#include "xmodal/store.hpp"

namespace xmodal::align {

struct HistogramSpec {
  int bin_count = 100;
  double lo = -1.0;
  double hi = 1.0;
  double smoothing_eps = 1e-10;  // added to every bin count before normalizing
};

// Normalized histogram over [lo,hi]; boundary samples land in the edge bins.
// Samples outside the range are an error, as is an empty sample set.
std::vector<double> histogram(std::span<const double> samples, const HistogramSpec& spec);

// Jensen-Shannon divergence, log base 2, so the value lives in [0,1].
// Inputs must be same-length probability vectors (sum within 1e-9 of 1).
double jsd(std::span<const double> p, std::span<const double> q);

// A = JSD(hist(matched) || hist(shuffled)) on a shared binning.
double alignment_score(std::span<const double> matched, std::span<const double> shuffled,
                       const HistogramSpec& spec);

// Linear-interpolation quantile of an ascending-sorted vector (the h = q*(n-1)
// convention), pinned so CI endpoints are reproducible across toolchains.
double quantile_sorted(const std::vector<double>& sorted, double q);

// Frame-level scores grouped by pair: pairs are the exchangeable unit for the
// bootstrap, so a pair's samples always resample together.
struct PairedScores {
  std::vector<std::vector<double>> matched;
  std::vector<std::vector<double>> shuffled;

  std::size_t pair_count() const { return matched.size(); }
};

PairedScores paired_scores(const store::Corpus& corpus, const perm::ShufflePlan& matched_plan,
                           const perm::ShufflePlan& shuffled_plan, const sim::ScoreConfig& cfg);

struct AlignmentReport {
  double A = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n_matched = 0;   // sample counts after pooling
  std::size_t n_shuffled = 0;
  int bootstrap_replicates = 0;
  HistogramSpec histogram;
  std::uint64_t seed = 0;
  perm::Constraint shuffle_constraint = perm::Constraint::none;
};

// Percentile bootstrap over the pair index set. Replicate r draws its seed as
// derive_seed(seed, r), so results are independent of thread count and order.
AlignmentReport bootstrap_ci(const PairedScores& scores, int replicates, double level,
                             const HistogramSpec& spec, std::uint64_t seed, int threads = 1);

struct CalibrationPoint {
  double fraction = 0.0;
  AlignmentReport report;
};

// For each fraction f (ascending in [0,1]) the matched condition is replaced
// by a partial_shuffle(f) pairing and scored against a fresh, independently
// seeded full shuffle honoring `constraint`.
std::vector<CalibrationPoint> calibration_sweep(const store::Corpus& corpus,
                                                std::span<const double> fractions,
                                                const HistogramSpec& spec, const sim::ScoreConfig& cfg,
                                                perm::Constraint constraint, int replicates, double level,
                                                std::uint64_t seed, int threads = 1);

}  // namespace xmodal::align
