#include "xmodal/agg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "xmodal/error.hpp"

namespace xmodal::agg {

const char* score_kind_name(ScoreKind k) {
  switch (k) {
    case ScoreKind::accuracy_pct: return "accuracy_pct";
    case ScoreKind::abx_accuracy_pct: return "abx_accuracy_pct";
    case ScoreKind::rmse_m: return "rmse_m";
    case ScoreKind::miou_pct: return "miou_pct";
    case ScoreKind::plain_pct: return "plain_pct";
  }
  return "unknown";
}

ScoreKind parse_score_kind(std::string_view name) {
  for (int k = 0; k <= static_cast<int>(ScoreKind::plain_pct); ++k)
    if (name == score_kind_name(static_cast<ScoreKind>(k))) return static_cast<ScoreKind>(k);
  fail(errc::config_invalid, "unknown score kind '" + std::string(name) + "'");
}

const char* domain_name(Domain d) {
  switch (d) {
    case Domain::vision_object: return "vision_object";
    case Domain::vision_properties: return "vision_properties";
    case Domain::text_syntax: return "text_syntax";
    case Domain::text_semantics: return "text_semantics";
    case Domain::mdb_lexical: return "mdb_lexical";
    case Domain::mdb_grammatical: return "mdb_grammatical";
  }
  return "unknown";
}

Domain parse_domain(std::string_view name) {
  for (int d = 0; d <= static_cast<int>(Domain::mdb_grammatical); ++d)
    if (name == domain_name(static_cast<Domain>(d))) return static_cast<Domain>(d);
  fail(errc::config_invalid, "unknown domain '" + std::string(name) + "'");
}

double normalize(const TaskScore& score) {
  if (score.raw < 0.0)
    fail(errc::negative_raw, "task '" + score.task_name + "' has negative raw score");
  double value = 0.0;
  switch (score.kind) {
    case ScoreKind::accuracy_pct:
    case ScoreKind::plain_pct:
      value = score.raw;
      break;
    case ScoreKind::abx_accuracy_pct:
      // chance for a two-way discrimination sits at 50
      value = 100.0 * (score.raw / 100.0 - 0.5) / 0.5;
      break;
    case ScoreKind::rmse_m:
      // 2m is treated as the worst plausible depth error
      value = 100.0 * (1.0 - score.raw / 2.0);
      break;
    case ScoreKind::miou_pct: {
      if (!score.k_classes)
        fail(errc::missing_k, "task '" + score.task_name + "' (miou_pct) needs k_classes");
      if (*score.k_classes < 1)
        fail(errc::config_invalid, "k_classes must be >= 1");
      // chance mIoU for K classes is 1/(2K-1)
      const double chance = 1.0 / (2.0 * static_cast<double>(*score.k_classes) - 1.0);
      value = 100.0 * (score.raw / 100.0 - chance) / (1.0 - chance);
      break;
    }
  }
  return std::clamp(value, 0.0, 100.0);
}

SuiteResult aggregate_suite(std::span<const TaskScore> scores,
                            std::span<const SubgroupSpec> subgroups) {
  if (subgroups.empty()) fail(errc::config_invalid, "suite needs at least one subgroup");

  std::map<std::string, double> normalized_by_task;
  SuiteResult result;
  result.normalized.reserve(scores.size());
  for (const auto& score : scores) {
    if (normalized_by_task.count(score.task_name))
      fail(errc::duplicate_id, "task '" + score.task_name + "' scored twice");
    const double norm = normalize(score);
    normalized_by_task.emplace(score.task_name, norm);
    result.normalized.emplace_back(score.task_name, norm);
  }

  std::set<std::string> claimed;
  double subgroup_sum = 0.0;
  for (const auto& spec : subgroups) {
    if (spec.members.empty())
      fail(errc::config_invalid, "subgroup '" + spec.name + "' has no members");
    double sum = 0.0;
    for (const auto& member : spec.members) {
      if (!claimed.insert(member).second)
        fail(errc::config_invalid, "task '" + member + "' appears in two subgroups");
      auto it = normalized_by_task.find(member);
      if (it == normalized_by_task.end())
        fail(errc::missing_task, "subgroup '" + spec.name + "' needs task '" + member + "'");
      sum += it->second;
    }
    const double value = sum / static_cast<double>(spec.members.size());
    result.subgroups.emplace_back(spec.name, value);
    subgroup_sum += value;
  }
  result.overall = subgroup_sum / static_cast<double>(subgroups.size());
  return result;
}

double delta_vs_baseline(double model_overall, double baseline_overall) {
  return model_overall - baseline_overall;
}

std::pair<double, double> mean_std_across_seeds(std::span<const double> values, bool sample) {
  if (values.empty()) fail(errc::empty_samples, "mean/std of zero seeds");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double denom = sample ? static_cast<double>(values.size() - 1) : static_cast<double>(values.size());
  return {mean, std::sqrt(ss / denom)};
}

}  // namespace xmodal::agg
