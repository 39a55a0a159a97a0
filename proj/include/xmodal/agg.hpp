#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace xmodal::agg {

enum class ScoreKind { accuracy_pct, abx_accuracy_pct, rmse_m, miou_pct, plain_pct };
enum class Domain {
  vision_object, vision_properties,
  text_syntax, text_semantics,
  mdb_lexical, mdb_grammatical,
};

const char* score_kind_name(ScoreKind k);
ScoreKind parse_score_kind(std::string_view name);
const char* domain_name(Domain d);
Domain parse_domain(std::string_view name);

struct TaskScore {
  std::string task_name;
  double raw = 0.0;
  ScoreKind kind = ScoreKind::accuracy_pct;
  std::optional<int> k_classes;  // required for miou_pct
};

// Chance-corrected normalization onto [0,100]:
//   accuracy_pct / plain_pct  -> raw
//   abx_accuracy_pct          -> 100 * (raw/100 - 0.5) / 0.5
//   rmse_m                    -> 100 * (1 - raw/2.0)
//   miou_pct (K classes)      -> 100 * (raw/100 - 1/(2K-1)) / (1 - 1/(2K-1))
// Results are clamped to [0,100]; negative raws are rejected.
double normalize(const TaskScore& score);

struct SubgroupSpec {
  std::string name;
  std::vector<std::string> members;  // task names, non-empty, disjoint across specs
  Domain domain = Domain::vision_object;
};

struct SuiteResult {
  std::vector<std::pair<std::string, double>> subgroups;   // input order
  double overall = 0.0;                                    // mean of subgroup values
  std::vector<std::pair<std::string, double>> normalized;  // per task, score order
};

SuiteResult aggregate_suite(std::span<const TaskScore> scores,
                            std::span<const SubgroupSpec> subgroups);

double delta_vs_baseline(double model_overall, double baseline_overall);

// (mean, std); sample (n-1) std by default, 0 for a single value
std::pair<double, double> mean_std_across_seeds(std::span<const double> values, bool sample = true);

}  // namespace xmodal::agg
