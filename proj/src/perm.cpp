#include "xmodal/perm.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "xmodal/error.hpp"
#include "xmodal/io.hpp"
#include "xmodal/rng.hpp"

namespace xmodal::perm {

using nlohmann::json;

const char* constraint_name(Constraint c) {
  return c == Constraint::none ? "none" : "cross_group";
}

Constraint parse_constraint(std::string_view name) {
  if (name == "none") return Constraint::none;
  if (name == "cross_group") return Constraint::cross_group;
  fail(errc::config_invalid, "unknown shuffle constraint '" + std::string(name) + "'");
}

std::unordered_map<std::string, std::string> ShufflePlan::mapping() const {
  std::unordered_map<std::string, std::string> map;
  map.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) map.emplace(pairs[i].pair_id, text_for(i));
  return map;
}

std::size_t ShufflePlan::reassigned_count() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < source.size(); ++i)
    if (source[i] != i) ++count;
  return count;
}

ShufflePlan ShufflePlan::inverse() const {
  ShufflePlan inv;
  inv.pairs = pairs;
  inv.source.resize(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) inv.source[source[i]] = i;
  inv.fraction = fraction;
  inv.seed = seed;
  inv.constraint = constraint;
  return inv;
}

namespace {

// Fisher-Yates permutation of [0,n) in place
void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t j = 0; j + 1 < idx.size(); ++j) {
    const std::size_t k = j + static_cast<std::size_t>(rng.below(idx.size() - j));
    std::swap(idx[j], idx[k]);
  }
}

std::vector<std::size_t> derangement_with(std::size_t n, Rng& rng) {
  std::vector<std::size_t> perm(n);
  for (;;) {
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    shuffle_indices(perm, rng);
    bool fixed_point = false;
    for (std::size_t i = 0; i < n; ++i)
      if (perm[i] == i) {
        fixed_point = true;
        break;
      }
    if (!fixed_point) return perm;  // ~e redraws in expectation
  }
}

}  // namespace

std::vector<std::size_t> derangement(std::size_t n, std::uint64_t seed) {
  if (n < 2) fail(errc::no_derangement, "no derangement exists for n = " + std::to_string(n));
  Rng rng(seed);
  return derangement_with(n, rng);
}

ShufflePlan identity_plan(std::vector<PairKey> pairs) {
  ShufflePlan plan;
  plan.source.resize(pairs.size());
  for (std::size_t i = 0; i < plan.source.size(); ++i) plan.source[i] = i;
  plan.pairs = std::move(pairs);
  plan.fraction = 0.0;
  plan.constraint = Constraint::none;
  return plan;
}

ShufflePlan partial_shuffle(std::vector<PairKey> pairs, double fraction, std::uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0)
    fail(errc::config_invalid, "shuffle fraction must lie in [0,1]");
  const std::size_t n = pairs.size();
  // round half away from zero
  const std::size_t m = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));

  ShufflePlan plan = identity_plan(std::move(pairs));
  plan.fraction = fraction;
  plan.seed = seed;
  if (m == 0) return plan;
  if (m < 2)
    fail(errc::subset_too_small,
         "cannot derange a subset of " + std::to_string(m) + " pair(s); need at least 2");

  Rng rng(seed);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t j = 0; j < m; ++j) {  // partial Fisher-Yates subset draw
    const std::size_t k = j + static_cast<std::size_t>(rng.below(n - j));
    std::swap(idx[j], idx[k]);
  }
  std::vector<std::size_t> subset(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m));
  std::sort(subset.begin(), subset.end());

  const auto sub_perm = derangement_with(m, rng);
  for (std::size_t t = 0; t < m; ++t) plan.source[subset[t]] = subset[sub_perm[t]];
  return plan;
}

ShufflePlan cross_group_permutation(std::vector<PairKey> pairs, std::uint64_t seed) {
  const std::size_t n = pairs.size();
  std::set<std::string> groups;
  for (const auto& p : pairs) groups.insert(p.group_id);
  if (groups.size() < 2)
    fail(errc::infeasible_constraint, "cross_group shuffle needs at least 2 distinct groups, have " +
                                          std::to_string(groups.size()));

  ShufflePlan plan;
  plan.fraction = 1.0;
  plan.seed = seed;
  plan.constraint = Constraint::cross_group;
  plan.source.assign(n, 0);

  Rng rng(seed);
  constexpr int kMaxPasses = 1000;
  std::vector<std::size_t> pool;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    pool.resize(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    bool dead_end = false;
    for (std::size_t i = 0; i < n; ++i) {
      // draw uniformly among pool entries from another group
      std::size_t valid = 0;
      for (std::size_t p : pool)
        if (pairs[p].group_id != pairs[i].group_id) ++valid;
      if (valid == 0) {
        dead_end = true;
        break;
      }
      std::size_t want = static_cast<std::size_t>(rng.below(valid));
      std::size_t chosen_slot = pool.size();
      for (std::size_t s = 0; s < pool.size(); ++s) {
        if (pairs[pool[s]].group_id == pairs[i].group_id) continue;
        if (want == 0) {
          chosen_slot = s;
          break;
        }
        --want;
      }
      plan.source[i] = pool[chosen_slot];
      pool[chosen_slot] = pool.back();
      pool.pop_back();
    }
    if (!dead_end) {
      plan.pairs = std::move(pairs);
      return plan;
    }
  }
  fail(errc::infeasible_constraint,
       "no cross-group assignment found after " + std::to_string(kMaxPasses) + " restarts");
}

ShufflePlan make_plan(std::vector<PairKey> pairs, double fraction, std::uint64_t seed,
                      Constraint constraint) {
  if (constraint == Constraint::cross_group) {
    if (fraction != 1.0)
      fail(errc::config_invalid, "cross_group shuffles are defined for fraction 1.0 only");
    return cross_group_permutation(std::move(pairs), seed);
  }
  return partial_shuffle(std::move(pairs), fraction, seed);
}

void write_plan(const ShufflePlan& plan, const std::filesystem::path& path) {
  std::vector<json> lines;
  lines.reserve(plan.pairs.size() + 1);
  lines.push_back(json{{"fraction", plan.fraction},
                       {"seed", plan.seed},
                       {"constraint", constraint_name(plan.constraint)}});
  for (std::size_t i = 0; i < plan.pairs.size(); ++i)
    lines.push_back(json{{"pair_id", plan.pairs[i].pair_id}, {"text_id", plan.text_for(i)}});
  io::write_jsonl(path, lines);
}

PlanFile load_plan(const std::filesystem::path& path) {
  const auto lines = io::read_jsonl(path);
  if (lines.empty() || !lines[0].is_object() || !lines[0].contains("fraction") ||
      !lines[0].contains("seed") || !lines[0].contains("constraint"))
    fail(errc::malformed_record, path.string() + ": first line must be the plan header");
  PlanFile file;
  file.fraction = lines[0]["fraction"].get<double>();
  file.seed = lines[0]["seed"].get<std::uint64_t>();
  file.constraint = parse_constraint(lines[0]["constraint"].get<std::string>());
  std::set<std::string> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& j = lines[i];
    if (!j.is_object() || !j.contains("pair_id") || !j.contains("text_id"))
      fail(errc::malformed_record, path.string() + ": line " + std::to_string(i + 1) +
                                       " must be {\"pair_id\",\"text_id\"}");
    auto pair_id = j["pair_id"].get<std::string>();
    if (!seen.insert(pair_id).second)
      fail(errc::duplicate_id, path.string() + ": duplicate pair_id '" + pair_id + "'");
    file.entries.emplace_back(std::move(pair_id), j["text_id"].get<std::string>());
  }
  return file;
}

std::unordered_map<std::string, std::string> PlanFile::mapping() const {
  std::unordered_map<std::string, std::string> map;
  map.reserve(entries.size());
  for (const auto& [pair_id, text_id] : entries) map.emplace(pair_id, text_id);
  return map;
}

}  // namespace xmodal::perm
