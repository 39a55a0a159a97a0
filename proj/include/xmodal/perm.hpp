#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace xmodal::perm {

enum class Constraint { none, cross_group };

const char* constraint_name(Constraint c);
Constraint parse_constraint(std::string_view name);

struct PairKey {
  std::string pair_id;
  std::string text_id;
  std::string group_id;
};

// A reproducible reassignment of texts to pairs. source[i] is the index of
// the pair whose text pair i receives; ids are treated as distinct items, so
// "reassigned" means source[i] != i.
struct ShufflePlan {
  std::vector<PairKey> pairs;        // original order
  std::vector<std::size_t> source;   // permutation of [0, pairs.size())
  double fraction = 0.0;
  std::uint64_t seed = 0;
  Constraint constraint = Constraint::none;

  const std::string& text_for(std::size_t i) const { return pairs[source[i]].text_id; }
  std::unordered_map<std::string, std::string> mapping() const;
  std::size_t reassigned_count() const;
  ShufflePlan inverse() const;  // applying plan then inverse restores identity
};

// Fixed-point-free permutation of [0,n): Fisher-Yates redraws until no index
// maps to itself (about e tries in expectation). n < 2 has no derangement.
std::vector<std::size_t> derangement(std::size_t n, std::uint64_t seed);

ShufflePlan identity_plan(std::vector<PairKey> pairs);

// Reassigns exactly round(fraction*N) pairs (round half away from zero):
// a seeded uniform subset of that size is chosen and deranged among itself.
// fraction 0 is the identity; a positive fraction needs a subset of >= 2.
ShufflePlan partial_shuffle(std::vector<PairKey> pairs, double fraction, std::uint64_t seed);

// Every pair receives a text from a different group_id (which implies a full
// derangement). Seeded rejection-resampling with bounded retries; throws
// infeasible_constraint when no assignment is found (e.g. one group holds
// more than half of all pairs).
ShufflePlan cross_group_permutation(std::vector<PairKey> pairs, std::uint64_t seed);

// fraction 1.0 with Constraint::cross_group dispatches to
// cross_group_permutation; everything else to partial_shuffle.
ShufflePlan make_plan(std::vector<PairKey> pairs, double fraction, std::uint64_t seed, Constraint constraint);

// Serialization: first line is a JSON header {fraction, seed, constraint},
// each following line one {"pair_id","text_id"} entry in pair order.
void write_plan(const ShufflePlan& plan, const std::filesystem::path& path);

struct PlanFile {
  double fraction = 0.0;
  std::uint64_t seed = 0;
  Constraint constraint = Constraint::none;
  std::vector<std::pair<std::string, std::string>> entries;

  std::unordered_map<std::string, std::string> mapping() const;
};

PlanFile load_plan(const std::filesystem::path& path);

}  // namespace xmodal::perm
