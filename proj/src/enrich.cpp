#include "xmodal/enrich.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <json.hpp>

#include "xmodal/error.hpp"
#include "xmodal/io.hpp"
#include "xmodal/rng.hpp"
#include "xmodal/sim.hpp"

namespace xmodal::enrich {

const char* reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::below_threshold: return "below_threshold";
    case RejectReason::image_used: return "image_used";
    case RejectReason::cap_reached: return "cap_reached";
  }
  return "unknown";
}

std::vector<AssignmentCandidate> topk_recall(const store::EmbeddingMatrix& captions,
                                             const store::EmbeddingMatrix& images, std::size_t k) {
  if (captions.dim != images.dim)
    fail(errc::dim_mismatch, "caption dim " + std::to_string(captions.dim) + " != image dim " +
                                 std::to_string(images.dim));
  if (k < 1) fail(errc::config_invalid, "top-k needs k >= 1");
  if (k > images.rows())
    fail(errc::k_too_large, "k = " + std::to_string(k) + " exceeds the " +
                                std::to_string(images.rows()) + " available images");

  std::vector<AssignmentCandidate> candidates;
  candidates.reserve(captions.rows() * k);
  std::vector<std::size_t> order(images.rows());
  std::vector<double> scores(images.rows());
  for (std::size_t c = 0; c < captions.rows(); ++c) {
    const auto caption = captions.row(c);
    for (std::size_t i = 0; i < images.rows(); ++i)
      scores[i] = sim::cosine(caption, images.row(i));
    std::iota(order.begin(), order.end(), std::size_t{0});
    // highest cosine first; exact ties resolved by ascending image id
    auto better = [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return images.item_ids[a] < images.item_ids[b];
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);
    for (std::size_t r = 0; r < k; ++r)
      candidates.push_back(AssignmentCandidate{captions.item_ids[c], images.item_ids[order[r]],
                                               scores[order[r]], 0.0});
  }
  return candidates;
}

Assignment greedy_assign(std::vector<AssignmentCandidate> candidates, const AssignConfig& cfg) {
  if (cfg.per_caption_cap < 1) fail(errc::config_invalid, "per-caption cap must be >= 1");

  std::sort(candidates.begin(), candidates.end(),
            [](const AssignmentCandidate& a, const AssignmentCandidate& b) {
              if (a.precision_score != b.precision_score) return a.precision_score > b.precision_score;
              if (a.caption_id != b.caption_id) return a.caption_id < b.caption_id;
              return a.image_id < b.image_id;
            });

  Assignment result;
  for (const auto& c : candidates) result.by_caption.emplace(c.caption_id, std::vector<std::string>{});

  std::set<std::string> used_images;
  for (const auto& c : candidates) {
    if (!(c.precision_score > cfg.threshold)) {
      result.rejections.push_back(
          Rejection{c.caption_id, c.image_id, c.precision_score, RejectReason::below_threshold});
      continue;
    }
    if (cfg.unique_images && used_images.count(c.image_id)) {
      result.rejections.push_back(
          Rejection{c.caption_id, c.image_id, c.precision_score, RejectReason::image_used});
      continue;
    }
    auto& assigned = result.by_caption[c.caption_id];
    if (assigned.size() >= static_cast<std::size_t>(cfg.per_caption_cap)) {
      result.rejections.push_back(
          Rejection{c.caption_id, c.image_id, c.precision_score, RejectReason::cap_reached});
      continue;
    }
    assigned.push_back(c.image_id);
    if (cfg.unique_images) used_images.insert(c.image_id);
  }
  return result;
}

std::vector<std::string> sample_fill(std::span<const std::string> pool, std::size_t n,
                                     std::uint64_t seed) {
  if (n > pool.size())
    fail(errc::pool_too_small, "cannot draw " + std::to_string(n) + " ids from a pool of " +
                                   std::to_string(pool.size()));
  std::vector<std::string> sorted(pool.begin(), pool.end());
  std::sort(sorted.begin(), sorted.end());  // input order must not matter
  Rng rng(seed);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k = j + static_cast<std::size_t>(rng.below(sorted.size() - j));
    std::swap(sorted[j], sorted[k]);
  }
  sorted.resize(n);
  return sorted;
}

void write_assignment_jsonl(const Assignment& assignment, const std::filesystem::path& path) {
  std::vector<nlohmann::json> lines;
  lines.reserve(assignment.by_caption.size());
  for (const auto& [caption_id, image_ids] : assignment.by_caption)
    lines.push_back(nlohmann::json{{"caption_id", caption_id}, {"image_ids", image_ids}});
  io::write_jsonl(path, lines);
}

void write_rejections_csv(const std::vector<Rejection>& rejections, const std::filesystem::path& path) {
  std::string out = "caption_id,image_id,precision_score,reason\n";
  for (const auto& r : rejections) {
    out += io::csv_field(r.caption_id);
    out += ',';
    out += io::csv_field(r.image_id);
    out += ',';
    out += io::format_double(r.precision_score, 9);
    out += ',';
    out += reject_reason_name(r.reason);
    out += '\n';
  }
  io::write_file(path, out);
}

}  // namespace xmodal::enrich
