#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "xmodal/store.hpp"

namespace xmodal::enrich {

struct AssignmentCandidate {
  std::string caption_id;
  std::string image_id;
  double recall_score = 0.0;     // retrieval cosine
  double precision_score = 0.0;  // external verifier score
};

// Top-k images per caption by cosine; ties broken by ascending image_id.
// Candidates are emitted caption by caption, best first.
std::vector<AssignmentCandidate> topk_recall(const store::EmbeddingMatrix& captions,
                                             const store::EmbeddingMatrix& images, std::size_t k);

struct AssignConfig {
  double threshold = 0.9;   // accept only strictly above
  int per_caption_cap = 5;
  bool unique_images = true;
};

enum class RejectReason { below_threshold, image_used, cap_reached };

const char* reject_reason_name(RejectReason r);

struct Rejection {
  std::string caption_id;
  std::string image_id;
  double precision_score = 0.0;
  RejectReason reason = RejectReason::below_threshold;
};

struct Assignment {
  // every caption appearing in the candidate list, empty when nothing stuck
  std::map<std::string, std::vector<std::string>> by_caption;
  std::vector<Rejection> rejections;  // processing order
};

// Greedy pass in descending precision_score (ties: ascending caption_id then
// image_id). A candidate is accepted iff score > threshold, its image is
// still unused (when unique_images) and its caption is below the cap.
Assignment greedy_assign(std::vector<AssignmentCandidate> candidates, const AssignConfig& cfg);

// n distinct ids drawn seeded and uniformly from the pool. The pool is sorted
// internally, so the draw does not depend on input order.
std::vector<std::string> sample_fill(std::span<const std::string> pool, std::size_t n,
                                     std::uint64_t seed);

void write_assignment_jsonl(const Assignment& assignment, const std::filesystem::path& path);
// CSV `caption_id,image_id,precision_score,reason`
void write_rejections_csv(const std::vector<Rejection>& rejections, const std::filesystem::path& path);

}  // namespace xmodal::enrich
