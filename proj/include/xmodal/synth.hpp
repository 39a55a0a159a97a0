#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "xmodal/store.hpp"

namespace xmodal::synth {

// Shared-latent generator: each pair draws a unit latent z, the text side
// sees normalize(z + text_noise * g) and every frame normalize(z + visual_noise * g').
// Higher noise drags matched cosines toward the shuffled distribution.
struct SynthConfig {
  std::size_t n_pairs = 1000;
  std::size_t dim = 32;
  std::size_t n_groups = 10;  // contiguous blocks of pairs share a group
  int frames_per_pair = 1;
  double text_noise = 0.6;
  double visual_noise = 0.6;
  std::uint64_t seed = 1;
  std::string dataset_name = "synthetic";
};

store::Corpus make_corpus(const SynthConfig& cfg);

// Writes text.emb / visual.emb (+ id sidecars), pairs.jsonl and manifest.json
// into `dir`; returns the manifest with absolute paths.
store::Manifest write_corpus(const store::Corpus& corpus, const std::filesystem::path& dir,
                             std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace xmodal::synth
