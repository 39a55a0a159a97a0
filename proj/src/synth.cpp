#include "xmodal/synth.hpp"

#include <cmath>
#include <cstdio>

#include "xmodal/error.hpp"
#include "xmodal/rng.hpp"

namespace xmodal::synth {

namespace {

std::string padded_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%06zu", prefix, i);
  return buf;
}

// unit vector z + noise * g, renormalized, rounded to float32 storage
void emit_noisy_unit(const std::vector<double>& latent, double noise, Rng& rng,
                     std::vector<float>& out) {
  const std::size_t dim = latent.size();
  std::vector<double> v(dim);
  double norm2 = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    v[d] = latent[d] + noise * next_gaussian(rng);
    norm2 += v[d] * v[d];
  }
  const double norm = std::sqrt(norm2);
  for (std::size_t d = 0; d < dim; ++d) out.push_back(static_cast<float>(v[d] / norm));
}

}  // namespace

store::Corpus make_corpus(const SynthConfig& cfg) {
  if (cfg.n_pairs < 1 || cfg.dim < 2 || cfg.frames_per_pair < 1 || cfg.n_groups < 1)
    fail(errc::config_invalid, "synthetic corpus needs n_pairs >= 1, dim >= 2, frames >= 1, groups >= 1");

  Rng rng(cfg.seed);
  std::vector<std::string> text_ids, visual_ids;
  std::vector<float> text_values, visual_values;
  std::vector<store::PairRecord> pairs;
  text_ids.reserve(cfg.n_pairs);
  pairs.reserve(cfg.n_pairs);

  std::vector<double> latent(cfg.dim);
  for (std::size_t i = 0; i < cfg.n_pairs; ++i) {
    double norm2 = 0.0;
    for (std::size_t d = 0; d < cfg.dim; ++d) {
      latent[d] = next_gaussian(rng);
      norm2 += latent[d] * latent[d];
    }
    const double norm = std::sqrt(norm2);
    for (double& v : latent) v /= norm;

    store::PairRecord pair;
    pair.pair_id = padded_id("p", i);
    pair.text_id = padded_id("t", i);
    // contiguous blocks of pairs share a group (a source video / image set)
    pair.group_id = padded_id("g", i * cfg.n_groups / cfg.n_pairs);
    pair.t_start = static_cast<double>(i);
    pair.t_end = static_cast<double>(i) + 1.0;
    pair.confidence = 1.0;

    text_ids.push_back(pair.text_id);
    emit_noisy_unit(latent, cfg.text_noise, rng, text_values);
    for (int f = 0; f < cfg.frames_per_pair; ++f) {
      std::string vid = pair.text_id;
      vid[0] = 'v';
      vid += "_f" + std::to_string(f);
      visual_ids.push_back(vid);
      pair.visual_ids.push_back(vid);
      emit_noisy_unit(latent, cfg.visual_noise, rng, visual_values);
    }
    pairs.push_back(std::move(pair));
  }

  auto text = store::make_matrix(std::move(text_ids), cfg.dim, std::move(text_values));
  auto visual = store::make_matrix(std::move(visual_ids), cfg.dim, std::move(visual_values));
  return store::join_corpus(std::move(text), std::move(visual), std::move(pairs), cfg.dataset_name);
}

store::Manifest write_corpus(const store::Corpus& corpus, const std::filesystem::path& dir,
                             std::optional<std::uint64_t> seed) {
  std::filesystem::create_directories(dir);
  // the stored manifest names siblings; the returned one carries usable paths
  store::Manifest stored;
  stored.dataset_name = corpus.dataset_name;
  stored.text_matrix_path = "text.emb";
  stored.visual_matrix_path = "visual.emb";
  stored.pairs_path = "pairs.jsonl";
  stored.created_with_seed = seed;
  store::Manifest manifest = stored;
  manifest.text_matrix_path = dir / "text.emb";
  manifest.visual_matrix_path = dir / "visual.emb";
  manifest.pairs_path = dir / "pairs.jsonl";
  store::write_matrix(corpus.text, manifest.text_matrix_path);
  store::write_matrix(corpus.visual, manifest.visual_matrix_path);
  store::write_pairs(corpus.pairs, manifest.pairs_path);
  store::write_manifest(stored, dir / "manifest.json");
  return manifest;
}

}  // namespace xmodal::synth
