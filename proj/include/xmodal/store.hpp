#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace xmodal::store {

// Row-major float32 embedding table with string ids. Values are stored at
// 32-bit precision; all arithmetic downstream accumulates in doubles.
struct EmbeddingMatrix {
  std::vector<std::string> item_ids;
  std::size_t dim = 0;
  std::vector<float> values;  // item_ids.size() * dim, row-major
  bool normalized = false;    // true iff every row norm is within 1e-4 of 1

  std::size_t rows() const { return item_ids.size(); }

  std::span<const float> row(std::size_t r) const {
    return std::span<const float>(values.data() + r * dim, dim);
  }

  std::optional<std::size_t> find(std::string_view id) const;
  std::size_t row_of(std::string_view id) const;  // throws dangling_id when absent

  // Rebuilds the id index and checks invariants: dim >= 1 (when non-empty),
  // value count == rows*dim, all values finite, ids unique and non-empty.
  void validate();

private:
  std::unordered_map<std::string, std::size_t> index_;
};

EmbeddingMatrix make_matrix(std::vector<std::string> ids, std::size_t dim, std::vector<float> values);

// Binary container: magic "EMB1", uint32 LE row count, uint32 LE dim, then
// rows*dim little-endian float32. Ids live in a sidecar `<path>.ids.jsonl`
// of {"row": k, "id": "..."} lines ordered by row.
EmbeddingMatrix load_matrix(const std::filesystem::path& path);
void write_matrix(const EmbeddingMatrix& matrix, const std::filesystem::path& path);

struct PairRecord {
  std::string pair_id;
  std::string text_id;
  std::vector<std::string> visual_ids;  // non-empty
  std::string group_id;                 // source video / image group
  double t_start = 0.0;
  double t_end = 0.0;
  double confidence = 1.0;  // in [0,1]
};

std::vector<PairRecord> load_pairs(const std::filesystem::path& path);
void write_pairs(const std::vector<PairRecord>& pairs, const std::filesystem::path& path);

struct Manifest {
  std::string dataset_name;
  std::filesystem::path text_matrix_path;
  std::filesystem::path visual_matrix_path;
  std::filesystem::path pairs_path;
  std::optional<std::uint64_t> created_with_seed;
};

// Relative paths in the manifest resolve against the manifest's directory.
Manifest load_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

// Fully resolved dataset: every pair's text_id and visual_ids point at live
// matrix rows (checked at join time).
struct Corpus {
  std::string dataset_name;
  EmbeddingMatrix text;
  EmbeddingMatrix visual;
  std::vector<PairRecord> pairs;
  std::vector<std::size_t> text_row;                // per pair
  std::vector<std::vector<std::size_t>> visual_row;  // per pair, per frame

  std::size_t size() const { return pairs.size(); }
};

Corpus join_corpus(const Manifest& manifest);
Corpus join_corpus(EmbeddingMatrix text, EmbeddingMatrix visual, std::vector<PairRecord> pairs,
                   std::string dataset_name = "corpus");

}  // namespace xmodal::store
