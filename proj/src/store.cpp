#include "xmodal/store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "xmodal/error.hpp"
#include "xmodal/io.hpp"

namespace xmodal::store {

using nlohmann::json;

std::optional<std::size_t> EmbeddingMatrix::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingMatrix::row_of(std::string_view id) const {
  auto r = find(id);
  if (!r) fail(errc::dangling_id, "unknown item id '" + std::string(id) + "'");
  return *r;
}

void EmbeddingMatrix::validate() {
  if (rows() > 0 && dim == 0) fail(errc::dimension_mismatch, "dim must be >= 1");
  if (values.size() != rows() * dim)
    fail(errc::dimension_mismatch, "value count " + std::to_string(values.size()) +
                                       " != rows*dim = " + std::to_string(rows() * dim));
  for (float v : values)
    if (!std::isfinite(v)) fail(errc::non_finite_value, "matrix contains a non-finite value");
  index_.clear();
  index_.reserve(rows());
  for (std::size_t r = 0; r < rows(); ++r) {
    if (item_ids[r].empty()) fail(errc::malformed_record, "empty item id at row " + std::to_string(r));
    if (!index_.emplace(item_ids[r], r).second)
      fail(errc::duplicate_id, "duplicate item id '" + item_ids[r] + "'");
  }
  bool unit = true;
  for (std::size_t r = 0; r < rows() && unit; ++r) {
    double norm2 = 0.0;
    for (float v : row(r)) norm2 += static_cast<double>(v) * v;
    if (std::fabs(std::sqrt(norm2) - 1.0) > 1e-4) unit = false;
  }
  normalized = unit;
}

EmbeddingMatrix make_matrix(std::vector<std::string> ids, std::size_t dim, std::vector<float> values) {
  EmbeddingMatrix m;
  m.item_ids = std::move(ids);
  m.dim = dim;
  m.values = std::move(values);
  m.validate();
  return m;
}

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u32_le(std::string& out, std::uint32_t v) {
  out += static_cast<char>(v & 0xff);
  out += static_cast<char>((v >> 8) & 0xff);
  out += static_cast<char>((v >> 16) & 0xff);
  out += static_cast<char>((v >> 24) & 0xff);
}

std::filesystem::path ids_sidecar(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".ids.jsonl");
}

}  // namespace

EmbeddingMatrix load_matrix(const std::filesystem::path& path) {
  const std::string bytes = io::read_file(path);
  if (bytes.size() < 12) fail(errc::malformed_header, path.string() + ": truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0)
    fail(errc::malformed_header, path.string() + ": bad magic");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t n = read_u32_le(p + 4);
  const std::uint32_t dim = read_u32_le(p + 8);
  if (n > 0 && dim == 0) fail(errc::malformed_header, path.string() + ": dim must be >= 1");
  const std::size_t expected = 12 + static_cast<std::size_t>(n) * dim * 4;
  if (bytes.size() != expected)
    fail(errc::dimension_mismatch, path.string() + ": payload is " + std::to_string(bytes.size() - 12) +
                                       " bytes, header implies " + std::to_string(expected - 12));

  EmbeddingMatrix m;
  m.dim = dim;
  m.values.resize(static_cast<std::size_t>(n) * dim);
  if (!m.values.empty()) {
    std::memcpy(m.values.data(), bytes.data() + 12, m.values.size() * 4);
    if constexpr (std::endian::native == std::endian::big) {
      for (float& f : m.values) {
        auto u = std::bit_cast<std::uint32_t>(f);
        u = ((u & 0xff) << 24) | ((u & 0xff00) << 8) | ((u >> 8) & 0xff00) | (u >> 24);
        f = std::bit_cast<float>(u);
      }
    }
  }

  const auto sidecar = ids_sidecar(path);
  const auto lines = io::read_jsonl(sidecar);
  if (lines.size() != n)
    fail(errc::malformed_header, sidecar.string() + ": " + std::to_string(lines.size()) +
                                     " id rows for " + std::to_string(n) + " matrix rows");
  m.item_ids.resize(n);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (!line.is_object() || !line.contains("row") || !line.contains("id") ||
        !line["row"].is_number_integer() || !line["id"].is_string())
      fail(errc::malformed_record, sidecar.string() + ": line " + std::to_string(i + 1) +
                                       " must be {\"row\": k, \"id\": \"...\"}");
    if (line["row"].get<std::int64_t>() != static_cast<std::int64_t>(i))
      fail(errc::malformed_header, sidecar.string() + ": rows must appear in order, saw row " +
                                       line["row"].dump() + " at line " + std::to_string(i + 1));
    m.item_ids[i] = line["id"].get<std::string>();
  }
  m.validate();
  return m;
}

void write_matrix(const EmbeddingMatrix& matrix, const std::filesystem::path& path) {
  if (matrix.values.size() != matrix.rows() * matrix.dim)
    fail(errc::dimension_mismatch, "matrix shape is inconsistent");
  std::string bytes;
  bytes.reserve(12 + matrix.values.size() * 4);
  bytes.append(kMagic, 4);
  put_u32_le(bytes, static_cast<std::uint32_t>(matrix.rows()));
  put_u32_le(bytes, static_cast<std::uint32_t>(matrix.dim));
  for (float f : matrix.values) {
    auto u = std::bit_cast<std::uint32_t>(f);
    bytes += static_cast<char>(u & 0xff);
    bytes += static_cast<char>((u >> 8) & 0xff);
    bytes += static_cast<char>((u >> 16) & 0xff);
    bytes += static_cast<char>((u >> 24) & 0xff);
  }
  io::write_file(path, bytes);

  std::vector<json> lines;
  lines.reserve(matrix.rows());
  for (std::size_t r = 0; r < matrix.rows(); ++r)
    lines.push_back(json{{"row", r}, {"id", matrix.item_ids[r]}});
  io::write_jsonl(ids_sidecar(path), lines);
}

std::vector<PairRecord> load_pairs(const std::filesystem::path& path) {
  const auto lines = io::read_jsonl(path);
  std::vector<PairRecord> pairs;
  pairs.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& j = lines[i];
    const std::string where = path.string() + ": pair line " + std::to_string(i + 1);
    if (!j.is_object() || !j.contains("pair_id") || !j.contains("text_id") ||
        !j.contains("visual_ids") || !j.contains("group_id"))
      fail(errc::malformed_record, where + ": missing required field");
    PairRecord rec;
    rec.pair_id = j["pair_id"].get<std::string>();
    rec.text_id = j["text_id"].get<std::string>();
    if (!j["visual_ids"].is_array() || j["visual_ids"].empty())
      fail(errc::malformed_record, where + ": visual_ids must be a non-empty array");
    for (const auto& v : j["visual_ids"]) rec.visual_ids.push_back(v.get<std::string>());
    rec.group_id = j["group_id"].get<std::string>();
    rec.t_start = j.value("t_start", 0.0);
    rec.t_end = j.value("t_end", 0.0);
    rec.confidence = j.value("confidence", 1.0);
    if (rec.t_end < rec.t_start) fail(errc::malformed_record, where + ": t_end < t_start");
    if (rec.confidence < 0.0 || rec.confidence > 1.0)
      fail(errc::malformed_record, where + ": confidence outside [0,1]");
    pairs.push_back(std::move(rec));
  }
  return pairs;
}

void write_pairs(const std::vector<PairRecord>& pairs, const std::filesystem::path& path) {
  std::vector<json> lines;
  lines.reserve(pairs.size());
  for (const auto& p : pairs) {
    lines.push_back(json{{"pair_id", p.pair_id},
                         {"text_id", p.text_id},
                         {"visual_ids", p.visual_ids},
                         {"group_id", p.group_id},
                         {"t_start", p.t_start},
                         {"t_end", p.t_end},
                         {"confidence", p.confidence}});
  }
  io::write_jsonl(path, lines);
}

Manifest load_manifest(const std::filesystem::path& path) {
  const json j = io::read_json(path);
  for (const char* field : {"dataset_name", "text_matrix_path", "visual_matrix_path", "pairs_path"})
    if (!j.contains(field))
      fail(errc::malformed_record, path.string() + ": manifest missing '" + field + "'");
  Manifest m;
  m.dataset_name = j["dataset_name"].get<std::string>();
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  m.text_matrix_path = resolve(j["text_matrix_path"].get<std::string>());
  m.visual_matrix_path = resolve(j["visual_matrix_path"].get<std::string>());
  m.pairs_path = resolve(j["pairs_path"].get<std::string>());
  if (j.contains("created_with_seed") && !j["created_with_seed"].is_null())
    m.created_with_seed = j["created_with_seed"].get<std::uint64_t>();
  return m;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  json j{{"dataset_name", manifest.dataset_name},
         {"text_matrix_path", manifest.text_matrix_path.string()},
         {"visual_matrix_path", manifest.visual_matrix_path.string()},
         {"pairs_path", manifest.pairs_path.string()}};
  if (manifest.created_with_seed) j["created_with_seed"] = *manifest.created_with_seed;
  io::write_file(path, j.dump(2) + "\n");
}

Corpus join_corpus(EmbeddingMatrix text, EmbeddingMatrix visual, std::vector<PairRecord> pairs,
                   std::string dataset_name) {
  if (pairs.empty()) fail(errc::empty_corpus, "corpus has no pairs");
  Corpus c;
  c.dataset_name = std::move(dataset_name);
  c.text = std::move(text);
  c.visual = std::move(visual);
  c.pairs = std::move(pairs);
  c.text_row.reserve(c.pairs.size());
  c.visual_row.reserve(c.pairs.size());
  std::unordered_set<std::string> seen;
  seen.reserve(c.pairs.size());
  for (const auto& p : c.pairs) {
    if (!seen.insert(p.pair_id).second) fail(errc::duplicate_id, "duplicate pair_id '" + p.pair_id + "'");
    c.text_row.push_back(c.text.row_of(p.text_id));
    std::vector<std::size_t> rows;
    rows.reserve(p.visual_ids.size());
    for (const auto& vid : p.visual_ids) rows.push_back(c.visual.row_of(vid));
    c.visual_row.push_back(std::move(rows));
  }
  return c;
}

Corpus join_corpus(const Manifest& manifest) {
  return join_corpus(load_matrix(manifest.text_matrix_path), load_matrix(manifest.visual_matrix_path),
                     load_pairs(manifest.pairs_path), manifest.dataset_name);
}

}  // namespace xmodal::store
