#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xmodal/error.hpp"
#include "xmodal/io.hpp"
#include "xmodal/report.hpp"
#include "xmodal/store.hpp"
#include "xmodal/synth.hpp"

using namespace xmodal;
using nlohmann::json;

namespace {

errc thrown_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return errc::internal;
}

std::filesystem::path temp_dir(const char* name) {
  const auto p = std::filesystem::temp_directory_path() / "xmodal_report_test" / name;
  std::filesystem::create_directories(p);
  return p;
}

// strip the wall-clock key everywhere before comparing documents
json without_timestamps(json value) {
  if (value.is_object()) {
    value.erase("generated_at");
    for (auto& [key, sub] : value.items()) sub = without_timestamps(sub);
  } else if (value.is_array()) {
    for (auto& sub : value) sub = without_timestamps(sub);
  }
  return value;
}

}  // namespace

TEST_CASE("fnv1a64 matches the published test vectors") {
  CHECK(report::fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(report::fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(report::fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("config digest is stable and format-pinned") {
  const json params{{"alpha", 1}, {"beta", "two"}};
  const auto digest = report::config_digest(params);
  CHECK(digest.substr(0, 8) == "fnv1a64:");
  CHECK(digest.size() == 8 + 16);
  CHECK(digest == report::config_digest(params));
  // the digest is over the canonical dump, so key insertion order is moot
  const json reordered{{"beta", "two"}, {"alpha", 1}};
  CHECK(digest == report::config_digest(reordered));
  CHECK(digest != report::config_digest(json{{"alpha", 2}, {"beta", "two"}}));
}

TEST_CASE("artifact envelope carries the standard keys") {
  const auto artifact = report::artifact_envelope("scores", json{{"x", 1}}, 42);
  CHECK(artifact.at("kind") == "scores");
  CHECK(artifact.at("tool").at("name") == "xmodal");
  CHECK(artifact.at("tool").at("version").is_string());
  CHECK(artifact.at("config_digest") == report::config_digest(json{{"x", 1}}));
  CHECK(artifact.at("params") == json{{"x", 1}});
  CHECK(artifact.at("seed") == 42);
  CHECK(artifact.at("generated_at").is_string());
  // ISO-8601 UTC shape: YYYY-MM-DDTHH:MM:SSZ
  const auto ts = artifact.at("generated_at").get<std::string>();
  REQUIRE(ts.size() == 20);
  CHECK(ts[4] == '-');
  CHECK(ts[10] == 'T');
  CHECK(ts.back() == 'Z');
  const auto unseeded = report::artifact_envelope("scores", json::object(), std::nullopt);
  CHECK_FALSE(unseeded.contains("seed"));
}

TEST_CASE("merge groups sections by kind and tracks provenance") {
  const auto dir = temp_dir("merge");
  const json params{{"p", 1}};
  auto a = report::artifact_envelope("scores", params, 7);
  a["rows"] = 3;
  auto b = report::artifact_envelope("alignment", params, std::nullopt);
  b["A"] = 0.25;
  auto c = report::artifact_envelope("alignment", params, 9);
  c["A"] = 0.5;
  report::write_json_artifact(a, dir / "a.json");
  report::write_json_artifact(b, dir / "b.json");
  report::write_json_artifact(c, dir / "c.json");

  std::vector<std::string> warnings;
  const auto merged =
      report::merge_artifacts({dir / "a.json", dir / "b.json", dir / "c.json"}, &warnings);
  CHECK(warnings.empty());  // same params -> same digest
  CHECK(merged.at("kind") == "report");
  CHECK(merged.at("config_digest") == report::config_digest(params));
  REQUIRE(merged.at("sections").contains("scores"));
  REQUIRE(merged.at("sections").contains("alignment"));
  CHECK(merged["sections"]["alignment"].size() == 2);
  CHECK(merged["sections"]["alignment"][0].at("A") == 0.25);
  REQUIRE(merged.at("provenance").size() == 3);
  CHECK(merged["provenance"][0].at("file") == "a.json");
  CHECK(merged["provenance"][0].at("kind") == "scores");
  CHECK(merged["provenance"][0].at("seed") == 7);
  CHECK_FALSE(merged["provenance"][1].contains("seed"));
}

TEST_CASE("merge warns on mixed config digests but still merges") {
  const auto dir = temp_dir("warn");
  report::write_json_artifact(report::artifact_envelope("scores", json{{"p", 1}}, std::nullopt),
                              dir / "a.json");
  report::write_json_artifact(report::artifact_envelope("scores", json{{"p", 2}}, std::nullopt),
                              dir / "b.json");
  std::vector<std::string> warnings;
  const auto merged = report::merge_artifacts({dir / "a.json", dir / "b.json"}, &warnings);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("config digest mismatch") != std::string::npos);
  CHECK(merged["sections"]["scores"].size() == 2);
}

TEST_CASE("merge rejects files without an artifact kind") {
  const auto dir = temp_dir("badkind");
  io::write_file(dir / "junk.json", "{\"hello\": 1}\n");
  CHECK(thrown_code([&] {
          std::vector<std::string> warnings;
          report::merge_artifacts({dir / "junk.json"}, &warnings);
        }) == errc::schema_mismatch);
  CHECK(thrown_code([&] {
          std::vector<std::string> warnings;
          report::merge_artifacts({}, &warnings);
        }) == errc::config_invalid);
}

TEST_CASE("schema validation accepts the shipped report shape") {
  const json schema = json::parse(R"({
    "type": "object",
    "required": ["kind", "tool", "sections"],
    "properties": {
      "kind": {"type": "string", "enum": ["report"]},
      "tool": {"type": "object", "required": ["name"],
               "properties": {"name": {"type": "string"}}},
      "sections": {"type": "object"},
      "provenance": {"type": "array",
                     "items": {"type": "object", "required": ["file", "kind"]}}
    }
  })");
  json doc{{"kind", "report"},
           {"tool", {{"name", "xmodal"}}},
           {"sections", json::object()},
           {"provenance", json::array({{{"file", "a.json"}, {"kind", "scores"}}})}};
  std::string error;
  CHECK(report::validate_schema(doc, schema, &error));
  CHECK(error.empty());

  // each failure reports the offending path
  json missing = doc;
  missing.erase("sections");
  CHECK_FALSE(report::validate_schema(missing, schema, &error));
  CHECK(error == "$: missing required key 'sections'");

  json wrong_enum = doc;
  wrong_enum["kind"] = "scores";
  CHECK_FALSE(report::validate_schema(wrong_enum, schema, &error));
  CHECK(error == "$/kind: value not in enum");

  json wrong_type = doc;
  wrong_type["tool"] = "xmodal";
  CHECK_FALSE(report::validate_schema(wrong_type, schema, &error));
  CHECK(error == "$/tool: expected object");

  json bad_item = doc;
  bad_item["provenance"].push_back(json{{"file", "b.json"}});
  CHECK_FALSE(report::validate_schema(bad_item, schema, &error));
  CHECK(error == "$/provenance/1: missing required key 'kind'");
}

TEST_CASE("calibration curve csv collects every section point") {
  json merged;
  merged["sections"]["calibration"] = json::array();
  json artifact;
  artifact["points"] = json::array({
      {{"fraction", 0.0}, {"A", 0.75}, {"ci_low", 0.7}, {"ci_high", 0.8}},
      {{"fraction", 0.5}, {"A", 0.4}, {"ci_low", 0.35}, {"ci_high", 0.45}},
  });
  merged["sections"]["calibration"].push_back(artifact);
  const auto path = temp_dir("csv") / "curve.csv";
  report::write_calibration_curve_csv(merged, path);
  CHECK(io::read_file(path) ==
        "fraction,A,ci_low,ci_high\n0,0.75,0.7,0.8\n0.5,0.4,0.35,0.45\n");
  // no calibration sections -> header only
  report::write_calibration_curve_csv(json{{"sections", json::object()}}, path);
  CHECK(io::read_file(path) == "fraction,A,ci_low,ci_high\n");
}

TEST_CASE("bin accuracy csv is numerically ordered with empty cells for gaps") {
  json merged;
  json artifact;
  artifact["by_bin"] = json::object();
  artifact["by_bin"]["2"] = 0.5;
  artifact["by_bin"]["10"] = 1.0;  // lexicographically before "2", numerically after
  artifact["by_bin"]["3"] = nullptr;
  merged["sections"]["trial_report"].push_back(artifact);
  const auto path = temp_dir("csv") / "bins.csv";
  report::write_bin_accuracy_csv(merged, path);
  CHECK(io::read_file(path) == "bin,accuracy\n2,0.5\n3,\n10,1\n");
  json bad = merged;
  bad["sections"]["trial_report"][0]["by_bin"]["oops"] = 0.1;
  CHECK(thrown_code([&] { report::write_bin_accuracy_csv(bad, path); }) == errc::schema_mismatch);
}

TEST_CASE("synthetic corpora are seed-deterministic and round trip through disk") {
  synth::SynthConfig cfg;
  cfg.n_pairs = 40;
  cfg.dim = 8;
  cfg.n_groups = 4;
  cfg.frames_per_pair = 2;
  cfg.seed = 99;
  const auto a = synth::make_corpus(cfg);
  const auto b = synth::make_corpus(cfg);
  CHECK(a.text.values == b.text.values);  // bitwise
  CHECK(a.visual.values == b.visual.values);
  CHECK(a.pairs.size() == 40);
  cfg.seed = 100;
  const auto c = synth::make_corpus(cfg);
  CHECK(a.text.values != c.text.values);

  // unit-norm rows by construction
  CHECK(a.text.normalized);
  CHECK(a.visual.normalized);
  for (std::size_t p = 0; p < a.pairs.size(); ++p) CHECK(a.pairs[p].visual_ids.size() == 2);

  const auto dir = temp_dir("synth");
  const auto manifest = synth::write_corpus(a, dir, cfg.seed);
  const auto loaded = store::join_corpus(store::load_manifest(dir / "manifest.json"));
  CHECK(loaded.text.values == a.text.values);
  CHECK(loaded.visual.values == a.visual.values);
  CHECK(loaded.pairs.size() == a.pairs.size());
  CHECK(loaded.text.item_ids == a.text.item_ids);
  CHECK(manifest.pairs_path.is_absolute());
}

TEST_CASE("json artifacts end with a newline and reload cleanly") {
  const auto dir = temp_dir("roundtrip");
  const auto artifact = report::artifact_envelope("scores", json{{"p", 3}}, 5);
  report::write_json_artifact(artifact, dir / "x.json");
  const auto text = io::read_file(dir / "x.json");
  REQUIRE_FALSE(text.empty());
  CHECK(text.back() == '\n');
  CHECK(without_timestamps(io::read_json(dir / "x.json")) == without_timestamps(artifact));
}
