#include "xmodal/report.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <utility>
#include <vector>

#include "xmodal/error.hpp"
#include "xmodal/io.hpp"

namespace xmodal::report {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string config_digest(const json& params) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(params.dump())));
  return buf;
}

namespace {

std::string utc_now_iso8601() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace

json artifact_envelope(std::string kind, json params, std::optional<std::uint64_t> seed) {
  json artifact;
  artifact["kind"] = std::move(kind);
  artifact["tool"] = json{{"name", kToolName}, {"version", kToolVersion}};
  artifact["config_digest"] = config_digest(params);
  artifact["params"] = std::move(params);
  if (seed) artifact["seed"] = *seed;
  artifact["generated_at"] = utc_now_iso8601();
  return artifact;
}

void write_json_artifact(const json& artifact, const std::filesystem::path& path) {
  io::write_file(path, artifact.dump(2) + "\n");
}

json merge_artifacts(const std::vector<std::filesystem::path>& files,
                     std::vector<std::string>* warnings) {
  if (files.empty()) fail(errc::config_invalid, "report needs at least one input artifact");

  json merged;
  merged["kind"] = "report";
  merged["tool"] = json{{"name", kToolName}, {"version", kToolVersion}};
  merged["generated_at"] = utc_now_iso8601();
  merged["sections"] = json::object();
  merged["provenance"] = json::array();

  std::string reference_digest;
  for (const auto& file : files) {
    json artifact = io::read_json(file);
    if (!artifact.is_object() || !artifact.contains("kind") || !artifact["kind"].is_string())
      fail(errc::schema_mismatch, file.string() + ": not a recognized artifact (missing 'kind')");
    const auto kind = artifact["kind"].get<std::string>();
    const std::string digest = artifact.value("config_digest", std::string("unknown"));
    if (reference_digest.empty()) {
      reference_digest = digest;
    } else if (digest != reference_digest && warnings) {
      warnings->push_back("config digest mismatch: " + file.string() + " has " + digest +
                          ", expected " + reference_digest + " (merged anyway)");
    }
    json prov{{"file", file.filename().string()}, {"kind", kind}, {"config_digest", digest}};
    if (artifact.contains("seed")) prov["seed"] = artifact["seed"];
    merged["provenance"].push_back(std::move(prov));
    merged["sections"][kind].push_back(std::move(artifact));
  }
  merged["config_digest"] = reference_digest;
  return merged;
}

namespace {

bool type_matches(const json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "number") return value.is_number();
  if (type == "integer") return value.is_number_integer();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  return false;
}

bool validate_at(const json& value, const json& schema, const std::string& path, std::string* error) {
  auto report = [&](const std::string& msg) {
    if (error) *error = path + ": " + msg;
    return false;
  };

  if (schema.contains("type")) {
    const auto type = schema["type"].get<std::string>();
    if (!type_matches(value, type)) return report("expected " + type);
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& option : schema["enum"])
      if (value == option) {
        found = true;
        break;
      }
    if (!found) return report("value not in enum");
  }
  if (schema.contains("required")) {
    for (const auto& key : schema["required"])
      if (!value.contains(key.get<std::string>()))
        return report("missing required key '" + key.get<std::string>() + "'");
  }
  if (schema.contains("properties") && value.is_object()) {
    for (const auto& [key, sub] : schema["properties"].items())
      if (value.contains(key))
        if (!validate_at(value[key], sub, path + "/" + key, error)) return false;
  }
  if (schema.contains("items") && value.is_array()) {
    std::size_t i = 0;
    for (const auto& element : value) {
      if (!validate_at(element, schema["items"], path + "/" + std::to_string(i), error)) return false;
      ++i;
    }
  }
  return true;
}

}  // namespace

bool validate_schema(const json& value, const json& schema, std::string* error) {
  return validate_at(value, schema, "$", error);
}

void write_calibration_curve_csv(const json& merged, const std::filesystem::path& path) {
  std::string out = "fraction,A,ci_low,ci_high\n";
  if (merged.contains("sections") && merged["sections"].contains("calibration")) {
    for (const auto& artifact : merged["sections"]["calibration"]) {
      if (!artifact.contains("points")) continue;
      for (const auto& point : artifact["points"]) {
        out += io::format_double(point["fraction"].get<double>(), 9);
        out += ',';
        out += io::format_double(point["A"].get<double>(), 9);
        out += ',';
        out += io::format_double(point["ci_low"].get<double>(), 9);
        out += ',';
        out += io::format_double(point["ci_high"].get<double>(), 9);
        out += '\n';
      }
    }
  }
  io::write_file(path, out);
}

void write_bin_accuracy_csv(const json& merged, const std::filesystem::path& path) {
  std::string out = "bin,accuracy\n";
  if (merged.contains("sections") && merged["sections"].contains("trial_report")) {
    for (const auto& artifact : merged["sections"]["trial_report"]) {
      if (!artifact.contains("by_bin")) continue;
      // JSON object keys sort lexicographically ("10" before "2"); emit rows
      // in numeric bin order instead
      std::vector<std::pair<long, const json*>> bins;
      for (const auto& [bin, accuracy] : artifact["by_bin"].items()) {
        try {
          bins.emplace_back(std::stol(bin), &accuracy);
        } catch (const std::exception&) {
          fail(errc::schema_mismatch, "by_bin key '" + bin + "' is not an integer");
        }
      }
      std::sort(bins.begin(), bins.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      for (const auto& [bin, accuracy] : bins) {
        out += std::to_string(bin);
        out += ',';
        if (!accuracy->is_null()) out += io::format_double(accuracy->get<double>(), 9);
        out += '\n';
      }
    }
  }
  io::write_file(path, out);
}

}  // namespace xmodal::report
