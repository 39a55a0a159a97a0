#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace xmodal::report {

inline constexpr const char* kToolName = "xmodal";
inline constexpr const char* kToolVersion = "0.1.0";

std::uint64_t fnv1a64(std::string_view bytes);

// Digest of the effective parameter set, "fnv1a64:<16 hex>". Artifacts created
// from the same configuration share it; `report` warns when inputs disagree.
std::string config_digest(const nlohmann::json& params);

// Common artifact envelope. `generated_at` carries the wall-clock timestamp
// and is the only key excluded from byte-level determinism comparisons.
nlohmann::json artifact_envelope(std::string kind, nlohmann::json params,
                                 std::optional<std::uint64_t> seed);

void write_json_artifact(const nlohmann::json& artifact, const std::filesystem::path& path);

// Merges per-command JSON artifacts into one document with `sections` keyed
// by artifact kind and a `provenance` list (file, kind, digest, seed).
// Mixed config digests are reported through `warnings`, not fatal.
nlohmann::json merge_artifacts(const std::vector<std::filesystem::path>& files,
                               std::vector<std::string>* warnings);

// Minimal structural JSON-schema check (type / properties / required / items /
// enum) sufficient for the shipped report schema.
bool validate_schema(const nlohmann::json& value, const nlohmann::json& schema, std::string* error);

// fraction,A,ci_low,ci_high rows from every calibration section entry
void write_calibration_curve_csv(const nlohmann::json& merged, const std::filesystem::path& path);
// bin,accuracy rows from every trial-report section entry (empty cell on null)
void write_bin_accuracy_csv(const nlohmann::json& merged, const std::filesystem::path& path);

}  // namespace xmodal::report
