#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace xmodal::io {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// One JSON object per non-blank line.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& lines);

nlohmann::json read_json(const std::filesystem::path& path);

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Minimal RFC-4180-ish reader/writer: fields are quoted when they contain
// commas, quotes or newlines. `has_header` consumes the first row as header.
Csv read_csv(const std::filesystem::path& path, bool has_header);
std::string csv_field(std::string_view raw);

// shortest-of-%g formatting with `sig` significant digits
std::string format_double(double value, int sig = 9);

}  // namespace xmodal::io
