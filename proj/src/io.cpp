#include "xmodal/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "xmodal/error.hpp"

namespace xmodal::io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::io_failure, "cannot open " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  if (in.bad()) fail(errc::io_failure, "read failed for " + path.string());
  return out.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(errc::io_failure, "cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) fail(errc::io_failure, "write failed for " + path.string());
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
  std::vector<nlohmann::json> lines;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json parsed = nlohmann::json::parse(line, nullptr, false);
    if (parsed.is_discarded())
      fail(errc::malformed_record, path.string() + ":" + std::to_string(lineno) + ": invalid JSON");
    lines.push_back(std::move(parsed));
  }
  return lines;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& lines) {
  std::string out;
  for (const auto& line : lines) {
    out += line.dump();
    out += '\n';
  }
  write_file(path, out);
}

nlohmann::json read_json(const std::filesystem::path& path) {
  nlohmann::json parsed = nlohmann::json::parse(read_file(path), nullptr, false);
  if (parsed.is_discarded()) fail(errc::malformed_record, path.string() + ": invalid JSON");
  return parsed;
}

// one pass over the whole buffer so quoted fields may span lines
Csv read_csv(const std::filesystem::path& path, bool has_header) {
  Csv csv;
  const std::string text = read_file(path);
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool row_has_content = false;
  std::size_t lineno = 1, row_line = 1;

  auto flush_row = [&] {
    if (quoted)
      fail(errc::malformed_record,
           path.string() + ":" + std::to_string(row_line) + ": unterminated quote");
    if (row_has_content) {
      fields.push_back(std::move(cur));
      if (has_header && csv.header.empty() && csv.rows.empty()) csv.header = std::move(fields);
      else csv.rows.push_back(std::move(fields));
    }
    cur.clear();
    fields.clear();
    row_has_content = false;
    row_line = lineno;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++lineno;
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
      row_has_content = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      row_has_content = true;
    } else if (c == '\n') {
      ++lineno;
      flush_row();
    } else if (c != '\r') {
      cur += c;
      row_has_content = true;
    }
  }
  flush_row();  // a final record without a trailing newline still counts
  return csv;
}

std::string csv_field(std::string_view raw) {
  if (raw.find_first_of(",\"\n") == std::string_view::npos) return std::string(raw);
  std::string quoted = "\"";
  for (char c : raw) {
    if (c == '"') quoted += "\"\"";
    else quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string format_double(double value, int sig) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", sig, value);
  return buf;
}

}  // namespace xmodal::io
