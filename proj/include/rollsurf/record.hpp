#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rollsurf {

// One self-describing text record: a name followed by key=value fields,
// all on one line. The format is the wire protocol of the control plane
// and the base layer of the scene/cache/manifest files.
struct Record {
  std::string name;
  std::vector<std::pair<std::string, std::string>> fields;

  std::optional<std::string> find(std::string_view key) const {
    for (const auto& [k, v] : fields)
      if (k == key) return v;
    return std::nullopt;
  }
  const std::string& at(std::string_view key) const {
    for (const auto& [k, v] : fields)
      if (k == key) return v;
    throw std::out_of_range("record '" + name + "' missing field '" +
                            std::string(key) + "'");
  }
  void add(std::string key, std::string value) {
    fields.emplace_back(std::move(key), std::move(value));
  }
};

struct RecordError : std::runtime_error {
  RecordError(std::size_t byte_offset, const std::string& what)
      : std::runtime_error("byte " + std::to_string(byte_offset) + ": " + what),
        offset(byte_offset) {}
  std::size_t offset;
};

namespace textio {

inline bool is_token_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
         c == '.' || c == '/' || c == '#';
}

// Values are percent-encoded so a record always fits on one line.
inline std::string escape_value(std::string_view v) {
  std::string out;
  out.reserve(v.size());
  for (char c : v) {
    if (c == '%' || c == ' ' || c == '=' || c == '\n' || c == '\r') {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", static_cast<unsigned char>(c));
      out += buf;
    } else {
      out += c;
    }
  }
  return out;
}

inline std::string unescape_value(std::string_view v, std::size_t base_offset) {
  std::string out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != '%') {
      out += v[i];
      continue;
    }
    if (i + 2 >= v.size()) throw RecordError(base_offset + i, "truncated escape");
    auto hex = [&](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      throw RecordError(base_offset + i, "bad escape digit");
    };
    out += static_cast<char>(hex(v[i + 1]) * 16 + hex(v[i + 2]));
    i += 2;
  }
  return out;
}

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

}  // namespace textio

inline std::string encode_record(const Record& r) {
  std::string line = r.name;
  for (const auto& [k, v] : r.fields) {
    line += ' ';
    line += k;
    line += '=';
    line += textio::escape_value(v);
  }
  line += '\n';
  return line;
}

// Parses one line (without the trailing newline). base_offset is the byte
// position of the line start within the surrounding stream, used to report
// malformed input precisely.
inline Record parse_record(std::string_view line, std::size_t base_offset = 0) {
  Record rec;
  std::size_t i = 0;
  const auto skip_spaces = [&] {
    while (i < line.size() && line[i] == ' ') ++i;
  };
  skip_spaces();
  const std::size_t name_start = i;
  while (i < line.size() && textio::is_token_char(line[i])) ++i;
  if (i == name_start) throw RecordError(base_offset + i, "missing record name");
  rec.name = std::string(line.substr(name_start, i - name_start));
  while (i < line.size()) {
    skip_spaces();
    if (i >= line.size()) break;
    const std::size_t key_start = i;
    while (i < line.size() && textio::is_token_char(line[i])) ++i;
    if (i == key_start || i >= line.size() || line[i] != '=')
      throw RecordError(base_offset + i, "expected key=value");
    const std::string key(line.substr(key_start, i - key_start));
    ++i;  // '='
    const std::size_t val_start = i;
    while (i < line.size() && line[i] != ' ') ++i;
    rec.add(key, textio::unescape_value(line.substr(val_start, i - val_start),
                                        base_offset + val_start));
  }
  return rec;
}

// Splits a buffer into records, one per line. Blank lines and '#' comments
// are skipped. Throws RecordError with the byte offset of the offense.
inline std::vector<Record> parse_records(std::string_view buffer) {
  std::vector<Record> out;
  std::size_t pos = 0;
  while (pos < buffer.size()) {
    std::size_t eol = buffer.find('\n', pos);
    if (eol == std::string_view::npos) eol = buffer.size();
    std::string_view line = buffer.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::size_t first = line.find_first_not_of(' ');
    if (first != std::string_view::npos && line[first] != '#')
      out.push_back(parse_record(line, pos));
    pos = eol + 1;
  }
  return out;
}

}  // namespace rollsurf
