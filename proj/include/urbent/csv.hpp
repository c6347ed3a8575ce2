#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace urbent::csv {

/// Splits one CSV record. Double-quoted fields may contain commas and `""`
/// escapes. Returns nullopt on an unterminated quote or stray characters
/// after a closing quote.
inline std::optional<std::vector<std::string>> split_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  std::size_t i = 0;
  bool field_start = true;
  while (true) {
    if (field_start && i < line.size() && line[i] == '"') {
      ++i;
      bool closed = false;
      while (i < line.size()) {
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            cur.push_back('"');
            i += 2;
          } else {
            ++i;
            closed = true;
            break;
          }
        } else {
          cur.push_back(line[i++]);
        }
      }
      if (!closed) return std::nullopt;
      if (i < line.size() && line[i] != ',') return std::nullopt;
    }
    while (i < line.size() && line[i] != ',') {
      cur.push_back(line[i++]);
    }
    fields.push_back(std::move(cur));
    cur.clear();
    if (i >= line.size()) break;
    ++i;  // comma
    field_start = true;
  }
  return fields;
}

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace urbent::csv
