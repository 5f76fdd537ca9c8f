#pragma once

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "plugwatt/error.hpp"

namespace plugwatt::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

struct Table {
  std::string file;
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Column position by name; throws naming the missing column.
  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ParseError(file, 1, "missing header column '" + std::string(name) + "'");
  }

  std::optional<std::size_t> find_column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
};

/// RFC 4180 parser: quoted fields, doubled quotes, CRLF or LF line ends,
/// newlines inside quotes. A trailing blank line is ignored.
inline Table parse(std::string_view text, std::string file = "<memory>") {
  Table t;
  t.file = std::move(file);
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::string> record;
  std::string field;
  std::size_t line = 1, record_line = 1;
  bool in_quotes = false, field_quoted = false, any = false;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    bool blank = record.size() == 1 && record[0].empty() && !field_quoted;
    if (!blank) {
      if (t.header.empty() && t.rows.empty() && record_line == 1)
        t.header = std::move(record);
      else
        t.rows.push_back({record_line, std::move(record)});
    }
    record.clear();
    field_quoted = false;
    any = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) throw ParseError(t.file, line, "stray quote inside unquoted field");
        in_quotes = true;
        field_quoted = true;
        any = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_quoted = false;
        any = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        if (field_quoted) throw ParseError(t.file, line, "characters after closing quote");
        field.push_back(c);
        any = true;
    }
  }
  if (in_quotes) throw ParseError(t.file, record_line, "unterminated quoted field");
  if (any || !field.empty()) end_record();
  if (t.header.empty()) throw ParseError(t.file, 1, "empty file (no header row)");
  for (const auto& r : t.rows)
    if (r.fields.size() != t.header.size())
      throw ParseError(t.file, r.line,
                       "expected " + std::to_string(t.header.size()) + " fields, got " +
                           std::to_string(r.fields.size()));
  return t;
}

inline Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

inline double to_double(const std::string& s, const Table& t, const Row& r, std::string_view col) {
  double v = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || s.empty())
    throw ParseError(t.file, r.line, "column '" + std::string(col) + "': not a number: '" + s + "'");
  return v;
}

inline long long to_integer(const std::string& s, const Table& t, const Row& r,
                            std::string_view col) {
  long long v = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || s.empty())
    throw ParseError(t.file, r.line, "column '" + std::string(col) + "': not an integer: '" + s + "'");
  return v;
}

/// Shortest representation that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline std::string quote(std::string_view f) {
  if (f.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(f);
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  Writer& row(std::initializer_list<std::string_view> fields) {
    bool first = true;
    for (auto f : fields) {
      if (!first) out_ << ',';
      out_ << quote(f);
      first = false;
    }
    out_ << '\n';
    return *this;
  }

  Writer& row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << quote(fields[i]);
    }
    out_ << '\n';
    return *this;
  }

 private:
  std::ostream& out_;
};

}  // namespace plugwatt::csv
