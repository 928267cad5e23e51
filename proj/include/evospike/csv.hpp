#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "evospike/errors.hpp"

namespace evospike {
namespace csv {

// Shortest round-trip decimal form of a double. %.17g guarantees the
// parsed value is bit-identical, and the fixed format keeps files
// byte-stable across runs and worker counts.
inline std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return std::string(buf);
}

inline double parse_double(const std::string& text) {
  // std::from_chars round-trips every value format_double can emit,
  // including subnormals (std::stod reports those as out of range).
  double value = 0.0;
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), last, value);
  if (ec != std::errc{}) {
    throw IoError("csv: cannot parse number '" + text + "'");
  }
  if (ptr != last) {
    throw IoError("csv: trailing characters in number '" + text + "'");
  }
  return value;
}

inline long long parse_int(const std::string& text) {
  try {
    std::size_t consumed = 0;
    const long long value = std::stoll(text, &consumed);
    if (consumed != text.size()) {
      throw IoError("csv: trailing characters in integer '" + text + "'");
    }
    return value;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw IoError("csv: cannot parse integer '" + text + "'");
  }
}

// Minimal dialect: comma-separated, no quoting (writers never emit commas
// inside fields), '#' lines are metadata comments.
inline std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

struct Table {
  std::vector<std::string> comments;  // '#' lines, stripped of the marker
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw IoError("csv: missing column '" + name + "'");
  }
};

class Writer {
 public:
  explicit Writer(const std::string& path) : path_(path), out_(path) {
    if (!out_) throw IoError("cannot open '" + path + "' for writing");
  }

  void comment(const std::string& text) { out_ << "# " << text << "\n"; }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
  }

  void close() {
    out_.flush();
    if (!out_) throw IoError("write failed for '" + path_ + "'");
    out_.close();
  }

 private:
  std::string path_;
  std::ofstream out_;
};

inline Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  Table table;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::size_t start = 1;
      if (start < line.size() && line[start] == ' ') ++start;
      table.comments.push_back(line.substr(start));
      continue;
    }
    if (!header_seen) {
      table.header = split_row(line);
      header_seen = true;
    } else {
      table.rows.push_back(split_row(line));
    }
  }
  if (!header_seen) throw IoError("csv: '" + path + "' has no header row");
  return table;
}

}  // namespace csv
}  // namespace evospike
