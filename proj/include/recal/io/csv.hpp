#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "recal/error.hpp"
#include "recal/frame.hpp"

namespace recal::io {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

/// Comma-separated, header row required, '.' decimal point. Every field must
/// parse as a number; blank or non-numeric fields are rejected with their
/// row number (1-based, counting the header as row 1).
inline Frame read_csv(std::istream& in, std::string_view source = "<stream>") {
  std::string line;
  std::size_t row = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    for (auto h : detail::split(line)) header.emplace_back(h);
    break;
  }
  if (header.empty()) fail(Errc::SchemaError, std::string(source) + ": missing header row");
  if (!header.empty() && header[0].size() >= 3 && header[0].compare(0, 3, "\xEF\xBB\xBF") == 0) header[0].erase(0, 3);
  for (const auto& h : header) {
    if (h.empty()) fail(Errc::SchemaError, std::string(source) + ": empty column name in header");
  }

  std::vector<std::vector<double>> cols(header.size());
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split(line);
    if (fields.size() != header.size()) {
      fail(Errc::SchemaError, std::string(source) + ": row " + std::to_string(row) + " has " +
                                  std::to_string(fields.size()) + " fields, header has " + std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const auto f = fields[j];
      if (f.empty() || f == "NA" || f == "NaN" || f == "nan") {
        fail(Errc::SchemaError, std::string(source) + ": row " + std::to_string(row) + ", column '" + header[j] +
                                    "': missing value (complete cases required)");
      }
      double v = 0.0;
      const char* first = f.data();
      if (*first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        fail(Errc::SchemaError, std::string(source) + ": row " + std::to_string(row) + ", column '" + header[j] +
                                    "': cannot parse '" + std::string(f) + "' as a number");
      }
      cols[j].push_back(v);
    }
  }
  Frame frame;
  for (std::size_t j = 0; j < header.size(); ++j) frame.add(header[j], std::move(cols[j]));
  return frame;
}

inline Frame read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::SchemaError, "cannot open '" + path + "'");
  return read_csv(in, path);
}

/// Shortest round-trip representation, so write → read is bit-exact.
inline void write_csv(const Frame& frame, std::ostream& out) {
  const auto& names = frame.names();
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << '\n';
  std::vector<std::span<const double>> cols;
  for (const auto& n : names) cols.push_back(frame.col(n));
  char buf[64];
  for (std::size_t i = 0; i < frame.rows(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, cols[j][i]);
      if (j) out << ',';
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
}

inline void write_csv(const Frame& frame, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::SchemaError, "cannot write '" + path + "'");
  write_csv(frame, out);
}

}  // namespace recal::io
