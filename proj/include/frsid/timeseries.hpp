#pragma once

// Input/output sample records and their two on-disk formats.
//
// CSV:    header "u1,...,um,y1,...,yp", one row per time step, doubles
//         printed with 17 significant digits (lossless round-trip).
// Binary: magic "FRSID1", then m, p, N_t as unsigned 64-bit little-endian,
//         then u (m x N_t) and y (p x N_t) as column-major IEEE doubles.

#include <bit>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "frsid/errors.hpp"
#include "frsid/types.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary time-series format requires a little-endian host");

namespace frsid {

/// A finite record of inputs u (m x N_t) and outputs y (p x N_t) sampled on
/// a uniform grid.
struct TimeSeriesData {
  Matrix u;  ///< m x N_t
  Matrix y;  ///< p x N_t

  Index m() const { return u.rows(); }
  Index p() const { return y.rows(); }
  Index n_samples() const { return y.cols(); }

  /// Validates shape consistency and finiteness.
  void validate() const {
    if (u.cols() != y.cols())
      throw DimensionError("time series: u and y sample counts differ");
    if (u.rows() < 1 || y.rows() < 1 || y.cols() < 1)
      throw DimensionError("time series: m, p, N_t must all be positive");
    if (!is_finite(u) || !is_finite(y))
      throw InputError("time series: non-finite sample");
  }
};

namespace detail {

constexpr char kBinaryMagic[6] = {'F', 'R', 'S', 'I', 'D', '1'};

inline void write_u64(std::ostream& out, std::uint64_t value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

inline std::uint64_t read_u64(std::istream& in, const std::string& what) {
  std::uint64_t value = 0;
  in.read(reinterpret_cast<char*>(&value), sizeof(value));
  if (!in) throw ParseError("binary time series: truncated " + what);
  return value;
}

inline double parse_double(const std::string& token, std::size_t line_no,
                           std::size_t column_no) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw ParseError("csv time series: line " + std::to_string(line_no) +
                     ", column " + std::to_string(column_no) +
                     ": not a number: '" + token + "'");
  return value;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string field = line.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    // Trim surrounding whitespace (tolerates "u1, u2" style headers).
    while (!field.empty() && std::isspace(static_cast<unsigned char>(field.front())))
      field.erase(field.begin());
    while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back())))
      field.pop_back();
    fields.push_back(std::move(field));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

inline void format_double(std::string& out, double value) {
  char buffer[64];
  const int written = std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  out.append(buffer, static_cast<std::size_t>(written));
}

}  // namespace detail

/// Writes @p ts as CSV with header u1..um,y1..yp.
inline void save_timeseries_csv(const TimeSeriesData& ts,
                                const std::string& path) {
  ts.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError("csv time series: cannot open for writing: " + path);
  std::string line;
  for (Index i = 0; i < ts.m(); ++i)
    line += "u" + std::to_string(i + 1) + ",";
  for (Index i = 0; i < ts.p(); ++i)
    line += "y" + std::to_string(i + 1) + (i + 1 < ts.p() ? "," : "");
  line += '\n';
  out << line;
  for (Index t = 0; t < ts.n_samples(); ++t) {
    line.clear();
    for (Index i = 0; i < ts.m(); ++i) {
      detail::format_double(line, ts.u(i, t));
      line += ',';
    }
    for (Index i = 0; i < ts.p(); ++i) {
      detail::format_double(line, ts.y(i, t));
      if (i + 1 < ts.p()) line += ',';
    }
    line += '\n';
    out << line;
  }
  if (!out) throw ParseError("csv time series: write failed: " + path);
}

/// Reads a CSV time series; channel counts are inferred from the header.
inline TimeSeriesData load_timeseries_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("csv time series: cannot open: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("csv time series: empty file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = detail::split_csv_line(line);
  Index m = 0;
  Index p = 0;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string& name = header[i];
    const bool is_u = name.size() >= 2 && name[0] == 'u';
    const bool is_y = name.size() >= 2 && name[0] == 'y';
    if (is_u && p == 0) {
      ++m;
    } else if (is_y) {
      ++p;
    } else {
      throw ParseError("csv time series: line 1: bad header field '" + name +
                       "' (expected u1..um then y1..yp)");
    }
  }
  if (m < 1 || p < 1)
    throw ParseError("csv time series: line 1: header must list u and y channels");

  std::vector<double> values;
  std::size_t line_no = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != static_cast<std::size_t>(m + p))
      throw ParseError("csv time series: line " + std::to_string(line_no) +
                       ": expected " + std::to_string(m + p) + " fields, got " +
                       std::to_string(fields.size()));
    for (std::size_t i = 0; i < fields.size(); ++i)
      values.push_back(detail::parse_double(fields[i], line_no, i + 1));
    ++rows;
  }
  if (rows == 0) throw ParseError("csv time series: no data rows: " + path);

  TimeSeriesData ts;
  ts.u.resize(m, static_cast<Index>(rows));
  ts.y.resize(p, static_cast<Index>(rows));
  for (std::size_t t = 0; t < rows; ++t) {
    const double* row = values.data() + t * static_cast<std::size_t>(m + p);
    for (Index i = 0; i < m; ++i) ts.u(i, static_cast<Index>(t)) = row[i];
    for (Index i = 0; i < p; ++i) ts.y(i, static_cast<Index>(t)) = row[m + i];
  }
  ts.validate();
  return ts;
}

/// Writes @p ts in the FRSID1 binary container.
inline void save_timeseries_binary(const TimeSeriesData& ts,
                                   const std::string& path) {
  ts.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw ParseError("binary time series: cannot open for writing: " + path);
  out.write(detail::kBinaryMagic, sizeof(detail::kBinaryMagic));
  detail::write_u64(out, static_cast<std::uint64_t>(ts.m()));
  detail::write_u64(out, static_cast<std::uint64_t>(ts.p()));
  detail::write_u64(out, static_cast<std::uint64_t>(ts.n_samples()));
  out.write(reinterpret_cast<const char*>(ts.u.data()),
            static_cast<std::streamsize>(sizeof(double) * ts.u.size()));
  out.write(reinterpret_cast<const char*>(ts.y.data()),
            static_cast<std::streamsize>(sizeof(double) * ts.y.size()));
  if (!out) throw ParseError("binary time series: write failed: " + path);
}

/// Reads an FRSID1 binary time series.
inline TimeSeriesData load_timeseries_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("binary time series: cannot open: " + path);
  char magic[6] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, detail::kBinaryMagic, sizeof(magic)) != 0)
    throw ParseError("binary time series: bad magic (expected FRSID1): " + path);
  const std::uint64_t m = detail::read_u64(in, "m");
  const std::uint64_t p = detail::read_u64(in, "p");
  const std::uint64_t n_samples = detail::read_u64(in, "N_t");
  constexpr std::uint64_t kMaxElements = (1ULL << 40);  // 8 TiB guard
  if (m == 0 || p == 0 || n_samples == 0 ||
      (m + p) * n_samples > kMaxElements)
    throw ParseError("binary time series: implausible dimensions in header");

  TimeSeriesData ts;
  ts.u.resize(static_cast<Index>(m), static_cast<Index>(n_samples));
  ts.y.resize(static_cast<Index>(p), static_cast<Index>(n_samples));
  const std::streamsize u_bytes =
      static_cast<std::streamsize>(sizeof(double) * ts.u.size());
  const std::streamsize y_bytes =
      static_cast<std::streamsize>(sizeof(double) * ts.y.size());
  in.read(reinterpret_cast<char*>(ts.u.data()), u_bytes);
  if (in.gcount() != u_bytes)
    throw ParseError("binary time series: truncated u payload (expected " +
                     std::to_string(u_bytes) + " bytes, got " +
                     std::to_string(in.gcount()) + ")");
  in.read(reinterpret_cast<char*>(ts.y.data()), y_bytes);
  if (in.gcount() != y_bytes)
    throw ParseError("binary time series: truncated y payload (expected " +
                     std::to_string(y_bytes) + " bytes, got " +
                     std::to_string(in.gcount()) + ")");
  ts.validate();
  return ts;
}

/// Loads a time series, choosing the format by file extension
/// (".csv" -> CSV, anything else -> binary).
inline TimeSeriesData load_timeseries(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
    return load_timeseries_csv(path);
  return load_timeseries_binary(path);
}

/// Saves a time series, choosing the format by file extension.
inline void save_timeseries(const TimeSeriesData& ts, const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
    save_timeseries_csv(ts, path);
  else
    save_timeseries_binary(ts, path);
}

}  // namespace frsid
