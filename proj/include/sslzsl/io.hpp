#pragma once

// File formats.
//
// CSV matrix : decimal floats separated by commas, one matrix row per line, no header.
// BIN matrix : "ZSLM" | u8 version (1) | u8 dtype (1 = f32, 2 = f64) | u64 rows | u64 cols
//              | rows*cols values, row-major. All integers and values little-endian.
// Labels     : one non-negative integer per line.
// Key/value  : "key=value" lines; blank lines and lines starting with '#' are ignored.

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "sslzsl/error.hpp"
#include "sslzsl/matrix.hpp"

namespace sslzsl {

enum class MatrixFormat { csv, bin };

enum class BinDtype : std::uint8_t { f32 = 1, f64 = 2 };

inline constexpr std::array<char, 4> kBinMagic = {'Z', 'S', 'L', 'M'};
inline constexpr std::uint8_t kBinVersion = 1;

/// ".csv" means CSV, anything else BIN.
inline MatrixFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? MatrixFormat::csv : MatrixFormat::bin;
}

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  auto bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(bits & 0xFFu));
    bits = static_cast<U>(bits >> 8);
  }
}

template <typename T>
T get_le(std::string_view bytes, std::size_t offset) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<U>(static_cast<U>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i));
  }
  return std::bit_cast<T>(bits);
}

inline Matrix parse_csv(std::string_view text, const std::string& origin) {
  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;

    std::size_t count = 0;
    std::size_t field_start = 0;
    while (true) {
      auto comma = line.find(',', field_start);
      const auto field = trim(line.substr(field_start, comma == std::string_view::npos
                                                           ? std::string_view::npos
                                                           : comma - field_start));
      double v = 0.0;
      auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw ParseError(origin + ": line " + std::to_string(line_no) + ", column " +
                         std::to_string(count + 1) + ": cannot parse '" + std::string(field) + "'");
      }
      if (!std::isfinite(v)) {
        throw ParseError(origin + ": non-finite entry at row " + std::to_string(rows) +
                         ", column " + std::to_string(count));
      }
      data.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      field_start = comma + 1;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw ParseError(origin + ": ragged row at line " + std::to_string(line_no) + " (" +
                       std::to_string(count) + " values, expected " + std::to_string(cols) + ")");
    }
    ++rows;
  }
  return Matrix(rows, cols, std::move(data));
}

inline Matrix parse_bin(std::string_view bytes, const std::string& origin) {
  constexpr std::size_t header = 4 + 1 + 1 + 8 + 8;
  if (bytes.size() < header) throw ParseError(origin + ": truncated header");
  if (std::memcmp(bytes.data(), kBinMagic.data(), kBinMagic.size()) != 0) {
    throw ParseError(origin + ": bad magic at offset 0");
  }
  if (static_cast<std::uint8_t>(bytes[4]) != kBinVersion) {
    throw ParseError(origin + ": unsupported version at offset 4");
  }
  const auto dtype = static_cast<std::uint8_t>(bytes[5]);
  if (dtype != 1 && dtype != 2) throw ParseError(origin + ": unknown dtype code at offset 5");
  const auto rows = get_le<std::uint64_t>(bytes, 6);
  const auto cols = get_le<std::uint64_t>(bytes, 14);
  const std::size_t width = dtype == 1 ? 4 : 8;
  if (cols != 0 && rows > SIZE_MAX / width / cols) {
    throw ParseError(origin + ": shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                     " overflows");
  }
  const std::size_t count = rows * cols;
  if (bytes.size() != header + count * width) {
    throw ParseError(origin + ": payload size " + std::to_string(bytes.size() - header) +
                     " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  std::vector<double> data(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t off = header + k * width;
    const double v = dtype == 1 ? static_cast<double>(get_le<float>(bytes, off))
                                : get_le<double>(bytes, off);
    if (!std::isfinite(v)) {
      throw ParseError(origin + ": non-finite entry at row " + std::to_string(k / cols) +
                       ", column " + std::to_string(k % cols) + " (offset " +
                       std::to_string(off) + ")");
    }
    data[k] = v;
  }
  return Matrix(rows, cols, std::move(data));
}

}  // namespace detail

inline std::string to_csv(const Matrix& m) {
  std::string out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out.push_back(',');
      out += format_double(m(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

inline std::string to_bin(const Matrix& m, BinDtype dtype = BinDtype::f64) {
  std::string out(kBinMagic.begin(), kBinMagic.end());
  out.push_back(static_cast<char>(kBinVersion));
  out.push_back(static_cast<char>(dtype));
  detail::put_le<std::uint64_t>(out, m.rows());
  detail::put_le<std::uint64_t>(out, m.cols());
  for (double v : m.values()) {
    if (dtype == BinDtype::f32) {
      detail::put_le<float>(out, static_cast<float>(v));
    } else {
      detail::put_le<double>(out, v);
    }
  }
  return out;
}

inline Matrix parse_matrix(std::string_view contents, MatrixFormat format,
                           const std::string& origin = "<memory>") {
  return format == MatrixFormat::csv ? detail::parse_csv(contents, origin)
                                     : detail::parse_bin(contents, origin);
}

inline Matrix load_matrix(const std::filesystem::path& path, MatrixFormat format) {
  return parse_matrix(detail::read_text(path), format, path.string());
}

inline Matrix load_matrix(const std::filesystem::path& path) {
  return load_matrix(path, format_for_path(path));
}

inline void save_matrix(const std::filesystem::path& path, const Matrix& m, MatrixFormat format) {
  detail::write_text(path, format == MatrixFormat::csv ? to_csv(m) : to_bin(m));
}

inline void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  save_matrix(path, m, format_for_path(path));
}

using Labels = std::vector<std::size_t>;

inline Labels load_labels(const std::filesystem::path& path) {
  const std::string text = detail::read_text(path);
  Labels out;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty()) continue;
    std::size_t v = 0;
    auto res = std::from_chars(line.data(), line.data() + line.size(), v);
    if (res.ec != std::errc() || res.ptr != line.data() + line.size()) {
      throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                       ": expected a non-negative integer label");
    }
    out.push_back(v);
  }
  return out;
}

inline void save_labels(const std::filesystem::path& path, const Labels& labels) {
  std::string out;
  for (auto l : labels) out += std::to_string(l) + "\n";
  detail::write_text(path, out);
}

/// Ordered key/value store backing manifests and config files.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::string_view text, const std::string& origin = "<memory>") {
    KeyValueFile kv;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      const auto line = detail::trim(text.substr(pos, nl - pos));
      pos = nl + 1;
      ++line_no;
      if (line.empty() || line.front() == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ParseError(origin + ": line " + std::to_string(line_no) + ": expected key=value");
      }
      kv.set(std::string(detail::trim(line.substr(0, eq))),
             std::string(detail::trim(line.substr(eq + 1))));
    }
    return kv;
  }

  static KeyValueFile load(const std::filesystem::path& path) {
    return parse(detail::read_text(path), path.string());
  }

  void save(const std::filesystem::path& path) const { detail::write_text(path, str()); }

  std::string str() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
    return out;
  }

  void set(std::string key, std::string value) { entries_[std::move(key)] = std::move(value); }
  void set(std::string key, double value) { set(std::move(key), format_double(value)); }
  void set(std::string key, std::uint64_t value) { set(std::move(key), std::to_string(value)); }

  bool contains(const std::string& key) const { return entries_.count(key) != 0; }

  std::optional<std::string> get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  std::string require(const std::string& key) const {
    auto v = get(key);
    if (!v) throw DataError("missing key '" + key + "'");
    return *v;
  }

  double get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    double out = 0.0;
    auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size()) {
      throw ParseError("key '" + key + "': expected a number, got '" + *v + "'");
    }
    return out;
  }

  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size()) {
      throw ParseError("key '" + key + "': expected an unsigned integer, got '" + *v + "'");
    }
    return out;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    if (*v == "1" || *v == "true" || *v == "yes") return true;
    if (*v == "0" || *v == "false" || *v == "no") return false;
    throw ParseError("key '" + key + "': expected a boolean, got '" + *v + "'");
  }

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace sslzsl
