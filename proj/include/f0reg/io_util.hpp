#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "f0reg/error.hpp"

namespace f0reg::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

/// Writes through a sibling temporary file and renames it into place, so a
/// failed write never leaves a partial file at `path`.
void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer);

/// Whole file as bytes.
std::vector<char> read_file(const std::filesystem::path& path);

template <typename T>
void put(std::string& buf, T v) {
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buf.append(raw, sizeof(T));
}

/// Bounds-checked little-endian reader with byte-offset error messages.
class ByteReader {
 public:
  ByteReader(const std::vector<char>& data, std::string source)
      : data_(data), source_(std::move(source)) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

  void need(std::size_t n, std::string_view what) const;

  template <typename T>
  T get(std::string_view what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string_view bytes(std::size_t n, std::string_view what);
  void seek(std::size_t pos, std::string_view what);

 private:
  const std::vector<char>& data_;
  std::string source_;
  std::size_t pos_ = 0;
};

/// Hz value for CSV output: unvoiced frames print as "0.0", others with ten
/// significant digits.
std::string format_hz(double hz);

/// Splits one CSV line on commas (no quoting).
std::vector<std::string> split_csv_line(const std::string& line);
double parse_double(const std::string& field, const std::string& context);

}  // namespace f0reg::io
