#include "f0reg/io_util.hpp"

#include <charconv>
#include <cstdio>
#include <system_error>

namespace f0reg::io {

void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    try {
      writer(out);
    } catch (...) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw;
    }
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void ByteReader::need(std::size_t n, std::string_view what) const {
  if (remaining() < n)
    throw IoError(source_ + ": truncated " + std::string(what) + " at byte offset " +
                  std::to_string(pos_) + ": expected " + std::to_string(n) +
                  " bytes, found " + std::to_string(remaining()));
}

std::string_view ByteReader::bytes(std::size_t n, std::string_view what) {
  need(n, what);
  std::string_view v(data_.data() + pos_, n);
  pos_ += n;
  return v;
}

void ByteReader::seek(std::size_t pos, std::string_view what) {
  if (pos > data_.size())
    throw IoError(source_ + ": " + std::string(what) + " offset " + std::to_string(pos) +
                  " lies beyond end of file (" + std::to_string(data_.size()) + " bytes)");
  pos_ = pos;
}

std::string format_hz(double hz) {
  if (hz == 0.0) return "0.0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", hz);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& field, const std::string& context) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first < last && *first == ' ') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw IoError(context + ": cannot parse number '" + field + "'");
  return v;
}

}  // namespace f0reg::io
