#pragma once

// Deterministic CSV emission: '.' decimal point, 12 significant digits, LF
// line endings. Golden-file tests depend on this formatting staying fixed.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace apricot {

inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct CsvField {
  std::string text;
  CsvField(double v) : text(csv_num(v)) {}
  CsvField(int v) : text(std::to_string(v)) {}
  CsvField(std::int64_t v) : text(std::to_string(v)) {}
  CsvField(std::uint64_t v) : text(std::to_string(v)) {}
  CsvField(const char* s) : text(s) {}
  CsvField(std::string s) : text(std::move(s)) {}
};

class CsvWriter {
 public:
  void row(std::initializer_list<CsvField> fields) {
    bool first = true;
    for (const auto& f : fields) {
      if (!first) out_ += ',';
      out_ += f.text;
      first = false;
    }
    out_ += '\n';
  }
  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

// Write via a temp file in the same directory, then rename into place.
inline void atomic_write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + tmp);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("rename failed: " + path + ": " + ec.message());
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string s((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return s;
}

}  // namespace apricot
