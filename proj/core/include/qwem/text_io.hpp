#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>

namespace qwem {

// Streams one document (= one line) at a time from a newline-delimited UTF-8
// file, transparently inflating gzip input (detected by the 1f 8b magic).
// Memory use is bounded by the longest single line.
class LineReader {
 public:
  explicit LineReader(const std::string& path);
  ~LineReader();
  LineReader(LineReader&&) noexcept;
  LineReader& operator=(LineReader&&) noexcept;

  // Returns false at end of input. The trailing newline is stripped.
  bool next_line(std::string& out);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Little-endian binary primitives shared by the .sgs and .mxc containers.
void write_u64_le(std::ostream& os, std::uint64_t v);
void write_u32_le(std::ostream& os, std::uint32_t v);
void write_f64_le(std::ostream& os, double v);
std::uint64_t read_u64_le(std::istream& is);
std::uint32_t read_u32_le(std::istream& is);
double read_f64_le(std::istream& is);

// FNV-1a over a file's bytes, hex-encoded; used for manifest input checksums.
std::string file_checksum(const std::string& path);

// Same hash over an in-memory buffer; used for config fingerprints.
std::string string_checksum(std::string_view data);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace qwem
