#include "qwem/text_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "qwem/error.hpp"

namespace qwem {

namespace {
constexpr std::size_t kChunk = 1 << 16;
}

struct LineReader::Impl {
  std::FILE* file = nullptr;
  bool gz = false;
  z_stream zs{};
  std::vector<unsigned char> in_buf;
  std::vector<unsigned char> out_buf;
  std::size_t out_pos = 0;
  std::size_t out_len = 0;
  bool eof = false;

  explicit Impl(const std::string& path) {
    file = std::fopen(path.c_str(), "rb");
    if (!file) throw DataError("cannot open input file: " + path);
    int c0 = std::fgetc(file);
    int c1 = std::fgetc(file);
    gz = (c0 == 0x1f && c1 == 0x8b);
    std::rewind(file);
    if (gz) {
      in_buf.resize(kChunk);
      out_buf.resize(kChunk);
      zs.zalloc = Z_NULL;
      zs.zfree = Z_NULL;
      zs.opaque = Z_NULL;
      // 16+MAX_WBITS selects gzip framing.
      if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
        throw DataError("gzip init failed for: " + path);
    } else {
      out_buf.resize(kChunk);
    }
  }

  ~Impl() {
    if (gz) inflateEnd(&zs);
    if (file) std::fclose(file);
  }

  // Refills out_buf; returns false when the source is exhausted.
  bool refill() {
    out_pos = 0;
    out_len = 0;
    if (eof) return false;
    if (!gz) {
      out_len = std::fread(out_buf.data(), 1, out_buf.size(), file);
      if (out_len == 0) eof = true;
      return out_len > 0;
    }
    while (out_len == 0) {
      if (zs.avail_in == 0) {
        const std::size_t n = std::fread(in_buf.data(), 1, in_buf.size(), file);
        if (n == 0) {
          eof = true;
          return false;
        }
        zs.next_in = in_buf.data();
        zs.avail_in = static_cast<uInt>(n);
      }
      zs.next_out = out_buf.data();
      zs.avail_out = static_cast<uInt>(out_buf.size());
      const int rc = inflate(&zs, Z_NO_FLUSH);
      if (rc != Z_OK && rc != Z_STREAM_END)
        throw DataError("gzip inflate error (code " + std::to_string(rc) + ")");
      out_len = out_buf.size() - zs.avail_out;
      if (rc == Z_STREAM_END) {
        // Support concatenated gzip members.
        if (zs.avail_in == 0 && std::feof(file)) {
          eof = out_len == 0 ? true : false;
          if (out_len == 0) return false;
          inflateReset(&zs);
          return true;
        }
        inflateReset(&zs);
      }
      if (out_len > 0) return true;
    }
    return true;
  }
};

LineReader::LineReader(const std::string& path) : impl_(std::make_unique<Impl>(path)) {}
LineReader::~LineReader() = default;
LineReader::LineReader(LineReader&&) noexcept = default;
LineReader& LineReader::operator=(LineReader&&) noexcept = default;

bool LineReader::next_line(std::string& out) {
  out.clear();
  bool saw_any = false;
  for (;;) {
    if (impl_->out_pos >= impl_->out_len) {
      if (!impl_->refill()) break;
    }
    const unsigned char* base = impl_->out_buf.data();
    const std::size_t avail = impl_->out_len - impl_->out_pos;
    const void* nl = std::memchr(base + impl_->out_pos, '\n', avail);
    if (nl) {
      const std::size_t idx = static_cast<const unsigned char*>(nl) - base;
      out.append(reinterpret_cast<const char*>(base + impl_->out_pos), idx - impl_->out_pos);
      impl_->out_pos = idx + 1;
      return true;
    }
    out.append(reinterpret_cast<const char*>(base + impl_->out_pos), avail);
    impl_->out_pos = impl_->out_len;
    saw_any = true;
  }
  return saw_any || !out.empty();
}

namespace {

template <typename T>
void write_le(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little,
                "serialization assumes a little-endian host");
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw DataError("unexpected end of binary payload");
  return v;
}

}  // namespace

void write_u64_le(std::ostream& os, std::uint64_t v) { write_le(os, v); }
void write_u32_le(std::ostream& os, std::uint32_t v) { write_le(os, v); }
void write_f64_le(std::ostream& os, double v) { write_le(os, v); }
std::uint64_t read_u64_le(std::istream& is) { return read_le<std::uint64_t>(is); }
std::uint32_t read_u32_le(std::istream& is) { return read_le<std::uint32_t>(is); }
double read_f64_le(std::istream& is) { return read_le<double>(is); }

std::string file_checksum(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open file for checksum: " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 14];
  while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
    const std::streamsize n = is.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (!is) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + hex;
}

std::string string_checksum(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + hex;
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open file for writing: " + path);
  os << content;
  if (!os) throw DataError("write failed: " + path);
}

}  // namespace qwem
