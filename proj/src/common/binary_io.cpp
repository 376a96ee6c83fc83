#include "latefuse/common/binary_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include "latefuse/common/error.hpp"

namespace latefuse::io {

namespace {

template <typename Word>
Word to_little(Word w) {
  if constexpr (std::endian::native == std::endian::big) {
    Word out = 0;
    for (std::size_t i = 0; i < sizeof(Word); ++i) {
      out = (out << 8) | (w & 0xFF);
      w >>= 8;
    }
    return out;
  }
  return w;
}

}  // namespace

std::vector<std::uint8_t> encode_f32(std::span<const double> values) {
  std::vector<std::uint8_t> out(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto w = to_little(std::bit_cast<std::uint32_t>(static_cast<float>(values[i])));
    std::memcpy(out.data() + 4 * i, &w, 4);
  }
  return out;
}

std::vector<double> decode_f32(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 4 != 0) throw FormatError("float32 payload length is not a multiple of 4");
  std::vector<double> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t w;
    std::memcpy(&w, bytes.data() + 4 * i, 4);
    out[i] = static_cast<double>(std::bit_cast<float>(to_little(w)));
  }
  return out;
}

std::vector<std::uint8_t> encode_f64(std::span<const double> values) {
  std::vector<std::uint8_t> out(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto w = to_little(std::bit_cast<std::uint64_t>(values[i]));
    std::memcpy(out.data() + 8 * i, &w, 8);
  }
  return out;
}

std::vector<double> decode_f64(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 8 != 0) throw FormatError("float64 payload length is not a multiple of 8");
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t w;
    std::memcpy(&w, bytes.data() + 8 * i, 8);
    out[i] = std::bit_cast<double>(to_little(w));
  }
  return out;
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - offset, 1u << 30));
    crc = ::crc32(crc, bytes.data() + offset, chunk);
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string crc32_hex(std::span<const std::uint8_t> bytes) {
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08x", crc32(bytes));
  return buf;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("short write to " + path.string());
}

}  // namespace latefuse::io
