#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace latefuse::io {

// Little-endian IEEE-754 encoders. The host byte order is checked at compile
// time; big-endian hosts byte-swap.
std::vector<std::uint8_t> encode_f32(std::span<const double> values);
std::vector<double> decode_f32(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_f64(std::span<const double> values);
std::vector<double> decode_f64(std::span<const std::uint8_t> bytes);

std::uint32_t crc32(std::span<const std::uint8_t> bytes);
std::string crc32_hex(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace latefuse::io
