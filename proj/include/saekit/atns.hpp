#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "saekit/tensor.hpp"

// ATNS tensor container, little-endian throughout:
//
//   offset 0  : "ATNS"
//   offset 4  : uint8 version (1)
//   offset 5  : uint8 rank (1 or 2)
//   offset 6  : two zero bytes
//   offset 8  : rank x uint64 dimension sizes
//   then      : product(dims) x float32 payload
//
// No padding and no footer; trailing bytes are rejected.
namespace saekit {

inline constexpr std::uint8_t kAtnsVersion = 1;

std::vector<std::uint8_t> encode_atns(const Tensor& t);
Tensor decode_atns(std::span<const std::uint8_t> bytes);

void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

namespace le {
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v);
std::uint64_t get_u64(const std::uint8_t* p);
}  // namespace le

}  // namespace saekit
