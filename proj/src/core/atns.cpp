#include "saekit/atns.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "saekit/error.hpp"

namespace saekit {

static_assert(std::numeric_limits<float>::is_iec559, "ATNS requires IEEE-754 float32");

namespace le {

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
  return v;
}

}  // namespace le

namespace {

constexpr std::size_t kFixedHeader = 8;

void put_f32(std::vector<std::uint8_t>& out, float f) {
  const auto bits = std::bit_cast<std::uint32_t>(f);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

float get_f32(const std::uint8_t* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= std::uint32_t(p[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

}  // namespace

std::vector<std::uint8_t> encode_atns(const Tensor& t) {
  if (t.rank() != 1 && t.rank() != 2) throw Error(ErrorCode::ShapeError, "ATNS supports rank 1 or 2");
  std::vector<std::uint8_t> out;
  out.reserve(kFixedHeader + 8 * t.rank() + 4 * t.size());
  const std::uint8_t header[kFixedHeader] = {'A', 'T', 'N', 'S', kAtnsVersion, static_cast<std::uint8_t>(t.rank()), 0, 0};
  for (std::uint8_t b : header) out.push_back(b);
  for (std::size_t d : t.shape()) le::put_u64(out, d);
  for (float f : t.data()) put_f32(out, f);
  return out;
}

Tensor decode_atns(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "ATNS", 4) != 0)
    throw Error(ErrorCode::BadMagic, "missing ATNS magic");
  if (bytes.size() < kFixedHeader) throw Error(ErrorCode::Truncated, "header shorter than 8 bytes");
  if (bytes[4] != kAtnsVersion)
    throw Error(ErrorCode::BadHeader, "unsupported version " + std::to_string(bytes[4]));
  const std::size_t rank = bytes[5];
  if (rank != 1 && rank != 2) throw Error(ErrorCode::BadHeader, "unsupported rank " + std::to_string(rank));
  if (bytes[6] != 0 || bytes[7] != 0) throw Error(ErrorCode::BadHeader, "reserved bytes not zero");
  if (bytes.size() < kFixedHeader + 8 * rank) throw Error(ErrorCode::Truncated, "dimension table cut short");

  std::vector<std::size_t> shape(rank);
  std::uint64_t count = 1;
  for (std::size_t r = 0; r < rank; ++r) {
    const std::uint64_t d = le::get_u64(bytes.data() + kFixedHeader + 8 * r);
    if (d != 0 && count > std::numeric_limits<std::uint64_t>::max() / 4 / d)
      throw Error(ErrorCode::BadHeader, "dimension product overflows");
    count *= d;
    shape[r] = static_cast<std::size_t>(d);
  }
  const std::size_t offset = kFixedHeader + 8 * rank;
  const std::size_t available = bytes.size() - offset;
  if (available < 4 * count)
    throw Error(ErrorCode::Truncated, "payload has " + std::to_string(available) + " bytes, expected " +
                                          std::to_string(4 * count));
  if (available > 4 * count)
    throw Error(ErrorCode::TrailingData, std::to_string(available - 4 * count) + " bytes after payload");

  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = get_f32(bytes.data() + offset + 4 * i);
    if (!std::isfinite(data[i]))
      throw Error(ErrorCode::NonFinite, "non-finite value at flat index " + std::to_string(i));
  }
  return Tensor(std::move(shape), std::move(data));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  write_file_bytes(path, encode_atns(t));
}

Tensor load_tensor(const std::filesystem::path& path) {
  try {
    return decode_atns(read_file_bytes(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace saekit
