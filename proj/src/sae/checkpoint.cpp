#include <string>

#include <json.hpp>

#include "saekit/atns.hpp"
#include "saekit/error.hpp"
#include "saekit/sae.hpp"

namespace saekit {

namespace {

void put_block(std::vector<std::uint8_t>& out, std::span<const std::uint8_t> block) {
  le::put_u64(out, block.size());
  out.insert(out.end(), block.begin(), block.end());
}

std::span<const std::uint8_t> take_block(std::span<const std::uint8_t>& in, const char* what) {
  if (in.size() < 8) throw Error(ErrorCode::Truncated, std::string("checkpoint ends before ") + what + " length");
  const std::uint64_t n = le::get_u64(in.data());
  in = in.subspan(8);
  if (in.size() < n) throw Error(ErrorCode::Truncated, std::string("checkpoint ends inside ") + what);
  auto block = in.first(static_cast<std::size_t>(n));
  in = in.subspan(static_cast<std::size_t>(n));
  return block;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const SaeModel& model, const SaeCheckpointInfo& info) {
  model.validate();
  const nlohmann::json header = {
      {"d_in", model.d_in},         {"n_latent", model.n_latent},     {"k", model.k},
      {"sparsity", info.sparsity},  {"seed", info.seed},              {"best_epoch", info.best_epoch},
      {"best_val_mse", info.best_val_mse},
  };
  const std::string text = header.dump();
  std::vector<std::uint8_t> out;
  put_block(out, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  put_block(out, encode_atns(model.w_enc));
  put_block(out, encode_atns(model.b_enc));
  put_block(out, encode_atns(model.w_dec));
  return out;
}

std::pair<SaeModel, SaeCheckpointInfo> decode_checkpoint(std::span<const std::uint8_t> bytes) {
  const auto header_bytes = take_block(bytes, "header");
  SaeModel model;
  SaeCheckpointInfo info;
  try {
    const auto header = nlohmann::json::parse(header_bytes.begin(), header_bytes.end());
    model.d_in = header.at("d_in").get<std::size_t>();
    model.n_latent = header.at("n_latent").get<std::size_t>();
    model.k = header.at("k").get<std::size_t>();
    info.sparsity = header.at("sparsity").get<double>();
    info.seed = header.at("seed").get<std::uint64_t>();
    info.best_epoch = header.at("best_epoch").get<std::size_t>();
    info.best_val_mse = header.at("best_val_mse").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadHeader, std::string("checkpoint header: ") + e.what());
  }
  model.w_enc = decode_atns(take_block(bytes, "w_enc"));
  model.b_enc = decode_atns(take_block(bytes, "b_enc"));
  model.w_dec = decode_atns(take_block(bytes, "w_dec"));
  if (!bytes.empty()) throw Error(ErrorCode::TrailingData, "bytes after the last checkpoint tensor");
  model.validate();
  return {std::move(model), info};
}

void save_checkpoint(const std::filesystem::path& path, const SaeModel& model, const SaeCheckpointInfo& info) {
  write_file_bytes(path, encode_checkpoint(model, info));
}

std::pair<SaeModel, SaeCheckpointInfo> load_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(read_file_bytes(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace saekit
