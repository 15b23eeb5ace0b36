#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "senselab/error.hpp"
#include "senselab/io.hpp"
#include "senselab/lstm/params.hpp"

// Binary checkpoint, little-endian:
//   "WSDLM\x01" | u32 version | u32 V | u32 p | u32 h | u64 seed |
//   32-byte vocabulary digest | E W_x W_h b W_c O b_o as row-major f64 |
//   u32 CRC32 of everything before it
namespace senselab::lstm {

inline constexpr std::string_view kCheckpointMagic{"WSDLM\x01", 6};
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderSize = 6 + 4 * 4 + 8 + 32;

struct Checkpoint {
  LstmParams params;
  ModelConfig config;  // dimensions and seed; training settings keep their defaults
  io::Digest vocab_digest{};
};

namespace detail {

inline void put_le(std::string& out, std::uint64_t v, std::size_t bytes) {
  for (std::size_t i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_le(std::string_view in, std::size_t off, std::size_t bytes) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[off + i])) << (8 * i);
  }
  return v;
}

}  // namespace detail

inline std::string serialize_checkpoint(const LstmParams& params, const ModelConfig& config,
                                        const io::Digest& vocab_digest) {
  params.check_consistent();
  std::string out(kCheckpointMagic);
  detail::put_le(out, kCheckpointVersion, 4);
  detail::put_le(out, params.vocab_size(), 4);
  detail::put_le(out, params.context_dim(), 4);
  detail::put_le(out, params.hidden_dim(), 4);
  detail::put_le(out, config.seed, 8);
  out.append(reinterpret_cast<const char*>(vocab_digest.data()), vocab_digest.size());
  params.for_each([&](std::string_view, const Matrix& m) {
    for (double v : m.values()) detail::put_le(out, std::bit_cast<std::uint64_t>(v), 8);
  });
  detail::put_le(out, io::crc32(out), 4);
  return out;
}

inline Checkpoint parse_checkpoint(std::string_view bytes,
                                   const std::optional<io::Digest>& expected_digest = std::nullopt) {
  using Kind = CheckpointError::Kind;
  if (bytes.size() < kCheckpointMagic.size() || bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw CheckpointError(Kind::bad_magic, "checkpoint: bad magic");
  }
  if (bytes.size() < kCheckpointHeaderSize) {
    throw CheckpointError(Kind::truncated, "checkpoint: truncated header");
  }
  const auto version = static_cast<std::uint32_t>(detail::get_le(bytes, 6, 4));
  if (version != kCheckpointVersion) {
    throw CheckpointError(Kind::version_mismatch,
                          "checkpoint: version " + std::to_string(version) + ", expected " +
                              std::to_string(kCheckpointVersion));
  }
  Checkpoint ck;
  ck.config.vocab_size = detail::get_le(bytes, 10, 4);
  ck.config.context_dim = detail::get_le(bytes, 14, 4);
  ck.config.hidden_dim = detail::get_le(bytes, 18, 4);
  ck.config.seed = detail::get_le(bytes, 22, 8);
  std::memcpy(ck.vocab_digest.data(), bytes.data() + 30, 32);

  const std::size_t V = ck.config.vocab_size, p = ck.config.context_dim, h = ck.config.hidden_dim;
  if (V == 0 || p == 0 || h == 0) throw CheckpointError(Kind::truncated, "checkpoint: zero dimension");
  const std::size_t count = V * p + p * 4 * h + h * 4 * h + 4 * h + h * p + V * p + V;
  const std::size_t expected = kCheckpointHeaderSize + 8 * count + 4;
  if (bytes.size() < expected) {
    throw CheckpointError(Kind::truncated, "checkpoint: truncated (" + std::to_string(bytes.size()) +
                                               " of " + std::to_string(expected) + " bytes)");
  }
  if (bytes.size() > expected) {
    throw CheckpointError(Kind::checksum, "checkpoint: trailing bytes after payload");
  }
  const auto stored_crc = static_cast<std::uint32_t>(detail::get_le(bytes, expected - 4, 4));
  if (io::crc32(bytes.substr(0, expected - 4)) != stored_crc) {
    throw CheckpointError(Kind::checksum, "checkpoint: CRC mismatch");
  }
  if (expected_digest && *expected_digest != ck.vocab_digest) {
    throw CheckpointError(Kind::digest_mismatch,
                          "checkpoint: vocabulary digest mismatch (checkpoint " +
                              io::hex(ck.vocab_digest) + ", vocabulary " + io::hex(*expected_digest) + ")");
  }
  ck.params = LstmParams::zeros(V, p, h);
  std::size_t off = kCheckpointHeaderSize;
  ck.params.for_each([&](std::string_view, Matrix& m) {
    for (auto& v : m.values()) {
      v = std::bit_cast<double>(detail::get_le(bytes, off, 8));
      off += 8;
    }
  });
  return ck;
}

inline void save_checkpoint(const LstmParams& params, const ModelConfig& config,
                            const io::Digest& vocab_digest, const std::filesystem::path& path) {
  io::atomic_write(path, serialize_checkpoint(params, config, vocab_digest));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path,
                                  const std::optional<io::Digest>& expected_digest = std::nullopt) {
  std::string bytes;
  try {
    bytes = io::read_file(path);
  } catch (const Error& e) {
    throw CheckpointError(CheckpointError::Kind::io, e.what());
  }
  return parse_checkpoint(bytes, expected_digest);
}

}  // namespace senselab::lstm
