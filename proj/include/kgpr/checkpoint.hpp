#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "kgpr/binary_io.hpp"
#include "kgpr/encoder.hpp"
#include "kgpr/error.hpp"
#include "kgpr/hash.hpp"

namespace kgpr {

inline constexpr std::string_view kCheckpointMagic = "GPR1";

/// "GPR1", u32 [V_q, d_q, V_t, d_t], then both tables as row-major f32,
/// query tower first. All integers and floats little-endian.
inline Bytes serialize_towers(const TowerPair& towers) {
  ByteWriter w;
  w.magic(kCheckpointMagic);
  w.u32(static_cast<std::uint32_t>(towers.query.buckets()));
  w.u32(static_cast<std::uint32_t>(towers.query.dim()));
  w.u32(static_cast<std::uint32_t>(towers.triplet.buckets()));
  w.u32(static_cast<std::uint32_t>(towers.triplet.dim()));
  for (double v : towers.query.table()) w.f32(static_cast<float>(v));
  for (double v : towers.triplet.table()) w.f32(static_cast<float>(v));
  return std::move(w.bytes());
}

inline TowerPair deserialize_towers(std::span<const unsigned char> bytes,
                                    const std::string& what = "checkpoint") {
  ByteReader r(bytes, what);
  r.expect_magic(kCheckpointMagic);
  EncoderConfig qc, tc;
  qc.buckets = r.u32();
  qc.dim = r.u32();
  tc.buckets = r.u32();
  tc.dim = r.u32();
  if (qc.dim < 2 || qc.buckets < 2 || tc.dim < 2 || tc.buckets < 2) {
    throw Error(ErrorKind::Schema, what + ": invalid tower shape");
  }
  if (qc.dim != tc.dim) throw Error(ErrorKind::Schema, what + ": towers disagree on dimension");
  const auto expect = 4 * (qc.dim * qc.buckets + tc.dim * tc.buckets);
  if (r.remaining() != expect) throw Error(ErrorKind::Schema, what + ": table size mismatch");
  TowerPair towers{Tower(qc), Tower(tc)};
  for (auto* tower : {&towers.query, &towers.triplet}) {
    for (auto& v : tower->table()) {
      v = r.f32();
      if (!std::isfinite(v)) throw Error(ErrorKind::Schema, what + ": non-finite weight");
    }
  }
  return towers;
}

/// 64-bit FNV-1a of the serialized checkpoint bytes.
inline std::uint64_t fingerprint(std::span<const unsigned char> checkpoint_bytes) {
  return fnv1a64(checkpoint_bytes);
}

inline std::uint64_t fingerprint(const TowerPair& towers) {
  return fingerprint(serialize_towers(towers));
}

/// Towers as they read back from disk, plus the identifying fingerprint.
struct Checkpoint {
  TowerPair towers;
  std::uint64_t fingerprint = 0;
  nlohmann::ordered_json metadata;

  /// Rounds towers through the on-disk f32 format.
  static Checkpoint from_towers(const TowerPair& towers, nlohmann::ordered_json metadata = {}) {
    const auto bytes = serialize_towers(towers);
    return {deserialize_towers(bytes), kgpr::fingerprint(bytes), std::move(metadata)};
  }
};

inline std::filesystem::path sidecar_path(const std::filesystem::path& ckpt) {
  auto p = ckpt;
  p += ".json";
  return p;
}

/// Writes the binary checkpoint and its JSON sidecar; returns the fingerprint.
inline std::uint64_t save_checkpoint(const std::filesystem::path& path, const TowerPair& towers,
                                     const nlohmann::ordered_json& metadata) {
  const auto bytes = serialize_towers(towers);
  write_file_bytes(path, bytes);
  write_text_file(sidecar_path(path), metadata.dump(2) + "\n");
  return fingerprint(bytes);
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  Checkpoint c{deserialize_towers(bytes, path.string()), fingerprint(bytes), {}};
  const auto side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    const auto text = read_file_bytes(side);
    c.metadata = nlohmann::ordered_json::parse(text.begin(), text.end(), nullptr, false);
    if (c.metadata.is_discarded()) throw Error(ErrorKind::Schema, side.string() + ": invalid JSON");
  }
  return c;
}

}  // namespace kgpr
