#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nmr/fields/layers.hpp"

namespace nmr::fields {

inline constexpr char kCheckpointMagic[4] = {'N', 'M', 'R', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TensorRecord {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
};

/// Named float32 tensors, keyed by section/name ("geometry/...", "hash/...",
/// "appearance/...", "normalnet/...", plus "mesh/..." and "meta/...").
using Checkpoint = std::map<std::string, TensorRecord>;

/// "NMR1", u32 version, u32 record count, then per record: u32 name length,
/// name bytes, u32 rank, rank x u32 dims, float32 payload.  Little endian.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
/// Throws CheckpointError on bad magic, version, or truncation (with the byte
/// offset).
Checkpoint load_checkpoint(const std::filesystem::path& path);

template <typename T>
void store(Checkpoint& ckpt, const ParamList<T>& params);
/// Copies each named record into the matching parameter; throws on a missing
/// name or shape mismatch.
template <typename T>
void restore(const Checkpoint& ckpt, const ParamList<T>& params);

}  // namespace nmr::fields
