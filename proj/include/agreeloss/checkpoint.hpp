#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "agreeloss/features.hpp"
#include "agreeloss/model.hpp"

namespace agreeloss {

// Binary layout, all integers and floats little-endian:
//
//   offset  size  field
//   0       8     magic "AGRLOSS\0"
//   8       4     u32 format version (kCheckpointVersion)
//   12      4     u32 dim
//   16      4     u32 ngram_min
//   20      4     u32 ngram_max
//   24      1     u8 lowercase
//   25      1     u8 normalize
//   26      6     zero padding
//   32      8     f64 bias
//   40      8·dim f64 weights

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  LinearModel model;
  FeaturizerConfig featurizer;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);

/// Throws InputError on bad magic, unsupported version, truncation, trailing
/// bytes or a featurizer config that does not match the weights.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace agreeloss
