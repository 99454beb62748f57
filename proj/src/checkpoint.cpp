#include "agreeloss/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "agreeloss/error.hpp"

namespace agreeloss {

namespace {

constexpr char kMagic[8] = {'A', 'G', 'R', 'L', 'O', 'S', 'S', '\0'};
constexpr std::size_t kHeaderSize = 32;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(in[at + b]) << (8 * b);
  return v;
}

double get_f64(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(in[at + b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.featurizer.dim != ckpt.model.dim()) {
    throw DimMismatch(ckpt.featurizer.dim, ckpt.model.dim());
  }
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + 8 * (1 + ckpt.model.weights.size()));
  for (const char c : kMagic) out.push_back(static_cast<std::uint8_t>(c));
  put_u32(out, kCheckpointVersion);
  put_u32(out, ckpt.featurizer.dim);
  put_u32(out, static_cast<std::uint32_t>(ckpt.featurizer.ngram_min));
  put_u32(out, static_cast<std::uint32_t>(ckpt.featurizer.ngram_max));
  out.push_back(ckpt.featurizer.lowercase ? 1 : 0);
  out.push_back(ckpt.featurizer.normalize ? 1 : 0);
  out.resize(kHeaderSize, 0);
  put_f64(out, ckpt.model.bias);
  for (const double w : ckpt.model.weights) put_f64(out, w);
  return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin(),
                                                [](char m, std::uint8_t b) {
                                                  return static_cast<std::uint8_t>(m) == b;
                                                })) {
    throw InputError("not a model checkpoint (bad magic)");
  }
  const auto version = get_u32(bytes, 8);
  if (version != kCheckpointVersion) {
    throw InputError(fmt::format("unsupported checkpoint version {} (expected {})", version,
                                 kCheckpointVersion));
  }

  Checkpoint ckpt;
  ckpt.featurizer.dim = get_u32(bytes, 12);
  ckpt.featurizer.ngram_min = static_cast<int>(get_u32(bytes, 16));
  ckpt.featurizer.ngram_max = static_cast<int>(get_u32(bytes, 20));
  ckpt.featurizer.lowercase = bytes[24] != 0;
  ckpt.featurizer.normalize = bytes[25] != 0;
  try {
    ckpt.featurizer.validate();
  } catch (const InvalidParameter& e) {
    throw InputError(std::string("checkpoint featurizer config invalid: ") + e.what());
  }

  const std::size_t expected = kHeaderSize + 8 * (1 + static_cast<std::size_t>(ckpt.featurizer.dim));
  if (bytes.size() != expected) {
    throw InputError(fmt::format("checkpoint size {} does not match dim {} (expected {} bytes)",
                                 bytes.size(), ckpt.featurizer.dim, expected));
  }
  ckpt.model.bias = get_f64(bytes, kHeaderSize);
  ckpt.model.weights.resize(ckpt.featurizer.dim);
  for (std::size_t i = 0; i < ckpt.model.weights.size(); ++i) {
    ckpt.model.weights[i] = get_f64(bytes, kHeaderSize + 8 * (i + 1));
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write checkpoint '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  try {
    return decode_checkpoint(bytes);
  } catch (const InputError& e) {
    throw InputError("'" + path.string() + "': " + e.what());
  }
}

}  // namespace agreeloss
