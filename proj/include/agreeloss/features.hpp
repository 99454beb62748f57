#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace agreeloss {

/// Sparse feature vector: strictly increasing indices in [0, dim) with
/// positive values.
struct SparseVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  std::uint32_t dim = 0;

  std::size_t nnz() const noexcept { return indices.size(); }
  bool empty() const noexcept { return indices.empty(); }
  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

struct FeaturizerConfig {
  std::uint32_t dim = 1u << 18;
  int ngram_min = 1;
  int ngram_max = 2;
  bool lowercase = true;
  bool normalize = true;

  /// Throws InvalidParameter unless 1 <= ngram_min <= ngram_max <= 3 and dim
  /// is a power of two in [2^10, 2^24].
  void validate() const;
  friend bool operator==(const FeaturizerConfig&, const FeaturizerConfig&) = default;
};

/// Maximal runs of token characters. ASCII letters and digits are token
/// characters, as is every byte >= 0x80 so multi-byte UTF-8 letters stay
/// inside words. Only ASCII is case-folded.
std::vector<std::string> tokenize(std::string_view text, const FeaturizerConfig& cfg);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Separator placed between tokens of an n-gram before hashing.
inline constexpr char kNgramSeparator = '\x1f';

/// Hashed bag of n-grams: each n-gram (tokens joined with U+001F) lands in
/// bucket fnv1a64 mod dim; colliding n-grams add up. Optionally scaled to
/// unit Euclidean norm.
SparseVector featurize(std::string_view text, const FeaturizerConfig& cfg);

}  // namespace agreeloss
