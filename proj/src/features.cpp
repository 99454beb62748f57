#include "agreeloss/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <fmt/format.h>

#include "agreeloss/error.hpp"

namespace agreeloss {

void FeaturizerConfig::validate() const {
  if (ngram_min < 1 || ngram_min > ngram_max || ngram_max > 3) {
    throw InvalidParameter(
        fmt::format("n-gram range [{}, {}] must satisfy 1 <= min <= max <= 3", ngram_min, ngram_max));
  }
  if (!std::has_single_bit(dim) || dim < (1u << 10) || dim > (1u << 24)) {
    throw InvalidParameter(fmt::format("dim {} must be a power of two in [2^10, 2^24]", dim));
  }
}

namespace {

bool is_token_byte(unsigned char c) noexcept {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const FeaturizerConfig& cfg) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_token_byte(c)) {
      current.push_back(cfg.lowercase && c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                                             : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (const char ch : bytes) {
    hash ^= static_cast<unsigned char>(ch);
    hash *= 0x100000001b3ull;
  }
  return hash;
}

SparseVector featurize(std::string_view text, const FeaturizerConfig& cfg) {
  cfg.validate();
  const auto tokens = tokenize(text, cfg);
  const std::uint64_t mask = cfg.dim - 1;

  std::vector<std::uint32_t> buckets;
  std::string gram;
  for (int n = cfg.ngram_min; n <= cfg.ngram_max; ++n) {
    const auto len = static_cast<std::size_t>(n);
    for (std::size_t start = 0; start + len <= tokens.size(); ++start) {
      gram = tokens[start];
      for (std::size_t k = 1; k < len; ++k) {
        gram.push_back(kNgramSeparator);
        gram += tokens[start + k];
      }
      buckets.push_back(static_cast<std::uint32_t>(fnv1a64(gram) & mask));
    }
  }
  std::sort(buckets.begin(), buckets.end());

  SparseVector out;
  out.dim = cfg.dim;
  for (std::size_t i = 0; i < buckets.size();) {
    std::size_t j = i;
    while (j < buckets.size() && buckets[j] == buckets[i]) ++j;
    out.indices.push_back(buckets[i]);
    out.values.push_back(static_cast<double>(j - i));
    i = j;
  }

  if (cfg.normalize && !out.empty()) {
    double sq = 0.0;
    for (const double v : out.values) sq += v * v;
    const double inv = 1.0 / std::sqrt(sq);
    for (double& v : out.values) v *= inv;
  }
  return out;
}

}  // namespace agreeloss
