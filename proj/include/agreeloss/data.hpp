#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agreeloss {

/// One sentence with its majority (gold) label and annotation metadata.
///
/// `agreement` is the fraction of the `num_votes` annotators who voted for
/// `label`; majority voting means it lies in (0.5, 1]. Loaded values are
/// snapped to the exact ratio k/n; the text as read is kept in
/// `agreement_raw` and takes no part in equality.
struct AnnotatedExample {
  std::string text;
  int label = 0;
  int num_votes = 1;
  double agreement = 1.0;
  std::string agreement_raw;

  /// n·r as an integer count of agreeing annotators.
  int agreeing_votes() const noexcept;

  friend bool operator==(const AnnotatedExample& a, const AnnotatedExample& b) noexcept {
    return a.text == b.text && a.label == b.label && a.num_votes == b.num_votes &&
           a.agreement == b.agreement;
  }
};

/// Immutable ordered collection of examples, in file order.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<AnnotatedExample> examples,
                   std::optional<std::string> source_path = std::nullopt)
      : examples_(std::move(examples)), source_path_(std::move(source_path)) {}

  std::span<const AnnotatedExample> examples() const noexcept { return examples_; }
  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }
  const AnnotatedExample& operator[](std::size_t i) const { return examples_[i]; }
  auto begin() const noexcept { return examples_.cbegin(); }
  auto end() const noexcept { return examples_.cend(); }
  const std::optional<std::string>& source_path() const noexcept { return source_path_; }

 private:
  std::vector<AnnotatedExample> examples_;
  std::optional<std::string> source_path_;
};

struct ColumnNames {
  std::string text = "text";
  std::string label = "label";
  std::string votes = "num_votes";
  std::string agreement = "agreement";
};

enum class InputFormat { Csv, JsonLines };

/// Absolute tolerance on the integrality of n·r.
inline constexpr double kAgreementTolerance = 1e-6;

/// Validate raw field strings of data row `row` (1-based) and build an
/// example. Accepts agreements written either to within 1e-6 of k/n or as a
/// correctly rounded decimal of k/n ("0.67" for 2/3). Ties (r = 0.5) and
/// minority agreements are rejected.
AnnotatedExample make_example(std::size_t row, std::string text, std::string_view label,
                              std::string_view votes, std::string_view agreement);

Dataset parse_csv(std::istream& in, const ColumnNames& cols = {},
                  std::optional<std::string> source_path = std::nullopt);
Dataset parse_jsonl(std::istream& in, const ColumnNames& cols = {},
                    std::optional<std::string> source_path = std::nullopt);

/// Throws InputError if the file cannot be opened; the message names the path.
Dataset load_csv(const std::filesystem::path& path, const ColumnNames& cols = {});
Dataset load_jsonl(const std::filesystem::path& path, const ColumnNames& cols = {});
Dataset load_dataset(const std::filesystem::path& path, InputFormat format,
                     const ColumnNames& cols = {});

/// Header `text,label,agreement,num_votes`; agreement with 17 significant digits.
void write_csv(const Dataset& ds, std::ostream& out);
void save_csv(const Dataset& ds, const std::filesystem::path& path);

struct ClassBalance {
  std::size_t causal = 0;
  std::size_t noncausal = 0;
  friend bool operator==(const ClassBalance&, const ClassBalance&) = default;
};

ClassBalance class_balance(const Dataset& ds) noexcept;

/// 60 synthetic word types used when no vocabulary is supplied.
std::vector<std::string> default_synth_vocab();

/// Synthetic corpus with linearly separable token patterns.
///
/// Vocabulary entries are split by index mod 3 into positive cues, negative
/// cues and neutral filler. Each sentence draws a true label, 1-3 cue tokens
/// of that class and 2-6 fillers. Then n ∈ {1,3,5} annotators each flip the
/// true label with probability `flip_prob`; the gold label is their majority
/// and the agreement is the majority's share. Fully determined by `seed`.
Dataset synth_corpus(std::uint64_t seed, std::size_t size, std::span<const std::string> vocab,
                     double flip_prob);

}  // namespace agreeloss
