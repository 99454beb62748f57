#include "agreeloss/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "agreeloss/csv.hpp"
#include "agreeloss/error.hpp"
#include "agreeloss/rng.hpp"

namespace agreeloss {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

// Digits after the decimal point, or -1 if the literal uses an exponent.
int decimal_places(std::string_view s) {
  s = trim(s);
  if (s.find_first_of("eE") != std::string_view::npos) return -1;
  const auto dot = s.find('.');
  return dot == std::string_view::npos ? 0 : static_cast<int>(s.size() - dot - 1);
}

std::optional<int> parse_count(std::string_view s) {
  const auto value = parse_real(s);
  if (!value || *value != std::floor(*value) || std::abs(*value) > 1e9) return std::nullopt;
  return static_cast<int>(*value);
}

}  // namespace

int AnnotatedExample::agreeing_votes() const noexcept {
  return static_cast<int>(std::lround(agreement * num_votes));
}

AnnotatedExample make_example(std::size_t row, std::string text, std::string_view label,
                              std::string_view votes, std::string_view agreement) {
  AnnotatedExample ex;
  ex.text = std::move(text);

  const auto label_value = parse_count(label);
  if (!label_value || (*label_value != 0 && *label_value != 1)) {
    throw ParseError(row, "label", "expected 0 or 1, got '" + std::string(label) + "'");
  }
  ex.label = *label_value;

  const auto votes_value = parse_count(votes);
  if (!votes_value) {
    throw ParseError(row, "num_votes", "expected an integer, got '" + std::string(votes) + "'");
  }
  if (*votes_value < 1) {
    throw InvariantViolation(row, "num_votes must be >= 1, got " + std::to_string(*votes_value));
  }
  ex.num_votes = *votes_value;

  const auto r = parse_real(agreement);
  if (!r) {
    throw ParseError(row, "agreement", "expected a number, got '" + std::string(agreement) + "'");
  }
  ex.agreement_raw = std::string(trim(agreement));
  if (*r < 0.5 || *r > 1.0) {
    throw InvariantViolation(row, "agreement " + ex.agreement_raw +
                                      " outside [0.5, 1] (majority vote)");
  }

  const double n = ex.num_votes;
  const long k = std::lround(n * *r);
  const double snapped = static_cast<double>(k) / n;
  bool integral = std::abs(n * *r - static_cast<double>(k)) <= kAgreementTolerance;
  if (!integral) {
    const int places = decimal_places(agreement);
    if (places > 0) {
      const double half_ulp = 0.5 * std::pow(10.0, -places);
      integral = std::abs(*r - snapped) <= half_ulp + 1e-12;
    }
  }
  if (!integral) {
    throw InvariantViolation(row, fmt::format("num_votes * agreement = {} * {} is not an integer",
                                              ex.num_votes, ex.agreement_raw));
  }
  if (2 * k <= ex.num_votes) {
    throw InvariantViolation(row, "agreement " + ex.agreement_raw +
                                      " is a tie or minority; majority label undefined");
  }
  ex.agreement = snapped;
  return ex;
}

Dataset parse_csv(std::istream& in, const ColumnNames& cols, std::optional<std::string> source) {
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header) throw InputError("CSV input has no header row");

  auto column = [&](const std::string& name) {
    const auto it = std::find_if(header->begin(), header->end(),
                                 [&](const std::string& h) { return trim(h) == name; });
    if (it == header->end()) throw MissingColumn(name);
    return static_cast<std::size_t>(it - header->begin());
  };
  const std::size_t text_col = column(cols.text);
  const std::size_t label_col = column(cols.label);
  const std::size_t votes_col = column(cols.votes);
  const std::size_t agreement_col = column(cols.agreement);
  const std::size_t width =
      std::max({text_col, label_col, votes_col, agreement_col}) + 1;

  std::vector<AnnotatedExample> examples;
  std::size_t row = 0;
  while (auto record = reader.next()) {
    if (record->size() == 1 && trim(record->front()).empty()) continue;  // blank line
    ++row;
    if (record->size() < width) {
      throw ParseError(row, header->at(std::min(record->size(), width - 1)),
                       "row has " + std::to_string(record->size()) + " fields");
    }
    examples.push_back(make_example(row, std::move((*record)[text_col]), (*record)[label_col],
                                    (*record)[votes_col], (*record)[agreement_col]));
  }
  return Dataset(std::move(examples), std::move(source));
}

Dataset parse_jsonl(std::istream& in, const ColumnNames& cols, std::optional<std::string> source) {
  using nlohmann::json;
  std::vector<AnnotatedExample> examples;
  std::string line;
  std::size_t row = 0;

  auto field = [&](const json& obj, const std::string& name) -> std::string {
    const auto it = obj.find(name);
    if (it == obj.end()) throw MissingColumn(name);
    return it->is_string() ? it->get<std::string>() : it->dump();
  };

  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(row, "<line>", e.what());
    }
    if (!obj.is_object()) throw ParseError(row, "<line>", "expected a JSON object");
    const auto text_it = obj.find(cols.text);
    if (text_it == obj.end()) throw MissingColumn(cols.text);
    if (!text_it->is_string()) throw ParseError(row, cols.text, "expected a string");
    examples.push_back(make_example(row, text_it->get<std::string>(), field(obj, cols.label),
                                    field(obj, cols.votes), field(obj, cols.agreement)));
  }
  return Dataset(std::move(examples), std::move(source));
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const ColumnNames& cols) {
  auto in = open_input(path);
  return parse_csv(in, cols, path.string());
}

Dataset load_jsonl(const std::filesystem::path& path, const ColumnNames& cols) {
  auto in = open_input(path);
  return parse_jsonl(in, cols, path.string());
}

Dataset load_dataset(const std::filesystem::path& path, InputFormat format,
                     const ColumnNames& cols) {
  return format == InputFormat::Csv ? load_csv(path, cols) : load_jsonl(path, cols);
}

void write_csv(const Dataset& ds, std::ostream& out) {
  out << "text,label,agreement,num_votes\n";
  for (const auto& ex : ds) {
    out << csv::escape(ex.text) << ',' << ex.label << ',' << fmt::format("{:.17g}", ex.agreement)
        << ',' << ex.num_votes << '\n';
  }
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  write_csv(ds, out);
}

ClassBalance class_balance(const Dataset& ds) noexcept {
  ClassBalance b;
  for (const auto& ex : ds) (ex.label == 1 ? b.causal : b.noncausal) += 1;
  return b;
}

std::vector<std::string> default_synth_vocab() {
  std::vector<std::string> vocab;
  for (int i = 0; i < 60; ++i) vocab.push_back(fmt::format("tok{:02d}", i));
  return vocab;
}

Dataset synth_corpus(std::uint64_t seed, std::size_t size, std::span<const std::string> vocab,
                     double flip_prob) {
  if (!(flip_prob >= 0.0 && flip_prob <= 0.5)) {
    throw InvalidParameter(fmt::format("flip_prob must lie in [0, 0.5], got {}", flip_prob));
  }
  if (size < 1) throw InvalidParameter("synthetic corpus size must be >= 1");
  if (vocab.size() < 2) throw InvalidParameter("synthetic vocabulary needs >= 2 tokens");

  std::vector<const std::string*> cues[2];
  std::vector<const std::string*> filler;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    switch (i % 3) {
      case 0: cues[1].push_back(&vocab[i]); break;
      case 1: cues[0].push_back(&vocab[i]); break;
      default: filler.push_back(&vocab[i]); break;
    }
  }

  static constexpr int kVoteCounts[] = {1, 3, 5};
  Rng rng(seed);
  std::vector<AnnotatedExample> examples;
  examples.reserve(size);
  std::vector<const std::string*> tokens;

  for (std::size_t i = 0; i < size; ++i) {
    const int truth = rng.bernoulli(0.5) ? 1 : 0;

    tokens.clear();
    const auto num_cues = 1 + rng.below(3);
    for (std::uint64_t c = 0; c < num_cues; ++c) {
      tokens.push_back(cues[truth][rng.below(cues[truth].size())]);
    }
    if (!filler.empty()) {
      const auto num_filler = 2 + rng.below(5);
      for (std::uint64_t f = 0; f < num_filler; ++f) {
        tokens.push_back(filler[rng.below(filler.size())]);
      }
    }
    rng.shuffle(std::span(tokens));

    const int n = kVoteCounts[rng.below(3)];
    int positive_votes = 0;
    for (int a = 0; a < n; ++a) {
      const bool flipped = rng.bernoulli(flip_prob);
      positive_votes += (truth == 1) != flipped ? 1 : 0;
    }
    const int majority = 2 * positive_votes > n ? 1 : 0;
    const int agreeing = majority == 1 ? positive_votes : n - positive_votes;

    AnnotatedExample ex;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      if (t) ex.text.push_back(' ');
      ex.text += *tokens[t];
    }
    ex.label = majority;
    ex.num_votes = n;
    ex.agreement = static_cast<double>(agreeing) / n;
    ex.agreement_raw = fmt::format("{:.17g}", ex.agreement);
    examples.push_back(std::move(ex));
  }
  return Dataset(std::move(examples));
}

}  // namespace agreeloss
