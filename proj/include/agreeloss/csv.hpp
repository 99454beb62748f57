#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agreeloss::csv {

using Record = std::vector<std::string>;

/// Incremental RFC-4180 reader: quoted fields may contain separators,
/// doubled quotes and line breaks. Accepts LF or CRLF record endings and
/// skips a leading UTF-8 BOM.
class Reader {
 public:
  explicit Reader(std::istream& in, char sep = ',') : in_(in), sep_(sep) {}

  /// Next record, or nullopt at end of input. Throws InputError on an
  /// unterminated quoted field.
  std::optional<Record> next();

  /// 1-based physical line on which the last returned record started.
  std::size_t line() const noexcept { return record_line_; }

 private:
  std::istream& in_;
  char sep_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
  bool started_ = false;
};

/// Quote a field if it contains a separator, quote, CR or LF.
std::string escape(std::string_view field, char sep = ',');

std::string join(const Record& fields, char sep = ',');

}  // namespace agreeloss::csv
