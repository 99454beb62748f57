#include "agreeloss/csv.hpp"

#include "agreeloss/error.hpp"

namespace agreeloss::csv {

std::optional<Record> Reader::next() {
  if (!started_) {
    started_ = true;
    if (in_.peek() == 0xEF) {
      char bom[3];
      in_.read(bom, 3);
      if (!(bom[0] == '\xEF' && bom[1] == '\xBB' && bom[2] == '\xBF')) {
        in_.clear();
        in_.seekg(0);
      }
    }
  }

  Record record;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  record_line_ = line_;

  int c;
  while ((c = in_.get()) != std::char_traits<char>::eof()) {
    any = true;
    const char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      in_quotes = true;
    } else if (ch == sep_) {
      record.push_back(std::move(field));
      field.clear();
    } else if (ch == '\r' && in_.peek() == '\n') {
      // handled with the '\n'
    } else if (ch == '\n') {
      ++line_;
      record.push_back(std::move(field));
      return record;
    } else {
      field.push_back(ch);
    }
  }
  if (in_quotes) {
    throw InputError("unterminated quoted field starting on line " +
                     std::to_string(record_line_));
  }
  if (!any) return std::nullopt;
  record.push_back(std::move(field));
  return record;
}

std::string escape(std::string_view field, char sep) {
  if (field.find_first_of(std::string{sep, '"', '\r', '\n'}) == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::string join(const Record& fields, char sep) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(sep);
    out += escape(fields[i], sep);
  }
  return out;
}

}  // namespace agreeloss::csv
