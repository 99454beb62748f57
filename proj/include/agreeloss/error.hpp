#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace agreeloss {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input data (files, rows, checkpoints). The CLI maps these to exit 1.
class InputError : public Error {
 public:
  using Error::Error;
};

class MissingColumn : public InputError {
 public:
  explicit MissingColumn(std::string name)
      : InputError("missing column '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// `row` is the 1-based data row (header excluded).
class ParseError : public InputError {
 public:
  ParseError(std::size_t row, std::string field, const std::string& detail)
      : InputError("row " + std::to_string(row) + ", field '" + field + "': " + detail),
        row_(row),
        field_(std::move(field)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t row_;
  std::string field_;
};

class InvariantViolation : public InputError {
 public:
  InvariantViolation(std::size_t row, const std::string& reason)
      : InputError("row " + std::to_string(row) + ": " + reason), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t expected, std::size_t actual)
      : Error("length mismatch: expected " + std::to_string(expected) + ", got " +
              std::to_string(actual)) {}
};

class DimMismatch : public InputError {
 public:
  DimMismatch(std::size_t expected, std::size_t actual)
      : InputError("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                   std::to_string(actual)) {}
};

class EmptyDataset : public InputError {
 public:
  EmptyDataset() : InputError("dataset is empty") {}
};

class EmptyInput : public Error {
 public:
  EmptyInput() : Error("empty input") {}
};

/// Loss or gradient became NaN/inf during training. Epoch and batch are 1-based.
class NonFiniteLoss : public Error {
 public:
  NonFiniteLoss(std::size_t epoch, std::size_t batch)
      : Error("non-finite loss or gradient at epoch " + std::to_string(epoch) + ", batch " +
              std::to_string(batch)),
        epoch_(epoch),
        batch_(batch) {}
  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t batch() const noexcept { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

}  // namespace agreeloss
