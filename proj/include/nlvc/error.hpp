#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nlvc {

// Malformed textual input (Y4M header). Carries the byte offset where parsing stopped.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnsupportedFormat : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, std::size_t expected, std::size_t actual)
      : std::runtime_error(what + ": expected " + std::to_string(expected) + " bytes, got " +
                           std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}
  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

// Caller broke a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A decoded token grid that cannot have come from a valid encoder.
class CorruptGrid : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CorruptStream : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Binary container / weight file does not match the expected layout.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HashMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nlvc
