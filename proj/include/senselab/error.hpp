#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace senselab {

// Base of every error raised by the library. The CLI maps these to the
// "data error" exit status; UsageError maps to the usage status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid text input (bad UTF-8 and the like).
class IngestError : public Error {
 public:
  IngestError(const std::string& what, std::size_t byte_offset)
      : Error(what + " at byte offset " + std::to_string(byte_offset)),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class ParseError : public Error {
 public:
  enum class Kind {
    syntax,
    mismatched_tag,
    unexpected_eof,
    bad_entity,
    missing_attribute,
    duplicate_id,
    schema,
  };

  ParseError(Kind kind, std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), kind_(kind), line_(line) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

  static const char* kind_name(Kind k) {
    switch (k) {
      case Kind::syntax: return "syntax";
      case Kind::mismatched_tag: return "mismatched_tag";
      case Kind::unexpected_eof: return "unexpected_eof";
      case Kind::bad_entity: return "bad_entity";
      case Kind::missing_attribute: return "missing_attribute";
      case Kind::duplicate_id: return "duplicate_id";
      case Kind::schema: return "schema";
    }
    return "unknown";
  }

 private:
  Kind kind_;
  std::size_t line_;
};

class CheckpointError : public Error {
 public:
  enum class Kind { io, bad_magic, version_mismatch, digest_mismatch, truncated, checksum };

  CheckpointError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace senselab
