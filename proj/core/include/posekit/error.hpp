#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace posekit {

/// Coarse error category; the CLI maps each one onto a process exit code.
enum class ErrorKind {
  kUsage,      // bad arguments, bad configuration, empty inputs
  kData,       // malformed files, schema violations, shape mismatches
  kNumerical,  // non-finite values, failed numeric checks
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

class ConfigError : public UsageError {
 public:
  explicit ConfigError(const std::string& what) : UsageError("config: " + what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

/// Document does not follow the expected schema; names the offending field.
class SchemaError : public DataError {
 public:
  SchemaError(std::string field, const std::string& what)
      : DataError("schema: " + field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Text could not be parsed at all.
class ParseError : public DataError {
 public:
  ParseError(std::size_t byte_offset, const std::string& what)
      : DataError("parse error at byte " + std::to_string(byte_offset) + ": " + what),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class UnsupportedVersionError : public DataError {
 public:
  explicit UnsupportedVersionError(long long version)
      : DataError("unsupported document version " + std::to_string(version)), version_(version) {}
  long long version() const noexcept { return version_; }

 private:
  long long version_;
};

/// Driving pose or anchor lacks the joints needed to realign.
class UnalignableError : public DataError {
 public:
  explicit UnalignableError(const std::string& what) : DataError("unalignable: " + what) {}
};

class ShapeError : public DataError {
 public:
  explicit ShapeError(const std::string& what) : DataError("shape mismatch: " + what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::kNumerical, what) {}
};

}  // namespace posekit
