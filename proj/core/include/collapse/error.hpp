#pragma once

#include <stdexcept>
#include <string>

namespace collapse {

struct SourceLoc {
  int line = 0;
  int column = 0;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ParseErrorKind {
  Syntax,
  UnknownIdentifier,
  Redeclaration,
  Type,
  DynamicMask,
  NonConstantShared,
  Unsupported,
};

/// Diagnostic produced by the kernel-language front end. `what()` carries the
/// `line:col: message` form; `message()` is the bare text.
class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, SourceLoc loc, std::string message);

  ParseErrorKind kind() const { return kind_; }
  SourceLoc loc() const { return loc_; }
  const std::string& message() const { return message_; }

 private:
  ParseErrorKind kind_;
  SourceLoc loc_;
  std::string message_;
};

enum class TransformErrorKind {
  UnsupportedFeature,
  Configuration,
  Structure,
  Irreducible,
};

class TransformError : public Error {
 public:
  TransformError(TransformErrorKind kind, const std::string& message);
  TransformErrorKind kind() const { return kind_; }

 private:
  TransformErrorKind kind_;
};

enum class ExecErrorKind {
  BarrierViolation,
  OutOfBounds,
  StepLimit,
  BadArguments,
};

/// Raised by the interpreters and the launcher.
class ExecError : public Error {
 public:
  ExecError(ExecErrorKind kind, const std::string& message);
  ExecErrorKind kind() const { return kind_; }

 private:
  ExecErrorKind kind_;
};

/// Device-memory misuse: unknown buffer ids, out-of-range copies.
class DeviceError : public Error {
 public:
  using Error::Error;
};

}  // namespace collapse
