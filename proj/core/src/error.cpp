#include "collapse/error.hpp"

namespace collapse {

ParseError::ParseError(ParseErrorKind kind, SourceLoc loc, std::string message)
    : Error(std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " + message),
      kind_(kind),
      loc_(loc),
      message_(std::move(message)) {}

TransformError::TransformError(TransformErrorKind kind, const std::string& message)
    : Error(message), kind_(kind) {}

ExecError::ExecError(ExecErrorKind kind, const std::string& message)
    : Error(message), kind_(kind) {}

}  // namespace collapse
