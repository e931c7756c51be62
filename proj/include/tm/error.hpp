#pragma once

#include <stdexcept>
#include <string>

namespace tml {

/// Failure categories surfaced by library operations. Validation findings are
/// reported as Diagnostics instead and never throw.
enum class ErrorKind {
  UnknownEvent,
  UnknownReference,
  Duplicate,
  NotDisjoint,
  TooFewParts,
  Explosion,
  ChoiceMissing,
  RegionOverlap,
  SchemaMismatch,
  MalformedJson,
  UnknownLevel,
  InvalidArgument,
};

const char* errorKindName(ErrorKind kind);

class TmError : public std::runtime_error {
public:
  TmError(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(errorKindName(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

}  // namespace tml
