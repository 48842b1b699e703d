#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sce {

enum class ErrorKind {
  Io,               // missing/unreadable/unwritable file
  BadMagic,
  UnsupportedVersion,
  Truncated,
  NonFinite,
  DegenerateChannel,
  DimensionMismatch,
  InvalidArgument,
  ContractViolation,
  EmptyResult,
  Placement,
  Config,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace sce
