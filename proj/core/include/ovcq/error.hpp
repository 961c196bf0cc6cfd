#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ovcq {

enum class ErrorKind {
  kOrderViolation,
  kBaseMismatch,
  kFenceInput,
  kSpillIo,
  kFormatError,
  kKeyOrderBroken,
  kSchemaMismatch,
  kInvalidArgument,
};

std::string_view to_string(ErrorKind kind);

// All library failures surface as ovcq::Error; kind() tells callers which.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ovcq
