#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aane {

enum class ErrorKind {
  InvalidArgument,
  DegenerateGrid,
  ZeroCases,
  AsymmetricMatrix,
  ZeroBaseline,
  UnknownNode,
  DimensionTooLarge,
  NonFinite,
  TooManyClusters,
  SingularCovariance,
  SingleCluster,
  ZeroDiameter,
  MismatchedNodes,
  InsufficientData,
  ConfigError,
  InputError,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so the CLI can report
// it in machine-readable form.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace aane
