#include "aane/error.hpp"

namespace aane {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DegenerateGrid: return "DegenerateGrid";
    case ErrorKind::ZeroCases: return "ZeroCases";
    case ErrorKind::AsymmetricMatrix: return "AsymmetricMatrix";
    case ErrorKind::ZeroBaseline: return "ZeroBaseline";
    case ErrorKind::UnknownNode: return "UnknownNode";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::TooManyClusters: return "TooManyClusters";
    case ErrorKind::SingularCovariance: return "SingularCovariance";
    case ErrorKind::SingleCluster: return "SingleCluster";
    case ErrorKind::ZeroDiameter: return "ZeroDiameter";
    case ErrorKind::MismatchedNodes: return "MismatchedNodes";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::InputError: return "InputError";
  }
  return "Unknown";
}

}  // namespace aane
