/**
 * @file error.hpp
 * @brief Error kinds raised by the strain-rate toolkit.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mpsr {

enum class ErrorKind {
  // tensor kinematics
  InvalidTensor,
  SingularDeformation,
  SeriesTooShort,
  // collections / statistics
  EmptyCollection,
  InvalidValue,
  ShapeMismatch,
  SampleTooSmall,
  DegenerateDifferences,
  DegenerateGroups,
  // risk models
  SingleClass,
  SeparationDetected,
  SingularDesign,
  FlatModel,
  NotConverged,
  // data files and parameters
  ParseError,
  VersionMismatch,
  RowCountMismatch,
  ParameterBounds,
  Io,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidTensor: return "InvalidTensor";
    case ErrorKind::SingularDeformation: return "SingularDeformation";
    case ErrorKind::SeriesTooShort: return "SeriesTooShort";
    case ErrorKind::EmptyCollection: return "EmptyCollection";
    case ErrorKind::InvalidValue: return "InvalidValue";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::SampleTooSmall: return "SampleTooSmall";
    case ErrorKind::DegenerateDifferences: return "DegenerateDifferences";
    case ErrorKind::DegenerateGroups: return "DegenerateGroups";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::SeparationDetected: return "SeparationDetected";
    case ErrorKind::SingularDesign: return "SingularDesign";
    case ErrorKind::FlatModel: return "FlatModel";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::RowCountMismatch: return "RowCountMismatch";
    case ErrorKind::ParameterBounds: return "ParameterBounds";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// True for failures of a numerical procedure on otherwise well-formed data.
/// The CLI maps these to exit code 3 and everything else to exit code 2.
constexpr bool is_numerical(ErrorKind k) {
  switch (k) {
    case ErrorKind::SingularDeformation:
    case ErrorKind::DegenerateDifferences:
    case ErrorKind::DegenerateGroups:
    case ErrorKind::SingleClass:
    case ErrorKind::SeparationDetected:
    case ErrorKind::SingularDesign:
    case ErrorKind::FlatModel:
    case ErrorKind::NotConverged:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace mpsr
