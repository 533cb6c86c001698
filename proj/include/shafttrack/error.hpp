#pragma once

#include <stdexcept>
#include <string>

namespace shafttrack {

enum class ErrorCode {
  InvalidArgument,
  AngleNearPi,
  JointCountMismatch,
  CameraInsideCylinder,
  BehindCamera,
  DegenerateSegment,
  InsufficientPoints,
  ParseError,
  SchemaError,
  NoDetections,
  NoPoints,
  AllParticlesInvalid,
  DegenerateWeights,
  EmptyInput,
  ProjectionInvalid,
  IoError,
};

const char* to_string(ErrorCode code);

/// Library-wide exception. `line()` is set for ParseError (1-based) and
/// `frame()` for errors raised while processing a dataset frame; both are -1
/// otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, long line = -1, long frame = -1)
      : std::runtime_error(what), code_(code), line_(line), frame_(frame) {}

  ErrorCode code() const { return code_; }
  long line() const { return line_; }
  long frame() const { return frame_; }

 private:
  ErrorCode code_;
  long line_;
  long frame_;
};

}  // namespace shafttrack
