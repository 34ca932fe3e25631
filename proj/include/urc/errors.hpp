#pragma once

#include <stdexcept>
#include <string>

namespace urc {

enum class ErrorCode {
  AllZero,
  NegativeEntry,
  NotNormalized,
  BadLength,
  ShapeMismatch,
  CountMismatch,
  LengthMismatch,
  DegeneratePartition,
  DegenerateGrid,
  MissingClass,
  MissingGroup,
  EmptySample,
  ZeroPriorCoordinate,
  RankDeficient,
  SingleClass,
  InvalidConfig,
  InconsistentSpec,
  IoError,
  ParseError,
};

const char* to_string(ErrorCode code);

/// True for failures caused by data-dependent numerical degeneracy rather
/// than malformed input (drives the CLI exit-code split).
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace urc
