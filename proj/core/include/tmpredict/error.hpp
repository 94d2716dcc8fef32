#ifndef TMPREDICT_ERROR_HPP
#define TMPREDICT_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace tmpredict {

/// Failure kinds raised across the library. Every throw site uses `Error`
/// with one of these codes so callers (the CLI in particular) can map them
/// to exit statuses without parsing messages.
enum class ErrorCode {
  // core
  InvalidMatrix,
  LengthNotSquare,
  SeriesTooShort,
  NonPositiveMax,
  DegenerateSeries,
  BadSplit,
  NonUniformSeries,
  // ingest
  HeaderMismatch,
  InconsistentN,
  EmptyInput,
  WidthNotSquare,
  NonMonotonicTimestamps,
  MalformedXml,
  UnknownNodeId,
  NegativeVolume,
  GapTooLarge,
  MixedN,
  BadManifest,
  FileNotFound,
  // linear
  SingularCovariance,
  NonCausalFit,
  TooShort,
  HistoryTooShort,
  SingularYuleWalker,
  // lstm
  ShapeMismatch,
  NonFiniteActivation,
  DivergenceDetected,
  BadCheckpoint,
  // eval
  LengthMismatch,
  InsufficientHistory,
  // cli
  InvalidConfig,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tmpredict

#endif  // TMPREDICT_ERROR_HPP
