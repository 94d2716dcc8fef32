#include "tmpredict/error.hpp"

namespace tmpredict {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidMatrix: return "InvalidMatrix";
    case ErrorCode::LengthNotSquare: return "LengthNotSquare";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::NonPositiveMax: return "NonPositiveMax";
    case ErrorCode::DegenerateSeries: return "DegenerateSeries";
    case ErrorCode::BadSplit: return "BadSplit";
    case ErrorCode::NonUniformSeries: return "NonUniformSeries";
    case ErrorCode::HeaderMismatch: return "HeaderMismatch";
    case ErrorCode::InconsistentN: return "InconsistentN";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::WidthNotSquare: return "WidthNotSquare";
    case ErrorCode::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case ErrorCode::MalformedXml: return "MalformedXml";
    case ErrorCode::UnknownNodeId: return "UnknownNodeId";
    case ErrorCode::NegativeVolume: return "NegativeVolume";
    case ErrorCode::GapTooLarge: return "GapTooLarge";
    case ErrorCode::MixedN: return "MixedN";
    case ErrorCode::BadManifest: return "BadManifest";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::NonCausalFit: return "NonCausalFit";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::HistoryTooShort: return "HistoryTooShort";
    case ErrorCode::SingularYuleWalker: return "SingularYuleWalker";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteActivation: return "NonFiniteActivation";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::BadCheckpoint: return "BadCheckpoint";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace tmpredict
