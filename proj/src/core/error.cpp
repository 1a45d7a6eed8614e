#include "saekit/error.hpp"

namespace saekit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::TrailingData: return "TrailingData";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::Io: return "Io";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::SparsityTooHigh: return "SparsityTooHigh";
    case ErrorCode::TrainingDiverged: return "TrainingDiverged";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::DegenerateTarget: return "DegenerateTarget";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

}  // namespace saekit
