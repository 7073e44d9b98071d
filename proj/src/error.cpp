#include "melodist/error.hpp"

namespace melodist {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::OutOfVocabulary: return "OutOfVocabulary";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NoSoundedNote: return "NoSoundedNote";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::BadOrder: return "BadOrder";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::MissingTransposition: return "MissingTransposition";
    case ErrorCode::ModeMismatch: return "ModeMismatch";
    case ErrorCode::ContractViolation: return "ContractViolation";
    case ErrorCode::Divergence: return "Divergence";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorpusTooSmall: return "CorpusTooSmall";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Usage: return "Usage";
  }
  return "Unknown";
}

}  // namespace melodist
