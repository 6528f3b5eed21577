#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flowae {

enum class ErrorKind {
    MissingColumn,
    NonNumericValue,
    EmptyFile,
    MissingInput,
    InsufficientData,
    DimensionMismatch,
    NoBenignRecords,
    SequenceLongerThanData,
    NeedAtLeastTwoSequences,
    TooFewRecords,
    TargetBelowInput,
    InvalidConfig,
    VersionMismatch,
    CorruptArtifact,
    EmptyBatch,
    EmptyTrainingSet,
    DivergedLoss,
    EmptyCalibrationSet,
    UnknownCategory,
    InsufficientCodes,
    SchemaMismatch,
    Io,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::MissingColumn: return "MissingColumn";
        case ErrorKind::NonNumericValue: return "NonNumericValue";
        case ErrorKind::EmptyFile: return "EmptyFile";
        case ErrorKind::MissingInput: return "MissingInput";
        case ErrorKind::InsufficientData: return "InsufficientData";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NoBenignRecords: return "NoBenignRecords";
        case ErrorKind::SequenceLongerThanData: return "SequenceLongerThanData";
        case ErrorKind::NeedAtLeastTwoSequences: return "NeedAtLeastTwoSequences";
        case ErrorKind::TooFewRecords: return "TooFewRecords";
        case ErrorKind::TargetBelowInput: return "TargetBelowInput";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::VersionMismatch: return "VersionMismatch";
        case ErrorKind::CorruptArtifact: return "CorruptArtifact";
        case ErrorKind::EmptyBatch: return "EmptyBatch";
        case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
        case ErrorKind::DivergedLoss: return "DivergedLoss";
        case ErrorKind::EmptyCalibrationSet: return "EmptyCalibrationSet";
        case ErrorKind::UnknownCategory: return "UnknownCategory";
        case ErrorKind::InsufficientCodes: return "InsufficientCodes";
        case ErrorKind::SchemaMismatch: return "SchemaMismatch";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail)
        : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace flowae
