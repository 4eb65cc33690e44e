#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sidalign {

// Base class for every error this library raises on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define SIDALIGN_DEFINE_ERROR(Name)                \
    struct Name : Error {                          \
        using Error::Error;                        \
    }

// vocab
SIDALIGN_DEFINE_ERROR(MalformedSid);
SIDALIGN_DEFINE_ERROR(LevelOrderError);
SIDALIGN_DEFINE_ERROR(CodeRangeError);
SIDALIGN_DEFINE_ERROR(UnknownToken);

// backend
SIDALIGN_DEFINE_ERROR(InvalidConfig);
SIDALIGN_DEFINE_ERROR(EmptyCandidates);
SIDALIGN_DEFINE_ERROR(ContextNotSidReady);
SIDALIGN_DEFINE_ERROR(BackendUnavailable);
SIDALIGN_DEFINE_ERROR(UnsupportedCapability);

// align
SIDALIGN_DEFINE_ERROR(EmptyHistory);
SIDALIGN_DEFINE_ERROR(EmptyInput);
SIDALIGN_DEFINE_ERROR(NegativeAlpha);

// compress
SIDALIGN_DEFINE_ERROR(RemoteUnavailable);
SIDALIGN_DEFINE_ERROR(NonConformingReply);
SIDALIGN_DEFINE_ERROR(BudgetExceeded);

// decode
SIDALIGN_DEFINE_ERROR(SpaceTooLarge);

// diagnose
SIDALIGN_DEFINE_ERROR(MissingSubspace);
SIDALIGN_DEFINE_ERROR(DimensionMismatch);
SIDALIGN_DEFINE_ERROR(DegenerateData);

// evalx
SIDALIGN_DEFINE_ERROR(DuplicateInRanking);

#undef SIDALIGN_DEFINE_ERROR

// Dataset loading errors carry the 1-based line they came from.
struct DatasetError : Error {
    DatasetError(std::size_t line, const std::string& what_arg)
        : Error("line " + std::to_string(line) + ": " + what_arg), line(line) {}
    std::size_t line;
};

struct ParseError : DatasetError {
    using DatasetError::DatasetError;
};

struct InvalidSid : DatasetError {
    using DatasetError::DatasetError;
};

struct MissingField : DatasetError {
    MissingField(std::size_t line, const std::string& field)
        : DatasetError(line, "missing field \"" + field + "\""), field(field) {}
    std::string field;
};

}  // namespace sidalign
