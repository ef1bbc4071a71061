#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ubsr {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class UnknownLanguageError : public Error {
public:
    explicit UnknownLanguageError(const std::string& lang)
        : Error("unregistered language: " + lang), language(lang) {}
    std::string language;
};

class BackendUnavailableError : public Error {
public:
    explicit BackendUnavailableError(const std::string& lang)
        : Error("no parser backend (grammar bundle) for language: " + lang), language(lang) {}
    std::string language;
};

/// Raised by an extractor program; `stage` is the zero-based index of the failing stage
/// (equal to the stage count when the final value is not a scalar).
class ExtractionError : public Error {
public:
    ExtractionError(std::size_t stage_index, const std::string& what)
        : Error("extractor stage " + std::to_string(stage_index) + ": " + what), stage(stage_index) {}
    std::size_t stage;
};

class RuleFileError : public Error {
public:
    using Error::Error;
};

class DuplicateKeyError : public Error {
public:
    using Error::Error;
};

class ConflictError : public Error {
public:
    using Error::Error;
};

class ResponseParseError : public Error {
public:
    using Error::Error;
};

class TruncatedResponseError : public ResponseParseError {
public:
    using ResponseParseError::ResponseParseError;
};

/// A candidate rule without an accept verdict reached a commit.
class RejectedCandidateError : public Error {
public:
    using Error::Error;
};

class ParadigmMismatchError : public Error {
public:
    using Error::Error;
};

}  // namespace ubsr
