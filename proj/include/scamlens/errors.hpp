#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scamlens {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// email_ingest
class MalformedMessage : public Error {
public:
    using Error::Error;
};

// llm_gateway
class UnparseableResponse : public Error {
public:
    using Error::Error;
};

class BackendUnavailable : public Error {
public:
    using Error::Error;
};

/// The final attempt ran past its deadline. Also a BackendUnavailable, since
/// it is only raised once retries are exhausted.
class Timeout : public BackendUnavailable {
public:
    using BackendUnavailable::BackendUnavailable;
};

class AuthFailure : public Error {
public:
    using Error::Error;
};

// corpus
class CorpusFormatError : public Error {
public:
    CorpusFormatError(std::size_t line, const std::string& reason)
        : Error("corpus line " + std::to_string(line) + ": " + reason), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateId : public Error {
public:
    explicit DuplicateId(std::string id) : Error("duplicate example id: " + id), id_(std::move(id)) {}

    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class TooFewExamples : public Error {
public:
    using Error::Error;
};

class OneClassOnly : public Error {
public:
    using Error::Error;
};

// service / annotation store
class UnknownExample : public Error {
public:
    explicit UnknownExample(const std::string& id) : Error("unknown example: " + id) {}
};

class StoreWriteFailure : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace scamlens
