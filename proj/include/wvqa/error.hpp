#pragma once

#include <stdexcept>
#include <string>

namespace wvqa {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input data (JSONL lines, model output, label violations).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Network-level failure talking to a provider; safe to retry.
class TransportError : public Error {
public:
    using Error::Error;
};

/// Terminal provider failure (4xx, schema mismatch); not retryable.
class ProviderError : public Error {
public:
    ProviderError(int status, const std::string& what) : Error(what), status_(status) {}
    int status() const { return status_; }

private:
    int status_ = 0;
};

}  // namespace wvqa
