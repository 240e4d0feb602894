#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace elig {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed serialized input (JSON records, transition tables, UTF-8).
class FormatError : public Error {
public:
    using Error::Error;
};

// Caller-supplied arguments violate a documented precondition.
class InputError : public Error {
public:
    using Error::Error;
};

// A document failed validation; carries every violation found.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> violations)
        : Error(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "document validation failed";
        for (const auto& s : v) {
            out += "; ";
            out += s;
        }
        return out;
    }

    std::vector<std::string> violations_;
};

// Two annotations of the same type claim a common token.
class OverlapError : public Error {
public:
    OverlapError(std::string first, std::string second, std::size_t token)
        : Error("same-type annotations '" + first + "' and '" + second + "' both cover token " +
                std::to_string(token)),
          first_(std::move(first)),
          second_(std::move(second)),
          token_(token) {}

    const std::string& first() const noexcept { return first_; }
    const std::string& second() const noexcept { return second_; }
    std::size_t token() const noexcept { return token_; }

private:
    std::string first_;
    std::string second_;
    std::size_t token_;
};

// Label grid rows are not log-probabilities.
class NormalizationError : public Error {
public:
    using Error::Error;
};

// Amount string could not be parsed.
class ParseError : public Error {
public:
    using Error::Error;
};

// Remote inference server could not be reached or timed out.
class BackendUnavailable : public Error {
public:
    using Error::Error;
};

// Remote inference server answered with something that violates the wire protocol.
class ProtocolError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

}  // namespace elig
