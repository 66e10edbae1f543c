#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace lrdetect {

/// Base class for every error raised by the library. `code()` is a short
/// machine-readable tag used by the CLI diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain", what) {}
};

class TooShortError : public Error {
public:
    explicit TooShortError(const std::string& what) : Error("too_short", what) {}
};

class DegenerateInputError : public Error {
public:
    explicit DegenerateInputError(const std::string& what) : Error("degenerate", what) {}
};

class SingularSystemError : public Error {
public:
    explicit SingularSystemError(const std::string& what) : Error("singular", what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error("numerical", what) {}
};

class LengthMismatchError : public Error {
public:
    explicit LengthMismatchError(const std::string& what) : Error("length_mismatch", what) {}
};

class OutOfSpanError : public Error {
public:
    explicit OutOfSpanError(const std::string& what) : Error("out_of_span", what) {}
};

/// Malformed input files: missing columns, non-uniform timestamps, bad schema.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error("format", what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("io", what) {}
};

} // namespace lrdetect
