#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace contactline {

enum class ErrorKind {
    validation,
    parse,
    numerical,
    closure,
    certification,
    domain_too_short,
    constraint,
    verification,
};

/// Base class for every error raised by the library. The kind decides the
/// process exit status of the command-line tool (see exit_code()).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0, std::string key = {})
        : Error(ErrorKind::parse, what), line_(line), key_(std::move(key)) {}
    std::size_t line() const noexcept { return line_; }
    const std::string& key() const noexcept { return key_; }

private:
    std::size_t line_;
    std::string key_;
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// The scalar closure for V(t) failed: either the response of the third
/// boundary functional to V vanished, or the secant iteration stalled.
class ClosureError : public Error {
public:
    ClosureError(const std::string& what, double last_residual, int iterations)
        : Error(ErrorKind::closure, what), last_residual_(last_residual), iterations_(iterations) {}
    double last_residual() const noexcept { return last_residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double last_residual_;
    int iterations_;
};

class CertificationError : public Error {
public:
    explicit CertificationError(const std::string& what) : Error(ErrorKind::certification, what) {}
};

class DomainTooShortError : public Error {
public:
    explicit DomainTooShortError(const std::string& what) : Error(ErrorKind::domain_too_short, what) {}
};

class ConstraintViolation : public Error {
public:
    explicit ConstraintViolation(const std::string& what) : Error(ErrorKind::constraint, what) {}
};

/// Wraps an error raised while advancing a run, tagging the step index.
class StepError : public Error {
public:
    StepError(const Error& cause, std::size_t step)
        : Error(cause.kind(), "step " + std::to_string(step) + ": " + cause.what()), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// 0 success, 1 validation/parse, 2 numerical failure, 3 verification failure.
int exit_code(ErrorKind kind) noexcept;

}  // namespace contactline
