#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace disco {

/// Broad failure class; the CLI maps it to an exit code.
enum class ErrorCategory { usage, data, backend };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string code, const std::string& message)
      : std::runtime_error(message), category_(category), code_(std::move(code)) {}

  ErrorCategory category() const noexcept { return category_; }
  /// Stable machine-readable identifier, e.g. "parse_error".
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorCategory category_;
  std::string code_;
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& message)
      : Error(ErrorCategory::usage, "argument_error", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error(ErrorCategory::usage, "configuration_error", message) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0)
      : Error(ErrorCategory::data, "parse_error",
              line == 0 ? message : "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  /// 1-based line (or record) number; 0 when not applicable.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& message)
      : Error(ErrorCategory::data, "integrity_error", message) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorCategory::data, "validation_error", message) {}
};

class ConflictError : public Error {
 public:
  explicit ConflictError(const std::string& message)
      : Error(ErrorCategory::data, "conflict", message) {}
};

class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& message)
      : Error(ErrorCategory::data, "not_found", message) {}
};

class NotApplicableError : public Error {
 public:
  explicit NotApplicableError(const std::string& message)
      : Error(ErrorCategory::data, "not_applicable", message) {}
};

class InsufficientDataError : public Error {
 public:
  explicit InsufficientDataError(const std::string& message)
      : Error(ErrorCategory::data, "insufficient_data", message) {}
};

class InsufficientDiversityError : public Error {
 public:
  InsufficientDiversityError(const std::string& message, std::size_t obtained)
      : Error(ErrorCategory::data, "insufficient_diversity", message), obtained_(obtained) {}

  std::size_t obtained() const noexcept { return obtained_; }

 private:
  std::size_t obtained_;
};

class BackendUnavailableError : public Error {
 public:
  explicit BackendUnavailableError(const std::string& message)
      : Error(ErrorCategory::backend, "backend_unavailable", message) {}
};

class RequestRejectedError : public Error {
 public:
  RequestRejectedError(int status, std::string body_excerpt)
      : Error(ErrorCategory::backend, "request_rejected",
              "backend rejected request with HTTP " + std::to_string(status) + ": " + body_excerpt),
        status_(status),
        body_excerpt_(std::move(body_excerpt)) {}

  int status() const noexcept { return status_; }
  const std::string& body_excerpt() const noexcept { return body_excerpt_; }

 private:
  int status_;
  std::string body_excerpt_;
};

class EmptyOutputError : public Error {
 public:
  explicit EmptyOutputError(const std::string& message)
      : Error(ErrorCategory::backend, "empty_output", message) {}
};

}  // namespace disco
