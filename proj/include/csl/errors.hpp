#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace csl {

// All library failures derive from csl::Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ln / sqrt / division outside the function's domain, or a non-finite result.
class DomainError : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t offset)
      : Error(message + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownIdentifierError : public SyntaxError {
 public:
  UnknownIdentifierError(const std::string& name, std::size_t offset)
      : SyntaxError("unknown identifier '" + name + "'", offset), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

// Wrong number of variable values handed to an expression.
class ArityError : public Error {
 public:
  using Error::Error;
};

// Jet order too low for the requested derivative quantity.
class OrderError : public Error {
 public:
  using Error::Error;
};

// Degenerate tangent basis or other loss of immersion regularity.
class RegularityError : public Error {
 public:
  using Error::Error;
};

// Quadrature, finite differences or projection failed to reach tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string path, int line, const std::string& message)
      : Error(format(path, line, message)), path_(std::move(path)), line_(line), message_(message) {}
  const std::string& path() const noexcept { return path_; }
  int line() const noexcept { return line_; }
  const std::string& message() const noexcept { return message_; }

 private:
  static std::string format(const std::string& path, int line, const std::string& message) {
    std::string out = "config error";
    if (!path.empty()) out += " at " + path;
    if (line > 0) out += " (line " + std::to_string(line) + ")";
    return out + ": " + message;
  }
  std::string path_;
  int line_;
  std::string message_;
};

}  // namespace csl
