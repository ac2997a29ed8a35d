#pragma once

#include <stdexcept>
#include <string>

namespace eversim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numeric argument outside the domain of a formula (negative length,
// Poisson ratio >= 0.5, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Caller supplied an unusable value (empty catalog, retracting more than is
// everted, count out of range, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

// Scene, script, config, or catalog file could not be loaded. Carries the
// offending location so the CLI can print "file:line: field: message".
class LoadError : public Error {
 public:
  LoadError(std::string file, int line, std::string field, const std::string& message)
      : Error(format(file, line, field, message)),
        file_(std::move(file)),
        line_(line),
        field_(std::move(field)) {}

  const std::string& file() const noexcept { return file_; }
  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(const std::string& file, int line, const std::string& field,
                            const std::string& message) {
    std::string out = file.empty() ? std::string("<input>") : file;
    if (line > 0) out += ":" + std::to_string(line);
    out += ": ";
    if (!field.empty()) out += field + ": ";
    out += message;
    return out;
  }

  std::string file_;
  int line_ = 0;
  std::string field_;
};

// Wire-protocol record that cannot be turned into a message. `field` names the
// offending field (or the unknown kind).
class DecodeError : public Error {
 public:
  DecodeError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace eversim
