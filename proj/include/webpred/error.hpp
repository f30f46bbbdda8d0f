#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace webpred {

/// Malformed or inconsistent input data (bad rows, overlapping visits).
class InputError : public std::runtime_error {
public:
  explicit InputError(const std::string &what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what
                                : what),
        line_(line) {}

  /// Same error, with the message prefixed by the file it came from.
  static InputError in_file(const std::string &file, const InputError &e) {
    InputError out(e);
    static_cast<std::runtime_error &>(out) =
        std::runtime_error(file + ": " + e.what());
    return out;
  }

  /// 1-based line of the offending record, 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Invalid configuration or arguments to a pipeline stage.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A quantity that has no defined value for the given input (e.g. the
/// entropy of an empty trajectory, Pearson r of a constant series).
class UndefinedError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

} // namespace webpred
