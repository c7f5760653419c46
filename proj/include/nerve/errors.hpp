#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nerve {

/// Category of a toolkit failure. Stable names are emitted in the CLI's
/// machine-readable error summary.
enum class ErrorKind {
  format,
  truncation,
  data,
  argument,
  io,
  insufficient_samples,
  pairing,
  degenerate_spectrum,
  non_psd,
  truncated_spectrum,
  undefined_correlation,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace nerve
