#include "nerve/errors.hpp"

namespace nerve {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::format: return "format_error";
    case ErrorKind::truncation: return "truncation_error";
    case ErrorKind::data: return "data_error";
    case ErrorKind::argument: return "argument_error";
    case ErrorKind::io: return "io_error";
    case ErrorKind::insufficient_samples: return "insufficient_samples";
    case ErrorKind::pairing: return "pairing_error";
    case ErrorKind::degenerate_spectrum: return "degenerate_spectrum";
    case ErrorKind::non_psd: return "non_psd";
    case ErrorKind::truncated_spectrum: return "truncated_spectrum";
    case ErrorKind::undefined_correlation: return "undefined_correlation";
  }
  return "unknown_error";
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace nerve
