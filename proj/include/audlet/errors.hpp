#pragma once

#include <stdexcept>
#include <string>

namespace audlet {

// Error taxonomy; the CLI maps these onto exit codes:
// domain_error -> 2, format_error -> 3, numerical_error (and derived) -> 4.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid argument or argument outside the mathematical domain.
struct domain_error : error {
  using error::error;
};

// Malformed or unsupported file content.
struct format_error : error {
  using error::error;
};

// Non-convergence, rank deficiency and similar runtime failures.
struct numerical_error : error {
  using error::error;
};

// Configured size caps exceeded; message names the cap.
struct capacity_error : numerical_error {
  using numerical_error::numerical_error;
};

// A filter system failed to form an invertible frame.
struct frame_error : numerical_error {
  using numerical_error::numerical_error;
};

}  // namespace audlet
