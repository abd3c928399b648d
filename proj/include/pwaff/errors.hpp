#pragma once

#include <stdexcept>
#include <string>

namespace pwaff {

enum class ErrorKind {
  dimension_mismatch,
  singular_matrix,
  unbounded_polytope,
  empty_interior,
  singular_point,
  invalid_map,
  resource_limit,
  degenerate_piece,
  estimation_failed,
  parse_error,
};

const char* to_string(ErrorKind kind);

/// All library failures are reported through this exception; `kind()` lets
/// callers (the CLI in particular) map them onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pwaff
