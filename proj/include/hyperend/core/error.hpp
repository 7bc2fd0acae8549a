#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hyperend {

// Error categories surfaced to callers and mapped onto CLI exit codes.
enum class ErrorKind {
  degenerate_axis,
  out_of_domain,
  non_positive_definite,
  singular_morphism,
  not_self_adjoint,
  atlas_mismatch,
  invalid_differential,
  rejected_datum,
  singular_leaf,
  unattainable_curvature,
  non_convergence,
  invalid_multicurve,
  invalid_representation,
  critical_point,
  invalid_germ,
  singular_push,
  invariant_violation,
  parse_error,
  io_error,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::degenerate_axis: return "degenerate-axis";
    case ErrorKind::out_of_domain: return "out-of-domain";
    case ErrorKind::non_positive_definite: return "non-positive-definite";
    case ErrorKind::singular_morphism: return "singular-morphism";
    case ErrorKind::not_self_adjoint: return "not-self-adjoint";
    case ErrorKind::atlas_mismatch: return "atlas-mismatch";
    case ErrorKind::invalid_differential: return "invalid-differential";
    case ErrorKind::rejected_datum: return "rejected-datum";
    case ErrorKind::singular_leaf: return "singular-leaf";
    case ErrorKind::unattainable_curvature: return "unattainable-curvature";
    case ErrorKind::non_convergence: return "non-convergence";
    case ErrorKind::invalid_multicurve: return "invalid-multicurve";
    case ErrorKind::invalid_representation: return "invalid-representation";
    case ErrorKind::critical_point: return "critical-point";
    case ErrorKind::invalid_germ: return "invalid-germ";
    case ErrorKind::singular_push: return "singular-push";
    case ErrorKind::invariant_violation: return "invariant-violation";
    case ErrorKind::parse_error: return "parse-error";
    case ErrorKind::io_error: return "io-error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& what)
      : std::runtime_error(std::string(module) + "." + std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

  // "<module>.<kind>", e.g. "infinity_data.invalid-differential".
  std::string code() const { return module_ + "." + std::string(to_string(kind_)); }

 private:
  ErrorKind kind_;
  std::string module_;
};

// Default relative tolerance for closed-form identities.
struct Tolerances {
  double closed_form = 1e-10;
  double self_adjoint = 1e-8;
  double determinant = 1e-6;
  double overlap = 1e-6;
  double newton = 1e-8;
  double refinement_floor = 1e-10;
};

}  // namespace hyperend
