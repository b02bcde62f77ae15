#pragma once

#include <stdexcept>
#include <string>

namespace seldoor {

enum class Errc {
  cycle_or_order_violation,
  duplicate_edge,
  self_loop,
  unknown_vertex,
  endpoint_in_conditioning_set,
  outcome_in_set,
  query_vertex_in_z,
  graph_too_large,
  order_violation,
  not_lower_triangular,
  sigma_not_pd,
  edge_coefficient_mismatch,
  singular_design,
  precondition_not_met,
  pd_generation_failed,
  unsupported_distribution,
  unsupported_function,
  nonlinear_model,
  parse_error,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::cycle_or_order_violation: return "cycle-or-order-violation";
    case Errc::duplicate_edge: return "duplicate-edge";
    case Errc::self_loop: return "self-loop";
    case Errc::unknown_vertex: return "unknown-vertex";
    case Errc::endpoint_in_conditioning_set: return "endpoint-in-conditioning-set";
    case Errc::outcome_in_set: return "outcome-in-set";
    case Errc::query_vertex_in_z: return "query-vertex-in-z";
    case Errc::graph_too_large: return "graph-too-large";
    case Errc::order_violation: return "order-violation";
    case Errc::not_lower_triangular: return "not-lower-triangular";
    case Errc::sigma_not_pd: return "sigma-not-pd";
    case Errc::edge_coefficient_mismatch: return "edge-coefficient-mismatch";
    case Errc::singular_design: return "singular-design";
    case Errc::precondition_not_met: return "precondition-not-met";
    case Errc::pd_generation_failed: return "pd-generation-failed";
    case Errc::unsupported_distribution: return "unsupported-distribution";
    case Errc::unsupported_function: return "unsupported-function";
    case Errc::nonlinear_model: return "nonlinear-model";
    case Errc::parse_error: return "parse-error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

// Outcome of a structural validation pass. `code` and `message` are
// meaningful only when `ok` is false; the message pinpoints the offending
// vertex, edge, or matrix entry.
struct ValidationResult {
  bool ok = true;
  Errc code = Errc::cycle_or_order_violation;
  std::string message;
};

inline ValidationResult valid() { return ValidationResult{}; }

inline ValidationResult invalid(Errc code, std::string message) {
  return ValidationResult{false, code, std::move(message)};
}

}  // namespace seldoor
