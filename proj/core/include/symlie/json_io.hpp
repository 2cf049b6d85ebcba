#pragma once
// JSON serialization for the core data types. Emission uses insertion-ordered
// objects with a fixed field order, so equal inputs produce byte-identical
// files; parsing accepts the same shapes and maps malformed input to
// ValidationError.

#include <string>

#include <nlohmann/json.hpp>

#include "symlie/pauli_core.hpp"
#include "symlie/plan.hpp"
#include "symlie/qudit_energy.hpp"

namespace symlie {

using Json = nlohmann::ordered_json;

Json to_json(const PauliSumQ& a);
Json to_json(const PauliSumF& a);
PauliSumQ pauli_sum_exact_from_json(const Json& j);
PauliSumF pauli_sum_float_from_json(const Json& j);

Json to_json(const SymmetrySpec& spec);
SymmetrySpec symmetry_from_json(const Json& j);

Json to_json(const GenRef& g);
GenRef gen_from_json(const Json& j);

Json to_json(const CircuitPlan& plan);
CircuitPlan plan_from_json(const Json& j);

Json to_json(const QuditSpec& spec);
QuditSpec qudit_spec_from_json(const Json& j);

Json to_json(const QuditGen& g);
QuditGen qudit_gen_from_json(const Json& j);

Json to_json(const QuditOperator& op);
QuditOperator qudit_operator_from_json(const Json& j);

Json to_json(const QuditPlan& plan);
QuditPlan qudit_plan_from_json(const Json& j);

// Compile targets: a Pauli hamiltonian with an evolution time, or a qudit
// operator with its spec.
struct CompileTarget {
  PauliSumQ hamiltonian;
  double t = 1.0;
};
CompileTarget compile_target_from_json(const Json& j);

struct QuditTarget {
  QuditSpec spec;
  QuditOperator hamiltonian;
  double t = 1.0;
};
QuditTarget qudit_target_from_json(const Json& j);

std::string dump_json(const Json& j);
Json parse_json_text(const std::string& text);
Json parse_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace symlie
