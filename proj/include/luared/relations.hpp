#pragma once

#include "luared/decompose.hpp"
#include "luared/delta.hpp"
#include "luared/store.hpp"
#include "luared/term.hpp"

namespace luared {

// One rule application. Absent stores mean "unchanged"; rule_id names the
// figure rule (Fig13/break) or the design decision (DD/tuple-truncate) that
// fired.
struct StepResult {
  Term term;
  std::optional<ValueStore> sigma;
  std::optional<ObjectStore> theta;
  const char* rule_id = "";
};

// Each relation is a partial function of the redex (plus stores where the
// paper threads them); an empty result means "no rule of this relation
// applies". For any redex at most one relation matches.

std::optional<StepResult> step_stateless_stmt(const Term& redex);
std::optional<StepResult> step_stateless_expr(const Term& redex);
std::optional<StepResult> step_stateful(const Term& redex, const ValueStore& sigma,
                                        const ObjectStore& theta);
std::optional<StepResult> step_funcall(const Term& redex, const ValueStore& sigma);
std::optional<StepResult> step_builtin(const Term& redex, const ValueStore& sigma,
                                       const ObjectStore& theta, Engine& eng,
                                       const ReturnSites& sites);
std::optional<StepResult> step_metatable(const Term& redex, const ObjectStore& theta,
                                         const Engine& eng);

// How many of the six relations accept this redex (mutual-exclusivity probe;
// builtin dispatch is counted without running its effects).
int count_applicable_relations(const Term& redex, const ValueStore& sigma,
                               const ObjectStore& theta, const Engine& eng);

} // namespace luared
