#pragma once

#include <functional>

#include "luared/decompose.hpp"
#include "luared/delta.hpp"
#include "luared/relations.hpp"
#include "luared/store.hpp"

namespace luared {

struct Configuration {
  ValueStore sigma;
  ObjectStore theta;
  Term term;
};

struct Outcome {
  enum class Tag { Completed, Errored, FuelExhausted, Stuck } tag;
  Value error;            // Errored: the $err payload
  Configuration at;       // FuelExhausted / Stuck
  std::string diagnostic; // Stuck
};

inline constexpr std::uint64_t kDefaultFuel = 10'000'000;

// One application of the top-level relation: dispatches the unique redex,
// threads the stores, and applies the Fig-26 error rules. Answers yield an
// Outcome instead. rule_id (when given) receives the name of the fired rule.
std::variant<Configuration, Outcome> step(const Configuration& c, Engine& eng,
                                          std::string* rule_id = nullptr);

// The reflexive-transitive closure, bounded by fuel.
Outcome run(Configuration c, Engine& eng, std::uint64_t fuel = kDefaultFuel);

// Like run, but reports every successor configuration and the rule that
// produced it. Stops early if the callback returns false.
Outcome run_trace(Configuration c, Engine& eng, std::uint64_t fuel,
                  const std::function<bool(const Configuration&, const std::string&)>& on_step);

// Bootstraps the stores and closes the chunk: _ENV becomes the global
// table's reference, and the chunk's own vararg expression becomes the
// empty tuple. The top level is not wrapped in protected mode.
Configuration inject(const Term& chunk, Engine& eng);

// Fig-26 rules that live in the top-level relation rather than in a
// component relation (exposed so the uniqueness tests can probe them).
std::optional<StepResult> step_protmd(const Term& redex);

} // namespace luared
