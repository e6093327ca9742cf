#pragma once

#include <string>

#include "luared/term.hpp"

namespace luared {

// Lua-like rendering of a term. Run-time constructs print as pseudo-syntax
// (r#1, obj#2, <v,...>, ($iter ...), (t)^Label, $builtIn f(...), $err v).
// max_depth < 0 means unlimited; deeper subterms collapse to "...".
std::string print_term(const Term& t, int max_depth = -1);

// Reparseable rendering for parser output: desugared loops print back in
// `for` syntax, declarations as statement lists. Faults on run-time kinds.
std::string print_source(const Term& t);

} // namespace luared
