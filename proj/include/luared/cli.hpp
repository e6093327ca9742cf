#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "luared/term.hpp"

namespace luared {

// Exit codes: 0 completed, 1 Lua error, 2 parse error, 3 fuel exhausted or
// stuck. Program output goes to `out`, diagnostics to `err`.
int cmd_run(const std::string& path, std::uint64_t fuel, std::ostream& out, std::ostream& err);

// Prints "#k [rule_id] <term>" per step, with store sizes and the entries a
// step touched; terms deeper than max_print_depth collapse to "...".
int cmd_trace(const std::string& path, std::uint64_t fuel, int max_print_depth, std::ostream& out,
              std::ostream& err);

// Dump of the desugared parse (reparseable source form).
int cmd_parse(const std::string& path, std::ostream& out, std::ostream& err);

// Runs corpus_dir/<feature>/<name>.lua against <name>.expected (exact bytes)
// and optional <name>.err (substring of the error value); prints one line
// per case plus a per-feature summary. Exit 0 only if everything passes.
int cmd_test(const std::string& corpus_dir, std::uint64_t fuel, std::ostream& out,
             std::ostream& err);

} // namespace luared
