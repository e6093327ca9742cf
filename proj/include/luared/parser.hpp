#pragma once

#include <variant>

#include "luared/lexer.hpp"
#include "luared/term.hpp"

namespace luared {

struct SourceChunk {
  std::string bytes;
  std::string chunk_name = "?";
};

// Fresh labels are handed out in source order; dynamic loading keeps
// drawing from the same counter.
struct LabelAllocator {
  FunLabel next = 1;
  FunLabel fresh() { return next++; }
};

// Parses a chunk into the term language. The result uses only formalized
// constructs: unbound identifiers become _ENV["x"] (with _ENV itself left
// as a bound name), declaration statements become local..in..end, function
// statements become assignments, and repeat/for reduce to while forms.
std::variant<Term, ParseError> parse_chunk(const SourceChunk& src, LabelAllocator& labels);

// Single expression; `...` is rejected here (no enclosing vararg function).
std::variant<Term, ParseError> parse_expression(const SourceChunk& src, LabelAllocator& labels);

// Hygienic binder names used by the loop desugarings; they contain a '$'
// so they can never collide with source identifiers.
inline constexpr const char* kForVar = "$for_var";
inline constexpr const char* kForLimit = "$for_limit";
inline constexpr const char* kForStep = "$for_step";
inline constexpr const char* kForIter = "$for_f";
inline constexpr const char* kForState = "$for_s";
inline constexpr const char* kForCtl = "$for_ctl";

} // namespace luared
