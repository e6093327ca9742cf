#pragma once

#include <optional>
#include <vector>

#include "luared/term.hpp"

namespace luared {

// One evaluation-context frame: a node plus the child slot holding the hole.
// Slots are kid indices; table fields use kFieldBase + 2*index (+1 for the
// value position of a keyed field).
struct Frame {
  Term node;
  int slot;
};

inline constexpr int kFieldBase = 1000;

using Context = std::vector<Frame>;

// How the redex was reached. Cross kinds mark the label-crossing rules:
// the redex is then the intercepting labeled term (or, for *Top, the focus
// itself with the full path as context).
enum class Cross : std::uint8_t {
  None,
  BreakCross,  // redex = innermost labeled term around a focused break
  ReturnCross, // redex = innermost labeled term around a focused return
  ErrCross,    // redex = innermost ProtMd-labeled term around a focused $err
  BreakTop,    // focused break with no enclosing label
  ReturnTop,   // focused return with no enclosing label (chunk return)
  ErrTop,      // focused $err with no enclosing ProtMd: program aborts
};

struct Decomposition {
  Context context;
  Term redex;
  Cross cross = Cross::None;
};

// Answers: ; | $err v | a value | a value tuple.
bool is_answer(const Term& t);

// Unique decomposition of a non-answer closed term. Returns nullopt exactly
// on answers; throws EngineFault on malformed terms.
std::optional<Decomposition> decompose(const Term& t);

// Inverse of decompose: fills the hole.
Term plug(const Context& ctx, const Term& t);

// E_lf / E_np matchers against a label body. The target must be at the
// body's evaluation focus with no intervening label (no ProtMd for err).
bool body_is_elf_break(const Term& body);
std::optional<Term> body_elf_return(const Term& body); // the return statement
std::optional<Term> body_enp_err(const Term& body);    // the $err term

// True iff the labeled term is ready for its label-crossing rule:
// (E_lf[[break]])^Break, (E_lf[[return <v,...>]])^Return/Break, or
// (E_np[[$err v]])^ProtMd.
bool innermost_label_context(const Term& labeled, LabelKind which);

} // namespace luared
