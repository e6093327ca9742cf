#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <variant>

#include "luared/parser.hpp"
#include "luared/store.hpp"
#include "luared/term.hpp"

namespace luared {

// Fixed execution environment: the label counter (shared with the parser so
// dynamic loading continues it), the print sink, and the identities created
// by bootstrap. Never touched by pure reductions.
struct Engine {
  LabelAllocator labels;
  std::ostream* out = nullptr;
  ObjId globals = 0;     // the bootstrap _ENV table
  ObjId string_lib = 0;  // string library table (shared string metatable's __index)
  ObjId string_meta = 0; // the per-type metatable shared by all strings
  RefId env_ref = 0;     // sigma reference bound to _ENV at injection
  FunLabel getiter_label = 0;
  std::map<std::string, Term> wrappers; // service name -> bootstrap wrapper literal
  std::set<RefId> env_refs;             // refs holding _ENV bindings (dump check)
};

// Position of each enclosing Return label's call site, innermost first.
// error(msg, level) resolves its level against this.
using ReturnSites = std::vector<SourceRef>;

enum class BuiltinCategory : std::uint8_t { Pure, ReadsTheta, WritesTheta };

struct DeltaResult {
  Term term;
  std::optional<ObjectStore> theta; // writers only
  std::optional<ValueStore> sigma;  // load only: binds _ENV for the new chunk
};

using BuiltinFn = std::function<DeltaResult(const std::vector<Value>& args, const ValueStore& sigma,
                                            const ObjectStore& theta, Engine& eng,
                                            const ReturnSites& sites, const SourceRef& where)>;

struct BuiltinEntry {
  BuiltinCategory cat;
  BuiltinFn fn;
};

// Closed after start-up; unknown service names are engine faults.
const std::map<std::string, BuiltinEntry>& builtin_registry();

// ---- primitive delta pieces used directly by the relations --------------

// Number coercion as used by the arithmetic rules (base 10): numbers pass
// through, strings parse with Lua's lexical conventions, all else fails.
std::optional<double> delta_tonumber(const Value& v);
std::optional<double> delta_tonumber_base(const std::string& s, int base);

double delta_arith(BinKind op, double a, double b); // + - * / % ^
double delta_neg(double a);

Value delta_rawget(const ObjectStore& theta, ObjId obj, const Value& key);
// Error message instead of a store when the key is nil or NaN.
std::variant<ObjectStore, std::string> delta_rawset(const ObjectStore& theta, ObjId obj,
                                                    const Value& key, const Value& val);

// tostring without metatables (default renderings).
std::string delta_tostring_raw(const Value& v);

// ---- metafunctions -------------------------------------------------------

// Handler from v1's metatable first, then v2's; nil when absent.
Value getbinhandler(const Value& v1, const Value& v2, const std::string& event,
                    const ObjectStore& theta, const Engine& eng);

// Raw lookup of `event` in the metatable of v: a table's own metatable, the
// shared string metatable for strings, nil for everything else.
Value indexmetatable(const Value& v, const std::string& event, const ObjectStore& theta,
                     const Engine& eng);

// Metatable of a value (nil when it has none), before any __metatable veil.
Value metatable_of(const Value& v, const ObjectStore& theta, const Engine& eng);

// + -> "__add", .. -> "__concat", == -> "__eq", ...
std::string binopeventkey(BinKind op);

// Reference-interpreter phrasing for each error label.
std::string errmessage(LabelKind label, const std::vector<std::string>& type_names);

// "chunk:line: msg" when the stamp is present, msg alone otherwise.
std::string position_prefix(const SourceRef& where, const std::string& msg);

// $builtIn error("...", 0) with the message already positioned.
Term mk_error_call(const std::string& full_msg);

// Positioned like the reference's luaL_error: at the caller of the running
// builtin, i.e. the innermost return site.
Term mk_error_call_at(const ReturnSites& sites, const std::string& msg);

std::string bad_argument(int n, const std::string& fname, const std::string& extra);

// ---- bootstrap -----------------------------------------------------------

// Populates the global environment: wrapper functions over $builtIn for
// every service, the math/string/table libraries, the shared string
// metatable, and the sigma binding for _ENV. Returns the loaded stores.
std::pair<ValueStore, ObjectStore> bootstrap_env(Engine& eng);

// ---- dynamic chunks (load / string.dump) ---------------------------------

// Compiles source text or a binary chunk into a vararg function with _ENV
// bound to env. On failure yields the <nil, message> tuple.
DeltaResult load_chunk(const std::string& bytes, const std::string& chunk_name,
                       const std::string& mode, const Value& env, const ValueStore& sigma,
                       Engine& eng);

// Serialized form of a function (0x1B-prefixed); Lua-level error message on
// functions that capture anything beyond _ENV.
struct DumpResult {
  bool ok;
  std::string bytes_or_error;
};
DumpResult dump_function(const Term& fn, const Engine& eng);

} // namespace luared
