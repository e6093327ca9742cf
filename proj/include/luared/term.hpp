#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace luared {

using RefId = std::uint64_t;    // value-store references
using ObjId = std::uint64_t;    // object-store references (disjoint tag space)
using FunLabel = std::uint64_t; // one per function-literal occurrence

// Thrown on internal invariant violations (never for Lua-level errors).
struct EngineFault : std::runtime_error {
  explicit EngineFault(const std::string& what) : std::runtime_error(what) {}
};

enum class Kind : std::uint8_t {
  // statements
  Skip,           // ;
  If,             // if e then s else s end         kids: [guard, then, else]
  While,          // while e do s end               kids: [guard, body]
  Iter,           // $iter e do s end (run-time)    kids: [guard, body]
  Break,          // break
  Seq,            // s s                            kids: [first, rest]
  LocalIn,        // local x,... = e,... in s end   kids: [rhs tuple, body]
  Assign,         // var,... = e,...                kids: [lv..., rhs tuple]
  CallStat,       // e(e,...) as a statement        kids: [fn, args tuple]
  MethodCallStat, // e:n(e,...) as a statement      kids: [obj, args tuple]
  Return,         // return e,...                   kids: [tuple]
  // value expressions
  Nil,
  True,
  False,
  Num,      // num
  Str,      // str (byte sequence)
  Function, // function l (x,...) s end            kids: [body]
  ObjRef,   // run-time object reference
  // other expressions
  Ref,        // run-time value-store reference
  Name,       // identifier (parser output only; closed terms have none but _ENV)
  Vararg,     // ...
  Index,      // e[e]                              kids: [obj, key]
  Paren,      // (e)                               kids: [inner]
  Table,      // {field,...}                       fields
  Call,       // e(e,...)                          kids: [fn, args tuple]
  MethodCall, // e:n(e,...)                        kids: [obj, args tuple]
  BinOp,      // e op e                            kids: [l, r]
  UnOp,       // op e                              kids: [operand]
  Tuple,      // <e,...> (run-time; also carries source expression lists)
  BuiltIn,    // $builtIn name(e,...)              kids: [args tuple]
  // run-time control
  Labeled, // (t)^label                            kids: [body]
  Err,     // $err v                               kids: [value]
};

enum class BinKind : std::uint8_t { Add, Sub, Mul, Div, Mod, Pow, Concat, Lt, Le, Gt, Ge, Eq, And, Or };
enum class UnKind : std::uint8_t { Neg, Not, Len };

// Break/Return/ProtMd are control labels; the rest mark a pending metatable dispatch.
enum class LabelKind : std::uint8_t {
  Break,
  Return,
  ProtMd,
  ArithWO,
  ConcatWO,
  OrdWO,
  NegWO,
  LenWO,
  EqFail,
  Index,
  NewIndex,
  WFunCall,
};

bool is_control_label(LabelKind k);
const char* label_name(LabelKind k);

// Source position stamp; chunk is shared across all nodes of one parse.
struct SourceRef {
  std::shared_ptr<const std::string> chunk;
  int line = 0;

  bool present() const { return chunk != nullptr && line > 0; }
};

struct Node;
using Term = std::shared_ptr<const Node>;

struct TableField {
  bool keyed = false;
  Term key; // null for positional fields
  Term val;
};

struct Node {
  Kind kind;
  BinKind bin = BinKind::Add;
  UnKind un = UnKind::Neg;
  LabelKind label = LabelKind::Break;
  bool expr_flavor = false; // Labeled Return/ProtMd: completes to a tuple, not skip
  bool is_vararg = false;   // Function
  double num = 0;
  std::string str; // Str payload, Name, method name, builtin service name
  FunLabel fun_label = 0;
  RefId ref = 0;
  ObjId obj = 0;
  std::vector<std::string> names; // LocalIn binders, Function parameters
  std::vector<Term> kids;
  std::vector<TableField> fields; // Table
  SourceRef where;
};

// ---- constructors ------------------------------------------------------

Term mk_skip();
Term mk_if(Term guard, Term then_s, Term else_s);
Term mk_while(Term guard, Term body);
Term mk_iter(Term guard, Term body);
Term mk_break();
Term mk_seq(Term first, Term rest);
Term mk_localin(std::vector<std::string> names, Term rhs_tuple, Term body);
Term mk_assign(std::vector<Term> lvalues, Term rhs_tuple);
Term mk_callstat(Term fn, Term args_tuple);
Term mk_methodcallstat(Term obj, std::string name, Term args_tuple);
Term mk_return(Term tuple);
Term mk_nil();
Term mk_true();
Term mk_false();
Term mk_bool(bool b);
Term mk_num(double v);
Term mk_str(std::string bytes);
Term mk_function(FunLabel label, std::vector<std::string> params, bool is_vararg, Term body);
Term mk_objref(ObjId id);
Term mk_ref(RefId id);
Term mk_name(std::string name);
Term mk_vararg();
Term mk_index(Term obj, Term key);
Term mk_paren(Term inner);
Term mk_table(std::vector<TableField> fields);
Term mk_call(Term fn, Term args_tuple);
Term mk_methodcall(Term obj, std::string name, Term args_tuple);
Term mk_binop(BinKind op, Term l, Term r);
Term mk_unop(UnKind op, Term operand);
Term mk_tuple(std::vector<Term> elems);
Term mk_builtin(std::string service, Term args_tuple);
Term mk_labeled(LabelKind label, Term body, bool expr_flavor = false);
Term mk_err(Term value);

// Copy of t with a source stamp attached.
Term with_where(const Term& t, SourceRef where);

// ---- values ------------------------------------------------------------

struct Value {
  enum class Tag : std::uint8_t { Nil, Bool, Num, Str, Fun, Obj } tag = Tag::Nil;
  bool b = false;
  double n = 0;
  std::shared_ptr<const std::string> s;
  Term fun; // the Function node itself; a definition is its own closure
  ObjId obj = 0;

  static Value nil() { return {}; }
  static Value boolean(bool v);
  static Value number(double v);
  static Value str(std::string v);
  static Value str(std::shared_ptr<const std::string> v);
  static Value function(Term fn);
  static Value object(ObjId id);

  bool is_nil() const { return tag == Tag::Nil; }
  bool truthy() const { return !(tag == Tag::Nil || (tag == Tag::Bool && !b)); }
};

// Lua's raw (non-metatable) equality. Functions compare by label plus
// substituted body, which reproduces 5.2's closure-reuse behaviour.
bool raw_equal(const Value& a, const Value& b);

// nil and false are the only falsy values.
bool is_truthy(const Value& v);

const char* type_name(const Value& v);

bool is_plain_value(const Term& t);              // a single value, not a tuple
bool is_value_tuple(const Term& t);              // Tuple whose elements are all plain values
std::optional<Value> value_of_term(const Term& t); // plain values only
Term term_of_value(const Value& v);

// ---- term utilities ----------------------------------------------------

bool term_equal(const Term& a, const Term& b);

// Replaces free occurrences of each mapped name (including "...") by the
// mapped term. Replacements carry no free names, so capture cannot occur.
Term substitute(const Term& t, const std::map<std::string, Term>& binding);

std::set<std::string> free_names(const Term& t);

// %.14g rendering shared by tostring, print and concatenation.
std::string num_to_display(double v);
// Shortest representation that parses back to the same double.
std::string num_to_source(double v);

} // namespace luared
