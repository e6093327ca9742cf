#include "luared/term.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

namespace luared {

bool is_control_label(LabelKind k) {
  return k == LabelKind::Break || k == LabelKind::Return || k == LabelKind::ProtMd;
}

const char* label_name(LabelKind k) {
  switch (k) {
    case LabelKind::Break: return "Break";
    case LabelKind::Return: return "Return";
    case LabelKind::ProtMd: return "ProtMd";
    case LabelKind::ArithWO: return "ArithWO";
    case LabelKind::ConcatWO: return "ConcatWO";
    case LabelKind::OrdWO: return "OrdWO";
    case LabelKind::NegWO: return "NegWO";
    case LabelKind::LenWO: return "LenWO";
    case LabelKind::EqFail: return "EqFail";
    case LabelKind::Index: return "Index";
    case LabelKind::NewIndex: return "NewIndex";
    case LabelKind::WFunCall: return "WFunCall";
  }
  return "?";
}

namespace {

std::shared_ptr<Node> blank(Kind k) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  return n;
}

} // namespace

Term mk_skip() { return blank(Kind::Skip); }

Term mk_if(Term guard, Term then_s, Term else_s) {
  auto n = blank(Kind::If);
  n->kids = {std::move(guard), std::move(then_s), std::move(else_s)};
  return n;
}

Term mk_while(Term guard, Term body) {
  auto n = blank(Kind::While);
  n->kids = {std::move(guard), std::move(body)};
  return n;
}

Term mk_iter(Term guard, Term body) {
  auto n = blank(Kind::Iter);
  n->kids = {std::move(guard), std::move(body)};
  return n;
}

Term mk_break() { return blank(Kind::Break); }

Term mk_seq(Term first, Term rest) {
  auto n = blank(Kind::Seq);
  n->kids = {std::move(first), std::move(rest)};
  return n;
}

Term mk_localin(std::vector<std::string> names, Term rhs_tuple, Term body) {
  auto n = blank(Kind::LocalIn);
  n->names = std::move(names);
  n->kids = {std::move(rhs_tuple), std::move(body)};
  return n;
}

Term mk_assign(std::vector<Term> lvalues, Term rhs_tuple) {
  auto n = blank(Kind::Assign);
  n->kids = std::move(lvalues);
  n->kids.push_back(std::move(rhs_tuple));
  return n;
}

Term mk_callstat(Term fn, Term args_tuple) {
  auto n = blank(Kind::CallStat);
  n->kids = {std::move(fn), std::move(args_tuple)};
  return n;
}

Term mk_methodcallstat(Term obj, std::string name, Term args_tuple) {
  auto n = blank(Kind::MethodCallStat);
  n->str = std::move(name);
  n->kids = {std::move(obj), std::move(args_tuple)};
  return n;
}

Term mk_return(Term tuple) {
  auto n = blank(Kind::Return);
  n->kids = {std::move(tuple)};
  return n;
}

Term mk_nil() {
  static const Term t = blank(Kind::Nil);
  return t;
}

Term mk_true() {
  static const Term t = blank(Kind::True);
  return t;
}

Term mk_false() {
  static const Term t = blank(Kind::False);
  return t;
}

Term mk_bool(bool b) { return b ? mk_true() : mk_false(); }

Term mk_num(double v) {
  auto n = blank(Kind::Num);
  n->num = v;
  return n;
}

Term mk_str(std::string bytes) {
  auto n = blank(Kind::Str);
  n->str = std::move(bytes);
  return n;
}

Term mk_function(FunLabel label, std::vector<std::string> params, bool is_vararg, Term body) {
  auto n = blank(Kind::Function);
  n->fun_label = label;
  n->names = std::move(params);
  n->is_vararg = is_vararg;
  n->kids = {std::move(body)};
  return n;
}

Term mk_objref(ObjId id) {
  auto n = blank(Kind::ObjRef);
  n->obj = id;
  return n;
}

Term mk_ref(RefId id) {
  auto n = blank(Kind::Ref);
  n->ref = id;
  return n;
}

Term mk_name(std::string name) {
  auto n = blank(Kind::Name);
  n->str = std::move(name);
  return n;
}

Term mk_vararg() { return blank(Kind::Vararg); }

Term mk_index(Term obj, Term key) {
  auto n = blank(Kind::Index);
  n->kids = {std::move(obj), std::move(key)};
  return n;
}

Term mk_paren(Term inner) {
  auto n = blank(Kind::Paren);
  n->kids = {std::move(inner)};
  return n;
}

Term mk_table(std::vector<TableField> fields) {
  auto n = blank(Kind::Table);
  n->fields = std::move(fields);
  return n;
}

Term mk_call(Term fn, Term args_tuple) {
  auto n = blank(Kind::Call);
  n->kids = {std::move(fn), std::move(args_tuple)};
  return n;
}

Term mk_methodcall(Term obj, std::string name, Term args_tuple) {
  auto n = blank(Kind::MethodCall);
  n->str = std::move(name);
  n->kids = {std::move(obj), std::move(args_tuple)};
  return n;
}

Term mk_binop(BinKind op, Term l, Term r) {
  auto n = blank(Kind::BinOp);
  n->bin = op;
  n->kids = {std::move(l), std::move(r)};
  return n;
}

Term mk_unop(UnKind op, Term operand) {
  auto n = blank(Kind::UnOp);
  n->un = op;
  n->kids = {std::move(operand)};
  return n;
}

Term mk_tuple(std::vector<Term> elems) {
  auto n = blank(Kind::Tuple);
  n->kids = std::move(elems);
  return n;
}

Term mk_builtin(std::string service, Term args_tuple) {
  auto n = blank(Kind::BuiltIn);
  n->str = std::move(service);
  n->kids = {std::move(args_tuple)};
  return n;
}

Term mk_labeled(LabelKind label, Term body, bool expr_flavor) {
  auto n = blank(Kind::Labeled);
  n->label = label;
  n->expr_flavor = expr_flavor;
  n->kids = {std::move(body)};
  return n;
}

Term mk_err(Term value) {
  auto n = blank(Kind::Err);
  n->kids = {std::move(value)};
  return n;
}

Term with_where(const Term& t, SourceRef where) {
  auto n = std::make_shared<Node>(*t);
  n->where = std::move(where);
  return n;
}

// ---- values ------------------------------------------------------------

Value Value::boolean(bool v) {
  Value x;
  x.tag = Tag::Bool;
  x.b = v;
  return x;
}

Value Value::number(double v) {
  Value x;
  x.tag = Tag::Num;
  x.n = v;
  return x;
}

Value Value::str(std::string v) {
  Value x;
  x.tag = Tag::Str;
  x.s = std::make_shared<const std::string>(std::move(v));
  return x;
}

Value Value::str(std::shared_ptr<const std::string> v) {
  Value x;
  x.tag = Tag::Str;
  x.s = std::move(v);
  return x;
}

Value Value::function(Term fn) {
  Value x;
  x.tag = Tag::Fun;
  x.fun = std::move(fn);
  return x;
}

Value Value::object(ObjId id) {
  Value x;
  x.tag = Tag::Obj;
  x.obj = id;
  return x;
}

bool raw_equal(const Value& a, const Value& b) {
  if (a.tag != b.tag) return false;
  switch (a.tag) {
    case Value::Tag::Nil: return true;
    case Value::Tag::Bool: return a.b == b.b;
    case Value::Tag::Num: return a.n == b.n; // NaN != NaN, -0 == 0
    case Value::Tag::Str: return *a.s == *b.s;
    case Value::Tag::Fun:
      return a.fun->fun_label == b.fun->fun_label && term_equal(a.fun, b.fun);
    case Value::Tag::Obj: return a.obj == b.obj;
  }
  return false;
}

bool is_truthy(const Value& v) { return v.truthy(); }

const char* type_name(const Value& v) {
  switch (v.tag) {
    case Value::Tag::Nil: return "nil";
    case Value::Tag::Bool: return "boolean";
    case Value::Tag::Num: return "number";
    case Value::Tag::Str: return "string";
    case Value::Tag::Fun: return "function";
    case Value::Tag::Obj: return "table";
  }
  return "?";
}

bool is_plain_value(const Term& t) {
  switch (t->kind) {
    case Kind::Nil:
    case Kind::True:
    case Kind::False:
    case Kind::Num:
    case Kind::Str:
    case Kind::Function:
    case Kind::ObjRef: return true;
    default: return false;
  }
}

bool is_value_tuple(const Term& t) {
  if (t->kind != Kind::Tuple) return false;
  for (const auto& k : t->kids)
    if (!is_plain_value(k)) return false;
  return true;
}

std::optional<Value> value_of_term(const Term& t) {
  switch (t->kind) {
    case Kind::Nil: return Value::nil();
    case Kind::True: return Value::boolean(true);
    case Kind::False: return Value::boolean(false);
    case Kind::Num: return Value::number(t->num);
    case Kind::Str: return Value::str(t->str);
    case Kind::Function: return Value::function(t);
    case Kind::ObjRef: return Value::object(t->obj);
    default: return std::nullopt;
  }
}

Term term_of_value(const Value& v) {
  switch (v.tag) {
    case Value::Tag::Nil: return mk_nil();
    case Value::Tag::Bool: return mk_bool(v.b);
    case Value::Tag::Num: return mk_num(v.n);
    case Value::Tag::Str: return mk_str(*v.s);
    case Value::Tag::Fun: return v.fun;
    case Value::Tag::Obj: return mk_objref(v.obj);
  }
  throw EngineFault("term_of_value: bad tag");
}

// ---- equality ----------------------------------------------------------

bool term_equal(const Term& a, const Term& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Kind::BinOp:
      if (a->bin != b->bin) return false;
      break;
    case Kind::UnOp:
      if (a->un != b->un) return false;
      break;
    case Kind::Labeled:
      if (a->label != b->label || a->expr_flavor != b->expr_flavor) return false;
      break;
    case Kind::Num:
      if (!(a->num == b->num) && !(std::isnan(a->num) && std::isnan(b->num))) return false;
      break;
    case Kind::Str:
    case Kind::Name:
    case Kind::BuiltIn:
    case Kind::MethodCall:
    case Kind::MethodCallStat:
      if (a->str != b->str) return false;
      break;
    case Kind::Function:
      if (a->fun_label != b->fun_label || a->is_vararg != b->is_vararg || a->names != b->names)
        return false;
      break;
    case Kind::Ref:
      if (a->ref != b->ref) return false;
      break;
    case Kind::ObjRef:
      if (a->obj != b->obj) return false;
      break;
    case Kind::LocalIn:
      if (a->names != b->names) return false;
      break;
    default: break;
  }
  if (a->kids.size() != b->kids.size()) return false;
  for (size_t i = 0; i < a->kids.size(); i++)
    if (!term_equal(a->kids[i], b->kids[i])) return false;
  if (a->fields.size() != b->fields.size()) return false;
  for (size_t i = 0; i < a->fields.size(); i++) {
    const auto& fa = a->fields[i];
    const auto& fb = b->fields[i];
    if (fa.keyed != fb.keyed) return false;
    if (fa.keyed && !term_equal(fa.key, fb.key)) return false;
    if (!term_equal(fa.val, fb.val)) return false;
  }
  return true;
}

// ---- substitution ------------------------------------------------------

namespace {

using Binding = std::map<std::string, Term>;

Term subst(const Term& t, const Binding& b);

// Drops shadowed names; returns nullptr when nothing is left to substitute.
std::optional<Binding> narrow(const Binding& b, const std::vector<std::string>& binders,
                              bool shadows_vararg) {
  Binding out;
  for (const auto& [name, repl] : b) {
    if (name == "...") {
      if (shadows_vararg) continue;
    } else {
      bool bound = false;
      for (const auto& x : binders)
        if (x == name) {
          bound = true;
          break;
        }
      if (bound) continue;
    }
    out.emplace(name, repl);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

Term subst_kids(const Term& t, const Binding& b) {
  bool changed = false;
  std::vector<Term> kids;
  kids.reserve(t->kids.size());
  for (const auto& k : t->kids) {
    Term nk = subst(k, b);
    if (nk.get() != k.get()) changed = true;
    kids.push_back(std::move(nk));
  }
  std::vector<TableField> fields;
  fields.reserve(t->fields.size());
  for (const auto& f : t->fields) {
    TableField nf = f;
    if (f.keyed) {
      nf.key = subst(f.key, b);
      if (nf.key.get() != f.key.get()) changed = true;
    }
    nf.val = subst(f.val, b);
    if (nf.val.get() != f.val.get()) changed = true;
    fields.push_back(std::move(nf));
  }
  if (!changed) return t;
  auto n = std::make_shared<Node>(*t);
  n->kids = std::move(kids);
  n->fields = std::move(fields);
  return n;
}

Term subst(const Term& t, const Binding& b) {
  switch (t->kind) {
    case Kind::Name: {
      auto it = b.find(t->str);
      return it == b.end() ? t : it->second;
    }
    case Kind::Vararg: {
      auto it = b.find("...");
      return it == b.end() ? t : it->second;
    }
    case Kind::LocalIn: {
      // binders scope over the body only, not the right-hand sides
      Term rhs = subst(t->kids[0], b);
      Term body = t->kids[1];
      if (auto nb = narrow(b, t->names, false)) body = subst(body, *nb);
      if (rhs.get() == t->kids[0].get() && body.get() == t->kids[1].get()) return t;
      auto n = std::make_shared<Node>(*t);
      n->kids = {std::move(rhs), std::move(body)};
      return n;
    }
    case Kind::Function: {
      // a non-vararg function also blocks "...": it cannot occur inside
      Term body = t->kids[0];
      if (auto nb = narrow(b, t->names, true)) body = subst(body, *nb);
      if (body.get() == t->kids[0].get()) return t;
      auto n = std::make_shared<Node>(*t);
      n->kids = {std::move(body)};
      return n;
    }
    default: return subst_kids(t, b);
  }
}

void collect_free(const Term& t, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (t->kind) {
    case Kind::Name:
      if (!bound.count(t->str)) out.insert(t->str);
      return;
    case Kind::Vararg:
      if (!bound.count("...")) out.insert("...");
      return;
    case Kind::LocalIn: {
      collect_free(t->kids[0], bound, out);
      std::vector<std::string> added;
      for (const auto& x : t->names)
        if (bound.insert(x).second) added.push_back(x);
      collect_free(t->kids[1], bound, out);
      for (const auto& x : added) bound.erase(x);
      return;
    }
    case Kind::Function: {
      std::vector<std::string> added;
      for (const auto& x : t->names)
        if (bound.insert(x).second) added.push_back(x);
      if (bound.insert("...").second) added.push_back("...");
      collect_free(t->kids[0], bound, out);
      for (const auto& x : added) bound.erase(x);
      return;
    }
    default:
      for (const auto& k : t->kids) collect_free(k, bound, out);
      for (const auto& f : t->fields) {
        if (f.keyed) collect_free(f.key, bound, out);
        collect_free(f.val, bound, out);
      }
  }
}

} // namespace

Term substitute(const Term& t, const std::map<std::string, Term>& binding) {
  if (binding.empty()) return t;
  return subst(t, binding);
}

std::set<std::string> free_names(const Term& t) {
  std::set<std::string> bound, out;
  collect_free(t, bound, out);
  return out;
}

// ---- number rendering --------------------------------------------------

std::string num_to_display(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.14g", v);
  return buf;
}

std::string num_to_source(double v) {
  char buf[48];
  for (int prec = 15; prec <= 17; prec++) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = std::strtod(buf, nullptr);
    if (back == v) return buf;
  }
  return buf;
}

} // namespace luared
