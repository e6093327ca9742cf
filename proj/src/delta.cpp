#include "luared/delta.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace luared {

std::optional<double> delta_tonumber(const Value& v) {
  if (v.tag == Value::Tag::Num) return v.n;
  if (v.tag != Value::Tag::Str) return std::nullopt;
  const std::string& s = *v.s;
  size_t i = 0, n = s.size();
  while (i < n && std::isspace((unsigned char)s[i])) i++;
  size_t j = n;
  while (j > i && std::isspace((unsigned char)s[j - 1])) j--;
  if (i >= j) return std::nullopt;
  std::string body = s.substr(i, j - i);
  // reject forms strtod accepts but Lua does not
  std::string low;
  for (char c : body) low.push_back((char)std::tolower((unsigned char)c));
  if (low.find("inf") != std::string::npos || low.find("nan") != std::string::npos)
    return std::nullopt;
  errno = 0;
  char* end = nullptr;
  double out = std::strtod(body.c_str(), &end);
  if (end != body.c_str() + body.size() || body.empty()) return std::nullopt;
  return out;
}

std::optional<double> delta_tonumber_base(const std::string& s, int base) {
  size_t i = 0, n = s.size();
  while (i < n && std::isspace((unsigned char)s[i])) i++;
  size_t j = n;
  while (j > i && std::isspace((unsigned char)s[j - 1])) j--;
  if (i >= j) return std::nullopt;
  bool neg = false;
  if (s[i] == '-') {
    neg = true;
    i++;
  } else if (s[i] == '+') {
    i++;
  }
  if (i >= j) return std::nullopt;
  double out = 0;
  for (; i < j; i++) {
    char c = (char)std::tolower((unsigned char)s[i]);
    int d;
    if (std::isdigit((unsigned char)c))
      d = c - '0';
    else if (c >= 'a' && c <= 'z')
      d = c - 'a' + 10;
    else
      return std::nullopt;
    if (d >= base) return std::nullopt;
    out = out * base + d;
  }
  return neg ? -out : out;
}

double delta_arith(BinKind op, double a, double b) {
  switch (op) {
    case BinKind::Add: return a + b;
    case BinKind::Sub: return a - b;
    case BinKind::Mul: return a * b;
    case BinKind::Div: return a / b;
    case BinKind::Pow: return std::pow(a, b);
    case BinKind::Mod: {
      // floored modulo, as in the reference implementation
      double m = std::fmod(a, b);
      if (m * b < 0) m += b;
      return m;
    }
    default: throw EngineFault("delta_arith: not an arithmetic operator");
  }
}

double delta_neg(double a) { return -a; }

Value delta_rawget(const ObjectStore& theta, ObjId obj, const Value& key) {
  return theta.read(obj).get(key);
}

std::variant<ObjectStore, std::string> delta_rawset(const ObjectStore& theta, ObjId obj,
                                                    const Value& key, const Value& val) {
  if (key.is_nil()) return std::string("table index is nil");
  if (key.tag == Value::Tag::Num && std::isnan(key.n)) return std::string("table index is NaN");
  TableObject t = theta.read(obj);
  t.set(key, val);
  return theta.write(obj, std::move(t));
}

std::string delta_tostring_raw(const Value& v) {
  char buf[64];
  switch (v.tag) {
    case Value::Tag::Nil: return "nil";
    case Value::Tag::Bool: return v.b ? "true" : "false";
    case Value::Tag::Num: return num_to_display(v.n);
    case Value::Tag::Str: return *v.s;
    case Value::Tag::Fun:
      std::snprintf(buf, sizeof buf, "function: 0x%010llx",
                    (unsigned long long)(0x20000000 + v.fun->fun_label * 0x30));
      return buf;
    case Value::Tag::Obj:
      std::snprintf(buf, sizeof buf, "table: 0x%010llx",
                    (unsigned long long)(0x10000000 + v.obj * 0x30));
      return buf;
  }
  return "?";
}

Value metatable_of(const Value& v, const ObjectStore& theta, const Engine& eng) {
  if (v.tag == Value::Tag::Obj) return theta.read(v.obj).metatable;
  if (v.tag == Value::Tag::Str && eng.string_meta != 0) return Value::object(eng.string_meta);
  return Value::nil();
}

Value indexmetatable(const Value& v, const std::string& event, const ObjectStore& theta,
                     const Engine& eng) {
  Value mt = metatable_of(v, theta, eng);
  if (mt.is_nil()) return Value::nil();
  // the metatable of a metatable is ignored for this look-up
  return delta_rawget(theta, mt.obj, Value::str(event));
}

Value getbinhandler(const Value& v1, const Value& v2, const std::string& event,
                    const ObjectStore& theta, const Engine& eng) {
  Value h = indexmetatable(v1, event, theta, eng);
  if (!h.is_nil()) return h;
  return indexmetatable(v2, event, theta, eng);
}

std::string binopeventkey(BinKind op) {
  switch (op) {
    case BinKind::Add: return "__add";
    case BinKind::Sub: return "__sub";
    case BinKind::Mul: return "__mul";
    case BinKind::Div: return "__div";
    case BinKind::Mod: return "__mod";
    case BinKind::Pow: return "__pow";
    case BinKind::Concat: return "__concat";
    case BinKind::Lt: return "__lt";
    case BinKind::Le: return "__le";
    case BinKind::Eq: return "__eq";
    default: throw EngineFault("binopeventkey: no event for this operator");
  }
}

std::string errmessage(LabelKind label, const std::vector<std::string>& t) {
  switch (label) {
    case LabelKind::ArithWO:
    case LabelKind::NegWO: return "attempt to perform arithmetic on a " + t.at(0) + " value";
    case LabelKind::ConcatWO: return "attempt to concatenate a " + t.at(0) + " value";
    case LabelKind::OrdWO:
      if (t.at(0) == t.at(1)) return "attempt to compare two " + t[0] + " values";
      return "attempt to compare " + t[0] + " with " + t[1];
    case LabelKind::LenWO: return "attempt to get length of a " + t.at(0) + " value";
    case LabelKind::Index:
    case LabelKind::NewIndex: return "attempt to index a " + t.at(0) + " value";
    case LabelKind::WFunCall: return "attempt to call a " + t.at(0) + " value";
    case LabelKind::EqFail: throw EngineFault("errmessage: equality never errors");
    default: throw EngineFault("errmessage: not an error label");
  }
}

std::string position_prefix(const SourceRef& where, const std::string& msg) {
  if (!where.present()) return msg;
  std::string name = *where.chunk;
  if (!name.empty() && (name[0] == '=' || name[0] == '@')) name = name.substr(1);
  return name + ":" + std::to_string(where.line) + ": " + msg;
}

Term mk_error_call(const std::string& full_msg) {
  return mk_builtin("error", mk_tuple({mk_str(full_msg), mk_num(0)}));
}

Term mk_error_call_at(const ReturnSites& sites, const std::string& msg) {
  if (!sites.empty() && sites[0].present()) return mk_error_call(position_prefix(sites[0], msg));
  return mk_error_call(msg);
}

std::string bad_argument(int n, const std::string& fname, const std::string& extra) {
  return "bad argument #" + std::to_string(n) + " to '" + fname + "' (" + extra + ")";
}

} // namespace luared
