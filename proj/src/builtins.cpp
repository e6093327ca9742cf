#include <cmath>
#include <ostream>

#include "luared/delta.hpp"

namespace luared {

namespace {

DeltaResult just(Term t) { return {std::move(t), std::nullopt, std::nullopt}; }

DeltaResult with_theta(Term t, ObjectStore th) {
  return {std::move(t), std::move(th), std::nullopt};
}

Value argv(const std::vector<Value>& a, size_t i) {
  return i < a.size() ? a[i] : Value::nil();
}

std::string got(const std::vector<Value>& a, size_t i) {
  return i < a.size() ? type_name(a[i]) : "no value";
}

DeltaResult argerr(const ReturnSites& sites, int n, const std::string& fname,
                   const std::string& extra) {
  return just(mk_error_call_at(sites, bad_argument(n, fname, extra)));
}

// luaL_checkstring semantics: numbers convert, everything else is an error
std::optional<std::string> str_arg(const std::vector<Value>& a, size_t i) {
  Value v = argv(a, i);
  if (v.tag == Value::Tag::Str) return *v.s;
  if (v.tag == Value::Tag::Num) return num_to_display(v.n);
  return std::nullopt;
}

std::optional<double> num_arg(const std::vector<Value>& a, size_t i) {
  return delta_tonumber(argv(a, i));
}

double to_int(double d) { return d < 0 ? std::ceil(d) : std::floor(d); }

// string position normalization (string.sub and friends)
long posrelat(double pos, size_t len) {
  long p = (long)to_int(pos);
  if (p >= 0) return p;
  if ((size_t)(-p) > len) return 0;
  return (long)len + p + 1;
}

Term tuple_of(const std::vector<Value>& vs) {
  std::vector<Term> kids;
  kids.reserve(vs.size());
  for (const auto& v : vs) kids.push_back(term_of_value(v));
  return mk_tuple(std::move(kids));
}

// Fig 23's $getIter closure: calls the handler and keeps its first three
// results. The handler and receiver are substituted in as values.
Term getiter_call(const Value& h, const Value& v, const Engine& eng) {
  Term call = mk_call(term_of_value(h), mk_tuple({term_of_value(v)}));
  Term body = mk_localin(
      {"$p1", "$p2", "$p3"}, mk_tuple({std::move(call)}),
      mk_return(mk_tuple({mk_name("$p1"), mk_name("$p2"), mk_name("$p3")})));
  Term fn = mk_function(eng.getiter_label, {}, false, std::move(body));
  return mk_call(mk_paren(std::move(fn)), mk_tuple({}));
}

const Term& wrapper(const Engine& eng, const std::string& name) {
  auto it = eng.wrappers.find(name);
  if (it == eng.wrappers.end()) throw EngineFault("missing bootstrap wrapper " + name);
  return it->second;
}

// ---- basic library -------------------------------------------------------

DeltaResult b_type(const std::vector<Value>& a, const ValueStore&, const ObjectStore&, Engine&,
                   const ReturnSites& sites, const SourceRef&) {
  if (a.empty()) return argerr(sites, 1, "type", "value expected");
  return just(mk_str(type_name(a[0])));
}

DeltaResult b_tostring(const std::vector<Value>& a, const ValueStore&, const ObjectStore& theta,
                       Engine& eng, const ReturnSites& sites, const SourceRef&) {
  if (a.empty()) return argerr(sites, 1, "tostring", "value expected");
  Value h = indexmetatable(a[0], "__tostring", theta, eng);
  if (!h.is_nil()) {
    Term call = mk_paren(mk_call(term_of_value(h), mk_tuple({term_of_value(a[0])})));
    return just(mk_builtin("tostring.check", mk_tuple({std::move(call)})));
  }
  return just(mk_str(delta_tostring_raw(a[0])));
}

DeltaResult b_tostring_check(const std::vector<Value>& a, const ValueStore&, const ObjectStore&,
                             Engine&, const ReturnSites& sites, const SourceRef&) {
  Value v = argv(a, 0);
  if (v.tag == Value::Tag::Str) return just(term_of_value(v));
  if (v.tag == Value::Tag::Num) return just(mk_str(num_to_display(v.n)));
  return just(mk_error_call_at(sites, "'__tostring' must return a string"));
}

DeltaResult b_tonumber(const std::vector<Value>& a, const ValueStore&, const ObjectStore&,
                       Engine&, const ReturnSites& sites, const SourceRef&) {
  if (a.empty()) return argerr(sites, 1, "tonumber", "value expected");
  if (a.size() < 2 || a[1].is_nil()) {
    auto n = delta_tonumber(a[0]);
    return just(n ? mk_num(*n) : mk_nil());
  }
  auto baseval = num_arg(a, 1);
  if (!baseval) return argerr(sites, 2, "tonumber", "number expected, got " + got(a, 1));
  int base = (int)to_int(*baseval);
  if (base < 2 || base > 36) return argerr(sites, 2, "tonumber", "base out of range");
  auto s = str_arg(a, 0);
  if (!s) return argerr(sites, 1, "tonumber", "string expected, got " + got(a, 0));
  auto n = delta_tonumber_base(*s, base);
  return just(n ? mk_num(*n) : mk_nil());
}

DeltaResult b_print(const std::vector<Value>& a, const ValueStore&, const ObjectStore& theta,
                    Engine& eng, const ReturnSites&, const SourceRef&) {
  bool handlers = false;
  for (const auto& v : a)
    if (!indexmetatable(v, "__tostring", theta, eng).is_nil()) handlers = true;
  if (handlers) {
    // route every argument through tostring first, then print the strings
    std::vector<Term> parts;
    for (const auto& v : a) {
      Value h = indexmetatable(v, "__tostring", theta, eng);
      if (h.is_nil()) {
        parts.push_back(term_of_value(v));
      } else {
        Term call = mk_paren(mk_call(term_of_value(h), mk_tuple({term_of_value(v)})));
        parts.push_back(mk_builtin("tostring.check", mk_tuple({std::move(call)})));
      }
    }
    return just(mk_builtin("print", mk_tuple(std::move(parts))));
  }
  std::string line;
  for (size_t i = 0; i < a.size(); i++) {
    if (i) line += "\t";
    line += delta_tostring_raw(a[i]);
  }
  if (eng.out) *eng.out << line << "\n";
  return just(mk_tuple({}));
}

DeltaResult b_error(const std::vector<Value>& a, const ValueStore&, const ObjectStore&, Engine&,
                    const ReturnSites& sites, const SourceRef&) {
  Value v = argv(a, 0);
  int level = 1;
  if (a.size() >= 2 && !a[1].is_nil()) {
    auto n = num_arg(a, 1);
    if (!n) return argerr(sites, 2, "error", "number expected, got " + got(a, 1));
    level = (int)to_int(*n);
  }
  if (v.tag == Value::Tag::Str && level > 0) {
    std::string msg = *v.s;
    if ((size_t)level <= sites.size() && sites[level - 1].present())
      msg = position_prefix(sites[level - 1], msg);
    return just(mk_err(mk_str(std::move(msg))));
  }
  return just(mk_err(term_of_value(v)));
}

DeltaResult b_assert(const std::vector<Value>& a, const ValueStore&, const ObjectStore&, Engine&,
                     const ReturnSites& sites, const SourceRef&) {
  if (argv(a, 0).truthy()) return just(tuple_of(a));
  if (a.size() >= 2) {
    auto msg = str_arg(a, 1);
    if (!msg) return argerr(sites, 2, "assert", "string expected, got " + got(a, 1));
    return just(mk_error_call_at(sites, *msg));
  }
  return just(mk_error_call_at(sites, "assertion failed!"));
}

DeltaResult b_pcall(const std::vector<Value>& a, const ValueStore&, const ObjectStore&, Engine&,
                    const ReturnSites& sites, const SourceRef&) {
  if (a.empty()) return argerr(sites, 1, "pcall", "value expected");
  std::vector<Term> args;
  for (size_t i = 1; i < a.size(); i++) args.push_back(term_of_value(a[i]));
  // the call term is synthetic: errors raised right under pcall carry no
  // position, as in the reference interpreter
  Term call = mk_call(term_of_value(a[0]), mk_tuple(std::move(args)));
  return just(mk_labeled(LabelKind::ProtMd, std::move(call), /*expr_flavor=*/true));
}

DeltaResult b_select(const std::vector<Value>& a, const ValueStore&, const ObjectStore&, Engine&,
                     const ReturnSites& sites, const SourceRef&) {
  if (a.empty()) return argerr(sites, 1, "select", "number expected, got no value");
  if (a[0].tag == Value::Tag::Str && !a[0].s->empty() && (*a[0].s)[0] == '#')
    return just(mk_num((double)(a.size() - 1)));
  auto n = num_arg(a, 0);
  if (!n) return argerr(sites, 1, "select", "number expected, got " + got(a, 0));
  long i = (long)to_int(*n);
  long total = (long)a.size();
  if (i < 0) i = total + i;
  if (i > total) i = total;
  if (i < 1) return argerr(sites, 1, "select", "index out of range");
  std::vector<Value> rest(a.begin() + i, a.end());
  return just(tuple_of(rest));
}

// ---- raw table services ---------------------------------------------------

DeltaResult b_rawget(const std::vector<Value>& a, const ValueStore&, const ObjectStore& theta,
                     Engine&, const ReturnSites& sites, const SourceRef&) {
  if (argv(a, 0).tag != Value::Tag::Obj)
    return argerr(sites, 1, "rawget", "table expected, got " + got(a, 0));
  return just(term_of_value(delta_rawget(theta, a[0].obj, argv(a, 1))));
}

DeltaResult b_rawset(const std::vector<Value>& a, const ValueStore&, const ObjectStore& theta,
                     Engine&, const ReturnSites& sites, const SourceRef&) {
  if (argv(a, 0).tag != Value::Tag::Obj)
    return argerr(sites, 1, "rawset", "table expected, got " + got(a, 0));
  auto set = delta_rawset(theta, a[0].obj, argv(a, 1), argv(a, 2));
  if (std::holds_alternative<std::string>(set))
    return just(mk_error_call(std::get<std::string>(set)));
  return with_theta(term_of_value(a[0]), std::get<ObjectStore>(std::move(set)));
}

DeltaResult b_rawequal(const std::vector<Value>& a, const ValueStore&, const ObjectStore&,
                       Engine&, const ReturnSites& sites, const SourceRef&) {
  if (a.empty()) return argerr(sites, 1, "rawequal", "value expected");
  if (a.size() < 2) return argerr(sites, 2, "rawequal", "value expected");
  return just(mk_bool(raw_equal(a[0], a[1])));
}

DeltaResult b_rawlen(const std::vector<Value>& a, const ValueStore&, const ObjectStore& theta,
                     Engine&, const ReturnSites& sites, const SourceRef&) {
  Value v = argv(a, 0);
  if (v.tag == Value::Tag::Obj) return just(mk_num(theta.read(v.obj).border()));
  if (v.tag == Value::Tag::Str) return just(mk_num((double)v.s->size()));
  return argerr(sites, 1, "rawlen", "table or string expected");
}

DeltaResult b_next(const std::vector<Value>& a, const ValueStore&, const ObjectStore& theta,
                   Engine&, const ReturnSites& sites, const SourceRef&) {
  if (argv(a, 0).tag != Value::Tag::Obj)
    return argerr(sites, 1, "next", "table expected, got " + got(a, 0));
  const TableObject& t = theta.read(a[0].obj);
  Value key = argv(a, 1);
  if (!key.is_nil()) {
    bool known = false;
    Value k = normalize_key(key);
    for (const auto& e : t.entries)
      if (raw_equal(e.key, k)) known = true;
    if (!known) return just(mk_error_call("invalid key to 'next'"));
  }
  auto nx = t.next(key);
  if (!nx) return just(mk_nil());
  return just(mk_tuple({term_of_value(nx->first), term_of_value(nx->second)}));
}

DeltaResult b_pairs(const std::vector<Value>& a, const ValueStore&, const ObjectStore& theta,
                    Engine& eng, const ReturnSites& sites, const SourceRef&) {
  Value v = argv(a, 0);
  Value h = indexmetatable(v, "__pairs", theta, eng);
  if (!h.is_nil()) return just(getiter_call(h, v, eng));
  if (v.tag != Value::Tag::Obj)
    return argerr(sites, 1, "pairs", "table expected, got " + got(a, 0));
  return just(mk_tuple({wrapper(eng, "next"), term_of_value(v), mk_nil()}));
}

DeltaResult b_ipairs(const std::vector<Value>& a, const ValueStore&, const ObjectStore& theta,
                     Engine& eng, const ReturnSites& sites, const SourceRef&) {
  Value v = argv(a, 0);
  Value h = indexmetatable(v, "__ipairs", theta, eng);
  if (!h.is_nil()) return just(getiter_call(h, v, eng));
  if (v.tag != Value::Tag::Obj)
    return argerr(sites, 1, "ipairs", "table expected, got " + got(a, 0));
  return just(mk_tuple({wrapper(eng, "ipairs.aux"), term_of_value(v), mk_num(0)}));
}

DeltaResult b_ipairs_aux(const std::vector<Value>& a, const ValueStore&, const ObjectStore& theta,
                         Engine&, const ReturnSites& sites, const SourceRef&) {
  if (argv(a, 0).tag != Value::Tag::Obj)
    return argerr(sites, 1, "ipairs", "table expected, got " + got(a, 0));
  auto n = num_arg(a, 1);
  if (!n) return argerr(sites, 2, "ipairs", "number expected, got " + got(a, 1));
  double i = to_int(*n) + 1;
  Value v = delta_rawget(theta, a[0].obj, Value::number(i));
  if (v.is_nil()) return just(mk_nil());
  return just(mk_tuple({mk_num(i), term_of_value(v)}));
}

DeltaResult b_getmetatable(const std::vector<Value>& a, const ValueStore&,
                           const ObjectStore& theta, Engine& eng, const ReturnSites& sites, const SourceRef&) {
  if (a.empty()) return argerr(sites, 1, "getmetatable", "value expected");
  Value mt = metatable_of(a[0], theta, eng);
  if (mt.is_nil()) return just(mk_nil());
  Value veil = delta_rawget(theta, mt.obj, Value::str("__metatable"));
  if (!veil.is_nil()) return just(term_of_value(veil));
  return just(term_of_value(mt));
}

DeltaResult b_setmetatable(const std::vector<Value>& a, const ValueStore&,
                           const ObjectStore& theta, Engine&, const ReturnSites& sites, const SourceRef&) {
  if (argv(a, 0).tag != Value::Tag::Obj)
    return argerr(sites, 1, "setmetatable", "table expected, got " + got(a, 0));
  Value mt = argv(a, 1);
  if (!mt.is_nil() && mt.tag != Value::Tag::Obj)
    return argerr(sites, 2, "setmetatable", "nil or table expected");
  Value cur = theta.read(a[0].obj).metatable;
  if (cur.tag == Value::Tag::Obj &&
      !delta_rawget(theta, cur.obj, Value::str("__metatable")).is_nil())
    return just(mk_error_call_at(sites, "cannot change a protected metatable"));
  TableObject t = theta.read(a[0].obj);
  t.metatable = mt;
  return with_theta(term_of_value(a[0]), theta.write(a[0].obj, std::move(t)));
}

// ---- dynamic loading -------------------------------------------------------

DeltaResult b_load(const std::vector<Value>& a, const ValueStore& sigma, const ObjectStore&,
                   Engine& eng, const ReturnSites& sites, const SourceRef&) {
  if (a.empty()) return argerr(sites, 1, "load", "value expected");
  std::string chunk_name = "=(load)";
  if (auto s = str_arg(a, 1)) chunk_name = *s;
  std::string mode = "bt";
  if (auto s = str_arg(a, 2)) mode = *s;
  Value env = a.size() >= 4 ? a[3] : Value::object(eng.globals);

  if (a[0].tag == Value::Tag::Str || a[0].tag == Value::Tag::Num)
    return load_chunk(*str_arg(a, 0), chunk_name, mode, env, sigma, eng);
  if (a[0].tag != Value::Tag::Fun)
    return argerr(sites, 1, "load", "function expected, got " + got(a, 0));
  // producer mode: call the reader until it yields nil or an empty piece
  return just(mk_builtin(
      "load.cont",
      mk_tuple({term_of_value(a[0]), mk_str(""), mk_str(chunk_name), mk_str(mode),
                mk_bool(a.size() >= 4), a.size() >= 4 ? term_of_value(a[3]) : mk_nil()})));
}

Term load_cont2(const std::vector<Value>& a) {
  Term piece = mk_paren(mk_call(term_of_value(a[0]), mk_tuple({})));
  return mk_builtin("load.cont2",
                    mk_tuple({term_of_value(a[0]), term_of_value(a[1]), term_of_value(a[2]),
                              term_of_value(a[3]), term_of_value(a[4]), term_of_value(a[5]),
                              std::move(piece)}));
}

DeltaResult b_load_cont(const std::vector<Value>& a, const ValueStore&, const ObjectStore&,
                        Engine&, const ReturnSites&, const SourceRef&) {
  return just(load_cont2(a));
}

DeltaResult b_load_cont2(const std::vector<Value>& a, const ValueStore& sigma,
                         const ObjectStore&, Engine& eng, const ReturnSites&, const SourceRef&) {
  Value piece = argv(a, 6);
  bool finished = piece.is_nil() || (piece.tag == Value::Tag::Str && piece.s->empty());
  if (!finished) {
    if (piece.tag != Value::Tag::Str && piece.tag != Value::Tag::Num)
      return just(mk_tuple({mk_nil(), mk_str("reader function must return a string")}));
    std::string acc = *a[1].s + (piece.tag == Value::Tag::Str ? *piece.s : num_to_display(piece.n));
    std::vector<Value> again{a[0], Value::str(std::move(acc)), a[2], a[3], a[4], a[5]};
    return just(load_cont2(again));
  }
  Value env = a[4].truthy() ? a[5] : Value::object(eng.globals);
  return load_chunk(*a[1].s, *a[2].s, *a[3].s, env, sigma, eng);
}

DeltaResult b_fortonum(const std::vector<Value>& a, const ValueStore&, const ObjectStore&,
                       Engine&, const ReturnSites&, const SourceRef& where) {
  auto n = delta_tonumber(argv(a, 0));
  if (n) return just(mk_num(*n));
  std::string msg = "'for' " + *argv(a, 1).s + " must be a number";
  return just(mk_error_call(position_prefix(where, msg)));
}

// ---- string library --------------------------------------------------------

DeltaResult b_str_len(const std::vector<Value>& a, const ValueStore&, const ObjectStore&,
                      Engine&, const ReturnSites& sites, const SourceRef&) {
  auto s = str_arg(a, 0);
  if (!s) return argerr(sites, 1, "len", "string expected, got " + got(a, 0));
  return just(mk_num((double)s->size()));
}

DeltaResult b_str_sub(const std::vector<Value>& a, const ValueStore&, const ObjectStore&,
                      Engine&, const ReturnSites& sites, const SourceRef&) {
  auto s = str_arg(a, 0);
  if (!s) return argerr(sites, 1, "sub", "string expected, got " + got(a, 0));
  auto iv = num_arg(a, 1);
  if (!iv) return argerr(sites, 2, "sub", "number expected, got " + got(a, 1));
  double jraw = -1;
  if (a.size() >= 3 && !a[2].is_nil()) {
    auto jv = num_arg(a, 2);
    if (!jv) return argerr(sites, 3, "sub", "number expected, got " + got(a, 2));
    jraw = *jv;
  }
  size_t len = s->size();
  long i = posrelat(*iv, len);
  long j = posrelat(jraw, len);
  if (i < 1) i = 1;
  if (j > (long)len) j = (long)len;
  if (i > j) return just(mk_str(""));
  return just(mk_str(s->substr(i - 1, j - i + 1)));
}

DeltaResult b_str_rep(const std::vector<Value>& a, const ValueStore&, const ObjectStore&,
                      Engine&, const ReturnSites& sites, const SourceRef&) {
  auto s = str_arg(a, 0);
  if (!s) return argerr(sites, 1, "rep", "string expected, got " + got(a, 0));
  auto nv = num_arg(a, 1);
  if (!nv) return argerr(sites, 2, "rep", "number expected, got " + got(a, 1));
  std::string sep;
  if (a.size() >= 3 && !a[2].is_nil()) {
    auto sv = str_arg(a, 2);
    if (!sv) return argerr(sites, 3, "rep", "string expected, got " + got(a, 2));
    sep = *sv;
  }
  long n = (long)to_int(*nv);
  std::string out;
  for (long k = 0; k < n; k++) {
    if (k) out += sep;
    out += *s;
  }
  return just(mk_str(std::move(out)));
}

DeltaResult b_str_upper(const std::vector<Value>& a, const ValueStore&, const ObjectStore&,
                        Engine&, const ReturnSites& sites, const SourceRef&) {
  auto s = str_arg(a, 0);
  if (!s) return argerr(sites, 1, "upper", "string expected, got " + got(a, 0));
  std::string out = *s;
  for (auto& c : out) c = (char)std::toupper((unsigned char)c);
  return just(mk_str(std::move(out)));
}

DeltaResult b_str_lower(const std::vector<Value>& a, const ValueStore&, const ObjectStore&,
                        Engine&, const ReturnSites& sites, const SourceRef&) {
  auto s = str_arg(a, 0);
  if (!s) return argerr(sites, 1, "lower", "string expected, got " + got(a, 0));
  std::string out = *s;
  for (auto& c : out) c = (char)std::tolower((unsigned char)c);
  return just(mk_str(std::move(out)));
}

DeltaResult b_str_byte(const std::vector<Value>& a, const ValueStore&, const ObjectStore&,
                       Engine&, const ReturnSites& sites, const SourceRef&) {
  auto s = str_arg(a, 0);
  if (!s) return argerr(sites, 1, "byte", "string expected, got " + got(a, 0));
  double iraw = 1, jraw;
  if (a.size() >= 2 && !a[1].is_nil()) {
    auto iv = num_arg(a, 1);
    if (!iv) return argerr(sites, 2, "byte", "number expected, got " + got(a, 1));
    iraw = *iv;
  }
  jraw = iraw;
  if (a.size() >= 3 && !a[2].is_nil()) {
    auto jv = num_arg(a, 2);
    if (!jv) return argerr(sites, 3, "byte", "number expected, got " + got(a, 2));
    jraw = *jv;
  }
  size_t len = s->size();
  long i = posrelat(iraw, len), j = posrelat(jraw, len);
  if (i < 1) i = 1;
  if (j > (long)len) j = (long)len;
  std::vector<Term> out;
  for (long k = i; k <= j; k++) out.push_back(mk_num((double)(unsigned char)(*s)[k - 1]));
  return just(mk_tuple(std::move(out)));
}

DeltaResult b_str_char(const std::vector<Value>& a, const ValueStore&, const ObjectStore&,
                       Engine&, const ReturnSites& sites, const SourceRef&) {
  std::string out;
  for (size_t i = 0; i < a.size(); i++) {
    auto v = num_arg(a, i);
    if (!v) return argerr(sites, (int)i + 1, "char", "number expected, got " + got(a, i));
    long c = (long)to_int(*v);
    if (c < 0 || c > 255) return argerr(sites, (int)i + 1, "char", "value out of range");
    out.push_back((char)(unsigned char)c);
  }
  return just(mk_str(std::move(out)));
}

DeltaResult b_str_reverse(const std::vector<Value>& a, const ValueStore&, const ObjectStore&,
                          Engine&, const ReturnSites& sites, const SourceRef&) {
  auto s = str_arg(a, 0);
  if (!s) return argerr(sites, 1, "reverse", "string expected, got " + got(a, 0));
  return just(mk_str(std::string(s->rbegin(), s->rend())));
}

DeltaResult b_str_dump(const std::vector<Value>& a, const ValueStore&, const ObjectStore&,
                       Engine& eng, const ReturnSites& sites, const SourceRef&) {
  if (argv(a, 0).tag != Value::Tag::Fun)
    return argerr(sites, 1, "dump", "function expected, got " + got(a, 0));
  DumpResult d = dump_function(a[0].fun, eng);
  if (!d.ok) return just(mk_error_call_at(sites, d.bytes_or_error));
  return just(mk_str(std::move(d.bytes_or_error)));
}

// ---- math library -----------------------------------------------------------

DeltaResult math1(const std::vector<Value>& a, const ReturnSites& sites, const char* fname,
                  double (*fn)(double)) {
  auto v = num_arg(a, 0);
  if (!v) return argerr(sites, 1, fname, "number expected, got " + got(a, 0));
  return just(mk_num(fn(*v)));
}

DeltaResult b_math_fmod(const std::vector<Value>& a, const ValueStore&, const ObjectStore&,
                        Engine&, const ReturnSites& sites, const SourceRef&) {
  auto x = num_arg(a, 0);
  if (!x) return argerr(sites, 1, "fmod", "number expected, got " + got(a, 0));
  auto y = num_arg(a, 1);
  if (!y) return argerr(sites, 2, "fmod", "number expected, got " + got(a, 1));
  return just(mk_num(std::fmod(*x, *y)));
}

DeltaResult b_math_modf(const std::vector<Value>& a, const ValueStore&, const ObjectStore&,
                        Engine&, const ReturnSites& sites, const SourceRef&) {
  auto x = num_arg(a, 0);
  if (!x) return argerr(sites, 1, "modf", "number expected, got " + got(a, 0));
  double ip;
  double fp = std::modf(*x, &ip);
  return just(mk_tuple({mk_num(ip), mk_num(fp)}));
}

DeltaResult math_extreme(const std::vector<Value>& a, const ReturnSites& sites,
                         const char* fname, bool want_max) {
  if (a.empty()) return argerr(sites, 1, fname, "number expected, got no value");
  double best = 0;
  for (size_t i = 0; i < a.size(); i++) {
    auto v = num_arg(a, i);
    if (!v) return argerr(sites, (int)i + 1, fname, "number expected, got " + got(a, i));
    if (i == 0 || (want_max ? *v > best : *v < best)) best = *v;
  }
  return just(mk_num(best));
}

// ---- table library -----------------------------------------------------------

DeltaResult b_tbl_insert(const std::vector<Value>& a, const ValueStore&, const ObjectStore& theta,
                         Engine&, const ReturnSites& sites, const SourceRef&) {
  if (argv(a, 0).tag != Value::Tag::Obj)
    return argerr(sites, 1, "insert", "table expected, got " + got(a, 0));
  TableObject t = theta.read(a[0].obj);
  double n = t.border();
  if (a.size() == 2) {
    t.set(Value::number(n + 1), a[1]);
  } else if (a.size() == 3) {
    auto pv = num_arg(a, 1);
    if (!pv) return argerr(sites, 2, "insert", "number expected, got " + got(a, 1));
    double pos = to_int(*pv);
    if (pos < 1 || pos > n + 1) return argerr(sites, 2, "insert", "position out of bounds");
    for (double k = n; k >= pos; k -= 1)
      t.set(Value::number(k + 1), t.get(Value::number(k)));
    t.set(Value::number(pos), a[2]);
  } else {
    return just(mk_error_call_at(sites, "wrong number of arguments to 'insert'"));
  }
  return with_theta(mk_tuple({}), theta.write(a[0].obj, std::move(t)));
}

DeltaResult b_tbl_remove(const std::vector<Value>& a, const ValueStore&, const ObjectStore& theta,
                         Engine&, const ReturnSites& sites, const SourceRef&) {
  if (argv(a, 0).tag != Value::Tag::Obj)
    return argerr(sites, 1, "remove", "table expected, got " + got(a, 0));
  TableObject t = theta.read(a[0].obj);
  double n = t.border();
  double pos = n;
  if (a.size() >= 2 && !a[1].is_nil()) {
    auto pv = num_arg(a, 1);
    if (!pv) return argerr(sites, 2, "remove", "number expected, got " + got(a, 1));
    pos = to_int(*pv);
    if (pos != n && (pos < 1 || pos > n + 1))
      return argerr(sites, 2, "remove", "position out of bounds");
  }
  Value removed = t.get(Value::number(pos));
  for (double k = pos; k < n; k += 1) t.set(Value::number(k), t.get(Value::number(k + 1)));
  if (pos >= 1 && pos <= n) t.set(Value::number(n), Value::nil());
  return {term_of_value(removed), theta.write(a[0].obj, std::move(t)), std::nullopt};
}

DeltaResult b_tbl_concat(const std::vector<Value>& a, const ValueStore&, const ObjectStore& theta,
                         Engine&, const ReturnSites& sites, const SourceRef&) {
  if (argv(a, 0).tag != Value::Tag::Obj)
    return argerr(sites, 1, "concat", "table expected, got " + got(a, 0));
  const TableObject& t = theta.read(a[0].obj);
  std::string sep;
  if (a.size() >= 2 && !a[1].is_nil()) {
    auto sv = str_arg(a, 1);
    if (!sv) return argerr(sites, 2, "concat", "string expected, got " + got(a, 1));
    sep = *sv;
  }
  double i = 1, j = t.border();
  if (a.size() >= 3 && !a[2].is_nil()) {
    auto iv = num_arg(a, 2);
    if (!iv) return argerr(sites, 3, "concat", "number expected, got " + got(a, 2));
    i = to_int(*iv);
  }
  if (a.size() >= 4 && !a[3].is_nil()) {
    auto jv = num_arg(a, 3);
    if (!jv) return argerr(sites, 4, "concat", "number expected, got " + got(a, 3));
    j = to_int(*jv);
  }
  std::string out;
  for (double k = i; k <= j; k += 1) {
    Value v = t.get(Value::number(k));
    if (v.tag != Value::Tag::Str && v.tag != Value::Tag::Num)
      return just(mk_error_call_at(
          sites, "invalid value (at index " + num_to_display(k) + ") in table for 'concat'"));
    if (k != i) out += sep;
    out += v.tag == Value::Tag::Str ? *v.s : num_to_display(v.n);
  }
  return just(mk_str(std::move(out)));
}

DeltaResult b_tbl_unpack(const std::vector<Value>& a, const ValueStore&, const ObjectStore& theta,
                         Engine&, const ReturnSites& sites, const SourceRef&) {
  if (argv(a, 0).tag != Value::Tag::Obj)
    return argerr(sites, 1, "unpack", "table expected, got " + got(a, 0));
  const TableObject& t = theta.read(a[0].obj);
  double i = 1, j = t.border();
  if (a.size() >= 2 && !a[1].is_nil()) {
    auto iv = num_arg(a, 1);
    if (!iv) return argerr(sites, 2, "unpack", "number expected, got " + got(a, 1));
    i = to_int(*iv);
  }
  if (a.size() >= 3 && !a[2].is_nil()) {
    auto jv = num_arg(a, 2);
    if (!jv) return argerr(sites, 3, "unpack", "number expected, got " + got(a, 2));
    j = to_int(*jv);
  }
  if (j - i >= 1e6) return just(mk_error_call_at(sites, "too many results to unpack"));
  std::vector<Term> out;
  for (double k = i; k <= j; k += 1) out.push_back(term_of_value(t.get(Value::number(k))));
  return just(mk_tuple(std::move(out)));
}

DeltaResult b_tbl_pack(const std::vector<Value>& a, const ValueStore&, const ObjectStore& theta,
                       Engine&, const ReturnSites&, const SourceRef&) {
  TableObject t;
  for (size_t i = 0; i < a.size(); i++) t.set(Value::number((double)i + 1), a[i]);
  t.set(Value::str("n"), Value::number((double)a.size()));
  auto [th, objr] = theta.alloc(std::move(t));
  return with_theta(mk_objref(objr), std::move(th));
}

std::map<std::string, BuiltinEntry> make_registry() {
  std::map<std::string, BuiltinEntry> reg;
  auto pure = [&](const char* n, BuiltinFn f) { reg[n] = {BuiltinCategory::Pure, std::move(f)}; };
  auto reads = [&](const char* n, BuiltinFn f) {
    reg[n] = {BuiltinCategory::ReadsTheta, std::move(f)};
  };
  auto writes = [&](const char* n, BuiltinFn f) {
    reg[n] = {BuiltinCategory::WritesTheta, std::move(f)};
  };

  pure("type", b_type);
  pure("tonumber", b_tonumber);
  pure("tostring.check", b_tostring_check);
  pure("error", b_error);
  pure("assert", b_assert);
  pure("pcall", b_pcall);
  pure("select", b_select);
  pure("rawequal", b_rawequal);
  pure("fortonum", b_fortonum);
  pure("load.cont", b_load_cont);

  reads("tostring", b_tostring);
  reads("print", b_print);
  reads("rawget", b_rawget);
  reads("rawlen", b_rawlen);
  reads("next", b_next);
  reads("pairs", b_pairs);
  reads("ipairs", b_ipairs);
  reads("ipairs.aux", b_ipairs_aux);
  reads("getmetatable", b_getmetatable);
  reads("load", b_load);
  reads("load.cont2", b_load_cont2);

  writes("rawset", b_rawset);
  writes("setmetatable", b_setmetatable);

  pure("string.len", b_str_len);
  pure("string.sub", b_str_sub);
  pure("string.rep", b_str_rep);
  pure("string.upper", b_str_upper);
  pure("string.lower", b_str_lower);
  pure("string.byte", b_str_byte);
  pure("string.char", b_str_char);
  pure("string.reverse", b_str_reverse);
  pure("string.dump", b_str_dump);

  pure("math.abs", [](const std::vector<Value>& a, const ValueStore&, const ObjectStore&,
                      Engine&, const ReturnSites& s, const SourceRef&) { return math1(a, s, "abs", std::fabs); });
  pure("math.ceil", [](const std::vector<Value>& a, const ValueStore&, const ObjectStore&,
                       Engine&, const ReturnSites& s, const SourceRef&) { return math1(a, s, "ceil", std::ceil); });
  pure("math.floor", [](const std::vector<Value>& a, const ValueStore&, const ObjectStore&,
                        Engine&, const ReturnSites& s, const SourceRef&) { return math1(a, s, "floor", std::floor); });
  pure("math.sqrt", [](const std::vector<Value>& a, const ValueStore&, const ObjectStore&,
                       Engine&, const ReturnSites& s, const SourceRef&) { return math1(a, s, "sqrt", std::sqrt); });
  pure("math.fmod", b_math_fmod);
  pure("math.modf", b_math_modf);
  pure("math.max", [](const std::vector<Value>& a, const ValueStore&, const ObjectStore&, Engine&,
                      const ReturnSites& s, const SourceRef&) { return math_extreme(a, s, "max", true); });
  pure("math.min", [](const std::vector<Value>& a, const ValueStore&, const ObjectStore&, Engine&,
                      const ReturnSites& s, const SourceRef&) { return math_extreme(a, s, "min", false); });

  writes("table.insert", b_tbl_insert);
  writes("table.remove", b_tbl_remove);
  writes("table.pack", b_tbl_pack);
  reads("table.concat", b_tbl_concat);
  reads("table.unpack", b_tbl_unpack);

  return reg;
}

} // namespace

const std::map<std::string, BuiltinEntry>& builtin_registry() {
  static const std::map<std::string, BuiltinEntry> reg = make_registry();
  return reg;
}

} // namespace luared
