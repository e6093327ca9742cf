#include <cmath>

#include "luared/delta.hpp"

namespace luared {

namespace {

// Every library entry is a vararg wrapper whose body forwards to $builtIn,
// so services keep calling each other through early binding no matter how
// the environment is rebound.
Term make_wrapper(Engine& eng, const std::string& service) {
  Term body = mk_return(mk_tuple({mk_builtin(service, mk_tuple({mk_vararg()}))}));
  Term fn = mk_function(eng.labels.fresh(), {}, true, std::move(body));
  eng.wrappers[service] = fn;
  return fn;
}

} // namespace

std::pair<ValueStore, ObjectStore> bootstrap_env(Engine& eng) {
  ValueStore sigma;
  ObjectStore theta;
  eng.getiter_label = eng.labels.fresh();
  make_wrapper(eng, "ipairs.aux");

  auto lib = [&](const char* prefix, const std::vector<const char*>& names) {
    TableObject t;
    for (const char* n : names)
      t.set(Value::str(n), Value::function(make_wrapper(eng, std::string(prefix) + n)));
    return t;
  };

  TableObject strlib = lib("string.", {"byte", "char", "dump", "len", "lower", "rep",
                                       "reverse", "sub", "upper"});
  auto [th1, strlib_id] = theta.alloc(std::move(strlib));
  theta = std::move(th1);
  eng.string_lib = strlib_id;

  TableObject mathlib =
      lib("math.", {"abs", "ceil", "floor", "fmod", "max", "min", "modf", "sqrt"});
  mathlib.set(Value::str("huge"), Value::number(HUGE_VAL));
  mathlib.set(Value::str("pi"), Value::number(M_PI));
  auto [th2, mathlib_id] = theta.alloc(std::move(mathlib));
  theta = std::move(th2);

  TableObject tablib = lib("table.", {"concat", "insert", "pack", "remove", "unpack"});
  auto [th3, tablib_id] = theta.alloc(std::move(tablib));
  theta = std::move(th3);

  // strings share one metatable whose __index is the string library
  TableObject strmeta;
  strmeta.set(Value::str("__index"), Value::object(strlib_id));
  auto [th4, strmeta_id] = theta.alloc(std::move(strmeta));
  theta = std::move(th4);
  eng.string_meta = strmeta_id;

  TableObject globals;
  for (const char* n : {"assert", "error", "getmetatable", "ipairs", "load", "next", "pairs",
                        "pcall", "print", "rawequal", "rawget", "rawlen", "rawset", "select",
                        "setmetatable", "tonumber", "tostring", "type"})
    globals.set(Value::str(n), Value::function(make_wrapper(eng, n)));
  globals.set(Value::str("math"), Value::object(mathlib_id));
  globals.set(Value::str("string"), Value::object(strlib_id));
  globals.set(Value::str("table"), Value::object(tablib_id));
  globals.set(Value::str("_VERSION"), Value::str("Lua 5.2"));
  auto [th5, globals_id] = theta.alloc(std::move(globals));
  theta = std::move(th5);
  eng.globals = globals_id;

  TableObject g = theta.read(globals_id);
  g.set(Value::str("_G"), Value::object(globals_id));
  theta = theta.write(globals_id, std::move(g));

  auto [s1, env_ref] = sigma.alloc(Value::object(globals_id));
  sigma = std::move(s1);
  eng.env_ref = env_ref;
  eng.env_refs = {env_ref};
  return {std::move(sigma), std::move(theta)};
}

} // namespace luared
