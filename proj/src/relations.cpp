#include "luared/relations.hpp"

#include <cmath>

namespace luared {

namespace {

StepResult pure(Term t, const char* rule) { return {std::move(t), std::nullopt, std::nullopt, rule}; }

Term first_or_nil(const Term& vtuple) {
  return vtuple->kids.empty() ? mk_nil() : vtuple->kids[0];
}

// replaces kid `slot` (or truncates a settled tuple kid) keeping the stamp
Term with_kid(const Term& t, size_t slot, Term kid) {
  auto n = std::make_shared<Node>(*t);
  n->kids[slot] = std::move(kid);
  return n;
}

bool is_string_or_number(const Value& v) {
  return v.tag == Value::Tag::Str || v.tag == Value::Tag::Num;
}

std::string concat_part(const Value& v) {
  return v.tag == Value::Tag::Str ? *v.s : num_to_display(v.n);
}

Term labeled_here(LabelKind l, const Term& body) {
  // the label inherits the faulting term's position for error reporting
  Term out = mk_labeled(l, body);
  if (body->where.present()) out = with_where(out, body->where);
  return out;
}

// truncation of a settled tuple sitting in a single-value slot
std::optional<StepResult> truncate_slot(const Term& t, size_t slot) {
  if (is_value_tuple(t->kids[slot]))
    return pure(with_kid(t, slot, first_or_nil(t->kids[slot])), "DD/tuple-truncate");
  return std::nullopt;
}

} // namespace

// ---- stateless statements (Figs 4 and 13) --------------------------------

std::optional<StepResult> step_stateless_stmt(const Term& redex) {
  switch (redex->kind) {
    case Kind::If: {
      const Term& g = redex->kids[0];
      if (is_value_tuple(g)) return truncate_slot(redex, 0);
      auto v = value_of_term(g);
      if (!v) return std::nullopt;
      return v->truthy() ? pure(redex->kids[1], "Fig4/then") : pure(redex->kids[2], "Fig4/else");
    }
    case Kind::While:
      return pure(mk_labeled(LabelKind::Break, mk_iter(redex->kids[0], redex->kids[1])),
                  "Fig13/while-wrap");
    case Kind::Iter:
      return pure(mk_if(redex->kids[0], mk_seq(redex->kids[1], redex), mk_skip()),
                  "Fig13/iter-unfold");
    case Kind::Seq:
      if (redex->kids[0]->kind == Kind::Skip) return pure(redex->kids[1], "Fig13/seq-skip");
      return std::nullopt;
    case Kind::Labeled: {
      if (redex->label != LabelKind::Break) return std::nullopt;
      const Term& body = redex->kids[0];
      if (body->kind == Kind::Skip) return pure(mk_skip(), "Fig13/label-skip");
      if (body_is_elf_break(body)) return pure(mk_skip(), "Fig13/break");
      return std::nullopt;
    }
    case Kind::CallStat:
    case Kind::MethodCallStat:
      // a settled tuple in the callee / receiver slot collapses to one value
      return truncate_slot(redex, 0);
    default: return std::nullopt;
  }
}

// ---- stateless expressions (Figs 5, 6 and 15) -----------------------------

namespace {

std::optional<StepResult> strict_binop(const Term& redex) {
  const Term& lt = redex->kids[0];
  const Term& rt = redex->kids[1];
  Value l = *value_of_term(lt);
  Value r = *value_of_term(rt);
  BinKind op = redex->bin;

  // a > b and a >= b reduce by the manual's mirror equivalence
  if (op == BinKind::Gt || op == BinKind::Ge) {
    BinKind sw = op == BinKind::Gt ? BinKind::Lt : BinKind::Le;
    Term out = mk_binop(sw, rt, lt);
    if (redex->where.present()) out = with_where(out, redex->where);
    return pure(out, "DD/ord-swap");
  }

  switch (op) {
    case BinKind::Add:
    case BinKind::Sub:
    case BinKind::Mul:
    case BinKind::Div:
    case BinKind::Mod:
    case BinKind::Pow: {
      if (l.tag == Value::Tag::Num && r.tag == Value::Tag::Num)
        return pure(mk_num(delta_arith(op, l.n, r.n)), "Fig15/arith");
      auto cl = delta_tonumber(l);
      auto cr = delta_tonumber(r);
      if (cl && cr) return pure(mk_num(delta_arith(op, *cl, *cr)), "Fig15/arith-coerce");
      return pure(labeled_here(LabelKind::ArithWO, redex), "Fig15/arith-wrong");
    }
    case BinKind::Concat: {
      if (is_string_or_number(l) && is_string_or_number(r))
        return pure(mk_str(concat_part(l) + concat_part(r)), "Fig15/concat");
      return pure(labeled_here(LabelKind::ConcatWO, redex), "Fig15/concat-wrong");
    }
    case BinKind::Lt:
    case BinKind::Le: {
      if (l.tag == Value::Tag::Num && r.tag == Value::Tag::Num) {
        bool res = op == BinKind::Lt ? l.n < r.n : l.n <= r.n;
        return pure(mk_bool(res), "Fig15/ord");
      }
      if (l.tag == Value::Tag::Str && r.tag == Value::Tag::Str) {
        bool res = op == BinKind::Lt ? *l.s < *r.s : *l.s <= *r.s;
        return pure(mk_bool(res), "Fig15/ord");
      }
      return pure(labeled_here(LabelKind::OrdWO, redex), "Fig15/ord-wrong");
    }
    case BinKind::Eq: {
      if (raw_equal(l, r)) return pure(mk_true(), "Fig15/eq");
      if (l.tag == Value::Tag::Obj && r.tag == Value::Tag::Obj)
        return pure(labeled_here(LabelKind::EqFail, redex), "Fig15/eq-wrong");
      return pure(mk_false(), "Fig15/eq");
    }
    default: return std::nullopt;
  }
}

} // namespace

std::optional<StepResult> step_stateless_expr(const Term& redex) {
  switch (redex->kind) {
    case Kind::Paren: {
      const Term& inner = redex->kids[0];
      if (is_plain_value(inner)) return pure(inner, "DD/paren-value");
      if (is_value_tuple(inner)) return pure(first_or_nil(inner), "DD/paren-tuple");
      return std::nullopt;
    }
    case Kind::Tuple: {
      // flatten tuples of tuples: non-final members truncate, a final member
      // splices once everything before it is a value
      for (size_t i = 0; i < redex->kids.size(); i++) {
        const Term& k = redex->kids[i];
        if (is_plain_value(k)) continue;
        if (!is_value_tuple(k)) return std::nullopt;
        if (i + 1 < redex->kids.size())
          return pure(with_kid(redex, i, first_or_nil(k)), "DD/tuple-truncate");
        std::vector<Term> out(redex->kids.begin(), redex->kids.end() - 1);
        for (const auto& v : k->kids) out.push_back(v);
        return pure(mk_tuple(std::move(out)), "DD/tuple-splice");
      }
      return std::nullopt;
    }
    case Kind::BinOp: {
      if (redex->bin == BinKind::And || redex->bin == BinKind::Or) {
        if (is_value_tuple(redex->kids[0])) return truncate_slot(redex, 0);
        auto v = value_of_term(redex->kids[0]);
        if (!v) return std::nullopt;
        // delta(and/or, v, e): the right operand passes through unevaluated,
        // parenthesized so a later tuple result collapses to one value
        if (redex->bin == BinKind::And)
          return v->truthy() ? pure(mk_paren(redex->kids[1]), "Fig5/and")
                             : pure(redex->kids[0], "Fig5/and");
        return v->truthy() ? pure(redex->kids[0], "Fig5/or")
                           : pure(mk_paren(redex->kids[1]), "Fig5/or");
      }
      if (is_value_tuple(redex->kids[0])) return truncate_slot(redex, 0);
      if (!is_plain_value(redex->kids[0])) return std::nullopt;
      if (is_value_tuple(redex->kids[1])) return truncate_slot(redex, 1);
      if (!is_plain_value(redex->kids[1])) return std::nullopt;
      return strict_binop(redex);
    }
    case Kind::UnOp: {
      if (is_value_tuple(redex->kids[0])) return truncate_slot(redex, 0);
      auto v = value_of_term(redex->kids[0]);
      if (!v) return std::nullopt;
      switch (redex->un) {
        case UnKind::Not: return pure(mk_bool(!v->truthy()), "Fig5/not");
        case UnKind::Neg: {
          if (v->tag == Value::Tag::Num) return pure(mk_num(-v->n), "Fig15/neg");
          auto c = delta_tonumber(*v);
          if (c) return pure(mk_num(-*c), "Fig15/neg-coerce");
          return pure(labeled_here(LabelKind::NegWO, redex), "Fig15/neg-wrong");
        }
        case UnKind::Len: {
          if (v->tag == Value::Tag::Str)
            return pure(mk_num((double)v->s->size()), "Fig15/len-string");
          // tables consult __len before their border, so they dispatch too
          return pure(labeled_here(LabelKind::LenWO, redex), "DD/len-label");
        }
      }
      return std::nullopt;
    }
    case Kind::Index:
      // operand tuples settle here; the value case belongs to the theta rules
      if (is_value_tuple(redex->kids[0])) return truncate_slot(redex, 0);
      if (is_plain_value(redex->kids[0]) && is_value_tuple(redex->kids[1]))
        return truncate_slot(redex, 1);
      return std::nullopt;
    case Kind::Call:
    case Kind::MethodCall: return truncate_slot(redex, 0);
    case Kind::Table: {
      // constructor fields: non-final settled tuples truncate, a final
      // positional tuple splices into the field list
      for (size_t i = 0; i < redex->fields.size(); i++) {
        const auto& f = redex->fields[i];
        if (f.keyed && is_value_tuple(f.key)) {
          auto n = std::make_shared<Node>(*redex);
          n->fields[i].key = first_or_nil(f.key);
          return pure(Term(n), "DD/tuple-truncate");
        }
        if (f.keyed && !is_plain_value(f.key)) return std::nullopt;
        if (is_value_tuple(f.val)) {
          bool last_positional = !f.keyed && i + 1 == redex->fields.size();
          if (!last_positional) {
            auto n = std::make_shared<Node>(*redex);
            n->fields[i].val = first_or_nil(f.val);
            return pure(Term(n), "DD/tuple-truncate");
          }
          auto n = std::make_shared<Node>(*redex);
          n->fields.pop_back();
          for (const auto& v : f.val->kids) n->fields.push_back({false, nullptr, v});
          return pure(Term(n), "DD/tuple-splice");
        }
        if (!is_plain_value(f.val)) return std::nullopt;
      }
      return std::nullopt; // all settled: object creation is stateful
    }
    default: return std::nullopt;
  }
}

// ---- stateful statements and expressions (Figs 7, 17, 18, 19) -------------

namespace {

bool settled_lvalue(const Term& lv) {
  if (lv->kind == Kind::Ref) return true;
  return lv->kind == Kind::Index && is_plain_value(lv->kids[0]) && is_plain_value(lv->kids[1]);
}

std::optional<StepResult> assign_step(const Term& redex, const ValueStore& sigma,
                                      const ObjectStore& theta) {
  size_t m = redex->kids.size() - 1;
  const Term& rhs = redex->kids[m];
  if (!is_value_tuple(rhs)) return std::nullopt;
  for (size_t i = 0; i < m; i++)
    if (!settled_lvalue(redex->kids[i])) return std::nullopt;

  if (m == 1 && rhs->kids.size() == 1) {
    const Term& lv = redex->kids[0];
    Value v = *value_of_term(rhs->kids[0]);
    if (lv->kind == Kind::Ref) {
      StepResult r = pure(mk_skip(), "Fig7/assign");
      r.sigma = sigma.write(lv->ref, v);
      return r;
    }
    Value obj = *value_of_term(lv->kids[0]);
    Value key = *value_of_term(lv->kids[1]);
    if (obj.tag != Value::Tag::Obj)
      return pure(labeled_here(LabelKind::NewIndex, redex), "Fig17/update-nontable");
    if (delta_rawget(theta, obj.obj, key).is_nil())
      return pure(labeled_here(LabelKind::NewIndex, redex), "Fig17/update-missing");
    auto set = delta_rawset(theta, obj.obj, key, v);
    // an existing key is never nil or NaN
    StepResult r = pure(mk_skip(), "Fig17/update");
    r.theta = std::get<ObjectStore>(std::move(set));
    return r;
  }

  // general form: pair each lvalue with its rvalue (nil-padded) and perform
  // the single assignments right to left, as the reference interpreter does
  std::vector<Term> singles;
  for (size_t i = 0; i < m; i++) {
    Term v = i < rhs->kids.size() ? rhs->kids[i] : mk_nil();
    Term one = mk_assign({redex->kids[i]}, mk_tuple({std::move(v)}));
    if (redex->where.present()) one = with_where(one, redex->where);
    singles.push_back(std::move(one));
  }
  Term out = singles[0];
  for (size_t i = 1; i < m; i++) out = mk_seq(singles[i], std::move(out));
  return pure(std::move(out), "DD/assign-expand");
}

} // namespace

std::optional<StepResult> step_stateful(const Term& redex, const ValueStore& sigma,
                                        const ObjectStore& theta) {
  switch (redex->kind) {
    case Kind::Ref:
      return pure(term_of_value(sigma.read(redex->ref)), "Fig7/deref");
    case Kind::LocalIn: {
      const Term& rhs = redex->kids[0];
      if (!is_value_tuple(rhs)) return std::nullopt;
      ValueStore s = sigma;
      std::map<std::string, Term> binding;
      for (size_t i = 0; i < redex->names.size(); i++) {
        Value v = i < rhs->kids.size() ? *value_of_term(rhs->kids[i]) : Value::nil();
        auto [s2, r] = s.alloc(v);
        s = std::move(s2);
        binding[redex->names[i]] = mk_ref(r); // duplicate names: the last wins
      }
      StepResult out = pure(substitute(redex->kids[1], binding), "Fig7/local");
      out.sigma = std::move(s);
      return out;
    }
    case Kind::Assign: return assign_step(redex, sigma, theta);
    case Kind::Index: {
      if (!is_plain_value(redex->kids[0]) || !is_plain_value(redex->kids[1]))
        return std::nullopt;
      Value obj = *value_of_term(redex->kids[0]);
      Value key = *value_of_term(redex->kids[1]);
      if (obj.tag != Value::Tag::Obj)
        return pure(labeled_here(LabelKind::Index, redex), "Fig18/index-nontable");
      Value v = delta_rawget(theta, obj.obj, key);
      if (v.is_nil()) return pure(labeled_here(LabelKind::Index, redex), "Fig18/index-missing");
      return pure(term_of_value(v), "Fig18/index");
    }
    case Kind::Table: {
      for (const auto& f : redex->fields) {
        if (f.keyed && !is_plain_value(f.key)) return std::nullopt;
        if (!is_plain_value(f.val)) return std::nullopt;
      }
      TableObject t;
      double next_index = 1;
      // keyed entries land first; positional entries override, matching the
      // reference's batched list insertion
      for (const auto& f : redex->fields) {
        if (!f.keyed) continue;
        Value k = *value_of_term(f.key);
        if (k.is_nil())
          return pure(mk_error_call(position_prefix(redex->where, "table index is nil")),
                      "DD/construct-badkey");
        if (k.tag == Value::Tag::Num && std::isnan(k.n))
          return pure(mk_error_call(position_prefix(redex->where, "table index is NaN")),
                      "DD/construct-badkey");
        t.set(k, *value_of_term(f.val));
      }
      for (const auto& f : redex->fields) {
        if (f.keyed) continue;
        t.set(Value::number(next_index), *value_of_term(f.val));
        next_index += 1;
      }
      auto [th, objr] = theta.alloc(std::move(t));
      StepResult out = pure(mk_objref(objr), "Fig19/construct");
      out.theta = std::move(th);
      return out;
    }
    default: return std::nullopt;
  }
}

// ---- function and method calls (Figs 20 and 21) ---------------------------

std::optional<StepResult> step_funcall(const Term& redex, const ValueStore& sigma) {
  switch (redex->kind) {
    case Kind::Call:
    case Kind::CallStat: {
      const Term& fn = redex->kids[0];
      const Term& args = redex->kids[1];
      if (!is_plain_value(fn) || !is_value_tuple(args)) return std::nullopt;
      bool expr = redex->kind == Kind::Call;
      if (fn->kind != Kind::Function)
        return pure(labeled_here(LabelKind::WFunCall, redex), "Fig20/call-nonfunction");
      ValueStore s = sigma;
      std::map<std::string, Term> binding;
      size_t n = fn->names.size();
      for (size_t i = 0; i < n; i++) {
        Value v = i < args->kids.size() ? *value_of_term(args->kids[i]) : Value::nil();
        auto [s2, r] = s.alloc(v);
        s = std::move(s2);
        binding[fn->names[i]] = mk_ref(r);
      }
      const char* rule = "Fig20/call";
      if (fn->is_vararg) {
        std::vector<Term> rest;
        for (size_t i = n; i < args->kids.size(); i++) rest.push_back(args->kids[i]);
        binding["..."] = mk_tuple(std::move(rest));
        rule = "Fig20/call-vararg";
      }
      Term body = substitute(fn->kids[0], binding);
      // the Return label remembers its call site for error levels
      Term labeled = mk_labeled(LabelKind::Return, std::move(body), expr);
      if (redex->where.present()) labeled = with_where(labeled, redex->where);
      StepResult out = pure(std::move(labeled), rule);
      out.sigma = std::move(s);
      return out;
    }
    case Kind::MethodCall:
    case Kind::MethodCallStat: {
      const Term& obj = redex->kids[0];
      if (!is_plain_value(obj)) return std::nullopt;
      // v:name(e,...)  ->  v["name"](v, e,...)
      std::vector<Term> args{obj};
      for (const auto& a : redex->kids[1]->kids) args.push_back(a);
      Term fn = mk_index(obj, mk_str(redex->str));
      if (redex->where.present()) fn = with_where(fn, redex->where);
      Term out = redex->kind == Kind::MethodCall
                     ? mk_call(std::move(fn), mk_tuple(std::move(args)))
                     : mk_callstat(std::move(fn), mk_tuple(std::move(args)));
      if (redex->where.present()) out = with_where(out, redex->where);
      return pure(std::move(out), "Fig20/method");
    }
    case Kind::Labeled: {
      const Term& body = redex->kids[0];
      if (redex->label == LabelKind::Return) {
        if (body->kind == Kind::Skip)
          return pure(redex->expr_flavor ? mk_tuple({}) : mk_skip(), "Fig21/return-skip");
        if (auto ret = body_elf_return(body))
          return pure(redex->expr_flavor ? (*ret)->kids[0] : mk_skip(), "Fig21/return");
        return std::nullopt;
      }
      if (redex->label == LabelKind::Break) {
        // a return crossing a Break label peels the label and is re-emitted
        if (auto ret = body_elf_return(body)) return pure(*ret, "Fig21/return-break");
        return std::nullopt;
      }
      return std::nullopt;
    }
    default: return std::nullopt;
  }
}

// ---- $builtIn dispatch (Fig 22) -------------------------------------------

std::optional<StepResult> step_builtin(const Term& redex, const ValueStore& sigma,
                                       const ObjectStore& theta, Engine& eng,
                                       const ReturnSites& sites) {
  if (redex->kind != Kind::BuiltIn || !is_value_tuple(redex->kids[0])) return std::nullopt;
  auto it = builtin_registry().find(redex->str);
  if (it == builtin_registry().end())
    throw EngineFault("unknown builtin service '" + redex->str + "'");
  std::vector<Value> args;
  for (const auto& k : redex->kids[0]->kids) args.push_back(*value_of_term(k));
  DeltaResult d = it->second.fn(args, sigma, theta, eng, sites, redex->where);
  const char* rule = it->second.cat == BuiltinCategory::Pure         ? "Fig22/builtin-pure"
                     : it->second.cat == BuiltinCategory::ReadsTheta ? "Fig22/builtin-r"
                                                                     : "Fig22/builtin-w";
  StepResult out = pure(std::move(d.term), rule);
  out.theta = std::move(d.theta);
  out.sigma = std::move(d.sigma);
  return out;
}

// ---- metatable dispatch (Figs 24 and 25 plus their symmetric rules) --------

namespace {

Term truncated_call(const Value& h, std::vector<Term> args) {
  return mk_paren(mk_call(term_of_value(h), mk_tuple(std::move(args))));
}

Term boolean_coerced(Term e) { return mk_unop(UnKind::Not, mk_unop(UnKind::Not, std::move(e))); }

Term dispatch_error(const Term& redex, LabelKind label, const std::vector<std::string>& types) {
  return mk_error_call(position_prefix(redex->where, errmessage(label, types)));
}

} // namespace

std::optional<StepResult> step_metatable(const Term& redex, const ObjectStore& theta,
                                         const Engine& eng) {
  if (redex->kind != Kind::Labeled || is_control_label(redex->label)) return std::nullopt;
  const Term& body = redex->kids[0];

  switch (redex->label) {
    case LabelKind::ArithWO: {
      Value v1 = *value_of_term(body->kids[0]);
      Value v2 = *value_of_term(body->kids[1]);
      Value h = getbinhandler(v1, v2, binopeventkey(body->bin), theta, eng);
      if (!h.is_nil())
        return pure(truncated_call(h, {body->kids[0], body->kids[1]}), "Fig24/arith-handler");
      const Value& blame = delta_tonumber(v1) ? v2 : v1;
      return pure(dispatch_error(redex, LabelKind::ArithWO, {type_name(blame)}),
                  "Fig24/arith-error");
    }
    case LabelKind::ConcatWO: {
      Value v1 = *value_of_term(body->kids[0]);
      Value v2 = *value_of_term(body->kids[1]);
      Value h = getbinhandler(v1, v2, "__concat", theta, eng);
      if (!h.is_nil())
        return pure(truncated_call(h, {body->kids[0], body->kids[1]}), "Fig24/concat-handler");
      const Value& blame = is_string_or_number(v1) ? v2 : v1;
      return pure(dispatch_error(redex, LabelKind::ConcatWO, {type_name(blame)}),
                  "Fig24/concat-error");
    }
    case LabelKind::OrdWO: {
      Value v1 = *value_of_term(body->kids[0]);
      Value v2 = *value_of_term(body->kids[1]);
      bool le = body->bin == BinKind::Le;
      Value h = getbinhandler(v1, v2, le ? "__le" : "__lt", theta, eng);
      if (!h.is_nil())
        return pure(boolean_coerced(truncated_call(h, {body->kids[0], body->kids[1]})),
                    "Fig24/ord-handler");
      if (le) {
        // a <= b falls back to not (b < a)
        h = getbinhandler(v1, v2, "__lt", theta, eng);
        if (!h.is_nil())
          return pure(mk_unop(UnKind::Not, truncated_call(h, {body->kids[1], body->kids[0]})),
                      "Fig24/ord-handler-lt");
      }
      return pure(dispatch_error(redex, LabelKind::OrdWO, {type_name(v1), type_name(v2)}),
                  "Fig24/ord-error");
    }
    case LabelKind::EqFail: {
      Value v1 = *value_of_term(body->kids[0]);
      Value v2 = *value_of_term(body->kids[1]);
      Value h = getbinhandler(v1, v2, "__eq", theta, eng);
      if (!h.is_nil())
        return pure(boolean_coerced(truncated_call(h, {body->kids[0], body->kids[1]})),
                    "Fig24/eq-handler");
      return pure(mk_false(), "Fig24/eq-default");
    }
    case LabelKind::NegWO: {
      Value v = *value_of_term(body->kids[0]);
      Value h = indexmetatable(v, "__unm", theta, eng);
      if (!h.is_nil())
        return pure(truncated_call(h, {body->kids[0], body->kids[0]}), "DD/unm-handler");
      return pure(dispatch_error(redex, LabelKind::NegWO, {type_name(v)}), "DD/unm-error");
    }
    case LabelKind::LenWO: {
      Value v = *value_of_term(body->kids[0]);
      Value h = indexmetatable(v, "__len", theta, eng);
      if (!h.is_nil())
        return pure(truncated_call(h, {body->kids[0], body->kids[0]}), "DD/len-handler");
      if (v.tag == Value::Tag::Obj)
        return pure(mk_num(theta.read(v.obj).border()), "DD/len-table");
      return pure(dispatch_error(redex, LabelKind::LenWO, {type_name(v)}), "DD/len-error");
    }
    case LabelKind::Index: {
      Value v1 = *value_of_term(body->kids[0]);
      Value h = indexmetatable(v1, "__index", theta, eng);
      if (h.tag == Value::Tag::Fun)
        return pure(truncated_call(h, {body->kids[0], body->kids[1]}), "Fig25/index-fn");
      if (!h.is_nil()) {
        Term out = mk_index(term_of_value(h), body->kids[1]);
        if (redex->where.present()) out = with_where(out, redex->where);
        return pure(std::move(out), "Fig25/index-table");
      }
      if (v1.tag == Value::Tag::Obj) return pure(mk_nil(), "Fig25/index-nil");
      return pure(dispatch_error(redex, LabelKind::Index, {type_name(v1)}), "Fig25/index-error");
    }
    case LabelKind::NewIndex: {
      // body: v1[v2] = v3 with everything settled
      const Term& lv = body->kids[0];
      Value v1 = *value_of_term(lv->kids[0]);
      Value v2 = *value_of_term(lv->kids[1]);
      const Term& v3 = body->kids[1]->kids[0];
      Value h = indexmetatable(v1, "__newindex", theta, eng);
      if (h.tag == Value::Tag::Fun)
        return pure(mk_callstat(term_of_value(h), mk_tuple({lv->kids[0], lv->kids[1], v3})),
                    "Fig25/newindex-fn");
      if (!h.is_nil()) {
        Term idx = mk_index(term_of_value(h), lv->kids[1]);
        Term out = mk_assign({std::move(idx)}, mk_tuple({v3}));
        if (redex->where.present()) out = with_where(out, redex->where);
        return pure(std::move(out), "Fig25/newindex-table");
      }
      if (v1.tag != Value::Tag::Obj)
        return pure(dispatch_error(redex, LabelKind::NewIndex, {type_name(v1)}),
                    "Fig25/newindex-error");
      auto set = delta_rawset(theta, v1.obj, v2, *value_of_term(v3));
      if (std::holds_alternative<std::string>(set))
        return pure(mk_error_call(position_prefix(redex->where, std::get<std::string>(set))),
                    "Fig25/newindex-rawset");
      StepResult out = pure(mk_skip(), "Fig25/newindex-rawset");
      out.theta = std::get<ObjectStore>(std::move(set));
      return out;
    }
    case LabelKind::WFunCall: {
      Value v = *value_of_term(body->kids[0]);
      Value h = indexmetatable(v, "__call", theta, eng);
      if (!h.is_nil()) {
        // the original value is injected as the first argument
        std::vector<Term> args{body->kids[0]};
        for (const auto& a : body->kids[1]->kids) args.push_back(a);
        Term out = body->kind == Kind::Call
                       ? mk_call(term_of_value(h), mk_tuple(std::move(args)))
                       : mk_callstat(term_of_value(h), mk_tuple(std::move(args)));
        if (redex->where.present()) out = with_where(out, redex->where);
        return pure(std::move(out), "DD/wcall-handler");
      }
      return pure(dispatch_error(redex, LabelKind::WFunCall, {type_name(v)}), "DD/wcall-error");
    }
    default: return std::nullopt;
  }
}

int count_applicable_relations(const Term& redex, const ValueStore& sigma,
                               const ObjectStore& theta, const Engine& eng) {
  int n = 0;
  if (step_stateless_stmt(redex)) n++;
  if (step_stateless_expr(redex)) n++;
  if (step_stateful(redex, sigma, theta)) n++;
  if (step_funcall(redex, sigma)) n++;
  if (redex->kind == Kind::BuiltIn && is_value_tuple(redex->kids[0]) &&
      builtin_registry().count(redex->str))
    n++;
  if (step_metatable(redex, theta, eng)) n++;
  return n;
}

} // namespace luared
