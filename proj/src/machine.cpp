#include "luared/machine.hpp"

#include "luared/print.hpp"

namespace luared {

std::optional<StepResult> step_protmd(const Term& redex) {
  if (redex->kind != Kind::Labeled || redex->label != LabelKind::ProtMd) return std::nullopt;
  const Term& body = redex->kids[0];
  if (body->kind == Kind::Skip)
    return StepResult{mk_tuple({mk_true()}), std::nullopt, std::nullopt, "Fig26/pcall-skip"};
  if (is_plain_value(body))
    return StepResult{mk_tuple({mk_true(), body}), std::nullopt, std::nullopt,
                      "Fig26/pcall-values"};
  if (is_value_tuple(body)) {
    std::vector<Term> kids{mk_true()};
    for (const auto& k : body->kids) kids.push_back(k);
    return StepResult{mk_tuple(std::move(kids)), std::nullopt, std::nullopt,
                      "Fig26/pcall-values"};
  }
  if (auto err = body_enp_err(body))
    return StepResult{mk_tuple({mk_false(), (*err)->kids[0]}), std::nullopt, std::nullopt,
                      "Fig26/pcall-catch"};
  return std::nullopt;
}

namespace {

Outcome answer_outcome(const Configuration& c) {
  if (c.term->kind == Kind::Err)
    return Outcome{Outcome::Tag::Errored, *value_of_term(c.term->kids[0]), c, ""};
  return Outcome{Outcome::Tag::Completed, Value::nil(), c, ""};
}

ReturnSites collect_return_sites(const Context& ctx) {
  ReturnSites sites;
  for (size_t i = ctx.size(); i-- > 0;) {
    const Term& n = ctx[i].node;
    if (n->kind == Kind::Labeled && n->label == LabelKind::Return) sites.push_back(n->where);
  }
  return sites;
}

} // namespace

std::variant<Configuration, Outcome> step(const Configuration& c, Engine& eng,
                                          std::string* rule_id) {
  if (is_answer(c.term)) return answer_outcome(c);
  auto d = decompose(c.term);
  if (!d) return answer_outcome(c);

  // Fig 26 rule 1: an unprotected error aborts the whole program.
  if (d->cross == Cross::ErrTop) {
    if (rule_id) *rule_id = "Fig26/abort";
    return Configuration{c.sigma, c.theta, d->redex};
  }
  // a return reaching the top of the chunk completes it (values discarded)
  if (d->cross == Cross::ReturnTop) return answer_outcome(c);
  if (d->cross == Cross::BreakTop)
    return Outcome{Outcome::Tag::Stuck, Value::nil(), c, "break outside any Break label"};

  std::optional<StepResult> r = step_protmd(d->redex);
  if (!r) r = step_stateless_stmt(d->redex);
  if (!r) r = step_stateless_expr(d->redex);
  if (!r) r = step_stateful(d->redex, c.sigma, c.theta);
  if (!r) r = step_funcall(d->redex, c.sigma);
  if (!r) {
    ReturnSites sites = collect_return_sites(d->context);
    r = step_builtin(d->redex, c.sigma, c.theta, eng, sites);
  }
  if (!r) r = step_metatable(d->redex, c.theta, eng);
  if (!r)
    return Outcome{Outcome::Tag::Stuck, Value::nil(), c,
                   "no rule matches redex: " + print_term(d->redex, 4)};

  if (rule_id) *rule_id = r->rule_id;
  Configuration out;
  out.sigma = r->sigma ? std::move(*r->sigma) : c.sigma;
  out.theta = r->theta ? std::move(*r->theta) : c.theta;
  out.term = plug(d->context, r->term);
  return out;
}

Outcome run(Configuration c, Engine& eng, std::uint64_t fuel) {
  return run_trace(std::move(c), eng, fuel, nullptr);
}

Outcome run_trace(Configuration c, Engine& eng, std::uint64_t fuel,
                  const std::function<bool(const Configuration&, const std::string&)>& on_step) {
  try {
    for (std::uint64_t i = 0; i < fuel; i++) {
      std::string rule;
      auto next = step(c, eng, &rule);
      if (std::holds_alternative<Outcome>(next)) return std::get<Outcome>(next);
      c = std::move(std::get<Configuration>(next));
      if (on_step && !on_step(c, rule))
        return Outcome{Outcome::Tag::FuelExhausted, Value::nil(), c, "trace stopped"};
    }
    return Outcome{Outcome::Tag::FuelExhausted, Value::nil(), c, ""};
  } catch (const EngineFault& e) {
    return Outcome{Outcome::Tag::Stuck, Value::nil(), c, std::string("engine fault: ") + e.what()};
  }
}

Configuration inject(const Term& chunk, Engine& eng) {
  auto [sigma, theta] = bootstrap_env(eng);
  Term body = substitute(chunk, {{"_ENV", mk_ref(eng.env_ref)}, {"...", mk_tuple({})}});
  return Configuration{std::move(sigma), std::move(theta), std::move(body)};
}

} // namespace luared
