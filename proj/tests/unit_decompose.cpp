#include <doctest.h>

#include "enumerate.hpp"
#include "gen.hpp"
#include "helpers.hpp"
#include "luared/decompose.hpp"

using namespace luared;
using namespace luared::testing;

TEST_CASE("answers") {
  CHECK(is_answer(mk_skip()));
  CHECK(is_answer(mk_num(4)));
  CHECK(is_answer(mk_tuple({mk_num(1), mk_nil()})));
  CHECK(is_answer(mk_err(mk_str("boom"))));
  CHECK_FALSE(is_answer(mk_tuple({mk_binop(BinKind::Add, mk_num(1), mk_num(2))})));
  CHECK_FALSE(is_answer(mk_break()));
}

TEST_CASE("redex at the root") {
  Term t = mk_if(mk_true(), mk_skip(), mk_skip());
  auto d = decompose(t);
  REQUIRE(d);
  CHECK(d->context.empty());
  CHECK(d->redex.get() == t.get());
  CHECK(d->cross == Cross::None);
}

TEST_CASE("assignment rvalue context") {
  // r = 1 + 2: the sum is the redex under the assignment frame
  Term sum = mk_binop(BinKind::Add, mk_num(1), mk_num(2));
  Term t = mk_assign({mk_ref(1)}, mk_tuple({sum}));
  auto d = decompose(t);
  REQUIRE(d);
  CHECK(d->redex.get() == sum.get());
  REQUIRE(d->context.size() == 2); // assign -> rhs tuple -> element
  CHECK(term_equal(plug(d->context, d->redex), t));
}

TEST_CASE("left-to-right evaluation") {
  Term left = mk_binop(BinKind::Add, mk_num(1), mk_num(2));
  Term right = mk_binop(BinKind::Add, mk_num(3), mk_num(4));
  Term t = mk_binop(BinKind::Add, left, right);
  auto d = decompose(t);
  REQUIRE(d);
  CHECK(d->redex.get() == left.get());
}

TEST_CASE("plug inverts decompose") {
  LabelAllocator labels;
  for (const char* src :
       {"x = 1 + 2 * 3", "if a then print(1) else print(2) end", "local t = {f(), g(1, h())}",
        "while x < 10 do x = x + 1 end"}) {
    Term t = parse_or_die(src, labels);
    auto d = decompose(t);
    REQUIRE(d);
    CHECK(term_equal(plug(d->context, d->redex), t));
  }
}

TEST_CASE("label-crossing matchers") {
  // ($iter ... break)^Break with no inner label
  Term brk = mk_labeled(LabelKind::Break, mk_seq(mk_break(), mk_skip()));
  CHECK(innermost_label_context(brk, LabelKind::Break));

  // a break nested under a second Break label is not visible to the outer one
  Term nested = mk_labeled(LabelKind::Break, mk_labeled(LabelKind::Break, mk_break()));
  CHECK_FALSE(body_is_elf_break(nested->kids[0]));
  CHECK(innermost_label_context(nested->kids[0], LabelKind::Break));

  // $err under ProtMd with no inner ProtMd
  Term prot = mk_labeled(LabelKind::ProtMd, mk_err(mk_str("x")), true);
  CHECK(innermost_label_context(prot, LabelKind::ProtMd));
  // an inner ProtMd intercepts
  Term prot2 = mk_labeled(LabelKind::ProtMd, prot, true);
  CHECK_FALSE(body_enp_err(prot2->kids[0]).has_value());

  // a break that is not yet at the focus does not match E_lf
  Term busy = mk_labeled(
      LabelKind::Break,
      mk_seq(mk_callstat(mk_index(mk_name("_ENV"), mk_str("f")), mk_tuple({})), mk_break()));
  CHECK_FALSE(innermost_label_context(busy, LabelKind::Break));

  // return crosses a Break label but breaks do not cross Return labels
  Term ret = mk_labeled(LabelKind::Break, mk_return(mk_tuple({mk_num(1)})));
  CHECK(body_elf_return(ret->kids[0]).has_value());
}

TEST_CASE("decompose flags crossings") {
  Term t = mk_labeled(LabelKind::Break, mk_seq(mk_break(), mk_skip()));
  auto d = decompose(t);
  REQUIRE(d);
  CHECK(d->cross == Cross::BreakCross);
  CHECK(d->redex.get() == t.get());

  Term top_err = mk_seq(mk_callstat(mk_err(mk_str("e")), mk_tuple({})), mk_skip());
  (void)top_err; // an err in callee position surfaces as ErrTop
  auto d2 = decompose(top_err);
  REQUIRE(d2);
  CHECK(d2->cross == Cross::ErrTop);
}

TEST_CASE("uniqueness on small hand-built terms") {
  Engine eng;
  auto [sigma, theta] = bootstrap_env(eng);
  auto census_of = [&](Term t) {
    Configuration c{sigma, theta, std::move(t)};
    SplitCensus census(c, eng);
    return census.count();
  };
  CHECK(census_of(mk_binop(BinKind::Add, mk_num(1), mk_num(2))) == 1);
  CHECK(census_of(mk_binop(BinKind::Add, mk_binop(BinKind::Add, mk_num(1), mk_num(2)),
                           mk_binop(BinKind::Add, mk_num(3), mk_num(4)))) == 1);
  CHECK(census_of(mk_seq(mk_skip(), mk_skip())) == 1);
  CHECK(census_of(mk_labeled(LabelKind::Break, mk_break())) == 1);
  CHECK(census_of(mk_labeled(LabelKind::ProtMd, mk_err(mk_str("x")), true)) == 1);
  CHECK(census_of(mk_skip()) == 0);
  CHECK(census_of(mk_err(mk_str("x"))) == 0);
  // answer tuple: no pair; tuple needing a splice: exactly one
  CHECK(census_of(mk_tuple({mk_num(1), mk_num(2)})) == 0);
  CHECK(census_of(mk_tuple({mk_num(1), mk_tuple({mk_num(2), mk_num(3)})})) == 1);
}

TEST_CASE("uniqueness along a real execution") {
  Engine eng;
  Term chunk = parse_or_die(
      "local sum = 0 for i = 1, 4 do sum = sum + i end print(sum, ('x'):rep(2)) "
      "print(pcall(function() return nil + 1 end))",
      eng.labels);
  Configuration c = inject(chunk, eng);
  std::ostringstream sink;
  eng.out = &sink;
  int steps = 0;
  while (steps++ < 3000) {
    SplitCensus census(c, eng);
    int n = census.count();
    if (is_terminal(c)) {
      CHECK(n == 0);
      break;
    }
    REQUIRE_MESSAGE(n == 1, print_term(c.term, 6));
    auto next = step(c, eng);
    REQUIRE(std::holds_alternative<Configuration>(next));
    c = std::get<Configuration>(next);
  }
  CHECK(steps < 3000);
}
