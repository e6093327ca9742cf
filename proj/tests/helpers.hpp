#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "luared/cli.hpp"
#include "luared/machine.hpp"
#include "luared/parser.hpp"
#include "luared/print.hpp"

namespace luared::testing {

struct RunResult {
  Outcome::Tag tag;
  std::string out;
  Value error;
  std::vector<std::string> rules;
  Configuration final;
};

inline Term parse_or_die(const std::string& src, LabelAllocator& labels,
                         const std::string& name = "input") {
  auto p = parse_chunk(SourceChunk{src, name}, labels);
  if (std::holds_alternative<ParseError>(p)) {
    const auto& e = std::get<ParseError>(p);
    throw std::runtime_error("parse failed: " + std::to_string(e.line) + ": " + e.message);
  }
  return std::get<Term>(p);
}

inline RunResult run_source(const std::string& src, std::uint64_t fuel = 200000,
                            bool collect_rules = false) {
  Engine eng;
  Term chunk = parse_or_die(src, eng.labels);
  Configuration cfg = inject(chunk, eng);
  std::ostringstream out;
  eng.out = &out;
  RunResult res{Outcome::Tag::Stuck, "", Value::nil(), {}, {}};
  Outcome o = run_trace(std::move(cfg), eng, fuel,
                        [&](const Configuration&, const std::string& rule) {
                          if (collect_rules) res.rules.push_back(rule);
                          return true;
                        });
  res.tag = o.tag;
  res.out = out.str();
  res.error = o.error;
  res.final = o.at;
  return res;
}

inline std::string run_stdout(const std::string& src) { return run_source(src).out; }

// strips source stamps and renumbers function labels in parse order so two
// parses of equivalent sources compare equal
inline Term strip_labels(const Term& t, FunLabel& next) {
  auto n = std::make_shared<Node>(*t);
  n->where = SourceRef{};
  if (t->kind == Kind::Function) n->fun_label = next++;
  for (auto& k : n->kids) k = strip_labels(k, next);
  for (auto& f : n->fields) {
    if (f.keyed) f.key = strip_labels(f.key, next);
    f.val = strip_labels(f.val, next);
  }
  return n;
}

inline bool same_modulo_labels(const Term& a, const Term& b) {
  FunLabel n1 = 1, n2 = 1;
  return term_equal(strip_labels(a, n1), strip_labels(b, n2));
}

} // namespace luared::testing
