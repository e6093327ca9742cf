#pragma once

#include <string>
#include <vector>

#include "luared/machine.hpp"
#include "luared/relations.hpp"

namespace luared::testing {

// Brute-force census of every (context, rule) pair in a configuration,
// kept independent of decompose(): position validity re-derives the
// evaluation-context grammar (each frame's hole legality given its settled
// siblings), and each reachable subterm is probed against every relation.
// Unique decomposition holds iff non-terminal configurations count exactly
// one pair and terminal ones count zero.

class SplitCensus {
 public:
  SplitCensus(const Configuration& cfg, const Engine& eng) : cfg_(cfg), eng_(eng) {}

  int count() {
    hits_.clear();
    visit(cfg_.term, "");
    // Fig 26 rule 1 applies at the root only: an unprotected $err aborts.
    if (cfg_.term->kind != Kind::Err && body_enp_err(cfg_.term)) hits_.push_back("root:Fig26/abort");
    return (int)hits_.size();
  }

  const std::vector<std::string>& hits() const { return hits_; }

 private:
  const Configuration& cfg_;
  const Engine& eng_;
  std::vector<std::string> hits_;

  static bool plain(const Term& t) { return is_plain_value(t); }
  static bool settled_lv(const Term& lv) {
    if (lv->kind == Kind::Ref) return true;
    return lv->kind == Kind::Index && plain(lv->kids[0]) && plain(lv->kids[1]);
  }

  void probe(const Term& t, const std::string& at) {
    int n = count_applicable_relations(t, cfg_.sigma, cfg_.theta, eng_);
    for (int i = 0; i < n; i++) hits_.push_back(at + ":relation");
    if (step_protmd(t)) hits_.push_back(at + ":Fig26");
  }

  // hole positions licensed by the evaluation-context grammar
  void visit(const Term& t, const std::string& at) {
    probe(t, at);
    switch (t->kind) {
      case Kind::If:
      case Kind::Seq:
      case Kind::LocalIn:
      case Kind::Return:
      case Kind::BuiltIn:
      case Kind::UnOp:
      case Kind::Paren: visit(t->kids[0], at + ".0"); return;
      case Kind::MethodCall:
      case Kind::MethodCallStat: visit(t->kids[0], at + ".0"); return;
      case Kind::Index:
        visit(t->kids[0], at + ".0");
        if (plain(t->kids[0])) visit(t->kids[1], at + ".1");
        return;
      case Kind::Call:
      case Kind::CallStat:
        visit(t->kids[0], at + ".0");
        if (plain(t->kids[0])) visit(t->kids[1], at + ".1");
        return;
      case Kind::BinOp:
        visit(t->kids[0], at + ".0");
        if (t->bin != BinKind::And && t->bin != BinKind::Or && plain(t->kids[0]))
          visit(t->kids[1], at + ".1");
        return;
      case Kind::Tuple: {
        for (size_t i = 0; i < t->kids.size(); i++) {
          bool prior_values = true;
          for (size_t j = 0; j < i; j++)
            if (!plain(t->kids[j])) prior_values = false;
          if (prior_values) visit(t->kids[i], at + "." + std::to_string(i));
        }
        return;
      }
      case Kind::Assign: {
        size_t m = t->kids.size() - 1;
        bool prior = true;
        for (size_t i = 0; i < m; i++) {
          if (prior && t->kids[i]->kind == Kind::Index && !settled_lv(t->kids[i])) {
            // an unsettled lvalue admits only the tuple-truncation rule on
            // itself (never the indexing rules), plus holes in its children
            if (step_stateless_expr(t->kids[i]))
              hits_.push_back(at + ".lv" + std::to_string(i) + ":truncate");
            visit(t->kids[i]->kids[0], at + ".lv" + std::to_string(i) + ".0");
            if (plain(t->kids[i]->kids[0]))
              visit(t->kids[i]->kids[1], at + ".lv" + std::to_string(i) + ".1");
          }
          if (!settled_lv(t->kids[i])) prior = false;
        }
        if (prior) visit(t->kids[m], at + ".rhs");
        return;
      }
      case Kind::Table: {
        bool prior = true;
        for (size_t i = 0; i < t->fields.size(); i++) {
          const auto& f = t->fields[i];
          if (!prior) break;
          if (f.keyed) {
            visit(f.key, at + ".k" + std::to_string(i));
            if (plain(f.key)) visit(f.val, at + ".v" + std::to_string(i));
            if (!plain(f.key) || !plain(f.val)) prior = false;
          } else {
            visit(f.val, at + ".v" + std::to_string(i));
            if (!plain(f.val)) prior = false;
          }
        }
        return;
      }
      case Kind::Labeled:
        if (is_control_label(t->label)) visit(t->kids[0], at + ".0");
        return;
      default: return; // leaves and values: no hole positions
    }
  }
};

// Terminal configurations: answers plus the chunk-level return.
inline bool is_terminal(const Configuration& c) {
  if (is_answer(c.term)) return true;
  auto d = decompose(c.term);
  return d && d->cross == Cross::ReturnTop;
}

} // namespace luared::testing
