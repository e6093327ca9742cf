#include "luared/decompose.hpp"

#include "luared/print.hpp"

namespace luared {

namespace {

struct Action {
  enum class Tag { Complete, Focus, Descend } tag;
  int slot = 0;
};

Action complete() { return {Action::Tag::Complete, 0}; }
Action focus() { return {Action::Tag::Focus, 0}; }
Action descend(int slot) { return {Action::Tag::Descend, slot}; }

bool settled(const Term& t) { return is_plain_value(t) || is_value_tuple(t); }

// Where to go next at this node: continue into a child, stop here (the node
// is a redex or the seat of a crossing focus), or report it finished.
Action classify(const Term& t) {
  switch (t->kind) {
    case Kind::Nil:
    case Kind::True:
    case Kind::False:
    case Kind::Num:
    case Kind::Str:
    case Kind::Function:
    case Kind::ObjRef:
    case Kind::Skip: return complete();

    case Kind::Tuple: {
      for (size_t i = 0; i < t->kids.size(); i++) {
        const Term& k = t->kids[i];
        if (is_plain_value(k)) continue;
        if (is_value_tuple(k)) return focus(); // truncate or splice here
        return descend((int)i);
      }
      return complete(); // a value tuple
    }

    case Kind::If:
      return settled(t->kids[0]) ? focus() : descend(0);

    case Kind::While:
    case Kind::Iter:
    case Kind::Break:
    case Kind::Err:
    case Kind::Ref:
    case Kind::Name:
    case Kind::Vararg: return focus();

    case Kind::Seq: return t->kids[0]->kind == Kind::Skip ? focus() : descend(0);

    case Kind::LocalIn: return is_value_tuple(t->kids[0]) ? focus() : descend(0);

    case Kind::Assign: {
      // lvalues settle left-to-right before any rvalue runs
      size_t n = t->kids.size();
      for (size_t i = 0; i + 1 < n; i++) {
        const Term& lv = t->kids[i];
        if (lv->kind == Kind::Ref) continue;
        if (lv->kind == Kind::Index) {
          if (is_plain_value(lv->kids[0]) && is_plain_value(lv->kids[1])) continue;
          return descend((int)i);
        }
        throw EngineFault("assignment to a non-variable");
      }
      return is_value_tuple(t->kids[n - 1]) ? focus() : descend((int)n - 1);
    }

    case Kind::Call:
    case Kind::CallStat: {
      if (is_value_tuple(t->kids[0])) return focus(); // truncate the callee
      if (!is_plain_value(t->kids[0])) return descend(0);
      return is_value_tuple(t->kids[1]) ? focus() : descend(1);
    }

    case Kind::MethodCall:
    case Kind::MethodCallStat:
      return settled(t->kids[0]) ? focus() : descend(0);

    case Kind::Index: {
      if (is_value_tuple(t->kids[0])) return focus();
      if (!is_plain_value(t->kids[0])) return descend(0);
      if (is_value_tuple(t->kids[1])) return focus();
      if (!is_plain_value(t->kids[1])) return descend(1);
      return focus();
    }

    case Kind::Paren: return settled(t->kids[0]) ? focus() : descend(0);

    case Kind::BinOp:
      if (t->bin == BinKind::And || t->bin == BinKind::Or)
        return settled(t->kids[0]) ? focus() : descend(0);
      if (is_value_tuple(t->kids[0])) return focus();
      if (!is_plain_value(t->kids[0])) return descend(0);
      if (is_value_tuple(t->kids[1])) return focus();
      if (!is_plain_value(t->kids[1])) return descend(1);
      return focus();

    case Kind::UnOp: return settled(t->kids[0]) ? focus() : descend(0);

    case Kind::Table: {
      // fields settle left-to-right; keyed fields evaluate key then value
      for (size_t i = 0; i < t->fields.size(); i++) {
        const auto& f = t->fields[i];
        if (f.keyed) {
          if (is_value_tuple(f.key)) return focus();
          if (!is_plain_value(f.key)) return descend(kFieldBase + 2 * (int)i);
        }
        if (is_value_tuple(f.val)) return focus();
        if (!is_plain_value(f.val)) return descend(kFieldBase + 2 * (int)i + 1);
      }
      return focus(); // all fields settled: object creation
    }

    case Kind::BuiltIn: return is_value_tuple(t->kids[0]) ? focus() : descend(0);

    case Kind::Return: return is_value_tuple(t->kids[0]) ? focus() : descend(0);

    case Kind::Labeled:
      if (!is_control_label(t->label)) return focus(); // pending metatable dispatch
      if (t->kids[0]->kind == Kind::Skip || settled(t->kids[0])) return focus();
      return descend(0);
  }
  throw EngineFault("classify: unhandled kind");
}

} // namespace

bool is_answer(const Term& t) {
  return t->kind == Kind::Skip || t->kind == Kind::Err || is_plain_value(t) ||
         is_value_tuple(t);
}

std::optional<Decomposition> decompose(const Term& t) {
  if (is_answer(t)) return std::nullopt;
  Context path;
  Term cur = t;
  while (true) {
    Action a = classify(cur);
    switch (a.tag) {
      case Action::Tag::Complete:
        throw EngineFault("decompose: descended into a finished term: " + print_term(cur, 3));
      case Action::Tag::Descend: {
        path.push_back({cur, a.slot});
        const Node& n = *cur;
        if (a.slot >= kFieldBase) {
          int fi = (a.slot - kFieldBase) / 2;
          cur = (a.slot - kFieldBase) % 2 == 0 ? n.fields[fi].key : n.fields[fi].val;
        } else {
          cur = n.kids[a.slot];
        }
        break;
      }
      case Action::Tag::Focus: {
        // label-crossing focuses resolve against the innermost relevant label
        if (cur->kind == Kind::Break || (cur->kind == Kind::Return && is_value_tuple(cur->kids[0]))) {
          for (size_t i = path.size(); i-- > 0;) {
            if (path[i].node->kind == Kind::Labeled) {
              Decomposition d;
              d.context.assign(path.begin(), path.begin() + i);
              d.redex = path[i].node;
              d.cross = cur->kind == Kind::Break ? Cross::BreakCross : Cross::ReturnCross;
              return d;
            }
          }
          return Decomposition{std::move(path), cur,
                               cur->kind == Kind::Break ? Cross::BreakTop : Cross::ReturnTop};
        }
        if (cur->kind == Kind::Err) {
          for (size_t i = path.size(); i-- > 0;) {
            if (path[i].node->kind == Kind::Labeled && path[i].node->label == LabelKind::ProtMd) {
              Decomposition d;
              d.context.assign(path.begin(), path.begin() + i);
              d.redex = path[i].node;
              d.cross = Cross::ErrCross;
              return d;
            }
          }
          return Decomposition{std::move(path), cur, Cross::ErrTop};
        }
        return Decomposition{std::move(path), cur, Cross::None};
      }
    }
  }
}

Term plug(const Context& ctx, const Term& t) {
  Term cur = t;
  for (size_t i = ctx.size(); i-- > 0;) {
    const Frame& f = ctx[i];
    auto n = std::make_shared<Node>(*f.node);
    if (f.slot >= kFieldBase) {
      int fi = (f.slot - kFieldBase) / 2;
      if ((f.slot - kFieldBase) % 2 == 0)
        n->fields[fi].key = cur;
      else
        n->fields[fi].val = cur;
    } else {
      if (f.slot >= (int)n->kids.size()) throw EngineFault("plug: bad slot");
      n->kids[f.slot] = cur;
    }
    cur = n;
  }
  return cur;
}

bool body_is_elf_break(const Term& body) {
  if (body->kind == Kind::Break) return true;
  if (is_answer(body)) return false;
  auto d = decompose(body);
  return d && d->cross == Cross::BreakTop;
}

std::optional<Term> body_elf_return(const Term& body) {
  if (body->kind == Kind::Return && is_value_tuple(body->kids[0])) return body;
  if (is_answer(body)) return std::nullopt;
  auto d = decompose(body);
  if (d && d->cross == Cross::ReturnTop) return d->redex;
  return std::nullopt;
}

std::optional<Term> body_enp_err(const Term& body) {
  if (body->kind == Kind::Err) return body;
  if (is_answer(body)) return std::nullopt;
  auto d = decompose(body);
  if (d && d->cross == Cross::ErrTop) return d->redex;
  return std::nullopt;
}

bool innermost_label_context(const Term& labeled, LabelKind which) {
  if (labeled->kind != Kind::Labeled) return false;
  const Term& body = labeled->kids[0];
  switch (which) {
    case LabelKind::Break: return labeled->label == which && body_is_elf_break(body);
    case LabelKind::Return: return labeled->label == which && body_elf_return(body).has_value();
    case LabelKind::ProtMd: return labeled->label == which && body_enp_err(body).has_value();
    default: return false;
  }
}

} // namespace luared
