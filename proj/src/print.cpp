#include "luared/print.hpp"

#include <cctype>

#include "luared/parser.hpp"

namespace luared {

namespace {

struct Printer {
  bool source_mode;
  int max_depth;
  std::string out;

  void put(const std::string& s) { out += s; }
  void put(char c) { out += c; }

  bool too_deep(int depth) {
    if (max_depth >= 0 && depth > max_depth) {
      put("...");
      return true;
    }
    return false;
  }

  static bool ident_like(const std::string& s) {
    if (s.empty() || std::isdigit((unsigned char)s[0])) return false;
    for (char c : s)
      if (!std::isalnum((unsigned char)c) && c != '_') return false;
    static const char* kw[] = {"and",   "break", "do",   "else",   "elseif", "end",
                               "false", "for",   "function", "goto", "if",   "in",
                               "local", "nil",   "not",  "or",     "repeat", "return",
                               "then",  "true",  "until", "while"};
    for (const char* k : kw)
      if (s == k) return false;
    return true;
  }

  void quoted(const std::string& s) {
    put('"');
    for (unsigned char c : s) {
      switch (c) {
        case '"': put("\\\""); break;
        case '\\': put("\\\\"); break;
        case '\n': put("\\n"); break;
        case '\r': put("\\r"); break;
        case '\t': put("\\t"); break;
        default:
          if (c < 32 || c >= 127) {
            put('\\');
            put(std::to_string((int)c));
          } else {
            put((char)c);
          }
      }
    }
    put('"');
  }

  // intrinsic precedence: atoms 99, unary 8, binops their left priority
  static int prec(const Term& t) {
    if (t->kind == Kind::UnOp) return 8;
    if (t->kind != Kind::BinOp) return 99;
    switch (t->bin) {
      case BinKind::Or: return 1;
      case BinKind::And: return 2;
      case BinKind::Lt:
      case BinKind::Le:
      case BinKind::Gt:
      case BinKind::Ge:
      case BinKind::Eq: return 3;
      case BinKind::Concat: return 5;
      case BinKind::Add:
      case BinKind::Sub: return 6;
      case BinKind::Mul:
      case BinKind::Div:
      case BinKind::Mod: return 7;
      case BinKind::Pow: return 10;
    }
    return 99;
  }

  static const char* bin_text(BinKind b) {
    switch (b) {
      case BinKind::Add: return "+";
      case BinKind::Sub: return "-";
      case BinKind::Mul: return "*";
      case BinKind::Div: return "/";
      case BinKind::Mod: return "%";
      case BinKind::Pow: return "^";
      case BinKind::Concat: return "..";
      case BinKind::Lt: return "<";
      case BinKind::Le: return "<=";
      case BinKind::Gt: return ">";
      case BinKind::Ge: return ">=";
      case BinKind::Eq: return "==";
      case BinKind::And: return "and";
      case BinKind::Or: return "or";
    }
    return "?";
  }

  void expr_wrapped(const Term& t, bool wrap, int depth) {
    if (wrap) {
      put('(');
      expr(t, depth);
      put(')');
    } else {
      expr(t, depth);
    }
  }

  // prefixexp positions (call/index bases) need structural parens around
  // literals and other non-prefix expressions
  bool needs_prefix_wrap(const Term& t) {
    switch (t->kind) {
      case Kind::Name:
      case Kind::Index:
      case Kind::Call:
      case Kind::MethodCall:
      case Kind::Paren:
      case Kind::Ref:
      case Kind::ObjRef:
      case Kind::BuiltIn: return false;
      default: return true;
    }
  }

  void args(const Term& tuple, int depth) {
    put('(');
    for (size_t i = 0; i < tuple->kids.size(); i++) {
      if (i) put(", ");
      expr(tuple->kids[i], depth);
    }
    put(')');
  }

  void expr(const Term& t, int depth) {
    if (too_deep(depth)) return;
    switch (t->kind) {
      case Kind::Nil: put("nil"); return;
      case Kind::True: put("true"); return;
      case Kind::False: put("false"); return;
      case Kind::Num:
        put(source_mode ? num_to_source(t->num) : num_to_display(t->num));
        return;
      case Kind::Str: quoted(t->str); return;
      case Kind::Name: put(t->str); return;
      case Kind::Vararg: put("..."); return;
      case Kind::Ref: put("r#" + std::to_string(t->ref)); return;
      case Kind::ObjRef: put("obj#" + std::to_string(t->obj)); return;
      case Kind::Paren:
        put('(');
        expr(t->kids[0], depth + 1);
        put(')');
        return;
      case Kind::Function: {
        put("function(");
        for (size_t i = 0; i < t->names.size(); i++) {
          if (i) put(", ");
          put(t->names[i]);
        }
        if (t->is_vararg) {
          if (!t->names.empty()) put(", ");
          put("...");
        }
        put(") ");
        size_t before = out.size();
        stmt(t->kids[0], depth + 1);
        if (out.size() != before) put(' ');
        put("end");
        return;
      }
      case Kind::Index: {
        expr_wrapped(t->kids[0], needs_prefix_wrap(t->kids[0]), depth + 1);
        if (t->kids[1]->kind == Kind::Str && ident_like(t->kids[1]->str)) {
          put('.');
          put(t->kids[1]->str);
        } else {
          put('[');
          expr(t->kids[1], depth + 1);
          put(']');
        }
        return;
      }
      case Kind::Call:
        expr_wrapped(t->kids[0], needs_prefix_wrap(t->kids[0]), depth + 1);
        args(t->kids[1], depth + 1);
        return;
      case Kind::MethodCall:
        expr_wrapped(t->kids[0], needs_prefix_wrap(t->kids[0]), depth + 1);
        put(':');
        put(t->str);
        args(t->kids[1], depth + 1);
        return;
      case Kind::Table: {
        put('{');
        for (size_t i = 0; i < t->fields.size(); i++) {
          if (i) put(", ");
          const auto& f = t->fields[i];
          if (f.keyed) {
            if (f.key->kind == Kind::Str && ident_like(f.key->str)) {
              put(f.key->str);
              put(" = ");
            } else {
              put('[');
              expr(f.key, depth + 1);
              put("] = ");
            }
          }
          expr(f.val, depth + 1);
        }
        put('}');
        return;
      }
      case Kind::BinOp: {
        // parser output regenerates its own token stream: grouping is always
        // an explicit Paren node, so source mode never adds parentheses.
        // Trace terms are rewritten freely, so they get conservative wraps.
        bool wrap_l = false, wrap_r = false;
        if (!source_mode) {
          int p = prec(t);
          bool right_assoc = t->bin == BinKind::Pow || t->bin == BinKind::Concat;
          int lp = prec(t->kids[0]);
          int rp = prec(t->kids[1]);
          wrap_l = lp < p || (lp == p && right_assoc);
          wrap_r = rp < p || (rp == p && !right_assoc);
        }
        expr_wrapped(t->kids[0], wrap_l, depth + 1);
        put(' ');
        put(bin_text(t->bin));
        put(' ');
        expr_wrapped(t->kids[1], wrap_r, depth + 1);
        return;
      }
      case Kind::UnOp: {
        // a bare not-over-== only arises from the ~= rewrite; print it back
        if (source_mode && t->un == UnKind::Not && t->kids[0]->kind == Kind::BinOp &&
            t->kids[0]->bin == BinKind::Eq) {
          const Term& eq = t->kids[0];
          expr(eq->kids[0], depth + 1);
          put(" ~= ");
          expr(eq->kids[1], depth + 1);
          return;
        }
        const char* op = t->un == UnKind::Not ? "not " : t->un == UnKind::Neg ? "-" : "#";
        put(op);
        size_t at = out.size();
        bool wrap = !source_mode && prec(t->kids[0]) < 8;
        expr_wrapped(t->kids[0], wrap, depth + 1);
        if (t->un == UnKind::Neg && out.size() > at && out[at] == '-') out.insert(at, " ");
        return;
      }
      case Kind::Tuple: {
        put('<');
        for (size_t i = 0; i < t->kids.size(); i++) {
          if (i) put(", ");
          expr(t->kids[i], depth + 1);
        }
        put('>');
        return;
      }
      case Kind::BuiltIn:
        put("$builtIn ");
        put(t->str);
        args(t->kids[0], depth + 1);
        return;
      case Kind::Labeled:
        put('(');
        node(t->kids[0], depth + 1);
        put(")^");
        put(label_name(t->label));
        return;
      case Kind::Err:
        put("$err ");
        expr(t->kids[0], depth + 1);
        return;
      default:
        // a statement in expression position only occurs under trace printing
        node(t, depth);
        return;
    }
  }

  // for-loop resugaring ---------------------------------------------------

  bool try_numeric_for(const Term& t, int depth) {
    if (t->kind != Kind::LocalIn || t->names.size() != 3 || t->names[0] != kForVar) return false;
    const Term& rhs = t->kids[0];
    if (rhs->kids.size() != 3) return false;
    for (const auto& k : rhs->kids)
      if (k->kind != Kind::BuiltIn || k->str != "fortonum") return false;
    const Term& loop = t->kids[1];
    if (loop->kind != Kind::While) return false;
    const Term& inner = loop->kids[1];
    if (inner->kind != Kind::LocalIn || inner->names.size() != 1) return false;
    if (inner->kids[1]->kind != Kind::Seq) return false;
    put("for ");
    put(inner->names[0]);
    put(" = ");
    expr(rhs->kids[0]->kids[0]->kids[0], depth + 1);
    put(", ");
    expr(rhs->kids[1]->kids[0]->kids[0], depth + 1);
    put(", ");
    expr(rhs->kids[2]->kids[0]->kids[0], depth + 1);
    put(" do ");
    size_t before = out.size();
    stmt(inner->kids[1]->kids[0], depth + 1);
    if (out.size() != before) put(' ');
    put("end");
    return true;
  }

  bool try_generic_for(const Term& t, int depth) {
    if (t->kind != Kind::LocalIn || t->names.size() != 3 || t->names[0] != kForIter) return false;
    const Term& loop = t->kids[1];
    if (loop->kind != Kind::While) return false;
    const Term& inner = loop->kids[1];
    if (inner->kind != Kind::LocalIn) return false;
    const Term& body = inner->kids[1];
    if (body->kind != Kind::Seq || body->kids[1]->kind != Kind::Seq) return false;
    put("for ");
    for (size_t i = 0; i < inner->names.size(); i++) {
      if (i) put(", ");
      put(inner->names[i]);
    }
    put(" in ");
    const Term& rhs = t->kids[0];
    for (size_t i = 0; i < rhs->kids.size(); i++) {
      if (i) put(", ");
      expr(rhs->kids[i], depth + 1);
    }
    put(" do ");
    size_t before = out.size();
    stmt(body->kids[1]->kids[1], depth + 1);
    if (out.size() != before) put(' ');
    put("end");
    return true;
  }

  // statements -------------------------------------------------------------

  void block_stmt(const Term& t, int depth) {
    // a bare Skip inside a block prints as nothing
    if (t->kind == Kind::Skip) return;
    stmt(t, depth);
  }

  void stmt(const Term& t, int depth) {
    if (too_deep(depth)) return;
    switch (t->kind) {
      case Kind::Skip: put(";"); return;
      case Kind::Break: put("break"); return;
      case Kind::If: {
        put("if ");
        expr(t->kids[0], depth + 1);
        put(" then ");
        size_t b1 = out.size();
        block_stmt(t->kids[1], depth + 1);
        if (out.size() != b1) put(' ');
        if (t->kids[2]->kind != Kind::Skip) {
          put("else ");
          stmt(t->kids[2], depth + 1);
          put(' ');
        }
        put("end");
        return;
      }
      case Kind::While:
        if (source_mode && (try_numeric_for(t, depth) || try_generic_for(t, depth))) return;
        put("while ");
        expr(t->kids[0], depth + 1);
        put(" do ");
        {
          size_t b = out.size();
          block_stmt(t->kids[1], depth + 1);
          if (out.size() != b) put(' ');
        }
        put("end");
        return;
      case Kind::Iter:
        put("$iter ");
        expr(t->kids[0], depth + 1);
        put(" do ");
        {
          size_t b = out.size();
          block_stmt(t->kids[1], depth + 1);
          if (out.size() != b) put(' ');
        }
        put("end");
        return;
      case Kind::Seq:
        // a declaration that does not scope to the end of the block needs
        // its do..end wrapper back
        if (source_mode && t->kids[0]->kind == Kind::LocalIn) {
          put("do ");
          stmt(t->kids[0], depth);
          put(" end");
        } else {
          stmt(t->kids[0], depth); // sequencing does not consume print depth
        }
        put(' ');
        stmt(t->kids[1], depth);
        return;
      case Kind::LocalIn: {
        if (source_mode && (try_numeric_for(t, depth) || try_generic_for(t, depth))) return;
        put("local ");
        for (size_t i = 0; i < t->names.size(); i++) {
          if (i) put(", ");
          put(t->names[i]);
        }
        const Term& rhs = t->kids[0];
        if (!rhs->kids.empty()) {
          put(" = ");
          for (size_t i = 0; i < rhs->kids.size(); i++) {
            if (i) put(", ");
            expr(rhs->kids[i], depth + 1);
          }
        }
        if (source_mode) {
          if (t->kids[1]->kind != Kind::Skip) {
            put(' ');
            stmt(t->kids[1], depth);
          }
        } else {
          put(" in ");
          size_t b = out.size();
          block_stmt(t->kids[1], depth);
          if (out.size() != b) put(' ');
          put("end");
        }
        return;
      }
      case Kind::Assign: {
        size_t n = t->kids.size();
        for (size_t i = 0; i + 1 < n; i++) {
          if (i) put(", ");
          expr(t->kids[i], depth + 1);
        }
        const Term& rhs = t->kids[n - 1];
        put(" = ");
        for (size_t i = 0; i < rhs->kids.size(); i++) {
          if (i) put(", ");
          expr(rhs->kids[i], depth + 1);
        }
        return;
      }
      case Kind::CallStat:
        expr_wrapped(t->kids[0], needs_prefix_wrap(t->kids[0]), depth + 1);
        args(t->kids[1], depth + 1);
        return;
      case Kind::MethodCallStat:
        expr_wrapped(t->kids[0], needs_prefix_wrap(t->kids[0]), depth + 1);
        put(':');
        put(t->str);
        args(t->kids[1], depth + 1);
        return;
      case Kind::Return: {
        put("return");
        const Term& tuple = t->kids[0];
        for (size_t i = 0; i < tuple->kids.size(); i++) {
          put(i ? ", " : " ");
          expr(tuple->kids[i], depth + 1);
        }
        return;
      }
      case Kind::Labeled:
        put('(');
        node(t->kids[0], depth + 1);
        put(")^");
        put(label_name(t->label));
        return;
      case Kind::Err:
        put("$err ");
        expr(t->kids[0], depth + 1);
        return;
      default: expr(t, depth); return;
    }
  }

  void node(const Term& t, int depth) {
    switch (t->kind) {
      case Kind::Skip:
      case Kind::Break:
      case Kind::If:
      case Kind::While:
      case Kind::Iter:
      case Kind::Seq:
      case Kind::LocalIn:
      case Kind::Assign:
      case Kind::CallStat:
      case Kind::MethodCallStat:
      case Kind::Return: stmt(t, depth); return;
      default: expr(t, depth); return;
    }
  }
};

} // namespace

std::string print_term(const Term& t, int max_depth) {
  Printer p{false, max_depth, {}};
  p.node(t, 0);
  return p.out;
}

std::string print_source(const Term& t) {
  Printer p{true, -1, {}};
  p.node(t, 0);
  return p.out;
}

} // namespace luared
