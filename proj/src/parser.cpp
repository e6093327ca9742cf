#include "luared/parser.hpp"

#include <algorithm>
#include <functional>

namespace luared {

namespace {

struct BinPri {
  BinKind op;
  int left;
  int right;
};

// Lua 5.2 operator table; ^ and .. are right associative, unary is 8.
std::optional<BinPri> binop_of(Tok t) {
  switch (t) {
    case Tok::Or: return BinPri{BinKind::Or, 1, 1};
    case Tok::And: return BinPri{BinKind::And, 2, 2};
    case Tok::Lt: return BinPri{BinKind::Lt, 3, 3};
    case Tok::Gt: return BinPri{BinKind::Gt, 3, 3};
    case Tok::LtEq: return BinPri{BinKind::Le, 3, 3};
    case Tok::GtEq: return BinPri{BinKind::Ge, 3, 3};
    case Tok::EqEq: return BinPri{BinKind::Eq, 3, 3};
    case Tok::NotEq: return BinPri{BinKind::Eq, 3, 3}; // a ~= b parses as not (a == b)
    case Tok::Concat: return BinPri{BinKind::Concat, 5, 4};
    case Tok::Plus: return BinPri{BinKind::Add, 6, 6};
    case Tok::Minus: return BinPri{BinKind::Sub, 6, 6};
    case Tok::Star: return BinPri{BinKind::Mul, 7, 7};
    case Tok::Slash: return BinPri{BinKind::Div, 7, 7};
    case Tok::Percent: return BinPri{BinKind::Mod, 7, 7};
    case Tok::Caret: return BinPri{BinKind::Pow, 10, 9};
    default: return std::nullopt;
  }
}

constexpr int kUnaryPri = 8;

struct FuncState {
  bool vararg = false;
  int loop_depth = 0;
};

class Parser {
 public:
  Parser(const SourceChunk& src, LabelAllocator& labels)
      : toks_(lex(src.bytes)),
        labels_(labels),
        chunk_(std::make_shared<const std::string>(src.chunk_name)) {}

  Term chunk() {
    funcs_.push_back(FuncState{true, 0});
    Term body = block({Tok::Eof});
    expect(Tok::Eof, "<eof>");
    return body;
  }

  Term expression() {
    funcs_.push_back(FuncState{false, 0});
    Term e = expr();
    expect(Tok::Eof, "<eof>");
    return e;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  LabelAllocator& labels_;
  std::shared_ptr<const std::string> chunk_;
  std::vector<std::string> scope_;
  std::vector<FuncState> funcs_;

  const Token& cur() const { return toks_[pos_]; }
  const Token& ahead() const { return toks_[std::min(pos_ + 1, toks_.size() - 1)]; }
  Token take() { return toks_[pos_++]; }
  bool check(Tok t) const { return cur().kind == t; }
  bool accept(Tok t) {
    if (!check(t)) return false;
    pos_++;
    return true;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError{msg, cur().line, cur().column};
  }
  [[noreturn]] void fail_near(const std::string& what) const {
    std::string near = cur().kind == Tok::Number ? num_to_display(cur().number)
                       : cur().kind == Tok::String ? cur().text
                                                   : cur().text;
    throw ParseError{what + " near '" + near + "'", cur().line, cur().column};
  }
  void expect(Tok t, const char* what) {
    if (!accept(t)) fail_near(std::string("'") + what + "' expected");
  }

  SourceRef here(const Token& t) const { return SourceRef{chunk_, t.line}; }
  Term st(Term t, const Token& tok) const { return with_where(std::move(t), here(tok)); }

  bool is_bound(const std::string& name) const {
    if (name == "_ENV") return true;
    return std::find(scope_.rbegin(), scope_.rend(), name) != scope_.rend();
  }

  // x  ==>  x when bound, _ENV["x"] otherwise
  Term resolve(const Token& name_tok) {
    const std::string& name = name_tok.text;
    if (is_bound(name)) return st(mk_name(name), name_tok);
    return st(mk_index(st(mk_name("_ENV"), name_tok), mk_str(name)), name_tok);
  }

  // ---- blocks ------------------------------------------------------

  bool block_ends() const {
    switch (cur().kind) {
      case Tok::Eof:
      case Tok::End:
      case Tok::Else:
      case Tok::Elseif:
      case Tok::Until: return true;
      default: return false;
    }
  }

  Term seq_of(std::vector<Term> stmts, Term tail) {
    Term out = std::move(tail);
    for (auto it = stmts.rbegin(); it != stmts.rend(); ++it)
      out = mk_seq(*it, std::move(out));
    return out;
  }

  // Parses statements until a block terminator. Declarations scope over the
  // trailing statements, so the result nests local..in..end rightwards.
  // `tail` (used by repeat) produces extra statements inside the innermost
  // scope, right before the block closes.
  Term block(std::initializer_list<Tok> /*ends*/,
             const std::function<Term()>* tail = nullptr) {
    std::vector<Term> stmts;
    while (!block_ends()) {
      if (check(Tok::Return)) {
        Term ret = return_stat();
        if (!block_ends()) fail_near("'<eof>' expected");
        Term t = tail ? mk_seq(ret, (*tail)()) : ret; // unreachable code kept for faithfulness
        return seq_of(std::move(stmts), std::move(t));
      }
      if (check(Tok::Local)) {
        Term rest = local_stat(tail);
        return seq_of(std::move(stmts), std::move(rest));
      }
      stmts.push_back(statement());
    }
    Term t = tail ? (*tail)() : mk_skip();
    if (stmts.empty()) return t;
    if (!tail && stmts.size() >= 1) {
      Term out = stmts.back();
      for (auto it = std::next(stmts.rbegin()); it != stmts.rend(); ++it)
        out = mk_seq(*it, std::move(out));
      return out;
    }
    return seq_of(std::move(stmts), std::move(t));
  }

  Term return_stat() {
    Token kw = take();
    std::vector<Term> exprs;
    if (!block_ends() && !check(Tok::Semi)) exprs = explist();
    accept(Tok::Semi);
    return st(mk_return(mk_tuple(std::move(exprs))), kw);
  }

  // local x,... = e,...  |  local function f ...
  Term local_stat(const std::function<Term()>* tail) {
    Token kw = take();
    if (accept(Tok::Function)) {
      Token name = take_name();
      scope_.push_back(name.text); // visible to its own body: enables recursion
      Term fn = funcbody(name, false);
      Term rest = block({}, tail);
      scope_.pop_back();
      Term assign = st(mk_assign({st(mk_name(name.text), name)},
                                 mk_tuple({std::move(fn)})),
                       name);
      return st(mk_localin({name.text}, mk_tuple({mk_nil()}),
                           mk_seq(std::move(assign), std::move(rest))),
                kw);
    }
    std::vector<std::string> names;
    std::vector<Token> name_toks;
    do {
      Token n = take_name();
      names.push_back(n.text);
      name_toks.push_back(n);
    } while (accept(Tok::Comma));
    std::vector<Term> exprs;
    if (accept(Tok::Assign)) exprs = explist();
    size_t mark = scope_.size();
    for (const auto& n : names) scope_.push_back(n);
    Term rest = block({}, tail);
    scope_.resize(mark);
    return st(mk_localin(std::move(names), mk_tuple(std::move(exprs)), std::move(rest)), kw);
  }

  Token take_name() {
    if (!check(Tok::Name)) fail_near("<name> expected");
    return take();
  }

  // ---- statements ----------------------------------------------------

  Term statement() {
    switch (cur().kind) {
      case Tok::Semi: {
        Token t = take();
        return st(mk_skip(), t);
      }
      case Tok::If: return if_stat();
      case Tok::While: return while_stat();
      case Tok::Do: {
        take();
        Term b = block({Tok::End});
        expect(Tok::End, "end");
        return b;
      }
      case Tok::For: return for_stat();
      case Tok::Repeat: return repeat_stat();
      case Tok::Function: return function_stat();
      case Tok::Break: {
        Token t = take();
        if (funcs_.back().loop_depth == 0)
          throw ParseError{"break outside a loop", t.line, t.column};
        return st(mk_break(), t);
      }
      case Tok::Goto: fail_near("'goto' is not supported");
      case Tok::DbColon: fail_near("labels are not supported");
      default: return expr_stat();
    }
  }

  Term if_stat() {
    Token kw = take(); // if / elseif
    Term guard = expr();
    expect(Tok::Then, "then");
    Term then_b = block({Tok::End, Tok::Else, Tok::Elseif});
    Term else_b;
    if (check(Tok::Elseif)) {
      else_b = if_stat(); // nests; consumes the final end
      return st(mk_if(std::move(guard), std::move(then_b), std::move(else_b)), kw);
    }
    if (accept(Tok::Else))
      else_b = block({Tok::End});
    else
      else_b = mk_skip();
    expect(Tok::End, "end");
    return st(mk_if(std::move(guard), std::move(then_b), std::move(else_b)), kw);
  }

  Term while_stat() {
    Token kw = take();
    Term guard = expr();
    expect(Tok::Do, "do");
    funcs_.back().loop_depth++;
    Term body = block({Tok::End});
    funcs_.back().loop_depth--;
    expect(Tok::End, "end");
    return st(mk_while(std::move(guard), std::move(body)), kw);
  }

  // repeat s until e  ==>  while true do s if e then break end end
  // where e still sees s's locals.
  Term repeat_stat() {
    Token kw = take();
    funcs_.back().loop_depth++;
    std::function<Term()> tail = [&]() -> Term {
      expect(Tok::Until, "until");
      Token at = toks_[pos_ - 1];
      Term cond = expr();
      return st(mk_if(std::move(cond), mk_break(), mk_skip()), at);
    };
    Term body = block({Tok::Until}, &tail);
    funcs_.back().loop_depth--;
    return st(mk_while(mk_true(), std::move(body)), kw);
  }

  Term for_stat() {
    Token kw = take();
    Token first = take_name();
    if (accept(Tok::Assign)) return numeric_for(kw, first);
    std::vector<Token> names{first};
    while (accept(Tok::Comma)) names.push_back(take_name());
    expect(Tok::In, "in");
    return generic_for(kw, names);
  }

  Term fortonum(Term e, const Token& kw, const char* what) {
    return st(mk_builtin("fortonum", mk_tuple({std::move(e), mk_str(what)})), kw);
  }

  Term numeric_for(const Token& kw, const Token& var) {
    Term e1 = expr();
    expect(Tok::Comma, ",");
    Term e2 = expr();
    Term e3 = accept(Tok::Comma) ? expr() : mk_num(1);
    expect(Tok::Do, "do");
    size_t mark = scope_.size();
    scope_.push_back(kForVar);
    scope_.push_back(kForLimit);
    scope_.push_back(kForStep);
    scope_.push_back(var.text);
    funcs_.back().loop_depth++;
    Term body = block({Tok::End});
    funcs_.back().loop_depth--;
    scope_.resize(mark);
    expect(Tok::End, "end");

    auto name = [&](const char* n) { return mk_name(n); };
    Term guard = mk_binop(
        BinKind::Or,
        mk_paren(mk_binop(BinKind::And, mk_binop(BinKind::Lt, mk_num(0), name(kForStep)),
                          mk_binop(BinKind::Le, name(kForVar), name(kForLimit)))),
        mk_paren(mk_binop(BinKind::And, mk_binop(BinKind::Le, name(kForStep), mk_num(0)),
                          mk_binop(BinKind::Le, name(kForLimit), name(kForVar)))));
    Term bump = st(mk_assign({name(kForVar)},
                             mk_tuple({mk_binop(BinKind::Add, name(kForVar), name(kForStep))})),
                   kw);
    Term inner = mk_localin({var.text}, mk_tuple({name(kForVar)}),
                            mk_seq(std::move(body), std::move(bump)));
    Term loop = st(mk_while(std::move(guard), std::move(inner)), kw);
    return st(mk_localin({kForVar, kForLimit, kForStep},
                         mk_tuple({fortonum(std::move(e1), kw, "initial value"),
                                   fortonum(std::move(e2), kw, "limit"),
                                   fortonum(std::move(e3), kw, "step")}),
                         std::move(loop)),
              kw);
  }

  Term generic_for(const Token& kw, const std::vector<Token>& names) {
    std::vector<Term> exprs = explist();
    expect(Tok::Do, "do");
    size_t mark = scope_.size();
    scope_.push_back(kForIter);
    scope_.push_back(kForState);
    scope_.push_back(kForCtl);
    std::vector<std::string> binder_names;
    for (const auto& n : names) {
      scope_.push_back(n.text);
      binder_names.push_back(n.text);
    }
    funcs_.back().loop_depth++;
    Term body = block({Tok::End});
    funcs_.back().loop_depth--;
    scope_.resize(mark);
    expect(Tok::End, "end");

    auto name = [&](const std::string& n) { return mk_name(n); };
    Term step_call =
        st(mk_call(name(kForIter), mk_tuple({name(kForState), name(kForCtl)})), kw);
    Term stop = mk_if(mk_binop(BinKind::Eq, name(names[0].text), mk_nil()), mk_break(),
                      mk_skip());
    Term advance = st(mk_assign({name(kForCtl)}, mk_tuple({name(names[0].text)})), kw);
    Term inner = mk_localin(binder_names, mk_tuple({std::move(step_call)}),
                            mk_seq(std::move(stop), mk_seq(std::move(advance), std::move(body))));
    Term loop = st(mk_while(mk_true(), std::move(inner)), kw);
    return st(mk_localin({kForIter, kForState, kForCtl}, mk_tuple(std::move(exprs)),
                         std::move(loop)),
              kw);
  }

  // function f / function a.b.c / function a.b:m  ==>  assignment
  Term function_stat() {
    Token kw = take();
    Token base = take_name();
    Term lvalue = resolve(base);
    bool method = false;
    Token final_name = base;
    while (true) {
      if (accept(Tok::Dot)) {
        final_name = take_name();
        lvalue = st(mk_index(std::move(lvalue), mk_str(final_name.text)), final_name);
      } else if (accept(Tok::Colon)) {
        final_name = take_name();
        lvalue = st(mk_index(std::move(lvalue), mk_str(final_name.text)), final_name);
        method = true;
        break;
      } else {
        break;
      }
    }
    Term fn = funcbody(kw, method);
    return st(mk_assign({std::move(lvalue)}, mk_tuple({std::move(fn)})), kw);
  }

  Term funcbody(const Token& at, bool method) {
    FunLabel label = labels_.fresh();
    expect(Tok::LParen, "(");
    std::vector<std::string> params;
    if (method) params.push_back("self");
    bool vararg = false;
    if (!check(Tok::RParen)) {
      while (true) {
        if (accept(Tok::Ellipsis)) {
          vararg = true;
          break;
        }
        Token p = take_name();
        if (std::find(params.begin(), params.end(), p.text) != params.end())
          throw ParseError{"duplicate parameter name '" + p.text + "'", p.line, p.column};
        params.push_back(p.text);
        if (!accept(Tok::Comma)) break;
      }
    }
    expect(Tok::RParen, ")");
    size_t mark = scope_.size();
    for (const auto& p : params) scope_.push_back(p);
    funcs_.push_back(FuncState{vararg, 0});
    Term body = block({Tok::End});
    funcs_.pop_back();
    scope_.resize(mark);
    expect(Tok::End, "end");
    return st(mk_function(label, std::move(params), vararg, std::move(body)), at);
  }

  // assignment or call statement
  Term expr_stat() {
    Token at = cur();
    Term e = suffixedexp();
    if (check(Tok::Assign) || check(Tok::Comma)) {
      std::vector<Term> lvalues{std::move(e)};
      while (accept(Tok::Comma)) lvalues.push_back(suffixedexp());
      for (const auto& lv : lvalues)
        if (lv->kind != Kind::Name && lv->kind != Kind::Index)
          throw ParseError{"cannot assign to this expression", at.line, at.column};
      expect(Tok::Assign, "=");
      std::vector<Term> exprs = explist();
      return st(mk_assign(std::move(lvalues), mk_tuple(std::move(exprs))), at);
    }
    if (e->kind == Kind::Call)
      return st(mk_callstat(e->kids[0], e->kids[1]), at);
    if (e->kind == Kind::MethodCall)
      return st(mk_methodcallstat(e->kids[0], e->str, e->kids[1]), at);
    fail_near("syntax error");
  }

  // ---- expressions -----------------------------------------------------

  std::vector<Term> explist() {
    std::vector<Term> out{expr()};
    while (accept(Tok::Comma)) out.push_back(expr());
    return out;
  }

  Term expr() { return subexpr(0); }

  Term subexpr(int limit) {
    Term left;
    Token at = cur();
    if (check(Tok::Not) || check(Tok::Minus) || check(Tok::Hash)) {
      Token op = take();
      Term operand = subexpr(kUnaryPri);
      UnKind u = op.kind == Tok::Not ? UnKind::Not
                 : op.kind == Tok::Minus ? UnKind::Neg
                                         : UnKind::Len;
      left = st(mk_unop(u, std::move(operand)), op);
    } else {
      left = simpleexp();
    }
    while (true) {
      auto pri = binop_of(cur().kind);
      if (!pri || pri->left <= limit) break;
      Token op = take();
      Term right = subexpr(pri->right);
      Term bin = st(mk_binop(pri->op, std::move(left), std::move(right)), op);
      if (op.kind == Tok::NotEq) bin = st(mk_unop(UnKind::Not, std::move(bin)), op);
      left = std::move(bin);
    }
    return left;
  }

  Term simpleexp() {
    Token at = cur();
    switch (at.kind) {
      case Tok::Nil: take(); return mk_nil();
      case Tok::True: take(); return mk_true();
      case Tok::False: take(); return mk_false();
      case Tok::Number: take(); return st(mk_num(at.number), at);
      case Tok::String: take(); return st(mk_str(at.text), at);
      case Tok::Ellipsis:
        take();
        if (!funcs_.back().vararg)
          throw ParseError{"cannot use '...' outside a vararg function", at.line, at.column};
        return st(mk_vararg(), at);
      case Tok::Function: {
        take();
        return funcbody(at, false);
      }
      case Tok::LBrace: return tablecons();
      default: return suffixedexp();
    }
  }

  Term primaryexp() {
    Token at = cur();
    if (check(Tok::Name)) return resolve(take());
    if (accept(Tok::LParen)) {
      Term inner = expr();
      expect(Tok::RParen, ")");
      return st(mk_paren(std::move(inner)), at);
    }
    fail_near("unexpected symbol");
  }

  Term suffixedexp() {
    Term e = primaryexp();
    while (true) {
      Token at = cur();
      switch (at.kind) {
        case Tok::Dot: {
          take();
          Token n = take_name();
          e = st(mk_index(std::move(e), mk_str(n.text)), n);
          break;
        }
        case Tok::LBracket: {
          take();
          Term k = expr();
          expect(Tok::RBracket, "]");
          e = st(mk_index(std::move(e), std::move(k)), at);
          break;
        }
        case Tok::Colon: {
          take();
          Token n = take_name();
          Term args = callargs();
          e = st(mk_methodcall(std::move(e), n.text, std::move(args)), at);
          break;
        }
        case Tok::LParen:
        case Tok::String:
        case Tok::LBrace: {
          Term args = callargs();
          e = st(mk_call(std::move(e), std::move(args)), at);
          break;
        }
        default: return e;
      }
    }
  }

  Term callargs() {
    Token at = cur();
    if (check(Tok::String)) {
      Token s = take();
      return mk_tuple({st(mk_str(s.text), s)});
    }
    if (check(Tok::LBrace)) return mk_tuple({tablecons()});
    expect(Tok::LParen, "(");
    std::vector<Term> args;
    if (!check(Tok::RParen)) args = explist();
    expect(Tok::RParen, ")");
    (void)at;
    return mk_tuple(std::move(args));
  }

  Term tablecons() {
    Token at = take(); // {
    std::vector<TableField> fields;
    while (!check(Tok::RBrace)) {
      if (check(Tok::LBracket)) {
        take();
        Term k = expr();
        expect(Tok::RBracket, "]");
        expect(Tok::Assign, "=");
        Term v = expr();
        fields.push_back({true, std::move(k), std::move(v)});
      } else if (check(Tok::Name) && ahead().kind == Tok::Assign) {
        Token n = take();
        take(); // =
        Term v = expr();
        fields.push_back({true, st(mk_str(n.text), n), std::move(v)});
      } else {
        fields.push_back({false, nullptr, expr()});
      }
      if (!accept(Tok::Comma) && !accept(Tok::Semi)) break;
    }
    expect(Tok::RBrace, "}");
    return st(mk_table(std::move(fields)), at);
  }
};

} // namespace

std::variant<Term, ParseError> parse_chunk(const SourceChunk& src, LabelAllocator& labels) {
  try {
    Parser p(src, labels);
    return p.chunk();
  } catch (const ParseError& e) {
    return e;
  }
}

std::variant<Term, ParseError> parse_expression(const SourceChunk& src, LabelAllocator& labels) {
  try {
    Parser p(src, labels);
    return p.expression();
  } catch (const ParseError& e) {
    return e;
  }
}

} // namespace luared
