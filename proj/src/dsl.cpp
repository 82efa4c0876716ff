/*
 * Copyright (C) 2026 The cubesim authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cubesim/dsl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace cubesim {

namespace {

// --- Lexer -------------------------------------------------------------------

enum class Tok : std::uint8_t {
  Ident, Number, String,
  LBrace, RBrace, LParen, RParen, LBracket, RBracket,
  Comma, Semi, Slash, Arrow, Assign,
  Eq, Ne, Lt, Le, Gt, Ge,
  Plus, Minus, Star, Percent, DotDot,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  SourcePos pos;
};

std::string describe(const Token &t) {
  switch (t.kind) {
  case Tok::End: return "end of input";
  case Tok::String: return "string \"" + t.text + "\"";
  default: return "'" + t.text + "'";
  }
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.pos = {line_, col_};
      if (i_ >= src_.size()) {
        out.push_back(std::move(t));
        return out;
      }
      char c = src_[i_];
      if (ident_start(c)) {
        lex_ident(t);
      } else if (digit(c)) {
        lex_number(t);
      } else if (c == '"') {
        lex_string(t);
      } else {
        lex_punct(t);
      }
      out.push_back(std::move(t));
    }
  }

private:
  char peek(std::size_t ahead = 0) const {
    return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0';
  }

  void advance() {
    if (src_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else if ((static_cast<unsigned char>(src_[i_]) & 0xC0) != 0x80) {
      ++col_; // count UTF-8 code points, not bytes
    }
    ++i_;
  }

  void skip_space() {
    while (i_ < src_.size()) {
      char c = src_[i_];
      if (c == '#') {
        while (i_ < src_.size() && src_[i_] != '\n')
          advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  [[noreturn]] void fail(const std::string &msg) const {
    throw Error(ErrorCode::SyntaxError, msg, {line_, col_});
  }

  void lex_ident(Token &t) {
    t.kind = Tok::Ident;
    std::size_t start = i_;
    for (;;) {
      while (i_ < src_.size() && ident_char(src_[i_]))
        advance();
      if (peek() == '.' && ident_start(peek(1)))
        advance();
      else
        break;
    }
    t.text = std::string(src_.substr(start, i_ - start));
  }

  void lex_number(Token &t) {
    t.kind = Tok::Number;
    std::size_t start = i_;
    while (digit(peek()))
      advance();
    if (peek() == '.' && digit(peek(1))) {
      advance();
      while (digit(peek()))
        advance();
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (digit(peek(1)) || ((peek(1) == '+' || peek(1) == '-') && digit(peek(2))))) {
      advance();
      if (peek() == '+' || peek() == '-')
        advance();
      while (digit(peek()))
        advance();
    }
    t.text = std::string(src_.substr(start, i_ - start));
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
    if (ec != std::errc() || !std::isfinite(t.number))
      throw Error(ErrorCode::SyntaxError, "number out of range: " + t.text, t.pos);
    if (ident_start(peek()))
      fail("malformed number '" + t.text + peek() + "'");
  }

  void lex_string(Token &t) {
    t.kind = Tok::String;
    advance();
    for (;;) {
      if (i_ >= src_.size() || peek() == '\n')
        throw Error(ErrorCode::SyntaxError, "unterminated string", t.pos);
      char c = peek();
      advance();
      if (c == '"')
        break;
      if (c == '\\') {
        if (i_ >= src_.size())
          throw Error(ErrorCode::SyntaxError, "unterminated string", t.pos);
        char n = peek();
        advance();
        switch (n) {
        case 'n': t.text += '\n'; break;
        case 't': t.text += '\t'; break;
        case '"': t.text += '"'; break;
        case '\\': t.text += '\\'; break;
        default: fail(std::string("unknown escape '\\") + n + "'");
        }
      } else {
        t.text += c;
      }
    }
  }

  void lex_punct(Token &t) {
    char c = peek();
    char n = peek(1);
    auto two = [&](Tok k, const char *s) {
      t.kind = k;
      t.text = s;
      advance();
      advance();
    };
    auto one = [&](Tok k) {
      t.kind = k;
      t.text = std::string(1, c);
      advance();
    };
    switch (c) {
    case '{': return one(Tok::LBrace);
    case '}': return one(Tok::RBrace);
    case '(': return one(Tok::LParen);
    case ')': return one(Tok::RParen);
    case '[': return one(Tok::LBracket);
    case ']': return one(Tok::RBracket);
    case ',': return one(Tok::Comma);
    case ';': return one(Tok::Semi);
    case '/': return one(Tok::Slash);
    case '+': return one(Tok::Plus);
    case '*': return one(Tok::Star);
    case '%': return one(Tok::Percent);
    case '-':
      if (n == '>')
        return two(Tok::Arrow, "->");
      return one(Tok::Minus);
    case '=':
      if (n == '=')
        return two(Tok::Eq, "==");
      return one(Tok::Assign);
    case '!':
      if (n == '=')
        return two(Tok::Ne, "!=");
      break;
    case '<':
      if (n == '=')
        return two(Tok::Le, "<=");
      return one(Tok::Lt);
    case '>':
      if (n == '=')
        return two(Tok::Ge, ">=");
      return one(Tok::Gt);
    case '.':
      if (n == '.')
        return two(Tok::DotDot, "..");
      break;
    default:
      break;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view src_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// --- Parser ------------------------------------------------------------------

bool is_reserved(std::string_view word) {
  static const std::set<std::string_view> kReserved{"true", "false", "and", "or", "not", "in"};
  return kReserved.count(word) > 0;
}

class Parser {
public:
  explicit Parser(std::string_view src) : toks_(Lexer(src).run()) {}

  ModelFile model() {
    ModelFile out;
    std::set<std::string, std::less<>> vars;
    std::set<std::string, std::less<>> machines;
    while (!at(Tok::End)) {
      const Token &t = cur();
      if (is_word("var")) {
        VarDecl v = var_decl();
        if (!vars.insert(v.name).second)
          throw Error(ErrorCode::DuplicateVar, "variable '" + v.name + "' declared twice", v.pos);
        out.vars.push_back(std::move(v));
      } else if (is_word("machine")) {
        MachineDef m = machine();
        if (!machines.insert(m.name).second)
          throw Error(ErrorCode::DuplicateMachine, "machine '" + m.name + "' defined twice",
                      m.pos);
        out.machines.push_back(std::move(m));
      } else if (is_word("monitor")) {
        out.monitors.push_back(monitor());
      } else {
        fail(t, "'var', 'machine' or 'monitor'");
      }
      accept(Tok::Semi);
    }
    return out;
  }

  PlanFile plan(std::int64_t tick_s) {
    PlanFile out;
    expect_word("plan");
    out.name = ident("plan name").text;
    expect(Tok::LBrace, "'{'");
    std::int64_t last_at = 0;
    auto check_at = [&](std::int64_t at_s, const Token &where) {
      if (at_s < last_at)
        throw Error(ErrorCode::NonMonotonicTimes,
                    "time " + std::to_string(at_s) + " follows " + std::to_string(last_at),
                    where.pos);
      last_at = at_s;
    };
    while (!at(Tok::RBrace)) {
      const Token &start = cur();
      if (is_word("at")) {
        next();
        const Token &time_tok = cur();
        std::int64_t t = seconds(tick_s);
        check_at(t, time_tok);
        if (is_word("emit")) {
          next();
          out.injections.push_back({t, ident("event name").text, start.pos});
        } else if (is_word("expect")) {
          next();
          Assertion a;
          a.kind = Assertion::Kind::At;
          a.t1_s = a.t2_s = t;
          a.pos = start.pos;
          a.predicate = expr();
          out.assertions.push_back(std::move(a));
        } else {
          fail(cur(), "'emit' or 'expect'");
        }
      } else if (is_word("expect")) {
        next();
        Assertion a;
        a.pos = start.pos;
        if (is_word("always")) {
          next();
          a.kind = Assertion::Kind::Always;
        } else if (is_word("eventually")) {
          next();
          expect_word("within");
          a.kind = Assertion::Kind::EventuallyWithin;
          a.t1_s = seconds(tick_s);
          expect(Tok::DotDot, "'..'");
          const Token &t2_tok = cur();
          a.t2_s = seconds(tick_s);
          if (a.t2_s < a.t1_s)
            throw Error(ErrorCode::SyntaxError, "window end precedes window start", t2_tok.pos);
        } else {
          fail(cur(), "'always' or 'eventually'");
        }
        a.predicate = expr();
        out.assertions.push_back(std::move(a));
      } else {
        fail(start, "'at', 'expect' or '}'");
      }
      accept(Tok::Semi);
    }
    next();
    if (!at(Tok::End))
      fail(cur(), "end of input");
    return out;
  }

  Expr whole_expr() {
    Expr e = expr();
    if (!at(Tok::End))
      fail(cur(), "end of expression");
    return e;
  }

  ActionBlock whole_actions() {
    ActionBlock b;
    if (at(Tok::LBrace))
      b = block();
    else
      b = statements(Tok::End);
    if (!at(Tok::End))
      fail(cur(), "end of input");
    return b;
  }

private:
  const Token &cur() const { return toks_[pos_]; }
  const Token &peek_tok(std::size_t ahead = 1) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at(Tok k) const { return cur().kind == k; }
  bool is_word(std::string_view w) const { return at(Tok::Ident) && cur().text == w; }
  const Token &next() {
    const Token &t = toks_[pos_];
    if (pos_ + 1 < toks_.size())
      ++pos_;
    return t;
  }
  bool accept(Tok k) {
    if (!at(k))
      return false;
    next();
    return true;
  }

  [[noreturn]] static void fail(const Token &t, const std::string &expected) {
    throw Error(ErrorCode::SyntaxError, "expected " + expected + ", found " + describe(t), t.pos);
  }

  const Token &expect(Tok k, const std::string &what) {
    if (!at(k))
      fail(cur(), what);
    return next();
  }

  void expect_word(std::string_view w) {
    if (!is_word(w))
      fail(cur(), "'" + std::string(w) + "'");
    next();
  }

  const Token &ident(const std::string &what) {
    if (!at(Tok::Ident) || is_reserved(cur().text))
      fail(cur(), what);
    return next();
  }

  /// A plain identifier: no dots (state names, machine names, events).
  const Token &simple_ident(const std::string &what) {
    const Token &t = ident(what);
    if (t.text.find('.') != std::string::npos)
      throw Error(ErrorCode::SyntaxError, what + " may not contain '.': " + t.text, t.pos);
    return t;
  }

  std::int64_t seconds(std::int64_t tick_s) {
    const Token &t = expect(Tok::Number, "a time in seconds");
    if (t.number != std::floor(t.number) || t.number > 9.0e15)
      throw Error(ErrorCode::SyntaxError, "time must be a whole number of seconds: " + t.text,
                  t.pos);
    auto s = static_cast<std::int64_t>(t.number);
    if (tick_s > 0 && s % tick_s != 0)
      throw Error(ErrorCode::MisalignedTime,
                  "time " + t.text + " is not a multiple of the tick (" +
                      std::to_string(tick_s) + " s)",
                  t.pos);
    return s;
  }

  Value literal() {
    const Token &t = cur();
    bool negative = false;
    if (at(Tok::Minus)) {
      negative = true;
      next();
    }
    if (at(Tok::Number))
      return negative ? -next().number : next().number;
    if (negative)
      fail(cur(), "a number");
    if (at(Tok::String))
      return Value{next().text};
    if (is_word("true")) {
      next();
      return true;
    }
    if (is_word("false")) {
      next();
      return false;
    }
    fail(t, "a literal value");
  }

  VarDecl var_decl() {
    const Token &kw = next();
    VarDecl v;
    v.pos = kw.pos;
    v.name = ident("variable name").text;
    expect(Tok::Assign, "'='");
    v.initial = literal();
    accept(Tok::Semi);
    return v;
  }

  MonitorSpec monitor() {
    const Token &kw = next();
    MonitorSpec m;
    m.pos = kw.pos;
    m.source = ident("variable or machine path").text;
    expect_word("as");
    m.column = expect(Tok::String, "a quoted column label").text;
    accept(Tok::Semi);
    return m;
  }

  MachineDef machine() {
    const Token &kw = next();
    MachineDef m;
    m.pos = kw.pos;
    m.name = simple_ident("machine name").text;
    expect(Tok::LBrace, "'{'");
    expect_word("initial");
    const Token &init = simple_ident("initial state name");
    m.initial = init.text;
    std::vector<const Token *> targets;
    while (!at(Tok::RBrace)) {
      if (is_word("state")) {
        StateDef s = state(targets);
        if (m.find_state(s.name))
          throw Error(ErrorCode::DuplicateState,
                      "state '" + s.name + "' declared twice in machine '" + m.name + "'", s.pos);
        m.states.push_back(std::move(s));
      } else if (is_word("monitor")) {
        m.monitors.push_back(monitor());
      } else {
        fail(cur(), "'state', 'monitor' or '}'");
      }
      accept(Tok::Semi);
    }
    next();
    if (!m.find_state(m.initial))
      throw Error(ErrorCode::SyntaxError,
                  "initial state '" + m.initial + "' is not a state of machine '" + m.name + "'",
                  init.pos);
    for (const Token *t : targets)
      if (!m.find_state(t->text))
        throw Error(ErrorCode::SyntaxError,
                    "transition targets undeclared state '" + t->text + "' in machine '" +
                        m.name + "'",
                    t->pos);
    return m;
  }

  StateDef state(std::vector<const Token *> &targets) {
    const Token &kw = next();
    StateDef s;
    s.pos = kw.pos;
    s.name = simple_ident("state name").text;
    expect(Tok::LBrace, "'{'");
    bool seen_entry = false, seen_exit = false, seen_uses = false;
    auto once = [&](bool &seen, const Token &t) {
      if (seen)
        throw Error(ErrorCode::SyntaxError, "duplicate '" + t.text + "' clause", t.pos);
      seen = true;
    };
    while (!at(Tok::RBrace)) {
      const Token &t = cur();
      if (is_word("entry")) {
        once(seen_entry, next());
        s.entry_actions = block();
      } else if (is_word("exit")) {
        once(seen_exit, next());
        s.exit_actions = block();
      } else if (is_word("every")) {
        if (s.periodic)
          throw Error(ErrorCode::SyntaxError, "duplicate 'every' clause", t.pos);
        next();
        PeriodicDef p;
        p.pos = t.pos;
        p.interval_s = seconds(0);
        if (p.interval_s <= 0)
          throw Error(ErrorCode::SyntaxError, "periodic interval must be positive", t.pos);
        p.actions = block();
        s.periodic = std::move(p);
      } else if (is_word("uses")) {
        once(seen_uses, next());
        do {
          s.submachines.push_back(simple_ident("machine name").text);
        } while (accept(Tok::Comma));
      } else if (is_word("on")) {
        s.transitions.push_back(transition(targets));
      } else {
        fail(t, "'entry', 'exit', 'every', 'uses', 'on' or '}'");
      }
      accept(Tok::Semi);
    }
    next();
    return s;
  }

  TransitionDef transition(std::vector<const Token *> &targets) {
    const Token &kw = next();
    TransitionDef tr;
    tr.pos = kw.pos;
    if (is_word("timer") && peek_tok().kind == Tok::Ident) {
      next();
      tr.kind = TriggerKind::Timer;
      tr.trigger = simple_ident("timer name").text;
    } else if (is_word("auto")) {
      next();
      tr.kind = TriggerKind::Auto;
    } else {
      tr.kind = TriggerKind::Event;
      tr.trigger = simple_ident("event name, 'timer' or 'auto'").text;
    }
    if (accept(Tok::LBracket)) {
      tr.guard = expr();
      expect(Tok::RBracket, "']'");
    } else if (tr.kind == TriggerKind::Auto) {
      fail(cur(), "'[' (auto transitions need a guard)");
    }
    if (accept(Tok::Slash))
      tr.actions = block();
    expect(Tok::Arrow, "'->'");
    const Token &target = simple_ident("target state");
    tr.target = target.text;
    targets.push_back(&target);
    return tr;
  }

  ActionBlock block() {
    expect(Tok::LBrace, "'{'");
    ActionBlock b = statements(Tok::RBrace);
    expect(Tok::RBrace, "'}'");
    return b;
  }

  ActionBlock statements(Tok terminator) {
    ActionBlock b;
    while (!at(terminator)) {
      b.push_back(statement());
      accept(Tok::Semi);
    }
    return b;
  }

  Stmt statement() {
    const Token &t = cur();
    if (is_word("emit") && peek_tok().kind == Tok::Ident) {
      next();
      return Stmt::make_emit(simple_ident("event name").text, t.pos);
    }
    if (is_word("start_timer") && peek_tok().kind == Tok::LParen) {
      next();
      next();
      std::string name = simple_ident("timer name").text;
      expect(Tok::Comma, "','");
      Expr delay = expr();
      expect(Tok::RParen, "')'");
      return Stmt::make_start_timer(std::move(name), std::move(delay), t.pos);
    }
    if (is_word("if")) {
      next();
      return if_tail(t);
    }
    const Token &var = ident("a statement");
    expect(Tok::Assign, "'='");
    return Stmt::make_assign(var.text, expr(), t.pos);
  }

  Stmt if_tail(const Token &kw) {
    Expr cond = expr();
    ActionBlock then_block = block();
    ActionBlock else_block;
    if (is_word("else")) {
      next();
      if (is_word("if")) {
        const Token &inner = next();
        else_block.push_back(if_tail(inner));
      } else {
        else_block = block();
      }
    }
    return Stmt::make_if(std::move(cond), std::move(then_block), std::move(else_block), kw.pos);
  }

  // expr := or ; or := and {"or" and} ; and := not {"and" not}
  // not := "not" not | cmp ; cmp := add [relop add]
  // add := mul {(+|-) mul} ; mul := unary {(*|/|%) unary} ; unary := "-" unary | primary
  Expr expr() { return or_expr(); }

  Expr or_expr() {
    Expr lhs = and_expr();
    while (is_word("or")) {
      SourcePos p = next().pos;
      lhs = Expr::make_binary(BinaryOp::Or, std::move(lhs), and_expr(), p);
    }
    return lhs;
  }

  Expr and_expr() {
    Expr lhs = not_expr();
    while (is_word("and")) {
      SourcePos p = next().pos;
      lhs = Expr::make_binary(BinaryOp::And, std::move(lhs), not_expr(), p);
    }
    return lhs;
  }

  Expr not_expr() {
    if (is_word("not")) {
      SourcePos p = next().pos;
      return Expr::make_unary(UnaryOp::Not, not_expr(), p);
    }
    return cmp_expr();
  }

  Expr cmp_expr() {
    Expr lhs = add_expr();
    BinaryOp op;
    switch (cur().kind) {
    case Tok::Eq: op = BinaryOp::Eq; break;
    case Tok::Ne: op = BinaryOp::Ne; break;
    case Tok::Lt: op = BinaryOp::Lt; break;
    case Tok::Le: op = BinaryOp::Le; break;
    case Tok::Gt: op = BinaryOp::Gt; break;
    case Tok::Ge: op = BinaryOp::Ge; break;
    default: return lhs;
    }
    SourcePos p = next().pos;
    return Expr::make_binary(op, std::move(lhs), add_expr(), p);
  }

  Expr add_expr() {
    Expr lhs = mul_expr();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      BinaryOp op = at(Tok::Plus) ? BinaryOp::Add : BinaryOp::Sub;
      SourcePos p = next().pos;
      lhs = Expr::make_binary(op, std::move(lhs), mul_expr(), p);
    }
    return lhs;
  }

  Expr mul_expr() {
    Expr lhs = unary_expr();
    while (at(Tok::Star) || at(Tok::Slash) || at(Tok::Percent)) {
      BinaryOp op = at(Tok::Star) ? BinaryOp::Mul : at(Tok::Slash) ? BinaryOp::Div : BinaryOp::Mod;
      SourcePos p = next().pos;
      lhs = Expr::make_binary(op, std::move(lhs), unary_expr(), p);
    }
    return lhs;
  }

  Expr unary_expr() {
    if (at(Tok::Minus)) {
      SourcePos p = next().pos;
      // A minus directly on a number literal folds into the literal.
      if (at(Tok::Number))
        return Expr::make_literal(-next().number, p);
      return Expr::make_unary(UnaryOp::Neg, unary_expr(), p);
    }
    return primary();
  }

  Expr primary() {
    const Token &t = cur();
    switch (t.kind) {
    case Tok::Number:
      next();
      return Expr::make_literal(t.number, t.pos);
    case Tok::String:
      next();
      return Expr::make_literal(Value{t.text}, t.pos);
    case Tok::LParen: {
      next();
      Expr e = expr();
      expect(Tok::RParen, "')'");
      return e;
    }
    case Tok::Ident:
      break;
    default:
      fail(t, "an expression");
    }
    if (t.text == "true" || t.text == "false") {
      next();
      return Expr::make_literal(t.text == "true", t.pos);
    }
    if (t.text == "in" && peek_tok().kind == Tok::LParen) {
      next();
      next();
      std::string machine = ident("machine name or path").text;
      expect(Tok::Comma, "','");
      std::string state = simple_ident("state name").text;
      expect(Tok::RParen, "')'");
      return Expr::make_in_state(std::move(machine), std::move(state), t.pos);
    }
    if (is_reserved(t.text))
      fail(t, "an expression");
    next();
    if (!at(Tok::LParen))
      return Expr::make_var(t.text, t.pos);
    const Builtin *b = find_builtin(t.text);
    if (!b)
      throw Error(ErrorCode::SyntaxError, "unknown function '" + t.text + "'", t.pos);
    next();
    std::vector<Expr> args;
    if (!at(Tok::RParen)) {
      do {
        args.push_back(expr());
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen, "')'");
    if (static_cast<int>(args.size()) != b->arity)
      throw Error(ErrorCode::SyntaxError,
                  t.text + "() takes " + std::to_string(b->arity) + " argument(s), got " +
                      std::to_string(args.size()),
                  t.pos);
    return Expr::make_call(t.text, std::move(args), t.pos);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// --- Printer -----------------------------------------------------------------

int precedence(const Expr &e) {
  switch (e.kind) {
  case Expr::Kind::Binary:
    switch (e.binary) {
    case BinaryOp::Or: return 1;
    case BinaryOp::And: return 2;
    case BinaryOp::Add:
    case BinaryOp::Sub: return 5;
    case BinaryOp::Mul:
    case BinaryOp::Div:
    case BinaryOp::Mod: return 6;
    default: return 4;
    }
  case Expr::Kind::Unary:
    return e.unary == UnaryOp::Not ? 3 : 7;
  case Expr::Kind::Literal:
    // Negative literals print with a leading '-', which binds like unary minus.
    if (const double *d = std::get_if<double>(&e.literal); d && std::signbit(*d))
      return 7;
    return 8;
  default:
    return 8;
  }
}

std::string number_text(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string quote(const std::string &s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
    case '"': out += "\\\""; break;
    case '\\': out += "\\\\"; break;
    case '\n': out += "\\n"; break;
    case '\t': out += "\\t"; break;
    default: out += c;
    }
  }
  return out + "\"";
}

std::string literal_text(const Value &v) {
  switch (type_of(v)) {
  case ValueType::Number: return number_text(std::get<double>(v));
  case ValueType::Boolean: return std::get<bool>(v) ? "true" : "false";
  case ValueType::Text: return quote(std::get<std::string>(v));
  }
  return {};
}

std::string wrap(const Expr &e, int min_prec) {
  std::string s = print_expr(e);
  return precedence(e) < min_prec ? "(" + s + ")" : s;
}

class ModelPrinter {
public:
  std::string str() const { return out_.str(); }

  void line(int depth, const std::string &text) {
    out_ << std::string(static_cast<std::size_t>(depth) * 2, ' ') << text << '\n';
  }

  void block_body(int depth, const ActionBlock &b) {
    for (const auto &s : b)
      stmt(depth, s);
  }

  void stmt(int depth, const Stmt &s) {
    switch (s.kind) {
    case Stmt::Kind::Assign:
      line(depth, s.name + " = " + print_expr(s.value));
      break;
    case Stmt::Kind::Emit:
      line(depth, "emit " + s.name);
      break;
    case Stmt::Kind::StartTimer:
      line(depth, "start_timer(" + s.name + ", " + print_expr(s.value) + ")");
      break;
    case Stmt::Kind::If:
      line(depth, "if " + print_expr(s.value) + " {");
      block_body(depth + 1, s.then_block);
      if (s.else_block.empty()) {
        line(depth, "}");
      } else {
        line(depth, "} else {");
        block_body(depth + 1, s.else_block);
        line(depth, "}");
      }
      break;
    }
  }

  void named_block(int depth, const std::string &head, const ActionBlock &b) {
    if (b.empty()) {
      line(depth, head + " { }");
      return;
    }
    line(depth, head + " {");
    block_body(depth + 1, b);
    line(depth, "}");
  }

  void monitor(int depth, const MonitorSpec &m) {
    line(depth, "monitor " + m.source + " as " + quote(m.column));
  }

  void state(const StateDef &s) {
    line(1, "state " + s.name + " {");
    if (!s.entry_actions.empty())
      named_block(2, "entry", s.entry_actions);
    if (!s.exit_actions.empty())
      named_block(2, "exit", s.exit_actions);
    if (s.periodic)
      named_block(2, "every " + std::to_string(s.periodic->interval_s), s.periodic->actions);
    if (!s.submachines.empty()) {
      std::string uses = "uses ";
      for (std::size_t i = 0; i < s.submachines.size(); ++i)
        uses += (i ? ", " : "") + s.submachines[i];
      line(2, uses);
    }
    for (const auto &t : s.transitions)
      transition(t);
    line(1, "}");
  }

  void transition(const TransitionDef &t) {
    std::string head = "on ";
    switch (t.kind) {
    case TriggerKind::Event: head += t.trigger; break;
    case TriggerKind::Timer: head += "timer " + t.trigger; break;
    case TriggerKind::Auto: head += "auto"; break;
    }
    if (t.guard)
      head += " [" + print_expr(*t.guard) + "]";
    if (t.actions.empty()) {
      line(2, head + " -> " + t.target);
      return;
    }
    line(2, head + " / {");
    block_body(3, t.actions);
    line(2, "} -> " + t.target);
  }

  void machine(const MachineDef &m) {
    line(0, "machine " + m.name + " {");
    line(1, "initial " + m.initial);
    for (const auto &s : m.states)
      state(s);
    for (const auto &mon : m.monitors)
      monitor(1, mon);
    line(0, "}");
  }

private:
  std::ostringstream out_;
};

} // namespace

// --- Public API ------------------------------------------------------------

std::int64_t PlanFile::horizon_s() const {
  std::int64_t h = 0;
  for (const auto &i : injections)
    h = std::max(h, i.at_s);
  for (const auto &a : assertions)
    if (a.kind != Assertion::Kind::Always)
      h = std::max(h, a.t2_s);
  return h;
}

ModelFile parse_model(std::string_view text) { return Parser(text).model(); }

PlanFile parse_plan(std::string_view text, std::int64_t tick_s) {
  if (tick_s <= 0)
    throw Error(ErrorCode::ConfigError, "tick must be positive");
  return Parser(text).plan(tick_s);
}

Expr parse_expression(std::string_view text) { return Parser(text).whole_expr(); }

ActionBlock parse_actions(std::string_view text) { return Parser(text).whole_actions(); }

std::string print_expr(const Expr &e) {
  switch (e.kind) {
  case Expr::Kind::Literal:
    return literal_text(e.literal);
  case Expr::Kind::Var:
    return e.name;
  case Expr::Kind::Unary:
    if (e.unary == UnaryOp::Not)
      return "not " + wrap(e.args[0], 3);
    // "-" followed by a number would fold into a literal on reparse.
    if (e.args[0].kind == Expr::Kind::Literal)
      return "-(" + print_expr(e.args[0]) + ")";
    return "-" + wrap(e.args[0], 7);
  case Expr::Kind::Binary: {
    int p = precedence(e);
    bool relational = p == 4;
    return wrap(e.args[0], relational ? p + 1 : p) + " " + std::string(to_string(e.binary)) +
           " " + wrap(e.args[1], p + 1);
  }
  case Expr::Kind::Call: {
    std::string s = e.name + "(";
    for (std::size_t i = 0; i < e.args.size(); ++i)
      s += (i ? ", " : "") + print_expr(e.args[i]);
    return s + ")";
  }
  case Expr::Kind::InState:
    return "in(" + e.name + ", " + e.state + ")";
  }
  return {};
}

std::string print_assertion(const Assertion &a) {
  switch (a.kind) {
  case Assertion::Kind::At:
    return "at " + std::to_string(a.t1_s) + " expect " + print_expr(a.predicate);
  case Assertion::Kind::Always:
    return "expect always " + print_expr(a.predicate);
  case Assertion::Kind::EventuallyWithin:
    return "expect eventually within " + std::to_string(a.t1_s) + ".." +
           std::to_string(a.t2_s) + " " + print_expr(a.predicate);
  }
  return {};
}

std::string print_model(const ModelFile &model) {
  ModelPrinter p;
  for (const auto &v : model.vars)
    p.line(0, "var " + v.name + " = " + literal_text(v.initial));
  for (const auto &m : model.machines)
    p.machine(m);
  for (const auto &mon : model.monitors)
    p.monitor(0, mon);
  return p.str();
}

std::string print_plan(const PlanFile &plan) {
  // Assertions keep their order; injections are merged in before the first
  // timed assertion that is later than them, so `at` times stay sorted.
  std::string out = "plan " + plan.name + " {\n";
  std::size_t next = 0;
  auto flush = [&](std::int64_t before) {
    for (; next < plan.injections.size() && plan.injections[next].at_s < before; ++next)
      out += "  at " + std::to_string(plan.injections[next].at_s) + " emit " +
             plan.injections[next].event + "\n";
  };
  for (const auto &a : plan.assertions) {
    if (a.kind == Assertion::Kind::At)
      flush(a.t1_s);
    out += "  " + print_assertion(a) + "\n";
  }
  flush(std::numeric_limits<std::int64_t>::max());
  return out + "}\n";
}

std::string read_text_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- ModelFile / MachineDef helpers ----------------------------------------

const StateDef *MachineDef::find_state(std::string_view state) const {
  int i = state_index(state);
  return i < 0 ? nullptr : &states[static_cast<std::size_t>(i)];
}

int MachineDef::state_index(std::string_view state) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i].name == state)
      return static_cast<int>(i);
  return -1;
}

void ModelFile::merge(ModelFile other) {
  for (auto &v : other.vars)
    vars.push_back(std::move(v));
  for (auto &m : other.machines)
    machines.push_back(std::move(m));
  for (auto &m : other.monitors)
    monitors.push_back(std::move(m));
}

VariableStore ModelFile::initial_store() const {
  VariableStore store;
  for (const auto &v : vars)
    store.declare(v.name, v.initial, v.pos);
  return store;
}

std::vector<std::string> ModelFile::root_names() const {
  std::set<std::string, std::less<>> nested;
  for (const auto &m : machines)
    for (const auto &s : m.states)
      nested.insert(s.submachines.begin(), s.submachines.end());
  std::vector<std::string> roots;
  for (const auto &m : machines)
    if (!nested.count(m.name))
      roots.push_back(m.name);
  return roots;
}

} // namespace cubesim
