#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sesh/pgv/ast.hpp"

namespace sesh::pgv {

namespace parse_detail {

enum class Tok {
  Ident,
  Nat,
  KwLet,
  KwIn,
  KwCase,
  KwOf,
  KwInl,
  KwInr,
  KwAbsurd,
  KwNew,
  KwFork,
  KwSend,
  KwRecv,
  KwClose,
  KwCancel,
  KwUnit,
  KwVoid,
  KwInt,
  KwEnd,
  KwBot,
  KwTop,
  Lambda,
  Dot,
  Colon,
  LParen,
  RParen,
  LBrack,
  RBrack,
  LBrace,
  RBrace,
  Semi,
  Comma,
  Plus,
  Star,
  Bang,
  Query,
  Equals,
  Arrow,
  DashLBrack,
  Eof
};

struct Token {
  Tok kind;
  std::string text;
  std::uint64_t nat = 0;
  SourceLoc loc;
};

inline std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto loc = [&] { return SourceLoc{line, col}; };
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i + k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += n;
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    const SourceLoc at = loc();
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::uint64_t n = 0;
      std::size_t len = 0;
      while (i + len < src.size() && std::isdigit(static_cast<unsigned char>(src[i + len]))) {
        const std::uint64_t digit = static_cast<std::uint64_t>(src[i + len] - '0');
        if (n > (UINT64_MAX - digit) / 10) throw ParseError(at, "number literal too large");
        n = n * 10 + digit;
        ++len;
      }
      out.push_back({Tok::Nat, src.substr(i, len), n, at});
      advance(len);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t len = 0;
      while (i + len < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[i + len])) || src[i + len] == '_')) {
        ++len;
      }
      const std::string word = src.substr(i, len);
      Tok kind = Tok::Ident;
      if (word == "let") kind = Tok::KwLet;
      else if (word == "in") kind = Tok::KwIn;
      else if (word == "case") kind = Tok::KwCase;
      else if (word == "of") kind = Tok::KwOf;
      else if (word == "inl") kind = Tok::KwInl;
      else if (word == "inr") kind = Tok::KwInr;
      else if (word == "absurd") kind = Tok::KwAbsurd;
      else if (word == "new") kind = Tok::KwNew;
      else if (word == "fork") kind = Tok::KwFork;
      else if (word == "send") kind = Tok::KwSend;
      else if (word == "recv") kind = Tok::KwRecv;
      else if (word == "close") kind = Tok::KwClose;
      else if (word == "cancel") kind = Tok::KwCancel;
      else if (word == "Unit") kind = Tok::KwUnit;
      else if (word == "Void") kind = Tok::KwVoid;
      else if (word == "Int") kind = Tok::KwInt;
      else if (word == "end") kind = Tok::KwEnd;
      else if (word == "bot") kind = Tok::KwBot;
      else if (word == "top") kind = Tok::KwTop;
      out.push_back({kind, word, 0, at});
      advance(len);
      continue;
    }
    switch (c) {
      case '\\':
        out.push_back({Tok::Lambda, "\\", 0, at});
        advance(1);
        continue;
      case '.':
        out.push_back({Tok::Dot, ".", 0, at});
        advance(1);
        continue;
      case ':':
        out.push_back({Tok::Colon, ":", 0, at});
        advance(1);
        continue;
      case '(':
        out.push_back({Tok::LParen, "(", 0, at});
        advance(1);
        continue;
      case ')':
        out.push_back({Tok::RParen, ")", 0, at});
        advance(1);
        continue;
      case '[':
        out.push_back({Tok::LBrack, "[", 0, at});
        advance(1);
        continue;
      case ']':
        out.push_back({Tok::RBrack, "]", 0, at});
        advance(1);
        continue;
      case '{':
        out.push_back({Tok::LBrace, "{", 0, at});
        advance(1);
        continue;
      case '}':
        out.push_back({Tok::RBrace, "}", 0, at});
        advance(1);
        continue;
      case ';':
        out.push_back({Tok::Semi, ";", 0, at});
        advance(1);
        continue;
      case ',':
        out.push_back({Tok::Comma, ",", 0, at});
        advance(1);
        continue;
      case '+':
        out.push_back({Tok::Plus, "+", 0, at});
        advance(1);
        continue;
      case '*':
        out.push_back({Tok::Star, "*", 0, at});
        advance(1);
        continue;
      case '!':
        out.push_back({Tok::Bang, "!", 0, at});
        advance(1);
        continue;
      case '?':
        out.push_back({Tok::Query, "?", 0, at});
        advance(1);
        continue;
      case '=':
        out.push_back({Tok::Equals, "=", 0, at});
        advance(1);
        continue;
      case '-':
        if (i + 1 < src.size() && src[i + 1] == '>') {
          out.push_back({Tok::Arrow, "->", 0, at});
          advance(2);
          continue;
        }
        if (i + 1 < src.size() && src[i + 1] == '[') {
          out.push_back({Tok::DashLBrack, "-[", 0, at});
          advance(2);
          continue;
        }
        throw ParseError(at, "stray '-'");
      default:
        throw ParseError(at, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::Eof, "", 0, loc()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Term parse_program() {
    Term t = parse_term();
    expect(Tok::Eof, "end of input");
    return t;
  }

 private:
  const Token& peek(int ahead = 0) const {
    const std::size_t at = pos_ + static_cast<std::size_t>(ahead);
    return at < toks_.size() ? toks_[at] : toks_.back();
  }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept(Tok k) {
    if (peek().kind == k) {
      ++pos_;
      return true;
    }
    return false;
  }
  const Token& expect(Tok k, const char* what) {
    if (peek().kind != k) {
      throw ParseError(peek().loc, std::string("expected ") + what + ", found '" + peek().text + "'");
    }
    return toks_[pos_++];
  }

  // Binders are renamed apart so that later passes can key on names alone.
  std::string bind(const std::string& surface) {
    std::string unique = surface + "#" + std::to_string(++fresh_);
    scope_.emplace_back(surface, unique);
    return unique;
  }
  void unbind(std::size_t n) { scope_.resize(scope_.size() - n); }
  std::string resolve(const std::string& surface, SourceLoc loc) {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
      if (it->first == surface) return it->second;
    }
    throw ParseError(loc, "unbound variable '" + surface + "'");
  }

  Term parse_term() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Lambda: {
        const SourceLoc loc = next().loc;
        const std::string surface = expect(Tok::Ident, "a binder").text;
        expect(Tok::Colon, "':'");
        Type annot = parse_type();
        expect(Tok::Dot, "'.'");
        const std::string unique = bind(surface);
        Term body = parse_term();
        unbind(1);
        return Term::lam(unique, surface, std::move(annot), std::move(body), loc);
      }
      case Tok::KwLet: {
        const SourceLoc loc = next().loc;
        expect(Tok::LParen, "'('");
        if (accept(Tok::RParen)) {
          expect(Tok::Equals, "'='");
          Term m = parse_term();
          expect(Tok::KwIn, "'in'");
          Term n = parse_term();
          return Term::let_unit(std::move(m), std::move(n), loc);
        }
        const std::string xs = expect(Tok::Ident, "a binder").text;
        expect(Tok::Comma, "','");
        const std::string ys = expect(Tok::Ident, "a binder").text;
        expect(Tok::RParen, "')'");
        expect(Tok::Equals, "'='");
        Term m = parse_term();
        expect(Tok::KwIn, "'in'");
        const std::string x = bind(xs);
        const std::string y = bind(ys);
        Term n = parse_term();
        unbind(2);
        return Term::let_pair(x, xs, y, ys, std::move(m), std::move(n), loc);
      }
      case Tok::KwCase: {
        const SourceLoc loc = next().loc;
        Term scrut = parse_term();
        expect(Tok::KwOf, "'of'");
        expect(Tok::LBrace, "'{'");
        expect(Tok::KwInl, "'inl'");
        const std::string xs = expect(Tok::Ident, "a binder").text;
        expect(Tok::Arrow, "'->'");
        const std::string x = bind(xs);
        Term m = parse_term();
        unbind(1);
        expect(Tok::Semi, "';'");
        expect(Tok::KwInr, "'inr'");
        const std::string ys = expect(Tok::Ident, "a binder").text;
        expect(Tok::Arrow, "'->'");
        const std::string y = bind(ys);
        Term n = parse_term();
        unbind(1);
        expect(Tok::RBrace, "'}'");
        return Term::case_sum(std::move(scrut), x, xs, std::move(m), y, ys, std::move(n), loc);
      }
      default:
        return parse_add();
    }
  }

  Term parse_add() {
    Term t = parse_mul();
    while (peek().kind == Tok::Plus) {
      const SourceLoc loc = next().loc;
      Term rhs = parse_mul();
      t = Term::prim_add(std::move(t), std::move(rhs), loc);
    }
    return t;
  }

  Term parse_mul() {
    Term t = parse_app();
    while (peek().kind == Tok::Star) {
      const SourceLoc loc = next().loc;
      Term rhs = parse_app();
      t = Term::prim_mul(std::move(t), std::move(rhs), loc);
    }
    return t;
  }

  bool starts_atom(Tok k) const {
    switch (k) {
      case Tok::LParen:
      case Tok::Nat:
      case Tok::Ident:
      case Tok::KwNew:
      case Tok::KwFork:
      case Tok::KwSend:
      case Tok::KwRecv:
      case Tok::KwClose:
      case Tok::KwCancel:
        return true;
      default:
        return false;
    }
  }

  Term parse_app() {
    switch (peek().kind) {
      case Tok::KwInl: {
        const SourceLoc loc = next().loc;
        return Term::inl(parse_app(), loc);
      }
      case Tok::KwInr: {
        const SourceLoc loc = next().loc;
        return Term::inr(parse_app(), loc);
      }
      case Tok::KwAbsurd: {
        const SourceLoc loc = next().loc;
        return Term::absurd(parse_app(), loc);
      }
      default:
        break;
    }
    Term t = parse_atom();
    while (starts_atom(peek().kind)) {
      const SourceLoc loc = peek().loc;
      Term arg = parse_atom();
      t = Term::app(std::move(t), std::move(arg), loc);
    }
    return t;
  }

  Term parse_atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::LParen: {
        const SourceLoc loc = next().loc;
        if (accept(Tok::RParen)) return Term::unit(loc);
        Term m = parse_term();
        if (accept(Tok::Comma)) {
          Term n = parse_term();
          expect(Tok::RParen, "')'");
          return Term::pair(std::move(m), std::move(n), loc);
        }
        expect(Tok::RParen, "')'");
        return m;
      }
      case Tok::Nat: {
        const Token& tok = next();
        if (tok.nat > static_cast<std::uint64_t>(INT64_MAX)) {
          throw ParseError(tok.loc, "integer literal too large");
        }
        return Term::int_lit(static_cast<std::int64_t>(tok.nat), tok.loc);
      }
      case Tok::Ident: {
        const Token& tok = next();
        return Term::var(resolve(tok.text, tok.loc), tok.text, tok.loc);
      }
      case Tok::KwNew: {
        const SourceLoc loc = next().loc;
        expect(Tok::LBrack, "'['");
        Type annot = parse_stype();
        expect(Tok::RBrack, "']'");
        return Term::constant(ConstKind::New, std::move(annot), loc);
      }
      case Tok::KwFork:
        return Term::constant(ConstKind::Fork, std::nullopt, next().loc);
      case Tok::KwSend:
        return Term::constant(ConstKind::Send, std::nullopt, next().loc);
      case Tok::KwRecv:
        return Term::constant(ConstKind::Recv, std::nullopt, next().loc);
      case Tok::KwClose:
        return Term::constant(ConstKind::Close, std::nullopt, next().loc);
      case Tok::KwCancel:
        return Term::constant(ConstKind::Cancel, std::nullopt, next().loc);
      default:
        throw ParseError(t.loc, "expected a term, found '" + t.text + "'");
    }
  }

  Type parse_type() {
    Type t = parse_type_sum();
    if (peek().kind == Tok::DashLBrack) {
      next();
      const Priority p = parse_prio();
      expect(Tok::Comma, "','");
      const Priority q = parse_prio();
      expect(Tok::RBrack, "']'");
      expect(Tok::Arrow, "'->'");
      Type cod = parse_type();
      return Type::arrow(Bounds{p, q}, std::move(t), std::move(cod));
    }
    return t;
  }

  Type parse_type_sum() {
    Type t = parse_type_prod();
    while (peek().kind == Tok::Plus) {
      next();
      Type rhs = parse_type_prod();
      t = Type::sum(std::move(t), std::move(rhs));
    }
    return t;
  }

  Type parse_type_prod() {
    Type t = parse_type_atom();
    while (peek().kind == Tok::Star) {
      next();
      Type rhs = parse_type_atom();
      t = Type::prod(std::move(t), std::move(rhs));
    }
    return t;
  }

  Type parse_type_atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::KwUnit:
        next();
        return Type::unit();
      case Tok::KwVoid:
        next();
        return Type::void_();
      case Tok::KwInt:
        next();
        return Type::int_();
      case Tok::LParen: {
        next();
        Type inner = parse_type();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Bang:
      case Tok::Query:
      case Tok::KwEnd:
        return parse_stype();
      default:
        throw ParseError(t.loc, "expected a type, found '" + t.text + "'");
    }
  }

  Type parse_stype() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Bang: {
        next();
        const std::uint64_t o = expect(Tok::Nat, "a priority").nat;
        Type payload = parse_type();
        expect(Tok::Dot, "'.'");
        Type cont = parse_stype();
        return Type::ssend(o, std::move(payload), std::move(cont));
      }
      case Tok::Query: {
        next();
        const std::uint64_t o = expect(Tok::Nat, "a priority").nat;
        Type payload = parse_type();
        expect(Tok::Dot, "'.'");
        Type cont = parse_stype();
        return Type::srecv(o, std::move(payload), std::move(cont));
      }
      case Tok::KwEnd: {
        next();
        const std::uint64_t o = expect(Tok::Nat, "a priority").nat;
        return Type::send_end(o);
      }
      default:
        throw ParseError(t.loc, "expected a session type, found '" + t.text + "'");
    }
  }

  Priority parse_prio() {
    const Token& t = next();
    switch (t.kind) {
      case Tok::KwBot:
        return Priority::bot();
      case Tok::KwTop:
        return Priority::top();
      case Tok::Nat:
        return Priority::at(t.nat);
      default:
        throw ParseError(t.loc, "expected a priority ('bot', 'top', or a number)");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<std::pair<std::string, std::string>> scope_;
  int fresh_ = 0;
};

}  // namespace parse_detail

inline Term parse(const std::string& source) {
  parse_detail::Parser p(parse_detail::lex(source));
  return p.parse_program();
}

// Convenience for tests: parses a standalone type by probing it as a
// binder annotation.
inline Type parse_type_text(const std::string& source) {
  Term probe = parse("\\__probe_x:" + source + ". __probe_x");
  return probe.annot();
}

}  // namespace sesh::pgv
