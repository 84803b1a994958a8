#include <cctype>
#include <limits>

#include "lexer.hpp"

namespace amort {

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column),
      detail_(message) {}

namespace detail {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }
bool digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (c == '\n') {
      out.push_back({Token::Kind::Newline, "\n", line, col});
      advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token tok{Token::Kind::Punct, {}, line, col};
    std::size_t j = i;
    if (ident_start(c)) {
      while (j < text.size() && ident_char(text[j])) ++j;
      tok.kind = Token::Kind::Ident;
    } else if (c == '$') {
      ++j;
      if (j >= text.size() || !ident_start(text[j])) throw ParseError(line, col, "expected metavariable name after '$'");
      while (j < text.size() && ident_char(text[j])) ++j;
      tok.kind = Token::Kind::Meta;
    } else if (digit(c)) {
      while (j < text.size() && digit(text[j])) ++j;
      if (j + 1 < text.size() && text[j] == '/' && digit(text[j + 1])) {
        ++j;
        while (j < text.size() && digit(text[j])) ++j;
      }
      tok.kind = Token::Kind::Number;
    } else if (text.substr(i, 2) == "!=" || text.substr(i, 2) == "\\/" || text.substr(i, 2) == "->" ||
               text.substr(i, 2) == "-*" || text.substr(i, 2) == "/\\") {
      j = i + 2;
    } else if (std::string_view("(){}[],;:.=*+-").find(c) != std::string_view::npos) {
      j = i + 1;
    } else {
      throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
    tok.text = std::string(text.substr(i, j - i));
    if (tok.kind == Token::Kind::Meta) tok.text = tok.text.substr(1);
    out.push_back(std::move(tok));
    advance(j - i);
  }
  out.push_back({Token::Kind::End, {}, line, col});
  return out;
}

std::string describe(const Token& t) {
  switch (t.kind) {
    case Token::Kind::End:
      return "end of input";
    case Token::Kind::Newline:
      return "end of line";
    case Token::Kind::Meta:
      return "'$" + t.text + "'";
    default:
      return "'" + t.text + "'";
  }
}

const Token& TokenStream::peek(std::size_t ahead) const {
  std::size_t k = std::min(pos_ + ahead, tokens_.size() - 1);
  return tokens_[k];
}

const Token& TokenStream::next() {
  const Token& t = tokens_[pos_];
  if (pos_ + 1 < tokens_.size()) ++pos_;
  return t;
}

bool TokenStream::accept(std::string_view p) {
  if (peek().is(p)) {
    next();
    return true;
  }
  return false;
}

const Token& TokenStream::expect(std::string_view p) {
  if (!peek().is(p)) fail(peek(), "expected '" + std::string(p) + "', found " + describe(peek()));
  return next();
}

const Token& TokenStream::expect(Token::Kind kind, std::string_view what) {
  if (peek().kind != kind) fail(peek(), "expected " + std::string(what) + ", found " + describe(peek()));
  return next();
}

void TokenStream::skip_newlines() {
  while (peek().kind == Token::Kind::Newline) next();
}

void TokenStream::fail(const Token& at, const std::string& message) const {
  throw ParseError(at.line, at.column, message);
}

namespace {

bool continuation(const Token& t) { return t.is("\\/") || t.is(";") || t.is(","); }

class AssertionParser {
public:
  AssertionParser(TokenStream& ts, const AssertionScope& scope) : ts_(ts), scope_(scope) {}

  Assertion parse() {
    Assertion a;
    a.clauses.push_back(clause());
    while (true) {
      join_lines();
      if (!ts_.accept("\\/")) break;
      join_lines();
      a.clauses.push_back(clause());
    }
    return a;
  }

private:
  // Skips newlines that do not end the assertion.
  void join_lines() {
    if (ts_.peek().kind != Token::Kind::Newline) return;
    std::size_t save = ts_.position();
    bool prev_cont = save > 0 && last_was_continuation_;
    ts_.skip_newlines();
    if (prev_cont || continuation(ts_.peek())) return;
    ts_.rewind(save);
  }

  const Token& take() {
    const Token& t = ts_.next();
    last_was_continuation_ = continuation(t);
    return t;
  }

  bool at_part_end() {
    join_lines();
    const Token& t = ts_.peek();
    return t.kind == Token::Kind::End || t.kind == Token::Kind::Newline || t.is(";") || t.is("\\/") ||
           t.is("}");
  }

  enum class PartKind { Empty, Pure, Heap, Resource };

  PartKind classify() {
    if (at_part_end()) return PartKind::Empty;
    const Token& t = ts_.peek();
    if (t.is("emp")) return PartKind::Heap;
    if ((t.is("pt") || t.is("lseg") || t.is("tree")) && ts_.peek(1).is("(")) return PartKind::Heap;
    if (t.kind == Token::Kind::Meta) return PartKind::Resource;
    std::size_t k = t.is("-") ? 2 : 1;
    if (ts_.peek(k).is("=") || ts_.peek(k).is("!=")) return PartKind::Pure;
    if (t.kind == Token::Kind::Number) return PartKind::Resource;
    ts_.fail(t, "expected pure atom, heap atom or resource expression, found " + describe(t));
  }

  Clause clause() {
    Clause c;
    bound_.clear();
    if (ts_.peek().is("exists")) {
      take();
      while (!ts_.peek().is(".")) {
        const Token& v = ts_.peek();
        if (v.kind == Token::Kind::Meta) ts_.fail(v, "resource variable under quantifier: $" + v.text);
        if (v.kind != Token::Kind::Ident || reserved(v.text)) {
          ts_.fail(v, "expected variable name, found " + describe(v));
        }
        c.existentials.push_back(take().text);
        bound_.insert(c.existentials.back());
      }
      if (c.existentials.empty()) ts_.fail(ts_.peek(), "expected variable after 'exists'");
      take();
    }
    std::vector<std::pair<PartKind, Token>> parts;
    bool seen[4] = {false, false, false, false};
    bool positional = false;
    {
      // three parts are positional: pure ; heap ; resource
      std::size_t save = ts_.position();
      int semis = 0;
      int depth = 0;
      for (std::size_t k = 0;; ++k) {
        const Token& t = ts_.peek(k);
        if (t.kind == Token::Kind::End || t.is("}")) break;
        if (t.is("(")) ++depth;
        if (t.is(")")) --depth;
        if (depth == 0 && t.is("\\/")) break;
        if (t.kind == Token::Kind::Newline) {
          bool cont = k > 0 && continuation(ts_.peek(k - 1));
          std::size_t m = k;
          while (ts_.peek(m).kind == Token::Kind::Newline) ++m;
          if (!cont && !continuation(ts_.peek(m))) break;
          k = m - 1;
          continue;
        }
        if (depth == 0 && t.is(";")) ++semis;
      }
      ts_.rewind(save);
      positional = semis == 2;
    }
    static const PartKind order[3] = {PartKind::Pure, PartKind::Heap, PartKind::Resource};
    for (int idx = 0;; ++idx) {
      Token start = ts_.peek();
      PartKind kind = classify();
      if (positional && kind != PartKind::Empty && kind != order[idx]) {
        static const char* names[3] = {"pure atoms", "heap atoms", "a resource expression"};
        ts_.fail(start, std::string("expected ") + names[idx] + " in part " + std::to_string(idx + 1) +
                            " of the clause");
      }
      if (kind != PartKind::Empty) {
        if (seen[static_cast<int>(kind)]) ts_.fail(start, "clause has two parts of the same kind");
        seen[static_cast<int>(kind)] = true;
      }
      switch (kind) {
        case PartKind::Empty:
          if (!positional) ts_.fail(start, "empty clause part");
          break;
        case PartKind::Pure:
          pure_list(c);
          break;
        case PartKind::Heap:
          heap_list(c);
          break;
        case PartKind::Resource:
          c.resource = resexpr();
          break;
      }
      if (!at_part_end()) ts_.fail(ts_.peek(), "unexpected " + describe(ts_.peek()));
      if (!ts_.peek().is(";")) break;
      if (idx == 2) ts_.fail(ts_.peek(), "a clause has at most three parts");
      take();
    }
    return c;
  }

  bool reserved(const std::string& s) const {
    return s == "null" || s == "ret" || s == "exists" || s == "emp" || s == "pt" || s == "lseg" || s == "tree";
  }

  void pure_list(Clause& c) {
    do {
      Term lhs = term();
      bool eq;
      if (ts_.peek().is("=")) {
        eq = true;
      } else if (ts_.peek().is("!=")) {
        eq = false;
      } else {
        ts_.fail(ts_.peek(), "expected '=' or '!=', found " + describe(ts_.peek()));
      }
      take();
      Term rhs = term();
      c.pure.push_back({lhs, eq, rhs});
    } while (accept_comma());
  }

  bool accept_comma() {
    join_lines();
    if (!ts_.peek().is(",")) return false;
    take();
    join_lines();
    return true;
  }

  void heap_list(Clause& c) {
    do {
      const Token& t = ts_.peek();
      if (t.is("emp")) {
        take();
      } else if (t.is("pt")) {
        take();
        ts_.expect("(");
        Term a = term();
        ts_.expect(",");
        std::string f = ts_.expect(Token::Kind::Ident, "field name").text;
        ts_.expect(",");
        Term v = term();
        ts_.expect(")");
        c.heap.push_back(HeapAtom::points_to(a, f, v));
      } else if (t.is("lseg")) {
        take();
        ts_.expect("(");
        ResourceExpr theta = resexpr();
        ts_.expect(",");
        Term a = term();
        ts_.expect(",");
        Term b = term();
        ts_.expect(")");
        c.heap.push_back(HeapAtom::lseg(theta, a, b));
      } else if (t.is("tree")) {
        take();
        ts_.expect("(");
        ResourceExpr theta = resexpr();
        ts_.expect(",");
        Term a = term();
        ts_.expect(")");
        c.heap.push_back(HeapAtom::tree(theta, a));
      } else {
        ts_.fail(t, "expected heap atom, found " + describe(t));
      }
    } while (accept_comma());
  }

  Term term() {
    const Token& t = ts_.peek();
    if (t.is("-") || t.kind == Token::Kind::Number) {
      bool neg = t.is("-");
      if (neg) take();
      const Token& n = ts_.expect(Token::Kind::Number, "integer");
      if (n.text.find('/') != std::string::npos) ts_.fail(n, "terms may not be fractions");
      try {
        long long v = std::stoll(n.text);
        return Term::integer(neg ? -v : v);
      } catch (const std::out_of_range&) {
        ts_.fail(n, "integer literal out of range");
      }
    }
    if (t.kind == Token::Kind::Meta) ts_.fail(t, "metavariable $" + t.text + " used as a term");
    if (t.kind != Token::Kind::Ident) ts_.fail(t, "expected term, found " + describe(t));
    take();
    if (t.text == "null") return Term::null();
    if (t.text == "ret") {
      if (!scope_.allow_ret) ts_.fail(t, "'ret' is only allowed in postconditions");
      return Term::ret();
    }
    if (reserved(t.text)) ts_.fail(t, "unexpected keyword " + describe(t));
    if (!bound_.count(t.text) && scope_.program_vars.count(t.text)) return Term::prog_var(t.text);
    return Term::var(t.text);
  }

  ResourceExpr resexpr() {
    ResourceExpr e;
    do {
      const Token& t = ts_.peek();
      if (t.kind == Token::Kind::Meta) {
        std::string name = take().text;
        Rational k = 1;
        if (ts_.peek().is("*")) {
          take();
          k = parse_rational(ts_.expect(Token::Kind::Number, "coefficient").text);
        }
        e += LinearExpr::var(name, k);
      } else if (t.kind == Token::Kind::Number) {
        Rational k = parse_rational(take().text);
        if (ts_.peek().is("*")) {
          take();
          e += LinearExpr::var(ts_.expect(Token::Kind::Meta, "metavariable").text, k);
        } else {
          e += LinearExpr(k);
        }
      } else {
        ts_.fail(t, "expected resource expression, found " + describe(t));
      }
    } while (ts_.peek().is("+") && (take(), true));
    return e;
  }

  TokenStream& ts_;
  const AssertionScope& scope_;
  std::set<std::string> bound_;
  bool last_was_continuation_ = false;
};

}  // namespace

Assertion parse_assertion_tokens(TokenStream& ts, const AssertionScope& scope) {
  return AssertionParser(ts, scope).parse();
}

}  // namespace detail

Assertion parse_assertion(std::string_view text, const AssertionScope& scope) {
  detail::TokenStream ts(detail::tokenize(text));
  ts.skip_newlines();
  Assertion a = detail::parse_assertion_tokens(ts, scope);
  ts.skip_newlines();
  if (ts.peek().kind != detail::Token::Kind::End) {
    ts.fail(ts.peek(), "unexpected " + detail::describe(ts.peek()) + " after assertion");
  }
  return a;
}

}  // namespace amort
