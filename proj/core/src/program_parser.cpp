#include <limits>

#include "amort/bytecode.hpp"
#include "lexer.hpp"

namespace amort {

namespace {

using detail::Token;
using detail::TokenStream;

class ProgramParser {
public:
  explicit ProgramParser(std::string_view text) : ts_(detail::tokenize(text)) {}

  Program parse() {
    Program p;
    std::optional<Token> entry_tok;
    while (true) {
      ts_.skip_newlines();
      const Token& t = ts_.peek();
      if (t.kind == Token::Kind::End) break;
      if (t.is("proc")) {
        Token at = t;
        Procedure proc = procedure();
        if (p.procedures.count(proc.name)) ts_.fail(at, "duplicate procedure '" + proc.name + "'");
        p.order.push_back(proc.name);
        p.procedures.emplace(proc.name, std::move(proc));
      } else if (t.is("entry")) {
        ts_.next();
        entry_tok = ts_.peek();
        p.entry = ts_.expect(Token::Kind::Ident, "procedure name").text;
      } else {
        ts_.fail(t, "expected 'proc' or 'entry', found " + detail::describe(t));
      }
    }
    if (p.entry.empty() && !p.order.empty()) p.entry = p.order.front();
    return p;
  }

private:
  std::size_t number(std::string_view what) {
    const Token& t = ts_.expect(Token::Kind::Number, what);
    if (t.text.find('/') != std::string::npos) ts_.fail(t, std::string("expected ") + std::string(what));
    try {
      return static_cast<std::size_t>(std::stoull(t.text));
    } catch (const std::out_of_range&) {
      ts_.fail(t, "number out of range");
    }
  }

  ValueType type() {
    const Token& t = ts_.expect(Token::Kind::Ident, "type");
    if (t.text == "int") return ValueType::Int;
    if (t.text == "ref") return ValueType::Ref;
    ts_.fail(t, "unknown type '" + t.text + "' (expected int or ref)");
  }

  Procedure procedure() {
    Procedure proc;
    ts_.expect("proc");
    proc.name = ts_.expect(Token::Kind::Ident, "procedure name").text;
    ts_.expect("(");
    if (!ts_.peek().is(")")) {
      do {
        Param prm;
        const Token& nt = ts_.expect(Token::Kind::Ident, "parameter name");
        prm.name = nt.text;
        ts_.expect(":");
        prm.type = type();
        for (const auto& q : proc.params) {
          if (q.name == prm.name) ts_.fail(nt, "duplicate parameter '" + prm.name + "'");
        }
        proc.params.push_back(prm);
      } while (ts_.accept(","));
    }
    ts_.expect(")");
    proc.local_count = proc.params.size();
    if (ts_.peek().is("locals")) {
      ts_.next();
      const Token& at = ts_.peek();
      proc.local_count = number("local count");
      if (proc.local_count < proc.params.size()) ts_.fail(at, "local count smaller than parameter count");
      if (ts_.accept("[")) {
        if (!ts_.peek().is("]")) {
          do {
            const Token& nt = ts_.expect(Token::Kind::Ident, "local name");
            proc.local_names.push_back(nt.text == "_" ? "" : nt.text);
          } while (ts_.accept(","));
        }
        ts_.expect("]");
        if (proc.params.size() + proc.local_names.size() > proc.local_count) {
          ts_.fail(at, "more local names than local slots");
        }
      }
    }
    {
      std::set<std::string> names;
      for (std::size_t i = 0; i < proc.local_count; ++i) {
        if (!names.insert(proc.slot_name(i)).second) ts_.fail(ts_.peek(), "duplicate local name '" + proc.slot_name(i) + "'");
      }
    }
    ts_.skip_newlines();
    ts_.expect("{");

    AssertionScope spec_scope;
    for (const auto& q : proc.params) spec_scope.program_vars.insert(q.name);
    AssertionScope post_scope = spec_scope;
    post_scope.allow_ret = true;
    AssertionScope inv_scope;
    inv_scope.program_vars = proc.slot_names();

    bool have_pre = false, have_post = false;
    while (true) {
      ts_.skip_newlines();
      const Token& t = ts_.peek();
      if (t.is("}")) {
        ts_.next();
        break;
      }
      if (t.is("requires") || t.is("ensures")) {
        bool pre = t.is("requires");
        if (pre ? have_pre : have_post) ts_.fail(t, "duplicate '" + t.text + "' clause");
        ts_.next();
        ts_.expect(":");
        Assertion a = detail::parse_assertion_tokens(ts_, pre ? spec_scope : post_scope);
        (pre ? proc.precondition : proc.postcondition) = std::move(a);
        (pre ? have_pre : have_post) = true;
        end_of_item();
      } else if (t.is("invariant")) {
        ts_.next();
        const Token& at = ts_.peek();
        std::size_t off = number("instruction offset");
        ts_.expect(":");
        if (proc.invariants.count(off)) ts_.fail(at, "duplicate invariant at offset " + std::to_string(off));
        proc.invariants.emplace(off, detail::parse_assertion_tokens(ts_, inv_scope));
        end_of_item();
      } else if (t.kind == Token::Kind::Number) {
        Token at = t;
        std::size_t off = number("instruction offset");
        if (off != proc.code.size()) {
          ts_.fail(at, "expected offset " + std::to_string(proc.code.size()) + ", found " + std::to_string(off));
        }
        ts_.expect(":");
        proc.lines.push_back(at.line);
        proc.code.push_back(instruction(proc));
      } else {
        ts_.fail(t, "expected instruction, annotation or '}', found " + detail::describe(t));
      }
    }
    return proc;
  }

  void end_of_item() {
    const Token& t = ts_.peek();
    if (t.kind == Token::Kind::Newline || t.kind == Token::Kind::End || t.is("}")) return;
    ts_.fail(t, "unexpected " + detail::describe(t) + " after assertion");
  }

  Cmp cmp() {
    const Token& t = ts_.expect(Token::Kind::Ident, "comparison");
    static const std::pair<const char*, Cmp> table[] = {{"eq", Cmp::Eq}, {"ne", Cmp::Ne}, {"lt", Cmp::Lt},
                                                        {"le", Cmp::Le}, {"gt", Cmp::Gt}, {"ge", Cmp::Ge}};
    for (auto [n, c] : table) {
      if (t.text == n) return c;
    }
    ts_.fail(t, "unknown comparison '" + t.text + "'");
  }

  FieldDescriptor descriptor() {
    FieldDescriptor d;
    ts_.expect("{");
    if (!ts_.peek().is("}")) {
      do {
        std::string f = ts_.expect(Token::Kind::Ident, "field name").text;
        ts_.expect(":");
        d.entries.emplace_back(f, type());
      } while (ts_.accept(","));
    }
    ts_.expect("}");
    return d;
  }

  std::size_t slot(const Procedure& proc) {
    const Token& t = ts_.peek();
    if (t.kind == Token::Kind::Ident) {
      ts_.next();
      auto s = proc.slot_of(t.text);
      if (!s) ts_.fail(t, "unknown local '" + t.text + "'");
      return *s;
    }
    return number("local index");
  }

  Instruction instruction(const Procedure& proc) {
    const Token& t = ts_.expect(Token::Kind::Ident, "instruction");
    const std::string m = t.text;
    if (m == "iconst") {
      bool neg = ts_.accept("-");
      const Token& n = ts_.expect(Token::Kind::Number, "integer");
      if (n.text.find('/') != std::string::npos) ts_.fail(n, "iconst takes an integer");
      try {
        long long v = std::stoll(n.text);
        return ins::IConst{neg ? -v : v};
      } catch (const std::out_of_range&) {
        ts_.fail(n, "integer out of range");
      }
    }
    if (m == "ibinop") {
      const Token& o = ts_.expect(Token::Kind::Ident, "arithmetic operator");
      static const std::pair<const char*, BinOp> table[] = {
          {"add", BinOp::Add}, {"sub", BinOp::Sub}, {"mul", BinOp::Mul}, {"div", BinOp::Div}, {"rem", BinOp::Rem}};
      for (auto [n, op] : table) {
        if (o.text == n) return ins::IBinop{op};
      }
      ts_.fail(o, "unknown arithmetic operator '" + o.text + "'");
    }
    if (m == "pop") return ins::Pop{};
    if (m == "load") return ins::Load{slot(proc)};
    if (m == "store") return ins::Store{slot(proc)};
    if (m == "aconst_null") return ins::AConstNull{};
    if (m == "binarycmp") {
      Cmp c = cmp();
      return ins::BinaryCmp{c, number("branch target")};
    }
    if (m == "unarycmp") {
      Cmp c = cmp();
      return ins::UnaryCmp{c, number("branch target")};
    }
    if (m == "ifnull") return ins::IfNull{number("branch target")};
    if (m == "goto") return ins::Goto{number("branch target")};
    if (m == "new") return ins::New{descriptor()};
    if (m == "free") return ins::Free{descriptor()};
    if (m == "getfield") return ins::GetField{ts_.expect(Token::Kind::Ident, "field name").text};
    if (m == "putfield") return ins::PutField{ts_.expect(Token::Kind::Ident, "field name").text};
    if (m == "consume") {
      const Token& k = ts_.expect(Token::Kind::Number, "resource amount");
      return ins::Consume{parse_rational(k.text)};
    }
    if (m == "consume_dyn") return ins::ConsumeDyn{};
    if (m == "acquire") return ins::Acquire{};
    if (m == "return") return ins::Return{};
    if (m == "call") return ins::Call{ts_.expect(Token::Kind::Ident, "procedure name").text};
    ts_.fail(t, "unknown instruction '" + m + "'");
  }

  TokenStream ts_;
};

}  // namespace

Program parse_program(std::string_view text) { return ProgramParser(text).parse(); }

}  // namespace amort
