#include "abducer/syntax.hpp"

#include <cctype>
#include <regex>
#include <sstream>

namespace abducer {

namespace {

enum class Tok : uint8_t {
  Ident, Nat, KwInt, KwIf, KwElse, KwWhile, KwReturn, KwNull, KwAssume, KwAssert,
  LParen, RParen, LBrace, RBrace, Semi, Comma, Assign, Arrow, Star, Dot,
  Plus, Minus, Question, AndAnd,
  EqEq, NotEq, Le, Ge, Lt, Gt,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int64_t value = 0;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) {}

  Token next() {
    skip_ws();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= s_.size()) return t;
    char c = s_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
              s_[pos_] == '$'))
        advance();
      t.text = s_.substr(start, pos_ - start);
      if (t.text == "int") t.kind = Tok::KwInt;
      else if (t.text == "if") t.kind = Tok::KwIf;
      else if (t.text == "else") t.kind = Tok::KwElse;
      else if (t.text == "while") t.kind = Tok::KwWhile;
      else if (t.text == "return") t.kind = Tok::KwReturn;
      else if (t.text == "NULL") t.kind = Tok::KwNull;
      else if (t.text == "assume") t.kind = Tok::KwAssume;
      else if (t.text == "assert") t.kind = Tok::KwAssert;
      else t.kind = Tok::Ident;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
        advance();
      t.kind = Tok::Nat;
      t.text = s_.substr(start, pos_ - start);
      t.value = std::stoll(t.text);
      return t;
    }
    auto two = [&](char a, char b) {
      return c == a && pos_ + 1 < s_.size() && s_[pos_ + 1] == b;
    };
    if (two('-', '>')) { advance(); advance(); t.kind = Tok::Arrow; return t; }
    if (two('=', '=')) { advance(); advance(); t.kind = Tok::EqEq; return t; }
    if (two('!', '=')) { advance(); advance(); t.kind = Tok::NotEq; return t; }
    if (two('<', '=')) { advance(); advance(); t.kind = Tok::Le; return t; }
    if (two('>', '=')) { advance(); advance(); t.kind = Tok::Ge; return t; }
    if (two('&', '&')) { advance(); advance(); t.kind = Tok::AndAnd; return t; }
    advance();
    switch (c) {
      case '(': t.kind = Tok::LParen; return t;
      case ')': t.kind = Tok::RParen; return t;
      case '{': t.kind = Tok::LBrace; return t;
      case '}': t.kind = Tok::RBrace; return t;
      case ';': t.kind = Tok::Semi; return t;
      case ',': t.kind = Tok::Comma; return t;
      case '=': t.kind = Tok::Assign; return t;
      case '*': t.kind = Tok::Star; return t;
      case '.': t.kind = Tok::Dot; return t;
      case '+': t.kind = Tok::Plus; return t;
      case '-': t.kind = Tok::Minus; return t;
      case '?': t.kind = Tok::Question; return t;
      case '<': t.kind = Tok::Lt; return t;
      case '>': t.kind = Tok::Gt; return t;
      default: break;
    }
    t.kind = Tok::End;
    t.text = std::string(1, c);
    t.line = -1;  // flag: unknown character
    return t;
  }

 private:
  void advance() {
    if (s_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void skip_ws() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == '/' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '/') {
        while (pos_ < s_.size() && s_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }
  const std::string& s_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct ParserFail {
  ParseError err;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lex_(text) { bump(); }

  SourceProgram program() {
    SourceProgram p;
    while (cur_.kind != Tok::End) p.functions.push_back(function());
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw ParserFail{{msg, cur_.line, cur_.col}};
  }
  void bump() {
    cur_ = lex_.next();
    if (cur_.line < 0) {
      cur_.line = 0;
      fail("unexpected character '" + cur_.text + "'");
    }
  }
  void expect(Tok k, const std::string& what) {
    if (cur_.kind != k) fail("expected " + what);
    bump();
  }
  std::string ident() {
    if (cur_.kind != Tok::Ident) fail("expected identifier");
    std::string n = cur_.text;
    if (std::regex_match(n, std::regex("^l[0-9]+$")))
      fail("identifier '" + n + "' is reserved for logical variables");
    if (n.rfind("return_", 0) == 0)
      fail("identifiers starting with 'return_' are reserved");
    if (std::isupper(static_cast<unsigned char>(n[0])))
      fail("identifiers must start with a lowercase letter");
    bump();
    return n;
  }

  FunctionDecl function() {
    FunctionDecl f;
    f.line = cur_.line;
    expect(Tok::KwInt, "'int'");
    f.name = ident();
    expect(Tok::LParen, "'('");
    if (cur_.kind != Tok::RParen) {
      f.params.push_back(ident());
      while (cur_.kind == Tok::Comma) {
        bump();
        f.params.push_back(ident());
      }
    }
    expect(Tok::RParen, "')'");
    f.body = block();
    return f;
  }

  std::vector<SrcStmtPtr> block() {
    expect(Tok::LBrace, "'{'");
    std::vector<SrcStmtPtr> stmts;
    while (cur_.kind != Tok::RBrace) {
      if (cur_.kind == Tok::End) fail("unexpected end of input inside block");
      stmts.push_back(statement());
    }
    bump();
    return stmts;
  }

  SrcExprPtr make(SrcExpr e) { return std::make_shared<SrcExpr>(std::move(e)); }

  SrcExprPtr atom_expr() {
    SrcExpr e;
    switch (cur_.kind) {
      case Tok::KwNull: e.kind = SrcExpr::Kind::Null; bump(); break;
      case Tok::Nat:
        e.kind = SrcExpr::Kind::Nat;
        e.k = cur_.value;
        bump();
        break;
      case Tok::Question: e.kind = SrcExpr::Kind::Nondet; bump(); break;
      case Tok::Minus: {
        bump();
        e.kind = SrcExpr::Kind::Unary;
        e.un = UnOp::Neg;
        e.a = atom_expr();
        break;
      }
      case Tok::Star: {
        // *x.f  (paper-style load)
        bump();
        e.kind = SrcExpr::Kind::Load;
        e.name = ident();
        expect(Tok::Dot, "'.'");
        if (cur_.kind != Tok::Ident) fail("expected field name");
        e.field = cur_.text;
        bump();
        break;
      }
      case Tok::Ident: {
        std::string n = ident();
        if (cur_.kind == Tok::Arrow) {
          bump();
          e.kind = SrcExpr::Kind::Load;
          e.name = n;
          if (cur_.kind != Tok::Ident) fail("expected field name");
          e.field = cur_.text;
          bump();
        } else {
          e.kind = SrcExpr::Kind::Var;
          e.name = n;
        }
        break;
      }
      default: fail("expected expression");
    }
    return make(std::move(e));
  }

  SrcExprPtr expression() {
    SrcExprPtr lhs = term();
    while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
      BinOp op = cur_.kind == Tok::Plus ? BinOp::Add : BinOp::Sub;
      bump();
      SrcExpr e;
      e.kind = SrcExpr::Kind::Binary;
      e.bin = op;
      e.a = lhs;
      e.b = term();
      lhs = make(std::move(e));
    }
    return lhs;
  }

  SrcExprPtr term() {
    SrcExprPtr lhs = atom_expr();
    while (cur_.kind == Tok::Star) {
      bump();
      SrcExpr e;
      e.kind = SrcExpr::Kind::Binary;
      e.bin = BinOp::Mul;
      e.a = lhs;
      e.b = atom_expr();
      lhs = make(std::move(e));
    }
    return lhs;
  }

  SrcExprPtr cond_operand() {
    switch (cur_.kind) {
      case Tok::KwNull: {
        bump();
        SrcExpr e;
        e.kind = SrcExpr::Kind::Null;
        return make(std::move(e));
      }
      case Tok::Nat: {
        SrcExpr e;
        e.kind = SrcExpr::Kind::Nat;
        e.k = cur_.value;
        bump();
        return make(std::move(e));
      }
      case Tok::Ident: {
        SrcExpr e;
        e.kind = SrcExpr::Kind::Var;
        e.name = ident();
        return make(std::move(e));
      }
      default: fail("expected variable, NULL, or constant in condition");
    }
  }

  SrcCond condition() {
    SrcCond c;
    if (cur_.kind == Tok::Question) {
      bump();
      c.nondet = true;
      return c;
    }
    for (;;) {
      SrcCondAtom a;
      a.lhs = cond_operand();
      switch (cur_.kind) {
        case Tok::EqEq: a.op = RelOp::Eq; break;
        case Tok::NotEq: a.op = RelOp::Ne; break;
        case Tok::Le: a.op = RelOp::Le; break;
        case Tok::Ge: a.op = RelOp::Ge; break;
        case Tok::Lt: a.op = RelOp::Lt; break;
        case Tok::Gt: a.op = RelOp::Gt; break;
        default: fail("expected relational operator");
      }
      bump();
      a.rhs = cond_operand();
      c.atoms.push_back(std::move(a));
      if (cur_.kind != Tok::AndAnd) break;
      bump();
    }
    return c;
  }

  SrcStmtPtr statement() {
    auto s = std::make_shared<SrcStmt>();
    s->line = cur_.line;
    switch (cur_.kind) {
      case Tok::KwReturn: {
        bump();
        s->kind = SrcStmt::Kind::Return;
        s->expr = expression();
        expect(Tok::Semi, "';'");
        return s;
      }
      case Tok::KwIf: {
        bump();
        s->kind = SrcStmt::Kind::If;
        expect(Tok::LParen, "'('");
        s->cond = condition();
        expect(Tok::RParen, "')'");
        s->then_body = block();
        if (cur_.kind == Tok::KwElse) {
          bump();
          s->else_body = block();
        }
        return s;
      }
      case Tok::KwWhile: {
        bump();
        s->kind = SrcStmt::Kind::While;
        expect(Tok::LParen, "'('");
        s->cond = condition();
        if (s->cond.nondet)
          fail("loop condition not a conjunction of (in)equalities over variables/NULL");
        expect(Tok::RParen, "')'");
        s->then_body = block();
        return s;
      }
      case Tok::KwAssume:
      case Tok::KwAssert: {
        bool is_assume = cur_.kind == Tok::KwAssume;
        bump();
        s->kind = is_assume ? SrcStmt::Kind::Assume : SrcStmt::Kind::Assert;
        expect(Tok::LParen, "'('");
        s->cond = condition();
        if (s->cond.nondet || s->cond.atoms.size() != 1)
          fail("assume/assert takes a single relational atom");
        expect(Tok::RParen, "')'");
        expect(Tok::Semi, "';'");
        return s;
      }
      case Tok::Star: {
        // *x.f = y;
        bump();
        s->kind = SrcStmt::Kind::Store;
        s->name = ident();
        expect(Tok::Dot, "'.'");
        if (cur_.kind != Tok::Ident) fail("expected field name");
        s->field = cur_.text;
        bump();
        expect(Tok::Assign, "'='");
        s->expr = expression();
        expect(Tok::Semi, "';'");
        return s;
      }
      case Tok::Ident: {
        std::string n = ident();
        if (cur_.kind == Tok::Arrow) {
          bump();
          s->kind = SrcStmt::Kind::Store;
          s->name = n;
          if (cur_.kind != Tok::Ident) fail("expected field name");
          s->field = cur_.text;
          bump();
          expect(Tok::Assign, "'='");
          s->expr = expression();
          expect(Tok::Semi, "';'");
          return s;
        }
        expect(Tok::Assign, "'='");
        // Call or plain assignment: an identifier followed by '(' is a call.
        if (cur_.kind == Tok::Ident) {
          std::string first = ident();
          if (cur_.kind == Tok::LParen) {
            bump();
            s->kind = SrcStmt::Kind::Call;
            s->name = n;
            s->callee = first;
            if (cur_.kind != Tok::RParen) {
              s->args.push_back(ident());
              while (cur_.kind == Tok::Comma) {
                bump();
                s->args.push_back(ident());
              }
            }
            expect(Tok::RParen, "')'");
            expect(Tok::Semi, "';'");
            return s;
          }
          // Not a call: re-parse as expression starting from the identifier.
          s->kind = SrcStmt::Kind::Assign;
          s->name = n;
          SrcExpr base;
          if (cur_.kind == Tok::Arrow) {
            bump();
            base.kind = SrcExpr::Kind::Load;
            base.name = first;
            if (cur_.kind != Tok::Ident) fail("expected field name");
            base.field = cur_.text;
            bump();
          } else {
            base.kind = SrcExpr::Kind::Var;
            base.name = first;
          }
          s->expr = continue_expression(make(std::move(base)));
          expect(Tok::Semi, "';'");
          return s;
        }
        s->kind = SrcStmt::Kind::Assign;
        s->name = n;
        s->expr = expression();
        expect(Tok::Semi, "';'");
        return s;
      }
      default: fail("expected statement");
    }
  }

  // Continue parsing an expression whose first atom is already consumed.
  SrcExprPtr continue_expression(SrcExprPtr first) {
    SrcExprPtr lhs = first;
    while (cur_.kind == Tok::Star) {
      bump();
      SrcExpr e;
      e.kind = SrcExpr::Kind::Binary;
      e.bin = BinOp::Mul;
      e.a = lhs;
      e.b = atom_expr();
      lhs = make(std::move(e));
    }
    while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
      BinOp op = cur_.kind == Tok::Plus ? BinOp::Add : BinOp::Sub;
      bump();
      SrcExpr e;
      e.kind = SrcExpr::Kind::Binary;
      e.bin = op;
      e.a = lhs;
      e.b = term();
      lhs = make(std::move(e));
    }
    return lhs;
  }

  Lexer lex_;
  Token cur_;
};

void render_expr(const SrcExpr& e, std::ostringstream& os) {
  switch (e.kind) {
    case SrcExpr::Kind::Null: os << "NULL"; break;
    case SrcExpr::Kind::Nat: os << e.k; break;
    case SrcExpr::Kind::Var: os << e.name; break;
    case SrcExpr::Kind::Nondet: os << "?"; break;
    case SrcExpr::Kind::Load: os << e.name << "->" << e.field; break;
    case SrcExpr::Kind::Unary:
      os << "-";
      render_expr(*e.a, os);
      break;
    case SrcExpr::Kind::Binary: {
      auto sub = [&os](const SrcExpr& s) {
        bool paren = s.kind == SrcExpr::Kind::Binary;
        if (paren) os << "(";
        render_expr(s, os);
        if (paren) os << ")";
      };
      sub(*e.a);
      os << (e.bin == BinOp::Add ? " + " : e.bin == BinOp::Sub ? " - " : " * ");
      sub(*e.b);
      break;
    }
  }
}

void render_cond(const SrcCond& c, std::ostringstream& os) {
  if (c.nondet) {
    os << "?";
    return;
  }
  for (size_t i = 0; i < c.atoms.size(); ++i) {
    if (i) os << " && ";
    const auto& a = c.atoms[i];
    render_expr(*a.lhs, os);
    switch (a.op) {
      case RelOp::Eq: os << " == "; break;
      case RelOp::Ne: os << " != "; break;
      case RelOp::Le: os << " <= "; break;
      case RelOp::Ge: os << " >= "; break;
      case RelOp::Lt: os << " < "; break;
      case RelOp::Gt: os << " > "; break;
    }
    render_expr(*a.rhs, os);
  }
}

void render_stmt(const SrcStmt& s, int indent, std::ostringstream& os) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  os << pad;
  switch (s.kind) {
    case SrcStmt::Kind::Assign:
      os << s.name << " = ";
      render_expr(*s.expr, os);
      os << ";\n";
      break;
    case SrcStmt::Kind::Store:
      os << s.name << "->" << s.field << " = ";
      render_expr(*s.expr, os);
      os << ";\n";
      break;
    case SrcStmt::Kind::Return:
      os << "return ";
      render_expr(*s.expr, os);
      os << ";\n";
      break;
    case SrcStmt::Kind::Assume:
    case SrcStmt::Kind::Assert:
      os << (s.kind == SrcStmt::Kind::Assume ? "assume(" : "assert(");
      render_cond(s.cond, os);
      os << ");\n";
      break;
    case SrcStmt::Kind::Call: {
      os << s.name << " = " << s.callee << "(";
      for (size_t i = 0; i < s.args.size(); ++i) {
        if (i) os << ", ";
        os << s.args[i];
      }
      os << ");\n";
      break;
    }
    case SrcStmt::Kind::If: {
      os << "if (";
      render_cond(s.cond, os);
      os << ") {\n";
      for (const auto& t : s.then_body) render_stmt(*t, indent + 1, os);
      os << pad << "}";
      if (!s.else_body.empty()) {
        os << " else {\n";
        for (const auto& t : s.else_body) render_stmt(*t, indent + 1, os);
        os << pad << "}";
      }
      os << "\n";
      break;
    }
    case SrcStmt::Kind::While: {
      os << "while (";
      render_cond(s.cond, os);
      os << ") {\n";
      for (const auto& t : s.then_body) render_stmt(*t, indent + 1, os);
      os << pad << "}\n";
      break;
    }
  }
}

}  // namespace

ParseResult parse(const std::string& text) {
  ParseResult r;
  try {
    Parser p(text);
    SourceProgram prog = p.program();
    // Function names must be unique.
    for (size_t i = 0; i < prog.functions.size(); ++i)
      for (size_t j = i + 1; j < prog.functions.size(); ++j)
        if (prog.functions[i].name == prog.functions[j].name) {
          r.error = ParseError{"duplicate function '" + prog.functions[i].name + "'",
                               prog.functions[j].line, 1};
          return r;
        }
    r.program = std::move(prog);
  } catch (const ParserFail& f) {
    r.error = f.err;
  }
  return r;
}

std::string print_program(const SourceProgram& p) {
  std::ostringstream os;
  for (const auto& f : p.functions) {
    os << "int " << f.name << "(";
    for (size_t i = 0; i < f.params.size(); ++i) {
      if (i) os << ", ";
      os << f.params[i];
    }
    os << ") {\n";
    for (const auto& s : f.body) render_stmt(*s, 1, os);
    os << "}\n\n";
  }
  return os.str();
}

}  // namespace abducer
