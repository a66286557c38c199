#pragma once
// Text format for systems:
//
//   vars x, y; domain 2; init 0; regs r1, r2;
//   dis t1 { store x 1; r1 := load y; assume(r1 = 0) }
//   env helper { loop { store x r1 } }
//
// Statements: skip | assume(e) | assert(false) | r := e | r := load x |
// store x (r|nat) | cas(x, r|nat, r|nat) | s ; s | { s } or { s } |
// loop { s }.  Expressions: + - * = != < <= over registers and naturals.

#include <cctype>
#include <sstream>

#include "ast.hpp"

namespace raver {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error(msg + " at line " + std::to_string(line) +
                           ", column " + std::to_string(col)),
        line(line),
        col(col) {}
};

namespace detail {

struct Lexer {
  std::string src;
  size_t pos = 0;
  int line = 1, col = 1;

  struct Tok {
    std::string text;  // empty = eof
    int line, col;
  };
  Tok cur;

  explicit Lexer(std::string s) : src(std::move(s)) { advance(); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, cur.line, cur.col);
  }

  void bump(char c) {
    ++pos;
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }

  void advance() {
    while (pos < src.size()) {
      char c = src[pos];
      if (std::isspace(static_cast<unsigned char>(c))) {
        bump(c);
      } else if (c == '#') {  // comment to end of line
        while (pos < src.size() && src[pos] != '\n') bump(src[pos]);
      } else {
        break;
      }
    }
    cur.line = line;
    cur.col = col;
    cur.text.clear();
    if (pos >= src.size()) return;
    char c = src[pos];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[pos])) ||
              src[pos] == '_')) {
        cur.text += src[pos];
        bump(src[pos]);
      }
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      while (pos < src.size() &&
             std::isdigit(static_cast<unsigned char>(src[pos]))) {
        cur.text += src[pos];
        bump(src[pos]);
      }
    } else {
      cur.text += c;
      bump(c);
      // two-char operators
      if (pos < src.size()) {
        char d = src[pos];
        if ((c == ':' && d == '=') || (c == '!' && d == '=') ||
            (c == '<' && d == '=')) {
          cur.text += d;
          bump(d);
        }
      }
    }
  }

  bool at(const std::string& t) const { return cur.text == t; }
  bool eof() const { return cur.text.empty(); }
  void expect(const std::string& t) {
    if (!at(t)) fail("expected '" + t + "', found '" + cur.text + "'");
    advance();
  }
  bool accept(const std::string& t) {
    if (at(t)) {
      advance();
      return true;
    }
    return false;
  }
  bool is_ident() const {
    return !cur.text.empty() &&
           (std::isalpha(static_cast<unsigned char>(cur.text[0])) ||
            cur.text[0] == '_');
  }
  bool is_nat() const {
    return !cur.text.empty() &&
           std::isdigit(static_cast<unsigned char>(cur.text[0]));
  }
  std::string ident() {
    if (!is_ident()) fail("expected identifier, found '" + cur.text + "'");
    std::string t = cur.text;
    advance();
    return t;
  }
  long nat() {
    if (!is_nat()) fail("expected number, found '" + cur.text + "'");
    long v = std::stol(cur.text);
    advance();
    return v;
  }
};

struct Parser {
  Lexer lx;
  SystemSpec sys;

  explicit Parser(std::string s) : lx(std::move(s)) {}

  int var_of(const std::string& n) {
    int i = sys.var_index(n);
    if (i < 0) lx.fail("undeclared identifier '" + n + "'");
    return i;
  }
  int reg_of(const std::string& n) {
    int i = sys.reg_index(n);
    if (i < 0) lx.fail("undeclared identifier '" + n + "'");
    return i;
  }

  RegOrLit reg_or_lit() {
    if (lx.is_nat()) {
      long v = lx.nat();
      if (v >= sys.dom) lx.fail("value out of domain");
      return RegOrLit::of_lit(static_cast<int>(v));
    }
    return RegOrLit::of_reg(reg_of(lx.ident()));
  }

  ExprPtr primary() {
    if (lx.accept("(")) {
      ExprPtr e = expr();
      lx.expect(")");
      return e;
    }
    if (lx.is_nat()) return Expr::constant(lx.nat());
    return Expr::regref(reg_of(lx.ident()));
  }
  ExprPtr mul_expr() {
    ExprPtr e = primary();
    while (lx.at("*")) {
      lx.advance();
      e = Expr::binary(ExprOp::Mul, e, primary());
    }
    return e;
  }
  ExprPtr add_expr() {
    ExprPtr e = mul_expr();
    while (lx.at("+") || lx.at("-")) {
      ExprOp op = lx.at("+") ? ExprOp::Add : ExprOp::Sub;
      lx.advance();
      e = Expr::binary(op, e, mul_expr());
    }
    return e;
  }
  ExprPtr expr() {
    ExprPtr e = add_expr();
    if (lx.at("=") || lx.at("!=") || lx.at("<") || lx.at("<=")) {
      ExprOp op = lx.at("=")    ? ExprOp::Eq
                  : lx.at("!=") ? ExprOp::Ne
                  : lx.at("<")  ? ExprOp::Lt
                                : ExprOp::Le;
      lx.advance();
      e = Expr::binary(op, e, add_expr());
    }
    return e;
  }

  CmdPtr stmt_item() {
    if (lx.accept("skip")) return Command::skip();
    if (lx.accept("assume")) {
      lx.expect("(");
      ExprPtr e = expr();
      lx.expect(")");
      return Command::assume(e);
    }
    if (lx.accept("assert")) {
      lx.expect("(");
      lx.expect("false");
      lx.expect(")");
      return Command::assert_false();
    }
    if (lx.accept("store")) {
      int x = var_of(lx.ident());
      return Command::store(x, reg_or_lit());
    }
    if (lx.accept("cas")) {
      lx.expect("(");
      int x = var_of(lx.ident());
      lx.expect(",");
      RegOrLit a = reg_or_lit();
      lx.expect(",");
      RegOrLit b = reg_or_lit();
      lx.expect(")");
      return Command::cas(x, a, b);
    }
    if (lx.accept("loop")) {
      lx.expect("{");
      CmdPtr body = stmt();
      lx.expect("}");
      return Command::star(body);
    }
    if (lx.accept("{")) {
      CmdPtr a = stmt();
      lx.expect("}");
      lx.expect("or");
      lx.expect("{");
      CmdPtr b = stmt();
      lx.expect("}");
      return Command::choice(a, b);
    }
    // ident := expr | ident := load var
    std::string name = lx.ident();
    int r = reg_of(name);
    lx.expect(":=");
    if (lx.accept("load")) return Command::load(r, var_of(lx.ident()));
    return Command::assign(r, expr());
  }

  CmdPtr stmt() {
    CmdPtr a = stmt_item();
    if (lx.accept(";")) return Command::seq(a, stmt());
    return a;
  }

  SystemSpec run() {
    lx.expect("vars");
    sys.vars.push_back(lx.ident());
    while (lx.accept(",")) sys.vars.push_back(lx.ident());
    lx.expect(";");
    lx.expect("domain");
    sys.dom = static_cast<int>(lx.nat());
    if (sys.dom < 1) lx.fail("domain must be >= 1");
    lx.expect(";");
    if (lx.accept("init")) {
      sys.initValue = static_cast<int>(lx.nat());
      if (sys.initValue >= sys.dom) lx.fail("value out of domain");
      lx.expect(";");
    }
    lx.expect("regs");
    sys.regs.push_back(lx.ident());
    while (lx.accept(",")) sys.regs.push_back(lx.ident());
    lx.expect(";");
    while (!lx.eof()) {
      Role role;
      if (lx.accept("env")) {
        role = Role::Env;
      } else if (lx.accept("dis")) {
        role = Role::Dis;
      } else if (lx.accept("ldr")) {
        role = Role::Ldr;
      } else {
        lx.fail("expected thread role (env/dis/ldr), found '" + lx.cur.text +
                "'");
      }
      std::string name = lx.ident();
      lx.expect("{");
      CmdPtr body = stmt();
      lx.expect("}");
      if (role == Role::Env) {
        if (sys.envProgram) lx.fail("more than one env program");
        sys.envProgram = ThreadProg{name, role, body};
      } else {
        if (role == Role::Ldr && sys.ldr_index() >= 0)
          lx.fail("more than one ldr program");
        sys.disPrograms.push_back(ThreadProg{name, role, body});
      }
    }
    return sys;
  }
};

}  // namespace detail

inline SystemSpec parse_system(const std::string& text) {
  return detail::Parser(text).run();
}

// ---------------------------------------------------------------------------
// Pretty-printing (round-trips through parse_system)
// ---------------------------------------------------------------------------

inline void print_expr(std::ostream& os, const Expr& e,
                       const SystemSpec& s) {
  switch (e.op) {
    case ExprOp::Const: os << e.value; return;
    case ExprOp::Reg: os << s.regs[static_cast<size_t>(e.reg)]; return;
    default: break;
  }
  const char* op = nullptr;
  switch (e.op) {
    case ExprOp::Add: op = "+"; break;
    case ExprOp::Sub: op = "-"; break;
    case ExprOp::Mul: op = "*"; break;
    case ExprOp::Eq: op = "="; break;
    case ExprOp::Ne: op = "!="; break;
    case ExprOp::Lt: op = "<"; break;
    case ExprOp::Le: op = "<="; break;
    default: break;
  }
  os << "(";
  print_expr(os, *e.lhs, s);
  os << " " << op << " ";
  print_expr(os, *e.rhs, s);
  os << ")";
}

inline void print_operand(std::ostream& os, const RegOrLit& o,
                          const SystemSpec& s) {
  if (o.is_reg())
    os << s.regs[static_cast<size_t>(o.reg)];
  else
    os << o.lit;
}

inline void print_command(std::ostream& os, const Command& c,
                          const SystemSpec& s) {
  switch (c.kind) {
    case CmdKind::Skip: os << "skip"; break;
    case CmdKind::Assume:
      os << "assume(";
      print_expr(os, *c.expr, s);
      os << ")";
      break;
    case CmdKind::AssertFalse: os << "assert(false)"; break;
    case CmdKind::Assign:
      os << s.regs[static_cast<size_t>(c.reg)] << " := ";
      print_expr(os, *c.expr, s);
      break;
    case CmdKind::Load:
      os << s.regs[static_cast<size_t>(c.reg)] << " := load "
         << s.vars[static_cast<size_t>(c.var)];
      break;
    case CmdKind::Store:
      os << "store " << s.vars[static_cast<size_t>(c.var)] << " ";
      print_operand(os, c.src, s);
      break;
    case CmdKind::Cas:
      os << "cas(" << s.vars[static_cast<size_t>(c.var)] << ", ";
      print_operand(os, c.src, s);
      os << ", ";
      print_operand(os, c.src2, s);
      os << ")";
      break;
    case CmdKind::Seq:
      print_command(os, *c.left, s);
      os << "; ";
      print_command(os, *c.right, s);
      break;
    case CmdKind::Choice:
      os << "{ ";
      print_command(os, *c.left, s);
      os << " } or { ";
      print_command(os, *c.right, s);
      os << " }";
      break;
    case CmdKind::Star:
      os << "loop { ";
      print_command(os, *c.left, s);
      os << " }";
      break;
  }
}

inline std::string print_system(const SystemSpec& s) {
  std::ostringstream os;
  os << "vars ";
  for (size_t i = 0; i < s.vars.size(); ++i)
    os << (i ? ", " : "") << s.vars[i];
  os << ";\ndomain " << s.dom << ";\ninit " << s.initValue << ";\nregs ";
  for (size_t i = 0; i < s.regs.size(); ++i)
    os << (i ? ", " : "") << s.regs[i];
  os << ";\n";
  auto thread = [&](const ThreadProg& t) {
    os << (t.role == Role::Env   ? "env "
           : t.role == Role::Ldr ? "ldr "
                                 : "dis ")
       << t.name << " { ";
    print_command(os, *t.body, s);
    os << " }\n";
  };
  if (s.envProgram) thread(*s.envProgram);
  for (const auto& t : s.disPrograms) thread(t);
  return os.str();
}

}  // namespace raver
