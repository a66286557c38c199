#pragma once
// Abstract syntax for the while-language: expressions over registers,
// commands (skip / assume / assert / assign / load / store / cas and the
// combinators sequence, choice, iteration) and whole-system specifications.

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace raver {

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

enum class ExprOp { Const, Reg, Add, Sub, Mul, Eq, Ne, Lt, Le };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprOp op;
  long value = 0;  // Const
  int reg = -1;    // Reg
  ExprPtr lhs, rhs;

  static ExprPtr constant(long v) {
    auto e = std::make_shared<Expr>();
    e->op = ExprOp::Const;
    e->value = v;
    return e;
  }
  static ExprPtr regref(int r) {
    auto e = std::make_shared<Expr>();
    e->op = ExprOp::Reg;
    e->reg = r;
    return e;
  }
  static ExprPtr binary(ExprOp op, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
  }
};

// Evaluate over the finite domain {0..dom-1}; every operator result is
// wrapped modulo dom so evaluation is total.
inline int eval_expr(const Expr& e, const std::vector<int>& rv, int dom) {
  auto wrap = [dom](long v) {
    long m = v % dom;
    if (m < 0) m += dom;
    return static_cast<int>(m);
  };
  switch (e.op) {
    case ExprOp::Const: return wrap(e.value);
    case ExprOp::Reg: return rv.at(static_cast<size_t>(e.reg));
    default: break;
  }
  long a = eval_expr(*e.lhs, rv, dom);
  long b = eval_expr(*e.rhs, rv, dom);
  switch (e.op) {
    case ExprOp::Add: return wrap(a + b);
    case ExprOp::Sub: return wrap(a - b);
    case ExprOp::Mul: return wrap(a * b);
    case ExprOp::Eq: return a == b ? 1 : 0;
    case ExprOp::Ne: return a != b ? 1 : 0;
    case ExprOp::Lt: return a < b ? 1 : 0;
    case ExprOp::Le: return a <= b ? 1 : 0;
    default: throw std::logic_error("bad expr op");
  }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

enum class CmdKind {
  Skip,
  Assume,
  AssertFalse,
  Assign,
  Load,
  Store,
  Cas,
  Seq,
  Choice,
  Star
};

struct Command;
using CmdPtr = std::shared_ptr<const Command>;

// An operand that is either a register or a literal domain value.
struct RegOrLit {
  int reg = -1;  // register index, or -1
  int lit = -1;  // literal value, or -1
  bool is_reg() const { return reg >= 0; }
  int value(const std::vector<int>& rv) const {
    return is_reg() ? rv.at(static_cast<size_t>(reg)) : lit;
  }
  static RegOrLit of_reg(int r) { return RegOrLit{r, -1}; }
  static RegOrLit of_lit(int v) { return RegOrLit{-1, v}; }
  bool operator==(const RegOrLit&) const = default;
};

struct Command {
  CmdKind kind = CmdKind::Skip;
  int reg = -1;           // Assign/Load destination register
  int var = -1;           // Load/Store/Cas shared variable
  ExprPtr expr;           // Assume/Assign
  RegOrLit src;           // Store source; Cas compare operand
  RegOrLit src2;          // Cas new-value operand
  CmdPtr left, right;     // Seq/Choice children; Star body in `left`

  static CmdPtr atom(CmdKind k) {
    auto c = std::make_shared<Command>();
    c->kind = k;
    return c;
  }
  static CmdPtr skip() { return atom(CmdKind::Skip); }
  static CmdPtr assume(ExprPtr e) {
    auto c = std::make_shared<Command>();
    c->kind = CmdKind::Assume;
    c->expr = std::move(e);
    return c;
  }
  static CmdPtr assert_false() { return atom(CmdKind::AssertFalse); }
  static CmdPtr assign(int r, ExprPtr e) {
    auto c = std::make_shared<Command>();
    c->kind = CmdKind::Assign;
    c->reg = r;
    c->expr = std::move(e);
    return c;
  }
  static CmdPtr load(int r, int x) {
    auto c = std::make_shared<Command>();
    c->kind = CmdKind::Load;
    c->reg = r;
    c->var = x;
    return c;
  }
  static CmdPtr store(int x, RegOrLit s) {
    auto c = std::make_shared<Command>();
    c->kind = CmdKind::Store;
    c->var = x;
    c->src = s;
    return c;
  }
  static CmdPtr cas(int x, RegOrLit cmp, RegOrLit nv) {
    auto c = std::make_shared<Command>();
    c->kind = CmdKind::Cas;
    c->var = x;
    c->src = cmp;
    c->src2 = nv;
    return c;
  }
  static CmdPtr seq(CmdPtr a, CmdPtr b) {
    auto c = std::make_shared<Command>();
    c->kind = CmdKind::Seq;
    c->left = std::move(a);
    c->right = std::move(b);
    return c;
  }
  static CmdPtr choice(CmdPtr a, CmdPtr b) {
    auto c = std::make_shared<Command>();
    c->kind = CmdKind::Choice;
    c->left = std::move(a);
    c->right = std::move(b);
    return c;
  }
  static CmdPtr star(CmdPtr body) {
    auto c = std::make_shared<Command>();
    c->kind = CmdKind::Star;
    c->left = std::move(body);
    return c;
  }

  bool is_atom() const {
    return kind != CmdKind::Seq && kind != CmdKind::Choice &&
           kind != CmdKind::Star;
  }
};

// Build a sequence of a list of commands (right-nested); empty -> skip.
inline CmdPtr seq_all(const std::vector<CmdPtr>& cs) {
  if (cs.empty()) return Command::skip();
  CmdPtr out = cs.back();
  for (size_t i = cs.size() - 1; i-- > 0;) out = Command::seq(cs[i], out);
  return out;
}

// Build a choice over a list of commands (right-nested); requires >= 1.
inline CmdPtr choice_all(const std::vector<CmdPtr>& cs) {
  if (cs.empty()) throw std::invalid_argument("choice_all: empty");
  CmdPtr out = cs.back();
  for (size_t i = cs.size() - 1; i-- > 0;) out = Command::choice(cs[i], out);
  return out;
}

// Number of atomic instructions (AST leaves) in a command.
inline int instruction_count(const Command& c) {
  switch (c.kind) {
    case CmdKind::Seq:
    case CmdKind::Choice:
      return instruction_count(*c.left) + instruction_count(*c.right);
    case CmdKind::Star: return instruction_count(*c.left);
    default: return 1;
  }
}

// ---------------------------------------------------------------------------
// Systems
// ---------------------------------------------------------------------------

enum class Role { Env, Dis, Ldr };

struct ThreadProg {
  std::string name;
  Role role = Role::Dis;
  CmdPtr body;
};

struct ClassFlags {
  bool acyc = true;
  bool nocas = true;
};

struct SystemSpec {
  std::vector<std::string> vars;
  int dom = 2;        // values are 0..dom-1
  int initValue = 0;  // d_init
  std::vector<std::string> regs;
  std::optional<ThreadProg> envProgram;        // replicated environment thread
  std::vector<ThreadProg> disPrograms;         // roles Dis or Ldr

  int var_index(const std::string& n) const {
    for (size_t i = 0; i < vars.size(); ++i)
      if (vars[i] == n) return static_cast<int>(i);
    return -1;
  }
  int reg_index(const std::string& n) const {
    for (size_t i = 0; i < regs.size(); ++i)
      if (regs[i] == n) return static_cast<int>(i);
    return -1;
  }
  int ldr_index() const {
    for (size_t i = 0; i < disPrograms.size(); ++i)
      if (disPrograms[i].role == Role::Ldr) return static_cast<int>(i);
    return -1;
  }
};

struct GoalSpec {
  int var = -1;
  int val = -1;
};

inline ClassFlags classify(const Command& c) {
  ClassFlags f;
  switch (c.kind) {
    case CmdKind::Star: {
      ClassFlags b = classify(*c.left);
      return ClassFlags{false, b.nocas};
    }
    case CmdKind::Seq:
    case CmdKind::Choice: {
      ClassFlags a = classify(*c.left), b = classify(*c.right);
      return ClassFlags{a.acyc && b.acyc, a.nocas && b.nocas};
    }
    case CmdKind::Cas: return ClassFlags{true, false};
    default: return ClassFlags{true, true};
  }
}

// Rewrite every `assert false` into a store of a fresh value d* = old dom
// to a fresh variable x*; returns the rewritten system and the goal (x*, d*).
inline std::pair<SystemSpec, GoalSpec> assert_to_goal(const SystemSpec& s) {
  SystemSpec out = s;
  int goalVar = static_cast<int>(out.vars.size());
  int goalVal = out.dom;
  out.vars.push_back("__goal");
  out.dom += 1;

  struct Rewriter {
    int var, val;
    CmdPtr run(const CmdPtr& c) {
      switch (c->kind) {
        case CmdKind::AssertFalse:
          return Command::store(var, RegOrLit::of_lit(val));
        case CmdKind::Seq: return Command::seq(run(c->left), run(c->right));
        case CmdKind::Choice:
          return Command::choice(run(c->left), run(c->right));
        case CmdKind::Star: return Command::star(run(c->left));
        default: return c;
      }
    }
  } rw{goalVar, goalVal};

  if (out.envProgram) out.envProgram->body = rw.run(out.envProgram->body);
  for (auto& t : out.disPrograms) t.body = rw.run(t.body);
  return {out, GoalSpec{goalVar, goalVal}};
}

}  // namespace raver
