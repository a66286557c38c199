#pragma once
// Labelled transition systems for commands.  States are integers with
// initial state 0; edge labels are atomic commands.  Iteration `loop{c}`
// unfolds as `skip or (c; loop{c})`: the loop head gets a skip edge to a
// fresh exit and the body loops back to the head, so complete instruction
// sequences of a loop are body-sequences followed by one skip.

#include <functional>
#include <sstream>

#include "ast.hpp"

namespace raver {

struct LTS {
  struct Edge {
    int from;
    CmdPtr label;  // atomic command
    int to;
  };
  int initial = 0;
  int numStates = 1;
  std::vector<Edge> edges;
  std::vector<std::vector<int>> out;  // state -> indices into edges

  void add_edge(int from, CmdPtr label, int to) {
    out.resize(static_cast<size_t>(numStates));
    out[static_cast<size_t>(from)].push_back(static_cast<int>(edges.size()));
    edges.push_back(Edge{from, std::move(label), to});
  }
  int fresh() {
    out.resize(static_cast<size_t>(numStates) + 1);
    return numStates++;
  }
  bool is_terminal(int st) const {
    return out[static_cast<size_t>(st)].empty();
  }
};

namespace detail {
// Builds c between entry and exit; exit < 0 means "allocate fresh exits as
// needed" (atoms then each get their own sink, matching the expected state
// counts for top-level choices).
inline void build_lts(const CmdPtr& c, LTS& l, int entry, int exit) {
  switch (c->kind) {
    case CmdKind::Seq: {
      int mid = l.fresh();
      build_lts(c->left, l, entry, mid);
      build_lts(c->right, l, mid, exit);
      return;
    }
    case CmdKind::Choice:
      build_lts(c->left, l, entry, exit);
      build_lts(c->right, l, entry, exit);
      return;
    case CmdKind::Star: {
      int ex = exit < 0 ? l.fresh() : exit;
      l.add_edge(entry, Command::skip(), ex);
      build_lts(c->left, l, entry, entry);
      return;
    }
    default: {
      int ex = exit < 0 ? l.fresh() : exit;
      l.add_edge(entry, c, ex);
      return;
    }
  }
}
}  // namespace detail

inline LTS to_lts(const CmdPtr& c) {
  LTS l;
  l.out.resize(1);
  detail::build_lts(c, l, 0, -1);
  return l;
}

// ---------------------------------------------------------------------------
// Instruction-sequence enumeration (for cross-checking AST vs LTS)
// ---------------------------------------------------------------------------

// Sequences of atomic commands along LTS paths from the initial state that
// end in a terminal state, up to the given length.
inline std::vector<std::vector<CmdPtr>> lts_sequences(const LTS& l,
                                                      size_t maxLen) {
  std::vector<std::vector<CmdPtr>> res;
  std::vector<CmdPtr> cur;
  std::function<void(int)> go = [&](int st) {
    if (l.is_terminal(st)) res.push_back(cur);
    if (cur.size() == maxLen) return;
    for (int ei : l.out[static_cast<size_t>(st)]) {
      cur.push_back(l.edges[static_cast<size_t>(ei)].label);
      go(l.edges[static_cast<size_t>(ei)].to);
      cur.pop_back();
    }
  };
  go(l.initial);
  return res;
}

// Complete instruction sequences of a command, enumerated from the AST by
// unfolding loop{c} as `skip or (c; loop{c})`, up to the given length.
inline std::vector<std::vector<CmdPtr>> ast_sequences(const CmdPtr& c,
                                                      size_t maxLen) {
  std::vector<std::vector<CmdPtr>> res;
  std::vector<CmdPtr> cur;
  // Continuation stack of commands still to execute.
  std::function<void(std::vector<CmdPtr>&)> go = [&](std::vector<CmdPtr>& k) {
    if (k.empty()) {
      res.push_back(cur);
      return;
    }
    if (cur.size() >= maxLen) {
      // can still finish only if remaining work can be empty: it cannot —
      // every command contributes at least one instruction (loops end in
      // skip), so stop.
      return;
    }
    CmdPtr top = k.back();
    k.pop_back();
    switch (top->kind) {
      case CmdKind::Seq:
        k.push_back(top->right);
        k.push_back(top->left);
        go(k);
        k.pop_back();
        k.pop_back();
        break;
      case CmdKind::Choice: {
        k.push_back(top->left);
        go(k);
        k.pop_back();
        k.push_back(top->right);
        go(k);
        k.pop_back();
        break;
      }
      case CmdKind::Star: {
        k.push_back(Command::skip());
        go(k);
        k.pop_back();
        k.push_back(top);
        k.push_back(top->left);
        go(k);
        k.pop_back();
        k.pop_back();
        break;
      }
      default:
        cur.push_back(top);
        go(k);
        cur.pop_back();
        break;
    }
    k.push_back(top);
  };
  std::vector<CmdPtr> k{c};
  go(k);
  return res;
}

// Canonical text key of an atomic command, for comparing sequence sets.
inline std::string atom_key(const Command& c) {
  std::ostringstream os;
  std::function<void(const Expr&)> pe = [&](const Expr& e) {
    switch (e.op) {
      case ExprOp::Const: os << e.value; return;
      case ExprOp::Reg: os << "r" << e.reg; return;
      default:
        os << "(" << static_cast<int>(e.op) << " ";
        pe(*e.lhs);
        os << " ";
        pe(*e.rhs);
        os << ")";
    }
  };
  os << static_cast<int>(c.kind) << ":" << c.reg << ":" << c.var << ":"
     << c.src.reg << "," << c.src.lit << ":" << c.src2.reg << ","
     << c.src2.lit << ":";
  if (c.expr) pe(*c.expr);
  return os.str();
}

}  // namespace raver
