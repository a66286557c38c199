#pragma once
// Benchmark generators and program transformations:
//   * quantified-boolean-formula instances compiled into register-free
//     environment-only systems whose goal is generable iff the formula holds,
//   * succinctly encoded circuit-SAT instances compiled into leader systems,
//   * sequentialization of distinguished-thread programs into a single
//     loop-free environment program with CAS-based hand-over locks,
//   * bundled example systems (mutual exclusion, producer-consumer, smoke).

#include <json.hpp>

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ast.hpp"
#include "lts.hpp"

namespace raver {

// ---------------------------------------------------------------------------
// Quantified boolean formulas
// ---------------------------------------------------------------------------

// Prefix shape is fixed: forall u0 exists e1 forall u1 ... exists en forall un
// over a 3CNF matrix.  Variables are indexed in prefix order, so index 2i is
// u_i and index 2i-1 is e_i; there are 2n+1 variables in total.

struct QbfLit {
  int var = 0;
  bool neg = false;
};

struct Qbf {
  int n = 1;
  std::vector<std::array<QbfLit, 3>> clauses;

  int num_vars() const { return 2 * n + 1; }
  static int u(int i) { return 2 * i; }
  static int e(int i) { return 2 * i - 1; }
  // true for the universally quantified u_i, false for the e_i
  static bool universal(int varIndex) { return varIndex % 2 == 0; }
};

namespace detail {
inline void validate_qbf(const Qbf& q) {
  if (q.n < 1 || q.n > 4)
    throw std::invalid_argument("qbf: n out of supported range 1..4");
  if (q.clauses.empty()) throw std::invalid_argument("qbf: empty matrix");
  for (const auto& cl : q.clauses)
    for (const auto& lit : cl)
      if (lit.var < 0 || lit.var >= q.num_vars())
        throw std::invalid_argument("qbf: literal references unknown variable");
}
}  // namespace detail

// Truth value by full assignment recursion over the quantifier prefix.
inline bool eval_qbf(const Qbf& q) {
  detail::validate_qbf(q);
  std::vector<bool> asn(static_cast<size_t>(q.num_vars()));
  std::function<bool(int)> rec = [&](int j) -> bool {
    if (j == q.num_vars()) {
      for (const auto& cl : q.clauses) {
        bool sat = false;
        for (const auto& lit : cl)
          if (asn[static_cast<size_t>(lit.var)] != lit.neg) sat = true;
        if (!sat) return false;
      }
      return true;
    }
    asn[static_cast<size_t>(j)] = false;
    bool lo = rec(j + 1);
    asn[static_cast<size_t>(j)] = true;
    bool hi = rec(j + 1);
    return Qbf::universal(j) ? (lo && hi) : (lo || hi);
  };
  return rec(0);
}

// ---------------------------------------------------------------------------
// QBF -> environment-only system
// ---------------------------------------------------------------------------

// The generated system is loop-free, CAS-free and writes only the constant 1
// (before the assertion rewrite); truth of a variable is probed by reading the
// still-initial value 0, which is possible exactly while the thread's view of
// that variable has not moved.  One scratch register carries each probe:
// `r := load x; assume(r = d)`.

inline std::pair<SystemSpec, GoalSpec> qbf_to_purera(const Qbf& q) {
  detail::validate_qbf(q);
  SystemSpec s;
  s.dom = 2;
  s.initValue = 0;
  s.regs = {"r"};

  auto varName = [&](int v) {
    return Qbf::universal(v) ? "u" + std::to_string(v / 2)
                             : "e" + std::to_string((v + 1) / 2);
  };
  std::vector<int> tVar(static_cast<size_t>(q.num_vars()));
  std::vector<int> fVar(static_cast<size_t>(q.num_vars()));
  for (int v = 0; v < q.num_vars(); ++v) {
    tVar[static_cast<size_t>(v)] = static_cast<int>(s.vars.size());
    s.vars.push_back("t_" + varName(v));
    fVar[static_cast<size_t>(v)] = static_cast<int>(s.vars.size());
    s.vars.push_back("f_" + varName(v));
  }
  int sVar = static_cast<int>(s.vars.size());
  s.vars.push_back("s");
  std::vector<int> a0(static_cast<size_t>(q.n) + 1), a1(a0.size());
  for (int i = 0; i <= q.n; ++i) {
    a0[static_cast<size_t>(i)] = static_cast<int>(s.vars.size());
    s.vars.push_back("a" + std::to_string(i) + "_0");
    a1[static_cast<size_t>(i)] = static_cast<int>(s.vars.size());
    s.vars.push_back("a" + std::to_string(i) + "_1");
  }

  auto readEq = [](int x, int d) {
    return Command::seq(
        Command::load(0, x),
        Command::assume(
            Expr::binary(ExprOp::Eq, Expr::regref(0), Expr::constant(d))));
  };
  auto write1 = [](int x) { return Command::store(x, RegOrLit::of_lit(1)); };
  // deciding v = true keeps t_v at its initial timestamp and writes f_v
  auto chooseVar = [&](int v) {
    return Command::choice(write1(fVar[static_cast<size_t>(v)]),
                           write1(tVar[static_cast<size_t>(v)]));
  };

  std::vector<CmdPtr> gadgets;

  // assignment guesser: decide every variable, then publish via s
  {
    std::vector<CmdPtr> seq;
    for (int v = 0; v < q.num_vars(); ++v) seq.push_back(chooseVar(v));
    seq.push_back(write1(sVar));
    gadgets.push_back(seq_all(seq));
  }

  // matrix check: each clause passes through one still-readable literal
  auto checkMatrix = [&]() {
    std::vector<CmdPtr> seq;
    for (const auto& cl : q.clauses) {
      std::vector<CmdPtr> lits;
      for (const auto& lit : cl)
        lits.push_back(readEq(lit.neg ? fVar[static_cast<size_t>(lit.var)]
                                      : tVar[static_cast<size_t>(lit.var)],
                              0));
      seq.push_back(choice_all(lits));
    }
    return seq_all(seq);
  };

  // satisfaction checker: adopt a published assignment, check the matrix,
  // report the innermost universal variable's polarity
  {
    int un = Qbf::u(q.n);
    gadgets.push_back(seq_all(
        {readEq(sVar, 1), checkMatrix(),
         Command::choice(
             Command::seq(readEq(tVar[static_cast<size_t>(un)], 0),
                          write1(a1[static_cast<size_t>(q.n)])),
             Command::seq(readEq(fVar[static_cast<size_t>(un)], 0),
                          write1(a0[static_cast<size_t>(q.n)])))}));
  }

  // alternation checkers, one per level i = 0..n-1
  for (int i = 0; i < q.n; ++i) {
    int ei = Qbf::e(i + 1);
    int ui = Qbf::u(i);
    gadgets.push_back(seq_all(
        {readEq(a0[static_cast<size_t>(i) + 1], 1),
         readEq(a1[static_cast<size_t>(i) + 1], 1),
         Command::choice(readEq(fVar[static_cast<size_t>(ei)], 0),
                         readEq(tVar[static_cast<size_t>(ei)], 0)),
         Command::choice(
             Command::seq(readEq(tVar[static_cast<size_t>(ui)], 0),
                          write1(a1[static_cast<size_t>(i)])),
             Command::seq(readEq(fVar[static_cast<size_t>(ui)], 0),
                          write1(a0[static_cast<size_t>(i)])))}));
  }

  // assertion reachable only when level 0 reports both polarities
  gadgets.push_back(seq_all({readEq(a0[0], 1), readEq(a1[0], 1),
                             Command::assert_false()}));

  s.envProgram = ThreadProg{"qbf", Role::Env, choice_all(gadgets)};
  return assert_to_goal(s);
}

// ---------------------------------------------------------------------------
// Binary search pattern and access patterns
// ---------------------------------------------------------------------------

// bsp(n) is the word over {1..n} of length 2^n-1 with value n at the center
// and bsp(n-1) on both sides.
inline std::vector<int> bsp(int n) {
  if (n < 1) throw std::invalid_argument("bsp: n must be >= 1");
  if (n == 1) return {1};
  std::vector<int> half = bsp(n - 1);
  std::vector<int> out = half;
  out.push_back(n);
  out.insert(out.end(), half.begin(), half.end());
  return out;
}

// Sentinels used by access patterns for the two assignment values.
constexpr int kApTrue = -1;
constexpr int kApFalse = -2;

// The length-(n+1) read pattern locating bit address beta (bit i of beta is
// the i-th address bit) with expected polarity sigma in the interleaved
// write sequence: level i contributes separator i before the rest when the
// address bit is set, after it otherwise; the innermost element is the
// polarity sentinel.
inline std::vector<int> access_pattern(int n, unsigned beta, bool sigma) {
  std::vector<int> out;
  std::function<void(int)> rec = [&](int i) {
    if (i == 0) {
      out.push_back(sigma ? kApTrue : kApFalse);
      return;
    }
    if ((beta >> (i - 1)) & 1u) {
      out.push_back(i);
      rec(i - 1);
    } else {
      rec(i - 1);
      out.push_back(i);
    }
  };
  rec(n);
  return out;
}

// The full write sequence of 2^n assignment slots interleaved with bsp(n):
// w[k] selects the polarity of slot k.
inline std::vector<int> shuffle_sequence(int n, const std::vector<bool>& w) {
  if (static_cast<int>(w.size()) != (1 << n))
    throw std::invalid_argument("shuffle_sequence: |w| must be 2^n");
  std::vector<int> sep = bsp(n);
  std::vector<int> out;
  for (size_t k = 0; k < w.size(); ++k) {
    out.push_back(w[k] ? kApTrue : kApFalse);
    if (k < sep.size()) out.push_back(sep[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Succinct circuit-encoded 3CNF
// ---------------------------------------------------------------------------

// A NAND circuit with n inputs describing a 3CNF formula over 2^n boolean
// variables and 2^n clauses: on input address alpha it outputs, for each of
// the three literals, an n-bit variable index plus a sign bit.
struct Circuit {
  struct Gate {
    bool input = false;
    int in1 = -1, in2 = -1;  // indices of earlier gates (NAND only)
  };
  int n = 1;
  std::vector<Gate> gates;                  // topologically ordered
  std::vector<int> inputs;                  // n gate indices, address bit 0 first
  std::array<std::vector<int>, 3> varBits;  // per literal: n gate indices, LSB first
  std::array<int, 3> sigBit = {-1, -1, -1};
};

namespace detail {
inline void validate_circuit(const Circuit& d) {
  if (d.n < 1) throw std::invalid_argument("circuit: n must be >= 1");
  if (static_cast<int>(d.inputs.size()) != d.n)
    throw std::invalid_argument("circuit: needs exactly n inputs");
  for (size_t i = 0; i < d.gates.size(); ++i) {
    const auto& g = d.gates[i];
    if (!g.input &&
        (g.in1 < 0 || g.in2 < 0 || g.in1 >= static_cast<int>(i) ||
         g.in2 >= static_cast<int>(i)))
      throw std::invalid_argument("circuit: gate inputs must precede the gate");
  }
  auto checkIdx = [&](int k) {
    if (k < 0 || k >= static_cast<int>(d.gates.size()))
      throw std::invalid_argument("circuit: output references unknown gate");
  };
  for (int j = 0; j < 3; ++j) {
    if (static_cast<int>(d.varBits[static_cast<size_t>(j)].size()) != d.n)
      throw std::invalid_argument("circuit: variable outputs need n bits");
    for (int k : d.varBits[static_cast<size_t>(j)]) checkIdx(k);
    checkIdx(d.sigBit[static_cast<size_t>(j)]);
  }
}
}  // namespace detail

// Gate values on the given n-bit clause address.
inline std::vector<bool> eval_circuit(const Circuit& d, unsigned alpha) {
  detail::validate_circuit(d);
  std::vector<bool> val(d.gates.size(), false);
  for (int i = 0; i < d.n; ++i)
    val[static_cast<size_t>(d.inputs[static_cast<size_t>(i)])] =
        (alpha >> i) & 1u;
  for (size_t i = 0; i < d.gates.size(); ++i) {
    const auto& g = d.gates[i];
    if (!g.input)
      val[i] = !(val[static_cast<size_t>(g.in1)] &&
                 val[static_cast<size_t>(g.in2)]);
  }
  return val;
}

struct ExpandedLit {
  unsigned var = 0;
  bool sign = true;  // true = positive occurrence
};

// The explicit 3CNF the circuit describes: clause alpha holds the three
// (variable index, sign) pairs output on address alpha.
inline std::vector<std::array<ExpandedLit, 3>> expanded_clauses(
    const Circuit& d) {
  std::vector<std::array<ExpandedLit, 3>> out;
  for (unsigned alpha = 0; alpha < (1u << d.n); ++alpha) {
    std::vector<bool> val = eval_circuit(d, alpha);
    std::array<ExpandedLit, 3> cl;
    for (int j = 0; j < 3; ++j) {
      unsigned v = 0;
      for (int i = 0; i < d.n; ++i)
        if (val[static_cast<size_t>(
                d.varBits[static_cast<size_t>(j)][static_cast<size_t>(i)])])
          v |= 1u << i;
      cl[static_cast<size_t>(j)] =
          ExpandedLit{v, val[static_cast<size_t>(
                             d.sigBit[static_cast<size_t>(j)])]};
    }
    out.push_back(cl);
  }
  return out;
}

// Brute-force satisfiability of the expanded formula (2^n variables).
inline bool succinct_sat_satisfiable(const Circuit& d) {
  if (d.n > 4) throw std::invalid_argument("succinct sat: n too large");
  auto clauses = expanded_clauses(d);
  unsigned nv = 1u << d.n;
  for (std::uint64_t asn = 0; asn < (1ull << nv); ++asn) {
    bool ok = true;
    for (const auto& cl : clauses) {
      bool sat = false;
      for (const auto& lit : cl)
        if (((asn >> lit.var) & 1ull) == (lit.sign ? 1ull : 0ull)) sat = true;
      if (!sat) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

// JSON format:
//   { "n": <count>,
//     "gates": [ {"id": "y0", "kind": "input"},
//                {"id": "g1", "kind": "nand", "in": ["y0", "g0"]} ... ],
//     "outputs": { "var1": ["y0", ...], "sig1": "g1",
//                  "var2": [...], "sig2": ..., "var3": [...], "sig3": ... } }
// Input gates are the address bits in order of appearance, least significant
// first; "var*" arrays are also least-significant-bit first.
inline Circuit circuit_from_json(const nlohmann::json& j) {
  Circuit d;
  d.n = j.at("n").get<int>();
  std::map<std::string, int> idx;
  for (const auto& gj : j.at("gates")) {
    Circuit::Gate g;
    std::string id = gj.at("id").get<std::string>();
    std::string kind = gj.at("kind").get<std::string>();
    if (kind == "input") {
      g.input = true;
      d.inputs.push_back(static_cast<int>(d.gates.size()));
    } else if (kind == "nand") {
      const auto& in = gj.at("in");
      g.in1 = idx.at(in.at(0).get<std::string>());
      g.in2 = idx.at(in.at(1).get<std::string>());
    } else {
      throw std::invalid_argument("circuit: unknown gate kind " + kind);
    }
    if (!idx.emplace(id, static_cast<int>(d.gates.size())).second)
      throw std::invalid_argument("circuit: duplicate gate id " + id);
    d.gates.push_back(g);
  }
  const auto& out = j.at("outputs");
  for (int lit = 0; lit < 3; ++lit) {
    std::string v = "var" + std::to_string(lit + 1);
    std::string sg = "sig" + std::to_string(lit + 1);
    for (const auto& id : out.at(v))
      d.varBits[static_cast<size_t>(lit)].push_back(
          idx.at(id.get<std::string>()));
    d.sigBit[static_cast<size_t>(lit)] = idx.at(out.at(sg).get<std::string>());
  }
  detail::validate_circuit(d);
  return d;
}

// ---------------------------------------------------------------------------
// Succinct SAT -> leader system
// ---------------------------------------------------------------------------

// The leader publishes a guessed assignment for all 2^n formula variables as
// a write sequence on g: polarity values alternating with the bsp(n)
// separators.  Environment threads pick a clause address, evaluate the
// circuit inside their own view, and chase the addressed assignment slot
// through the separator pattern; per-level reporters then enforce that every
// clause address was covered.

inline std::pair<SystemSpec, GoalSpec> succinct_sat_to_leader(
    const Circuit& d) {
  detail::validate_circuit(d);
  SystemSpec s;
  s.initValue = 0;
  s.regs = {"r"};
  // domain: 0 = initial, 1 = true slot, 2 = false slot, 2+j = separator j
  const int kDt = 1, kDf = 2;
  auto sep = [](int j) { return 2 + j; };
  s.dom = d.n + 3;

  int gVar = static_cast<int>(s.vars.size());
  s.vars.push_back("g");
  int sVar = static_cast<int>(s.vars.size());
  s.vars.push_back("s");
  std::vector<int> tAddr(static_cast<size_t>(d.n)), fAddr(tAddr.size());
  for (int i = 0; i < d.n; ++i) {
    tAddr[static_cast<size_t>(i)] = static_cast<int>(s.vars.size());
    s.vars.push_back("tu" + std::to_string(i));
    fAddr[static_cast<size_t>(i)] = static_cast<int>(s.vars.size());
    s.vars.push_back("fu" + std::to_string(i));
  }
  // per-gate value encoding; input gates alias the address variables
  std::vector<int> tNode(d.gates.size(), -1), fNode(d.gates.size(), -1);
  for (int i = 0; i < d.n; ++i) {
    tNode[static_cast<size_t>(d.inputs[static_cast<size_t>(i)])] =
        tAddr[static_cast<size_t>(i)];
    fNode[static_cast<size_t>(d.inputs[static_cast<size_t>(i)])] =
        fAddr[static_cast<size_t>(i)];
  }
  for (size_t k = 0; k < d.gates.size(); ++k) {
    if (d.gates[k].input) continue;
    tNode[k] = static_cast<int>(s.vars.size());
    s.vars.push_back("tg" + std::to_string(k));
    fNode[k] = static_cast<int>(s.vars.size());
    s.vars.push_back("fg" + std::to_string(k));
  }
  std::vector<int> a0(static_cast<size_t>(d.n)), a1(a0.size());
  for (int i = 0; i < d.n; ++i) {
    a0[static_cast<size_t>(i)] = static_cast<int>(s.vars.size());
    s.vars.push_back("a" + std::to_string(i) + "_0");
    a1[static_cast<size_t>(i)] = static_cast<int>(s.vars.size());
    s.vars.push_back("a" + std::to_string(i) + "_1");
  }

  auto readEq = [](int x, int dVal) {
    return Command::seq(
        Command::load(0, x),
        Command::assume(
            Expr::binary(ExprOp::Eq, Expr::regref(0), Expr::constant(dVal))));
  };
  auto write1 = [](int x) { return Command::store(x, RegOrLit::of_lit(1)); };

  // leader: one polarity guess per assignment slot, separators in between
  {
    std::vector<int> pattern = bsp(d.n);
    std::vector<CmdPtr> seq;
    for (int k = 0; k < (1 << d.n); ++k) {
      seq.push_back(Command::choice(Command::store(gVar, RegOrLit::of_lit(kDt)),
                                    Command::store(gVar, RegOrLit::of_lit(kDf))));
      if (k < (1 << d.n) - 1)
        seq.push_back(Command::store(
            gVar, RegOrLit::of_lit(sep(pattern[static_cast<size_t>(k)]))));
    }
    s.disPrograms.push_back(ThreadProg{"ldr", Role::Ldr, seq_all(seq)});
  }

  std::vector<CmdPtr> gadgets;

  // clause address chooser: a raised t-bit means address bit 0, a raised
  // f-bit means address bit 1; publish via s
  {
    std::vector<CmdPtr> seq;
    for (int i = 0; i < d.n; ++i)
      seq.push_back(Command::choice(write1(tAddr[static_cast<size_t>(i)]),
                                    write1(fAddr[static_cast<size_t>(i)])));
    seq.push_back(write1(sVar));
    gadgets.push_back(seq_all(seq));
  }

  // gate evaluation: node value 0 keeps f at the initial timestamp, value 1
  // keeps t there; NAND output derives from which inputs are still readable
  auto evalGate = [&](size_t k) {
    const auto& g = d.gates[k];
    return Command::choice(
        Command::seq(
            Command::choice(readEq(fNode[static_cast<size_t>(g.in1)], 0),
                            readEq(fNode[static_cast<size_t>(g.in2)], 0)),
            write1(fNode[k])),
        seq_all({readEq(tNode[static_cast<size_t>(g.in1)], 0),
                 readEq(tNode[static_cast<size_t>(g.in2)], 0),
                 write1(tNode[k])}));
  };

  // assignment chase for one literal: walk separators per address bit, read
  // the expected polarity innermost
  std::function<CmdPtr(int, int)> chase = [&](int lit, int level) -> CmdPtr {
    if (level == 0) {
      int sg = d.sigBit[static_cast<size_t>(lit)];
      return Command::choice(
          Command::seq(readEq(tNode[static_cast<size_t>(sg)], 0),
                       readEq(gVar, kDt)),
          Command::seq(readEq(fNode[static_cast<size_t>(sg)], 0),
                       readEq(gVar, kDf)));
    }
    int bitNode =
        d.varBits[static_cast<size_t>(lit)][static_cast<size_t>(level) - 1];
    return Command::choice(
        seq_all({readEq(tNode[static_cast<size_t>(bitNode)], 0),
                 readEq(gVar, sep(level)), chase(lit, level - 1)}),
        seq_all({readEq(fNode[static_cast<size_t>(bitNode)], 0),
                 chase(lit, level - 1), readEq(gVar, sep(level))}));
  };

  // clause checker: adopt a clause address, evaluate the circuit, verify one
  // literal against the leader's sequence, report the top address bit
  {
    std::vector<CmdPtr> seq;
    seq.push_back(readEq(sVar, 1));
    for (size_t k = 0; k < d.gates.size(); ++k)
      if (!d.gates[k].input) seq.push_back(evalGate(k));
    seq.push_back(
        choice_all({chase(0, d.n), chase(1, d.n), chase(2, d.n)}));
    int top = d.n - 1;
    seq.push_back(Command::choice(
        Command::seq(readEq(tAddr[static_cast<size_t>(top)], 0),
                     write1(a1[static_cast<size_t>(top)])),
        Command::seq(readEq(fAddr[static_cast<size_t>(top)], 0),
                     write1(a0[static_cast<size_t>(top)]))));
    gadgets.push_back(seq_all(seq));
  }

  // coverage reporters for address bits n-2 .. 0
  for (int i = 0; i + 1 < d.n; ++i) {
    gadgets.push_back(seq_all(
        {readEq(a0[static_cast<size_t>(i) + 1], 1),
         readEq(a1[static_cast<size_t>(i) + 1], 1),
         Command::choice(
             Command::seq(readEq(tAddr[static_cast<size_t>(i)], 0),
                          write1(a1[static_cast<size_t>(i)])),
             Command::seq(readEq(fAddr[static_cast<size_t>(i)], 0),
                          write1(a0[static_cast<size_t>(i)])))}));
  }

  gadgets.push_back(
      seq_all({readEq(a0[0], 1), readEq(a1[0], 1), Command::assert_false()}));

  s.envProgram = ThreadProg{"contrib", Role::Env, choice_all(gadgets)};
  return assert_to_goal(s);
}

// ---------------------------------------------------------------------------
// Sequentializing distinguished threads into environment code
// ---------------------------------------------------------------------------

// Layout of the variables and domain values the transformation introduces.
struct SequentializeInfo {
  std::vector<int> lockVar;                // per program: the hand-over lock
  std::vector<std::vector<int>> shadowVar; // per program, per register
  std::vector<std::string> newVarNames;    // appended after the original vars
  int lambdaBot = -1;                      // "in progress" lock value
  int newDom = -1;
  std::vector<int> stateBase;  // per program: value of control state 1
};

// Rewrites each program's transition system into one-transition fragments:
// a CAS on the program's lock claims the current control state, the shadow
// variables restore the register file, the original instruction runs, the
// registers are saved back and the lock releases to the successor state.
// Control state 0 encodes as value 0 (the initial value), the remaining
// states and the in-progress marker become fresh values above the domain.
inline CmdPtr dis_to_env_acyc(const std::vector<CmdPtr>& programs, int numVars,
                              int numRegs, int dom,
                              SequentializeInfo* infoOut = nullptr) {
  SequentializeInfo info;
  std::vector<LTS> ltss;
  int next = dom;
  for (size_t i = 0; i < programs.size(); ++i) {
    ltss.push_back(to_lts(programs[i]));
    info.stateBase.push_back(next);
    next += ltss.back().numStates - 1;
  }
  info.lambdaBot = next;
  info.newDom = next + 1;

  int v = numVars;
  for (size_t i = 0; i < programs.size(); ++i) {
    info.lockVar.push_back(v++);
    info.newVarNames.push_back("lock" + std::to_string(i));
    info.shadowVar.emplace_back();
    for (int r = 0; r < numRegs; ++r) {
      info.shadowVar.back().push_back(v++);
      info.newVarNames.push_back("save" + std::to_string(i) + "_" +
                                 std::to_string(r));
    }
  }

  auto enc = [&](size_t i, int state) {
    return state == 0 ? 0 : info.stateBase[i] + state - 1;
  };

  std::vector<CmdPtr> fragments;
  for (size_t i = 0; i < programs.size(); ++i) {
    for (const auto& edge : ltss[i].edges) {
      std::vector<CmdPtr> seq;
      seq.push_back(Command::cas(info.lockVar[i],
                                 RegOrLit::of_lit(enc(i, edge.from)),
                                 RegOrLit::of_lit(info.lambdaBot)));
      for (int r = 0; r < numRegs; ++r)
        seq.push_back(
            Command::load(r, info.shadowVar[i][static_cast<size_t>(r)]));
      seq.push_back(edge.label);
      for (int r = 0; r < numRegs; ++r)
        seq.push_back(Command::store(info.shadowVar[i][static_cast<size_t>(r)],
                                     RegOrLit::of_reg(r)));
      seq.push_back(Command::cas(info.lockVar[i],
                                 RegOrLit::of_lit(info.lambdaBot),
                                 RegOrLit::of_lit(enc(i, edge.to))));
      fragments.push_back(seq_all(seq));
    }
  }
  if (infoOut) *infoOut = info;
  return choice_all(fragments);
}

// Whole-system convenience: replaces the distinguished programs of s by the
// sequentialized environment program.  Requires initial value 0 so that the
// locks start at control state 0 and the shadow variables match the all-zero
// initial register file.
inline SystemSpec dis_to_env_system(const SystemSpec& s) {
  if (s.initValue != 0)
    throw std::invalid_argument("dis_to_env: requires initial value 0");
  if (s.envProgram)
    throw std::invalid_argument("dis_to_env: expects a dis-only system");
  std::vector<CmdPtr> programs;
  for (const auto& t : s.disPrograms) programs.push_back(t.body);
  SequentializeInfo info;
  CmdPtr env = dis_to_env_acyc(programs, static_cast<int>(s.vars.size()),
                               static_cast<int>(s.regs.size()), s.dom, &info);
  SystemSpec out = s;
  out.disPrograms.clear();
  for (const auto& nm : info.newVarNames) out.vars.push_back(nm);
  out.dom = info.newDom;
  out.envProgram = ThreadProg{"seq", Role::Env, env};
  return out;
}

// ---------------------------------------------------------------------------
// Bundled examples
// ---------------------------------------------------------------------------

struct Example {
  std::string name;
  SystemSpec system;
  GoalSpec goal;
};

// Two flag-based mutual-exclusion threads; the goal marks both threads being
// inside their critical sections at once, which release-acquire allows.
inline SystemSpec dekker_system() {
  SystemSpec s;
  s.vars = {"x", "y", "c"};
  s.dom = 2;
  s.regs = {"r"};
  CmdPtr t1 = seq_all(
      {Command::store(0, RegOrLit::of_lit(1)), Command::load(0, 1),
       Command::assume(
           Expr::binary(ExprOp::Eq, Expr::regref(0), Expr::constant(0))),
       Command::store(2, RegOrLit::of_lit(1))});
  CmdPtr t2 = seq_all(
      {Command::store(1, RegOrLit::of_lit(1)), Command::load(0, 0),
       Command::assume(
           Expr::binary(ExprOp::Eq, Expr::regref(0), Expr::constant(0))),
       Command::load(0, 2),
       Command::assume(
           Expr::binary(ExprOp::Eq, Expr::regref(0), Expr::constant(1))),
       Command::assert_false()});
  s.disPrograms.push_back(ThreadProg{"t1", Role::Dis, t1});
  s.disPrograms.push_back(ThreadProg{"t2", Role::Dis, t2});
  return s;
}

inline Example dekker_example() {
  auto [sys, goal] = assert_to_goal(dekker_system());
  return Example{"dekker", sys, goal};
}

// Producers publish values 1..l once the consumer opens the channel; the
// consumer (leader) demands the cyclic sequence for z rounds, which the
// environment can satisfy for any z.
inline SystemSpec prodcons_system(int l, int z) {
  if (l < 1 || z < 1) throw std::invalid_argument("prodcons: l, z >= 1");
  SystemSpec s;
  s.vars = {"x", "y"};
  s.dom = l + 1;
  s.regs = {"r"};
  std::vector<CmdPtr> stores;
  for (int vv = 1; vv <= l; ++vv)
    stores.push_back(Command::store(0, RegOrLit::of_lit(vv)));
  CmdPtr producer = seq_all(
      {Command::load(0, 1),
       Command::assume(
           Expr::binary(ExprOp::Eq, Expr::regref(0), Expr::constant(1))),
       choice_all(stores)});
  std::vector<CmdPtr> cons{Command::store(1, RegOrLit::of_lit(1))};
  for (int i = 1; i <= z; ++i) {
    cons.push_back(Command::load(0, 0));
    cons.push_back(Command::assume(Expr::binary(
        ExprOp::Eq, Expr::regref(0), Expr::constant(((i - 1) % l) + 1))));
  }
  cons.push_back(Command::assert_false());
  s.envProgram = ThreadProg{"producer", Role::Env, producer};
  s.disPrograms.push_back(ThreadProg{"consumer", Role::Ldr, seq_all(cons)});
  return s;
}

inline Example prodcons_example(int l, int z) {
  auto [sys, goal] = assert_to_goal(prodcons_system(l, z));
  return Example{"prodcons", sys, goal};
}

inline Example smoke_example() {
  SystemSpec s;
  s.vars = {"x"};
  s.dom = 2;
  s.regs = {"r"};
  s.disPrograms.push_back(ThreadProg{
      "t", Role::Dis,
      seq_all({Command::store(0, RegOrLit::of_lit(1)), Command::load(0, 0),
               Command::assume(Expr::binary(ExprOp::Eq, Expr::regref(0),
                                            Expr::constant(1)))})});
  return Example{"smoke", s, GoalSpec{0, 1}};
}

// File-friendly variant of the smoke test: the final assertion marks the
// interesting point, so the emitted program carries its own goal.
inline SystemSpec smoke_system() {
  SystemSpec s;
  s.vars = {"x"};
  s.dom = 2;
  s.regs = {"r"};
  s.disPrograms.push_back(ThreadProg{
      "t", Role::Dis,
      seq_all({Command::store(0, RegOrLit::of_lit(1)), Command::load(0, 0),
               Command::assume(Expr::binary(ExprOp::Eq, Expr::regref(0),
                                            Expr::constant(1))),
               Command::assert_false()})});
  return s;
}

inline std::vector<Example> builtin_examples() {
  return {dekker_example(), prodcons_example(2, 3), smoke_example()};
}

}  // namespace raver
