#include <catch_amalgamated.hpp>

#include <random>

#include "raver/abstract.hpp"
#include "raver/concrete.hpp"
#include "raver/parser.hpp"
#include "raver/reductions.hpp"

using namespace raver;

namespace {

// forall u0 exists e1 forall u1 with e1 forced to track u0: true
Qbf tracking_qbf() {
  Qbf q;
  q.n = 1;
  q.clauses = {
      {QbfLit{Qbf::u(0), false}, QbfLit{Qbf::e(1), true}, QbfLit{Qbf::u(1), false}},
      {QbfLit{Qbf::u(0), true}, QbfLit{Qbf::e(1), false}, QbfLit{Qbf::u(1), false}},
      {QbfLit{Qbf::u(0), false}, QbfLit{Qbf::e(1), true}, QbfLit{Qbf::u(1), true}},
      {QbfLit{Qbf::u(0), true}, QbfLit{Qbf::e(1), false}, QbfLit{Qbf::u(1), true}}};
  return q;
}

// forall u0 ... (u0 or u0 or u0): false at u0 = 0
Qbf falsified_qbf() {
  Qbf q;
  q.n = 1;
  q.clauses = {{QbfLit{Qbf::u(0), false}, QbfLit{Qbf::u(0), false},
                QbfLit{Qbf::u(0), false}}};
  return q;
}

bool greedy_match(const std::vector<int>& pattern, const std::vector<int>& s) {
  size_t pos = 0;
  for (int tok : pattern) {
    while (pos < s.size() && s[pos] != tok) ++pos;
    if (pos == s.size()) return false;
    ++pos;
  }
  return true;
}

Circuit positive_unit_circuit() {
  // clause alpha is (x_alpha v x_alpha v x_alpha): satisfiable
  nlohmann::json cj = {
      {"n", 1},
      {"gates",
       {{{"id", "y0"}, {"kind", "input"}},
        {{"id", "n1"}, {"kind", "nand"}, {"in", {"y0", "y0"}}},
        {{"id", "one"}, {"kind", "nand"}, {"in", {"y0", "n1"}}}}},
      {"outputs",
       {{"var1", {"y0"}}, {"sig1", "one"}, {"var2", {"y0"}}, {"sig2", "one"},
        {"var3", {"y0"}}, {"sig3", "one"}}}};
  return circuit_from_json(cj);
}

Circuit contradictory_circuit() {
  // both clauses constrain x0, with opposite signs: unsatisfiable
  nlohmann::json cj = {
      {"n", 1},
      {"gates",
       {{{"id", "y0"}, {"kind", "input"}},
        {{"id", "n1"}, {"kind", "nand"}, {"in", {"y0", "y0"}}},
        {{"id", "one"}, {"kind", "nand"}, {"in", {"y0", "n1"}}},
        {{"id", "zero"}, {"kind", "nand"}, {"in", {"one", "one"}}}}},
      {"outputs",
       {{"var1", {"zero"}}, {"sig1", "n1"}, {"var2", {"zero"}}, {"sig2", "n1"},
        {"var3", {"zero"}}, {"sig3", "n1"}}}};
  return circuit_from_json(cj);
}

CmdPtr random_loopfree_cmd(std::mt19937& rng, int nInstr, int nVars, int dom) {
  std::vector<CmdPtr> seq;
  for (int i = 0; i < nInstr; ++i) {
    int x = static_cast<int>(rng() % static_cast<unsigned>(nVars));
    int d = static_cast<int>(rng() % static_cast<unsigned>(dom));
    switch (rng() % 5u) {
      case 0: seq.push_back(Command::store(x, RegOrLit::of_lit(d))); break;
      case 1: seq.push_back(Command::store(x, RegOrLit::of_reg(0))); break;
      case 2: seq.push_back(Command::load(0, x)); break;
      case 3:
        seq.push_back(Command::assume(
            Expr::binary(ExprOp::Eq, Expr::regref(0), Expr::constant(d))));
        break;
      default:
        seq.push_back(Command::choice(Command::store(x, RegOrLit::of_lit(d)),
                                      Command::load(0, x)));
        break;
    }
  }
  return seq_all(seq);
}

}  // namespace

TEST_CASE("qbf evaluation by assignment recursion") {
  CHECK(eval_qbf(tracking_qbf()));
  CHECK_FALSE(eval_qbf(falsified_qbf()));
  Qbf taut;
  taut.n = 1;
  taut.clauses = {{QbfLit{Qbf::u(0), false}, QbfLit{Qbf::u(0), true},
                   QbfLit{Qbf::e(1), false}}};
  CHECK(eval_qbf(taut));
  Qbf bad;
  bad.n = 5;
  bad.clauses = taut.clauses;
  CHECK_THROWS_AS(eval_qbf(bad), std::invalid_argument);
}

TEST_CASE("qbf systems are generable exactly when the formula holds") {
  auto [st, gt] = qbf_to_purera(tracking_qbf());
  CHECK(check_message_generation(compile(st), gt).status ==
        MgStatus::Generable);
  auto [sf, gf] = qbf_to_purera(falsified_qbf());
  CHECK(check_message_generation(compile(sf), gf).status ==
        MgStatus::NotGenerable);
}

TEST_CASE("qbf systems are loop-free, swap-free and write only ones") {
  auto [s, goal] = qbf_to_purera(tracking_qbf());
  REQUIRE(s.envProgram);
  ClassFlags f = classify(*s.envProgram->body);
  CHECK(f.acyc);
  CHECK(f.nocas);
  std::function<void(const CmdPtr&)> walk = [&](const CmdPtr& c) {
    if (c->kind == CmdKind::Store && c->var != goal.var) {
      CHECK_FALSE(c->src.is_reg());
      CHECK(c->src.lit == 1);
    }
    if (c->left) walk(c->left);
    if (c->right) walk(c->right);
  };
  walk(s.envProgram->body);
}

TEST_CASE("random small qbf instances agree with the evaluator") {
  std::mt19937 rng(20260826);
  for (int it = 0; it < 12; ++it) {
    Qbf q;
    q.n = 1;
    int nc = 1 + static_cast<int>(rng() % 4);
    for (int c = 0; c < nc; ++c) {
      std::array<QbfLit, 3> cl;
      for (auto& lit : cl)
        lit = QbfLit{static_cast<int>(rng() % 3u), (rng() & 1u) != 0};
      q.clauses.push_back(cl);
    }
    auto [s, goal] = qbf_to_purera(q);
    bool verdict =
        check_message_generation(compile(s), goal).status == MgStatus::Generable;
    INFO("instance " << it);
    CHECK(verdict == eval_qbf(q));
  }
}

TEST_CASE("binary search pattern unfolds recursively") {
  CHECK(bsp(1) == std::vector<int>{1});
  CHECK(bsp(2) == std::vector<int>{1, 2, 1});
  CHECK(bsp(3) == std::vector<int>{1, 2, 1, 3, 1, 2, 1});
  CHECK_THROWS_AS(bsp(0), std::invalid_argument);
  for (int n = 1; n <= 6; ++n) {
    std::vector<int> p = bsp(n);
    REQUIRE(p.size() == (1u << n) - 1);
    int count = 0;
    for (size_t i = 0; i < p.size(); ++i)
      if (p[i] == n) {
        ++count;
        CHECK(i == p.size() / 2);
      }
    CHECK(count == 1);
  }
}

TEST_CASE("access patterns address one assignment slot") {
  CHECK(access_pattern(3, 0b110, false) ==
        std::vector<int>{3, 2, kApFalse, 1});
  CHECK(access_pattern(3, 0b100, false) ==
        std::vector<int>{3, kApFalse, 1, 2});
  CHECK(access_pattern(1, 0, true) == std::vector<int>{kApTrue, 1});
}

TEST_CASE("greedy pattern match picks out exactly the addressed slot") {
  for (int n = 1; n <= 3; ++n) {
    unsigned slots = 1u << n;
    for (unsigned wBits = 0; wBits < (1u << slots); ++wBits) {
      std::vector<bool> w(slots);
      for (unsigned k = 0; k < slots; ++k) w[k] = (wBits >> k) & 1u;
      std::vector<int> s = shuffle_sequence(n, w);
      for (unsigned beta = 0; beta < slots; ++beta)
        for (bool sigma : {false, true}) {
          bool hit = greedy_match(access_pattern(n, beta, sigma), s);
          if (hit != (w[beta] == sigma)) {
            INFO("n=" << n << " w=" << wBits << " beta=" << beta
                      << " sigma=" << sigma);
            REQUIRE(hit == (w[beta] == sigma));
          }
        }
    }
  }
}

TEST_CASE("circuit expansion and brute-force satisfiability") {
  Circuit sat = positive_unit_circuit();
  auto cls = expanded_clauses(sat);
  REQUIRE(cls.size() == 2);
  CHECK(cls[0][0].var == 0);
  CHECK(cls[0][0].sign);
  CHECK(cls[1][0].var == 1);
  CHECK(succinct_sat_satisfiable(sat));
  CHECK_FALSE(succinct_sat_satisfiable(contradictory_circuit()));
}

TEST_CASE("leader systems decide the succinct formula") {
  {
    auto [s, goal] = succinct_sat_to_leader(positive_unit_circuit());
    REQUIRE(s.envProgram);
    ClassFlags f = classify(*s.envProgram->body);
    CHECK(f.acyc);
    CHECK(f.nocas);
    CHECK(verify_leader(compile(s), goal).status == MgStatus::Generable);
  }
  {
    auto [s, goal] = succinct_sat_to_leader(contradictory_circuit());
    CHECK(verify_leader(compile(s), goal).status == MgStatus::NotGenerable);
  }
}

TEST_CASE("sequentialization emits one lock-bracketed fragment per edge") {
  // one store instruction, two registers
  CmdPtr prog = Command::store(0, RegOrLit::of_reg(1));
  SequentializeInfo info;
  CmdPtr env = dis_to_env_acyc({prog}, 1, 2, 2, &info);
  CHECK(instruction_count(*env) == 2 * 2 + 3);
  CHECK(classify(*env).acyc);
  CHECK_FALSE(classify(*env).nocas);
  CHECK(info.newVarNames.size() == 3);  // lock + two shadows
  CHECK(info.newDom == 4);  // domain {0,1} plus one extra state and the marker

  // a 2-edge and a 3-edge program yield 2 + 3 fragments
  CmdPtr p2 = Command::seq(Command::load(0, 0), Command::store(0, RegOrLit::of_reg(0)));
  CmdPtr p3 = seq_all({Command::load(0, 0), Command::load(1, 0),
                       Command::store(0, RegOrLit::of_reg(1))});
  CmdPtr env2 = dis_to_env_acyc({p2, p3}, 1, 2, 2, nullptr);
  int fragments = 0;
  std::function<void(const CmdPtr&)> count = [&](const CmdPtr& c) {
    if (c->kind == CmdKind::Choice) {
      count(c->left);
      count(c->right);
    } else {
      ++fragments;
    }
  };
  count(env2);
  CHECK(fragments == 5);
  CHECK(instruction_count(*env2) == 5 * (2 * 2 + 3));
}

TEST_CASE("sequentialization preserves goal reachability on small systems") {
  std::mt19937 rng(20260826);
  for (int it = 0; it < 6; ++it) {
    SystemSpec s;
    s.vars = {"x0", "x1"};
    s.dom = 2;
    s.regs = {"r0"};
    int nDis = 1 + static_cast<int>(rng() % 2);
    int total = 0;
    for (int t = 0; t < nDis; ++t) {
      int ni = 1 + static_cast<int>(rng() % 3);
      total += ni + 1;
      s.disPrograms.push_back(ThreadProg{"d" + std::to_string(t), Role::Dis,
                                         random_loopfree_cmd(rng, ni, 2, 2)});
    }
    GoalSpec goal{0, 1};
    auto orig = explore_concrete(compile(s), 0, 16, 10, goal);
    SystemSpec tx = dis_to_env_system(s);
    auto trans = explore_concrete(compile(tx), 2 * total,
                                  2 * total * (2 + 3) + 4, 40, goal);
    INFO("system " << it << ":\n" << print_system(s));
    CHECK((orig.status == SearchStatus::Reachable) ==
          (trans.status == SearchStatus::Reachable));
  }
}

TEST_CASE("bundled examples behave as documented") {
  Example sm = smoke_example();
  CHECK(check_message_generation(compile(sm.system), sm.goal).status ==
        MgStatus::Generable);
  Example dk = dekker_example();
  CHECK(explore_concrete(compile(dk.system), 0, 20, 10, dk.goal).status ==
        SearchStatus::Reachable);
  Example pc = prodcons_example(2, 3);
  CHECK(verify_leader(compile(pc.system), pc.goal).status ==
        MgStatus::Generable);
  CHECK(builtin_examples().size() == 3);
}
