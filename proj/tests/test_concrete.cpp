#include <catch_amalgamated.hpp>

#include "raver/parser.hpp"
#include "raver/trace_algebra.hpp"
#include "raver/trace_json.hpp"

using namespace raver;

static const char* kDekker = R"(
vars x, y, c;
domain 2;
regs r1, r2;

dis t1 {
  store x 1;
  r1 := load y;
  assume(r1 = 0);
  store c 1
}

dis t2 {
  store y 1;
  r2 := load x;
  assume(r2 = 0);
  r2 := load c;
  assume(r2 = 1);
  assert(false)
}
)";

TEST_CASE("store then load joins views") {
  auto s = parse_system(
      "vars x, y; domain 2; regs r; dis a { store x 1 } dis b { r := load x }");
  CompiledSystem cs = compile(s);
  Config cf = initial_config(cs, 0);
  auto succ = step_concrete(cs, cf, 0, 4);
  // stores at timestamps 1..4
  REQUIRE(succ.size() == 4);
  CHECK(succ[0].step.msgs[0].own_ts() == 1);
  Config after = succ[0].next;
  CHECK(after.memory.size() == 3);
  auto loads = step_concrete(cs, after, 1, 4);
  // reader can take the initial message or the new one
  REQUIRE(loads.size() == 2);
  bool sawNew = false;
  for (const auto& l : loads)
    if (l.step.msgs[0].val == 1) {
      sawNew = true;
      CHECK(l.next.threads[1].view[0] == 1);
      CHECK(l.next.threads[1].view[1] == 0);
      CHECK(l.next.threads[1].rv[0] == 1);
    }
  CHECK(sawNew);
}

TEST_CASE("loads below the view are forbidden") {
  auto s = parse_system(
      "vars x; domain 2; regs r; dis a { store x 1; r := load x }");
  CompiledSystem cs = compile(s);
  Config cf = initial_config(cs, 0);
  Config after = step_concrete(cs, cf, 0, 2)[0].next;
  auto loads = step_concrete(cs, after, 0, 2);
  REQUIRE(loads.size() == 1);  // only the thread's own message remains readable
  CHECK(loads[0].step.msgs[0].val == 1);
}

TEST_CASE("compare-and-swap needs an adjacent free slot") {
  auto s = parse_system(
      "vars x; domain 3; regs r; dis a { cas(x, 0, 2) } dis b { store x 1 }");
  CompiledSystem cs = compile(s);
  Config cf = initial_config(cs, 0);
  // initially the slot above the initial message is free
  auto c1 = step_concrete(cs, cf, 0, 4);
  REQUIRE(c1.size() == 1);
  CHECK(c1[0].step.msgs[0].own_ts() == 0);
  CHECK(c1[0].step.msgs[1].own_ts() == 1);
  // after b stores at timestamp 1, the swap on the initial message is blocked
  Config blocked = cf;
  for (const auto& sc : step_concrete(cs, cf, 1, 4))
    if (sc.step.msgs[0].own_ts() == 1) blocked = sc.next;
  auto c2 = step_concrete(cs, blocked, 0, 4);
  CHECK(c2.empty());
}

TEST_CASE("mutual exclusion violation is found") {
  auto [s, goal] = assert_to_goal(parse_system(kDekker));
  CompiledSystem cs = compile(s);
  auto res = explore_concrete(cs, 0, 12, 12, goal);
  REQUIRE(res.status == SearchStatus::Reachable);
  auto vr = validate_run(cs, res.trace);
  INFO(vr.ruleViolated << " at " << vr.stepIndex);
  CHECK(vr.valid);
  bool goalStored = false;
  for (const auto& st : res.trace.steps)
    for (const auto& m : st.msgs)
      if (m.var == goal.var && m.val == goal.val) goalStored = true;
  CHECK(goalStored);
}

TEST_CASE("sequentially consistent discipline keeps the program safe") {
  // without a second run of t1 there is no way to see c=1 and x=0
  const char* safe = R"(
vars x;
domain 2;
regs r;
dis t {
  r := load x;
  assume(r = 1);
  assert(false)
}
)";
  auto [s, goal] = assert_to_goal(parse_system(safe));
  CompiledSystem cs = compile(s);
  auto res = explore_concrete(cs, 0, 10, 10, goal);
  CHECK(res.status == SearchStatus::NotFound);
  CHECK(res.exhausted);
}

TEST_CASE("environment replicas are interchangeable") {
  const char* text = R"(
vars x, g;
domain 2;
regs r;
env e { store x 1 }
dis t {
  r := load x;
  assume(r = 1);
  assert(false)
}
)";
  auto [s, goal] = assert_to_goal(parse_system(text));
  CompiledSystem cs = compile(s);
  auto none = explore_concrete(cs, 0, 8, 8, goal);
  CHECK(none.status == SearchStatus::NotFound);
  auto one = explore_concrete(cs, 1, 8, 8, goal);
  REQUIRE(one.status == SearchStatus::Reachable);
  CHECK(validate_run(cs, one.trace).valid);
  auto three = explore_concrete(cs, 3, 8, 8, goal);
  CHECK(three.status == SearchStatus::Reachable);
}

TEST_CASE("validation rejects tampered traces") {
  auto [s, goal] = assert_to_goal(parse_system(kDekker));
  CompiledSystem cs = compile(s);
  auto res = explore_concrete(cs, 0, 12, 12, goal);
  REQUIRE(res.status == SearchStatus::Reachable);

  SECTION("wrong value") {
    Trace t = res.trace;
    for (auto& st : t.steps)
      if (st.kind == StepKind::St) {
        st.msgs[0].val = 1 - st.msgs[0].val;
        break;
      }
    CHECK(!validate_run(cs, t).valid);
  }
  SECTION("view lowered below the message timestamp") {
    Trace t = res.trace;
    for (auto& st : t.steps)
      if (st.kind == StepKind::St) {
        st.msgs[0].view[static_cast<size_t>(st.msgs[0].var)] = 0;
        break;
      }
    CHECK(!validate_run(cs, t).valid);
  }
  SECTION("dropped step breaks control flow") {
    Trace t = res.trace;
    t.steps.erase(t.steps.begin());
    CHECK(!validate_run(cs, t).valid);
  }
}

TEST_CASE("trace serialization round-trips") {
  auto [s, goal] = assert_to_goal(parse_system(kDekker));
  CompiledSystem cs = compile(s);
  auto res = explore_concrete(cs, 0, 12, 12, goal);
  REQUIRE(res.status == SearchStatus::Reachable);
  json j = trace_to_json(res.trace, s);
  Trace back = trace_from_json(json::parse(j.dump()), s);
  CHECK(validate_run(cs, back).valid);
  CHECK(trace_to_json(back, s) == j);
}

TEST_CASE("timestamp strings parse in both readings") {
  CHECK(ts_to_string(abs_nat(3), true) == "3");
  CHECK(ts_to_string(abs_plus(3), true) == "3+");
  CHECK(ts_from_string("3+", true) == abs_plus(3));
  CHECK(ts_from_string("7", false) == 7);
  CHECK_THROWS(ts_from_string("7+", false));
}

TEST_CASE("relifting timestamps preserves validity") {
  auto [s, goal] = assert_to_goal(parse_system(kDekker));
  CompiledSystem cs = compile(s);
  auto res = explore_concrete(cs, 0, 12, 12, goal);
  REQUIRE(res.status == SearchStatus::Reachable);
  auto used = used_timestamps(cs, res.trace);
  TsMaps mu(s.vars.size());
  for (size_t x = 0; x < mu.size(); ++x)
    for (Ts t : used[x]) mu[x][t] = 2 * t;
  Trace lifted = lift_trace(cs, res.trace, mu);
  CHECK(validate_run(cs, lifted).valid);
  for (size_t i = 0; i < lifted.steps.size(); ++i)
    for (size_t k = 0; k < lifted.steps[i].msgs.size(); ++k)
      CHECK(lifted.steps[i].msgs[k].own_ts() ==
            2 * res.trace.steps[i].msgs[k].own_ts());
  // non-monotone maps are rejected
  TsMaps bad = mu;
  bad[0][1] = 9;
  bad[0][2] = 8;
  if (used[0].count(1) && used[0].count(2))
    CHECK_THROWS_AS(lift_trace(cs, res.trace, bad), TraceAlgebraError);
}

TEST_CASE("relifting refuses to split a compare-and-swap pair") {
  auto s = parse_system("vars x; domain 3; regs r; dis a { cas(x, 0, 2) }");
  CompiledSystem cs = compile(s);
  GoalSpec goal{0, 2};
  auto res = explore_concrete(cs, 0, 4, 4, goal);
  REQUIRE(res.status == SearchStatus::Reachable);
  TsMaps mu(1);
  mu[0][0] = 0;
  mu[0][1] = 5;  // write must land at read + 1
  CHECK_THROWS_AS(lift_trace(cs, res.trace, mu), TraceAlgebraError);
  mu[0][1] = 1;
  CHECK(validate_run(cs, lift_trace(cs, res.trace, mu)).valid);
}

TEST_CASE("runs agreeing on distinguished messages can be superposed") {
  const char* text = R"(
vars x, y;
domain 3;
regs r;
env e { r := load x; store y 1; store x 2 }
)";
  auto s = parse_system(text);
  CompiledSystem cs = compile(s);
  GoalSpec g1{s.var_index("y"), 1};
  auto a = explore_concrete(cs, 1, 6, 3, g1);
  REQUIRE(a.status == SearchStatus::Reachable);
  GoalSpec g2{s.var_index("x"), 2};
  auto b = explore_concrete(cs, 1, 6, 6, g2);
  REQUIRE(b.status == SearchStatus::Reachable);
  // shift b's environment timestamps above a's so the union is conflict-free
  auto used = used_timestamps(cs, b.trace);
  TsMaps mu(s.vars.size());
  for (size_t x = 0; x < mu.size(); ++x)
    for (Ts t : used[x]) mu[x][t] = t == 0 ? 0 : t + 6;
  Trace bShift = lift_trace(cs, b.trace, mu);
  Trace sup = superpose(cs, a.trace, bShift);
  Config fin;
  CHECK(validate_run(cs, sup, &fin).valid);
  size_t withY = 0, withX2 = 0;
  for (const auto& m : fin.memory) {
    if (m.var == s.var_index("y") && m.val == 1) ++withY;
    if (m.var == s.var_index("x") && m.val == 2) ++withX2;
  }
  CHECK(withY >= 1);
  CHECK(withX2 >= 1);
}

TEST_CASE("superposition requires matching distinguished messages") {
  auto [s, goal] = assert_to_goal(parse_system(kDekker));
  CompiledSystem cs = compile(s);
  auto res = explore_concrete(cs, 0, 12, 12, goal);
  REQUIRE(res.status == SearchStatus::Reachable);
  Trace shorter = res.trace;
  shorter.steps.pop_back();
  // fewer distinguished stores on one side
  CHECK_THROWS_AS(superpose(cs, res.trace, shorter), TraceAlgebraError);
}

TEST_CASE("an environment message can be duplicated at a higher timestamp") {
  const char* text = R"(
vars x, y;
domain 3;
regs r;
env e { store y 1; r := load y; store x 1 }
dis t { store x 2 }
)";
  auto s = parse_system(text);
  CompiledSystem cs = compile(s);
  GoalSpec g{s.var_index("x"), 1};
  auto res = explore_concrete(cs, 1, 8, 8, g);
  REQUIRE(res.status == SearchStatus::Reachable);
  size_t storeStep = res.trace.steps.size();
  for (size_t i = 0; i < res.trace.steps.size(); ++i) {
    const auto& st = res.trace.steps[i];
    if (st.kind == StepKind::St &&
        res.trace.initial.roles[static_cast<size_t>(st.tid)] == Role::Env &&
        st.msgs[0].var == g.var)
      storeStep = i;
  }
  REQUIRE(storeStep < res.trace.steps.size());
  Ts orig = res.trace.steps[storeStep].msgs[0].own_ts();
  size_t xv = static_cast<size_t>(g.var);

  for (Ts tStar : {Ts(0), orig, Ts(orig + 3)}) {
    auto rep = replicate_env_message(cs, res.trace, storeStep, tStar);
    CHECK(validate_run(cs, rep.trace).valid);
    CHECK(rep.copy.var == g.var);
    CHECK(rep.copy.val == 1);
    CHECK(rep.copy.own_ts() != rep.original.own_ts());
    // the duplicate reaches at least the requested image
    CHECK(rep.copy.view[xv] >= rep.tStarImage);
    // and stays below later distinguished timestamps
    Config fin;
    validate_run(cs, rep.trace, &fin);
    for (const auto& m : fin.memory)
      if (m.var == g.var && m.genDis >= 0) {
        bool later = false;
        for (auto [t, img] : rep.mu1[xv])
          if (img == m.own_ts() &&
              t >= std::max(tStar, res.trace.steps[storeStep]
                                       .msgs[0]
                                       .view[xv]))
            later = true;
        if (later) CHECK(rep.copy.view[xv] <= m.own_ts());
      }
    // on other variables the duplicate does not overtake the original
    for (size_t yv = 0; yv < s.vars.size(); ++yv)
      if (yv != xv) CHECK(rep.copy.view[yv] <= rep.original.view[yv]);
  }
}
