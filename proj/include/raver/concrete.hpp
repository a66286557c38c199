#pragma once
// Concrete release-acquire semantics: per-thread successor enumeration,
// trace validation, and bounded reachability search.
//
// The search canonicalizes timestamps: per variable, message timestamps are
// kept contiguous (0..k) and a store is an *insertion* into the per-variable
// order (shifting later timestamps up), which captures exactly the
// equivalence classes under order-preserving timestamp relifting.  CAS pairs
// are recorded as welds: no later store may be inserted between them.

#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <unordered_map>

#include "state.hpp"

namespace raver {

// ---------------------------------------------------------------------------
// Plain successor enumeration (spec-level rules; used by tests and replay)
// ---------------------------------------------------------------------------

struct ConcreteSucc {
  Step step;
  Config next;
};

// All successors of cf for thread tid.  Store timestamps are enumerated over
// unused integer slots in (view(x), tsHorizon].
inline std::vector<ConcreteSucc> step_concrete(const CompiledSystem& cs,
                                               const Config& cf, int tid,
                                               Ts tsHorizon) {
  std::vector<ConcreteSucc> res;
  const LTS& lts = cs.lts_for(cf, tid);
  const LocalConfig& lc = cf.threads[static_cast<size_t>(tid)];
  int dom = cs.spec.dom;

  auto push = [&](const Command& c, int edge, std::vector<Message> msgs,
                  LocalConfig nlc, std::vector<Message> newMsgs) {
    ConcreteSucc sc;
    sc.step = Step{tid, kind_of(c), edge, std::move(msgs)};
    sc.next = cf;
    sc.next.threads[static_cast<size_t>(tid)] = std::move(nlc);
    for (auto& m : newMsgs) sc.next.memory.push_back(std::move(m));
    res.push_back(std::move(sc));
  };

  auto used_on = [&](int x) {
    std::set<Ts> used;
    for (const auto& m : cf.memory)
      if (m.var == x) used.insert(m.own_ts());
    return used;
  };

  for (int edge : lts.out[static_cast<size_t>(lc.ctrl)]) {
    const auto& e = lts.edges[static_cast<size_t>(edge)];
    const Command& c = *e.label;
    switch (c.kind) {
      case CmdKind::Skip: {
        LocalConfig n = lc;
        n.ctrl = e.to;
        push(c, edge, {}, n, {});
        break;
      }
      case CmdKind::Assume: {
        if (eval_expr(*c.expr, lc.rv, dom) != 0) {
          LocalConfig n = lc;
          n.ctrl = e.to;
          push(c, edge, {}, n, {});
        }
        break;
      }
      case CmdKind::AssertFalse:
        break;  // asserts are rewritten before exploration; otherwise stuck
      case CmdKind::Assign: {
        LocalConfig n = lc;
        n.ctrl = e.to;
        n.rv[static_cast<size_t>(c.reg)] = eval_expr(*c.expr, lc.rv, dom);
        push(c, edge, {}, n, {});
        break;
      }
      case CmdKind::Load: {
        size_t x = static_cast<size_t>(c.var);
        for (const auto& m : cf.memory) {
          if (m.var != c.var) continue;
          if (lc.view[x] > m.own_ts()) continue;
          LocalConfig n = lc;
          n.ctrl = e.to;
          n.rv[static_cast<size_t>(c.reg)] = m.val;
          n.view = join_views(lc.view, m.view);
          push(c, edge, {m}, n, {});
        }
        break;
      }
      case CmdKind::Store: {
        size_t x = static_cast<size_t>(c.var);
        auto used = used_on(c.var);
        for (Ts t = lc.view[x] + 1; t <= tsHorizon; ++t) {
          if (used.count(t)) continue;
          LocalConfig n = lc;
          n.ctrl = e.to;
          n.view[x] = t;
          Message m;
          m.var = c.var;
          m.val = c.src.value(lc.rv);
          m.view = n.view;
          m.genDis = cf.roles[static_cast<size_t>(tid)] == Role::Env ? -1 : tid;
          push(c, edge, {m}, n, {m});
        }
        break;
      }
      case CmdKind::Cas: {
        size_t x = static_cast<size_t>(c.var);
        int cmp = c.src.value(lc.rv);
        auto used = used_on(c.var);
        for (const auto& m : cf.memory) {
          if (m.var != c.var || m.val != cmp) continue;
          Ts t = m.own_ts();
          if (lc.view[x] > t) continue;
          if (used.count(t + 1) || t + 1 > tsHorizon) continue;
          LocalConfig n = lc;
          n.ctrl = e.to;
          n.view = join_views(lc.view, m.view);
          n.view[x] = t + 1;
          Message w;
          w.var = c.var;
          w.val = c.src2.value(lc.rv);
          w.view = n.view;
          w.genDis = cf.roles[static_cast<size_t>(tid)] == Role::Env ? -1 : tid;
          push(c, edge, {m, w}, n, {w});
        }
        break;
      }
      default:
        break;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Trace validation
// ---------------------------------------------------------------------------

struct ValidationResult {
  bool valid = true;
  size_t stepIndex = 0;
  std::string ruleViolated;
};

inline ValidationResult invalid_at(size_t i, std::string rule) {
  return ValidationResult{false, i, std::move(rule)};
}

// Replay a trace under the concrete rules, checking every side condition.
// On success *finalOut (if given) receives the configuration reached.
inline ValidationResult validate_run(const CompiledSystem& cs, const Trace& tr,
                                     Config* finalOut = nullptr) {
  Config cf = tr.initial;
  int dom = cs.spec.dom;
  for (size_t i = 0; i < tr.steps.size(); ++i) {
    const Step& st = tr.steps[i];
    if (st.tid < 0 || static_cast<size_t>(st.tid) >= cf.threads.size())
      return invalid_at(i, "unknown thread id");
    const LTS& lts = cs.lts_for(cf, st.tid);
    if (st.edge < 0 || static_cast<size_t>(st.edge) >= lts.edges.size())
      return invalid_at(i, "unknown transition");
    const auto& e = lts.edges[static_cast<size_t>(st.edge)];
    LocalConfig& lc = cf.threads[static_cast<size_t>(st.tid)];
    if (e.from != lc.ctrl) return invalid_at(i, "control state mismatch");
    const Command& c = *e.label;
    if (kind_of(c) != st.kind) return invalid_at(i, "step kind mismatch");
    size_t x = static_cast<size_t>(c.var);
    switch (c.kind) {
      case CmdKind::Skip:
        break;
      case CmdKind::Assume:
        if (eval_expr(*c.expr, lc.rv, dom) == 0)
          return invalid_at(i, "assume guard false");
        break;
      case CmdKind::AssertFalse:
        return invalid_at(i, "assert false has no transition");
      case CmdKind::Assign:
        lc.rv[static_cast<size_t>(c.reg)] = eval_expr(*c.expr, lc.rv, dom);
        break;
      case CmdKind::Load: {
        if (st.msgs.size() != 1) return invalid_at(i, "load needs one message");
        const Message& m = st.msgs[0];
        if (m.var != c.var) return invalid_at(i, "load variable mismatch");
        bool inMem = false;
        for (const auto& mm : cf.memory)
          if (mm == m) inMem = true;
        if (!inMem) return invalid_at(i, "msg not in memory");
        if (lc.view[x] > m.own_ts())
          return invalid_at(i, "view exceeds message timestamp");
        lc.rv[static_cast<size_t>(c.reg)] = m.val;
        lc.view = join_views(lc.view, m.view);
        break;
      }
      case CmdKind::Store: {
        if (st.msgs.size() != 1)
          return invalid_at(i, "store needs one message");
        const Message& m = st.msgs[0];
        if (m.var != c.var) return invalid_at(i, "store variable mismatch");
        if (m.val != c.src.value(lc.rv))
          return invalid_at(i, "stored value mismatch");
        if (m.own_ts() <= lc.view[x])
          return invalid_at(i, "store timestamp not above view");
        View expect = lc.view;
        expect[x] = m.own_ts();
        if (m.view != expect) return invalid_at(i, "store view mismatch");
        for (const auto& mm : cf.memory)
          if (!msg_conflict_free(mm, m)) return invalid_at(i, "msg # m");
        lc.view = m.view;
        cf.memory.push_back(m);
        break;
      }
      case CmdKind::Cas: {
        if (st.msgs.size() != 2)
          return invalid_at(i, "cas needs read and written messages");
        const Message& r = st.msgs[0];
        const Message& w = st.msgs[1];
        if (r.var != c.var || w.var != c.var)
          return invalid_at(i, "cas variable mismatch");
        bool inMem = false;
        for (const auto& mm : cf.memory)
          if (mm == r) inMem = true;
        if (!inMem) return invalid_at(i, "msg not in memory");
        if (r.val != c.src.value(lc.rv))
          return invalid_at(i, "cas compare value mismatch");
        if (w.val != c.src2.value(lc.rv))
          return invalid_at(i, "cas stored value mismatch");
        if (lc.view[x] > r.own_ts())
          return invalid_at(i, "view exceeds message timestamp");
        if (w.own_ts() != r.own_ts() + 1)
          return invalid_at(i, "cas timestamps not adjacent");
        View expect = join_views(lc.view, r.view);
        expect[x] = w.own_ts();
        if (w.view != expect) return invalid_at(i, "cas view mismatch");
        for (const auto& mm : cf.memory)
          if (!msg_conflict_free(mm, w)) return invalid_at(i, "msg # m");
        lc.view = w.view;
        cf.memory.push_back(w);
        break;
      }
      default:
        return invalid_at(i, "composite command as step");
    }
    lc.ctrl = e.to;
  }
  if (finalOut) *finalOut = cf;
  return ValidationResult{};
}

// ---------------------------------------------------------------------------
// Bounded reachability (canonical insertion search)
// ---------------------------------------------------------------------------

enum class SearchStatus { Reachable, NotFound };

struct ExploreResult {
  SearchStatus status = SearchStatus::NotFound;
  bool exhausted = false;  // meaningful when NotFound: space fully explored
  Trace trace;             // meaningful when Reachable
  std::uint64_t nodes = 0;
};

namespace detail {

// Canonical search state: contiguous per-variable timestamps plus welds
// (CAS pairs (t, t+1) between which nothing may be inserted).
struct CanonState {
  Config cf;
  std::vector<std::set<Ts>> welds;  // per variable: t such that (t,t+1) welded
};

// A decision replays one canonical step deterministically.
struct Decision {
  int tid = -1;
  int edge = -1;
  Ts readTs = 0;   // loads/cas: own timestamp of the message read
  bool insert = false;
  Ts insertAfter = 0;  // stores: predecessor timestamp (new ts = after+1)
};

inline std::string canon_key(const CanonState& st, size_t nDis) {
  std::ostringstream os;
  for (const auto& m : st.cf.memory) {
    os << m.var << ',' << m.val << ',' << m.genDis << ':';
    for (Ts t : m.view) os << t << ' ';
    os << ';';
  }
  os << '|';
  auto emit = [&](const LocalConfig& lc) {
    os << lc.ctrl << ':';
    for (int v : lc.rv) os << v << ' ';
    os << ':';
    for (Ts t : lc.view) os << t << ' ';
    os << ';';
  };
  for (size_t i = 0; i < nDis; ++i) emit(st.cf.threads[i]);
  // env threads up to permutation
  std::vector<std::string> envKeys;
  for (size_t i = nDis; i < st.cf.threads.size(); ++i) {
    std::ostringstream es;
    const auto& lc = st.cf.threads[i];
    es << lc.ctrl << ':';
    for (int v : lc.rv) es << v << ' ';
    es << ':';
    for (Ts t : lc.view) es << t << ' ';
    envKeys.push_back(es.str());
  }
  std::sort(envKeys.begin(), envKeys.end());
  for (auto& k : envKeys) os << k << ';';
  os << '|';
  for (const auto& w : st.welds) {
    for (Ts t : w) os << t << ' ';
    os << ';';
  }
  return os.str();
}

// Shift every timestamp > after on variable x up by one, in all views.
inline void shift_up(CanonState& st, int x, Ts after) {
  size_t xi = static_cast<size_t>(x);
  for (auto& m : st.cf.memory)
    if (m.view[xi] > after) ++m.view[xi];
  for (auto& t : st.cf.threads)
    if (t.view[xi] > after) ++t.view[xi];
  std::set<Ts> nw;
  for (Ts t : st.welds[xi]) nw.insert(t > after ? t + 1 : t);
  st.welds[xi] = nw;
}

// Apply one decision; assumes it was generated as legal.  Returns the Step
// taken (with canonical-coordinate messages).
inline Step apply_decision(const CompiledSystem& cs, CanonState& st,
                           const Decision& d) {
  const LTS& lts = cs.lts_for(st.cf, d.tid);
  const auto& e = lts.edges[static_cast<size_t>(d.edge)];
  const Command& c = *e.label;
  LocalConfig& lc = st.cf.threads[static_cast<size_t>(d.tid)];
  int dom = cs.spec.dom;
  Step step{d.tid, kind_of(c), d.edge, {}};
  size_t x = static_cast<size_t>(c.var);
  switch (c.kind) {
    case CmdKind::Assign:
      lc.rv[static_cast<size_t>(c.reg)] = eval_expr(*c.expr, lc.rv, dom);
      break;
    case CmdKind::Load: {
      const Message* m = nullptr;
      for (const auto& mm : st.cf.memory)
        if (mm.var == c.var && mm.own_ts() == d.readTs) m = &mm;
      Message read = *m;
      lc.rv[static_cast<size_t>(c.reg)] = read.val;
      lc.view = join_views(lc.view, read.view);
      step.msgs = {read};
      break;
    }
    case CmdKind::Store: {
      shift_up(st, c.var, d.insertAfter);
      lc.view[x] = d.insertAfter + 1;
      Message m;
      m.var = c.var;
      m.val = c.src.value(lc.rv);
      m.view = lc.view;
      m.genDis =
          st.cf.roles[static_cast<size_t>(d.tid)] == Role::Env ? -1 : d.tid;
      st.cf.memory.push_back(m);
      step.msgs = {m};
      break;
    }
    case CmdKind::Cas: {
      Message read;
      for (const auto& mm : st.cf.memory)
        if (mm.var == c.var && mm.own_ts() == d.readTs) read = mm;
      shift_up(st, c.var, d.readTs);
      st.welds[x].insert(d.readTs);
      lc.view = join_views(lc.view, read.view);
      lc.view[x] = d.readTs + 1;
      Message w;
      w.var = c.var;
      w.val = c.src2.value(lc.rv);
      w.view = lc.view;
      w.genDis =
          st.cf.roles[static_cast<size_t>(d.tid)] == Role::Env ? -1 : d.tid;
      st.cf.memory.push_back(w);
      step.msgs = {read, w};
      break;
    }
    default:
      break;
  }
  lc.ctrl = e.to;
  return step;
}

// Enumerate legal decisions for one thread in a canonical state.
inline std::vector<Decision> decisions_for(const CompiledSystem& cs,
                                           const CanonState& st, int tid,
                                           Ts tsHorizon) {
  std::vector<Decision> ds;
  const LTS& lts = cs.lts_for(st.cf, tid);
  const LocalConfig& lc = st.cf.threads[static_cast<size_t>(tid)];
  int dom = cs.spec.dom;
  for (int edge : lts.out[static_cast<size_t>(lc.ctrl)]) {
    const auto& e = lts.edges[static_cast<size_t>(edge)];
    const Command& c = *e.label;
    size_t x = static_cast<size_t>(c.var);
    switch (c.kind) {
      case CmdKind::Skip:
      case CmdKind::Assign:
        ds.push_back(Decision{tid, edge});
        break;
      case CmdKind::Assume:
        if (eval_expr(*c.expr, lc.rv, dom) != 0)
          ds.push_back(Decision{tid, edge});
        break;
      case CmdKind::Load:
        for (const auto& m : st.cf.memory)
          if (m.var == c.var && m.own_ts() >= lc.view[x])
            ds.push_back(Decision{tid, edge, m.own_ts()});
        break;
      case CmdKind::Store: {
        // insert after any timestamp >= view(x) that is not weld-protected
        Ts maxTs = 0;
        for (const auto& m : st.cf.memory)
          if (m.var == c.var) maxTs = std::max(maxTs, m.own_ts());
        if (maxTs + 1 > tsHorizon) break;
        for (Ts after = lc.view[x]; after <= maxTs; ++after)
          if (!st.welds[x].count(after))
            ds.push_back(Decision{tid, edge, 0, true, after});
        break;
      }
      case CmdKind::Cas: {
        int cmp = c.src.value(lc.rv);
        Ts maxTs = 0;
        for (const auto& m : st.cf.memory)
          if (m.var == c.var) maxTs = std::max(maxTs, m.own_ts());
        if (maxTs + 1 > tsHorizon) break;
        for (const auto& m : st.cf.memory) {
          if (m.var != c.var || m.val != cmp) continue;
          Ts t = m.own_ts();
          if (t < lc.view[x]) continue;
          if (st.welds[x].count(t)) continue;  // already claimed
          ds.push_back(Decision{tid, edge, t});
        }
        break;
      }
      default:
        break;
    }
  }
  return ds;
}

}  // namespace detail

// Bounded BFS for a goal message (goal.var, goal.val, any view).
inline ExploreResult explore_concrete(const CompiledSystem& cs, int nEnv,
                                      int maxDepth, Ts tsHorizon,
                                      const GoalSpec& goal,
                                      std::uint64_t nodeBudget = 2'000'000) {
  using namespace detail;
  size_t nDis = cs.spec.disPrograms.size();
  struct Node {
    CanonState st;
    int parent = -1;
    Decision via;
    int depth = 0;
  };
  std::vector<Node> nodes;
  std::unordered_map<std::string, int> visited;
  ExploreResult res;

  CanonState init;
  init.cf = initial_config(cs, nEnv);
  init.welds.assign(cs.spec.vars.size(), {});
  nodes.push_back(Node{init, -1, {}, 0});
  visited.emplace(canon_key(init, nDis), 0);

  auto reaches_goal = [&](const CanonState& st) {
    for (const auto& m : st.cf.memory)
      if (m.var == goal.var && m.val == goal.val) return true;
    return false;
  };

  // Canonical insertion shifts timestamps, so intermediate-coordinate
  // messages would not replay.  Assign each message an identity, compute its
  // final per-variable position, then re-run the decisions in those fixed
  // coordinates; monotonicity of the position map keeps every rule valid.
  auto build_trace = [&](int idx) {
    std::vector<Decision> path;
    for (int i = idx; i > 0; i = nodes[static_cast<size_t>(i)].parent)
      path.push_back(nodes[static_cast<size_t>(i)].via);
    std::reverse(path.begin(), path.end());

    // Pass 1: per-variable insertion orders over message ids.
    size_t nVars = cs.spec.vars.size();
    std::vector<std::vector<int>> order(nVars, std::vector<int>{0});
    int nextId = 1;
    std::vector<int> readIds(path.size(), -1), newIds(path.size(), -1);
    {
      CanonState st = init;
      for (size_t i = 0; i < path.size(); ++i) {
        const Decision& d = path[i];
        const LTS& lts = cs.lts_for(st.cf, d.tid);
        const Command& c = *lts.edges[static_cast<size_t>(d.edge)].label;
        size_t x = static_cast<size_t>(c.var);
        if (c.kind == CmdKind::Load) {
          readIds[i] = order[x][d.readTs];
        } else if (c.kind == CmdKind::Store) {
          newIds[i] = nextId++;
          order[x].insert(order[x].begin() + d.insertAfter + 1, newIds[i]);
        } else if (c.kind == CmdKind::Cas) {
          readIds[i] = order[x][d.readTs];
          newIds[i] = nextId++;
          order[x].insert(order[x].begin() + d.readTs + 1, newIds[i]);
        }
        apply_decision(cs, st, d);
      }
    }
    std::unordered_map<int, Ts> finalTs;  // per id (ids unique across vars)
    for (const auto& ord : order)
      for (size_t p = 0; p < ord.size(); ++p)
        finalTs[ord[p]] = static_cast<Ts>(p);

    // Pass 2: plain-semantics replay in final coordinates.
    Trace tr;
    tr.initial = init.cf;
    Config cf = init.cf;
    for (size_t i = 0; i < path.size(); ++i) {
      const Decision& d = path[i];
      const LTS& lts = cs.lts_for(cf, d.tid);
      const auto& e = lts.edges[static_cast<size_t>(d.edge)];
      const Command& c = *e.label;
      LocalConfig& lc = cf.threads[static_cast<size_t>(d.tid)];
      Step step{d.tid, kind_of(c), d.edge, {}};
      size_t x = static_cast<size_t>(c.var);
      switch (c.kind) {
        case CmdKind::Assign:
          lc.rv[static_cast<size_t>(c.reg)] =
              eval_expr(*c.expr, lc.rv, cs.spec.dom);
          break;
        case CmdKind::Load: {
          Ts t = finalTs[readIds[i]];
          Message read;
          for (const auto& m : cf.memory)
            if (m.var == c.var && m.own_ts() == t) read = m;
          lc.rv[static_cast<size_t>(c.reg)] = read.val;
          lc.view = join_views(lc.view, read.view);
          step.msgs = {read};
          break;
        }
        case CmdKind::Store: {
          lc.view[x] = finalTs[newIds[i]];
          Message m;
          m.var = c.var;
          m.val = c.src.value(lc.rv);
          m.view = lc.view;
          m.genDis =
              cf.roles[static_cast<size_t>(d.tid)] == Role::Env ? -1 : d.tid;
          cf.memory.push_back(m);
          step.msgs = {m};
          break;
        }
        case CmdKind::Cas: {
          Ts t = finalTs[readIds[i]];
          Message read;
          for (const auto& m : cf.memory)
            if (m.var == c.var && m.own_ts() == t) read = m;
          lc.view = join_views(lc.view, read.view);
          lc.view[x] = finalTs[newIds[i]];
          Message w;
          w.var = c.var;
          w.val = c.src2.value(lc.rv);
          w.view = lc.view;
          w.genDis =
              cf.roles[static_cast<size_t>(d.tid)] == Role::Env ? -1 : d.tid;
          cf.memory.push_back(w);
          step.msgs = {read, w};
          break;
        }
        default:
          break;
      }
      lc.ctrl = e.to;
      tr.steps.push_back(std::move(step));
    }
    return tr;
  };

  std::deque<int> frontier{0};
  bool truncated = false;
  if (reaches_goal(init)) {
    res.status = SearchStatus::Reachable;
    res.trace = build_trace(0);
    res.nodes = 1;
    return res;
  }
  while (!frontier.empty()) {
    int idx = frontier.front();
    frontier.pop_front();
    const Node cur = nodes[static_cast<size_t>(idx)];
    if (cur.depth >= maxDepth) {
      truncated = true;
      continue;
    }
    for (size_t tid = 0; tid < cur.st.cf.threads.size(); ++tid) {
      // env symmetry: skip replicas identical to an earlier env thread
      if (tid >= nDis) {
        bool dup = false;
        for (size_t j = nDis; j < tid; ++j)
          if (cur.st.cf.threads[j] == cur.st.cf.threads[tid]) dup = true;
        if (dup) continue;
      }
      for (const auto& d :
           decisions_for(cs, cur.st, static_cast<int>(tid), tsHorizon)) {
        CanonState nxt = cur.st;
        apply_decision(cs, nxt, d);
        std::string key = canon_key(nxt, nDis);
        if (visited.count(key)) continue;
        int nidx = static_cast<int>(nodes.size());
        visited.emplace(std::move(key), nidx);
        nodes.push_back(Node{std::move(nxt), idx, d, cur.depth + 1});
        if (++res.nodes > nodeBudget) {
          res.status = SearchStatus::NotFound;
          res.exhausted = false;
          return res;
        }
        if (reaches_goal(nodes.back().st)) {
          res.status = SearchStatus::Reachable;
          res.trace = build_trace(nidx);
          return res;
        }
        frontier.push_back(nidx);
      }
    }
  }
  res.status = SearchStatus::NotFound;
  res.exhausted = !truncated;
  return res;
}

}  // namespace raver
