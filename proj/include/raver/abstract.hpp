#pragma once
// Simplified semantics over abstract timestamps.
//
// Timestamps carry a raised variant: between any two distinguished-thread
// timestamps t and t+1 an unbounded number of environment messages may live,
// all represented by the single raised value t+.  Internally a timestamp is
// a code: 2n for plain n, 2n+1 for raised n+ (codes are ordered exactly like
// the timestamps they denote).
//
// State components:
//   - memory: a grow-only set of messages (environment messages carry raised
//     own-timestamps, distinguished ones plain),
//   - blocked: per variable, a set of codes; a plain code 2t records that a
//     compare-and-swap claimed the pair (t, t+1), a raised code 2t+1 records
//     that an environment store used the region t+.  An environment store
//     needs 2t unblocked; a swap of a distinguished message at t needs 2t+1
//     unblocked,
//   - a grow-only set of environment thread-local configurations (replicas
//     are unbounded, so reachable local configurations accumulate),
//   - one local configuration per distinguished thread.

#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

#include "concrete.hpp"

namespace raver {

// Abstraction of a concrete timestamp relative to the set of timestamps the
// distinguished threads wrote: a written timestamp maps to its rank among
// them, anything strictly between rank k and k+1 maps to raised k.
inline Ts abstract_code(Ts t, const std::set<Ts>& disTs) {
  Ts k = 0;
  for (Ts d : disTs)
    if (d <= t) ++k;
  if (t == 0 || disTs.count(t)) return abs_nat(k);
  return abs_plus(k);
}

enum class MgStatus { Generable, NotGenerable, BudgetExceeded };

struct MgOptions {
  std::uint64_t nodeBudget = 1'000'000;
  std::optional<Ts> tsHorizon;  // plain-timestamp bound override
  bool includeLeader = false;
  bool wantWitness = true;
  int jobs = 1;  // parallel workers over claim sets; the verdict is the same
};

struct MgResult {
  MgStatus status = MgStatus::NotGenerable;
  Trace witness;  // abstract-coded; meaningful when Generable and requested
  std::uint64_t nodes = 0;
};

// Plain timestamps are only consumed by distinguished writes, so the
// path-maximal number of store/swap instructions bounds how many are needed.
inline Ts max_writes_on_a_path(const Command& c) {
  switch (c.kind) {
    case CmdKind::Store:
    case CmdKind::Cas:
      return 1;
    case CmdKind::Seq:
      return max_writes_on_a_path(*c.left) + max_writes_on_a_path(*c.right);
    case CmdKind::Choice:
      return std::max(max_writes_on_a_path(*c.left),
                      max_writes_on_a_path(*c.right));
    case CmdKind::Star:
      // admitted leader loops are write-free; anything else is rejected
      // before this bound is used
      return 0;
    default:
      return 0;
  }
}

// Like max_writes_on_a_path, but counting only writes to one variable.
// Timestamps of different variables never interact (views are compared
// componentwise), so each variable's plain slots can be bounded separately.
inline Ts max_writes_on_a_path_var(const Command& c, int var) {
  switch (c.kind) {
    case CmdKind::Store:
    case CmdKind::Cas:
      return c.var == var ? 1 : 0;
    case CmdKind::Seq:
      return max_writes_on_a_path_var(*c.left, var) +
             max_writes_on_a_path_var(*c.right, var);
    case CmdKind::Choice:
      return std::max(max_writes_on_a_path_var(*c.left, var),
                      max_writes_on_a_path_var(*c.right, var));
    default:
      return 0;
  }
}

inline std::vector<Ts> per_var_ts_bounds(const CompiledSystem& cs,
                                         bool includeLeader) {
  std::vector<Ts> b(cs.spec.vars.size(), 0);
  for (const auto& p : cs.spec.disPrograms) {
    if (p.role == Role::Ldr && !includeLeader) continue;
    for (size_t x = 0; x < b.size(); ++x)
      b[x] += max_writes_on_a_path_var(*p.body, static_cast<int>(x));
  }
  return b;
}

inline Ts default_ts_bound(const CompiledSystem& cs, bool includeLeader) {
  Ts total = 0;
  for (size_t i = 0; i < cs.spec.disPrograms.size(); ++i) {
    const auto& p = cs.spec.disPrograms[i];
    if (p.role == Role::Ldr && !includeLeader) continue;
    total += max_writes_on_a_path(*p.body);
  }
  return total;
}

// Leader loops are admissible as long as their bodies write nothing: then
// the number of messages a leader run produces is still bounded by the
// straight-line store instructions.
inline bool loop_bodies_write(const Command& c) {
  switch (c.kind) {
    case CmdKind::Star: {
      ClassFlags f = classify(*c.left);
      if (!f.nocas) return true;
      // look for stores anywhere inside the loop body
      bool store = false;
      std::function<void(const Command&)> walk = [&](const Command& k) {
        if (k.kind == CmdKind::Store || k.kind == CmdKind::Cas) store = true;
        if (k.left) walk(*k.left);
        if (k.right) walk(*k.right);
      };
      walk(*c.left);
      return store;
    }
    case CmdKind::Seq:
    case CmdKind::Choice:
      return loop_bodies_write(*c.left) || loop_bodies_write(*c.right);
    default:
      return false;
  }
}

namespace detail {

struct AbsLocal {
  int ctrl = 0;
  std::vector<int> rv;
  View view;
  auto operator<=>(const AbsLocal&) const = default;
};

// provenance of an environment local configuration
struct EnvProv {
  AbsLocal parent;
  int edge = -1;
  std::optional<Message> msg;  // load: message read; store: message written
  bool isStore = false;
};

struct AbsAction {
  int tid = -1;
  int edge = -1;
  std::vector<Message> msgs;  // load: 1 read; store: 1 written; cas: 2
};

struct AbsState {
  std::vector<Message> memory;  // sorted, unique
  std::set<AbsLocal> envSet;
  std::vector<AbsLocal> dis;

  std::string key() const {
    std::ostringstream os;
    for (const auto& m : memory) {
      os << m.var << ',' << m.val << ',' << m.genDis << ':';
      for (Ts t : m.view) os << t << ' ';
    }
    os << '|';
    for (const auto& lc : envSet) {
      os << lc.ctrl << ':';
      for (int v : lc.rv) os << v << ' ';
      for (Ts t : lc.view) os << t << ' ';
      os << ';';
    }
    os << '|';
    for (const auto& lc : dis) {
      os << lc.ctrl << ':';
      for (int v : lc.rv) os << v << ' ';
      for (Ts t : lc.view) os << t << ' ';
      os << ';';
    }
    return os.str();
  }

  void add_msg(const Message& m) {
    auto it = std::lower_bound(memory.begin(), memory.end(), m);
    if (it == memory.end() || !(*it == m)) memory.insert(it, m);
  }
  bool has_plain_ts(int var, Ts code) const {
    for (const auto& m : memory)
      if (m.var == var && m.own_ts() == code) return true;
    return false;
  }
};

inline bool read_msg(const Message& m, const View& vw, View& out) {
  size_t x = static_cast<size_t>(m.var);
  if (abs_is_plus(m.own_ts())) {
    out = join_env(vw, m.view, m.var);
    return true;
  }
  if (vw[x] > m.own_ts()) return false;
  out = join_views(vw, m.view);
  return true;
}

}  // namespace detail

// -- abstract trace validation ----------------------------------------------

// Replays a trace whose views are timestamp codes.  Environment stores whose
// message is already present re-join without consuming a region (replicas of
// one lineage may repeat their stores).
inline ValidationResult validate_run_abstract(const CompiledSystem& cs,
                                              const Trace& tr) {
  using detail::read_msg;
  std::vector<Message> memory = tr.initial.memory;
  std::vector<std::set<Ts>> blocked(cs.spec.vars.size());
  std::vector<LocalConfig> threads = tr.initial.threads;
  int dom = cs.spec.dom;

  auto in_memory = [&](const Message& m) {
    for (const auto& mm : memory)
      if (mm == m) return true;
    return false;
  };

  for (size_t i = 0; i < tr.steps.size(); ++i) {
    const Step& st = tr.steps[i];
    if (st.tid < 0 || static_cast<size_t>(st.tid) >= threads.size())
      return invalid_at(i, "unknown thread id");
    bool isEnv = tr.initial.roles[static_cast<size_t>(st.tid)] == Role::Env;
    const LTS& lts = cs.lts_for(tr.initial, st.tid);
    LocalConfig& lc = threads[static_cast<size_t>(st.tid)];
    if (st.edge < 0 || static_cast<size_t>(st.edge) >= lts.edges.size())
      return invalid_at(i, "unknown transition");
    const auto& e = lts.edges[static_cast<size_t>(st.edge)];
    if (e.from != lc.ctrl) return invalid_at(i, "control state mismatch");
    const Command& c = *e.label;
    size_t x = static_cast<size_t>(c.var);
    switch (c.kind) {
      case CmdKind::Skip:
        break;
      case CmdKind::Assume:
        if (eval_expr(*c.expr, lc.rv, dom) == 0)
          return invalid_at(i, "assume guard false");
        break;
      case CmdKind::Assign:
        lc.rv[static_cast<size_t>(c.reg)] = eval_expr(*c.expr, lc.rv, dom);
        break;
      case CmdKind::Load: {
        if (st.msgs.size() != 1) return invalid_at(i, "load needs one message");
        const Message& m = st.msgs[0];
        if (m.var != c.var) return invalid_at(i, "load variable mismatch");
        if (!in_memory(m)) return invalid_at(i, "msg not in memory");
        View nv;
        if (!read_msg(m, lc.view, nv))
          return invalid_at(i, "view exceeds message timestamp");
        lc.rv[static_cast<size_t>(c.reg)] = m.val;
        lc.view = nv;
        break;
      }
      case CmdKind::Store: {
        if (st.msgs.size() != 1)
          return invalid_at(i, "store needs one message");
        const Message& m = st.msgs[0];
        if (m.var != c.var) return invalid_at(i, "store variable mismatch");
        if (m.val != c.src.value(lc.rv))
          return invalid_at(i, "stored value mismatch");
        Ts code = m.own_ts();
        View expect = lc.view;
        expect[x] = code;
        if (m.view != expect) return invalid_at(i, "store view mismatch");
        if (isEnv) {
          if (!abs_is_plus(code))
            return invalid_at(i, "environment store must use a raised slot");
          if (raise_ts(lc.view[x]) > code)
            return invalid_at(i, "store timestamp below view");
          if (!in_memory(m)) {
            if (blocked[x].count(abs_nat(abs_level(code))))
              return invalid_at(i, "region claimed by a swap");
            blocked[x].insert(code);
            memory.push_back(m);
          }
        } else {
          if (abs_is_plus(code))
            return invalid_at(i, "distinguished store must use a plain slot");
          if (lc.view[x] >= code)
            return invalid_at(i, "store timestamp not above view");
          for (const auto& mm : memory)
            if (mm.var == m.var && mm.own_ts() == code)
              return invalid_at(i, "timestamp already taken");
          memory.push_back(m);
        }
        lc.view = m.view;
        break;
      }
      case CmdKind::Cas: {
        if (st.msgs.size() != 2)
          return invalid_at(i, "cas needs read and written messages");
        const Message& r = st.msgs[0];
        const Message& w = st.msgs[1];
        if (r.var != c.var || w.var != c.var)
          return invalid_at(i, "cas variable mismatch");
        if (isEnv) return invalid_at(i, "environment swap unsupported");
        if (!in_memory(r)) return invalid_at(i, "msg not in memory");
        if (r.val != c.src.value(lc.rv))
          return invalid_at(i, "cas compare value mismatch");
        if (w.val != c.src2.value(lc.rv))
          return invalid_at(i, "cas stored value mismatch");
        Ts rc = r.own_ts();
        Ts lvl = abs_level(rc);
        if (w.own_ts() != abs_nat(lvl + 1))
          return invalid_at(i, "cas timestamps not adjacent");
        View nv;
        if (!read_msg(r, lc.view, nv))
          return invalid_at(i, "view exceeds message timestamp");
        if (abs_is_plus(rc) && nv[x] != rc)
          return invalid_at(i, "view overtakes the swapped region");
        if (!abs_is_plus(rc) && blocked[x].count(abs_plus(lvl)))
          return invalid_at(i, "region holds an environment message");
        nv[x] = abs_nat(lvl + 1);
        if (w.view != nv) return invalid_at(i, "cas view mismatch");
        for (const auto& mm : memory)
          if (mm.var == w.var && mm.own_ts() == w.own_ts())
            return invalid_at(i, "timestamp already taken");
        // reading a plain timestamp claims the region above it; a swap on a
        // raised timestamp leaves the region open for environment stores
        // that could have been ordered below the read
        if (!abs_is_plus(rc)) blocked[x].insert(abs_nat(lvl));
        memory.push_back(w);
        lc.view = w.view;
        break;
      }
      default:
        return invalid_at(i, "composite command as step");
    }
    lc.ctrl = e.to;
  }
  return ValidationResult{};
}

// -- reachability of a message ----------------------------------------------

namespace detail {

struct AbsNode {
  AbsState st;
  int parent = -1;
  AbsAction via;
  std::vector<std::pair<AbsLocal, EnvProv>> satDelta;  // derivation order
};

// Close envSet under every environment step.  Stores are included: under a
// fixed claim set, environment stores never conflict with each other or with
// distinguished steps, so they can be applied eagerly.  A store at level
// lvl of variable x is admitted only when (x, lvl) is unclaimed.  Stores
// grow memory, which can enable further loads, so the whole closure runs to
// a joint fixpoint.
inline void saturate(const CompiledSystem& cs, AbsState& st,
                     const std::vector<std::set<Ts>>& claims,
                     const std::vector<Ts>& maxCodeVar,
                     std::vector<std::pair<AbsLocal, EnvProv>>* delta) {
  if (!cs.spec.envProgram) return;
  const LTS& lts = cs.envLts;
  int dom = cs.spec.dom;
  std::deque<AbsLocal> work(st.envSet.begin(), st.envSet.end());
  auto requeue_all = [&] {
    work.assign(st.envSet.begin(), st.envSet.end());
  };
  while (!work.empty()) {
    AbsLocal lc = work.front();
    work.pop_front();
    for (int edge : lts.out[static_cast<size_t>(lc.ctrl)]) {
      const auto& e = lts.edges[static_cast<size_t>(edge)];
      const Command& c = *e.label;
      auto emit = [&](AbsLocal nl, std::optional<Message> msg, bool isStore) {
        nl.ctrl = e.to;
        if (st.envSet.insert(nl).second) {
          if (delta)
            delta->push_back({nl, EnvProv{lc, edge, std::move(msg), isStore}});
          work.push_back(nl);
        }
      };
      switch (c.kind) {
        case CmdKind::Skip:
          emit(lc, std::nullopt, false);
          break;
        case CmdKind::Assume:
          if (eval_expr(*c.expr, lc.rv, dom) != 0)
            emit(lc, std::nullopt, false);
          break;
        case CmdKind::Assign: {
          AbsLocal nl = lc;
          nl.rv[static_cast<size_t>(c.reg)] = eval_expr(*c.expr, lc.rv, dom);
          emit(nl, std::nullopt, false);
          break;
        }
        case CmdKind::Load: {
          for (const auto& m : st.memory) {
            if (m.var != c.var) continue;
            View nv;
            if (!read_msg(m, lc.view, nv)) continue;
            AbsLocal nl = lc;
            nl.rv[static_cast<size_t>(c.reg)] = m.val;
            nl.view = nv;
            emit(nl, m, false);
          }
          break;
        }
        case CmdKind::Store: {
          size_t x = static_cast<size_t>(c.var);
          for (Ts lvl = abs_level(raise_ts(lc.view[x])); ; ++lvl) {
            Ts code = abs_plus(lvl);
            if (code > maxCodeVar[x]) break;
            if (claims[x].count(abs_nat(lvl))) continue;
            AbsLocal nl = lc;
            nl.view[x] = code;
            Message m;
            m.var = c.var;
            m.val = c.src.value(lc.rv);
            m.view = nl.view;
            m.view[x] = code;
            m.genDis = -1;
            size_t before = st.memory.size();
            st.add_msg(m);
            bool grew = st.memory.size() != before;
            emit(nl, m, true);
            // fresh messages can enable loads of configurations already
            // processed: reschedule everything
            if (grew) requeue_all();
          }
          break;
        }
        default:
          break;
      }
    }
  }
}

}  // namespace detail

namespace detail {

// Build the witness trace for a goal node by walking the search tree.  The
// distinguished steps come from the node actions; every environment message
// the run depends on is materialized as one fresh environment thread that
// replays the provenance chain of its generating store.  Instances appear in
// derivation order, so every message a replayed load needs exists by then.
inline Trace build_abstract_witness(const CompiledSystem& cs,
                                    const std::vector<AbsNode>& nodes,
                                    int goalIdx, const GoalSpec& goal) {
  std::vector<int> path;
  for (int i = goalIdx; i >= 0; i = nodes[static_cast<size_t>(i)].parent)
    path.push_back(i);
  std::reverse(path.begin(), path.end());

  // provenance in derivation order; first discovery wins
  struct Disc {
    AbsLocal lc;
    EnvProv p;
    size_t pathPos;
  };
  std::vector<Disc> order;
  std::map<AbsLocal, EnvProv> prov;
  for (size_t t = 0; t < path.size(); ++t) {
    const AbsNode& n = nodes[static_cast<size_t>(path[t])];
    for (const auto& [lc, p] : n.satDelta)
      if (prov.emplace(lc, p).second) order.push_back(Disc{lc, p, t});
  }
  std::map<Message, size_t> producer;  // message -> index into order
  for (size_t i = 0; i < order.size(); ++i)
    if (order[i].p.isStore && order[i].p.msg)
      producer.emplace(*order[i].p.msg, i);

  AbsLocal envInit;
  envInit.ctrl = cs.envLts.initial;
  envInit.rv.assign(cs.spec.regs.size(), 0);
  envInit.view.assign(cs.spec.vars.size(), 0);
  auto lineage = [&](const AbsLocal& target) {
    std::vector<std::pair<AbsLocal, EnvProv>> chain;
    AbsLocal cur = target;
    while (!(cur == envInit)) {
      auto it = prov.find(cur);
      if (it == prov.end())
        throw std::runtime_error("missing provenance in witness build");
      chain.push_back(*it);
      cur = it->second.parent;
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
  };

  // environment messages the run needs: those the distinguished steps read,
  // those replayed lineages read, and the goal message when no distinguished
  // step produced it
  std::set<Message> needed;
  std::deque<Message> work;
  auto require = [&](const Message& m) {
    if (!abs_is_plus(m.own_ts())) return;  // distinguished or initial
    if (needed.insert(m).second) work.push_back(m);
  };
  for (int idx : path) {
    const AbsNode& n = nodes[static_cast<size_t>(idx)];
    if (n.parent < 0) continue;
    for (const auto& m : n.via.msgs) require(m);
  }
  {
    const AbsState& fin = nodes[static_cast<size_t>(goalIdx)].st;
    bool disMade = false;
    for (const auto& m : fin.memory)
      if (m.var == goal.var && m.val == goal.val && m.genDis >= 0)
        disMade = true;
    if (!disMade)
      for (const auto& m : fin.memory)
        if (m.var == goal.var && m.val == goal.val && producer.count(m)) {
          require(m);
          break;
        }
  }
  while (!work.empty()) {
    Message m = work.front();
    work.pop_front();
    auto it = producer.find(m);
    if (it == producer.end())
      throw std::runtime_error("missing producer in witness build");
    const Disc& d = order[it->second];
    for (const auto& [lc, p] : lineage(d.p.parent))
      if (p.msg) require(*p.msg);
  }

  // store events to materialize, grouped by the path node that derived them
  std::vector<std::vector<size_t>> perNode(path.size());
  for (const auto& [m, oi] : producer)
    if (needed.count(m)) perNode[order[oi].pathPos].push_back(oi);
  for (auto& v : perNode) std::sort(v.begin(), v.end());

  Trace tr;
  tr.initial = initial_config(cs, 0);
  auto emit_instance = [&](const Disc& d) {
    int tid = static_cast<int>(tr.initial.threads.size());
    tr.initial.threads.push_back(
        LocalConfig{envInit.ctrl, envInit.rv, envInit.view});
    tr.initial.roles.push_back(Role::Env);
    auto steps = lineage(d.p.parent);
    steps.push_back({d.lc, d.p});
    for (const auto& [lc, p] : steps) {
      const Command& c = *cs.envLts.edges[static_cast<size_t>(p.edge)].label;
      Step s{tid, kind_of(c), p.edge, {}};
      if (p.msg) s.msgs = {*p.msg};
      tr.steps.push_back(std::move(s));
    }
  };
  for (size_t t = 0; t < path.size(); ++t) {
    const AbsNode& n = nodes[static_cast<size_t>(path[t])];
    if (n.parent >= 0) {
      const AbsAction& a = n.via;
      const Command& c =
          *cs.lts_for(tr.initial, a.tid).edges[static_cast<size_t>(a.edge)]
               .label;
      tr.steps.push_back(Step{a.tid, kind_of(c), a.edge, a.msgs});
    }
    for (size_t oi : perNode[t]) emit_instance(order[oi]);
  }
  return tr;
}
}  // namespace detail

// Decide whether a message (goal.var, goal.val, any view) can appear in
// memory.  Distinguished programs must be loop-free; the environment must
// not use compare-and-swap.  With includeLeader the leader thread (which may
// loop, as long as loop bodies do not write) participates as well.
inline MgResult check_message_generation(const CompiledSystem& cs,
                                         const GoalSpec& goal,
                                         MgOptions opts = {}) {
  using namespace detail;
  MgResult res;
  if (cs.spec.envProgram) {
    ClassFlags f = classify(*cs.spec.envProgram->body);
    if (!f.nocas)
      throw std::runtime_error(
          "environment programs with compare-and-swap are unsupported");
  }
  Ts tsBound;
  if (opts.tsHorizon) {
    tsBound = *opts.tsHorizon;
  } else {
    for (const auto& p : cs.spec.disPrograms) {
      if (p.role == Role::Ldr && !opts.includeLeader) continue;
      ClassFlags f = classify(*p.body);
      if (p.role == Role::Ldr ? loop_bodies_write(*p.body) : !f.acyc) {
        res.status = MgStatus::BudgetExceeded;
        return res;
      }
    }
    tsBound = default_ts_bound(cs, opts.includeLeader);
  }
  std::vector<Ts> maxCodeVar;
  if (opts.tsHorizon) {
    maxCodeVar.assign(cs.spec.vars.size(), abs_plus(tsBound));
  } else {
    for (Ts b : per_var_ts_bounds(cs, opts.includeLeader))
      maxCodeVar.push_back(abs_plus(std::min(b, tsBound)));
  }

  // Per (variable, level) slot, an environment store into the raised region
  // and a distinguished compare-and-swap reading the plain timestamp exclude
  // each other for the whole run: whichever happens first forbids the other.
  // So the search enumerates upfront which slots the distinguished threads
  // claim.  Under a fixed claim set the environment side is conflict-free and
  // monotone and is saturated eagerly, leaving only distinguished branching.
  std::vector<std::pair<int, Ts>> slots;
  {
    std::vector<bool> hasCas(cs.spec.vars.size(), false);
    std::function<void(const Command&)> scan = [&](const Command& k) {
      if (k.kind == CmdKind::Cas) hasCas[static_cast<size_t>(k.var)] = true;
      if (k.left) scan(*k.left);
      if (k.right) scan(*k.right);
    };
    for (const auto& p : cs.spec.disPrograms) {
      if (p.role == Role::Ldr && !opts.includeLeader) continue;
      scan(*p.body);
    }
    for (size_t x = 0; x < cs.spec.vars.size(); ++x) {
      if (!hasCas[x]) continue;
      for (Ts lvl = 0; abs_nat(lvl + 1) <= maxCodeVar[x]; ++lvl)
        slots.push_back({static_cast<int>(x), lvl});
    }
  }
  if (slots.size() > 24) {
    res.status = MgStatus::BudgetExceeded;
    return res;
  }

  AbsState init0;
  for (size_t x = 0; x < cs.spec.vars.size(); ++x) {
    Message m;
    m.var = static_cast<int>(x);
    m.val = cs.spec.initValue;
    m.view.assign(cs.spec.vars.size(), 0);
    m.genDis = -1;
    init0.add_msg(m);
  }
  if (cs.spec.envProgram) {
    AbsLocal e0;
    e0.ctrl = cs.envLts.initial;
    e0.rv.assign(cs.spec.regs.size(), 0);
    e0.view.assign(cs.spec.vars.size(), 0);
    init0.envSet.insert(e0);
  }
  for (size_t i = 0; i < cs.spec.disPrograms.size(); ++i) {
    const auto& p = cs.spec.disPrograms[i];
    AbsLocal d0;
    d0.ctrl = cs.disLts[i].initial;
    d0.rv.assign(cs.spec.regs.size(), 0);
    d0.view.assign(cs.spec.vars.size(), 0);
    if (p.role == Role::Ldr && !opts.includeLeader) d0.ctrl = -1;  // frozen
    init0.dis.push_back(d0);
  }

  auto goal_in = [&](const AbsState& st) {
    for (const auto& m : st.memory)
      if (m.var == goal.var && m.val == goal.val) return true;
    return false;
  };
  int nDis = static_cast<int>(cs.spec.disPrograms.size());

  // Each claim set is searched independently, so the mask space can be split
  // across workers when opts.jobs > 1.
  auto search_mask = [&](std::uint64_t mask, std::uint64_t budget) -> MgResult {
    MgResult res;
    std::vector<std::set<Ts>> claims(cs.spec.vars.size());
    for (size_t b = 0; b < slots.size(); ++b)
      if (mask >> b & 1)
        claims[static_cast<size_t>(slots[b].first)].insert(
            abs_nat(slots[b].second));

    std::vector<AbsNode> nodes;
    std::unordered_map<std::string, int> visited;
    nodes.push_back(AbsNode{init0, -1, {}, {}});
    saturate(cs, nodes[0].st, claims, maxCodeVar, &nodes[0].satDelta);
    visited.emplace(nodes[0].st.key(), 0);

    auto finish = [&](int idx) {
      res.status = MgStatus::Generable;
      if (opts.wantWitness)
        res.witness = build_abstract_witness(cs, nodes, idx, goal);
      return res;
    };
    if (++res.nodes > budget) {
      res.status = MgStatus::BudgetExceeded;
      return res;
    }
    if (goal_in(nodes[0].st)) return finish(0);

    std::deque<int> frontier{0};
    while (!frontier.empty()) {
      int idx = frontier.front();
      frontier.pop_front();
      // snapshot: nodes vector may reallocate while we expand
      std::vector<std::pair<AbsState, AbsAction>> succs;

      const AbsState& cur = nodes[static_cast<size_t>(idx)].st;
      for (int tid = 0; tid < nDis; ++tid) {
        const AbsLocal& lc = cur.dis[static_cast<size_t>(tid)];
        if (lc.ctrl < 0) continue;
        const LTS& lts = cs.disLts[static_cast<size_t>(tid)];
        for (int edge : lts.out[static_cast<size_t>(lc.ctrl)]) {
          const auto& e = lts.edges[static_cast<size_t>(edge)];
          const Command& c = *e.label;
          size_t x = static_cast<size_t>(c.var);
          auto push = [&](AbsLocal nl, std::vector<Message> msgs,
                          std::optional<Message> newMsg) {
            AbsState nxt = cur;
            nl.ctrl = e.to;
            nxt.dis[static_cast<size_t>(tid)] = nl;
            if (newMsg) nxt.add_msg(*newMsg);
            AbsAction a;
            a.tid = tid;
            a.edge = edge;
            a.msgs = std::move(msgs);
            succs.push_back({std::move(nxt), std::move(a)});
          };
          switch (c.kind) {
            case CmdKind::Skip:
              push(lc, {}, std::nullopt);
              break;
            case CmdKind::Assume:
              if (eval_expr(*c.expr, lc.rv, cs.spec.dom) != 0)
                push(lc, {}, std::nullopt);
              break;
            case CmdKind::Assign: {
              AbsLocal nl = lc;
              nl.rv[static_cast<size_t>(c.reg)] =
                  eval_expr(*c.expr, lc.rv, cs.spec.dom);
              push(nl, {}, std::nullopt);
              break;
            }
            case CmdKind::Load:
              for (const auto& m : cur.memory) {
                if (m.var != c.var) continue;
                View nv;
                if (!read_msg(m, lc.view, nv)) continue;
                AbsLocal nl = lc;
                nl.rv[static_cast<size_t>(c.reg)] = m.val;
                nl.view = nv;
                push(nl, {m}, std::nullopt);
              }
              break;
            case CmdKind::Store:
              for (Ts lvl = abs_level(lc.view[x]) + 1; ; ++lvl) {
                Ts code = abs_nat(lvl);
                if (code > maxCodeVar[x]) break;
                if (cur.has_plain_ts(c.var, code)) continue;
                AbsLocal nl = lc;
                nl.view[x] = code;
                Message m;
                m.var = c.var;
                m.val = c.src.value(lc.rv);
                m.view = nl.view;
                m.genDis = tid;
                push(nl, {m}, m);
              }
              break;
            case CmdKind::Cas: {
              int cmp = c.src.value(lc.rv);
              for (const auto& m : cur.memory) {
                if (m.var != c.var || m.val != cmp) continue;
                Ts rc = m.own_ts();
                Ts lvl = abs_level(rc);
                Ts wcode = abs_nat(lvl + 1);
                if (wcode > maxCodeVar[x]) continue;
                if (cur.has_plain_ts(c.var, wcode)) continue;
                View nv;
                if (!read_msg(m, lc.view, nv)) continue;
                if (abs_is_plus(rc)) {
                  if (nv[x] != rc) continue;
                } else {
                  // reading a plain timestamp claims its region; only
                  // slots reserved upfront are available for that
                  if (!claims[x].count(abs_nat(lvl))) continue;
                }
                AbsLocal nl = lc;
                nl.view = nv;
                nl.view[x] = wcode;
                Message w;
                w.var = c.var;
                w.val = c.src2.value(lc.rv);
                w.view = nl.view;
                w.genDis = tid;
                push(nl, {m, w}, w);
              }
              break;
            }
            default:
              break;
          }
        }
      }

      for (auto& [nst, act] : succs) {
        std::vector<std::pair<AbsLocal, EnvProv>> delta;
        saturate(cs, nst, claims, maxCodeVar, &delta);
        std::string key = nst.key();
        if (visited.count(key)) continue;
        int nidx = static_cast<int>(nodes.size());
        visited.emplace(std::move(key), nidx);
        nodes.push_back(AbsNode{std::move(nst), idx, act, std::move(delta)});
        if (++res.nodes > budget) {
          res.status = MgStatus::BudgetExceeded;
          return res;
        }
        if (goal_in(nodes.back().st)) return finish(nidx);
        frontier.push_back(nidx);
      }
    }
    return res;  // NotGenerable: this claim set is exhausted
  };

  std::uint64_t nMasks = std::uint64_t{1} << slots.size();
  int jobs = std::max(1, opts.jobs);
  if (jobs > 1 && nMasks > 1) {
    struct WorkerOut {
      std::uint64_t genMask = ~std::uint64_t{0};  // smallest generable mask
      MgResult gen;
      bool exceeded = false;
      std::uint64_t nodes = 0;
    };
    int workers = static_cast<int>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(jobs), nMasks));
    std::vector<std::future<WorkerOut>> futs;
    for (int w = 0; w < workers; ++w) {
      futs.push_back(std::async(std::launch::async, [&, w] {
        WorkerOut out;
        for (std::uint64_t m = static_cast<std::uint64_t>(w); m < nMasks;
             m += static_cast<std::uint64_t>(workers)) {
          MgResult r = search_mask(m, opts.nodeBudget);
          out.nodes += r.nodes;
          if (r.status == MgStatus::Generable) {
            out.genMask = m;
            out.gen = std::move(r);
            break;
          }
          if (r.status == MgStatus::BudgetExceeded) out.exceeded = true;
        }
        return out;
      }));
    }
    std::uint64_t bestMask = ~std::uint64_t{0};
    bool exceeded = false;
    MgResult best;
    for (auto& f : futs) {
      WorkerOut out = f.get();
      res.nodes += out.nodes;
      exceeded = exceeded || out.exceeded;
      if (out.genMask < bestMask) {
        bestMask = out.genMask;
        best = std::move(out.gen);
      }
    }
    if (bestMask != ~std::uint64_t{0}) {
      best.nodes = res.nodes;
      return best;
    }
    res.status = exceeded ? MgStatus::BudgetExceeded : MgStatus::NotGenerable;
    return res;
  }

  for (std::uint64_t mask = 0; mask < nMasks; ++mask) {
    MgResult r = search_mask(mask, opts.nodeBudget - res.nodes);
    res.nodes += r.nodes;
    if (r.status != MgStatus::NotGenerable) {
      r.nodes = res.nodes;
      return r;
    }
  }
  res.status = MgStatus::NotGenerable;
  return res;
}

// Leader verification: like message generation, with the leader thread
// participating.
inline MgResult verify_leader(const CompiledSystem& cs, const GoalSpec& goal,
                              MgOptions opts = {}) {
  opts.includeLeader = true;
  return check_message_generation(cs, goal, opts);
}

// Observable self-reads of a view against the leader-produced messages:
// the (variable, value) pairs whose latest-seen message is the leader's own.
inline std::set<std::pair<int, int>> self_read(
    const View& vw, const std::vector<Message>& memory, int ldrTid) {
  std::set<std::pair<int, int>> out;
  for (const auto& m : memory)
    if (m.genDis == ldrTid &&
        vw[static_cast<size_t>(m.var)] == m.own_ts())
      out.insert({m.var, m.val});
  return out;
}

}  // namespace raver
