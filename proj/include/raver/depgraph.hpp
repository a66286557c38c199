#pragma once

// Dependency graphs of abstract traces and witness compaction.  The graph
// has one vertex per distinct message of the run; a message depends on every
// message its generating thread read before first producing it.  compact()
// rewrites a witness so that both the fan-in and the height of its graph
// stay within 2*|Dom|*|Var| + |c_dis|.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "abstract.hpp"
#include "concrete.hpp"
#include "state.hpp"

namespace raver {

struct DepGraph {
  std::vector<Message> vertices;
  std::vector<std::vector<int>> depend;  // vertex -> read vertices
  std::vector<int> genthread;            // -1 for initial messages
  std::vector<int> height;               // longest chain from a source
};

inline int max_fanin(const DepGraph& g) {
  int m = 0;
  for (const auto& d : g.depend) m = std::max(m, static_cast<int>(d.size()));
  return m;
}

inline int graph_height(const DepGraph& g) {
  int m = 0;
  for (int h : g.height) m = std::max(m, h);
  return m;
}

// fan-in / height cap: 2*|Dom|*|Var| plus the distinguished instruction
// budget
inline int compact_bound(const SystemSpec& s) {
  int q0 = 2 * s.dom * static_cast<int>(s.vars.size());
  for (const auto& p : s.disPrograms) q0 += instruction_count(*p.body);
  return q0;
}

inline DepGraph dependency_graph(const Trace& tr) {
  DepGraph g;
  std::map<Message, int> idx;
  auto vertex = [&](const Message& m, int tid,
                    const std::set<int>& reads) -> int {
    auto it = idx.find(m);
    if (it != idx.end()) return it->second;
    int v = static_cast<int>(g.vertices.size());
    idx.emplace(m, v);
    g.vertices.push_back(m);
    g.depend.push_back({reads.begin(), reads.end()});
    g.genthread.push_back(tid);
    int h = 0;
    for (int d : reads) h = std::max(h, g.height[static_cast<size_t>(d)] + 1);
    g.height.push_back(reads.empty() ? 0 : h);
    return v;
  };
  for (const auto& m : tr.initial.memory) vertex(m, -1, {});
  std::vector<std::set<int>> readSet(tr.initial.threads.size());
  for (const auto& st : tr.steps) {
    auto& reads = readSet[static_cast<size_t>(st.tid)];
    switch (st.kind) {
      case StepKind::Ld:
        reads.insert(vertex(st.msgs.at(0), -1, {}));
        break;
      case StepKind::St:
        vertex(st.msgs.at(0), st.tid, reads);
        break;
      case StepKind::CasOp:
        reads.insert(vertex(st.msgs.at(0), -1, {}));
        vertex(st.msgs.at(1), st.tid, reads);
        break;
      default:
        break;
    }
  }
  return g;
}

inline std::string to_dot(const DepGraph& g, const SystemSpec& s) {
  std::ostringstream os;
  os << "digraph dependencies {\n";
  auto ts_str = [](Ts code) {
    std::string r = std::to_string(abs_level(code));
    if (abs_is_plus(code)) r += "+";
    return r;
  };
  for (size_t v = 0; v < g.vertices.size(); ++v) {
    const Message& m = g.vertices[v];
    os << "  n" << v << " [label=\"" << s.vars[static_cast<size_t>(m.var)]
       << "=" << m.val << " @" << ts_str(m.own_ts());
    if (g.genthread[v] >= 0) os << " t" << g.genthread[v];
    os << "\"];\n";
  }
  for (size_t v = 0; v < g.vertices.size(); ++v)
    for (int d : g.depend[v]) os << "  n" << d << " -> n" << v << ";\n";
  os << "}\n";
  return os.str();
}

namespace detail {

// Replayable skeleton of an abstract trace: control structure plus, per
// read, which earlier write it takes from, and, per write, the timestamp it
// claims.  Views and messages are recomputed on replay, so redirecting a
// read keeps everything else consistent.
struct SkelStep {
  int tid = 0;
  int edge = -1;
  StepKind kind = StepKind::Silent;
  int src = 0;      // reads: step index of producer, or -(1+init index)
  Ts ownCode = 0;   // writes: own timestamp of the produced message
};

struct Skeleton {
  Config initial;
  std::vector<SkelStep> steps;
};

inline Skeleton make_skeleton(const Trace& tr) {
  Skeleton sk;
  sk.initial = tr.initial;
  std::map<Message, int> producer;
  for (size_t i = 0; i < tr.initial.memory.size(); ++i)
    producer.emplace(tr.initial.memory[i], -(static_cast<int>(i) + 1));
  for (size_t i = 0; i < tr.steps.size(); ++i) {
    const Step& st = tr.steps[i];
    SkelStep s;
    s.tid = st.tid;
    s.edge = st.edge;
    s.kind = st.kind;
    if (st.kind == StepKind::Ld || st.kind == StepKind::CasOp) {
      auto it = producer.find(st.msgs.at(0));
      if (it == producer.end())
        throw std::runtime_error("trace reads a message never produced");
      s.src = it->second;
    }
    if (st.kind == StepKind::St)
      producer.emplace(st.msgs.at(0), static_cast<int>(i));
    if (st.kind == StepKind::CasOp)
      producer.emplace(st.msgs.at(1), static_cast<int>(i));
    if (st.kind == StepKind::St) s.ownCode = st.msgs.at(0).own_ts();
    if (st.kind == StepKind::CasOp) s.ownCode = st.msgs.at(1).own_ts();
    sk.steps.push_back(s);
  }
  return sk;
}

// Recompute views and messages along the skeleton.  Returns nothing when a
// read or store precondition fails (a redirect proposal was unsound).
inline std::optional<Trace> replay_skeleton(const CompiledSystem& cs,
                                            const Skeleton& sk) {
  Trace tr;
  tr.initial = sk.initial;
  std::vector<LocalConfig> threads = sk.initial.threads;
  std::vector<Message> made(sk.steps.size());
  auto msg_of = [&](int src) -> const Message& {
    if (src < 0) return sk.initial.memory[static_cast<size_t>(-src - 1)];
    return made[static_cast<size_t>(src)];
  };
  for (size_t i = 0; i < sk.steps.size(); ++i) {
    const SkelStep& s = sk.steps[i];
    bool isEnv = sk.initial.roles[static_cast<size_t>(s.tid)] == Role::Env;
    const LTS& lts = cs.lts_for(sk.initial, s.tid);
    LocalConfig& lc = threads[static_cast<size_t>(s.tid)];
    const auto& e = lts.edges[static_cast<size_t>(s.edge)];
    if (e.from != lc.ctrl) return std::nullopt;
    const Command& c = *e.label;
    size_t x = static_cast<size_t>(c.var);
    Step out{s.tid, s.kind, s.edge, {}};
    switch (c.kind) {
      case CmdKind::Skip:
        break;
      case CmdKind::Assume:
        if (eval_expr(*c.expr, lc.rv, cs.spec.dom) == 0) return std::nullopt;
        break;
      case CmdKind::Assign:
        lc.rv[static_cast<size_t>(c.reg)] =
            eval_expr(*c.expr, lc.rv, cs.spec.dom);
        break;
      case CmdKind::Load: {
        const Message& m = msg_of(s.src);
        if (m.var != c.var) return std::nullopt;
        View nv;
        if (!detail::read_msg(m, lc.view, nv)) return std::nullopt;
        lc.rv[static_cast<size_t>(c.reg)] = m.val;
        lc.view = nv;
        out.msgs = {m};
        break;
      }
      case CmdKind::Store: {
        if (isEnv ? raise_ts(lc.view[x]) > s.ownCode
                  : lc.view[x] >= s.ownCode)
          return std::nullopt;
        Message m;
        m.var = c.var;
        m.val = c.src.value(lc.rv);
        m.view = lc.view;
        m.view[x] = s.ownCode;
        m.genDis = isEnv ? -1 : s.tid;
        lc.view = m.view;
        made[i] = m;
        out.msgs = {m};
        break;
      }
      case CmdKind::Cas: {
        const Message& m = msg_of(s.src);
        if (m.var != c.var || m.val != c.src.value(lc.rv))
          return std::nullopt;
        View nv;
        if (!detail::read_msg(m, lc.view, nv)) return std::nullopt;
        Ts rc = m.own_ts();
        if (abs_is_plus(rc) && nv[x] != rc) return std::nullopt;
        if (s.ownCode != abs_nat(abs_level(rc) + 1)) return std::nullopt;
        Message w;
        w.var = c.var;
        w.val = c.src2.value(lc.rv);
        w.view = nv;
        w.view[x] = s.ownCode;
        w.genDis = s.tid;
        lc.view = w.view;
        made[i] = w;
        out.msgs = {m, w};
        break;
      }
      default:
        return std::nullopt;
    }
    lc.ctrl = e.to;
    tr.steps.push_back(std::move(out));
  }
  return tr;
}

}  // namespace detail

// Rewrite a witness until its dependency graph satisfies both compactness
// bounds.  Fan-in: when a thread read two environment messages with the same
// (variable, value) before producing a vertex, its loads of the later one
// are redirected to the first (views only decrease, so the suffix stays
// valid).  Height: readers of an environment message are redirected to a
// same-(variable, value) environment ancestor.  Every proposal is replayed
// and revalidated; unsound proposals are discarded.  Swap reads are never
// redirected (that would move the written timestamp).
inline Trace compact(const CompiledSystem& cs, const Trace& tr,
                     const GoalSpec& goal) {
  using detail::Skeleton;
  Skeleton sk = detail::make_skeleton(tr);
  auto goal_made = [&](const Trace& t) {
    for (const auto& m : t.initial.memory)
      if (m.var == goal.var && m.val == goal.val) return true;
    for (const auto& st : t.steps)
      for (const auto& m : st.msgs)
        if (m.var == goal.var && m.val == goal.val) return true;
    return false;
  };
  auto src_of = [&](const Trace& t, const Message& m) -> std::optional<int> {
    for (size_t i = 0; i < t.initial.memory.size(); ++i)
      if (t.initial.memory[i] == m) return -(static_cast<int>(i) + 1);
    for (size_t i = 0; i < t.steps.size(); ++i) {
      const Step& st = t.steps[i];
      if (st.kind == StepKind::St && st.msgs.at(0) == m)
        return static_cast<int>(i);
      if (st.kind == StepKind::CasOp && st.msgs.at(1) == m)
        return static_cast<int>(i);
    }
    return std::nullopt;
  };
  // redirect every load currently taking from `from` to `to`; keep only if
  // the replay stays valid and still generates the goal
  auto try_redirect = [&](Trace& cur, int from, int to) {
    Skeleton cand = sk;
    bool touched = false;
    for (auto& s : cand.steps)
      if (s.kind == StepKind::Ld && s.src == from) {
        s.src = to;
        touched = true;
      }
    if (!touched) return false;
    auto rep = detail::replay_skeleton(cs, cand);
    if (!rep || !goal_made(*rep)) return false;
    if (!validate_run_abstract(cs, *rep).valid) return false;
    sk = std::move(cand);
    cur = std::move(*rep);
    return true;
  };

  auto cur = detail::replay_skeleton(cs, sk);
  if (!cur) throw std::runtime_error("witness does not replay");
  int q0 = compact_bound(cs.spec);
  const int capIters =
      static_cast<int>(tr.steps.size() + 8) * std::max(q0, 1) * 4;
  for (int iter = 0; iter < capIters; ++iter) {
    DepGraph g = dependency_graph(*cur);
    bool changed = false;

    // fan-in: for each overfull vertex, find that thread's duplicate pair
    for (size_t v = 0; v < g.vertices.size() && !changed; ++v) {
      if (static_cast<int>(g.depend[v].size()) <= q0) continue;
      int p = g.genthread[v];
      // duplicate environment reads of p, in read order
      std::map<std::pair<int, int>, int> firstSrc;  // (var,val) -> src
      for (size_t i = 0; i < cur->steps.size() && !changed; ++i) {
        const Step& st = cur->steps[i];
        if (st.tid != p || st.kind != StepKind::Ld) continue;
        const Message& m = st.msgs.at(0);
        if (!abs_is_plus(m.own_ts())) continue;
        auto srcM = src_of(*cur, m);
        if (!srcM) continue;
        auto key = std::make_pair(m.var, m.val);
        auto it = firstSrc.find(key);
        if (it == firstSrc.end()) {
          firstSrc.emplace(key, *srcM);
        } else if (it->second != *srcM) {
          changed = try_redirect(*cur, *srcM, it->second);
        }
      }
    }

    // height: walk one longest chain, redirect a duplicate to its ancestor
    if (!changed && graph_height(g) > q0) {
      int v = 0;
      for (size_t i = 0; i < g.vertices.size(); ++i)
        if (g.height[i] > g.height[static_cast<size_t>(v)])
          v = static_cast<int>(i);
      std::vector<int> chain;
      while (true) {
        chain.push_back(v);
        int best = -1;
        for (int d : g.depend[static_cast<size_t>(v)])
          if (best < 0 || g.height[static_cast<size_t>(d)] >
                              g.height[static_cast<size_t>(best)])
            best = d;
        if (best < 0) break;
        v = best;
      }
      std::reverse(chain.begin(), chain.end());  // ancestors first
      std::map<std::pair<int, int>, int> seen;   // (var,val) -> vertex
      for (int u : chain) {
        const Message& m = g.vertices[static_cast<size_t>(u)];
        if (!abs_is_plus(m.own_ts())) continue;
        auto key = std::make_pair(m.var, m.val);
        auto it = seen.find(key);
        if (it == seen.end()) {
          seen.emplace(key, u);
          continue;
        }
        auto fromS = src_of(*cur, m);
        auto toS =
            src_of(*cur, g.vertices[static_cast<size_t>(it->second)]);
        if (fromS && toS && try_redirect(*cur, *fromS, *toS)) {
          changed = true;
          break;
        }
      }
    }

    if (!changed) break;
  }
  return *cur;
}

}  // namespace raver
