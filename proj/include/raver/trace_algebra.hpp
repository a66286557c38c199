#pragma once
// Operations on concrete traces: timestamp relifting, superposition of runs
// that agree on their distinguished-thread messages, and duplication of an
// environment-produced message at a chosen timestamp region.

#include <map>
#include <optional>
#include <stdexcept>

#include "concrete.hpp"

namespace raver {

struct TraceAlgebraError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using TsMap = std::map<Ts, Ts>;          // partial, strictly increasing
using TsMaps = std::vector<TsMap>;       // one per shared variable

// -- liftings ----------------------------------------------------------------

// Timestamps actually used on each variable (0 plus every message's own ts).
inline std::vector<std::set<Ts>> used_timestamps(const CompiledSystem& cs,
                                                 const Trace& tr) {
  std::vector<std::set<Ts>> used(cs.spec.vars.size());
  for (size_t x = 0; x < used.size(); ++x) used[x].insert(0);
  auto add = [&](const Config& cf) {
    for (const auto& m : cf.memory)
      used[static_cast<size_t>(m.var)].insert(m.own_ts());
  };
  add(tr.initial);
  for (const auto& st : tr.steps)
    for (const auto& m : st.msgs)
      used[static_cast<size_t>(m.var)].insert(m.own_ts());
  return used;
}

// CAS pairs (read ts, write ts) per variable appearing in the trace.
inline std::vector<std::set<Ts>> cas_read_timestamps(const CompiledSystem& cs,
                                                     const Trace& tr) {
  std::vector<std::set<Ts>> pairs(cs.spec.vars.size());
  for (const auto& st : tr.steps)
    if (st.kind == StepKind::CasOp && st.msgs.size() == 2)
      pairs[static_cast<size_t>(st.msgs[0].var)].insert(st.msgs[0].own_ts());
  return pairs;
}

namespace detail {
inline Ts map_ts(const TsMap& mu, Ts t) {
  auto it = mu.find(t);
  if (it == mu.end())
    throw TraceAlgebraError("timestamp map undefined at " + std::to_string(t));
  return it->second;
}

inline View map_view(const TsMaps& mu, const View& vw) {
  View out(vw.size());
  for (size_t x = 0; x < vw.size(); ++x) out[x] = map_ts(mu[x], vw[x]);
  return out;
}
}  // namespace detail

// Apply per-variable timestamp maps to every view of a trace.  The maps must
// fix 0, be strictly increasing on the trace's timestamps, and keep
// compare-and-swap read/write timestamps adjacent.  The result is validated.
inline Trace lift_trace(const CompiledSystem& cs, const Trace& tr,
                        const TsMaps& mu) {
  auto used = used_timestamps(cs, tr);
  auto casReads = cas_read_timestamps(cs, tr);
  for (size_t x = 0; x < mu.size(); ++x) {
    Ts prevIn = 0, prevOut = 0;
    bool first = true;
    for (Ts t : used[x]) {
      Ts img = detail::map_ts(mu[x], t);
      if (t == 0 && img != 0)
        throw TraceAlgebraError("lifting must fix timestamp 0");
      if (!first && prevOut >= img)
        throw TraceAlgebraError("lifting not strictly increasing");
      prevIn = t;
      prevOut = img;
      first = false;
    }
    for (Ts r : casReads[x])
      if (detail::map_ts(mu[x], r + 1) != detail::map_ts(mu[x], r) + 1)
        throw TraceAlgebraError("lifting splits a compare-and-swap pair");
  }
  Trace out = tr;
  for (auto& m : out.initial.memory) m.view = detail::map_view(mu, m.view);
  for (auto& t : out.initial.threads) t.view = detail::map_view(mu, t.view);
  for (auto& st : out.steps)
    for (auto& m : st.msgs) m.view = detail::map_view(mu, m.view);
  auto vr = validate_run(cs, out);
  if (!vr.valid)
    throw TraceAlgebraError("lifted trace invalid at step " +
                            std::to_string(vr.stepIndex) + ": " +
                            vr.ruleViolated);
  return out;
}

// -- superposition -----------------------------------------------------------

// Append the environment steps of `b` onto the end of `a`, with fresh
// environment replicas.  Requires that both traces produce exactly the same
// distinguished-thread messages; the result is validated (environment
// timestamps of the two runs must not collide).
inline Trace superpose(const CompiledSystem& cs, const Trace& a,
                       const Trace& b) {
  Config fa, fb;
  auto va = validate_run(cs, a, &fa);
  if (!va.valid) throw TraceAlgebraError("left trace invalid");
  auto vb = validate_run(cs, b, &fb);
  if (!vb.valid) throw TraceAlgebraError("right trace invalid");
  auto disMsgs = [](const Config& cf) {
    std::vector<Message> ms;
    for (const auto& m : cf.memory)
      if (m.genDis >= 0) ms.push_back(m);
    std::sort(ms.begin(), ms.end());
    return ms;
  };
  if (disMsgs(fa) != disMsgs(fb))
    throw TraceAlgebraError(
        "superposition requires equal distinguished-thread messages");

  // Non-environment thread ids are shared; environment tids of b are
  // remapped to fresh replicas appended after a's threads.
  Trace out = a;
  std::map<int, int> remap;
  for (size_t i = 0; i < b.initial.roles.size(); ++i) {
    if (b.initial.roles[i] != Role::Env) continue;
    remap[static_cast<int>(i)] = static_cast<int>(out.initial.threads.size());
    out.initial.threads.push_back(b.initial.threads[i]);
    out.initial.roles.push_back(Role::Env);
  }
  for (const auto& st : b.steps) {
    if (b.initial.roles[static_cast<size_t>(st.tid)] != Role::Env) continue;
    Step s2 = st;
    s2.tid = remap.at(st.tid);
    out.steps.push_back(std::move(s2));
  }
  auto vr = validate_run(cs, out);
  if (!vr.valid)
    throw TraceAlgebraError("superposition invalid at step " +
                            std::to_string(vr.stepIndex) + ": " +
                            vr.ruleViolated);
  return out;
}

// -- gap compression ---------------------------------------------------------

struct CompressedTrace {
  Trace trace;
  TsMaps floorMap;  // original used ts -> compressed ts (dense 0..k)
};

// Renumber each variable's timestamps densely (0..k preserving order).
inline CompressedTrace gap_compress(const CompiledSystem& cs,
                                    const Trace& tr) {
  auto used = used_timestamps(cs, tr);
  CompressedTrace out;
  out.floorMap.resize(used.size());
  for (size_t x = 0; x < used.size(); ++x) {
    Ts next = 0;
    for (Ts t : used[x]) out.floorMap[x][t] = next++;
  }
  out.trace = tr;
  for (auto& m : out.trace.initial.memory)
    m.view = detail::map_view(out.floorMap, m.view);
  for (auto& t : out.trace.initial.threads)
    t.view = detail::map_view(out.floorMap, t.view);
  for (auto& st : out.trace.steps)
    for (auto& m : st.msgs) m.view = detail::map_view(out.floorMap, m.view);
  return out;
}

// -- message replication -----------------------------------------------------

struct ReplicateResult {
  Trace trace;       // combined valid trace
  Message original;  // image of the target message in the combined trace
  Message copy;      // the freshly produced duplicate
  TsMaps mu1;        // original ts -> combined ts for the base run
  TsMaps mu2;        // original ts -> combined ts for the duplicate run
  Ts tStarImage = 0; // image of the requested timestamp under mu2
};

namespace detail {

struct SlotPlan {
  // per variable, flags over compressed timestamps 1..k: true if produced by
  // an environment thread
  std::vector<std::vector<bool>> isEnv;
  TsMaps m1;  // compressed ts -> spread ts (env images at the top slot)
};

inline SlotPlan plan_slots(const CompiledSystem& cs, const Trace& compressed) {
  SlotPlan plan;
  size_t nVars = cs.spec.vars.size();
  plan.isEnv.assign(nVars, {});
  std::vector<Ts> top(nVars, 0);
  for (const auto& st : compressed.steps)
    for (const auto& m : st.msgs)
      top[static_cast<size_t>(m.var)] =
          std::max(top[static_cast<size_t>(m.var)], m.own_ts());
  plan.m1.resize(nVars);
  for (size_t x = 0; x < nVars; ++x) {
    plan.isEnv[x].assign(top[x] + 1, false);
    for (const auto& st : compressed.steps)
      for (const auto& m : st.msgs)
        if (static_cast<size_t>(m.var) == x && m.genDis < 0 && m.own_ts() > 0)
          plan.isEnv[x][m.own_ts()] = true;
    Ts img = 0;
    plan.m1[x][0] = 0;
    for (Ts t = 1; t <= top[x]; ++t) {
      img += plan.isEnv[x][t] ? 3 : 1;  // leave two spare slots below env
      plan.m1[x][t] = img;
    }
  }
  return plan;
}

}  // namespace detail

// Produce a trace containing both the message written by step `storeStep`
// (an environment store of the input trace) and a duplicate of it whose
// own timestamp is steered by `tStar`:
//   - the duplicate's timestamp is at least the image of tStar,
//   - it stays below the image of every later distinguished-thread
//     timestamp on the same variable, and
//   - on other variables its view does not exceed the original's image.
// The environment program must not use compare-and-swap.
inline ReplicateResult replicate_env_message(const CompiledSystem& cs,
                                             const Trace& tr, size_t storeStep,
                                             Ts tStar) {
  if (cs.spec.envProgram) {
    auto fl = classify(*cs.spec.envProgram->body);
    if (!fl.nocas)
      throw TraceAlgebraError(
          "replication requires a compare-and-swap-free environment");
  }
  if (storeStep >= tr.steps.size() ||
      tr.steps[storeStep].kind != StepKind::St ||
      tr.initial.roles[static_cast<size_t>(tr.steps[storeStep].tid)] !=
          Role::Env)
    throw TraceAlgebraError("target step is not an environment store");

  auto comp = gap_compress(cs, tr);
  const Trace& ctr = comp.trace;
  auto plan = detail::plan_slots(cs, ctr);
  size_t nVars = cs.spec.vars.size();

  const Message target = ctr.steps[storeStep].msgs[0];
  size_t xv = static_cast<size_t>(target.var);
  int targetTid = ctr.steps[storeStep].tid;

  // mu2 on compressed coordinates: distinguished timestamps as in m1,
  // environment timestamps two slots below their m1 image.
  TsMaps m2(nVars);
  for (size_t x = 0; x < nVars; ++x)
    for (auto [t, img] : plan.m1[x])
      m2[x][t] = (t > 0 && plan.isEnv[x][t]) ? img - 2 : img;

  // Base run: the whole trace lifted by m1.
  Trace combined = lift_trace(cs, ctr, plan.m1);

  // Duplicate run: replay every environment step, redirecting reads of
  // environment messages to the duplicates and writing two slots below.
  std::map<int, int> remap;  // env tid -> replica tid
  for (size_t i = 0; i < ctr.initial.roles.size(); ++i) {
    if (ctr.initial.roles[i] != Role::Env) continue;
    remap[static_cast<int>(i)] =
        static_cast<int>(combined.initial.threads.size());
    combined.initial.threads.push_back(ctr.initial.threads[i]);
    combined.initial.roles.push_back(Role::Env);
  }
  struct Replica {
    LocalConfig lc;
  };
  std::map<int, LocalConfig> rstate;
  for (auto [tid, rtid] : remap)
    rstate[tid] = ctr.initial.threads[static_cast<size_t>(tid)];

  Message copyMsg;
  bool copyFound = false;

  // producing thread of each compressed (var, ts) message
  std::vector<std::map<Ts, int>> producer(nVars);
  for (const auto& st : ctr.steps)
    if (st.kind == StepKind::St || st.kind == StepKind::CasOp)
      producer[static_cast<size_t>(st.msgs.back().var)]
              [st.msgs.back().own_ts()] = st.tid;

  auto replay_env = [&](const Trace& src, const TsMaps& envMap,
                        std::map<int, LocalConfig>& states,
                        const std::map<int, int>& tidMap,
                        std::optional<size_t> stopAfter,
                        std::optional<int> onlyTid) {
    std::vector<Step> out;
    for (size_t i = 0; i < src.steps.size(); ++i) {
      const Step& st = src.steps[i];
      if (src.initial.roles[static_cast<size_t>(st.tid)] != Role::Env)
        continue;
      if (onlyTid && st.tid != *onlyTid) continue;
      const LTS& lts = cs.lts_for(src.initial, st.tid);
      const Command& c = *lts.edges[static_cast<size_t>(st.edge)].label;
      LocalConfig& lc = states.at(st.tid);
      Step s2{tidMap.at(st.tid), st.kind, st.edge, {}};
      switch (c.kind) {
        case CmdKind::Assign:
          lc.rv[static_cast<size_t>(c.reg)] =
              eval_expr(*c.expr, lc.rv, cs.spec.dom);
          break;
        case CmdKind::Load: {
          Message read = st.msgs[0];
          size_t rx = static_cast<size_t>(read.var);
          // Reads of messages stored by a replayed thread go to that
          // duplicate; everything else stays at its base-run image.
          bool asDup = read.own_ts() > 0 && plan.isEnv[rx][read.own_ts()] &&
                       (!onlyTid ||
                        producer[rx].at(read.own_ts()) == *onlyTid);
          Ts nt = asDup ? detail::map_ts(envMap[rx], read.own_ts())
                        : detail::map_ts(plan.m1[rx], read.own_ts());
          View nv = read.view;
          // the message we read lives in the combined trace; reconstruct
          // its view there from its provenance
          if (asDup) {
            // an environment duplicate: its view was computed during this
            // replay; find it in the steps emitted so far
            bool found = false;
            for (auto it = out.rbegin(); it != out.rend() && !found; ++it)
              for (const auto& m : it->msgs)
                if (m.var == read.var && m.own_ts() == nt) {
                  nv = m.view;
                  found = true;
                  break;
                }
            if (!found)
              throw TraceAlgebraError("duplicate read before duplicate write");
          } else {
            nv = detail::map_view(plan.m1, read.view);
          }
          Message nm;
          nm.var = read.var;
          nm.val = read.val;
          nm.view = nv;
          nm.genDis = read.genDis;
          lc.rv[static_cast<size_t>(c.reg)] = nm.val;
          lc.view = join_views(lc.view, nm.view);
          s2.msgs = {nm};
          break;
        }
        case CmdKind::Store: {
          const Message& orig = st.msgs[0];
          size_t x = static_cast<size_t>(orig.var);
          Ts nt = detail::map_ts(envMap[x], orig.own_ts());
          lc.view[x] = nt;
          Message nm;
          nm.var = orig.var;
          nm.val = orig.val;
          nm.view = lc.view;
          nm.genDis = -1;
          s2.msgs = {nm};
          break;
        }
        default:
          break;
      }
      lc.ctrl = lts.edges[static_cast<size_t>(st.edge)].to;
      out.push_back(std::move(s2));
      if (stopAfter && i == *stopAfter) break;
    }
    return out;
  };

  std::map<int, int> tidMap2 = remap;
  auto dupSteps = replay_env(ctr, m2, rstate, tidMap2, std::nullopt,
                             std::nullopt);
  for (auto& s : dupSteps) combined.steps.push_back(s);

  // Locate the images of the target.
  Message originalImg = target;
  originalImg.view = detail::map_view(plan.m1, target.view);
  Ts vwx = target.own_ts();  // compressed own timestamp of the target

  // Compose tStar through the compression by flooring onto used timestamps.
  Ts tStarC = 0;
  for (auto [t, c] : comp.floorMap[xv])
    if (t <= tStar) tStarC = c;
  Ts tStarImg = tStarC == 0 ? 0
                : plan.isEnv[xv][tStarC]
                    ? detail::map_ts(m2[xv], tStarC)
                    : detail::map_ts(plan.m1[xv], tStarC);

  if (tStarC <= vwx) {
    // The duplicate produced by the replay already sits high enough.
    for (const auto& s : dupSteps)
      for (const auto& m : s.msgs)
        if (m.var == target.var &&
            m.own_ts() == detail::map_ts(m2[xv], vwx) && m.val == target.val) {
          copyMsg = m;
          copyFound = true;
        }
  } else {
    // Replay the producing thread once more, placing its final store in the
    // first free slot above the image of tStar and below the next
    // distinguished timestamp's image.
    std::set<Ts> occupied;
    for (const auto& m : combined.initial.memory)
      if (m.var == target.var) occupied.insert(m.own_ts());
    for (const auto& s : combined.steps)
      for (const auto& m : s.msgs)
        if (m.var == target.var) occupied.insert(m.own_ts());
    // third-copy slots of the producing thread's earlier stores
    TsMaps m3(nVars);
    for (size_t x = 0; x < nVars; ++x)
      for (auto [t, img] : plan.m1[x])
        m3[x][t] = (t > 0 && plan.isEnv[x][t]) ? img - 1 : img;
    std::optional<Ts> disBound;
    for (auto [t, img] : plan.m1[xv])
      if (t >= std::max(tStarC, vwx) && t > 0 && !plan.isEnv[xv][t]) {
        disBound = img;
        break;
      }
    // pre-claim the m3 slots the prefix replay will use
    if (storeStep > 0) {
      std::map<int, LocalConfig> probe;
      probe[targetTid] = ctr.initial.threads[static_cast<size_t>(targetTid)];
      std::map<int, int> probeMap{{targetTid, 0}};
      auto pre = replay_env(ctr, m3, probe, probeMap, storeStep - 1,
                            targetTid);
      for (auto& s : pre)
        for (auto& m : s.msgs)
          if (m.var == target.var && m.genDis < 0) occupied.insert(m.own_ts());
    }
    Ts s = tStarImg + 1;
    while (occupied.count(s)) ++s;
    if (disBound && s >= *disBound)
      throw TraceAlgebraError(
          "no free slot between the requested and the next distinguished "
          "timestamp");

    int replicaTid = static_cast<int>(combined.initial.threads.size());
    combined.initial.threads.push_back(
        ctr.initial.threads[static_cast<size_t>(targetTid)]);
    combined.initial.roles.push_back(Role::Env);
    std::map<int, LocalConfig> st3;
    st3[targetTid] = ctr.initial.threads[static_cast<size_t>(targetTid)];
    std::map<int, int> tidMap3{{targetTid, replicaTid}};
    size_t stop = storeStep == 0 ? 0 : storeStep - 1;
    std::vector<Step> prefix;
    if (storeStep > 0)
      prefix = replay_env(ctr, m3, st3, tidMap3, stop, targetTid);
    for (auto& s2 : prefix) combined.steps.push_back(s2);
    // final store at slot s
    LocalConfig& lc = st3.at(targetTid);
    const LTS& lts = cs.lts_for(ctr.initial, targetTid);
    const Command& c =
        *lts.edges[static_cast<size_t>(ctr.steps[storeStep].edge)].label;
    lc.view[xv] = s;
    Message nm;
    nm.var = target.var;
    nm.val = target.val;
    nm.view = lc.view;
    nm.genDis = -1;
    Step fin{replicaTid, StepKind::St, ctr.steps[storeStep].edge, {nm}};
    combined.steps.push_back(fin);
    (void)c;
    copyMsg = nm;
    copyFound = true;
  }
  if (!copyFound) throw TraceAlgebraError("duplicate message not produced");

  auto vr = validate_run(cs, combined);
  if (!vr.valid)
    throw TraceAlgebraError("replication invalid at step " +
                            std::to_string(vr.stepIndex) + ": " +
                            vr.ruleViolated);

  ReplicateResult res;
  res.trace = std::move(combined);
  res.original = originalImg;
  res.copy = copyMsg;
  res.mu1.resize(nVars);
  res.mu2.resize(nVars);
  for (size_t x = 0; x < nVars; ++x)
    for (auto [orig, c] : comp.floorMap[x]) {
      res.mu1[x][orig] = detail::map_ts(plan.m1[x], c);
      res.mu2[x][orig] = detail::map_ts(m2[x], c);
    }
  res.tStarImage = tStarImg;
  return res;
}

}  // namespace raver
