#pragma once
// Datalog back end for message generation.  The recursive environment side
// is compiled once into ground Horn rules over a finite universe of views;
// the loop-free dis threads are enumerated as explicit run guesses, each
// contributing a chain of ground rules plus the timestamp-availability
// facts its CAS claims leave open.  A goal message is generable iff some
// guess's query instance derives a matching emp/dmp atom.

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "abstract.hpp"
#include "datalog.hpp"

namespace raver {

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

// Upper bound on the distinct plain timestamps dis threads can need: the
// combined instruction count of all dis programs.  Abstract timestamps are
// then drawn from {0, 0+, ..., T, T+}.
inline Ts timestamp_bound(const SystemSpec& s) {
  Ts total = 0;
  for (const auto& p : s.disPrograms) {
    if (p.role != Role::Dis) continue;
    if (!classify(*p.body).acyc)
      throw std::runtime_error("timestamp bound requires loop-free dis threads");
    total += static_cast<Ts>(instruction_count(*p.body));
  }
  return total;
}

// Retention-bound sufficient for the generated query instances: 2*Q0^2 with
// Q0 = 2|Dom||Var| + (combined dis instruction count).
inline int cache_bound(const SystemSpec& s) {
  int cdis = 0;
  for (const auto& p : s.disPrograms)
    if (p.role == Role::Dis) cdis += instruction_count(*p.body);
  int q0 = 2 * s.dom * static_cast<int>(s.vars.size()) + cdis;
  return 2 * q0 * q0;
}

// ---------------------------------------------------------------------------
// Dis-run guesses
// ---------------------------------------------------------------------------

struct GuessStep {
  int edge = -1;                    // index into the thread's LTS edge list
  StepKind kind = StepKind::Silent;
  std::optional<Message> loaded;    // Ld / CasOp read message (abstract view)
  bool loadedIsEnv = false;         // read message carries a raised timestamp
  Ts storeCode = 0;                 // plain code written by St / CasOp
  std::vector<int> rvAfter;
  View viewAfter;
  int ctrlAfter = 0;
};

struct DisRunGuess {
  std::vector<std::vector<GuessStep>> runs;  // parallel to dis thread list
};

struct QueryInstance {
  dl::Program program;
  dl::Atom goal;       // representative dmp goal atom (initial view)
  int empPred = -1;
  int dmpPred = -1;
  int goalVarConst = -1;
  int goalValConst = -1;
};

namespace detail {

// Over-approximation of the reachable environment/dis local states and
// messages, computed by a joint fixpoint that ignores the blocked-timestamp
// discipline and per-variable uniqueness of plain timestamps.  Used both as
// the grounding universe for the environment rules and as the candidate set
// for guessed loads.
struct RelaxedClosure {
  std::set<LocalConfig> envLcfs;
  std::vector<std::set<LocalConfig>> disLcfs;  // Dis-role threads only
  std::set<Message> envMsgs;                   // raised own timestamps
  std::set<Message> disMsgs;                   // plain (includes initial)
  Ts bound = 0;                                // max plain level used
  std::vector<Ts> varBound;                    // per-variable plain level cap
};

inline RelaxedClosure relaxed_closure(const CompiledSystem& cs) {
  RelaxedClosure rc;
  rc.bound = default_ts_bound(cs, false);
  rc.varBound = per_var_ts_bounds(cs, false);
  for (Ts& b : rc.varBound) b = std::min(b, rc.bound);
  const int nv = cs.num_vars();
  const int dom = cs.spec.dom;
  View v0(static_cast<size_t>(nv), abs_nat(0));
  std::vector<int> rv0(cs.spec.regs.size(), 0);
  for (int x = 0; x < nv; ++x)
    rc.disMsgs.insert(Message{x, cs.spec.initValue, v0, -1});
  rc.disLcfs.resize(cs.spec.disPrograms.size());

  auto all_msgs = [&]() {
    std::vector<Message> ms(rc.disMsgs.begin(), rc.disMsgs.end());
    ms.insert(ms.end(), rc.envMsgs.begin(), rc.envMsgs.end());
    return ms;
  };

  // expand one local configuration against the current message sets
  auto expand = [&](const LTS& lts, const LocalConfig& lc, bool isEnv,
                    std::set<LocalConfig>& states, bool& changed) {
    auto emit = [&](LocalConfig nl) {
      if (states.insert(nl).second) changed = true;
    };
    for (int ei : lts.out[static_cast<size_t>(lc.ctrl)]) {
      const auto& e = lts.edges[static_cast<size_t>(ei)];
      const Command& c = *e.label;
      LocalConfig nl = lc;
      nl.ctrl = e.to;
      switch (c.kind) {
        case CmdKind::Skip:
          emit(nl);
          break;
        case CmdKind::Assume:
          if (eval_expr(*c.expr, lc.rv, dom) != 0) emit(nl);
          break;
        case CmdKind::Assign:
          nl.rv[static_cast<size_t>(c.reg)] = eval_expr(*c.expr, lc.rv, dom);
          emit(nl);
          break;
        case CmdKind::Load: {
          for (const Message& m : all_msgs()) {
            if (m.var != c.var) continue;
            View nvw;
            if (!detail::read_msg(m, lc.view, nvw)) continue;
            LocalConfig ld = nl;
            ld.rv[static_cast<size_t>(c.reg)] = m.val;
            ld.view = nvw;
            emit(ld);
          }
          break;
        }
        case CmdKind::Store: {
          int val = c.src.value(lc.rv) % dom;
          size_t x = static_cast<size_t>(c.var);
          if (isEnv) {
            for (Ts lvl = 0; lvl <= rc.varBound[x]; ++lvl) {
              if (raise_ts(lc.view[x]) > abs_plus(lvl)) continue;
              LocalConfig st = nl;
              st.view[x] = abs_plus(lvl);
              Message msg{c.var, val, st.view, -1};
              if (rc.envMsgs.insert(msg).second) changed = true;
              emit(st);
            }
          } else {
            for (Ts lvl = 1; lvl <= rc.varBound[x]; ++lvl) {
              if (abs_nat(lvl) <= lc.view[x]) continue;
              LocalConfig st = nl;
              st.view[x] = abs_nat(lvl);
              Message msg{c.var, val, st.view, 0};
              if (rc.disMsgs.insert(msg).second) changed = true;
              emit(st);
            }
          }
          break;
        }
        case CmdKind::Cas: {
          if (isEnv) break;  // loop-free class keeps env CAS-free
          int cmp = c.src.value(lc.rv) % dom;
          int newv = c.src2.value(lc.rv) % dom;
          size_t x = static_cast<size_t>(c.var);
          for (const Message& m : all_msgs()) {
            if (m.var != c.var || m.val != cmp) continue;
            Ts rcode = m.own_ts();
            View nvw;
            if (!detail::read_msg(m, lc.view, nvw)) continue;
            if (abs_is_plus(rcode) && nvw[x] != rcode) continue;
            Ts lvl = abs_level(rcode) + 1;
            if (lvl > rc.varBound[x]) continue;
            LocalConfig st = nl;
            st.view = nvw;
            st.view[x] = abs_nat(lvl);
            Message msg{c.var, newv, st.view, 0};
            if (rc.disMsgs.insert(msg).second) changed = true;
            emit(st);
          }
          break;
        }
        default:
          break;  // assert(false): no rule
      }
    }
  };

  if (cs.spec.envProgram)
    rc.envLcfs.insert(LocalConfig{cs.envLts.initial, rv0, v0});
  for (size_t i = 0; i < cs.spec.disPrograms.size(); ++i)
    if (cs.spec.disPrograms[i].role == Role::Dis)
      rc.disLcfs[i].insert(LocalConfig{cs.disLts[i].initial, rv0, v0});

  bool changed = true;
  while (changed) {
    changed = false;
    if (cs.spec.envProgram) {
      auto snapshot = rc.envLcfs;
      for (const auto& lc : snapshot)
        expand(cs.envLts, lc, true, rc.envLcfs, changed);
    }
    for (size_t i = 0; i < cs.spec.disPrograms.size(); ++i) {
      if (cs.spec.disPrograms[i].role != Role::Dis) continue;
      auto snapshot = rc.disLcfs[i];
      for (const auto& lc : snapshot)
        expand(cs.disLts[i], lc, false, rc.disLcfs[i], changed);
    }
  }
  return rc;
}

// interner giving every constant a stable id and readable name
struct Interner {
  dl::Program* p;
  std::map<std::string, int> ids;
  int get(const std::string& name) {
    auto it = ids.find(name);
    if (it != ids.end()) return it->second;
    p->constNames.push_back(name);
    int id = static_cast<int>(p->constNames.size()) - 1;
    ids[name] = id;
    return id;
  }
};

inline std::string ts_name(Ts code) {
  std::string s = std::to_string(abs_level(code));
  if (abs_is_plus(code)) s += '+';
  return s;
}

inline std::string view_name(const SystemSpec& s, const View& v) {
  std::string out = "{";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += s.vars[i] + ":" + ts_name(v[i]);
  }
  return out + "}";
}

inline std::string rv_name(const std::vector<int>& rv) {
  std::string out = "r[";
  for (size_t i = 0; i < rv.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(rv[i]);
  }
  return out + "]";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Guess enumeration
// ---------------------------------------------------------------------------

// All locally consistent runs (including every prefix) of each dis thread,
// combined so that plain write timestamps are distinct per variable and form
// an initial segment {1..m}; order-isomorphic timestamp assignments thus
// collapse to one representative.
inline std::vector<DisRunGuess> enumerate_guesses(const SystemSpec& s, Ts T) {
  CompiledSystem cs = compile(s);
  auto rc = detail::relaxed_closure(cs);
  (void)T;  // guessed plain values live in {1..bound} subset of {1..T}

  const int dom = s.dom;
  std::vector<std::vector<std::vector<GuessStep>>> perThread;
  std::vector<size_t> disIdx;
  for (size_t i = 0; i < s.disPrograms.size(); ++i) {
    if (s.disPrograms[i].role != Role::Dis) continue;
    disIdx.push_back(i);
    const LTS& lts = cs.disLts[i];
    std::vector<std::vector<GuessStep>> runs;
    std::vector<Message> msgs(rc.disMsgs.begin(), rc.disMsgs.end());
    msgs.insert(msgs.end(), rc.envMsgs.begin(), rc.envMsgs.end());

    // A run prefix only matters on its own when cutting it off avoids a
    // downstream CAS region claim; otherwise any maximal extension derives a
    // superset.  dfs returns (hadExtension, claimBelow) and records the
    // prefix when it is maximal or shields a later claim.
    std::vector<GuessStep> cur;
    std::function<std::pair<bool, bool>(const LocalConfig&)> dfs =
        [&](const LocalConfig& lc) -> std::pair<bool, bool> {
      bool hadChild = false, claimBelow = false;
      auto child = [&](const LocalConfig& nl, bool claimHere) {
        auto [sub, subClaim] = dfs(nl);
        (void)sub;
        hadChild = true;
        claimBelow = claimBelow || claimHere || subClaim;
      };
      for (int ei : lts.out[static_cast<size_t>(lc.ctrl)]) {
        const auto& e = lts.edges[static_cast<size_t>(ei)];
        const Command& c = *e.label;
        auto push = [&](GuessStep st, LocalConfig nl) {
          bool claims = st.kind == StepKind::CasOp && !st.loadedIsEnv;
          st.edge = ei;
          st.ctrlAfter = e.to;
          st.rvAfter = nl.rv;
          st.viewAfter = nl.view;
          cur.push_back(std::move(st));
          nl.ctrl = e.to;
          child(nl, claims);
          cur.pop_back();
        };
        LocalConfig nl = lc;
        switch (c.kind) {
          case CmdKind::Skip:
            push(GuessStep{}, nl);
            break;
          case CmdKind::Assume:
            if (eval_expr(*c.expr, lc.rv, dom) != 0) push(GuessStep{}, nl);
            break;
          case CmdKind::Assign:
            nl.rv[static_cast<size_t>(c.reg)] = eval_expr(*c.expr, lc.rv, dom);
            push(GuessStep{}, nl);
            break;
          case CmdKind::Load:
            for (const Message& m : msgs) {
              if (m.var != c.var) continue;
              View nvw;
              if (!detail::read_msg(m, lc.view, nvw)) continue;
              LocalConfig ld = lc;
              ld.rv[static_cast<size_t>(c.reg)] = m.val;
              ld.view = nvw;
              GuessStep st;
              st.kind = StepKind::Ld;
              st.loaded = m;
              st.loadedIsEnv = abs_is_plus(m.own_ts());
              push(st, ld);
            }
            break;
          case CmdKind::Store: {
            int val = c.src.value(lc.rv) % dom;
            (void)val;
            size_t x = static_cast<size_t>(c.var);
            for (Ts lvl = 1; lvl <= rc.varBound[x]; ++lvl) {
              if (abs_nat(lvl) <= lc.view[x]) continue;
              LocalConfig sl = lc;
              sl.view[x] = abs_nat(lvl);
              GuessStep st;
              st.kind = StepKind::St;
              st.storeCode = abs_nat(lvl);
              push(st, sl);
            }
            break;
          }
          case CmdKind::Cas: {
            int cmp = c.src.value(lc.rv) % dom;
            size_t x = static_cast<size_t>(c.var);
            for (const Message& m : msgs) {
              if (m.var != c.var || m.val != cmp) continue;
              Ts rcode = m.own_ts();
              View nvw;
              if (!detail::read_msg(m, lc.view, nvw)) continue;
              if (abs_is_plus(rcode) && nvw[x] != rcode) continue;
              Ts lvl = abs_level(rcode) + 1;
              if (lvl > rc.varBound[x]) continue;
              LocalConfig cl = lc;
              cl.view = nvw;
              cl.view[x] = abs_nat(lvl);
              GuessStep st;
              st.kind = StepKind::CasOp;
              st.loaded = m;
              st.loadedIsEnv = abs_is_plus(rcode);
              st.storeCode = abs_nat(lvl);
              push(st, cl);
            }
            break;
          }
          default:
            break;
        }
      }
      if (!hadChild || claimBelow) runs.push_back(cur);
      return {hadChild, claimBelow};
    };
    View v0(static_cast<size_t>(cs.num_vars()), abs_nat(0));
    dfs(LocalConfig{lts.initial, std::vector<int>(s.regs.size(), 0), v0});

    // steps after the last write are sinks for message derivation: they
    // produce neither messages nor claims, so drop them and deduplicate
    std::set<std::string> sigs;
    std::vector<std::vector<GuessStep>> trimmed;
    for (auto& run : runs) {
      size_t keep = 0;
      for (size_t j = 0; j < run.size(); ++j)
        if (run[j].kind == StepKind::St || run[j].kind == StepKind::CasOp)
          keep = j + 1;
      run.resize(keep);
      std::string sig;
      for (const auto& st : run) {
        sig += std::to_string(st.edge) + ',' + std::to_string(st.storeCode);
        if (st.loaded)
          sig += detail::view_name(s, st.loaded->view) +
                 std::to_string(st.loaded->val);
        sig += ';';
      }
      if (sigs.insert(sig).second) trimmed.push_back(std::move(run));
    }
    perThread.push_back(std::move(trimmed));
  }

  // combine runs; keep only combinations whose plain write levels per
  // variable form an initial segment with no clashes
  std::vector<DisRunGuess> out;
  std::vector<size_t> pick(perThread.size(), 0);
  auto admissible = [&](const DisRunGuess& g) {
    std::map<int, std::set<Ts>> levels;
    CompiledSystem* csp = &cs;
    for (size_t t = 0; t < g.runs.size(); ++t) {
      const LTS& lts = csp->disLts[disIdx[t]];
      for (const auto& st : g.runs[t]) {
        if (st.kind != StepKind::St && st.kind != StepKind::CasOp) continue;
        int x = lts.edges[static_cast<size_t>(st.edge)].label->var;
        if (!levels[x].insert(abs_level(st.storeCode)).second) return false;
      }
    }
    for (auto& [x, ls] : levels) {
      Ts expect = 1;
      for (Ts l : ls)
        if (l != expect++) return false;
    }
    return true;
  };
  std::function<void(size_t, DisRunGuess&)> combine = [&](size_t t,
                                                          DisRunGuess& g) {
    if (t == perThread.size()) {
      if (admissible(g)) out.push_back(g);
      return;
    }
    for (const auto& run : perThread[t]) {
      g.runs.push_back(run);
      combine(t + 1, g);
      g.runs.pop_back();
    }
  };
  DisRunGuess g;
  combine(0, g);
  // simpler guesses first
  std::stable_sort(out.begin(), out.end(),
                   [](const DisRunGuess& a, const DisRunGuess& b) {
                     size_t na = 0, nb = 0;
                     for (const auto& r : a.runs) na += r.size();
                     for (const auto& r : b.runs) nb += r.size();
                     return na < nb;
                   });
  return out;
}

// ---------------------------------------------------------------------------
// Instance emission
// ---------------------------------------------------------------------------

namespace detail {

// Grounds the guess-independent part (predicates, constants, initial facts,
// environment rules) once; each guess then contributes only its availability
// facts and dis chains.
struct InstanceBuilder {
  const CompiledSystem& cs;
  RelaxedClosure rc;
  Ts T;
  dl::Program base;
  int empPred = -1, dmpPred = -1, etpPred = -1, availPred = -1;
  std::vector<int> dtp;
  std::vector<size_t> disIdx;
  std::map<std::string, int> ids;

  int get(const std::string& name) {
    auto it = ids.find(name);
    if (it != ids.end()) return it->second;
    base.constNames.push_back(name);
    int id = static_cast<int>(base.constNames.size()) - 1;
    ids[name] = id;
    return id;
  }
  int varC(int x) { return get(cs.spec.vars[static_cast<size_t>(x)]); }
  int valC(int d) { return get("d" + std::to_string(d)); }
  int viewC(const View& v) { return get(view_name(cs.spec, v)); }
  int rvC(const std::vector<int>& rv) { return get(rv_name(rv)); }
  int tsC(Ts code) { return get(ts_name(code)); }
  int envCtrlC(int l) { return get("e" + std::to_string(l)); }
  int disCtrlC(size_t t, int l) {
    return get("t" + std::to_string(t) + "_" + std::to_string(l));
  }
  dl::Atom msg_atom(const Message& m) {
    int pred = abs_is_plus(m.own_ts()) ? empPred : dmpPred;
    return dl::Atom{pred, {varC(m.var), valC(m.val), viewC(m.view)}};
  }

  explicit InstanceBuilder(const CompiledSystem& sys)
      : cs(sys), rc(relaxed_closure(sys)), T(timestamp_bound(sys.spec)) {
    const SystemSpec& s = cs.spec;
    empPred = base.add_pred("emp", 3);
    dmpPred = base.add_pred("dmp", 3);
    if (s.envProgram) etpPred = base.add_pred("etp", 3);
    availPred = base.add_pred("avail", 2);
    for (size_t i = 0; i < s.disPrograms.size(); ++i)
      if (s.disPrograms[i].role == Role::Dis) {
        disIdx.push_back(i);
        dtp.push_back(
            base.add_pred("dtp_" + std::to_string(disIdx.size() - 1), 3));
      }

    View v0(static_cast<size_t>(cs.num_vars()), abs_nat(0));
    std::vector<int> rv0(s.regs.size(), 0);
    for (int x = 0; x < cs.num_vars(); ++x)
      base.facts.push_back({dmpPred, {varC(x), valC(s.initValue), viewC(v0)}});
    if (etpPred >= 0)
      base.facts.push_back(
          {etpPred, {envCtrlC(cs.envLts.initial), rvC(rv0), viewC(v0)}});
    for (size_t t = 0; t < disIdx.size(); ++t)
      base.facts.push_back(
          {dtp[t],
           {disCtrlC(t, cs.disLts[disIdx[t]].initial), rvC(rv0), viewC(v0)}});

    if (etpPred < 0) return;
    std::set<std::string> emitted;
    auto add_rule = [&](dl::Rule r) {
      std::ostringstream key;
      key << r.head.pred;
      for (int a : r.head.args) key << ' ' << a;
      for (const auto& b : r.body) {
        key << '|' << b.pred;
        for (int a : b.args) key << ' ' << a;
      }
      if (emitted.insert(key.str()).second) base.rules.push_back(std::move(r));
    };
    std::vector<Message> universe(rc.disMsgs.begin(), rc.disMsgs.end());
    universe.insert(universe.end(), rc.envMsgs.begin(), rc.envMsgs.end());
    for (const auto& lc : rc.envLcfs) {
      dl::Atom body{etpPred,
                    {envCtrlC(lc.ctrl), rvC(lc.rv), viewC(lc.view)}};
      for (int ei : cs.envLts.out[static_cast<size_t>(lc.ctrl)]) {
        const auto& e = cs.envLts.edges[static_cast<size_t>(ei)];
        const Command& c = *e.label;
        switch (c.kind) {
          case CmdKind::Skip:
            add_rule({{etpPred, {envCtrlC(e.to), rvC(lc.rv), viewC(lc.view)}},
                      {body}});
            break;
          case CmdKind::Assume:
            if (eval_expr(*c.expr, lc.rv, cs.spec.dom) != 0)
              add_rule(
                  {{etpPred, {envCtrlC(e.to), rvC(lc.rv), viewC(lc.view)}},
                   {body}});
            break;
          case CmdKind::Assign: {
            auto rv2 = lc.rv;
            rv2[static_cast<size_t>(c.reg)] =
                eval_expr(*c.expr, lc.rv, cs.spec.dom);
            add_rule({{etpPred, {envCtrlC(e.to), rvC(rv2), viewC(lc.view)}},
                      {body}});
            break;
          }
          case CmdKind::Load:
            for (const Message& m : universe) {
              if (m.var != c.var) continue;
              View nvw;
              if (!read_msg(m, lc.view, nvw)) continue;
              auto rv2 = lc.rv;
              rv2[static_cast<size_t>(c.reg)] = m.val;
              add_rule({{etpPred, {envCtrlC(e.to), rvC(rv2), viewC(nvw)}},
                        {body, msg_atom(m)}});
            }
            break;
          case CmdKind::Store: {
            int val = c.src.value(lc.rv) % cs.spec.dom;
            size_t x = static_cast<size_t>(c.var);
            for (Ts lvl = 0; lvl <= rc.varBound[x]; ++lvl) {
              if (raise_ts(lc.view[x]) > abs_plus(lvl)) continue;
              View nvw = lc.view;
              nvw[x] = abs_plus(lvl);
              dl::Atom gate{availPred, {varC(c.var), tsC(abs_plus(lvl))}};
              add_rule({{etpPred, {envCtrlC(e.to), rvC(lc.rv), viewC(nvw)}},
                        {body, gate}});
              add_rule({{empPred, {varC(c.var), valC(val), viewC(nvw)}},
                        {body, gate}});
            }
            break;
          }
          default:
            throw std::runtime_error(
                "environment thread outside the loop-free class");
        }
      }
    }
  }

  // regions claimed by guessed dis-read CAS operations: a plain read at ts
  // with the write at ts+1 leaves no room in between for environment stores
  std::map<int, std::set<Ts>> claims(const DisRunGuess& guess) const {
    std::map<int, std::set<Ts>> claimed;
    for (size_t t = 0; t < guess.runs.size(); ++t) {
      const LTS& lts = cs.disLts[disIdx[t]];
      for (const auto& st : guess.runs[t]) {
        if (st.kind != StepKind::CasOp || st.loadedIsEnv) continue;
        int x = lts.edges[static_cast<size_t>(st.edge)].label->var;
        claimed[x].insert(abs_level(st.storeCode) - 1);
      }
    }
    return claimed;
  }

  QueryInstance build(const DisRunGuess& guess, const GoalSpec& goal) {
    if (guess.runs.size() != disIdx.size())
      throw std::runtime_error("guess does not match the system's dis threads");
    QueryInstance qi;
    // availability facts first, then the shared base, then the chains
    auto claimed = claims(guess);
    dl::Program chains;  // staging for per-guess parts, merged below
    for (int x = 0; x < cs.num_vars(); ++x)
      for (Ts ts = 0; ts <= T; ++ts) {
        auto it = claimed.find(x);
        if (it != claimed.end() && it->second.count(ts)) continue;
        chains.facts.push_back({availPred, {varC(x), tsC(abs_plus(ts))}});
      }

    View v0(static_cast<size_t>(cs.num_vars()), abs_nat(0));
    std::vector<int> rv0(cs.spec.regs.size(), 0);
    std::set<std::string> emitted;
    auto add_rule = [&](dl::Rule r) {
      std::ostringstream key;
      key << r.head.pred;
      for (int a : r.head.args) key << ' ' << a;
      for (const auto& b : r.body) {
        key << '|' << b.pred;
        for (int a : b.args) key << ' ' << a;
      }
      if (emitted.insert(key.str()).second) chains.rules.push_back(std::move(r));
    };
    for (size_t t = 0; t < guess.runs.size(); ++t) {
      const LTS& lts = cs.disLts[disIdx[t]];
      int ctrl = lts.initial;
      std::vector<int> rv = rv0;
      View vw = v0;
      for (const auto& st : guess.runs[t]) {
        const auto& e = lts.edges[static_cast<size_t>(st.edge)];
        const Command& c = *e.label;
        dl::Atom prev{dtp[t], {disCtrlC(t, ctrl), rvC(rv), viewC(vw)}};
        dl::Atom next{dtp[t],
                      {disCtrlC(t, st.ctrlAfter), rvC(st.rvAfter),
                       viewC(st.viewAfter)}};
        switch (st.kind) {
          case StepKind::Silent:
            add_rule({next, {prev}});
            break;
          case StepKind::Ld:
            add_rule({next, {prev, msg_atom(*st.loaded)}});
            break;
          case StepKind::St: {
            int val = c.src.value(rv) % cs.spec.dom;
            add_rule({next, {prev}});
            add_rule({{dmpPred,
                       {varC(c.var), valC(val), viewC(st.viewAfter)}},
                      {prev}});
            break;
          }
          case StepKind::CasOp: {
            int newv = c.src2.value(rv) % cs.spec.dom;
            add_rule({next, {prev, msg_atom(*st.loaded)}});
            add_rule({{dmpPred,
                       {varC(c.var), valC(newv), viewC(st.viewAfter)}},
                      {prev, msg_atom(*st.loaded)}});
            break;
          }
        }
        ctrl = st.ctrlAfter;
        rv = st.rvAfter;
        vw = st.viewAfter;
      }
    }

    qi.program = base;  // constants interned so far cover the chain parts too
    qi.program.facts.insert(qi.program.facts.end(), chains.facts.begin(),
                            chains.facts.end());
    qi.program.rules.insert(qi.program.rules.end(), chains.rules.begin(),
                            chains.rules.end());
    qi.empPred = empPred;
    qi.dmpPred = dmpPred;
    qi.goalVarConst = varC(goal.var);
    qi.goalValConst = valC(goal.val);
    qi.goal = {dmpPred, {qi.goalVarConst, qi.goalValConst, viewC(v0)}};
    return qi;
  }
};

inline bool instance_goal_holds(const QueryInstance& qi,
                                const dl::Database& db) {
  for (int pred : {qi.dmpPred, qi.empPred}) {
    if (pred < 0) continue;
    for (const auto& t : db[static_cast<size_t>(pred)])
      if (t[0] == qi.goalVarConst && t[1] == qi.goalValConst) return true;
  }
  return false;
}

}  // namespace detail

inline QueryInstance encode_instance(const SystemSpec& s,
                                     const DisRunGuess& guess,
                                     const GoalSpec& goal) {
  CompiledSystem cs = compile(s);
  detail::InstanceBuilder b(cs);
  return b.build(guess, goal);
}

// ---------------------------------------------------------------------------
// Decision procedure
// ---------------------------------------------------------------------------

inline MgStatus solve_via_datalog(const SystemSpec& s, const GoalSpec& goal) {
  if (s.envProgram && !classify(*s.envProgram->body).nocas)
    throw std::runtime_error("environment threads must be CAS-free");
  for (const auto& t : s.disPrograms)
    if (t.role == Role::Dis && !classify(*t.body).acyc)
      throw std::runtime_error("dis threads must be loop-free");

  CompiledSystem cs = compile(s);
  detail::InstanceBuilder builder(cs);
  auto guesses = enumerate_guesses(s, builder.T);
  std::set<std::string> seen;  // skip guesses that yield identical instances
  for (const auto& g : guesses) {
    // key the guess on what actually reaches the program: claims + chains
    std::ostringstream key;
    for (const auto& [x, ts] : builder.claims(g)) {
      key << x << ':';
      for (Ts v : ts) key << v << ' ';
      key << ';';
    }
    key << '#';
    for (size_t t = 0; t < g.runs.size(); ++t) {
      for (const auto& st : g.runs[t])
        key << st.edge << ',' << static_cast<int>(st.kind) << ','
            << st.storeCode << ','
            << (st.loaded ? detail::view_name(s, st.loaded->view) +
                                std::to_string(st.loaded->val)
                          : std::string("-"))
            << ';';
      key << '|';
    }
    if (!seen.insert(key.str()).second) continue;
    QueryInstance qi = builder.build(g, goal);
    if (detail::instance_goal_holds(qi, dl::infer(qi.program)))
      return MgStatus::Generable;
  }
  return MgStatus::NotGenerable;
}

}  // namespace raver
