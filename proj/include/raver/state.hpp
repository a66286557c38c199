#pragma once
// Shared state model for both semantics.  A View maps each shared variable
// to a timestamp.  Concrete timestamps are plain naturals; the simplified
// semantics reuses the same structures with timestamps encoded as
// 2n (for n) and 2n+1 (for n+), which realizes the order n < n+ < n+1.

#include <algorithm>
#include <cstdint>
#include <tuple>

#include "lts.hpp"

namespace raver {

using Ts = std::uint32_t;
using View = std::vector<Ts>;  // indexed by variable

// Abstract-timestamp encoding helpers (simplified semantics only).
inline Ts abs_nat(Ts n) { return 2 * n; }
inline Ts abs_plus(Ts n) { return 2 * n + 1; }
inline bool abs_is_plus(Ts code) { return (code & 1) != 0; }
inline Ts abs_level(Ts code) { return code >> 1; }
inline Ts raise_ts(Ts code) { return code | 1; }

inline View join_views(const View& a, const View& b) {
  View r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = std::max(a[i], b[i]);
  return r;
}

// vw1 join^env_x vw2 = (vw1[x -> raise(vw1(x))]) join vw2
inline View join_env(const View& vw1, const View& vw2, int x) {
  View r = vw1;
  r[static_cast<size_t>(x)] = raise_ts(r[static_cast<size_t>(x)]);
  return join_views(r, vw2);
}

inline bool view_leq(const View& a, const View& b) {
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}

struct Message {
  int var = -1;
  int val = -1;
  View view;   // view[var] is the message's own timestamp
  int genDis = -1;  // generating dis/ldr thread index; -1 = env or initial

  Ts own_ts() const { return view[static_cast<size_t>(var)]; }
  auto key() const { return std::tie(var, view, val); }  // genDis is metadata
  bool operator==(const Message& o) const {
    return var == o.var && val == o.val && view == o.view;
  }
  bool operator<(const Message& o) const { return key() < o.key(); }
};

// Two messages are non-conflicting iff their variables differ, their own
// timestamps differ, or both own timestamps are zero.
inline bool msg_conflict_free(const Message& m1, const Message& m2) {
  if (m1.var != m2.var) return true;
  if (m1.own_ts() != m2.own_ts()) return true;
  return m1.own_ts() == 0 && m2.own_ts() == 0;
}

struct LocalConfig {
  int ctrl = 0;
  std::vector<int> rv;
  View view;
  auto key() const { return std::tie(ctrl, rv, view); }
  bool operator==(const LocalConfig&) const = default;
  bool operator<(const LocalConfig& o) const { return key() < o.key(); }
};

struct Config {
  std::vector<Message> memory;
  std::vector<LocalConfig> threads;
  std::vector<Role> roles;  // role per thread id
};

enum class StepKind { Silent, Ld, St, CasOp };

struct Step {
  int tid = -1;
  StepKind kind = StepKind::Silent;
  int edge = -1;                // index into the thread's LTS edge list
  std::vector<Message> msgs;    // ld: {read}; st: {written}; cas: {read, written}
};

struct Trace {
  Config initial;
  std::vector<Step> steps;
};

// ---------------------------------------------------------------------------
// Compiled system: one LTS per program
// ---------------------------------------------------------------------------

struct CompiledSystem {
  SystemSpec spec;
  LTS envLts;                 // valid iff spec.envProgram
  std::vector<LTS> disLts;    // parallel to spec.disPrograms

  int num_vars() const { return static_cast<int>(spec.vars.size()); }
  int num_regs() const { return static_cast<int>(spec.regs.size()); }

  const LTS& lts_for(const Config& cf, int tid) const {
    return cf.roles[static_cast<size_t>(tid)] == Role::Env
               ? envLts
               : disLts[static_cast<size_t>(tid)];
  }
};

inline CompiledSystem compile(const SystemSpec& s) {
  CompiledSystem cs;
  cs.spec = s;
  if (s.envProgram) cs.envLts = to_lts(s.envProgram->body);
  for (const auto& t : s.disPrograms) cs.disLts.push_back(to_lts(t.body));
  return cs;
}

// Initial configuration: dis/ldr threads first (tids 0..n-1), then nEnv env
// replicas.  Memory holds one initial message per variable at timestamp 0.
inline Config initial_config(const CompiledSystem& cs, int nEnv) {
  Config cf;
  const auto& s = cs.spec;
  size_t nv = s.vars.size();
  for (size_t x = 0; x < nv; ++x) {
    Message m;
    m.var = static_cast<int>(x);
    m.val = s.initValue;
    m.view.assign(nv, 0);
    cf.memory.push_back(m);
  }
  LocalConfig init;
  init.ctrl = 0;
  init.rv.assign(s.regs.size(), 0);
  init.view.assign(nv, 0);
  for (const auto& t : s.disPrograms) {
    cf.threads.push_back(init);
    cf.roles.push_back(t.role);
  }
  for (int i = 0; i < nEnv; ++i) {
    cf.threads.push_back(init);
    cf.roles.push_back(Role::Env);
  }
  return cf;
}

inline StepKind kind_of(const Command& c) {
  switch (c.kind) {
    case CmdKind::Load: return StepKind::Ld;
    case CmdKind::Store: return StepKind::St;
    case CmdKind::Cas: return StepKind::CasOp;
    default: return StepKind::Silent;
  }
}

}  // namespace raver
