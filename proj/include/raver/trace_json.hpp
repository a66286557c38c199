#pragma once
// JSON (de)serialization for configurations and traces.
//
// Timestamps are rendered as strings so that both plain ("3") and raised
// ("3+") values round-trip through the same schema.

#include <json.hpp>

#include "state.hpp"

namespace raver {

using json = nlohmann::json;

// -- timestamps --------------------------------------------------------------

// Concrete traces store plain naturals; abstract traces additionally use the
// raised form n+.  We encode a timestamp internally as 2n (plain) / 2n+1
// (raised); `abstractTs` selects which reading applies on output.

inline std::string ts_to_string(Ts t, bool abstractTs) {
  if (!abstractTs) return std::to_string(t);
  std::string s = std::to_string(abs_level(t));
  if (abs_is_plus(t)) s += '+';
  return s;
}

inline Ts ts_from_string(const std::string& s, bool abstractTs) {
  bool plus = !s.empty() && s.back() == '+';
  Ts n = static_cast<Ts>(std::stoul(plus ? s.substr(0, s.size() - 1) : s));
  if (!abstractTs) {
    if (plus) throw std::runtime_error("raised timestamp in concrete trace");
    return n;
  }
  return plus ? abs_plus(n) : abs_nat(n);
}

inline json view_to_json(const View& vw, const SystemSpec& s,
                         bool abstractTs) {
  json j = json::object();
  for (size_t i = 0; i < s.vars.size(); ++i)
    j[s.vars[i]] = ts_to_string(vw[i], abstractTs);
  return j;
}

inline View view_from_json(const json& j, const SystemSpec& s,
                           bool abstractTs) {
  View vw(s.vars.size(), 0);
  for (size_t i = 0; i < s.vars.size(); ++i)
    vw[i] = ts_from_string(j.at(s.vars[i]).get<std::string>(), abstractTs);
  return vw;
}

inline json msg_to_json(const Message& m, const SystemSpec& s,
                        bool abstractTs) {
  return json{{"var", s.vars[static_cast<size_t>(m.var)]},
              {"val", m.val},
              {"view", view_to_json(m.view, s, abstractTs)}};
}

inline Message msg_from_json(const json& j, const SystemSpec& s,
                             bool abstractTs) {
  Message m;
  m.var = s.var_index(j.at("var").get<std::string>());
  m.val = j.at("val").get<int>();
  m.view = view_from_json(j.at("view"), s, abstractTs);
  return m;
}

inline json config_to_json(const Config& cf, const SystemSpec& s,
                           bool abstractTs) {
  json mem = json::array();
  for (const auto& m : cf.memory) mem.push_back(msg_to_json(m, s, abstractTs));
  json ths = json::array();
  for (size_t i = 0; i < cf.threads.size(); ++i) {
    const auto& lc = cf.threads[i];
    json rv = json::object();
    for (size_t r = 0; r < s.regs.size(); ++r) rv[s.regs[r]] = lc.rv[r];
    ths.push_back(json{{"ctrl", lc.ctrl},
                       {"rv", rv},
                       {"view", view_to_json(lc.view, s, abstractTs)},
                       {"role", cf.roles[i] == Role::Env    ? "env"
                                : cf.roles[i] == Role::Dis ? "dis"
                                                           : "ldr"}});
  }
  return json{{"memory", mem}, {"threads", ths}};
}

inline Config config_from_json(const json& j, const SystemSpec& s,
                               bool abstractTs) {
  Config cf;
  for (const auto& mj : j.at("memory"))
    cf.memory.push_back(msg_from_json(mj, s, abstractTs));
  for (const auto& tj : j.at("threads")) {
    LocalConfig lc;
    lc.ctrl = tj.at("ctrl").get<int>();
    lc.rv.assign(s.regs.size(), 0);
    for (size_t r = 0; r < s.regs.size(); ++r)
      lc.rv[r] = tj.at("rv").at(s.regs[r]).get<int>();
    lc.view = view_from_json(tj.at("view"), s, abstractTs);
    cf.threads.push_back(std::move(lc));
    std::string role = tj.at("role").get<std::string>();
    cf.roles.push_back(role == "env"   ? Role::Env
                       : role == "dis" ? Role::Dis
                                       : Role::Ldr);
  }
  return cf;
}

inline std::string kind_name(StepKind k) {
  switch (k) {
    case StepKind::Silent: return "silent";
    case StepKind::Ld: return "load";
    case StepKind::St: return "store";
    default: return "cas";
  }
}

inline StepKind kind_of_name(const std::string& s) {
  if (s == "silent") return StepKind::Silent;
  if (s == "load") return StepKind::Ld;
  if (s == "store") return StepKind::St;
  if (s == "cas") return StepKind::CasOp;
  throw std::runtime_error("unknown step kind: " + s);
}

inline json trace_to_json(const Trace& tr, const SystemSpec& s,
                          bool abstractTs = false) {
  json steps = json::array();
  for (const auto& st : tr.steps) {
    json msgs = json::array();
    for (const auto& m : st.msgs) msgs.push_back(msg_to_json(m, s, abstractTs));
    steps.push_back(json{{"tid", st.tid},
                         {"kind", kind_name(st.kind)},
                         {"edge", st.edge},
                         {"msgs", msgs}});
  }
  return json{{"initial", config_to_json(tr.initial, s, abstractTs)},
              {"steps", steps},
              {"abstract", abstractTs}};
}

inline Trace trace_from_json(const json& j, const SystemSpec& s) {
  bool abstractTs = j.value("abstract", false);
  Trace tr;
  tr.initial = config_from_json(j.at("initial"), s, abstractTs);
  for (const auto& sj : j.at("steps")) {
    Step st;
    st.tid = sj.at("tid").get<int>();
    st.kind = kind_of_name(sj.at("kind").get<std::string>());
    st.edge = sj.at("edge").get<int>();
    for (const auto& mj : sj.at("msgs"))
      st.msgs.push_back(msg_from_json(mj, s, abstractTs));
    tr.steps.push_back(std::move(st));
  }
  return tr;
}

}  // namespace raver
