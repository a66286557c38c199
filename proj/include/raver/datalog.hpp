#pragma once
// A small Datalog engine.
//
//   - infer: semi-naive least-fixpoint evaluation,
//   - infer_cached: derivability when at most k facts may be retained at any
//     time (facts may be re-derived after being dropped),
//   - linearize: compile a ground program into an equivalent program with a
//     single body atom per rule, whose one predicate carries the k-slot
//     retention set,
//   - text export/import.
//
// Terms are integers: values >= 0 are constants, values < 0 are variables.

#include <cctype>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace raver::dl {

struct Predicate {
  std::string name;
  int arity = 0;
};

struct Atom {
  int pred = 0;
  std::vector<int> args;
  auto operator<=>(const Atom&) const = default;
};

struct Rule {
  Atom head;
  std::vector<Atom> body;
};

struct Program {
  std::vector<Predicate> preds;
  std::vector<Rule> rules;
  std::vector<Atom> facts;                 // ground axioms
  std::vector<std::string> constNames;     // optional, for printing

  int pred_index(const std::string& n) const {
    for (size_t i = 0; i < preds.size(); ++i)
      if (preds[i].name == n) return static_cast<int>(i);
    return -1;
  }
  int add_pred(const std::string& n, int arity) {
    int i = pred_index(n);
    if (i >= 0) {
      if (preds[static_cast<size_t>(i)].arity != arity)
        throw std::runtime_error("predicate arity clash: " + n);
      return i;
    }
    preds.push_back(Predicate{n, arity});
    return static_cast<int>(preds.size()) - 1;
  }
};

using Tuple = std::vector<int>;
using Database = std::vector<std::set<Tuple>>;  // per predicate

// -- evaluation --------------------------------------------------------------

namespace detail {

inline bool unify(const Atom& pat, const Tuple& t, std::map<int, int>& env) {
  for (size_t i = 0; i < pat.args.size(); ++i) {
    int a = pat.args[i];
    if (a >= 0) {
      if (a != t[i]) return false;
    } else {
      auto it = env.find(a);
      if (it == env.end())
        env[a] = t[i];
      else if (it->second != t[i])
        return false;
    }
  }
  return true;
}

inline Tuple substitute(const Atom& head, const std::map<int, int>& env) {
  Tuple t;
  t.reserve(head.args.size());
  for (int a : head.args) {
    if (a >= 0) {
      t.push_back(a);
    } else {
      auto it = env.find(a);
      if (it == env.end())
        throw std::runtime_error("unbound variable in rule head");
      t.push_back(it->second);
    }
  }
  return t;
}

}  // namespace detail

// Least fixpoint of the program.
inline Database infer(const Program& p) {
  Database db(p.preds.size());
  std::deque<std::pair<int, Tuple>> work;
  auto add = [&](int pred, Tuple t) {
    if (db[static_cast<size_t>(pred)].insert(t).second)
      work.push_back({pred, std::move(t)});
  };
  for (const auto& f : p.facts) add(f.pred, f.args);
  // index rules by the predicates in their bodies
  std::vector<std::vector<size_t>> byBody(p.preds.size());
  for (size_t r = 0; r < p.rules.size(); ++r) {
    std::set<int> seen;
    for (const auto& b : p.rules[r].body)
      if (seen.insert(b.pred).second)
        byBody[static_cast<size_t>(b.pred)].push_back(r);
    if (p.rules[r].body.empty()) {
      // bodiless rules are facts
      add(p.rules[r].head.pred, detail::substitute(p.rules[r].head, {}));
    }
  }
  std::function<void(const Rule&, size_t, std::map<int, int>&,
                     std::optional<std::pair<size_t, const Tuple*>>)>
      join = [&](const Rule& r, size_t i, std::map<int, int>& env,
                 std::optional<std::pair<size_t, const Tuple*>> pin) {
        if (i == r.body.size()) {
          add(r.head.pred, detail::substitute(r.head, env));
          return;
        }
        const Atom& b = r.body[i];
        if (pin && pin->first == i) {
          std::map<int, int> e2 = env;
          if (detail::unify(b, *pin->second, e2)) join(r, i + 1, e2, pin);
          return;
        }
        for (const Tuple& t : db[static_cast<size_t>(b.pred)]) {
          std::map<int, int> e2 = env;
          if (detail::unify(b, t, e2)) join(r, i + 1, e2, pin);
        }
      };
  while (!work.empty()) {
    auto [pred, t] = work.front();
    work.pop_front();
    for (size_t r : byBody[static_cast<size_t>(pred)]) {
      const Rule& rule = p.rules[r];
      // pin the new tuple at each occurrence of its predicate
      for (size_t i = 0; i < rule.body.size(); ++i) {
        if (rule.body[i].pred != pred) continue;
        std::map<int, int> env;
        join(rule, 0, env, std::make_pair(i, &t));
      }
    }
  }
  return db;
}

inline bool derives(const Database& db, const Atom& goal) {
  return db[static_cast<size_t>(goal.pred)].count(goal.args) != 0;
}

// -- bounded-retention derivability ------------------------------------------

// Can `goal` be derived if at any moment at most k derived facts are kept?
// A kept fact may be used by any number of rule applications; dropping is
// free; dropped facts may be re-derived.
inline bool infer_cached(const Program& p, int k, const Atom& goal) {
  if (k <= 0) return false;
  Database db = infer(p);
  if (!derives(db, goal)) return false;
  size_t total = 0;
  for (const auto& s : db) total += s.size();
  if (total <= static_cast<size_t>(k)) return true;

  // enumerate derivable facts and ground rule instances over them
  std::map<std::pair<int, Tuple>, int> id;
  std::vector<std::pair<int, Tuple>> facts;
  for (size_t pred = 0; pred < db.size(); ++pred)
    for (const auto& t : db[pred]) {
      id[{static_cast<int>(pred), t}] = static_cast<int>(facts.size());
      facts.push_back({static_cast<int>(pred), t});
    }
  int n = static_cast<int>(facts.size());
  int goalId = id.at({goal.pred, goal.args});

  struct Inst {
    std::set<int> body;
    int head;
  };
  std::vector<Inst> insts;
  {
    std::set<std::pair<std::set<int>, int>> seen;
    std::function<void(const Rule&, size_t, std::map<int, int>&,
                       std::set<int>&)>
        ground = [&](const Rule& r, size_t i, std::map<int, int>& env,
                     std::set<int>& body) {
          if (i == r.body.size()) {
            Tuple h = detail::substitute(r.head, env);
            auto it = id.find({r.head.pred, h});
            if (it == id.end()) return;
            if (seen.insert({body, it->second}).second)
              insts.push_back(Inst{body, it->second});
            return;
          }
          const Atom& b = r.body[i];
          for (const Tuple& t : db[static_cast<size_t>(b.pred)]) {
            std::map<int, int> e2 = env;
            if (!detail::unify(b, t, e2)) continue;
            auto bit = body.insert(id.at({b.pred, t}));
            ground(r, i + 1, e2, body);
            if (bit.second) body.erase(bit.first);
          }
        };
    for (const auto& f : p.facts)
      if (id.count({f.pred, f.args}))
        insts.push_back(Inst{{}, id.at({f.pred, f.args})});
    for (const auto& r : p.rules) {
      std::map<int, int> env;
      std::set<int> body;
      ground(r, 0, env, body);
    }
  }

  // search over retention states (sets of fact ids, size <= k)
  std::set<std::set<int>> visited;
  std::deque<std::set<int>> frontier;
  frontier.push_back({});
  visited.insert({});
  while (!frontier.empty()) {
    std::set<int> s = frontier.front();
    frontier.pop_front();
    if (s.count(goalId)) return true;
    // additions: the head goes into a free slot, or overwrites one of the
    // currently retained facts (body facts included)
    for (const auto& in : insts) {
      if (s.count(in.head)) continue;
      bool ok = true;
      for (int b : in.body)
        if (!s.count(b)) {
          ok = false;
          break;
        }
      if (!ok) continue;
      if (static_cast<int>(s.size()) < k) {
        std::set<int> s2 = s;
        s2.insert(in.head);
        if (visited.insert(s2).second) frontier.push_back(std::move(s2));
      } else {
        for (int e : s) {
          std::set<int> s2 = s;
          s2.erase(e);
          s2.insert(in.head);
          if (visited.insert(s2).second) frontier.push_back(std::move(s2));
        }
      }
    }
    // drops
    for (int f : s) {
      std::set<int> s2 = s;
      s2.erase(f);
      if (visited.insert(s2).second) frontier.push_back(std::move(s2));
    }
  }
  (void)n;
  return false;
}

// -- linearization -----------------------------------------------------------

// Compile a ground program into one where every rule has exactly one body
// atom.  The single recursive predicate holds k retention slots whose values
// are encodings of the original ground atoms (or a blank); the original
// predicates survive as outputs read off a slot.
struct Linearized {
  Program program;
  int cachePred = -1;
  int blank = -1;
  std::map<Atom, int> code;  // ground atom -> slot constant
};

inline Linearized linearize(const Program& p, int k) {
  for (const auto& r : p.rules) {
    if (static_cast<int>(r.body.size()) > k)
      throw std::runtime_error("rule body larger than the retention bound");
    for (const auto& b : r.body)
      for (int a : b.args)
        if (a < 0)
          throw std::runtime_error("linearize expects a ground program");
    for (int a : r.head.args)
      if (a < 0) throw std::runtime_error("linearize expects a ground program");
  }
  Linearized lin;
  lin.program.preds = p.preds;
  lin.program.constNames = p.constNames;

  auto name_of = [&](const Atom& a) {
    std::string s = "[" + p.preds[static_cast<size_t>(a.pred)].name;
    for (int c : a.args) {
      s += ' ';
      s += (c < static_cast<int>(p.constNames.size()) &&
            !p.constNames[static_cast<size_t>(c)].empty())
               ? p.constNames[static_cast<size_t>(c)]
               : std::to_string(c);
    }
    return s + "]";
  };
  auto intern_const = [&](const std::string& n) {
    lin.program.constNames.push_back(n);
    return static_cast<int>(lin.program.constNames.size()) - 1;
  };
  auto atom_code = [&](const Atom& a) {
    auto it = lin.code.find(a);
    if (it != lin.code.end()) return it->second;
    int c = intern_const(name_of(a));
    lin.code.emplace(a, c);
    return c;
  };

  lin.blank = intern_const("_");
  lin.cachePred = lin.program.add_pred("retained", k);

  auto cacheVars = [&](int skip = -1) {
    Atom a;
    a.pred = lin.cachePred;
    for (int i = 0; i < k; ++i) a.args.push_back(-(i + 1));
    if (skip >= 0) a.args[static_cast<size_t>(skip)] = -(k + 1);
    return a;
  };

  // initially every slot is blank
  Atom init;
  init.pred = lin.cachePred;
  init.args.assign(static_cast<size_t>(k), lin.blank);
  lin.program.facts.push_back(init);

  // slot swaps
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      Rule r;
      r.body.push_back(cacheVars());
      r.head = r.body[0];
      std::swap(r.head.args[static_cast<size_t>(i)],
                r.head.args[static_cast<size_t>(j)]);
      lin.program.rules.push_back(std::move(r));
    }
  // dropping: blank out any slot
  for (int i = 0; i < k; ++i) {
    Rule r;
    r.body.push_back(cacheVars());
    r.head = r.body[0];
    r.head.args[static_cast<size_t>(i)] = lin.blank;
    lin.program.rules.push_back(std::move(r));
  }

  // rule applications: body atoms pinned to the leading slots, head written
  // into any slot
  auto emit_apply = [&](const std::vector<int>& bodyCodes, int headCode) {
    int pn = static_cast<int>(bodyCodes.size());
    for (int slot = 0; slot < k; ++slot) {
      Rule r;
      Atom body = cacheVars();
      for (int i = 0; i < pn; ++i) body.args[static_cast<size_t>(i)] =
          bodyCodes[static_cast<size_t>(i)];
      r.body.push_back(body);
      r.head = body;
      r.head.args[static_cast<size_t>(slot)] = headCode;
      lin.program.rules.push_back(std::move(r));
    }
  };
  for (const auto& f : p.facts) emit_apply({}, atom_code(f));
  for (const auto& r : p.rules) {
    std::vector<int> body;
    for (const auto& b : r.body) body.push_back(atom_code(b));
    emit_apply(body, atom_code(r.head));
  }

  // outputs: reading a retained atom re-establishes the original predicate
  for (const auto& [atom, c] : lin.code) {
    for (int slot = 0; slot < k; ++slot) {
      Rule r;
      Atom body = cacheVars();
      body.args[static_cast<size_t>(slot)] = c;
      r.body.push_back(body);
      r.head = atom;
      lin.program.rules.push_back(std::move(r));
    }
  }
  return lin;
}

// -- text format -------------------------------------------------------------

inline std::string term_str(const Program& p, int t) {
  if (t < 0) return "V" + std::to_string(-t);
  if (t < static_cast<int>(p.constNames.size()) &&
      !p.constNames[static_cast<size_t>(t)].empty())
    return p.constNames[static_cast<size_t>(t)];
  return std::to_string(t);
}

inline std::string atom_str(const Program& p, const Atom& a) {
  std::string s = p.preds[static_cast<size_t>(a.pred)].name;
  s += '(';
  for (size_t i = 0; i < a.args.size(); ++i) {
    if (i) s += ", ";
    s += term_str(p, a.args[i]);
  }
  s += ')';
  return s;
}

inline std::string export_text(const Program& p) {
  std::ostringstream os;
  for (const auto& pr : p.preds)
    os << ".pred " << pr.name << ' ' << pr.arity << '\n';
  for (const auto& f : p.facts) os << atom_str(p, f) << ".\n";
  for (const auto& r : p.rules) {
    os << atom_str(p, r.head);
    if (!r.body.empty()) {
      os << " :- ";
      for (size_t i = 0; i < r.body.size(); ++i) {
        if (i) os << ", ";
        os << atom_str(p, r.body[i]);
      }
    }
    os << ".\n";
  }
  return os.str();
}

// Parse the textual form back.  Constant names are re-interned; variable
// names Vn map back to negative ids.
inline Program import_text(const std::string& text) {
  Program p;
  std::map<std::string, int> constId;
  auto intern = [&](const std::string& tok) {
    if (tok.size() > 1 && tok[0] == 'V' &&
        tok.find_first_not_of("0123456789", 1) == std::string::npos)
      return -std::stoi(tok.substr(1));
    if (!tok.empty() && tok.find_first_not_of("0123456789") ==
                            std::string::npos)
      return std::stoi(tok);
    auto it = constId.find(tok);
    if (it != constId.end()) return it->second;
    p.constNames.push_back(tok);
    int id = static_cast<int>(p.constNames.size()) - 1;
    constId[tok] = id;
    return id;
  };
  // numeric constants must not collide with interned names: pre-register
  // names after scanning is handled by keeping numerals numeric only when no
  // name table is used.  Exported programs always print names when present.
  std::istringstream is(text);
  std::string line;
  auto parse_atom = [&](const std::string& s, size_t& pos) {
    auto skip = [&] {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
        ++pos;
    };
    skip();
    size_t start = pos;
    while (pos < s.size() && s[pos] != '(') ++pos;
    std::string pname = s.substr(start, pos - start);
    while (!pname.empty() && std::isspace(static_cast<unsigned char>(
                                 pname.back())))
      pname.pop_back();
    if (pos >= s.size()) throw std::runtime_error("expected '('");
    ++pos;  // '('
    Atom a;
    std::vector<int> args;
    std::string tok;
    for (; pos < s.size(); ++pos) {
      char c = s[pos];
      if (c == ',' || c == ')') {
        while (!tok.empty() && std::isspace(static_cast<unsigned char>(
                                   tok.front())))
          tok.erase(tok.begin());
        while (!tok.empty() && std::isspace(static_cast<unsigned char>(
                                   tok.back())))
          tok.pop_back();
        if (!tok.empty()) args.push_back(intern(tok));
        tok.clear();
        if (c == ')') {
          ++pos;
          break;
        }
      } else {
        tok += c;
      }
    }
    a.pred = p.add_pred(pname, static_cast<int>(args.size()));
    a.args = std::move(args);
    return a;
  };
  while (std::getline(is, line)) {
    // strip comments and whitespace
    auto h = line.find('%');
    if (h != std::string::npos) line.erase(h);
    size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    line = line.substr(b);
    if (line.rfind(".pred", 0) == 0) {
      std::istringstream ls(line.substr(5));
      std::string name;
      int arity;
      ls >> name >> arity;
      p.add_pred(name, arity);
      continue;
    }
    auto dot = line.rfind('.');
    if (dot == std::string::npos)
      throw std::runtime_error("clause missing terminating '.'");
    std::string clause = line.substr(0, dot);
    size_t pos = 0;
    Atom head = parse_atom(clause, pos);
    while (pos < clause.size() &&
           std::isspace(static_cast<unsigned char>(clause[pos])))
      ++pos;
    if (pos >= clause.size()) {
      bool ground = true;
      for (int a : head.args) ground = ground && a >= 0;
      if (ground)
        p.facts.push_back(std::move(head));
      else
        p.rules.push_back(Rule{std::move(head), {}});
      continue;
    }
    if (clause.compare(pos, 2, ":-") != 0)
      throw std::runtime_error("expected ':-'");
    pos += 2;
    Rule r;
    r.head = std::move(head);
    while (pos < clause.size()) {
      r.body.push_back(parse_atom(clause, pos));
      while (pos < clause.size() &&
             std::isspace(static_cast<unsigned char>(clause[pos])))
        ++pos;
      if (pos < clause.size() && clause[pos] == ',') ++pos;
    }
    p.rules.push_back(std::move(r));
  }
  return p;
}

}  // namespace raver::dl
