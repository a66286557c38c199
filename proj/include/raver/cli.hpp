#pragma once
// Command-line driver.
//
// Subcommands:
//   parse FILE                    syntax/classification check, pretty-print
//   simulate FILE                 random bounded run, trace JSON on stdout
//   verify FILE                   decide goal reachability with an engine
//   validate FILE                 replay a trace JSON against FILE
//   encode FILE                   export the Datalog instances for FILE
//   generate KIND ...             build systems from formulas/circuits
//   examples                      write the bundled example programs
//
// Exit codes for verify: 0 = SAFE, 1 = UNSAFE, 2 = UNKNOWN (budget),
// 3 = usage error or engine/class mismatch.

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "abstract.hpp"
#include "concrete.hpp"
#include "depgraph.hpp"
#include "encoder.hpp"
#include "parser.hpp"
#include "reductions.hpp"
#include "trace_json.hpp"

namespace raver {

namespace cli_detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

inline SystemSpec load_system(const std::string& path) {
  return parse_system(read_file(path));
}

inline bool contains_assert(const Command& c) {
  if (c.kind == CmdKind::AssertFalse) return true;
  if (c.left && contains_assert(*c.left)) return true;
  if (c.right && contains_assert(*c.right)) return true;
  return false;
}

inline bool system_has_assert(const SystemSpec& s) {
  if (s.envProgram && contains_assert(*s.envProgram->body)) return true;
  for (const auto& t : s.disPrograms)
    if (contains_assert(*t.body)) return true;
  return false;
}

// "x=2" against the variable table of s.
inline GoalSpec parse_goal(const SystemSpec& s, const std::string& text) {
  auto eq = text.find('=');
  if (eq == std::string::npos)
    throw std::runtime_error("goal must look like var=value");
  std::string var = text.substr(0, eq);
  GoalSpec g;
  g.var = s.var_index(var);
  if (g.var < 0) throw std::runtime_error("goal names unknown variable " + var);
  g.val = std::stoi(text.substr(eq + 1));
  return g;
}

// The verification system: either the explicit goal over the file as-is, or
// the assert(false) statements rewritten into a fresh goal message.
inline std::pair<SystemSpec, GoalSpec> goal_of(const SystemSpec& s,
                                               const std::string& goalFlag) {
  if (!goalFlag.empty()) return {s, parse_goal(s, goalFlag)};
  if (system_has_assert(s)) return assert_to_goal(s);
  throw std::runtime_error(
      "program has no assert(false); pass --goal var=value");
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// parse
// ---------------------------------------------------------------------------

inline int cmd_parse(const std::string& file) {
  SystemSpec s = load_system(file);
  auto flags = [](const Command& c) {
    ClassFlags f = classify(c);
    std::string out;
    out += f.acyc ? "acyc" : "loops";
    out += f.nocas ? ", nocas" : ", cas";
    return out;
  };
  std::cout << print_system(s);
  if (s.envProgram)
    std::cout << "# env " << s.envProgram->name << ": "
              << flags(*s.envProgram->body) << "\n";
  for (const auto& t : s.disPrograms)
    std::cout << "# " << (t.role == Role::Ldr ? "ldr " : "dis ") << t.name
              << ": " << flags(*t.body) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

inline int cmd_simulate(const std::string& file, int nEnv, int depth, Ts tsH,
                        std::uint64_t seed) {
  SystemSpec raw = load_system(file);
  SystemSpec s = system_has_assert(raw) ? assert_to_goal(raw).first : raw;
  CompiledSystem cs = compile(s);
  std::mt19937_64 rng(seed);
  if (!s.envProgram) nEnv = 0;

  Trace tr;
  tr.initial = initial_config(cs, nEnv);
  Config cf = tr.initial;
  for (int step = 0; step < depth; ++step) {
    std::vector<ConcreteSucc> all;
    for (size_t tid = 0; tid < cf.threads.size(); ++tid) {
      auto ss = step_concrete(cs, cf, static_cast<int>(tid), tsH);
      all.insert(all.end(), std::make_move_iterator(ss.begin()),
                 std::make_move_iterator(ss.end()));
    }
    if (all.empty()) break;
    size_t pick = std::uniform_int_distribution<size_t>(0, all.size() - 1)(rng);
    tr.steps.push_back(all[pick].step);
    cf = std::move(all[pick].next);
  }
  std::cout << trace_to_json(tr, s, /*abstractTs=*/false).dump(2) << "\n";
  std::cerr << "simulated " << tr.steps.size() << " steps (seed " << seed
            << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

inline int cmd_validate(const std::string& file, const std::string& tracePath) {
  SystemSpec raw = load_system(file);
  SystemSpec s = system_has_assert(raw) ? assert_to_goal(raw).first : raw;
  CompiledSystem cs = compile(s);

  nlohmann::json j;
  if (tracePath.empty()) {
    std::cin >> j;
  } else {
    j = nlohmann::json::parse(read_file(tracePath));
  }
  Trace tr = trace_from_json(j, s);
  ValidationResult r = j.value("abstract", false)
                           ? validate_run_abstract(cs, tr)
                           : validate_run(cs, tr);
  if (r.valid) {
    std::cout << "Valid\n";
    return 0;
  }
  std::cout << "Invalid at step " << r.stepIndex << ": " << r.ruleViolated
            << "\n";
  return 1;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyOpts {
  std::string engine = "simplified";
  std::string goal;
  std::string witnessPath;
  int nEnv = 1;
  int maxDepth = 12;
  std::uint64_t maxNodes = 0;   // 0 = engine default
  long long tsHorizon = -1;     // -1 = engine default (Ts is unsigned)
  int jobs = 1;
  int l = 0, z = 0;  // producer/consumer family instead of a file
};

inline void require_class(bool ok, const std::string& what) {
  if (!ok) throw UsageError(what);
}

inline int report(const std::string& verdict, const std::string& engine,
                  std::uint64_t nodes) {
  std::cout << verdict << " engine=" << engine << " nodes=" << nodes << "\n";
  if (verdict == "UNSAFE") return 1;
  if (verdict == "SAFE") return 0;
  return 2;
}

inline void emit_witness(const std::string& path, const Trace& tr,
                         const SystemSpec& s, bool abstractTs) {
  if (path.empty()) return;
  write_file(path, trace_to_json(tr, s, abstractTs).dump(2) + "\n");
  std::cerr << "witness written to " << path << "\n";
}

inline int cmd_verify(const std::string& file, const VerifyOpts& o) {
  SystemSpec raw;
  if (o.l > 0 && o.z > 0)
    raw = prodcons_system(o.l, o.z);
  else if (!file.empty())
    raw = load_system(file);
  else
    throw UsageError("verify needs a program file (or --l and --z)");
  auto [s, goal] = goal_of(raw, o.goal);
  CompiledSystem cs = compile(s);

  if (o.engine == "concrete") {
    Ts horizon = o.tsHorizon >= 0 ? static_cast<Ts>(o.tsHorizon)
                                  : static_cast<Ts>(o.maxDepth);
    std::uint64_t budget = o.maxNodes ? o.maxNodes : 2'000'000;
    int nEnv = s.envProgram ? o.nEnv : 0;
    ExploreResult r =
        explore_concrete(cs, nEnv, o.maxDepth, horizon, goal, budget);
    if (r.status == SearchStatus::Reachable) {
      emit_witness(o.witnessPath, r.trace, s, false);
      return report("UNSAFE", o.engine, r.nodes);
    }
    return report(r.exhausted ? "SAFE" : "UNKNOWN", o.engine, r.nodes);
  }

  // The remaining engines share the message-generation preconditions.
  if (s.envProgram)
    require_class(classify(*s.envProgram->body).nocas, "env not nocas");

  if (o.engine == "datalog") {
    for (const auto& t : s.disPrograms)
      if (t.role == Role::Dis)
        require_class(classify(*t.body).acyc, "dis not acyc");
    MgStatus st = solve_via_datalog(s, goal);
    if (st == MgStatus::Generable) {
      if (!o.witnessPath.empty()) {
        MgResult w = check_message_generation(cs, goal);
        emit_witness(o.witnessPath, w.witness, s, true);
      }
      return report("UNSAFE", o.engine, 0);
    }
    return report("SAFE", o.engine, 0);
  }

  if (o.engine == "simplified" || o.engine == "leader") {
    MgOptions opts;
    if (o.maxNodes) opts.nodeBudget = o.maxNodes;
    if (o.tsHorizon >= 0) opts.tsHorizon = static_cast<Ts>(o.tsHorizon);
    opts.jobs = o.jobs;
    MgResult r = o.engine == "leader" ? verify_leader(cs, goal, opts)
                                      : check_message_generation(cs, goal, opts);
    switch (r.status) {
      case MgStatus::Generable:
        emit_witness(o.witnessPath, r.witness, s, true);
        return report("UNSAFE", o.engine, r.nodes);
      case MgStatus::NotGenerable:
        return report("SAFE", o.engine, r.nodes);
      default:
        return report("UNKNOWN", o.engine, r.nodes);
    }
  }

  throw UsageError("unknown engine " + o.engine +
                   " (simplified|datalog|leader|concrete)");
}

// ---------------------------------------------------------------------------
// encode
// ---------------------------------------------------------------------------

inline int cmd_encode(const std::string& file, const std::string& goalFlag,
                      const std::string& datalogPath, int linearK) {
  SystemSpec raw = load_system(file);
  auto [s, goal] = goal_of(raw, goalFlag);
  if (s.envProgram)
    require_class(classify(*s.envProgram->body).nocas, "env not nocas");
  for (const auto& t : s.disPrograms)
    if (t.role == Role::Dis)
      require_class(classify(*t.body).acyc, "dis not acyc");

  auto guesses = enumerate_guesses(s, timestamp_bound(s));
  if (guesses.empty()) throw std::runtime_error("no run guesses");
  QueryInstance qi = encode_instance(s, guesses.front(), goal);
  std::cout << "instances: " << guesses.size() << "\n"
            << "relations: " << qi.program.preds.size() << "\n"
            << "rules:     " << qi.program.rules.size() << "\n"
            << "retention: " << cache_bound(s) << "\n";
  if (!datalogPath.empty()) {
    write_file(datalogPath, dl::export_text(qi.program));
    std::cerr << "datalog program written to " << datalogPath << "\n";
  }
  if (linearK > 0) {
    dl::Linearized lin = dl::linearize(qi.program, linearK);
    std::string path = datalogPath.empty() ? file + ".linear"
                                           : datalogPath + ".linear";
    write_file(path, dl::export_text(lin.program));
    std::cerr << "linearized program (k=" << linearK << ") written to " << path
              << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

// "u0 -e1; e1 u1 -u0" -> clauses of the prefix-fixed formula with n blocks.
inline Qbf parse_qbf(int n, const std::string& text) {
  Qbf q;
  q.n = n;
  std::string clause;
  std::istringstream all(text);
  auto name_to_var = [&](const std::string& name) {
    if (name.size() < 2 || (name[0] != 'u' && name[0] != 'e'))
      throw std::runtime_error("bad literal name " + name);
    int i = std::stoi(name.substr(1));
    int v = name[0] == 'u' ? Qbf::u(i) : Qbf::e(i);
    if (v < 0 || v >= q.num_vars())
      throw std::runtime_error("literal " + name + " out of range");
    return v;
  };
  while (std::getline(all, clause, ';')) {
    std::istringstream cl(clause);
    std::vector<QbfLit> lits;
    std::string tok;
    while (cl >> tok) {
      bool neg = tok[0] == '-' || tok[0] == '!';
      lits.push_back(QbfLit{name_to_var(neg ? tok.substr(1) : tok), neg});
    }
    if (lits.empty()) continue;
    if (lits.size() != 3)
      throw std::runtime_error("clauses must have exactly 3 literals");
    q.clauses.push_back({lits[0], lits[1], lits[2]});
  }
  return q;
}

inline void emit_program(const SystemSpec& s, const std::string& path) {
  if (path.empty()) {
    std::cout << print_system(s);
  } else {
    write_file(path, print_system(s));
    std::cerr << "program written to " << path << "\n";
  }
}

inline int cmd_generate(const std::string& kind, const std::string& input,
                        int n, const std::string& clauses,
                        const std::string& circuitPath,
                        const std::string& outPath) {
  std::ostream& meta = outPath.empty() ? std::cerr : std::cout;
  if (kind == "qbf") {
    if (clauses.empty()) throw UsageError("generate qbf needs --clauses");
    Qbf q = parse_qbf(n, clauses);
    auto [s, goal] = qbf_to_purera(q);
    emit_program(s, outPath);
    meta << "goal " << s.vars[static_cast<size_t>(goal.var)] << "=" << goal.val
         << "\n"
         << "formula is " << (eval_qbf(q) ? "true" : "false") << "\n";
    return 0;
  }
  if (kind == "ssat") {
    if (circuitPath.empty()) throw UsageError("generate ssat needs --circuit");
    Circuit d = circuit_from_json(nlohmann::json::parse(read_file(circuitPath)));
    auto [s, goal] = succinct_sat_to_leader(d);
    emit_program(s, outPath);
    meta << "goal " << s.vars[static_cast<size_t>(goal.var)] << "=" << goal.val
         << "\n";
    return 0;
  }
  if (kind == "dis2env") {
    if (input.empty()) throw UsageError("generate dis2env needs a program file");
    SystemSpec s = dis_to_env_system(load_system(input));
    emit_program(s, outPath);
    meta << "goal preserved from the input asserts\n";
    return 0;
  }
  throw UsageError("unknown generate kind " + kind + " (qbf|ssat|dis2env)");
}

// ---------------------------------------------------------------------------
// examples
// ---------------------------------------------------------------------------

inline int cmd_examples(const std::string& dir) {
  struct Entry {
    std::string name;
    SystemSpec sys;
    std::string hint;
  };
  std::vector<Entry> all{
      {"dekker", dekker_system(),
       "verify dekker.ra --engine concrete --nenv 0 --max-depth 12"},
      {"prodcons", prodcons_system(2, 3),
       "verify prodcons.ra --engine leader"},
      {"smoke", smoke_system(), "verify smoke.ra --engine simplified"},
  };
  for (const auto& e : all) {
    std::string path = dir + "/" + e.name + ".ra";
    write_file(path, print_system(e.sys));
    std::cout << path << "  # " << e.hint << "\n";
  }
  return 0;
}

}  // namespace cli_detail

inline int run_cli(int argc, char** argv) {
  using namespace cli_detail;
  CLI::App app{"verifier for parameterized programs under release-acquire"};
  app.require_subcommand(1);

  std::string file, goal, trace, witness, datalogPath, clauses, circuit, out,
      kind, dir = ".";
  VerifyOpts vo;
  int nEnv = 1, depth = 10, linearK = 0, qbfN = 1;
  long long tsH = -1;
  std::uint64_t seed = 0;

  auto* parse = app.add_subcommand("parse", "check and pretty-print a program");
  parse->add_option("file", file)->required();

  auto* sim = app.add_subcommand("simulate", "random bounded concrete run");
  sim->add_option("file", file)->required();
  sim->add_option("--nenv", nEnv, "environment replicas");
  sim->add_option("--depth", depth, "maximum steps");
  sim->add_option("--ts-horizon", tsH, "timestamp bound (default: depth)");
  sim->add_option("--seed", seed, "random seed");

  auto* ver = app.add_subcommand("verify", "decide goal reachability");
  ver->add_option("file", file);
  ver->add_option("--engine", vo.engine,
                  "simplified|datalog|leader|concrete");
  ver->add_option("--goal", vo.goal, "goal as var=value");
  ver->add_option("--witness", vo.witnessPath, "write UNSAFE witness here");
  ver->add_option("--nenv", vo.nEnv, "environment replicas (concrete)");
  ver->add_option("--max-depth", vo.maxDepth, "search depth (concrete)");
  ver->add_option("--max-nodes", vo.maxNodes, "node budget");
  ver->add_option("--ts-horizon", vo.tsHorizon, "timestamp bound");
  ver->add_option("--jobs", vo.jobs, "parallel claim-set workers");
  ver->add_option("--l", vo.l, "producer/consumer: values per round");
  ver->add_option("--z", vo.z, "producer/consumer: rounds");

  auto* val = app.add_subcommand("validate", "replay a trace JSON");
  val->add_option("file", file)->required();
  val->add_option("--trace", trace, "trace path (default: stdin)");

  auto* enc = app.add_subcommand("encode", "export Datalog instances");
  enc->add_option("file", file)->required();
  enc->add_option("--goal", goal, "goal as var=value");
  enc->add_option("--emit-datalog", datalogPath, "write instance 0 here");
  enc->add_option("--emit-linear", linearK, "also linearize with retention K");

  auto* gen = app.add_subcommand("generate", "build systems from formulas");
  gen->add_option("kind", kind, "qbf|ssat|dis2env")->required();
  gen->add_option("input", file, "input program (dis2env)");
  gen->add_option("--n", qbfN, "quantifier blocks (qbf)");
  gen->add_option("--clauses", clauses, "e.g. \"u0 -e1 u1; e1 u1 -u0\"");
  gen->add_option("--circuit", circuit, "circuit JSON (ssat)");
  gen->add_option("--emit-program", out, "output path (default: stdout)");

  auto* ex = app.add_subcommand("examples", "write bundled programs");
  ex->add_option("--dir", dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (parse->parsed()) return cmd_parse(file);
    if (sim->parsed())
      return cmd_simulate(
          file, nEnv, depth,
          tsH >= 0 ? static_cast<Ts>(tsH) : static_cast<Ts>(depth), seed);
    if (ver->parsed()) return cmd_verify(file, vo);
    if (val->parsed()) return cmd_validate(file, trace);
    if (enc->parsed()) return cmd_encode(file, goal, datalogPath, linearK);
    if (gen->parsed())
      return cmd_generate(kind, file, qbfN, clauses, circuit, out);
    if (ex->parsed()) return cmd_examples(dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}

}  // namespace raver
