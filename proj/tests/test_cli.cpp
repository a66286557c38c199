#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "raver/cli.hpp"

namespace fs = std::filesystem;
using namespace raver;

namespace {

struct CliOut {
  int code;
  std::string out;
};

CliOut run(std::vector<std::string> args) {
  args.insert(args.begin(), "raver");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream captured;
  auto* old = std::cout.rdbuf(captured.rdbuf());
  int code = run_cli(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old);
  return {code, captured.str()};
}

fs::path scratch() {
  fs::path d = fs::temp_directory_path() / "raver_cli_tests";
  fs::create_directories(d);
  return d;
}

std::string write_program(const std::string& name, const SystemSpec& s) {
  fs::path p = scratch() / name;
  std::ofstream(p) << print_system(s);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ostringstream os;
  os << std::ifstream(path).rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("cli verifies the mutual-exclusion example and replays its witness",
          "[cli]") {
  std::string dekker = write_program("dekker.ra", dekker_system());
  std::string witness = (scratch() / "dekker_witness.json").string();

  CliOut v = run({"verify", dekker, "--engine", "concrete", "--nenv", "0",
                  "--max-depth", "12", "--witness", witness});
  CHECK(v.code == 1);
  CHECK(v.out.find("UNSAFE") != std::string::npos);

  CliOut r = run({"validate", dekker, "--trace", witness});
  CHECK(r.code == 0);
  CHECK(r.out.find("Valid") != std::string::npos);
}

TEST_CASE("cli witnesses from the abstract engine also replay", "[cli]") {
  std::string smoke = write_program("smoke.ra", smoke_system());
  std::string witness = (scratch() / "smoke_witness.json").string();

  CliOut v = run({"verify", smoke, "--engine", "simplified", "--witness",
                  witness});
  REQUIRE(v.code == 1);
  CliOut r = run({"validate", smoke, "--trace", witness});
  CHECK(r.code == 0);
}

TEST_CASE("cli reports safe systems with exit 0", "[cli]") {
  SystemSpec s;
  s.vars = {"x"};
  s.dom = 2;
  s.regs = {"r"};
  s.disPrograms.push_back(ThreadProg{"t", Role::Dis, Command::skip()});
  std::string path = write_program("idle.ra", s);

  for (const char* engine : {"simplified", "datalog", "concrete"}) {
    CliOut v = run({"verify", path, "--engine", engine, "--goal", "x=1"});
    INFO(engine);
    CHECK(v.code == 0);
    CHECK(v.out.find("SAFE") != std::string::npos);
  }
}

TEST_CASE("cli rejects engine/class mismatches with exit 3", "[cli]") {
  SystemSpec s;
  s.vars = {"x"};
  s.dom = 2;
  s.regs = {"r"};
  s.disPrograms.push_back(ThreadProg{
      "t", Role::Dis, Command::star(Command::store(0, RegOrLit::of_lit(1)))});
  std::string path = write_program("loopy.ra", s);

  CHECK(run({"verify", path, "--engine", "datalog", "--goal", "x=1"}).code ==
        3);
  CHECK(run({"verify", path, "--engine", "nosuch", "--goal", "x=1"}).code == 3);
  CHECK(run({"verify", path, "--engine", "simplified"}).code == 3);  // no goal
  CHECK(run({"verify", (scratch() / "missing.ra").string()}).code == 3);
}

TEST_CASE("cli verdict does not depend on the worker count", "[cli]") {
  SystemSpec s;
  s.vars = {"x"};
  s.dom = 2;
  s.regs = {"r"};
  s.disPrograms.push_back(ThreadProg{
      "t", Role::Dis,
      Command::cas(0, RegOrLit::of_lit(0), RegOrLit::of_lit(1))});
  std::string path = write_program("casser.ra", s);

  CliOut seq = run({"verify", path, "--goal", "x=1", "--jobs", "1"});
  CliOut par = run({"verify", path, "--goal", "x=1", "--jobs", "4"});
  CHECK(seq.code == 1);
  CHECK(par.code == seq.code);

  CliOut seq0 = run({"verify", path, "--goal", "x=0", "--jobs", "1"});
  CliOut par0 = run({"verify", path, "--goal", "x=0", "--jobs", "4"});
  CHECK(par0.code == seq0.code);
}

TEST_CASE("cli generates quantified-formula systems that decide truth",
          "[cli]") {
  std::string out = (scratch() / "qbf.ra").string();
  CliOut g = run({"generate", "qbf", "--n", "1", "--clauses",
                  "-u0 e1 u1; -u0 e1 -u1; u0 -e1 u1; u0 -e1 -u1",
                  "--emit-program", out});
  REQUIRE(g.code == 0);
  REQUIRE_NOTHROW(parse_system(slurp(out)));
  CHECK(run({"verify", out, "--goal", "__goal=2"}).code == 1);

  CliOut bad = run({"generate", "qbf", "--n", "1", "--clauses",
                    "u0 u0 u0; -u0 -u0 -u0", "--emit-program", out});
  REQUIRE(bad.code == 0);
  CHECK(run({"verify", out, "--goal", "__goal=2"}).code == 0);
}

TEST_CASE("cli simulate is deterministic per seed and replays", "[cli]") {
  std::string smoke = write_program("smoke.ra", smoke_system());

  auto simulate = [&](const std::string& seed) {
    return run({"simulate", smoke, "--depth", "4", "--seed", seed});
  };
  CliOut a = simulate("7");
  CliOut b = simulate("7");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);

  std::string tracePath = (scratch() / "sim.json").string();
  std::ofstream(tracePath) << a.out;
  CHECK(run({"validate", smoke, "--trace", tracePath}).code == 0);
}

TEST_CASE("cli examples are parseable and carry a reachable assertion",
          "[cli]") {
  std::string dir = scratch().string();
  CliOut e = run({"examples", "--dir", dir});
  REQUIRE(e.code == 0);
  for (const char* name : {"dekker.ra", "prodcons.ra", "smoke.ra"}) {
    INFO(name);
    REQUIRE_NOTHROW(parse_system(slurp(dir + "/" + name)));
  }
  CHECK(run({"verify", dir + "/prodcons.ra", "--engine", "leader"}).code == 1);
}

TEST_CASE("cli encode exports an evaluable program and its linearization",
          "[cli]") {
  std::string smoke = write_program("smoke.ra", smoke_system());
  std::string dlPath = (scratch() / "smoke.dl").string();
  CliOut e = run({"encode", smoke, "--emit-datalog", dlPath, "--emit-linear",
                  "8"});
  REQUIRE(e.code == 0);
  CHECK(e.out.find("instances:") != std::string::npos);
  CHECK(slurp(dlPath).find(".pred") != std::string::npos);
  CHECK(slurp(dlPath + ".linear").find(".pred") != std::string::npos);
}

TEST_CASE("cli parse prints a program that parses back", "[cli]") {
  std::string dekker = write_program("dekker.ra", dekker_system());
  CliOut p = run({"parse", dekker});
  REQUIRE(p.code == 0);
  std::string body = p.out.substr(0, p.out.find('#'));
  SystemSpec again = parse_system(body);
  CHECK(again.vars == dekker_system().vars);
  CHECK(again.disPrograms.size() == 2);
}
