// Standalone randomized cross-check of solve_via_datalog against
// check_message_generation on small loop-free systems (development aid).
#include <chrono>
#include <iostream>
#include <random>

#include "raver/encoder.hpp"
#include "raver/parser.hpp"

using namespace raver;

namespace {

CmdPtr random_cmd(std::mt19937& rng, int nInstr, int nVars, int nRegs, int dom,
                  bool allowCas) {
  std::vector<CmdPtr> seq;
  for (int i = 0; i < nInstr; ++i) {
    int x = static_cast<int>(rng() % static_cast<unsigned>(nVars));
    int r = static_cast<int>(rng() % static_cast<unsigned>(nRegs));
    int d = static_cast<int>(rng() % static_cast<unsigned>(dom));
    switch (rng() % (allowCas ? 6u : 5u)) {
      case 0:
        seq.push_back(Command::store(x, RegOrLit::of_lit(d)));
        break;
      case 1:
        seq.push_back(Command::store(x, RegOrLit::of_reg(r)));
        break;
      case 2:
        seq.push_back(Command::load(r, x));
        break;
      case 3:
        seq.push_back(Command::assume(Expr::binary(ExprOp::Eq, Expr::regref(r), Expr::constant(d))));
        break;
      case 4: {
        // small branch; costs two instruction slots
        CmdPtr a = Command::store(x, RegOrLit::of_lit(d));
        CmdPtr b = Command::load(r, x);
        seq.push_back(Command::choice(a, b));
        ++i;
        break;
      }
      default:
        seq.push_back(Command::cas(x, RegOrLit::of_lit(d),
                                   RegOrLit::of_lit((d + 1) % dom)));
        break;
    }
  }
  if (seq.empty()) seq.push_back(Command::skip());
  return seq_all(seq);
}

}  // namespace

int main(int argc, char** argv) {
  int n = argc > 1 ? std::atoi(argv[1]) : 30;
  unsigned seed = argc > 2 ? static_cast<unsigned>(std::atoi(argv[2]))
                           : 20260826u;
  std::mt19937 rng(seed);
  int mismatches = 0;
  double worst = 0;
  for (int it = 0; it < n; ++it) {
    SystemSpec s;
    int nVars = 1 + static_cast<int>(rng() % 2);
    for (int v = 0; v < nVars; ++v) s.vars.push_back("x" + std::to_string(v));
    s.dom = 2;
    s.initValue = 0;
    s.regs = {"r0", "r1"};
    s.envProgram = ThreadProg{
        "e", Role::Env, random_cmd(rng, 1 + rng() % 5, nVars, 2, s.dom, false)};
    int nDis = 1 + static_cast<int>(rng() % 2);
    for (int t = 0; t < nDis; ++t)
      s.disPrograms.push_back(ThreadProg{
          "d" + std::to_string(t), Role::Dis,
          random_cmd(rng, 1 + rng() % 5, nVars, 2, s.dom, true)});
    int dumpIt = argc > 3 ? std::atoi(argv[3]) : -1;
    if (it == dumpIt) {
      std::cout << print_system(s) << std::flush;
      return 0;
    }
    if (dumpIt >= 0) continue;  // dump mode: only generate, never query
    for (int x = 0; x < nVars; ++x)
      for (int d = 0; d < s.dom; ++d) {
        GoalSpec g{x, d};
        std::cout << "it=" << it << " goal=(" << x << "," << d << ")"
                  << std::endl;
        auto t0 = std::chrono::steady_clock::now();
        MgStatus a = check_message_generation(compile(s), g).status;
        MgStatus b = solve_via_datalog(s, g);
        double dt = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
        worst = std::max(worst, dt);
        if (dt > 1.0)
          std::cout << "slow it=" << it << " goal=(" << x << "," << d << ") "
                    << dt << "s\n"
                    << print_system(s) << std::flush;
        if (a != b) {
          ++mismatches;
          std::cout << "MISMATCH it=" << it << " goal=(" << x << "," << d
                    << ") engine=" << static_cast<int>(a)
                    << " datalog=" << static_cast<int>(b) << "\n"
                    << print_system(s) << "\n";
        }
      }
  }
  std::cout << "checked " << n << " systems, mismatches=" << mismatches
            << ", worst query " << worst << "s\n";
  return mismatches != 0;
}
