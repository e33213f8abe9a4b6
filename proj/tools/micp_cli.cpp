// Command-line front end: solve, verify, generate, replay-section6.

#include "micp/brute_force.hpp"
#include "micp/io.hpp"
#include "micp/replay.hpp"
#include "micp/suite.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

namespace {

using namespace micp;

enum Exit { kOk = 0, kFailed = 1, kInfeasible = 2, kBudget = 3, kInput = 4 };

int exit_for(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return kOk;
    case SolveStatus::Infeasible: return kInfeasible;
    case SolveStatus::BudgetExhausted: return kBudget;
    default: return kFailed;
  }
}

std::string vec_str(const Vec& v) {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}

struct Common {
  double tol = 1e-6;
  int max_iter = 500;
  std::string trace;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string milp_mode = "bb";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--tol", c.tol, "relative optimality tolerance")->check(CLI::PositiveNumber);
  app->add_option("--max-iter", c.max_iter, "iteration budget")->check(CLI::PositiveNumber);
  app->add_option("--trace", c.trace, "write JSON-lines trace to this path");
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--threads", c.threads, "scenario threads")->check(CLI::PositiveNumber);
  app->add_option("--milp-mode", c.milp_mode, "master engine")->check(CLI::IsMember({"bb", "cp"}));
}

MicpOptions micp_options(const Common& c) {
  MicpOptions o;
  o.tol = c.tol;
  o.max_iter = c.max_iter;
  o.milp.mode = c.milp_mode == "cp" ? MilpMode::CuttingPlaneParametric : MilpMode::BranchBound;
  return o;
}

DecompositionOptions decomposition_options(const Common& c) {
  DecompositionOptions o;
  o.master = micp_options(c);
  o.sub.tol = c.tol;
  o.sub.max_iter = c.max_iter;
  o.tol = c.tol;
  o.max_outer = c.max_iter;
  o.threads = c.threads;
  return o;
}

std::unique_ptr<std::ofstream> open_trace(const std::string& path) {
  if (path.empty()) return nullptr;
  auto f = std::make_unique<std::ofstream>(path);
  if (!*f) throw ModelError("cannot write trace file " + path);
  return f;
}

void print_decomposition(const DecompositionResult& r) {
  std::cout << "status " << to_string(r.status) << " (" << r.termination << ")\n";
  std::cout << "x* = " << vec_str(r.x) << "\n";
  std::cout << "obj " << r.objective << "\n";
  std::cout << "L " << r.L << " U " << r.U << " outer iterations " << r.iterations << "\n";
}

int cmd_solve(const std::string& file, std::string mode, const Common& c) {
  const Json j = read_json_file(file);
  if (mode.empty()) mode = j.contains("two_stage") ? "twostage" : "direct";
  auto trace = open_trace(c.trace);
  if (mode == "twostage") {
    auto inst = two_stage_from_json(j);
    auto o = decomposition_options(c);
    o.trace = trace.get();
    auto r = dr_solve(inst, o);
    print_decomposition(r);
    return exit_for(r.status);
  }
  auto model = model_from_json(j);
  if (mode == "decompose") {
    auto o = decomposition_options(c);
    o.trace = trace.get();
    auto r = decompose_solve(model, o);
    print_decomposition(r);
    return exit_for(r.status);
  }
  auto o = micp_options(c);
  o.trace = trace.get();
  auto r = micp_solve(model, o);
  std::cout << "status " << to_string(r.status) << " (" << r.termination << ")\n";
  std::cout << "x* = " << vec_str(r.x) << "\n";
  std::cout << "obj " << r.objective << "\n";
  std::cout << "L " << r.L << " U " << r.U << " iterations " << r.iterations << " cuts " << r.cuts.size() << "\n";
  return exit_for(r.status);
}

int cmd_verify(const std::string& file, const std::string& suite, int count, const Common& c) {
  if (!file.empty()) {
    const Json j = read_json_file(file);
    if (j.contains("two_stage")) {
      auto cs = run_twostage_case(two_stage_from_json(j), decomposition_options(c));
      std::cout << (cs.match ? "MATCH" : "MISMATCH") << " dr " << cs.dr.objective << " brute " << cs.brute.value << "\n";
      return cs.match ? kOk : kFailed;
    }
    auto model = model_from_json(j);
    auto cert = micp_solve(model, micp_options(c));
    auto b = brute_force(model);
    const bool ok = cert.status == SolveStatus::Optimal && b.feasible ? rel_match(cert.objective, b.value, 1e-6)
                                                                      : (cert.status == SolveStatus::Infeasible && !b.feasible);
    std::cout << (ok ? "MATCH" : "MISMATCH") << " micp " << cert.objective << " brute " << b.value << "\n";
    return ok ? kOk : kFailed;
  }
  int matched = 0;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(i);
    bool ok;
    double got, want;
    if (suite == "twostage") {
      auto cs = run_twostage_case(seed, decomposition_options(c));
      ok = cs.match && cs.extensive_match;
      got = cs.dr.objective;
      want = cs.brute.value;
    } else {
      auto cs = run_micp_case(seed, micp_profile_for(seed), micp_options(c));
      ok = cs.match;
      got = cs.cert.objective;
      want = cs.brute.value;
    }
    matched += ok;
    if (!ok) std::cout << "seed " << seed << ": solver " << got << " brute " << want << "\n";
  }
  std::cout << (matched == count ? "MATCH " : "MISMATCH ") << matched << "/" << count << "\n";
  return matched == count ? kOk : kFailed;
}

int cmd_generate(const std::string& profile, const std::string& out, const Common& c) {
  Json j = profile == "section6" ? two_stage_to_json(worked_example()) : generate_instance(c.seed, profile);
  if (out.empty()) std::cout << j.dump(2) << "\n";
  else write_json_file(out, j);
  return kOk;
}

int cmd_replay(const Common& c) {
  auto o = decomposition_options(c);
  auto r = replay_worked_example(o);
  print_replay(std::cout, r);
  if (auto t = open_trace(c.trace)) write_replay_trace(*t, r);
  return r.all_passed() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixed-integer convex and two-stage solver"};
  app.require_subcommand(1);
  Common common;

  std::string solve_file, solve_mode;
  auto* solve = app.add_subcommand("solve", "solve a model or two-stage file");
  solve->add_option("file", solve_file, "input JSON")->required();
  solve->add_option("--mode", solve_mode, "direct | decompose | twostage")
      ->check(CLI::IsMember({"direct", "decompose", "twostage"}));
  add_common(solve, common);

  std::string verify_file, verify_suite = "micp";
  int verify_count = 50;
  auto* verify = app.add_subcommand("verify", "cross-check against brute-force enumeration");
  verify->add_option("file", verify_file, "input JSON (omit to run a seeded suite)");
  verify->add_option("--suite", verify_suite, "micp | twostage")->check(CLI::IsMember({"micp", "twostage"}));
  verify->add_option("--count", verify_count, "suite size")->check(CLI::PositiveNumber);
  add_common(verify, common);

  std::string gen_profile = "micp-smooth", gen_out;
  auto* gen = app.add_subcommand("generate", "write a seeded random instance");
  gen->add_option("--profile", gen_profile, "micp-smooth | micp-separable | twostage-small | section6")
      ->check(CLI::IsMember({"micp-smooth", "micp-separable", "twostage-small", "section6"}));
  gen->add_option("-o,--output", gen_out, "output path (default stdout)");
  add_common(gen, common);

  auto* replay = app.add_subcommand("replay-section6", "replay the two-scenario worked example step by step");
  add_common(replay, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kInput;
  }

  try {
    if (*solve) return cmd_solve(solve_file, solve_mode, common);
    if (*verify) return cmd_verify(verify_file, verify_suite, verify_count, common);
    if (*gen) return cmd_generate(gen_profile, gen_out, common);
    if (*replay) return cmd_replay(common);
  } catch (const ModelError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const AssumptionError& e) {
    std::cerr << "assumption violated: " << e.what() << "\n";
    return kInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kInput;
}
