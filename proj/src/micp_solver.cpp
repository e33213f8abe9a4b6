#include "micp/micp_solver.hpp"

#include "micp/log.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ostream>

namespace micp {

namespace {

std::vector<bool> mask_of(int n, const std::vector<int>& idx) {
  std::vector<bool> m(n, false);
  for (int j : idx) m[j] = true;
  return m;
}

double model_objective(const ModelInstance& m, const Vec& x) { return m.objective.linear.dot(x) + m.objective.constant; }

// Adds the cut unless the pool already holds it.
bool add_to_pool(std::vector<LinearCut>& pool, int& duplicates, const LinearCut& cut) {
  for (const auto& c : pool) {
    if (same_cut(c, cut)) {
      ++duplicates;
      log_warning("duplicate cut dropped (" + std::string(to_string(cut.provenance)) + ")");
      return false;
    }
  }
  pool.push_back(cut);
  return true;
}

nlohmann::json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json bound_json(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::BudgetExhausted: return "budget-exhausted";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "?";
}

MilpProblem build_master(const MicpState& state, const ModelInstance& base, const MicpOptions& opts) {
  MilpProblem p;
  const int n = base.num_vars();
  p.lp = make_lp(base.objective.linear, base.lower(), base.upper());
  for (int i = 0; i < base.A.rows(); ++i) p.lp.add_le(base.A.row(i).transpose(), base.b[i]);
  for (int i = 0; i < base.G.rows(); ++i) p.lp.add_eq(base.G.row(i).transpose(), base.h[i]);
  for (const auto& c : opts.initial_cuts) p.lp.add_le(c.coef, c.rhs);
  for (const auto& c : state.pool) p.lp.add_le(c.coef, c.rhs);
  for (const auto& c : state.milp_pool) p.lp.add_le(c.coef, c.rhs);
  p.integer = base.integer_mask();
  p.param_idx = opts.param_idx;
  p.param_value = opts.param_value.size() ? opts.param_value : Vec::Zero(0);
  if (static_cast<int>(p.integer.size()) != n) throw ModelError("build_master: mask size");
  return p;
}

PolishOutcome polish_step(MicpState& state, const ModelInstance& model, const Vec& x_n, const MicpOptions& opts) {
  PolishOutcome out;
  ConvexProgram prog = program_from_model(model);
  const auto integer = model.integer_mask();
  const auto pmask = mask_of(model.num_vars(), opts.param_idx);
  for (int j = 0; j < model.num_vars(); ++j) {
    if (pmask[j]) continue;
    if (integer[j]) prog.pins.emplace_back(j, std::round(x_n[j]));
  }
  for (size_t k = 0; k < opts.param_idx.size(); ++k)
    prog.pins.emplace_back(opts.param_idx[k], opts.param_value[static_cast<int>(k)]);
  out.certificate = convex_solve(prog, opts.convex);
  if (out.certificate.status == ConvexStatus::Infeasible) {
    out.kind = PolishCase::Infeasible;
    return out;
  }
  if (!out.certificate.optimal()) throw std::runtime_error("polishing solve failed: numerical-failure");
  const double value = model_objective(model, out.certificate.x);
  if (value < state.U) {
    state.U = value;
    state.incumbent = out.certificate.x;
  }
  if (!out.certificate.on_boundary(opts.activity)) {
    out.kind = PolishCase::Interior;
    return out;
  }
  out.kind = PolishCase::Boundary;
  const SupportMode mode = opts.param_idx.empty() ? SupportMode::Plain : SupportMode::Parametric;
  out.cuts = supporting_inequalities(prog, out.certificate, mode, pmask, opts.activity);
  for (auto& c : out.cuts) {
    c.iteration = state.n;
    c.parametric_valid = true;
  }
  out.lp_equivalent = lp_equivalence_check(prog, out.certificate, out.cuts);
  for (const auto& c : out.cuts) add_to_pool(state.pool, state.duplicates, c);
  state.index_set.push_back(state.n);
  return out;
}

SolveCertificate micp_solve(const ModelInstance& original, const MicpOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  original.validate();
  const ModelInstance model = epigraph_reformulate(original);
  const int n0 = original.num_vars();
  const ConvexProgram set = convex_set_of(model);
  MicpState st;
  SolveCertificate cert;
  auto finish = [&](SolveStatus status, const std::string& why) {
    cert.status = status;
    cert.termination = why;
    cert.L = st.L;
    cert.U = st.U;
    cert.iterations = st.n;
    cert.trace = st.trace;
    if (st.incumbent) {
      cert.x = st.incumbent->head(n0);
      cert.objective = model_objective(model, *st.incumbent);
    }
    cert.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return cert;
  };
  auto emit = [&](const LinearCut& c) { cert.cuts.push_back(c); };

  if (opts.seed_root_cuts && !model.constraints.empty()) {
    ConvexProgram relax = program_from_model(model);
    for (size_t k = 0; k < opts.param_idx.size(); ++k)
      relax.pins.emplace_back(opts.param_idx[k], opts.param_value[static_cast<int>(k)]);
    auto rc = convex_solve(relax, opts.convex);
    ++cert.convex_calls;
    if (rc.optimal()) cert.root_point = rc.x;
    if (rc.optimal() && rc.on_boundary(opts.activity)) {
      const SupportMode mode = opts.param_idx.empty() ? SupportMode::Plain : SupportMode::Parametric;
      for (auto c : supporting_inequalities(relax, rc, mode, mask_of(model.num_vars(), opts.param_idx),
                                            opts.activity)) {
        c.iteration = 0;
        c.parametric_valid = true;
        if (add_to_pool(st.pool, st.duplicates, c)) emit(c);
      }
    }
  }

  for (st.n = 1; st.n <= opts.max_iter; ++st.n) {
    IterationRecord rec;
    rec.n = st.n;
    MilpProblem master = build_master(st, model, opts);
    MilpResult mr = milp_solve(master, opts.milp);
    ++cert.milp_calls;
    if (st.n == 1) cert.root_relaxation = mr.root_relaxation;
    cert.last_master = master;
    cert.last_master_result = mr;
    if (mr.status == MilpStatus::Infeasible) return finish(SolveStatus::Infeasible, "master-infeasible");
    if (mr.status == MilpStatus::BudgetExhausted) return finish(SolveStatus::BudgetExhausted, "master-budget");
    if (!mr.optimal()) return finish(SolveStatus::NumericalFailure, "master-failure");
    for (auto c : mr.cuts) {
      c.iteration = st.n;
      st.milp_pool.push_back(c);
      emit(c);
    }
    const Vec xn = mr.x;
    rec.master = xn;
    st.L = std::max(st.L, mr.objective + model.objective.constant);

    double worst = 0.0;
    for (const auto& e : model.constraints) worst = std::max(worst, e.value(xn));
    if (worst <= opts.membership_tol) {
      // The relaxation optimum is feasible, hence optimal.
      st.incumbent = xn;
      st.U = model_objective(model, xn);
      st.L = std::min(st.L, st.U);
      rec.branch = "membership";
      rec.L = st.L;
      rec.U = st.U;
      rec.pool = static_cast<int>(st.pool.size());
      rec.terminated = true;
      st.trace.push_back(rec);
      cert.L_history.push_back(st.L);
      cert.U_history.push_back(st.U);
      if (opts.trace)
        *opts.trace << nlohmann::json{{"n", st.n}, {"L", st.L}, {"U", st.U}, {"pool", rec.pool}, {"branch", "membership"},
                                      {"x", vec_json(xn)}}
                           .dump()
                    << "\n";
      return finish(SolveStatus::Optimal, "membership");
    }

    rec.branch = "separated";
    auto proj = project(xn, set, opts.convex);
    ++cert.convex_calls;
    if (proj.status == ConvexStatus::Infeasible) return finish(SolveStatus::Infeasible, "convex-set-empty");
    if (!proj.certificate.optimal()) return finish(SolveStatus::NumericalFailure, "projection-failure");
    rec.projection = proj.z;
    LinearCut sep = projection_cut(set, proj);
    sep.iteration = st.n;
    sep.parametric_valid = true;
    if (sep.violation(xn) < proj.distance * proj.distance - 1e-8)
      log_warning("separation cut is shallower than the squared distance");
    if (add_to_pool(st.pool, st.duplicates, sep)) emit(sep);

    PolishOutcome po;
    try {
      po = polish_step(st, model, xn, opts);
    } catch (const AssumptionError&) {
      throw;
    } catch (const std::runtime_error& e) {
      log_warning(e.what());
      return finish(SolveStatus::NumericalFailure, "polish-failure");
    }
    ++cert.convex_calls;
    switch (po.kind) {
      case PolishCase::Infeasible: rec.polish_case = "infeasible"; break;
      case PolishCase::Interior: rec.polish_case = "interior"; break;
      case PolishCase::Boundary: rec.polish_case = "boundary"; break;
    }
    if (po.kind != PolishCase::Infeasible) rec.polished = po.certificate.x;
    for (const auto& c : po.cuts) emit(c);
    if (po.lp_equivalent) cert.lemma_checks.push_back({st.n, *po.lp_equivalent, po.certificate.objective});

    rec.L = st.L;
    rec.U = st.U;
    rec.pool = static_cast<int>(st.pool.size());
    const bool done = std::isfinite(st.U) && st.U - st.L <= opts.tol * (1.0 + std::abs(st.U));
    rec.terminated = done;
    st.trace.push_back(rec);
    cert.L_history.push_back(st.L);
    cert.U_history.push_back(st.U);
    if (opts.trace)
      *opts.trace << nlohmann::json{{"n", st.n},          {"L", bound_json(st.L)},  {"U", bound_json(st.U)},
                                    {"pool", rec.pool},   {"branch", rec.branch}, {"polish", rec.polish_case},
                                    {"x", vec_json(xn)},  {"z", vec_json(proj.z)}}
                         .dump()
                  << "\n";
    if (done) return finish(SolveStatus::Optimal, "bounds");
  }
  st.n = opts.max_iter;
  return finish(SolveStatus::BudgetExhausted, "iteration-cap");
}

}  // namespace micp
