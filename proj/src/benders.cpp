#include "micp/benders.hpp"

#include "micp/log.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

namespace micp {

namespace {

std::string vec_str(const Vec& v) {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << "]";
  return os.str();
}

nlohmann::json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

ParametricResult parametric_solve(const ModelInstance& model, const std::vector<int>& x_idx, const Vec& x0,
                                  MicpOptions opts) {
  model.validate();
  if (model.objective.convex) throw ModelError("parametric_solve expects a linear objective");
  ModelInstance m = model;
  m.first_stage.assign(m.num_vars(), false);
  for (int j : x_idx) m.first_stage[j] = true;
  auto report = check_assumptions(m);
  for (size_t i = 0; i < report.constraints.size(); ++i)
    if (!report.constraints[i].assumption2)
      throw AssumptionError("constraint " + m.constraint_name(static_cast<int>(i)) +
                            " violates the subdifferential product assumption");
  opts.param_idx = x_idx;
  opts.param_value = x0;
  opts.milp.mode = MilpMode::CuttingPlaneParametric;
  ParametricResult out;
  out.certificate = micp_solve(m, opts);
  if (out.certificate.status == SolveStatus::Infeasible)
    throw std::runtime_error("second stage infeasible at x0 = " + vec_str(x0) + " (recourse assumption violated)");
  if (out.certificate.status != SolveStatus::Optimal)
    throw std::runtime_error(std::string("parametric solve ended with ") + to_string(out.certificate.status) + " (" +
                             out.certificate.termination + ")");
  out.value = out.certificate.objective;
  out.y = out.certificate.x;
  out.terminal = extract_terminal_lp(*out.certificate.last_master, *out.certificate.last_master_result);
  if (!out.terminal.solution.optimal()) throw std::runtime_error("terminal LP solve failed");
  return out;
}

BendersCut benders_cut_from_terminal_lp(const TerminalLp& t, const Vec& x0) {
  const auto& s = t.solution;
  if (!s.optimal()) throw std::runtime_error("benders: terminal LP not optimal");
  auto rep = lp_dual_certificate(s, t.lp);
  if (!rep.ok) throw std::runtime_error("benders: dual certificate rejected");
  // Weak duality with the duals frozen: v(x) >= v0 + (c_x + C'l + Ce'mu).(x - x0).
  const int np = static_cast<int>(t.param_idx.size());
  BendersCut cut;
  cut.slope = Vec::Zero(np);
  for (int k = 0; k < np; ++k) cut.slope[k] = t.lp.c[t.param_idx[k]];
  if (t.C.rows() > 0) cut.slope += t.C.transpose() * s.y_le;
  if (t.Ce.rows() > 0) cut.slope += t.Ce.transpose() * s.y_eq;
  cut.intercept = s.objective - cut.slope.dot(x0);
  return cut;
}

std::pair<double, double> recourse_bounds(const ModelInstance& model, const std::vector<bool>& first_stage) {
  double lo = model.objective.constant, hi = model.objective.constant;
  for (int j = 0; j < model.num_vars(); ++j) {
    if (first_stage[j]) continue;
    const double c = model.objective.linear[j];
    lo += std::min(c * model.vars[j].lower, c * model.vars[j].upper);
    hi += std::max(c * model.vars[j].lower, c * model.vars[j].upper);
  }
  return {lo, hi};
}

DecompositionResult benders_outer_loop(const ModelInstance& base_master, const OuterOracle& oracle,
                                       const DecompositionOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  DecompositionResult res;
  const int nx = base_master.num_vars() - 1;
  ModelInstance master = base_master;
  std::vector<LinearCut> carried;
  std::vector<Vec> visited;
  double L = -std::numeric_limits<double>::infinity();
  double U = std::numeric_limits<double>::infinity();
  auto finish = [&](SolveStatus st, const std::string& why) {
    res.status = st;
    res.termination = why;
    res.L = L;
    res.U = U;
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  };
  for (int m = 1; m <= opts.max_outer; ++m) {
    res.iterations = m;
    MicpOptions mo = opts.master;
    mo.param_idx.clear();
    mo.param_value = Vec::Zero(0);
    if (opts.carry_master_cuts) mo.initial_cuts = carried;
    auto mc = micp_solve(master, mo);
    if (mc.status == SolveStatus::Infeasible) return finish(SolveStatus::Infeasible, "master-infeasible");
    if (mc.status != SolveStatus::Optimal) return finish(mc.status, "master-failure");
    res.master_relaxations.push_back(mc.root_relaxation);
    for (const auto& c : mc.cuts) {
      res.cuts.push_back({c, -1});
      if (opts.carry_master_cuts) carried.push_back(c);
    }
    for (const auto& lc : mc.lemma_checks) res.lemma_checks.push_back(lc);
    Vec xm = mc.x.head(nx);
    for (int j = 0; j < nx; ++j)
      if (master.vars[j].is_integer()) xm[j] = std::round(xm[j]);
    L = std::max(L, std::min(mc.L, mc.objective));

    OuterRecord rec;
    rec.m = m;
    rec.x = xm;
    for (const auto& v : visited)
      if ((v - xm).cwiseAbs().maxCoeff() <= 1e-9) rec.revisit = true;
    if (rec.revisit) {
      rec.L = L;
      rec.U = U;
      res.outer.push_back(rec);
      if (opts.trace)
        *opts.trace << nlohmann::json{{"m", m}, {"x", vec_json(xm)}, {"L", L}, {"U", U}, {"revisit", true}}.dump()
                    << "\n";
      return finish(SolveStatus::Optimal, "revisit");
    }
    visited.push_back(xm);

    OuterEvaluation ev = oracle(xm, m);
    ev.cut.iteration = m;
    for (auto& c : ev.cuts) res.cuts.push_back(c);
    for (const auto& lc : ev.lemma_checks) res.lemma_checks.push_back(lc);
    const double first = base_master.objective.linear.head(nx).dot(xm) + base_master.objective.constant;
    if (first + ev.recourse < U) {
      U = first + ev.recourse;
      res.x = xm;
      res.objective = U;
    }
    rec.recourse = ev.recourse;
    rec.cut = ev.cut;
    rec.cut_at_x = ev.cut(xm);
    rec.p = ev.p;
    rec.scenario_values = ev.scenario_values;
    rec.duality_values = ev.duality_values;
    rec.L = L;
    rec.U = U;
    res.outer.push_back(rec);
    res.benders.push_back(ev.cut);
    if (opts.trace) {
      nlohmann::json j{{"m", m},
                       {"x", vec_json(xm)},
                       {"L", L},
                       {"U", U},
                       {"recourse", ev.recourse},
                       {"cut", {{"slope", vec_json(ev.cut.slope)}, {"intercept", ev.cut.intercept}}}};
      if (ev.p.size()) j["p"] = vec_json(ev.p);
      if (!ev.scenario_values.empty()) j["scenario_values"] = ev.scenario_values;
      *opts.trace << j.dump() << "\n";
    }
    if (U - L <= opts.tol * (1.0 + std::abs(U))) return finish(SolveStatus::Optimal, "bounds");

    // eta >= a.x + b   as   a.x - eta <= -b
    Vec row = Vec::Zero(nx + 1);
    row.head(nx) = ev.cut.slope;
    row[nx] = -1.0;
    add_row(master, row, -ev.cut.intercept);
  }
  return finish(SolveStatus::BudgetExhausted, "iteration-cap");
}

DecompositionResult decompose_solve(const ModelInstance& input, const DecompositionOptions& opts) {
  const ModelInstance model = epigraph_reformulate(input);
  model.validate();
  const int n = model.num_vars();
  const auto fs = first_stage_mask(model);
  std::vector<int> x_idx, y_idx;
  for (int j = 0; j < n; ++j) (fs[j] ? x_idx : y_idx).push_back(j);
  const int nx = static_cast<int>(x_idx.size());
  auto touches_y = [&](const Vec& row) {
    for (int j : y_idx)
      if (row[j] != 0.0) return true;
    return false;
  };

  // Master over (x, eta): rows and convex constraints living on x alone.
  std::vector<VariableSpec> mvars;
  for (int j : x_idx) mvars.push_back(model.vars[j]);
  auto [eta_lo, eta_hi] = recourse_bounds(model, fs);
  eta_lo -= model.objective.constant;
  eta_hi -= model.objective.constant;
  mvars.push_back({"eta", VarKind::Continuous, eta_lo, eta_hi});
  ModelInstance master = make_model(mvars);
  for (int k = 0; k < nx; ++k) master.objective.linear[k] = model.objective.linear[x_idx[k]];
  master.objective.linear[nx] = 1.0;
  master.objective.constant = model.objective.constant;
  std::vector<int> to_master(n, -1);
  for (int k = 0; k < nx; ++k) to_master[x_idx[k]] = k;

  ModelInstance sub = model;
  sub.A = Mat(0, n);
  sub.b = Vec(0);
  sub.G = Mat(0, n);
  sub.h = Vec(0);
  sub.constraints.clear();
  sub.constraint_names.clear();
  for (int j : x_idx) sub.objective.linear[j] = 0.0;
  sub.objective.constant = 0.0;
  for (int i = 0; i < model.A.rows(); ++i) {
    const Vec row = model.A.row(i).transpose();
    if (touches_y(row)) {
      add_row(sub, row, model.b[i]);
    } else {
      Vec r(nx + 1);
      for (int k = 0; k < nx; ++k) r[k] = row[x_idx[k]];
      r[nx] = 0.0;
      add_row(master, r, model.b[i]);
    }
  }
  for (int i = 0; i < model.G.rows(); ++i) {
    const Vec row = model.G.row(i).transpose();
    if (touches_y(row)) {
      add_equality(sub, row, model.h[i]);
    } else {
      Vec r(nx + 1);
      for (int k = 0; k < nx; ++k) r[k] = row[x_idx[k]];
      r[nx] = 0.0;
      add_equality(master, r, model.h[i]);
    }
  }
  std::vector<bool> ymask(n, false);
  for (int j : y_idx) ymask[j] = true;
  for (size_t i = 0; i < model.constraints.size(); ++i) {
    const auto& e = model.constraints[i];
    if (e.depends_on_any(ymask)) {
      sub.constraints.push_back(e);
      sub.constraint_names.push_back(model.constraint_name(static_cast<int>(i)));
    } else {
      master.constraints.push_back(e.embed(to_master, nx + 1));
      master.constraint_names.push_back(model.constraint_name(static_cast<int>(i)));
    }
  }
  master.constraint_names.resize(master.constraints.size());
  sub.first_stage = fs;

  OuterOracle oracle = [&](const Vec& x, int m) {
    auto pr = parametric_solve(sub, x_idx, x, opts.sub);
    OuterEvaluation ev;
    ev.recourse = pr.value;
    ev.cut = benders_cut_from_terminal_lp(pr.terminal, x);
    ev.cut.iteration = m;
    ev.scenario_values = {pr.value};
    ev.duality_values = {lp_dual_objective(pr.terminal.solution, pr.terminal.lp)};
    for (const auto& c : pr.certificate.cuts) ev.cuts.push_back({c, 0});
    ev.lemma_checks = pr.certificate.lemma_checks;
    return ev;
  };
  return benders_outer_loop(master, oracle, opts);
}

}  // namespace micp
