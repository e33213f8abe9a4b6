#include "micp/two_stage.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace micp {

void TwoStageInstance::validate() const {
  const int nx = num_x();
  if (nx == 0) throw ModelError("two-stage: no first-stage variables");
  for (const auto& v : x_vars)
    if (v.kind != VarKind::Binary) throw ModelError("two-stage: first-stage variable " + v.name + " must be binary");
  if (c.size() != nx) throw ModelError("two-stage: first-stage cost has wrong length");
  if (A.rows() != b.size() || (A.rows() > 0 && A.cols() != nx)) throw ModelError("two-stage: first-stage rows");
  for (const auto& e : constraints)
    if (e.dim() != nx) throw ModelError("two-stage: first-stage constraint dimension");
  if (scenarios.empty()) throw ModelError("two-stage: at least one scenario required");
  for (int w = 0; w < num_scenarios(); ++w) {
    const auto& s = scenarios[w];
    const int ny = static_cast<int>(s.y_vars.size());
    if (s.q.size() != ny) throw ModelError("two-stage: scenario " + s.name + " cost length");
    if (s.A.rows() != s.b.size() || (s.A.rows() > 0 && s.A.cols() != nx + ny))
      throw ModelError("two-stage: scenario " + s.name + " rows");
    for (const auto& e : s.constraints)
      if (e.dim() != nx + ny) throw ModelError("two-stage: scenario " + s.name + " constraint dimension");
    scenario_model(*this, w).validate();
  }
  const int np = num_scenarios();
  if (P_A.rows() != P_b.size() || (P_A.rows() > 0 && P_A.cols() != np)) throw ModelError("two-stage: ambiguity rows");
  if (P_G.rows() != P_h.size() || (P_G.rows() > 0 && P_G.cols() != np))
    throw ModelError("two-stage: ambiguity equalities");
  auto s = lp_solve(ambiguity_lp(*this, Vec::Zero(np)));
  if (!s.optimal()) throw ModelError("two-stage: ambiguity set is empty");
}

ModelInstance scenario_model(const TwoStageInstance& inst, int w) {
  const auto& s = inst.scenarios[w];
  const int nx = inst.num_x();
  const int ny = static_cast<int>(s.y_vars.size());
  std::vector<VariableSpec> vars = inst.x_vars;
  vars.insert(vars.end(), s.y_vars.begin(), s.y_vars.end());
  ModelInstance m = make_model(vars);
  m.objective.linear.tail(ny) = s.q;
  m.A = s.A.rows() ? s.A : Mat(0, nx + ny);
  m.b = s.b;
  m.constraints = s.constraints;
  m.constraint_names = s.constraint_names;
  m.constraint_names.resize(m.constraints.size());
  m.first_stage.assign(nx + ny, false);
  for (int j = 0; j < nx; ++j) m.first_stage[j] = true;
  return m;
}

ModelInstance first_stage_model(const TwoStageInstance& inst) {
  const int nx = inst.num_x();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int w = 0; w < inst.num_scenarios(); ++w) {
    auto m = scenario_model(inst, w);
    auto [l, h] = recourse_bounds(m, m.first_stage);
    lo = std::min(lo, l);
    hi = std::max(hi, h);
  }
  if (inst.eta_lower) lo = *inst.eta_lower;
  std::vector<VariableSpec> vars = inst.x_vars;
  vars.push_back({"eta", VarKind::Continuous, lo, std::max(lo, hi)});
  ModelInstance m = make_model(vars);
  m.objective.linear.head(nx) = inst.c;
  m.objective.linear[nx] = 1.0;
  for (int i = 0; i < inst.A.rows(); ++i) {
    Vec row = Vec::Zero(nx + 1);
    row.head(nx) = inst.A.row(i).transpose();
    add_row(m, row, inst.b[i]);
  }
  std::vector<int> map(nx);
  for (int j = 0; j < nx; ++j) map[j] = j;
  for (const auto& e : inst.constraints) m.constraints.push_back(e.embed(map, nx + 1));
  m.constraint_names.resize(m.constraints.size());
  m.first_stage.assign(nx + 1, false);
  for (int j = 0; j < nx; ++j) m.first_stage[j] = true;
  return m;
}

LpProblem ambiguity_lp(const TwoStageInstance& inst, const Vec& objective) {
  const int np = inst.num_scenarios();
  LpProblem lp = make_lp(objective, Vec::Zero(np), Vec::Ones(np));
  lp.add_eq(Vec::Ones(np), 1.0);
  for (int i = 0; i < inst.P_A.rows(); ++i) lp.add_le(inst.P_A.row(i).transpose(), inst.P_b[i]);
  for (int i = 0; i < inst.P_G.rows(); ++i) lp.add_eq(inst.P_G.row(i).transpose(), inst.P_h[i]);
  return lp;
}

Vec worst_case_distribution(const std::vector<double>& values, const TwoStageInstance& inst) {
  const int np = inst.num_scenarios();
  if (static_cast<int>(values.size()) != np) throw ModelError("worst-case distribution: value count");
  Vec v = Vec::Map(values.data(), np);
  auto s = lp_solve(ambiguity_lp(inst, -v));
  if (!s.optimal()) throw ModelError("worst-case distribution: ambiguity set is empty");
  return s.x;
}

BendersCut aggregate_benders(const Vec& p, const std::vector<BendersCut>& cuts) {
  if (cuts.empty() || p.size() != static_cast<int>(cuts.size())) throw std::invalid_argument("aggregate: size mismatch");
  BendersCut out;
  out.slope = Vec::Zero(cuts[0].slope.size());
  for (size_t w = 0; w < cuts.size(); ++w) {
    out.slope += p[static_cast<int>(w)] * cuts[w].slope;
    out.intercept += p[static_cast<int>(w)] * cuts[w].intercept;
  }
  out.provenance = "aggregated";
  return out;
}

ScenarioDual scenario_dual(const TerminalLp& t, const Vec& x, double value) {
  ScenarioDual d;
  const auto& s = t.solution;
  d.Q = -t.D;
  d.R = -t.C;
  d.s = -t.F;
  d.mu = s.y_le;
  d.value = value;
  for (int j : t.other_idx) {
    if (std::isfinite(t.lp.lower[j])) d.bound_term += t.lp.lower[j] * s.z_lower[j];
    if (std::isfinite(t.lp.upper[j])) d.bound_term -= t.lp.upper[j] * s.z_upper[j];
  }
  d.duality_value = d.mu.dot(d.s - d.R * x) + d.bound_term;
  if (t.Ce.rows() > 0) d.duality_value += s.y_eq.dot(t.Ce * x - t.Fe);
  for (size_t k = 0; k < t.param_idx.size(); ++k) d.duality_value += t.lp.c[t.param_idx[k]] * x[static_cast<int>(k)];
  return d;
}

DecompositionResult dr_solve(const TwoStageInstance& inst, const DecompositionOptions& opts) {
  inst.validate();
  const int nx = inst.num_x();
  const int nw = inst.num_scenarios();
  std::vector<ModelInstance> subs;
  for (int w = 0; w < nw; ++w) subs.push_back(scenario_model(inst, w));
  std::vector<int> x_idx(nx);
  for (int j = 0; j < nx; ++j) x_idx[j] = j;

  OuterOracle oracle = [&](const Vec& x, int m) {
    std::vector<ParametricResult> res(nw);
    std::vector<std::exception_ptr> errs(nw);
    auto work = [&](int w) {
      try {
        res[w] = parametric_solve(subs[w], x_idx, x, opts.sub);
      } catch (...) {
        errs[w] = std::current_exception();
      }
    };
    const int threads = std::max(1, opts.threads);
    for (int start = 0; start < nw; start += threads) {
      std::vector<std::thread> pool;
      const int stop = std::min(nw, start + threads);
      if (threads == 1) {
        work(start);
        continue;
      }
      for (int w = start; w < stop; ++w) pool.emplace_back(work, w);
      for (auto& t : pool) t.join();
    }
    for (int w = 0; w < nw; ++w)
      if (errs[w]) std::rethrow_exception(errs[w]);

    OuterEvaluation ev;
    std::vector<BendersCut> cuts;
    for (int w = 0; w < nw; ++w) {
      ev.scenario_values.push_back(res[w].value);
      cuts.push_back(benders_cut_from_terminal_lp(res[w].terminal, x));
      cuts.back().iteration = m;
      ev.duality_values.push_back(scenario_dual(res[w].terminal, x, res[w].value).duality_value);
      for (const auto& c : res[w].certificate.cuts) ev.cuts.push_back({c, w});
      for (const auto& lc : res[w].certificate.lemma_checks) ev.lemma_checks.push_back(lc);
    }
    ev.p = worst_case_distribution(ev.scenario_values, inst);
    ev.cut = aggregate_benders(ev.p, cuts);
    ev.recourse = 0.0;
    for (int w = 0; w < nw; ++w) ev.recourse += ev.p[w] * ev.scenario_values[w];
    return ev;
  };
  return benders_outer_loop(first_stage_model(inst), oracle, opts);
}

bool ambiguity_singleton(const TwoStageInstance& inst, Vec* p) {
  const int np = inst.num_scenarios();
  Vec point;
  for (int w = 0; w < np; ++w) {
    Vec e = Vec::Zero(np);
    e[w] = 1.0;
    auto lo = lp_solve(ambiguity_lp(inst, e));
    auto hi = lp_solve(ambiguity_lp(inst, -e));
    if (!lo.optimal() || !hi.optimal()) return false;
    if (std::abs(lo.objective + hi.objective) > 1e-9) return false;
    if (w == 0) point = lo.x;
  }
  if (p) *p = point;
  return true;
}

ModelInstance extensive_form(const TwoStageInstance& inst) {
  inst.validate();
  Vec p;
  if (!ambiguity_singleton(inst, &p)) throw ModelError("extensive form needs a singleton ambiguity set");
  const int nx = inst.num_x();
  std::vector<VariableSpec> vars = inst.x_vars;
  std::vector<int> offset;
  for (const auto& s : inst.scenarios) {
    offset.push_back(static_cast<int>(vars.size()));
    for (auto v : s.y_vars) {
      v.name = s.name + "." + v.name;
      vars.push_back(v);
    }
  }
  const int n = static_cast<int>(vars.size());
  ModelInstance m = make_model(vars);
  m.objective.linear.head(nx) = inst.c;
  for (int i = 0; i < inst.A.rows(); ++i) {
    Vec row = Vec::Zero(n);
    row.head(nx) = inst.A.row(i).transpose();
    add_row(m, row, inst.b[i]);
  }
  std::vector<int> xmap(nx);
  for (int j = 0; j < nx; ++j) xmap[j] = j;
  for (const auto& e : inst.constraints) {
    m.constraints.push_back(e.embed(xmap, n));
    m.constraint_names.push_back("first");
  }
  for (int w = 0; w < inst.num_scenarios(); ++w) {
    const auto& s = inst.scenarios[w];
    const int ny = static_cast<int>(s.y_vars.size());
    std::vector<int> map(nx + ny);
    for (int j = 0; j < nx; ++j) map[j] = j;
    for (int k = 0; k < ny; ++k) map[nx + k] = offset[w] + k;
    for (int k = 0; k < ny; ++k) m.objective.linear[offset[w] + k] += p[w] * s.q[k];
    for (int i = 0; i < s.A.rows(); ++i) {
      Vec row = Vec::Zero(n);
      for (int j = 0; j < nx + ny; ++j) row[map[j]] = s.A(i, j);
      add_row(m, row, s.b[i]);
    }
    for (size_t i = 0; i < s.constraints.size(); ++i) {
      m.constraints.push_back(s.constraints[i].embed(map, n));
      m.constraint_names.push_back(s.name + "." +
                                   (i < s.constraint_names.size() ? s.constraint_names[i] : std::to_string(i)));
    }
  }
  m.first_stage.assign(n, false);
  for (int j = 0; j < nx; ++j) m.first_stage[j] = true;
  return m;
}

}  // namespace micp
