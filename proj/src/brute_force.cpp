#include "micp/brute_force.hpp"

#include <cmath>
#include <limits>

namespace micp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Lattice {
  std::vector<int> idx;
  std::vector<long long> lo, hi;
  long long size = 1;
};

Lattice integer_lattice(const ModelInstance& m, const std::vector<bool>& pinned, long long limit) {
  Lattice L;
  for (int j = 0; j < m.num_vars(); ++j) {
    if (!m.vars[j].is_integer() || pinned[j]) continue;
    const double lo = std::ceil(m.vars[j].lower - 1e-9), hi = std::floor(m.vars[j].upper + 1e-9);
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw ModelError("brute force: integer variable " + m.vars[j].name + " is unbounded");
    L.idx.push_back(j);
    L.lo.push_back(static_cast<long long>(lo));
    L.hi.push_back(static_cast<long long>(hi));
    const long long span = std::max(0LL, L.hi.back() - L.lo.back() + 1);
    if (span == 0) {
      L.size = 0;
      continue;
    }
    if (L.size > limit / span) throw ModelError("brute force: integer lattice exceeds " + std::to_string(limit) + " points");
    L.size *= span;
  }
  return L;
}

}  // namespace

BruteForceResult brute_force(const ModelInstance& model, const BruteForceOptions& opts) {
  model.validate();
  const ModelInstance m = epigraph_reformulate(model);
  const int n0 = model.num_vars();
  const int n = m.num_vars();
  std::vector<bool> pinned(n, false);
  for (auto [j, v] : opts.pins) pinned[j] = true;
  const Lattice lat = integer_lattice(m, pinned, opts.max_points);

  BruteForceResult res;
  res.value = kInf;
  res.lattice_points = lat.size;
  if (lat.size == 0) return res;

  std::vector<int> cont;
  for (int j = 0; j < n; ++j)
    if (!m.vars[j].is_integer() && !pinned[j] && m.vars[j].lower < m.vars[j].upper) cont.push_back(j);

  ConvexProgram base = program_from_model(m);
  base.c = m.objective.linear;

  struct Hit {
    Vec x;
    double value;
  };
  std::vector<Hit> hits;
  std::vector<long long> cur(lat.lo);
  for (long long count = 0; count < lat.size; ++count) {
    ConvexProgram prog = base;
    prog.pins = opts.pins;
    for (size_t k = 0; k < lat.idx.size(); ++k) prog.pins.push_back({lat.idx[k], static_cast<double>(cur[k])});

    Vec x = Vec::Zero(n);
    for (int j = 0; j < n; ++j) {
      if (m.vars[j].lower == m.vars[j].upper) x[j] = m.vars[j].lower;
    }
    for (auto [j, v] : prog.pins) x[j] = v;
    bool ok = false;
    if (cont.empty()) {
      ok = max_violation(m, x) <= opts.feas_tol;
    } else {
      auto cert = convex_solve(prog, opts.convex);
      ++res.convex_solves;
      if (cert.optimal()) {
        x = cert.x;
        for (auto [j, v] : prog.pins) x[j] = v;
        ok = max_violation(m, x) <= opts.feas_tol;
      }
      if (ok && opts.collect_points) {
        for (int j : cont)
          for (double s : {1.0, -1.0}) {
            ConvexProgram q = prog;
            q.c = Vec::Zero(n);
            q.c[j] = s;
            auto c2 = convex_solve(q, opts.convex);
            ++res.convex_solves;
            if (!c2.optimal()) continue;
            Vec z = c2.x;
            for (auto [jj, v] : prog.pins) z[jj] = v;
            if (max_violation(m, z) <= opts.feas_tol) res.feasible_points.push_back(z.head(n0));
          }
      }
    }
    if (ok) {
      const double v = objective_value(m, x);
      hits.push_back({x, v});
      if (opts.collect_points) res.feasible_points.push_back(x.head(n0));
      if (v < res.value) {
        res.value = v;
        res.x = x.head(n0);
      }
    }
    // odometer
    for (size_t k = 0; k < cur.size(); ++k) {
      if (++cur[k] <= lat.hi[k]) break;
      cur[k] = lat.lo[k];
    }
  }
  res.feasible = !hits.empty();
  for (const auto& h : hits)
    if (h.value <= res.value + opts.feas_tol * (1.0 + std::abs(res.value))) res.argmin.push_back(h.x.head(n0));
  return res;
}

TwoStageBruteForce brute_force(const TwoStageInstance& inst, const BruteForceOptions& opts) {
  inst.validate();
  const int nx = inst.num_x();
  if (nx >= 62 || (1LL << nx) > opts.max_points) throw ModelError("brute force: first-stage lattice too large");
  std::vector<ModelInstance> subs;
  for (int w = 0; w < inst.num_scenarios(); ++w) subs.push_back(scenario_model(inst, w));
  TwoStageBruteForce res;
  res.value = kInf;
  res.scenario_points.resize(subs.size());
  for (long long code = 0; code < (1LL << nx); ++code) {
    Vec x(nx);
    for (int j = 0; j < nx; ++j) x[j] = static_cast<double>((code >> j) & 1);
    bool first_ok = true;
    for (int i = 0; i < inst.A.rows(); ++i)
      if (inst.A.row(i).dot(x) > inst.b[i] + opts.feas_tol) first_ok = false;
    for (const auto& e : inst.constraints)
      if (e.value(x) > opts.feas_tol) first_ok = false;
    if (!first_ok) continue;
    std::vector<double> q;
    bool all = true;
    for (size_t w = 0; w < subs.size(); ++w) {
      BruteForceOptions o = opts;
      o.pins.clear();
      for (int j = 0; j < nx; ++j) o.pins.push_back({j, x[j]});
      auto r = brute_force(subs[w], o);
      q.push_back(r.feasible ? r.value : kInf);
      all = all && r.feasible;
      if (opts.collect_points)
        for (auto& z : r.feasible_points) res.scenario_points[w].push_back(z);
    }
    double total = kInf;
    if (all) {
      Vec p = worst_case_distribution(q, inst);
      total = inst.c.dot(x);
      for (size_t w = 0; w < q.size(); ++w) total += p[static_cast<int>(w)] * q[w];
    }
    res.xs.push_back(x);
    res.totals.push_back(total);
    res.recourse.push_back(q);
    if (total < res.value) {
      res.value = total;
      res.x = x;
    }
  }
  res.feasible = std::isfinite(res.value);
  if (res.feasible)
    for (size_t i = 0; i < res.xs.size(); ++i)
      if (res.totals[i] <= res.value + opts.feas_tol * (1.0 + std::abs(res.value))) res.argmin.push_back(res.xs[i]);
  return res;
}

bool check_assumption1(const ModelInstance& model, const BruteForceOptions& opts) {
  const auto fs = first_stage_mask(model);
  const int n = model.num_vars();
  std::vector<bool> ymask(n);
  for (int j = 0; j < n; ++j) ymask[j] = !fs[j];
  // x-only part of the model
  ModelInstance xo = make_model(model.vars);
  for (int i = 0; i < model.A.rows(); ++i) {
    bool touches = false;
    for (int j = 0; j < n; ++j) touches = touches || (ymask[j] && model.A(i, j) != 0.0);
    if (!touches) add_row(xo, model.A.row(i).transpose(), model.b[i]);
  }
  for (const auto& e : model.constraints)
    if (!e.depends_on_any(ymask)) xo.constraints.push_back(e);
  for (int j = 0; j < n; ++j)
    if (!fs[j]) xo.vars[j] = {model.vars[j].name, VarKind::Continuous, model.vars[j].lower, model.vars[j].upper};

  BruteForceOptions o = opts;
  std::vector<bool> pinned(n, false);
  for (int j = 0; j < n; ++j) pinned[j] = !fs[j];
  const Lattice lat = integer_lattice(model, pinned, opts.max_points);
  std::vector<long long> cur(lat.lo);
  for (long long count = 0; count < lat.size; ++count) {
    Vec x = Vec::Zero(n);
    o.pins.clear();
    for (size_t k = 0; k < lat.idx.size(); ++k) {
      x[lat.idx[k]] = static_cast<double>(cur[k]);
      o.pins.push_back({lat.idx[k], x[lat.idx[k]]});
    }
    bool first_ok = true;
    for (int i = 0; i < xo.A.rows(); ++i)
      if (xo.A.row(i).dot(x) > xo.b[i] + opts.feas_tol) first_ok = false;
    for (const auto& e : xo.constraints)
      if (e.value(x) > opts.feas_tol) first_ok = false;
    if (first_ok && !brute_force(model, o).feasible) return false;
    for (size_t k = 0; k < cur.size(); ++k) {
      if (++cur[k] <= lat.hi[k]) break;
      cur[k] = lat.lo[k];
    }
  }
  return true;
}

bool check_assumption1(const TwoStageInstance& inst, const BruteForceOptions& opts) {
  auto r = brute_force(inst, opts);
  for (const auto& q : r.recourse)
    for (double v : q)
      if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace micp
