#include "micp/milp.hpp"

#include "micp/log.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <stdexcept>

namespace micp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Box {
  Vec lo, hi;
};

LpProblem pinned_lp(const MilpProblem& p) {
  LpProblem lp = p.lp;
  for (size_t k = 0; k < p.param_idx.size(); ++k) {
    lp.lower[p.param_idx[k]] = p.param_value[static_cast<int>(k)];
    lp.upper[p.param_idx[k]] = p.param_value[static_cast<int>(k)];
  }
  return lp;
}

std::vector<bool> param_mask(const MilpProblem& p) {
  std::vector<bool> m(p.num_vars(), false);
  for (int k : p.param_idx) m[k] = true;
  return m;
}

// Most fractional branching candidate, lowest index on ties; -1 if integral.
int most_fractional(const Vec& x, const std::vector<bool>& integer, const std::vector<bool>& skip, double tol) {
  int best = -1;
  double best_frac = tol;
  for (int j = 0; j < x.size(); ++j) {
    if (!integer[j] || skip[j]) continue;
    const double f = std::abs(x[j] - std::round(x[j]));
    if (f > best_frac + 1e-12) {
      best_frac = f;
      best = j;
    }
  }
  return best;
}

// Re-solves with the integer block rounded and pinned so the returned point is
// exactly integral. Keeps the original point if the pinned LP misbehaves.
void polish_integral(const LpProblem& lp, const std::vector<bool>& integer, Vec& x, double& obj) {
  LpProblem q = lp;
  for (int j = 0; j < x.size(); ++j) {
    if (!integer[j]) continue;
    const double r = std::round(x[j]);
    q.lower[j] = r;
    q.upper[j] = r;
  }
  auto s = lp_solve(q);
  if (s.optimal()) {
    x = s.x;
    obj = s.objective;
  }
}

struct BbOutcome {
  MilpStatus status = MilpStatus::Infeasible;
  Vec x;
  double objective = kInf;
  std::vector<Box> leaves;
  Vec root;
  int nodes = 0;
  int lp_solves = 0;
};

BbOutcome branch_and_bound(const LpProblem& lp, const std::vector<bool>& integer, const std::vector<bool>& skip,
                           const MilpOptions& opts, bool keep_leaves) {
  struct Node {
    Box box;
    double bound;
    int id;
  };
  auto worse = [](const Node& a, const Node& b) { return a.bound > b.bound || (a.bound == b.bound && a.id > b.id); };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
  BbOutcome out;
  int next_id = 0;
  open.push({{lp.lower, lp.upper}, -kInf, next_id++});
  auto prune_level = [&]() { return out.objective - 1e-9 * (1.0 + std::abs(out.objective)); };
  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (std::isfinite(out.objective) && node.bound >= prune_level()) {
      if (keep_leaves) out.leaves.push_back(node.box);
      continue;
    }
    if (out.nodes >= opts.max_nodes) {
      out.status = MilpStatus::BudgetExhausted;
      return out;
    }
    ++out.nodes;
    LpProblem q = lp;
    q.lower = node.box.lo;
    q.upper = node.box.hi;
    auto s = lp_solve(q);
    ++out.lp_solves;
    if (out.nodes == 1 && s.optimal()) out.root = s.x;
    if (s.status == LpStatus::Infeasible) {
      if (keep_leaves) out.leaves.push_back(node.box);
      continue;
    }
    if (!s.optimal()) {
      log_warning(std::string("milp: node LP ended ") + to_string(s.status));
      out.status = MilpStatus::NumericalFailure;
      return out;
    }
    if (std::isfinite(out.objective) && s.objective >= prune_level()) {
      if (keep_leaves) out.leaves.push_back(node.box);
      continue;
    }
    const int j = most_fractional(s.x, integer, skip, opts.integrality_tol);
    if (j < 0) {
      Vec x = s.x;
      double obj = s.objective;
      polish_integral(q, integer, x, obj);
      if (obj < out.objective) {
        out.objective = obj;
        out.x = x;
      }
      if (keep_leaves) out.leaves.push_back(node.box);
      continue;
    }
    const double v = s.x[j];
    Node down{node.box, s.objective, next_id++};
    down.box.hi[j] = std::floor(v);
    Node up{node.box, s.objective, next_id++};
    up.box.lo[j] = std::ceil(v);
    open.push(down);
    open.push(up);
  }
  out.status = std::isfinite(out.objective) ? MilpStatus::Optimal : MilpStatus::Infeasible;
  return out;
}

// Rows of the joint polyhedron used by the cut generators: le rows, eq rows
// split in two, all in <= form. The box is handled separately.
struct Polyhedron {
  Mat A;
  Vec b;
  Vec lo, hi;
};

Polyhedron joint_polyhedron(const LpProblem& lp) {
  Polyhedron P;
  const int n = lp.num_vars();
  const int m = lp.num_le() + 2 * lp.num_eq();
  P.A = Mat(m, n);
  P.b = Vec(m);
  int r = 0;
  for (int i = 0; i < lp.num_le(); ++i, ++r) {
    P.A.row(r) = lp.A_le.row(i);
    P.b[r] = lp.b_le[i];
  }
  for (int i = 0; i < lp.num_eq(); ++i) {
    P.A.row(r) = lp.A_eq.row(i);
    P.b[r++] = lp.b_eq[i];
    P.A.row(r) = -lp.A_eq.row(i);
    P.b[r++] = -lp.b_eq[i];
  }
  P.lo = lp.lower;
  P.hi = lp.upper;
  return P;
}

// max alpha.z over P with one extra row d.z <= e. nullopt when empty.
std::optional<double> support_value(const Polyhedron& P, const Vec& alpha, const Vec& d, double e) {
  LpProblem q = make_lp(-alpha, P.lo, P.hi);
  q.A_le = P.A;
  q.b_le = P.b;
  q.add_le(d, e);
  auto s = lp_solve(q);
  if (s.status == LpStatus::Infeasible) return std::nullopt;
  if (!s.optimal()) throw std::runtime_error("cglp: support LP failed (" + std::string(to_string(s.status)) + ")");
  return -s.objective;
}

enum class CglpOutcome { Cut, Stall, Empty };

// Split cut on z_j <= f or z_j >= f + 1 over P, normalized ||alpha||_1 <= 1,
// maximizing the violation at zstar. The right-hand side is re-derived from
// the two support LPs so validity does not rest on the CGLP's own accuracy.
CglpOutcome split_cglp(const Polyhedron& P, const Vec& zstar, int j, double f, double min_violation, LinearCut& cut) {
  const int n = static_cast<int>(zstar.size());
  const int m = static_cast<int>(P.A.rows());
  std::vector<int> upper_rows, lower_rows;
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(P.hi[i])) upper_rows.push_back(i);
    if (std::isfinite(P.lo[i])) lower_rows.push_back(i);
  }
  const int nu = static_cast<int>(upper_rows.size());
  const int nl = static_cast<int>(lower_rows.size());
  const int per = m + nu + nl + 1;
  // Columns: alpha+ (n), alpha- (n), beta, then per disjunct [u, v, w, t].
  const int N = 2 * n + 1 + 2 * per;
  Vec c = Vec::Zero(N);
  c.head(n) = -zstar;
  c.segment(n, n) = zstar;
  c[2 * n] = 1.0;
  Vec lo = Vec::Zero(N), hi = Vec::Constant(N, kInf);
  lo[2 * n] = -kInf;
  LpProblem q = make_lp(c, lo, hi);
  for (int k = 0; k < 2; ++k) {
    const int off = 2 * n + 1 + k * per;
    Vec d = Vec::Zero(n);
    double e;
    if (k == 0) {
      d[j] = 1.0;
      e = f;
    } else {
      d[j] = -1.0;
      e = -(f + 1.0);
    }
    // alpha - A'u - v + w - t d = 0
    for (int i = 0; i < n; ++i) {
      Vec row = Vec::Zero(N);
      row[i] = 1.0;
      row[n + i] = -1.0;
      for (int r = 0; r < m; ++r) row[off + r] = -P.A(r, i);
      for (int a = 0; a < nu; ++a)
        if (upper_rows[a] == i) row[off + m + a] = -1.0;
      for (int a = 0; a < nl; ++a)
        if (lower_rows[a] == i) row[off + m + nu + a] = 1.0;
      row[off + per - 1] = -d[i];
      q.add_eq(row, 0.0);
    }
    // b'u + hi'v - lo'w + e t - beta <= 0
    Vec row = Vec::Zero(N);
    row.segment(off, m) = P.b;
    for (int a = 0; a < nu; ++a) row[off + m + a] = P.hi[upper_rows[a]];
    for (int a = 0; a < nl; ++a) row[off + m + nu + a] = -P.lo[lower_rows[a]];
    row[off + per - 1] = e;
    row[2 * n] = -1.0;
    q.add_le(row, 0.0);
  }
  Vec norm = Vec::Zero(N);
  norm.head(2 * n).setOnes();
  q.add_le(norm, 1.0);
  auto s = lp_solve(q);
  if (!s.optimal() || -s.objective < min_violation) return CglpOutcome::Stall;
  Vec alpha = s.x.head(n) - s.x.segment(n, n);
  for (int i = 0; i < n; ++i)
    if (std::abs(alpha[i]) < 1e-11) alpha[i] = 0.0;
  if (alpha.cwiseAbs().maxCoeff() == 0.0) return CglpOutcome::Stall;
  Vec d = Vec::Zero(n);
  d[j] = 1.0;
  auto b1 = support_value(P, alpha, d, f);
  auto b2 = support_value(P, alpha, -d, -(f + 1.0));
  if (!b1 && !b2) return CglpOutcome::Empty;
  const double beta = std::max(b1.value_or(-kInf), b2.value_or(-kInf));
  if (alpha.dot(zstar) - beta < min_violation) return CglpOutcome::Stall;
  cut.coef = alpha;
  cut.rhs = beta;
  cut.provenance = CutProvenance::DisjunctiveCglp;
  cut.parametric_valid = true;
  return CglpOutcome::Cut;
}

// Value cut  c.z >= beta + g.(x - x0)  valid on every B&B leaf with the
// parameter block free in its box. Needs x0 at a vertex of that box.
LinearCut value_cut(const MilpProblem& p, const LpProblem& pinned, const std::vector<Box>& leaves, double zstar) {
  const int np = static_cast<int>(p.param_idx.size());
  Vec sgn(np);
  for (int k = 0; k < np; ++k) {
    const int j = p.param_idx[k];
    const double v = p.param_value[k];
    if (std::abs(v - p.lp.lower[j]) <= 1e-12) sgn[k] = 1.0;
    else if (std::abs(v - p.lp.upper[j]) <= 1e-12) sgn[k] = -1.0;
    else throw std::runtime_error("value cut: parameter value must sit at a bound of its box");
  }
  Vec mins = Vec::Constant(np, kInf);
  double beta = kInf;
  const double big0 = 1.0 + std::abs(zstar) + pinned.c.cwiseAbs().sum();
  for (const auto& leaf : leaves) {
    LpProblem q = pinned;
    q.lower = leaf.lo;
    q.upper = leaf.hi;
    for (int k = 0; k < np; ++k) {
      q.lower[p.param_idx[k]] = p.param_value[k];
      q.upper[p.param_idx[k]] = p.param_value[k];
    }
    auto s = lp_solve(q);
    if (s.optimal()) {
      beta = std::min(beta, s.objective);
      for (int k = 0; k < np; ++k) {
        const int j = p.param_idx[k];
        mins[k] = std::min(mins[k], sgn[k] * (s.z_lower[j] - s.z_upper[j]));
      }
      continue;
    }
    if (s.status != LpStatus::Infeasible) throw std::runtime_error("value cut: leaf LP failed");
    // Empty at x0: penalize the distance from x0 until the leaf clears zstar.
    for (int k = 0; k < np; ++k) {
      q.lower[p.param_idx[k]] = p.lp.lower[p.param_idx[k]];
      q.upper[p.param_idx[k]] = p.lp.upper[p.param_idx[k]];
    }
    double M = big0;
    bool done = false;
    for (int rep = 0; rep < 80 && !done; ++rep, M *= 2.0) {
      LpProblem e = q;
      for (int k = 0; k < np; ++k) e.c[p.param_idx[k]] += M * sgn[k];
      auto es = lp_solve(e);
      if (es.status == LpStatus::Infeasible) {
        done = true;
        break;
      }
      if (!es.optimal()) throw std::runtime_error("value cut: elastic LP failed");
      const double phi = es.objective - M * sgn.dot(p.param_value);
      if (phi >= zstar) {
        for (int k = 0; k < np; ++k) mins[k] = std::min(mins[k], -M);
        done = true;
      }
    }
    if (!done) throw std::runtime_error("value cut: could not bound an empty leaf");
  }
  if (!std::isfinite(beta)) beta = zstar;
  LinearCut cut;
  cut.coef = -pinned.c;
  cut.rhs = -beta;
  for (int k = 0; k < np; ++k) {
    const double g = std::isfinite(mins[k]) ? sgn[k] * mins[k] : 0.0;
    cut.coef[p.param_idx[k]] += g;
    cut.rhs += g * p.param_value[k];
  }
  cut.provenance = CutProvenance::DisjunctiveCglp;
  cut.parametric_valid = true;
  return cut;
}

}  // namespace

const char* to_string(MilpMode m) {
  return m == MilpMode::BranchBound ? "bb" : "cp";
}

const char* to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::Optimal: return "optimal";
    case MilpStatus::Infeasible: return "infeasible";
    case MilpStatus::NumericalFailure: return "numerical-failure";
    case MilpStatus::BudgetExhausted: return "budget-exhausted";
  }
  return "?";
}

void MilpProblem::validate() const {
  lp.validate();
  const int n = num_vars();
  if (static_cast<int>(integer.size()) != n) throw ModelError("milp: integrality mask has wrong length");
  if (param_value.size() != static_cast<int>(param_idx.size())) throw ModelError("milp: parameter values mismatch");
  std::vector<bool> seen(n, false);
  for (int j : param_idx) {
    if (j < 0 || j >= n || seen[j]) throw ModelError("milp: bad parameter index");
    seen[j] = true;
  }
  for (int j = 0; j < n; ++j) {
    if (!integer[j]) continue;
    if (!std::isfinite(lp.lower[j]) || !std::isfinite(lp.upper[j]))
      throw ModelError("milp: integer variable needs finite bounds");
    if (lp.lower[j] != std::round(lp.lower[j]) || lp.upper[j] != std::round(lp.upper[j]))
      throw ModelError("milp: integer variable with fractional bounds");
  }
}

MilpResult milp_solve(const MilpProblem& problem, const MilpOptions& opts) {
  problem.validate();
  MilpResult res;
  res.mode = opts.mode;
  const LpProblem base = pinned_lp(problem);
  const auto skip = param_mask(problem);

  if (opts.mode == MilpMode::BranchBound) {
    auto bb = branch_and_bound(base, problem.integer, skip, opts, false);
    res.status = bb.status;
    res.x = bb.x;
    res.objective = bb.objective;
    res.nodes = bb.nodes;
    res.lp_solves = bb.lp_solves;
    res.root_relaxation = bb.root;
    return res;
  }

  LpProblem work = base;
  for (int round = 0;; ++round) {
    auto s = lp_solve(work);
    ++res.lp_solves;
    if (round == 0 && s.optimal()) res.root_relaxation = s.x;
    if (s.status == LpStatus::Infeasible) {
      res.status = MilpStatus::Infeasible;
      return res;
    }
    if (!s.optimal()) {
      log_warning(std::string("milp: cut round LP ended ") + to_string(s.status));
      res.status = MilpStatus::NumericalFailure;
      return res;
    }
    const int j = most_fractional(s.x, problem.integer, skip, opts.integrality_tol);
    if (j < 0) {
      res.status = MilpStatus::Optimal;
      res.x = s.x;
      for (int i = 0; i < res.x.size(); ++i)
        if (problem.integer[i]) res.x[i] = std::round(res.x[i]);
      res.objective = s.objective;
      res.has_terminal = true;
      res.terminal = work;
      res.terminal_solution = s;
      return res;
    }
    if (round >= opts.cglp_rounds) break;
    // Joint polyhedron: current rows, parameter block back in its box.
    LpProblem joint = work;
    for (int k : problem.param_idx) {
      joint.lower[k] = problem.lp.lower[k];
      joint.upper[k] = problem.lp.upper[k];
    }
    LinearCut cut;
    auto outcome = split_cglp(joint_polyhedron(joint), s.x, j, std::floor(s.x[j]), opts.min_cut_violation, cut);
    if (outcome == CglpOutcome::Empty) {
      res.status = MilpStatus::Infeasible;
      return res;
    }
    if (outcome == CglpOutcome::Stall) break;
    res.cuts.push_back(cut);
    work.add_le(cut.coef, cut.rhs);
  }

  // Split cuts stalled: finish by branch and bound and close the gap with a
  // value cut built from the leaves of the tree.
  auto bb = branch_and_bound(work, problem.integer, skip, opts, true);
  res.nodes = bb.nodes;
  res.lp_solves += bb.lp_solves;
  if (bb.status != MilpStatus::Optimal) {
    res.status = bb.status;
    return res;
  }
  log_info("milp: split cuts stalled after " + std::to_string(res.cuts.size()) + " cuts, using leaf value cut");
  LinearCut vc = value_cut(problem, work, bb.leaves, bb.objective);
  res.cuts.push_back(vc);
  work.add_le(vc.coef, vc.rhs);
  res.used_value_cut = true;
  auto s = lp_solve(work);
  ++res.lp_solves;
  if (!s.optimal()) {
    log_warning(std::string("milp: terminal LP ended ") + to_string(s.status));
    res.status = MilpStatus::NumericalFailure;
    return res;
  }
  res.status = MilpStatus::Optimal;
  res.x = bb.x;
  res.objective = bb.objective;
  res.has_terminal = true;
  res.terminal = work;
  res.terminal_solution = s;
  return res;
}

TerminalLp extract_terminal_lp(const MilpProblem& problem, const MilpResult& result) {
  if (result.mode != MilpMode::CuttingPlaneParametric || !result.has_terminal)
    throw std::logic_error("terminal LP is only available from the cutting-plane mode");
  TerminalLp t;
  const int n = problem.num_vars();
  const auto pm = param_mask(problem);
  t.param_idx = problem.param_idx;
  for (int j = 0; j < n; ++j)
    if (!pm[j]) t.other_idx.push_back(j);
  const LpProblem& src = result.terminal;
  t.lp = make_lp(src.c, src.lower, src.upper);
  auto touches_other = [&](const Eigen::RowVectorXd& row) {
    for (int j : t.other_idx)
      if (row[j] != 0.0) return true;
    return false;
  };
  for (int i = 0; i < src.num_le(); ++i) {
    if (!touches_other(src.A_le.row(i))) continue;
    t.lp.add_le(src.A_le.row(i).transpose(), src.b_le[i]);
    t.row_origin.push_back(i);
  }
  for (int i = 0; i < src.num_eq(); ++i) {
    if (!touches_other(src.A_eq.row(i))) continue;
    t.lp.add_eq(src.A_eq.row(i).transpose(), src.b_eq[i]);
  }
  auto split = [&](const Mat& A, Mat& X, Mat& Y) {
    X = Mat(A.rows(), static_cast<int>(t.param_idx.size()));
    Y = Mat(A.rows(), static_cast<int>(t.other_idx.size()));
    for (size_t k = 0; k < t.param_idx.size(); ++k) X.col(static_cast<int>(k)) = A.col(t.param_idx[k]);
    for (size_t k = 0; k < t.other_idx.size(); ++k) Y.col(static_cast<int>(k)) = A.col(t.other_idx[k]);
  };
  split(t.lp.A_le, t.C, t.D);
  t.F = t.lp.b_le;
  split(t.lp.A_eq, t.Ce, t.De);
  t.Fe = t.lp.b_eq;
  t.solution = lp_solve(t.lp);
  return t;
}

void write_mps(std::ostream& os, const MilpProblem& problem, const std::string& name) {
  const LpProblem lp = pinned_lp(problem);
  const int n = lp.num_vars();
  auto col = [](int j) { return "X" + std::to_string(j); };
  os << "NAME " << name << "\nROWS\n N OBJ\n";
  for (int i = 0; i < lp.num_le(); ++i) os << " L L" << i << "\n";
  for (int i = 0; i < lp.num_eq(); ++i) os << " E E" << i << "\n";
  os << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  os.precision(17);
  for (int j = 0; j < n; ++j) {
    if (problem.integer[j] != in_int) {
      os << " MARKER" << marker++ << " 'MARKER' " << (problem.integer[j] ? "'INTORG'" : "'INTEND'") << "\n";
      in_int = problem.integer[j];
    }
    if (lp.c[j] != 0.0) os << " " << col(j) << " OBJ " << lp.c[j] << "\n";
    for (int i = 0; i < lp.num_le(); ++i)
      if (lp.A_le(i, j) != 0.0) os << " " << col(j) << " L" << i << " " << lp.A_le(i, j) << "\n";
    for (int i = 0; i < lp.num_eq(); ++i)
      if (lp.A_eq(i, j) != 0.0) os << " " << col(j) << " E" << i << " " << lp.A_eq(i, j) << "\n";
  }
  if (in_int) os << " MARKER" << marker << " 'MARKER' 'INTEND'\n";
  os << "RHS\n";
  for (int i = 0; i < lp.num_le(); ++i)
    if (lp.b_le[i] != 0.0) os << " RHS L" << i << " " << lp.b_le[i] << "\n";
  for (int i = 0; i < lp.num_eq(); ++i)
    if (lp.b_eq[i] != 0.0) os << " RHS E" << i << " " << lp.b_eq[i] << "\n";
  os << "BOUNDS\n";
  for (int j = 0; j < n; ++j) {
    if (lp.lower[j] == lp.upper[j]) {
      os << " FX BND " << col(j) << " " << lp.lower[j] << "\n";
      continue;
    }
    if (std::isfinite(lp.lower[j])) os << " LO BND " << col(j) << " " << lp.lower[j] << "\n";
    else os << " MI BND " << col(j) << "\n";
    if (std::isfinite(lp.upper[j])) os << " UP BND " << col(j) << " " << lp.upper[j] << "\n";
  }
  os << "ENDATA\n";
}

}  // namespace micp
