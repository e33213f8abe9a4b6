#include "micp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace micp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// How an original variable maps onto nonnegative standard-form columns:
// x = offset + sign * x'[col]  (minus x'[col2] for free variables).
struct ColumnMap {
  int col = -1;
  int col2 = -1;
  double sign = 1.0;
  double offset = 0.0;
};

struct StandardForm {
  int m = 0;          // rows
  int ncols = 0;      // structural + slack columns
  Mat M;              // m x ncols
  Vec r;              // rhs
  Vec cost;           // ncols
  double cost_shift = 0.0;
  std::vector<ColumnMap> vars;
  int first_le = 0, first_eq = 0, first_ub = 0;  // row offsets
  std::vector<int> slack_of_row;                  // -1 for equalities
};

StandardForm build_standard_form(const LpProblem& p) {
  StandardForm sf;
  const int n = p.num_vars();
  int ncols = 0;
  int nub = 0;
  sf.vars.resize(n);
  for (int j = 0; j < n; ++j) {
    auto& cm = sf.vars[j];
    const bool lf = std::isfinite(p.lower[j]), uf = std::isfinite(p.upper[j]);
    if (lf) {
      cm.col = ncols++;
      cm.offset = p.lower[j];
      if (uf) ++nub;
    } else if (uf) {
      cm.col = ncols++;
      cm.sign = -1.0;
      cm.offset = p.upper[j];
    } else {
      cm.col = ncols++;
      cm.col2 = ncols++;
    }
  }
  const int nle = p.num_le(), neq = p.num_eq();
  sf.m = nle + neq + nub;
  sf.first_le = 0;
  sf.first_eq = nle;
  sf.first_ub = nle + neq;
  const int nslack = nle + nub;
  sf.ncols = ncols + nslack;
  sf.M = Mat::Zero(sf.m, sf.ncols);
  sf.r = Vec::Zero(sf.m);
  sf.cost = Vec::Zero(sf.ncols);
  sf.slack_of_row.assign(sf.m, -1);

  auto put_row = [&](int row, const Eigen::Ref<const Eigen::RowVectorXd>& a, double rhs) {
    double shift = 0.0;
    for (int j = 0; j < n; ++j) {
      const double aj = a[j];
      if (aj == 0.0) continue;
      const auto& cm = sf.vars[j];
      sf.M(row, cm.col) += cm.sign * aj;
      if (cm.col2 >= 0) sf.M(row, cm.col2) -= aj;
      shift += aj * cm.offset;
    }
    sf.r[row] = rhs - shift;
  };
  int slack = ncols;
  for (int i = 0; i < nle; ++i) {
    put_row(i, p.A_le.row(i), p.b_le[i]);
    sf.M(i, slack) = 1.0;
    sf.slack_of_row[i] = slack++;
  }
  for (int i = 0; i < neq; ++i) put_row(nle + i, p.A_eq.row(i), p.b_eq[i]);
  int row = sf.first_ub;
  for (int j = 0; j < n; ++j) {
    if (!(std::isfinite(p.lower[j]) && std::isfinite(p.upper[j]))) continue;
    sf.M(row, sf.vars[j].col) = 1.0;
    sf.M(row, slack) = 1.0;
    sf.r[row] = p.upper[j] - p.lower[j];
    sf.slack_of_row[row] = slack++;
    ++row;
  }
  for (int j = 0; j < n; ++j) {
    const auto& cm = sf.vars[j];
    sf.cost[cm.col] += cm.sign * p.c[j];
    if (cm.col2 >= 0) sf.cost[cm.col2] -= p.c[j];
    sf.cost_shift += p.c[j] * cm.offset;
  }
  return sf;
}

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class PhaseResult { Optimal, Unbounded, IterationLimit };

// Dense tableau simplex over columns [0, total). The last row holds reduced
// costs, the last column the basic values.
class Tableau {
 public:
  Tableau(int m, int total) : m_(m), total_(total), T_(RowMat::Zero(m + 1, total + 1)), basis_(m, -1) {}

  RowMat& T() { return T_; }
  std::vector<int>& basis() { return basis_; }
  int rows() const { return m_; }
  int total() const { return total_; }

  void set_costs(const Vec& costs) {
    T_.row(m_).setZero();
    for (int j = 0; j < total_; ++j) T_(m_, j) = costs[j];
    for (int i = 0; i < m_; ++i) {
      const double cb = costs[basis_[i]];
      if (cb != 0.0) T_.row(m_) -= cb * T_.row(i);
    }
  }

  void pivot(int p, int q) {
    const double piv = T_(p, q);
    T_.row(p) /= piv;
    for (int i = 0; i <= m_; ++i) {
      if (i == p) continue;
      const double f = T_(i, q);
      if (f != 0.0) T_.row(i) -= f * T_.row(p);
    }
    T_(p, q) = 1.0;
    basis_[p] = q;
  }

  PhaseResult run(const std::vector<bool>& allowed, const LpOptions& opts, int& iters, int max_iters) {
    const double tol = opts.tolerance;
    bool bland = false;
    int stall = 0;
    double last_obj = -T_(m_, total_);
    while (true) {
      if (iters >= max_iters) return PhaseResult::IterationLimit;
      int q = -1;
      double best = -tol;
      for (int j = 0; j < total_; ++j) {
        if (!allowed[j]) continue;
        const double d = T_(m_, j);
        if (d < best || (bland && d < -tol)) {
          q = j;
          best = d;
          if (bland) break;
        }
      }
      if (q < 0) return PhaseResult::Optimal;
      int p = -1;
      double ratio = kInf, piv_best = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double a = T_(i, q);
        if (a <= 1e-9) continue;
        const double rt = std::max(T_(i, total_), 0.0) / a;
        if (p < 0 || rt < ratio - 1e-12) {
          p = i;
          ratio = rt;
          piv_best = a;
        } else if (rt <= ratio + 1e-12) {
          // Ties: Bland takes the lowest basic index, otherwise prefer the
          // larger pivot for stability.
          if (bland ? basis_[i] < basis_[p] : a > piv_best) {
            p = i;
            piv_best = a;
            ratio = std::min(ratio, rt);
          }
        }
      }
      if (p < 0) {
        unbounded_column_ = q;
        return PhaseResult::Unbounded;
      }
      pivot(p, q);
      ++iters;
      const double obj = -T_(m_, total_);
      if (obj < last_obj - 1e-12) {
        stall = 0;
      } else if (++stall >= opts.stall_before_bland) {
        bland = true;
      }
      last_obj = obj;
    }
  }

  // Dual simplex from a dual-feasible basis with negative basic values.
  // Returns false when no pivot restores feasibility.
  bool dual_run(const std::vector<bool>& allowed, const LpOptions& opts, int& iters, int max_iters) {
    const double tol = opts.tolerance;
    while (iters < max_iters) {
      int p = -1;
      double worst = -tol;
      for (int i = 0; i < m_; ++i)
        if (T_(i, total_) < worst) {
          worst = T_(i, total_);
          p = i;
        }
      if (p < 0) return true;
      int q = -1;
      double ratio = kInf;
      for (int j = 0; j < total_; ++j) {
        if (!allowed[j]) continue;
        const double a = T_(p, j);
        if (a >= -1e-9) continue;
        const double rt = std::max(T_(m_, j), 0.0) / -a;
        if (rt < ratio - 1e-12 || (rt <= ratio + 1e-12 && q >= 0 && -a > -T_(p, q))) {
          ratio = rt;
          q = j;
        }
      }
      if (q < 0) return false;
      pivot(p, q);
      ++iters;
    }
    return false;
  }

  int unbounded_column_ = -1;

 private:
  int m_, total_;
  RowMat T_;
  std::vector<int> basis_;
};

double data_scale(const LpProblem& p) {
  double s = 0.0;
  if (p.c.size()) s = std::max(s, p.c.cwiseAbs().maxCoeff());
  if (p.A_le.size()) s = std::max(s, p.A_le.cwiseAbs().maxCoeff());
  if (p.b_le.size()) s = std::max(s, p.b_le.cwiseAbs().maxCoeff());
  if (p.A_eq.size()) s = std::max(s, p.A_eq.cwiseAbs().maxCoeff());
  if (p.b_eq.size()) s = std::max(s, p.b_eq.cwiseAbs().maxCoeff());
  for (int j = 0; j < p.num_vars(); ++j) {
    if (std::isfinite(p.lower[j])) s = std::max(s, std::abs(p.lower[j]));
    if (std::isfinite(p.upper[j])) s = std::max(s, std::abs(p.upper[j]));
  }
  return 1.0 + s;
}

void fill_residuals(LpSolution& sol, const LpProblem& p) {
  auto rep = lp_dual_certificate(sol, p);
  sol.primal_residual = rep.primal;
  sol.dual_residual = rep.dual;
  sol.complementarity_residual = rep.complementarity;
}

}  // namespace

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::NumericalFailure: return "numerical-failure";
  }
  return "?";
}

void LpProblem::add_le(const Vec& a, double rhs) {
  const auto r = A_le.rows();
  A_le.conservativeResize(r + 1, num_vars());
  A_le.row(r) = a.transpose();
  b_le.conservativeResize(r + 1);
  b_le[r] = rhs;
}

void LpProblem::add_eq(const Vec& a, double rhs) {
  const auto r = A_eq.rows();
  A_eq.conservativeResize(r + 1, num_vars());
  A_eq.row(r) = a.transpose();
  b_eq.conservativeResize(r + 1);
  b_eq[r] = rhs;
}

void LpProblem::validate() const {
  const int n = num_vars();
  if (lower.size() != n || upper.size() != n) throw ModelError("lp: bound vectors have wrong length");
  if (A_le.rows() != b_le.size() || (A_le.rows() > 0 && A_le.cols() != n)) throw ModelError("lp: inequality block malformed");
  if (A_eq.rows() != b_eq.size() || (A_eq.rows() > 0 && A_eq.cols() != n)) throw ModelError("lp: equality block malformed");
  for (int j = 0; j < n; ++j)
    if (lower[j] > upper[j]) throw ModelError("lp: lower bound above upper bound");
}

LpProblem make_lp(const Vec& c, const Vec& lower, const Vec& upper) {
  LpProblem p;
  const auto n = c.size();
  p.c = c;
  p.A_le = Mat::Zero(0, n);
  p.b_le = Vec::Zero(0);
  p.A_eq = Mat::Zero(0, n);
  p.b_eq = Vec::Zero(0);
  p.lower = lower;
  p.upper = upper;
  return p;
}

LpSolution lp_solve(const LpProblem& problem, const LpOptions& opts) {
  problem.validate();
  LpSolution sol;
  const int n = problem.num_vars();
  for (int j = 0; j < n; ++j) {
    if (problem.lower[j] > problem.upper[j]) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
  }
  StandardForm sf = build_standard_form(problem);
  const int m = sf.m, N = sf.ncols;

  // Phase 1 layout: flip rows to a nonnegative rhs; slacks with +1 start
  // basic, every other row gets an artificial.
  std::vector<double> flip(m, 1.0);
  std::vector<int> art_of_row(m, -1);
  int nart = 0;
  for (int i = 0; i < m; ++i) {
    if (sf.r[i] < 0) flip[i] = -1.0;
    const int s = sf.slack_of_row[i];
    if (!(s >= 0 && flip[i] > 0)) art_of_row[i] = N + nart++;
  }
  const int total = N + nart;
  Tableau tab(m, total);
  auto& T = tab.T();
  for (int i = 0; i < m; ++i) {
    T.row(i).head(N) = flip[i] * sf.M.row(i);
    T(i, total) = flip[i] * sf.r[i];
    if (art_of_row[i] >= 0) {
      T(i, art_of_row[i]) = 1.0;
      tab.basis()[i] = art_of_row[i];
    } else {
      tab.basis()[i] = sf.slack_of_row[i];
    }
  }
  const int max_iters = opts.max_iterations > 0 ? opts.max_iterations : 50 * (m + total) + 1000;
  int iters = 0;
  const double scale = data_scale(problem);

  if (nart > 0) {
    Vec c1 = Vec::Zero(total);
    for (int j = N; j < total; ++j) c1[j] = 1.0;
    tab.set_costs(c1);
    std::vector<bool> allowed(total, true);
    auto res = tab.run(allowed, opts, iters, max_iters);
    if (res == PhaseResult::IterationLimit) {
      sol.status = LpStatus::NumericalFailure;
      sol.iterations = iters;
      return sol;
    }
    const double infeas = -T(m, total);
    if (infeas > 1e-8 * scale) {
      sol.status = LpStatus::Infeasible;
      sol.iterations = iters;
      return sol;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (int i = 0; i < m; ++i) {
      if (tab.basis()[i] < N) continue;
      int best = -1;
      double mag = 1e-7;
      for (int j = 0; j < N; ++j)
        if (std::abs(T(i, j)) > mag) {
          mag = std::abs(T(i, j));
          best = j;
        }
      if (best >= 0) tab.pivot(i, best);
    }
  }

  Vec c2 = Vec::Zero(total);
  c2.head(N) = sf.cost;
  std::vector<bool> allowed(total, false);
  for (int j = 0; j < N; ++j) allowed[j] = true;

  Vec xs, y;
  for (int attempt = 0; attempt < 4; ++attempt) {
    tab.set_costs(c2);
    if (attempt > 0) tab.dual_run(allowed, opts, iters, max_iters);
    auto res = tab.run(allowed, opts, iters, max_iters);
    if (res == PhaseResult::IterationLimit) {
      sol.status = LpStatus::NumericalFailure;
      sol.iterations = iters;
      return sol;
    }
    if (res == PhaseResult::Unbounded) {
      sol.status = LpStatus::Unbounded;
      sol.iterations = iters;
      return sol;
    }
    // Refactorize the final basis in the original orientation to clean up
    // accumulated pivoting error.
    Mat B(m, m);
    Vec cB(m);
    for (int i = 0; i < m; ++i) {
      const int k = tab.basis()[i];
      if (k < N) {
        B.col(i) = sf.M.col(k);
        cB[i] = sf.cost[k];
      } else {
        int row = -1;
        for (int r = 0; r < m; ++r)
          if (art_of_row[r] == k) row = r;
        B.col(i) = Vec::Unit(m, row) * flip[row];
        cB[i] = 0.0;
      }
    }
    xs = Vec::Zero(N);
    y = Vec::Zero(m);
    if (m > 0) {
      Eigen::FullPivLU<Mat> lu(B);
      if (!lu.isInvertible()) {
        sol.status = LpStatus::NumericalFailure;
        sol.iterations = iters;
        return sol;
      }
      Vec xb = lu.solve(sf.r);
      y = lu.transpose().solve(cB);
      for (int i = 0; i < m; ++i)
        if (tab.basis()[i] < N) xs[tab.basis()[i]] = xb[i];
      // Rebuild the tableau from the clean factorization in case another
      // round of pivoting is needed.
      const double ftol = 1e-9 * scale;
      bool primal_ok = xb.minCoeff() >= -ftol;
      Vec d = sf.cost - sf.M.transpose() * y;
      bool dual_ok = true;
      for (int j = 0; j < N; ++j)
        if (d[j] < -1e-9 * scale) dual_ok = false;
      if (primal_ok && dual_ok) break;
      Mat Binv = lu.inverse();
      Mat full(m, total);
      full.leftCols(N) = Binv * sf.M;
      for (int r = 0; r < m; ++r)
        if (art_of_row[r] >= 0) full.col(art_of_row[r]) = Binv.col(r) * flip[r];
      for (int i = 0; i < m; ++i) {
        T.row(i).head(total) = full.row(i);
        T(i, total) = xb[i];
      }
      if (attempt == 3) {
        sol.status = LpStatus::NumericalFailure;
        sol.iterations = iters;
        return sol;
      }
    } else {
      break;
    }
  }
  for (int j = 0; j < N; ++j) xs[j] = std::max(xs[j], 0.0);

  sol.status = LpStatus::Optimal;
  sol.iterations = iters;
  sol.x = Vec(n);
  for (int j = 0; j < n; ++j) {
    const auto& cm = sf.vars[j];
    double v = cm.offset + cm.sign * xs[cm.col];
    if (cm.col2 >= 0) v -= xs[cm.col2];
    sol.x[j] = std::clamp(v, problem.lower[j], problem.upper[j]);
  }
  sol.y_le = Vec(problem.num_le());
  for (int i = 0; i < problem.num_le(); ++i) sol.y_le[i] = std::max(-y[sf.first_le + i], 0.0);
  sol.y_eq = Vec(problem.num_eq());
  for (int i = 0; i < problem.num_eq(); ++i) sol.y_eq[i] = -y[sf.first_eq + i];
  Vec g = problem.c;
  if (problem.num_le()) g += problem.A_le.transpose() * sol.y_le;
  if (problem.num_eq()) g += problem.A_eq.transpose() * sol.y_eq;
  sol.z_lower = g.cwiseMax(0.0);
  sol.z_upper = (-g).cwiseMax(0.0);
  sol.objective = problem.c.dot(sol.x);
  fill_residuals(sol, problem);
  return sol;
}

double lp_dual_objective(const LpSolution& sol, const LpProblem& p) {
  double d = 0.0;
  if (p.num_le()) d -= p.b_le.dot(sol.y_le);
  if (p.num_eq()) d -= p.b_eq.dot(sol.y_eq);
  for (int j = 0; j < p.num_vars(); ++j) {
    if (sol.z_lower[j] != 0.0) d += sol.z_lower[j] * (std::isfinite(p.lower[j]) ? p.lower[j] : -kInf);
    if (sol.z_upper[j] != 0.0) d -= sol.z_upper[j] * (std::isfinite(p.upper[j]) ? p.upper[j] : kInf);
  }
  return d;
}

LpResidualReport lp_dual_certificate(const LpSolution& sol, const LpProblem& p) {
  LpResidualReport rep;
  rep.scale = data_scale(p);
  const int n = p.num_vars();
  const Vec& x = sol.x;
  double primal = 0.0, dual = 0.0, comp = 0.0;
  if (p.num_le()) {
    Vec s = p.b_le - p.A_le * x;
    for (int i = 0; i < p.num_le(); ++i) {
      primal = std::max(primal, -s[i]);
      dual = std::max(dual, -sol.y_le[i]);
      comp = std::max(comp, std::abs(sol.y_le[i] * s[i]));
    }
  }
  if (p.num_eq()) primal = std::max(primal, (p.A_eq * x - p.b_eq).cwiseAbs().maxCoeff());
  Vec g = p.c - sol.z_lower + sol.z_upper;
  if (p.num_le()) g += p.A_le.transpose() * sol.y_le;
  if (p.num_eq()) g += p.A_eq.transpose() * sol.y_eq;
  for (int j = 0; j < n; ++j) {
    primal = std::max({primal, p.lower[j] - x[j], x[j] - p.upper[j]});
    dual = std::max({dual, std::abs(g[j]), -sol.z_lower[j], -sol.z_upper[j]});
    if (std::isfinite(p.lower[j]))
      comp = std::max(comp, std::abs(sol.z_lower[j] * (x[j] - p.lower[j])));
    else
      dual = std::max(dual, std::abs(sol.z_lower[j]));
    if (std::isfinite(p.upper[j]))
      comp = std::max(comp, std::abs(sol.z_upper[j] * (p.upper[j] - x[j])));
    else
      dual = std::max(dual, std::abs(sol.z_upper[j]));
  }
  rep.primal = primal;
  rep.dual = dual;
  rep.complementarity = comp;
  double dobj = lp_dual_objective(sol, p);
  rep.gap = std::isfinite(dobj) ? std::abs(p.c.dot(x) - dobj) : kInf;
  const double tol = 1e-8 * rep.scale;
  rep.ok = primal <= tol && dual <= tol && comp <= tol && rep.gap <= 1e-8 * (1.0 + std::abs(p.c.dot(x))) * rep.scale;
  return rep;
}

std::string lp_to_string(const LpProblem& p) {
  std::ostringstream os;
  os.precision(10);
  os << "min " << p.c.transpose() << "\n";
  for (int i = 0; i < p.num_le(); ++i) os << "  " << p.A_le.row(i) << " <= " << p.b_le[i] << "\n";
  for (int i = 0; i < p.num_eq(); ++i) os << "  " << p.A_eq.row(i) << " == " << p.b_eq[i] << "\n";
  for (int j = 0; j < p.num_vars(); ++j) os << "  " << p.lower[j] << " <= x" << j << " <= " << p.upper[j] << "\n";
  return os.str();
}

}  // namespace micp
