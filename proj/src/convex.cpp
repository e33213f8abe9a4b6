#include "micp/convex.hpp"

#include "micp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace micp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowKind { Linear, Lower, Upper };

struct RowTag {
  RowKind kind;
  int index;
};

// The program restricted to its free variables z: x = x_fixed + P z.
struct Reduced {
  int n = 0;
  std::vector<int> free_idx;
  std::vector<bool> fixed;
  Vec x_fixed;
  Vec c;
  bool least_squares = false;
  Vec target;
  std::vector<int> convex_ids;
  std::vector<ConvexExpr> convex;
  Mat L;
  Vec l_rhs;
  std::vector<RowTag> tags;
  Mat E;
  Vec f;
  int d() const { return static_cast<int>(free_idx.size()); }
  int num_ineq() const { return static_cast<int>(convex.size() + L.rows()); }

  Vec full(const Vec& z) const {
    Vec x = x_fixed;
    for (int k = 0; k < d(); ++k) x[free_idx[k]] = z[k];
    return x;
  }
};

// Log-barrier Newton engine over w = z (phase 2) or w = (z, s) (phase 1).
class Barrier {
 public:
  Barrier(const Reduced& r, bool phase1, double relax) : r_(r), phase1_(phase1), relax_(relax) {
    const int d = r.d();
    // Orthonormal null-space basis of the equality rows.
    if (r.E.rows() > 0) {
      Eigen::JacobiSVD<Mat> svd(r.E, Eigen::ComputeFullV);
      const double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
      int rank = 0;
      for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > 1e-10 * std::max(1.0, smax)) ++rank;
      Z_ = svd.matrixV().rightCols(d - rank);
    } else {
      Z_ = Mat::Identity(d, d);
    }
    if (phase1_) {
      Mat Za = Mat::Zero(d + 1, Z_.cols() + 1);
      Za.topLeftCorner(d, Z_.cols()) = Z_;
      Za(d, Z_.cols()) = 1.0;
      Z_ = Za;
    }
    Hfull_ = Mat::Zero(r.n, r.n);
  }

  int dim() const { return r_.d() + (phase1_ ? 1 : 0); }

  // Constraint values v_k(w) <= 0 form; false if any is non-finite.
  bool values(const Vec& w, Vec& v) const {
    const int d = r_.d();
    const Vec z = w.head(d);
    const double s = phase1_ ? w[d] : 0.0;
    Vec x = r_.full(z);
    const int nc = static_cast<int>(r_.convex.size());
    v.resize(r_.num_ineq());
    for (int k = 0; k < nc; ++k) v[k] = r_.convex[k].value(x) - s - relax_;
    if (r_.L.rows() > 0) v.tail(r_.L.rows()) = (r_.L * z - r_.l_rhs).array() - s - relax_;
    return v.allFinite();
  }

  double objective(const Vec& w) const {
    const int d = r_.d();
    if (phase1_) return w[d];
    double f = r_.c.dot(w);
    if (r_.least_squares) f += 0.5 * (w - r_.target).squaredNorm();
    return f;
  }

  double merit(const Vec& w, double t, bool& ok) const {
    Vec v;
    ok = values(w, v) && (v.array() < 0.0).all();
    if (!ok) return kInf;
    return t * objective(w) - (-v.array()).log().sum();
  }

  // Gradient and Hessian of t f0 - sum log(-v).
  void derivatives(const Vec& w, double t, Vec& grad, Mat& H, Vec& v) {
    const int d = r_.d();
    const int D = dim();
    const Vec z = w.head(d);
    Vec x = r_.full(z);
    values(w, v);
    grad = Vec::Zero(D);
    H = Mat::Zero(D, D);
    if (phase1_) {
      grad[d] = t;
    } else {
      grad.head(d) = t * r_.c;
      if (r_.least_squares) {
        grad.head(d) += t * (z - r_.target);
        H.topLeftCorner(d, d).diagonal().array() += t;
      }
    }
    Hfull_.setZero();
    Vec g, gz(D);
    const int nc = static_cast<int>(r_.convex.size());
    for (int k = 0; k < nc; ++k) {
      const double inv = 1.0 / (-v[k]);
      r_.convex[k].value_and_subgradient(x, g);
      for (int j = 0; j < d; ++j) gz[j] = g[r_.free_idx[j]];
      if (phase1_) gz[d] = -1.0;
      grad += inv * gz;
      H.noalias() += (inv * inv) * gz * gz.transpose();
      r_.convex[k].add_hessian(x, inv, Hfull_);
    }
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) H(i, j) += Hfull_(r_.free_idx[i], r_.free_idx[j]);
    for (int k = 0; k < r_.L.rows(); ++k) {
      const double inv = 1.0 / (-v[nc + k]);
      gz.head(d) = r_.L.row(k).transpose();
      if (phase1_) gz[d] = -1.0;
      grad += inv * gz;
      H.noalias() += (inv * inv) * gz * gz.transpose();
    }
  }

  // Newton centering at fixed t. Returns false on budget exhaustion.
  bool center(Vec& w, double t, int& steps, int max_steps, bool stop_when_negative_s = false) {
    Vec grad, v;
    Mat H;
    for (int it = 0; it < 200; ++it) {
      if (steps >= max_steps) return false;
      derivatives(w, t, grad, H, v);
      const Vec gr = Z_.transpose() * grad;
      Mat Hr = Z_.transpose() * H * Z_;
      Vec step;
      if (Hr.rows() == 0) return true;
      Eigen::LDLT<Mat> ldlt(Hr);
      double reg = 0.0;
      while (true) {
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
          step = ldlt.solve(-gr);
          if (step.allFinite()) break;
        }
        reg = reg == 0.0 ? 1e-12 * (1.0 + Hr.diagonal().cwiseAbs().maxCoeff()) : reg * 100.0;
        if (reg > 1e20) return true;
        ldlt.compute(Hr + reg * Mat::Identity(Hr.rows(), Hr.cols()));
      }
      const Vec dw = Z_ * step;
      const double dec = -grad.dot(dw);
      ++steps;
      if (dec <= 2e-14 || !std::isfinite(dec)) return true;
      bool ok = false;
      const double f0 = merit(w, t, ok);
      double alpha = 1.0;
      Vec trial;
      while (alpha > 1e-16) {
        trial = w + alpha * dw;
        bool tok = false;
        const double ft = merit(trial, t, tok);
        if (tok && ft <= f0 - 0.01 * alpha * dec) break;
        alpha *= 0.5;
      }
      if (alpha <= 1e-16) return true;
      w = trial;
      if (stop_when_negative_s && phase1_ && w[r_.d()] < -1e-3) return true;
      if (dec <= 1e-12) return true;
    }
    return true;
  }

 private:
  const Reduced& r_;
  bool phase1_;
  double relax_;
  Mat Z_;
  Mat Hfull_;
};

Reduced reduce(const ConvexProgram& p, std::vector<bool>& pinned, Vec& pin_value, bool& trivially_infeasible,
               double feas_tol) {
  Reduced r;
  const int n = p.num_vars();
  r.n = n;
  pinned.assign(n, false);
  pin_value = Vec::Zero(n);
  for (auto [k, v] : p.pins) {
    pinned[k] = true;
    pin_value[k] = v;
  }
  r.fixed = pinned;
  r.x_fixed = Vec::Zero(n);
  for (int j = 0; j < n; ++j) {
    if (pinned[j]) {
      r.x_fixed[j] = pin_value[j];
    } else if (p.lower[j] == p.upper[j]) {
      r.fixed[j] = true;
      r.x_fixed[j] = p.lower[j];
    } else {
      r.free_idx.push_back(j);
    }
  }
  const int d = r.d();
  trivially_infeasible = false;
  r.c = Vec(d);
  for (int k = 0; k < d; ++k) r.c[k] = p.c[r.free_idx[k]];
  if (p.target) {
    r.least_squares = true;
    r.target = Vec(d);
    for (int k = 0; k < d; ++k) r.target[k] = (*p.target)[r.free_idx[k]];
  }
  for (size_t i = 0; i < p.constraints.size(); ++i) {
    const auto& e = p.constraints[i];
    bool touches = false;
    auto sup = e.support();
    for (int j : r.free_idx) touches = touches || sup[j];
    if (!touches) {
      if (e.value(r.x_fixed) > feas_tol) trivially_infeasible = true;
      continue;
    }
    r.convex_ids.push_back(static_cast<int>(i));
    r.convex.push_back(e);
  }
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (int i = 0; i < p.A.rows(); ++i) {
    Eigen::RowVectorXd a(d);
    for (int k = 0; k < d; ++k) a[k] = p.A(i, r.free_idx[k]);
    const double bi = p.b[i] - p.A.row(i).dot(r.x_fixed);
    if (a.isZero(0.0)) {
      if (bi < -feas_tol) trivially_infeasible = true;
      continue;
    }
    rows.push_back(a);
    rhs.push_back(bi);
    r.tags.push_back({RowKind::Linear, i});
  }
  for (int k = 0; k < d; ++k) {
    const int j = r.free_idx[k];
    Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(d);
    a[k] = -1.0;
    rows.push_back(a);
    rhs.push_back(-p.lower[j]);
    r.tags.push_back({RowKind::Lower, j});
    a[k] = 1.0;
    rows.push_back(a);
    rhs.push_back(p.upper[j]);
    r.tags.push_back({RowKind::Upper, j});
  }
  r.L = Mat(static_cast<int>(rows.size()), d);
  r.l_rhs = Vec(static_cast<int>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    r.L.row(static_cast<int>(i)) = rows[i];
    r.l_rhs[static_cast<int>(i)] = rhs[i];
  }
  std::vector<Eigen::RowVectorXd> eqs;
  std::vector<double> erhs;
  for (int i = 0; i < p.G.rows(); ++i) {
    Eigen::RowVectorXd a(d);
    for (int k = 0; k < d; ++k) a[k] = p.G(i, r.free_idx[k]);
    const double hi = p.h[i] - p.G.row(i).dot(r.x_fixed);
    if (a.isZero(0.0)) {
      if (std::abs(hi) > feas_tol) trivially_infeasible = true;
      continue;
    }
    eqs.push_back(a);
    erhs.push_back(hi);
  }
  r.E = Mat(static_cast<int>(eqs.size()), d);
  r.f = Vec(static_cast<int>(eqs.size()));
  for (size_t i = 0; i < eqs.size(); ++i) {
    r.E.row(static_cast<int>(i)) = eqs[i];
    r.f[static_cast<int>(i)] = erhs[i];
  }
  return r;
}

double program_objective(const ConvexProgram& p, const Vec& x) {
  double f = p.c.dot(x);
  if (p.target) f += 0.5 * (x - *p.target).squaredNorm();
  return f;
}

// Fills residuals of a certificate from its multipliers, recomputed in the
// full space. Pin multipliers absorb the pinned components of stationarity.
void finish_certificate(const ConvexProgram& p, const std::vector<bool>& pinned, KktCertificate& cert) {
  const int n = p.num_vars();
  const Vec& x = cert.x;
  Vec grad = p.c;
  if (p.target) grad += x - *p.target;
  Vec g;
  cert.constraint_values = Vec(static_cast<Eigen::Index>(p.constraints.size()));
  double feas = 0.0, comp = 0.0;
  for (size_t i = 0; i < p.constraints.size(); ++i) {
    const double v = p.constraints[i].value_and_subgradient(x, g);
    cert.constraint_values[static_cast<int>(i)] = v;
    grad += cert.lambda_convex[static_cast<int>(i)] * g;
    feas = std::max(feas, v);
    comp = std::max(comp, std::abs(cert.lambda_convex[static_cast<int>(i)] * v));
  }
  if (p.A.rows() > 0) {
    grad += p.A.transpose() * cert.lambda_le;
    Vec s = p.b - p.A * x;
    for (int i = 0; i < s.size(); ++i) {
      feas = std::max(feas, -s[i]);
      comp = std::max(comp, std::abs(cert.lambda_le[i] * s[i]));
    }
  }
  if (p.G.rows() > 0) {
    grad += p.G.transpose() * cert.nu_eq;
    feas = std::max(feas, (p.G * x - p.h).cwiseAbs().maxCoeff());
  }
  grad += cert.z_upper - cert.z_lower;
  for (int j = 0; j < n; ++j) {
    feas = std::max({feas, p.lower[j] - x[j], x[j] - p.upper[j]});
    comp = std::max({comp, std::abs(cert.z_lower[j] * (x[j] - p.lower[j])),
                     std::abs(cert.z_upper[j] * (p.upper[j] - x[j]))});
  }
  cert.nu_pin = Vec::Zero(static_cast<int>(p.pins.size()));
  for (size_t k = 0; k < p.pins.size(); ++k) {
    const int j = p.pins[k].first;
    cert.nu_pin[static_cast<int>(k)] = -grad[j];
    feas = std::max(feas, std::abs(x[j] - p.pins[k].second));
  }
  double stat = 0.0;
  for (int j = 0; j < n; ++j) {
    if (pinned[j]) continue;
    if (p.lower[j] == p.upper[j]) continue;
    stat = std::max(stat, std::abs(grad[j]));
  }
  // Variables fixed by equal bounds: split their residual into bound duals.
  for (int j = 0; j < n; ++j) {
    if (pinned[j] || p.lower[j] != p.upper[j]) continue;
    const double r = grad[j];
    if (r > 0) cert.z_lower[j] += r;
    else cert.z_upper[j] -= r;
  }
  cert.stationarity = stat;
  cert.feasibility = std::max(feas, 0.0);
  cert.complementarity = comp;
  cert.objective = program_objective(p, x);
}

KktCertificate certificate_from(const ConvexProgram& p, const Reduced& r, const std::vector<bool>& pinned,
                                const Vec& x, const Vec& lam_convex_r, const Vec& lam_rows_r, const Vec& nu_r,
                                const std::vector<int>& eq_map) {
  KktCertificate cert;
  const int n = p.num_vars();
  cert.x = x;
  cert.lambda_convex = Vec::Zero(static_cast<int>(p.constraints.size()));
  for (size_t k = 0; k < r.convex_ids.size(); ++k) cert.lambda_convex[r.convex_ids[k]] = lam_convex_r[static_cast<int>(k)];
  cert.lambda_le = Vec::Zero(p.A.rows());
  cert.z_lower = Vec::Zero(n);
  cert.z_upper = Vec::Zero(n);
  for (size_t k = 0; k < r.tags.size(); ++k) {
    const double lam = lam_rows_r[static_cast<int>(k)];
    switch (r.tags[k].kind) {
      case RowKind::Linear: cert.lambda_le[r.tags[k].index] += lam; break;
      case RowKind::Lower: cert.z_lower[r.tags[k].index] += lam; break;
      case RowKind::Upper: cert.z_upper[r.tags[k].index] += lam; break;
    }
  }
  cert.nu_eq = Vec::Zero(p.G.rows());
  for (size_t k = 0; k < eq_map.size(); ++k) cert.nu_eq[eq_map[k]] = nu_r[static_cast<int>(k)];
  finish_certificate(p, pinned, cert);
  return cert;
}

}  // namespace

const char* to_string(ConvexStatus s) {
  switch (s) {
    case ConvexStatus::Optimal: return "optimal";
    case ConvexStatus::Infeasible: return "infeasible";
    case ConvexStatus::NumericalFailure: return "numerical-failure";
  }
  return "?";
}

void ConvexProgram::validate() const {
  const int n = num_vars();
  if (upper.size() != n || c.size() != n) throw ModelError("convex program: dimension mismatch");
  if (target && target->size() != n) throw ModelError("convex program: target has wrong length");
  if (A.rows() != b.size() || (A.rows() > 0 && A.cols() != n)) throw ModelError("convex program: rows malformed");
  if (G.rows() != h.size() || (G.rows() > 0 && G.cols() != n)) throw ModelError("convex program: equalities malformed");
  for (const auto& e : constraints)
    if (e.dim() != n) throw ModelError("convex program: constraint dimension mismatch");
  for (int j = 0; j < n; ++j)
    if (!(lower[j] <= upper[j]) || !std::isfinite(lower[j]) || !std::isfinite(upper[j]))
      throw ModelError("convex program: bounds must be finite and ordered");
  for (auto [k, v] : pins) {
    if (k < 0 || k >= n) throw ModelError("convex program: pin index out of range");
    if (v < lower[k] - 1e-9 || v > upper[k] + 1e-9) throw ModelError("convex program: pinned value outside bounds");
  }
}

std::vector<int> KktCertificate::active(double activity) const {
  std::vector<int> out;
  for (int i = 0; i < constraint_values.size(); ++i)
    if (constraint_values[i] >= -activity) out.push_back(i);
  return out;
}

ConvexProgram program_from_model(const ModelInstance& m) {
  ConvexProgram p;
  p.c = m.objective.linear;
  p.A = m.A;
  p.b = m.b;
  p.G = m.G;
  p.h = m.h;
  p.constraints = m.constraints;
  for (size_t i = 0; i < m.constraints.size(); ++i) p.names.push_back(m.constraint_name(static_cast<int>(i)));
  p.lower = m.lower();
  p.upper = m.upper();
  return p;
}

ConvexProgram convex_set_of(const ModelInstance& m) {
  ConvexProgram p = program_from_model(m);
  p.c = Vec::Zero(m.num_vars());
  p.A = Mat::Zero(0, m.num_vars());
  p.b = Vec::Zero(0);
  p.G = Mat::Zero(0, m.num_vars());
  p.h = Vec::Zero(0);
  return p;
}

KktCertificate convex_solve(const ConvexProgram& program, const ConvexOptions& opts) {
  program.validate();
  std::vector<bool> pinned;
  Vec pin_value;
  bool trivially_infeasible = false;
  Reduced r = reduce(program, pinned, pin_value, trivially_infeasible, opts.feasibility_tol);
  KktCertificate cert;
  const int n = program.num_vars();
  const int d = r.d();

  auto infeasible = [&](double viol, const Vec& x) {
    KktCertificate c;
    c.status = ConvexStatus::Infeasible;
    c.min_violation = viol;
    c.x = x;
    return c;
  };
  if (trivially_infeasible) return infeasible(kInf, r.x_fixed);

  if (d == 0) {
    cert.x = r.x_fixed;
    cert.lambda_convex = Vec::Zero(static_cast<int>(program.constraints.size()));
    cert.lambda_le = Vec::Zero(program.A.rows());
    cert.nu_eq = Vec::Zero(program.G.rows());
    cert.z_lower = Vec::Zero(n);
    cert.z_upper = Vec::Zero(n);
    finish_certificate(program, pinned, cert);
    if (cert.feasibility > opts.feasibility_tol) return infeasible(cert.feasibility, cert.x);
    cert.status = ConvexStatus::Optimal;
    return cert;
  }

  // Start: box center moved onto the equality set.
  Vec z0(d);
  for (int k = 0; k < d; ++k) {
    const int j = r.free_idx[k];
    z0[k] = 0.5 * (program.lower[j] + program.upper[j]);
  }
  if (r.E.rows() > 0) {
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(r.E);
    Vec corr = cod.solve(r.f - r.E * z0);
    z0 += corr;
    if ((r.E * z0 - r.f).cwiseAbs().maxCoeff() > opts.feasibility_tol) return infeasible(kInf, r.full(z0));
  }

  int steps = 0;
  const int K = r.num_ineq();

  // Phase 1: min s s.t. v_k(z) <= s.
  Vec v0;
  Barrier probe(r, false, 0.0);
  probe.values(z0, v0);
  double s_star;
  Vec z = z0;
  if (v0.maxCoeff() < -1e-3) {
    s_star = v0.maxCoeff();
  } else {
    Barrier ph1(r, true, 0.0);
    Vec w(d + 1);
    w.head(d) = z0;
    w[d] = std::max(v0.maxCoeff(), 0.0) + 1.0;
    double t = 1.0;
    while (true) {
      if (!ph1.center(w, t, steps, opts.max_newton, true)) {
        cert.status = ConvexStatus::NumericalFailure;
        cert.x = r.full(w.head(d));
        return cert;
      }
      if (w[d] < -1e-3) break;
      if ((K + 1) / t < 1e-11) break;
      t *= 10.0;
    }
    z = w.head(d);
    Vec v;
    probe.values(z, v);
    s_star = v.maxCoeff();
  }
  if (s_star > opts.feasibility_tol) return infeasible(s_star, r.full(z));
  // Feasible but (numerically) without interior: relax a hair so the barrier
  // has room, the result violates by at most `relax`.
  const double relax = s_star > -1e-9 ? std::max(s_star, 0.0) + 1e-9 : 0.0;

  Barrier ph2(r, false, relax);
  double t = 1.0;
  {
    // Scale the first barrier weight to the objective magnitude.
    Vec g(d);
    g = r.c;
    if (r.least_squares) g += z - r.target;
    const double gn = g.norm();
    if (gn > 0) t = std::max(1.0, static_cast<double>(K) / (gn * 1.0));
  }
  bool budget_ok = true;
  while (true) {
    if (!ph2.center(z, t, steps, opts.max_newton)) {
      budget_ok = false;
      break;
    }
    const double f = std::abs(ph2.objective(z));
    if (K / t < 1e-3 * opts.tol * (1.0 + f)) break;
    t *= 10.0;
  }

  Vec x = r.full(z);
  Vec v;
  ph2.values(z, v);
  // Barrier multipliers.
  Vec lam = (1.0 / (t * (-v).array())).matrix();
  const int nc = static_cast<int>(r.convex.size());
  std::vector<int> eq_map;
  for (int i = 0, k = 0; i < program.G.rows(); ++i) {
    bool zero = true;
    for (int q = 0; q < d; ++q) zero = zero && program.G(i, r.free_idx[q]) == 0.0;
    if (!zero) eq_map.push_back(i), ++k;
  }
  // Stationarity in z: grad f0 + J' lam + E' nu = 0; nu by least squares.
  Mat J(K, d);
  Vec g;
  for (int k = 0; k < nc; ++k) {
    r.convex[k].value_and_subgradient(x, g);
    for (int q = 0; q < d; ++q) J(k, q) = g[r.free_idx[q]];
  }
  if (r.L.rows() > 0) J.bottomRows(r.L.rows()) = r.L;
  Vec gf = r.c;
  if (r.least_squares) gf += z - r.target;
  Vec nu = Vec::Zero(r.E.rows());
  if (r.E.rows() > 0) {
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(r.E.transpose());
    nu = cod.solve(-(gf + J.transpose() * lam));
  }
  KktCertificate barrier_cert = certificate_from(program, r, pinned, x, lam.head(nc), lam.tail(K - nc), nu, eq_map);

  // Purified multipliers: NNLS on the active set only.
  std::vector<int> act;
  for (int k = 0; k < K; ++k)
    if (v[k] + relax >= -1e-6) act.push_back(k);
  const int na = static_cast<int>(act.size());
  const int ne = static_cast<int>(r.E.rows());
  Mat C(d, na + ne);
  for (int a = 0; a < na; ++a) C.col(a) = J.row(act[a]).transpose();
  if (ne) C.rightCols(ne) = r.E.transpose();
  std::vector<bool> free_cols(na + ne, false);
  for (int k = 0; k < ne; ++k) free_cols[na + k] = true;
  Vec sol = nnls(C, -gf, free_cols);
  Vec lam2 = Vec::Zero(K);
  for (int a = 0; a < na; ++a) lam2[act[a]] = sol[a];
  KktCertificate pure_cert =
      certificate_from(program, r, pinned, x, lam2.head(nc), lam2.tail(K - nc), sol.tail(ne), eq_map);

  auto worst = [](const KktCertificate& c) { return std::max(c.stationarity, c.complementarity); };
  cert = worst(pure_cert) <= worst(barrier_cert) ? pure_cert : barrier_cert;
  cert.newton_steps = steps;
  cert.status = budget_ok ? ConvexStatus::Optimal : ConvexStatus::NumericalFailure;
  return cert;
}

Projection project(const Vec& point, const ConvexProgram& set, const ConvexOptions& opts) {
  Projection out;
  // Members project onto themselves; the barrier would only approach them.
  bool member = (point.array() >= set.lower.array()).all() && (point.array() <= set.upper.array()).all();
  for (const auto& e : set.constraints) member = member && e.value(point) <= 0.0;
  if (set.A.rows() > 0) member = member && ((set.A * point - set.b).array() <= 0.0).all();
  if (set.G.rows() > 0) member = member && (set.G * point - set.h).cwiseAbs().maxCoeff() <= 1e-12;
  for (auto [k, v] : set.pins) member = member && point[k] == v;
  if (member) {
    ConvexProgram q = set;
    q.c = Vec::Zero(set.num_vars());
    q.target = point;
    KktCertificate& c = out.certificate;
    c.status = ConvexStatus::Optimal;
    c.x = point;
    c.lambda_convex = Vec::Zero(static_cast<int>(set.constraints.size()));
    c.lambda_le = Vec::Zero(set.A.rows());
    c.nu_eq = Vec::Zero(set.G.rows());
    c.z_lower = Vec::Zero(set.num_vars());
    c.z_upper = Vec::Zero(set.num_vars());
    std::vector<bool> pinned(set.num_vars(), false);
    for (auto [k, v] : set.pins) pinned[k] = true;
    finish_certificate(q, pinned, c);
    out.status = ConvexStatus::Optimal;
    out.z = point;
    out.distance = 0.0;
    return out;
  }
  ConvexProgram p = set;
  p.c = Vec::Zero(set.num_vars());
  p.target = point;
  out.certificate = convex_solve(p, opts);
  out.status = out.certificate.status;
  if (out.certificate.optimal()) {
    out.z = out.certificate.x;
    out.distance = (point - out.z).norm();
  }
  return out;
}

LinearCut separation_cut(const Vec& x, const Vec& z, double tol) {
  const Vec d = x - z;
  if (d.norm() <= tol) throw std::invalid_argument("separation cut needs a point outside the set");
  LinearCut cut;
  cut.coef = d;
  cut.rhs = d.dot(z);
  cut.provenance = CutProvenance::Separation;
  return cut;
}

LinearCut projection_cut(const ConvexProgram& set, const Projection& proj) {
  const auto& cert = proj.certificate;
  const Vec& z = proj.z;
  const int n = set.num_vars();
  LinearCut cut;
  cut.coef = Vec::Zero(n);
  cut.rhs = 0.0;
  Vec g;
  for (size_t i = 0; i < set.constraints.size(); ++i) {
    const double lam = cert.lambda_convex[static_cast<int>(i)];
    if (lam == 0.0) continue;
    const double v = set.constraints[i].value_and_subgradient(z, g);
    cut.coef += lam * g;
    cut.rhs += lam * (g.dot(z) - v);
  }
  if (set.A.rows() > 0) {
    cut.coef += set.A.transpose() * cert.lambda_le;
    cut.rhs += set.b.dot(cert.lambda_le);
  }
  for (int j = 0; j < n; ++j) {
    cut.coef[j] += cert.z_upper[j] - cert.z_lower[j];
    cut.rhs += cert.z_upper[j] * set.upper[j] - cert.z_lower[j] * set.lower[j];
  }
  cut.provenance = CutProvenance::Separation;
  return cut;
}

NormalConeDecomposition decompose_normal_cone(const Vec& target, const Vec& point, const std::vector<ConeSet>& sets,
                                              double activity, double tol) {
  const int n = static_cast<int>(target.size());
  std::vector<Vec> gens;
  std::vector<bool> free_cols;
  std::vector<int> owner;
  Vec g;
  for (size_t s = 0; s < sets.size(); ++s) {
    const auto& S = sets[s];
    switch (S.kind) {
      case ConeSet::Kind::Convex:
        for (const auto& e : S.constraints) {
          const double v = e.value_and_subgradient(point, g);
          if (v >= -activity) {
            gens.push_back(g);
            free_cols.push_back(false);
            owner.push_back(static_cast<int>(s));
          }
        }
        break;
      case ConeSet::Kind::Halfspaces:
        for (int i = 0; i < S.A.rows(); ++i) {
          if (S.A.row(i).dot(point) - S.b[i] >= -activity) {
            gens.push_back(S.A.row(i).transpose());
            free_cols.push_back(false);
            owner.push_back(static_cast<int>(s));
          }
        }
        break;
      case ConeSet::Kind::Affine:
        for (int i = 0; i < S.A.rows(); ++i) {
          gens.push_back(S.A.row(i).transpose());
          free_cols.push_back(true);
          owner.push_back(static_cast<int>(s));
        }
        break;
    }
  }
  Mat C(n, static_cast<int>(gens.size()));
  for (size_t k = 0; k < gens.size(); ++k) C.col(static_cast<int>(k)) = gens[k];
  Vec mu = gens.empty() ? Vec::Zero(0) : nnls(C, target, free_cols);
  NormalConeDecomposition out;
  out.parts.assign(sets.size(), Vec::Zero(n));
  out.coefficients.resize(sets.size());
  for (size_t k = 0; k < gens.size(); ++k) {
    out.parts[owner[k]] += mu[static_cast<int>(k)] * gens[k];
    auto& co = out.coefficients[owner[k]];
    co.conservativeResize(co.size() + 1);
    co[co.size() - 1] = mu[static_cast<int>(k)];
  }
  Vec sum = Vec::Zero(n);
  for (const auto& v : out.parts) sum += v;
  out.residual = (target - sum).norm();
  out.ok = out.residual <= tol * (1.0 + target.norm());
  if (!out.ok) throw std::runtime_error("decomposition-failure: residual " + std::to_string(out.residual));
  return out;
}

std::vector<LinearCut> supporting_inequalities(const ConvexProgram& program, const KktCertificate& cert,
                                               SupportMode mode, const std::vector<bool>& param_mask,
                                               double activity) {
  std::vector<LinearCut> cuts;
  const Vec& xb = cert.x;
  const int n = program.num_vars();
  std::vector<bool> ymask(n, true);
  if (mode == SupportMode::Parametric) {
    for (int j = 0; j < n && j < static_cast<int>(param_mask.size()); ++j) ymask[j] = !param_mask[j];
  }
  Vec g;
  for (int i : cert.active(activity)) {
    const auto& e = program.constraints[i];
    if (mode == SupportMode::Parametric && !e.differentiable()) {
      // Assumption 2 holds when every nonsmooth piece lives in one block.
      ModelInstance probe = make_model(std::vector<VariableSpec>(n, VariableSpec{"v", VarKind::Continuous, 0, 1}));
      probe.constraints = {e};
      probe.first_stage = param_mask;
      auto rep = check_assumptions(probe);
      if (!rep.constraints[0].assumption2) {
        const std::string name = i < static_cast<int>(program.names.size()) ? program.names[i] : "c" + std::to_string(i);
        throw AssumptionError("constraint " + name + " violates the subdifferential product assumption");
      }
    }
    const double v = e.value_and_subgradient(xb, g);
    LinearCut cut;
    cut.coef = g;
    cut.rhs = g.dot(xb) - v;
    cut.provenance = CutProvenance::Supporting;
    cut.parametric_valid = mode == SupportMode::Parametric;
    if (g.cwiseAbs().maxCoeff() > 1e-12) cuts.push_back(cut);
  }
  if (mode == SupportMode::Parametric) {
    // Normal-cone component of the linear part (rows and y bounds).
    LinearCut cut;
    cut.coef = Vec::Zero(n);
    cut.rhs = 0.0;
    if (program.A.rows() > 0) {
      cut.coef += program.A.transpose() * cert.lambda_le;
      cut.rhs += program.b.dot(cert.lambda_le);
    }
    for (int j = 0; j < n; ++j) {
      if (!ymask[j]) continue;
      cut.coef[j] += cert.z_upper[j] - cert.z_lower[j];
      cut.rhs += cert.z_upper[j] * program.upper[j] - cert.z_lower[j] * program.lower[j];
    }
    cut.provenance = CutProvenance::Supporting;
    cut.parametric_valid = true;
    if (cut.coef.cwiseAbs().maxCoeff() > 1e-12) cuts.push_back(cut);
  }
  return cuts;
}

bool lp_equivalence_check(const ConvexProgram& program, const KktCertificate& cert, const std::vector<LinearCut>& cuts,
                          double tol) {
  if (!cert.optimal() || program.target) return false;
  LpProblem lp = make_lp(program.c, program.lower, program.upper);
  for (int i = 0; i < program.A.rows(); ++i) lp.add_le(program.A.row(i).transpose(), program.b[i]);
  for (int i = 0; i < program.G.rows(); ++i) lp.add_eq(program.G.row(i).transpose(), program.h[i]);
  for (auto [k, v] : program.pins) {
    lp.lower[k] = v;
    lp.upper[k] = v;
  }
  for (const auto& c : cuts) lp.add_le(c.coef, c.rhs);
  auto sol = lp_solve(lp);
  if (!sol.optimal()) return false;
  return std::abs(sol.objective - cert.objective) <= tol * (1.0 + std::abs(cert.objective));
}

}  // namespace micp
