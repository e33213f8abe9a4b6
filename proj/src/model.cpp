#include "micp/model.hpp"

#include "micp/log.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace micp {

const char* to_string(VarKind k) {
  switch (k) {
    case VarKind::Binary: return "binary";
    case VarKind::Integer: return "integer";
    case VarKind::Continuous: return "continuous";
  }
  return "?";
}

VarKind var_kind_from_string(const std::string& s) {
  if (s == "binary") return VarKind::Binary;
  if (s == "integer") return VarKind::Integer;
  if (s == "continuous") return VarKind::Continuous;
  throw ModelError("unknown variable kind '" + s + "'");
}

Vec ModelInstance::lower() const {
  Vec l(num_vars());
  for (int j = 0; j < num_vars(); ++j) l[j] = vars[j].lower;
  return l;
}

Vec ModelInstance::upper() const {
  Vec u(num_vars());
  for (int j = 0; j < num_vars(); ++j) u[j] = vars[j].upper;
  return u;
}

std::vector<bool> ModelInstance::integer_mask() const {
  std::vector<bool> m(vars.size());
  for (size_t j = 0; j < vars.size(); ++j) m[j] = vars[j].is_integer();
  return m;
}

std::string ModelInstance::constraint_name(int i) const {
  if (i < static_cast<int>(constraint_names.size()) && !constraint_names[i].empty()) return constraint_names[i];
  return "c" + std::to_string(i);
}

void ModelInstance::validate() const {
  const int n = num_vars();
  if (n == 0) throw ModelError("model has no variables");
  for (const auto& v : vars) {
    if (!std::isfinite(v.lower) || !std::isfinite(v.upper))
      throw ModelError("variable '" + v.name + "' needs finite bounds");
    if (v.lower > v.upper) throw ModelError("variable '" + v.name + "' has lower > upper");
    if (v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0 || v.lower != std::floor(v.lower) ||
                                      v.upper != std::floor(v.upper)))
      throw ModelError("binary variable '" + v.name + "' must have bounds in {0,1}");
    if (v.kind == VarKind::Integer && (v.lower != std::floor(v.lower) || v.upper != std::floor(v.upper)))
      throw ModelError("integer variable '" + v.name + "' must have integer bounds");
  }
  if (objective.linear.size() != n) throw ModelError("objective has wrong length");
  if (objective.convex && objective.convex->dim() != n) throw ModelError("convex objective has wrong dimension");
  if (A.rows() > 0 && A.cols() != n) throw ModelError("linear rows have wrong width");
  if (A.rows() != b.size()) throw ModelError("linear rows and rhs disagree");
  if (G.rows() > 0 && G.cols() != n) throw ModelError("equality rows have wrong width");
  if (G.rows() != h.size()) throw ModelError("equality rows and rhs disagree");
  for (size_t i = 0; i < constraints.size(); ++i)
    if (constraints[i].dim() != n) throw ModelError("constraint " + constraint_name(static_cast<int>(i)) + " has wrong dimension");
  if (!first_stage.empty() && static_cast<int>(first_stage.size()) != n)
    throw ModelError("first-stage mask has wrong length");
  if (!A.allFinite() || !b.allFinite() || !G.allFinite() || !h.allFinite() || !objective.linear.allFinite())
    throw ModelError("model data contains non-finite numbers");
}

ModelInstance make_model(std::vector<VariableSpec> vars) {
  ModelInstance m;
  const int n = static_cast<int>(vars.size());
  m.vars = std::move(vars);
  m.objective.linear = Vec::Zero(n);
  m.A = Mat::Zero(0, n);
  m.b = Vec::Zero(0);
  m.G = Mat::Zero(0, n);
  m.h = Vec::Zero(0);
  return m;
}

void add_row(ModelInstance& m, const Vec& a, double rhs) {
  const auto r = m.A.rows();
  m.A.conservativeResize(r + 1, m.num_vars());
  m.A.row(r) = a.transpose();
  m.b.conservativeResize(r + 1);
  m.b[r] = rhs;
}

void add_equality(ModelInstance& m, const Vec& g, double rhs) {
  const auto r = m.G.rows();
  m.G.conservativeResize(r + 1, m.num_vars());
  m.G.row(r) = g.transpose();
  m.h.conservativeResize(r + 1);
  m.h[r] = rhs;
}

double objective_value(const ModelInstance& m, const Vec& x) {
  double v = m.objective.linear.dot(x) + m.objective.constant;
  if (m.objective.convex) v += m.objective.convex->value(x);
  return v;
}

double max_violation(const ModelInstance& m, const Vec& x) {
  double v = 0.0;
  if (m.A.rows() > 0) v = std::max(v, (m.A * x - m.b).maxCoeff());
  if (m.G.rows() > 0) v = std::max(v, (m.G * x - m.h).cwiseAbs().maxCoeff());
  for (int j = 0; j < m.num_vars(); ++j) v = std::max({v, m.vars[j].lower - x[j], x[j] - m.vars[j].upper});
  for (const auto& c : m.constraints) v = std::max(v, c.value(x));
  return v;
}

std::pair<double, double> expr_bounds_over_box(const ConvexExpr& e, const Vec& lo, const Vec& hi) {
  const int n = e.dim();
  auto sup = e.support();
  std::vector<int> idx;
  for (int j = 0; j < n; ++j)
    if (sup[j] && hi[j] > lo[j]) idx.push_back(j);
  if (idx.size() > 18) throw ModelError("cannot bound epigraph variable: objective depends on too many variables");

  double upper = -std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  Vec g;
  auto linearization_bound = [&](const Vec& p) {
    double v = e.value_and_subgradient(p, g);
    for (int j = 0; j < n; ++j) v += g[j] > 0 ? g[j] * (lo[j] - p[j]) : g[j] * (hi[j] - p[j]);
    return v;
  };
  Vec corner = lo;
  const long count = 1L << idx.size();
  for (long mask = 0; mask < count; ++mask) {
    for (size_t k = 0; k < idx.size(); ++k) corner[idx[k]] = (mask >> k) & 1 ? hi[idx[k]] : lo[idx[k]];
    upper = std::max(upper, e.value(corner));
    lower = std::max(lower, linearization_bound(corner));
  }
  lower = std::max(lower, linearization_bound(0.5 * (lo + hi)));
  if (!std::isfinite(lower) || !std::isfinite(upper)) throw ModelError("cannot bound epigraph variable");
  return {lower, upper};
}

ModelInstance epigraph_reformulate(const ModelInstance& model) {
  if (!model.objective.convex) return model;
  const int n = model.num_vars();
  auto [lo, hi] = expr_bounds_over_box(*model.objective.convex, model.lower(), model.upper());
  // The epigraph variable absorbs the whole objective so that min eta is the
  // original problem.
  Vec lin = model.objective.linear;
  const double shift = model.objective.constant;
  double lin_lo = 0.0, lin_hi = 0.0;
  for (int j = 0; j < n; ++j) {
    lin_lo += std::min(lin[j] * model.vars[j].lower, lin[j] * model.vars[j].upper);
    lin_hi += std::max(lin[j] * model.vars[j].lower, lin[j] * model.vars[j].upper);
  }

  ModelInstance out = model;
  out.vars.push_back({"eta", VarKind::Continuous, lo + lin_lo + shift, hi + lin_hi + shift});
  std::vector<int> map(n);
  for (int j = 0; j < n; ++j) map[j] = j;
  Vec eta_coef = Vec::Zero(n + 1);
  eta_coef[n] = -1.0;
  Vec lin_ext = Vec::Zero(n + 1);
  lin_ext.head(n) = lin;
  for (auto& c : out.constraints) c = c.embed(map, n + 1);
  ConvexExpr g0 = model.objective.convex->embed(map, n + 1);
  out.constraints.push_back(ConvexExpr::sum({{1.0, g0}, {1.0, ConvexExpr::affine(lin_ext + eta_coef, shift)}}));
  out.constraint_names.resize(model.constraints.size());
  out.constraint_names.push_back("epigraph");
  out.objective.linear = Vec::Zero(n + 1);
  out.objective.linear[n] = 1.0;
  out.objective.constant = 0.0;
  out.objective.convex.reset();
  out.A.conservativeResize(model.A.rows(), n + 1);
  out.A.col(n).setZero();
  out.G.conservativeResize(model.G.rows(), n + 1);
  out.G.col(n).setZero();
  if (!out.first_stage.empty()) out.first_stage.push_back(false);
  return out;
}

std::vector<bool> first_stage_mask(const ModelInstance& model) {
  if (!model.first_stage.empty()) return model.first_stage;
  std::vector<bool> m(model.vars.size());
  for (size_t j = 0; j < m.size(); ++j) m[j] = model.vars[j].kind == VarKind::Binary;
  return m;
}

namespace {

bool separable(const ConvexExpr& e, const std::vector<bool>& xmask, const std::vector<bool>& ymask) {
  if (e.kind() == AtomKind::Affine) return true;
  if (!e.depends_on_any(xmask) || !e.depends_on_any(ymask)) return true;
  if (e.kind() == AtomKind::Sum) {
    for (const auto& t : e.terms())
      if (t.weight > 0.0 && !separable(t.expr, xmask, ymask)) return false;
    return true;
  }
  return false;
}

}  // namespace

bool StructureReport::all_assumption2() const {
  return std::all_of(constraints.begin(), constraints.end(), [](const ConstraintFlags& f) { return f.assumption2; });
}

StructureReport check_assumptions(const ModelInstance& model) {
  StructureReport rep;
  auto xmask = first_stage_mask(model);
  std::vector<bool> ymask(xmask.size());
  for (size_t j = 0; j < xmask.size(); ++j) ymask[j] = !xmask[j];
  for (size_t i = 0; i < model.constraints.size(); ++i) {
    const auto& c = model.constraints[i];
    ConstraintFlags f;
    f.differentiable = c.differentiable();
    f.separable = separable(c, xmask, ymask);
    f.assumption2 = f.differentiable || f.separable;
    if (!f.assumption2) {
      std::string msg = "constraint " + model.constraint_name(static_cast<int>(i)) +
                        " is nonsmooth and couples x and y; subdifferential product rule not certified";
      rep.warnings.push_back(msg);
      log_warning(msg);
    }
    rep.constraints.push_back(f);
  }
  return rep;
}

}  // namespace micp
