#include "micp/instances.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace micp {

namespace {

// All draws come from raw 64-bit words so the output does not depend on the
// standard library's distribution implementations.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : g_(seed) {}
  double uniform(double lo, double hi) { return lo + (hi - lo) * (static_cast<double>(g_() >> 11) * 0x1.0p-53); }
  int integer(int lo, int hi) { return lo + static_cast<int>(g_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool coin(double p) { return uniform(0.0, 1.0) < p; }
  double coef(double lo, double hi) { return std::round(uniform(lo, hi) * 100.0) / 100.0; }

 private:
  std::mt19937_64 g_;
};

double ceil4(double v) { return std::ceil(v * 1e4) / 1e4; }

Vec sparse_coefs(Draw& d, int n, const std::vector<int>& cols, double mag) {
  Vec a = Vec::Zero(n);
  bool any = false;
  for (int j : cols)
    if (d.coin(0.6)) {
      a[j] = d.coef(-mag, mag);
      any = any || a[j] != 0.0;
    }
  if (!any && !cols.empty()) a[cols[d.integer(0, static_cast<int>(cols.size()) - 1)]] = mag / 2;
  return a;
}

std::vector<int> range(int lo, int hi) {
  std::vector<int> r;
  for (int j = lo; j < hi; ++j) r.push_back(j);
  return r;
}

ConvexExpr smooth_atom(Draw& d, int n, const std::vector<int>& cols) {
  switch (d.integer(0, 3)) {
    case 0:
      return ConvexExpr::softplus(sparse_coefs(d, n, cols, 1.5), d.coef(-1, 1));
    case 1: {
      Mat A(2, n);
      for (int r = 0; r < 2; ++r) A.row(r) = sparse_coefs(d, n, cols, 1.0).transpose();
      return ConvexExpr::log_sum_exp(A, Vec{{d.coef(-1, 1), d.coef(-1, 1)}});
    }
    case 2: {
      const int rows = d.integer(1, 2);
      Mat A(rows, n);
      Vec b(rows);
      for (int r = 0; r < rows; ++r) {
        A.row(r) = sparse_coefs(d, n, cols, 0.8).transpose();
        b[r] = d.coef(-1, 1);
      }
      return ConvexExpr::squared_norm(A, b);
    }
    default:
      return ConvexExpr::power(sparse_coefs(d, n, cols, 0.8), d.coef(-1, 1), d.coin(0.5) ? 2.0 : 1.5);
  }
}

ConvexExpr nonsmooth_atom(Draw& d, int n, const std::vector<int>& cols) {
  switch (d.integer(0, 2)) {
    case 0: {
      const int rows = d.integer(1, 2);
      Mat A(rows, n);
      Vec b(rows);
      for (int r = 0; r < rows; ++r) {
        A.row(r) = sparse_coefs(d, n, cols, 1.0).transpose();
        b[r] = d.coef(-1, 1);
      }
      return ConvexExpr::norm(A, b);
    }
    case 1:
      return ConvexExpr::power(sparse_coefs(d, n, cols, 1.0), d.coef(-1, 1), 1.0);
    default:
      return smooth_atom(d, n, cols);
  }
}

// f(z) + slack style constraint through the planted point: expr - rhs <= 0.
ConvexExpr planted_constraint(Draw& d, const ConvexExpr& f, const Vec& lin, const Vec& z) {
  const double rhs = ceil4(f.value(z) + lin.dot(z) + d.uniform(0.05, 0.6));
  return ConvexExpr::sum({{1.0, f}, {1.0, ConvexExpr::affine(lin, 0.0)}}, -rhs);
}

Json micp_profile(std::uint64_t seed, bool separable) {
  Draw d(seed);
  int nb = d.integer(1, 4), ni = d.integer(1, 3);
  const int nc = d.integer(0, 2);
  auto lattice = [&] { return (1 << nb) * static_cast<int>(std::pow(6, ni)); };
  while (lattice() > 600) (nb > 2 ? nb : ni) -= 1;
  const int n = nb + ni + nc;
  std::vector<VariableSpec> vars;
  Vec z(n);
  for (int j = 0; j < nb; ++j) {
    vars.push_back({"b" + std::to_string(j + 1), VarKind::Binary, 0, 1});
    z[j] = d.integer(0, 1);
  }
  for (int j = 0; j < ni; ++j) {
    vars.push_back({"i" + std::to_string(j + 1), VarKind::Integer, 0, 5});
    z[nb + j] = d.integer(0, 5);
  }
  for (int j = 0; j < nc; ++j) {
    vars.push_back({"c" + std::to_string(j + 1), VarKind::Continuous, -2, 2});
    z[nb + ni + j] = d.coef(-1.5, 1.5);
  }
  ModelInstance m = make_model(vars);
  for (int j = 0; j < n; ++j) m.objective.linear[j] = d.coef(-2, 2);
  const auto all = range(0, n), xs = range(0, nb), ys = range(nb, n);
  if (!separable && d.coin(0.25)) {
    Mat A(1, n);
    A.row(0) = sparse_coefs(d, n, all, 0.7).transpose();
    m.objective.convex = ConvexExpr::squared_norm(A, Vec{{d.coef(-1, 1)}});
  }
  const int k = d.integer(1, 3);
  for (int i = 0; i < k; ++i) {
    if (separable) {
      ConvexExpr psi = d.coin(0.5) ? ConvexExpr::affine(sparse_coefs(d, n, xs, 1.5), 0.0)
                                   : ConvexExpr::softplus(sparse_coefs(d, n, xs, 1.5), d.coef(-1, 1));
      ConvexExpr phi = nonsmooth_atom(d, n, ys);
      ConvexExpr f = ConvexExpr::sum({{1.0, psi}, {1.0, phi}});
      m.constraints.push_back(planted_constraint(d, f, Vec::Zero(n), z));
    } else {
      ConvexExpr f = smooth_atom(d, n, all);
      m.constraints.push_back(planted_constraint(d, f, sparse_coefs(d, n, all, 1.0), z));
    }
    m.constraint_names.push_back("g" + std::to_string(i + 1));
  }
  const int rows = d.integer(0, 2);
  for (int i = 0; i < rows; ++i) {
    Vec a = sparse_coefs(d, n, all, 2.0);
    add_row(m, a, ceil4(a.dot(z) + d.uniform(0.0, 1.0)));
  }
  if (separable) {
    m.first_stage.assign(n, false);
    for (int j = 0; j < nb; ++j) m.first_stage[j] = true;
  }
  Json j = model_to_json(m);
  j["planted"] = std::vector<double>(z.data(), z.data() + n);
  return j;
}

Json twostage_profile(std::uint64_t seed) {
  Draw d(seed);
  TwoStageInstance inst;
  const int nx = d.integer(2, 4);
  const int nw = d.integer(2, 4);
  for (int j = 0; j < nx; ++j) inst.x_vars.push_back({"x" + std::to_string(j + 1), VarKind::Binary, 0, 1});
  inst.c = Vec(nx);
  for (int j = 0; j < nx; ++j) inst.c[j] = d.coef(0.5, 3.0);
  inst.A = Mat(0, nx);
  inst.b = Vec(0);
  if (d.coin(0.5)) {
    inst.A = -Mat::Ones(1, nx);
    inst.b = Vec::Constant(1, -1.0);
  }
  std::vector<Vec> xs;
  for (int code = 0; code < (1 << nx); ++code) {
    Vec x(nx);
    for (int j = 0; j < nx; ++j) x[j] = (code >> j) & 1;
    xs.push_back(x);
  }
  Json planted = Json::array();
  for (int w = 0; w < nw; ++w) {
    Scenario s;
    s.name = "w" + std::to_string(w + 1);
    const int ni = d.integer(1, 2), nc = d.coin(0.3) ? 1 : 0;
    for (int j = 0; j < ni; ++j) s.y_vars.push_back({"y" + std::to_string(j + 1), VarKind::Integer, 0, 4});
    for (int j = 0; j < nc; ++j) s.y_vars.push_back({"u" + std::to_string(j + 1), VarKind::Continuous, 0, 3});
    const int ny = ni + nc;
    const int n = nx + ny;
    s.q = Vec(ny);
    for (int j = 0; j < ny; ++j) s.q[j] = d.coef(0.2, 2.0);
    s.A = Mat(0, n);
    s.b = Vec(0);
    Vec corner(ny), target(ny);
    for (int j = 0; j < ny; ++j) {
      corner[j] = s.y_vars[j].upper;
      target[j] = s.y_vars[j].is_integer() ? d.integer(0, 4) : d.coef(0, 3);
    }
    const int k = d.integer(1, 2);
    for (int i = 0; i < k; ++i) {
      // -s.y + softplus(a.y + t.x + r) + d.x, strictly decreasing in y
      Vec lin = Vec::Zero(n), a = Vec::Zero(n);
      for (int j = 0; j < ny; ++j) {
        const double sj = d.coef(0.5, 2.0);
        lin[nx + j] = -sj;
        a[nx + j] = d.coef(-0.9 * sj, 0.9 * sj);
      }
      for (int j = 0; j < nx; ++j) {
        a[j] = d.coef(-1, 1);
        lin[j] = d.coef(-1.5, 0.5);
      }
      const double r = d.coef(-1, 1);
      ConvexExpr f = ConvexExpr::sum({{1.0, ConvexExpr::affine(lin, 0.0)}, {1.0, ConvexExpr::softplus(a, r)}});
      double worst = -std::numeric_limits<double>::infinity();
      for (const auto& x : xs) {
        Vec zz(n);
        zz << x, target;
        worst = std::max(worst, f.value(zz));
      }
      s.constraints.push_back(ConvexExpr::sum({{1.0, f}}, -ceil4(worst + 0.01)));
      s.constraint_names.push_back("d" + std::to_string(i + 1));
    }
    planted.push_back(std::vector<double>(corner.data(), corner.data() + ny));
    inst.scenarios.push_back(std::move(s));
  }
  inst.P_A = Mat(0, nw);
  inst.P_b = Vec(0);
  inst.P_G = Mat(0, nw);
  inst.P_h = Vec(0);
  switch (d.integer(0, 3)) {
    case 0: {  // singleton
      std::vector<int> k(nw);
      int total = 0;
      for (auto& v : k) total += (v = d.integer(1, 4));
      inst.P_G = Mat::Zero(nw - 1, nw);
      inst.P_h = Vec(nw - 1);
      for (int w = 0; w + 1 < nw; ++w) {
        inst.P_G(w, w) = 1.0;
        inst.P_h[w] = static_cast<double>(k[w]) / total;
      }
      break;
    }
    case 1:  // whole simplex
      break;
    case 2: {  // box around the uniform distribution
      const double delta = d.coef(0.05, 0.2), p0 = 1.0 / nw;
      inst.P_A = Mat::Zero(2 * nw, nw);
      inst.P_b = Vec(2 * nw);
      for (int w = 0; w < nw; ++w) {
        inst.P_A(2 * w, w) = 1.0;
        inst.P_b[2 * w] = p0 + delta;
        inst.P_A(2 * w + 1, w) = -1.0;
        inst.P_b[2 * w + 1] = -(p0 - delta);
      }
      break;
    }
    default:  // ordered weights p_1 >= p_2 >= ...
      inst.P_A = Mat::Zero(nw - 1, nw);
      inst.P_b = Vec::Zero(nw - 1);
      for (int w = 0; w + 1 < nw; ++w) {
        inst.P_A(w, w) = -1.0;
        inst.P_A(w, w + 1) = 1.0;
      }
  }
  Json j = two_stage_to_json(inst);
  j["planted"] = planted;
  return j;
}

}  // namespace

TwoStageInstance worked_example() {
  const double L = std::log1p(std::exp(1.0));
  TwoStageInstance inst;
  inst.x_vars = {{"x1", VarKind::Binary, 0, 1}, {"x2", VarKind::Binary, 0, 1}};
  inst.c = Vec{{1.0, 2.0}};
  inst.A = Mat{{-3.0, -1.0}};
  inst.b = Vec{{-2.0}};
  inst.eta_lower = 0.0;
  const Vec soft{{0.0, 0.0, 1.0, 1.0}};
  Scenario s1;
  s1.name = "w1";
  s1.y_vars = {{"y11", VarKind::Integer, 0, 5}, {"y12", VarKind::Integer, 0, 5}};
  s1.q = Vec{{0.5, 1.0}};
  s1.A = Mat(0, 4);
  s1.b = Vec(0);
  s1.constraints.push_back(ConvexExpr::sum(
      {{1.0, ConvexExpr::affine(Vec{{-1.0, -1.0, -2.0, -L}}, 1.0)}, {1.0, ConvexExpr::softplus(soft, 0.0)}}));
  s1.constraint_names = {"couple"};
  Scenario s2;
  s2.name = "w2";
  s2.y_vars = {{"y21", VarKind::Integer, 0, 5}, {"y22", VarKind::Integer, 0, 5}};
  s2.q = Vec{{1.0, 1.0}};
  s2.A = Mat(0, 4);
  s2.b = Vec(0);
  s2.constraints.push_back(ConvexExpr::sum(
      {{1.0, ConvexExpr::affine(Vec{{-1.0, -1.0, -L, -L}}, 1.0)}, {1.0, ConvexExpr::softplus(soft, 0.0)}}));
  s2.constraint_names = {"couple"};
  inst.scenarios = {s1, s2};
  inst.P_A = Mat(0, 2);
  inst.P_b = Vec(0);
  inst.P_G = Mat{{1.0, 0.0}};
  inst.P_h = Vec{{0.5}};
  return inst;
}

const std::vector<std::string>& instance_profiles() {
  static const std::vector<std::string> p{"micp-smooth", "micp-separable", "twostage-small"};
  return p;
}

Json generate_instance(std::uint64_t seed, const std::string& profile) {
  if (profile == "micp-smooth") return micp_profile(seed, false);
  if (profile == "micp-separable") return micp_profile(seed, true);
  if (profile == "twostage-small") return twostage_profile(seed);
  throw ModelError("unknown profile '" + profile + "'");
}

}  // namespace micp
