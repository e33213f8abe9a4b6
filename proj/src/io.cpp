#include "micp/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace micp {

namespace {

Json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) throw ModelError("cannot serialize NaN");
  return v > 0 ? "inf" : "-inf";
}

double get_num(const Json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ModelError(what + ": expected a number, got " + j.dump());
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ModelError(where + ": missing field '" + key + "'");
  return j.at(key);
}

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

Vec vec_from(const Json& j, const std::string& what, int expect = -1) {
  if (!j.is_array()) throw ModelError(what + ": expected an array");
  Vec v(static_cast<int>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = get_num(j[i], what);
  if (expect >= 0 && v.size() != expect)
    throw ModelError(what + ": expected " + std::to_string(expect) + " entries, got " + std::to_string(v.size()));
  return v;
}

Json mat_json(const Mat& m) {
  Json a = Json::array();
  for (int i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

Mat mat_from(const Json& j, const std::string& what, int cols) {
  if (!j.is_array()) throw ModelError(what + ": expected an array of rows");
  Mat m(static_cast<int>(j.size()), cols);
  for (size_t i = 0; i < j.size(); ++i) m.row(static_cast<int>(i)) = vec_from(j[i], what, cols).transpose();
  return m;
}

Json vars_json(const std::vector<VariableSpec>& vars) {
  Json a = Json::array();
  for (const auto& v : vars)
    a.push_back({{"name", v.name}, {"kind", to_string(v.kind)}, {"lower", num(v.lower)}, {"upper", num(v.upper)}});
  return a;
}

std::vector<VariableSpec> vars_from(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ModelError(where + ": variables must be an array");
  std::vector<VariableSpec> out;
  for (const auto& e : j) {
    VariableSpec v;
    v.name = field(e, "name", where).get<std::string>();
    v.kind = var_kind_from_string(field(e, "kind", where + " " + v.name).get<std::string>());
    if (v.kind == VarKind::Binary) {
      v.lower = e.contains("lower") ? get_num(e["lower"], v.name) : 0.0;
      v.upper = e.contains("upper") ? get_num(e["upper"], v.name) : 1.0;
    } else {
      v.lower = get_num(field(e, "lower", v.name), v.name + ".lower");
      v.upper = get_num(field(e, "upper", v.name), v.name + ".upper");
    }
    out.push_back(v);
  }
  return out;
}

// Rows as {"coef": [...], "sense": "le"|"ge"|"eq", "rhs": r}. ge rows are
// stored negated.
void rows_from(const Json& j, int n, const std::string& where, Mat& A, Vec& b, Mat& G, Vec& h) {
  A = Mat(0, n);
  b = Vec(0);
  G = Mat(0, n);
  h = Vec(0);
  if (j.is_null()) return;
  if (!j.is_array()) throw ModelError(where + ": linear rows must be an array");
  for (const auto& r : j) {
    Vec a = vec_from(field(r, "coef", where), where + ".coef", n);
    const double rhs = get_num(field(r, "rhs", where), where + ".rhs");
    const std::string sense = r.value("sense", "le");
    auto push = [](Mat& M, Vec& v, const Vec& a, double rhs) {
      M.conservativeResize(M.rows() + 1, a.size());
      M.row(M.rows() - 1) = a.transpose();
      v.conservativeResize(v.size() + 1);
      v[v.size() - 1] = rhs;
    };
    if (sense == "le") push(A, b, a, rhs);
    else if (sense == "ge") push(A, b, -a, -rhs);
    else if (sense == "eq") push(G, h, a, rhs);
    else throw ModelError(where + ": unknown row sense '" + sense + "'");
  }
}

Json rows_json(const Mat& A, const Vec& b, const Mat& G, const Vec& h) {
  Json a = Json::array();
  for (int i = 0; i < A.rows(); ++i) a.push_back({{"coef", vec_json(A.row(i).transpose())}, {"sense", "le"}, {"rhs", num(b[i])}});
  for (int i = 0; i < G.rows(); ++i) a.push_back({{"coef", vec_json(G.row(i).transpose())}, {"sense", "eq"}, {"rhs", num(h[i])}});
  return a;
}

Json constraints_json(const std::vector<ConvexExpr>& cs, const std::vector<std::string>& names) {
  Json a = Json::array();
  for (size_t i = 0; i < cs.size(); ++i) {
    Json c{{"expr", expr_to_json(cs[i])}};
    if (i < names.size() && !names[i].empty()) c["name"] = names[i];
    a.push_back(c);
  }
  return a;
}

void constraints_from(const Json& j, int n, const std::string& where, std::vector<ConvexExpr>& cs,
                      std::vector<std::string>& names) {
  if (j.is_null()) return;
  if (!j.is_array()) throw ModelError(where + ": convex constraints must be an array");
  for (const auto& c : j) {
    cs.push_back(expr_from_json(field(c, "expr", where), n));
    names.push_back(c.value("name", ""));
  }
}

const Json& opt(const Json& j, const char* key) {
  static const Json null_json;
  return j.contains(key) ? j.at(key) : null_json;
}

}  // namespace

Json expr_to_json(const ConvexExpr& e) {
  Json j{{"atom", to_string(e.kind())}};
  switch (e.kind()) {
    case AtomKind::Affine:
    case AtomKind::Softplus:
      j["a"] = vec_json(e.A().row(0).transpose());
      j["b"] = num(e.b()[0]);
      break;
    case AtomKind::Power:
      j["a"] = vec_json(e.A().row(0).transpose());
      j["b"] = num(e.b()[0]);
      j["p"] = num(e.exponent());
      break;
    case AtomKind::LogSumExp:
    case AtomKind::SquaredNorm:
    case AtomKind::Norm:
      j["A"] = mat_json(e.A());
      j["b"] = vec_json(e.b());
      break;
    case AtomKind::Sum: {
      Json t = Json::array();
      for (const auto& term : e.terms()) t.push_back({{"weight", num(term.weight)}, {"expr", expr_to_json(term.expr)}});
      j["terms"] = t;
      j["constant"] = num(e.constant());
      break;
    }
  }
  return j;
}

ConvexExpr expr_from_json(const Json& j, int n) {
  const std::string where = "expression";
  const AtomKind k = atom_kind_from_string(field(j, "atom", where).get<std::string>());
  switch (k) {
    case AtomKind::Affine:
      return ConvexExpr::affine(vec_from(field(j, "a", where), "affine.a", n), get_num(field(j, "b", where), "affine.b"));
    case AtomKind::Softplus:
      return ConvexExpr::softplus(vec_from(field(j, "a", where), "softplus.a", n),
                                  get_num(field(j, "b", where), "softplus.b"));
    case AtomKind::Power:
      return ConvexExpr::power(vec_from(field(j, "a", where), "power.a", n), get_num(field(j, "b", where), "power.b"),
                               get_num(field(j, "p", where), "power.p"));
    case AtomKind::LogSumExp:
    case AtomKind::SquaredNorm:
    case AtomKind::Norm: {
      Mat A = mat_from(field(j, "A", where), std::string(to_string(k)) + ".A", n);
      Vec b = vec_from(field(j, "b", where), std::string(to_string(k)) + ".b", static_cast<int>(A.rows()));
      if (k == AtomKind::LogSumExp) return ConvexExpr::log_sum_exp(A, b);
      if (k == AtomKind::SquaredNorm) return ConvexExpr::squared_norm(A, b);
      return ConvexExpr::norm(A, b);
    }
    case AtomKind::Sum: {
      std::vector<ConvexExpr::Term> terms;
      for (const auto& t : field(j, "terms", where))
        terms.push_back({get_num(field(t, "weight", where), "sum.weight"), expr_from_json(field(t, "expr", where), n)});
      if (terms.empty()) throw ModelError("sum atom needs at least one term");
      return ConvexExpr::sum(std::move(terms), j.contains("constant") ? get_num(j["constant"], "sum.constant") : 0.0);
    }
  }
  throw ModelError("unreachable atom kind");
}

Json model_to_json(const ModelInstance& m) {
  Json j;
  j["variables"] = vars_json(m.vars);
  Json obj{{"linear", vec_json(m.objective.linear)}, {"constant", num(m.objective.constant)}};
  if (m.objective.convex) obj["convex"] = expr_to_json(*m.objective.convex);
  j["objective"] = obj;
  j["linear"] = rows_json(m.A, m.b, m.G, m.h);
  j["convex"] = constraints_json(m.constraints, m.constraint_names);
  if (!m.first_stage.empty()) j["first_stage"] = m.first_stage;
  return j;
}

ModelInstance model_from_json(const Json& j) {
  if (!j.is_object()) throw ModelError("model: top level must be an object");
  ModelInstance m = make_model(vars_from(field(j, "variables", "model"), "model"));
  const int n = m.num_vars();
  const Json& obj = field(j, "objective", "model");
  m.objective.linear = vec_from(field(obj, "linear", "objective"), "objective.linear", n);
  if (obj.contains("constant")) m.objective.constant = get_num(obj["constant"], "objective.constant");
  if (obj.contains("convex") && !obj["convex"].is_null()) m.objective.convex = expr_from_json(obj["convex"], n);
  rows_from(opt(j, "linear"), n, "model", m.A, m.b, m.G, m.h);
  constraints_from(opt(j, "convex"), n, "model", m.constraints, m.constraint_names);
  if (j.contains("first_stage")) {
    m.first_stage = j["first_stage"].get<std::vector<bool>>();
    if (static_cast<int>(m.first_stage.size()) != n) throw ModelError("model: first_stage has wrong length");
  }
  m.validate();
  return m;
}

Json two_stage_to_json(const TwoStageInstance& inst) {
  const int nx = inst.num_x();
  Json first{{"variables", vars_json(inst.x_vars)},
             {"c", vec_json(inst.c)},
             {"linear", rows_json(inst.A.rows() ? inst.A : Mat(0, nx), inst.b, Mat(0, nx), Vec(0))},
             {"convex", constraints_json(inst.constraints, {})}};
  Json scen = Json::array();
  for (const auto& s : inst.scenarios) {
    const int n = nx + static_cast<int>(s.y_vars.size());
    scen.push_back({{"name", s.name},
                    {"variables", vars_json(s.y_vars)},
                    {"q", vec_json(s.q)},
                    {"linear", rows_json(s.A.rows() ? s.A : Mat(0, n), s.b, Mat(0, n), Vec(0))},
                    {"convex", constraints_json(s.constraints, s.constraint_names)}});
  }
  const int np = inst.num_scenarios();
  Json amb{{"linear", rows_json(inst.P_A.rows() ? inst.P_A : Mat(0, np), inst.P_b,
                                inst.P_G.rows() ? inst.P_G : Mat(0, np), inst.P_h)}};
  Json ts{{"first_stage", first}, {"scenarios", scen}, {"ambiguity", amb}};
  if (inst.eta_lower) ts["eta_lower"] = num(*inst.eta_lower);
  return Json{{"two_stage", ts}};
}

TwoStageInstance two_stage_from_json(const Json& root) {
  const Json& j = field(root, "two_stage", "file");
  TwoStageInstance inst;
  const Json& first = field(j, "first_stage", "two_stage");
  inst.x_vars = vars_from(field(first, "variables", "first_stage"), "first_stage");
  const int nx = inst.num_x();
  inst.c = vec_from(field(first, "c", "first_stage"), "first_stage.c", nx);
  Mat G;
  Vec h;
  rows_from(opt(first, "linear"), nx, "first_stage", inst.A, inst.b, G, h);
  if (G.rows() > 0) throw ModelError("first_stage: equality rows are not supported");
  std::vector<std::string> ignore;
  constraints_from(opt(first, "convex"), nx, "first_stage", inst.constraints, ignore);
  for (const auto& sj : field(j, "scenarios", "two_stage")) {
    Scenario s;
    s.name = sj.value("name", "w" + std::to_string(inst.scenarios.size() + 1));
    s.y_vars = vars_from(field(sj, "variables", s.name), s.name);
    const int n = nx + static_cast<int>(s.y_vars.size());
    s.q = vec_from(field(sj, "q", s.name), s.name + ".q", static_cast<int>(s.y_vars.size()));
    rows_from(opt(sj, "linear"), n, s.name, s.A, s.b, G, h);
    if (G.rows() > 0) throw ModelError(s.name + ": equality rows are not supported");
    constraints_from(opt(sj, "convex"), n, s.name, s.constraints, s.constraint_names);
    inst.scenarios.push_back(std::move(s));
  }
  const int np = inst.num_scenarios();
  if (j.contains("ambiguity")) rows_from(opt(j["ambiguity"], "linear"), np, "ambiguity", inst.P_A, inst.P_b, inst.P_G, inst.P_h);
  else rows_from(Json(), np, "ambiguity", inst.P_A, inst.P_b, inst.P_G, inst.P_h);
  if (j.contains("eta_lower")) inst.eta_lower = get_num(j["eta_lower"], "eta_lower");
  inst.validate();
  return inst;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ModelError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace micp
