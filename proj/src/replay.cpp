#include "micp/replay.hpp"

#include "micp/instances.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace micp {

namespace {

std::string fmt(const Vec& v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << "[";
  for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}

std::string fmt_cut(const Vec& coef, double rhs) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  for (int i = 0; i < coef.size(); ++i) os << (i ? " + " : "") << coef[i] << " y" << (i + 1);
  os << " >= " << rhs;
  return os.str();
}

std::string fmt_benders(const BendersCut& c) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << "eta >= " << c.intercept;
  for (int i = 0; i < c.slope.size(); ++i) os << (c.slope[i] < 0 ? " - " : " + ") << std::abs(c.slope[i]) << " x" << (i + 1);
  return os.str();
}

bool close(const Vec& a, const Vec& b, double tol) {
  return a.size() == b.size() && (a - b).cwiseAbs().maxCoeff() <= tol;
}

// coef.z <= rhs over (x, y) with x fixed -> (-coef_y).y >= -(rhs - coef_x.x)
void to_ge_form(const LinearCut& c, const Vec& x, Vec& coef, double& rhs) {
  const int nx = static_cast<int>(x.size());
  coef = -c.coef.tail(c.coef.size() - nx);
  rhs = -(c.rhs - c.coef.head(nx).dot(x));
}

nlohmann::json vj(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

bool ReplayReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return !checks.empty();
}

ReplayReport replay_worked_example(DecompositionOptions opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const TwoStageInstance inst = worked_example();
  opts.master.milp.mode = MilpMode::CuttingPlaneParametric;
  opts.sub.seed_root_cuts = true;
  ReplayReport r;
  r.result = dr_solve(inst, opts);
  if (!r.result.master_relaxations.empty()) r.master_relaxation = r.result.master_relaxations[0].head(inst.num_x());
  if (!r.result.outer.empty()) {
    r.first_x = r.result.outer[0].x;
    r.aggregated = r.result.outer[0].cut;
    const std::vector<int> x_idx{0, 1};
    for (int w = 0; w < inst.num_scenarios(); ++w) {
      auto pr = parametric_solve(scenario_model(inst, w), x_idx, r.first_x, opts.sub);
      const auto& cert = pr.certificate;
      r.scenario_relaxation.push_back(cert.root_point ? cert.root_point->tail(2) : Vec());
      Vec coef;
      double rhs = 0.0;
      bool tangent = false;
      for (const auto& c : cert.cuts) {
        if (c.provenance == CutProvenance::Supporting && c.iteration == 0 && !tangent) {
          to_ge_form(c, r.first_x, coef, rhs);
          r.tangent_coef.push_back(coef);
          r.tangent_rhs.push_back(rhs);
          tangent = true;
        }
        if (w == 0 && c.provenance == CutProvenance::DisjunctiveCglp) {
          to_ge_form(c, r.first_x, coef, rhs);
          r.integrality_coef.push_back(coef);
          r.integrality_rhs.push_back(rhs);
        }
      }
      if (!tangent) {
        r.tangent_coef.push_back(Vec());
        r.tangent_rhs.push_back(0.0);
      }
      r.scenario_cuts.push_back(benders_cut_from_terminal_lp(pr.terminal, r.first_x));
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  auto check = [&](const std::string& name, bool ok, const std::string& expected, const std::string& observed) {
    r.checks.push_back({name, ok, expected, observed});
  };
  check("master relaxation", close(r.master_relaxation, Vec{{2.0 / 3.0, 0.0}}, 1e-6), "[0.6667, 0.0000] +-1e-6",
        fmt(r.master_relaxation));
  check("first-stage point", close(r.first_x, Vec{{1.0, 0.0}}, 1e-9), "[1, 0]", fmt(r.first_x));
  const Vec s1 = r.scenario_relaxation.empty() ? Vec() : r.scenario_relaxation[0];
  check("scenario-1 relaxation", close(s1, Vec{{0.5, 0.48}}, 1e-2), "[0.50, 0.48] +-1e-2", fmt(s1));
  Vec t1 = Vec::Zero(3);
  if (!r.tangent_coef.empty() && r.tangent_coef[0].size() == 2) t1 << r.tangent_coef[0], r.tangent_rhs[0];
  check("tangent cut", close(t1, Vec{{1.272, 0.586, 0.918}}, 1e-2), "(1.272, 0.586, 0.918) +-1e-2", fmt(t1));
  bool found = false;
  std::string seen;
  for (size_t k = 0; k < r.integrality_coef.size(); ++k) {
    const double s = r.integrality_coef[k].cwiseAbs().maxCoeff();
    if (s <= 0) continue;
    Vec c(3);
    c << r.integrality_coef[k] / s, r.integrality_rhs[k] / s;
    seen += (seen.empty() ? "" : " ; ") + fmt_cut(c.head(2), c[2]);
    found = found || close(c, Vec{{1.0, 1.0, 1.0}}, 1e-6);
  }
  check("integrality cut", found, "y11 + y12 >= 1", seen.empty() ? "none" : seen);
  const std::vector<std::pair<Vec, double>> want{{Vec{{-0.5, -0.5}}, 1.0}, {Vec{{-1.0, -1.0}}, 2.0}};
  for (size_t w = 0; w < want.size(); ++w) {
    bool ok = w < r.scenario_cuts.size() && close(r.scenario_cuts[w].slope, want[w].first, 1e-6) &&
              std::abs(r.scenario_cuts[w].intercept - want[w].second) <= 1e-6;
    BendersCut ref{want[w].first, want[w].second};
    check("benders cut scenario " + std::to_string(w + 1), ok, fmt_benders(ref) + " +-1e-6",
          w < r.scenario_cuts.size() ? fmt_benders(r.scenario_cuts[w]) : "missing");
  }
  BendersCut agg_ref{Vec{{-0.75, -1.0}}, 1.5};
  check("aggregated cut",
        r.aggregated.slope.size() == 2 && close(r.aggregated.slope, agg_ref.slope, 1e-6) &&
            std::abs(r.aggregated.intercept - agg_ref.intercept) <= 1e-6,
        fmt_benders(agg_ref) + " +-1e-6", r.aggregated.slope.size() ? fmt_benders(r.aggregated) : "missing");
  const auto& res = r.result;
  const bool term = res.status == SolveStatus::Optimal && res.termination == "revisit" &&
                    close(res.x, Vec{{1.0, 0.0}}, 1e-9) && std::abs(res.objective - 1.75) <= 1e-6;
  std::ostringstream obs;
  obs << "x=" << fmt(res.x) << " obj=" << res.objective << " by " << res.termination << " after "
      << res.iterations << " outer iterations";
  check("termination", term, "x=[1, 0] obj=1.75 on master repeat", obs.str());
  std::ostringstream secs;
  secs << r.seconds << " s";
  check("runtime", r.seconds < 5.0, "< 5 s", secs.str());
  return r;
}

void print_replay(std::ostream& os, const ReplayReport& r) {
  os << "master relaxation     " << fmt(r.master_relaxation) << "\n";
  os << "first-stage x         " << fmt(r.first_x) << "\n";
  for (size_t w = 0; w < r.scenario_relaxation.size(); ++w) {
    os << "scenario " << w + 1 << " relaxation " << fmt(r.scenario_relaxation[w]) << "\n";
    if (w < r.tangent_coef.size() && r.tangent_coef[w].size())
      os << "scenario " << w + 1 << " tangent    " << fmt_cut(r.tangent_coef[w], r.tangent_rhs[w]) << "\n";
  }
  for (size_t k = 0; k < r.integrality_coef.size(); ++k)
    os << "scenario 1 integrality " << fmt_cut(r.integrality_coef[k], r.integrality_rhs[k]) << "\n";
  for (size_t w = 0; w < r.scenario_cuts.size(); ++w)
    os << "benders scenario " << w + 1 << "    " << fmt_benders(r.scenario_cuts[w]) << "\n";
  if (r.aggregated.slope.size()) os << "aggregated            " << fmt_benders(r.aggregated) << "\n";
  for (const auto& o : r.result.outer)
    os << "outer " << o.m << ": x=" << fmt(o.x) << " L=" << o.L << " U=" << o.U << (o.revisit ? " (repeat)" : "")
       << "\n";
  os << "termination           " << r.result.termination << ", x=" << fmt(r.result.x) << ", obj=" << r.result.objective
     << "\n";
  for (const auto& c : r.checks)
    os << (c.passed ? "PASS " : "FAIL ") << c.name << ": expected " << c.expected << ", got " << c.observed << "\n";
}

void write_replay_trace(std::ostream& os, const ReplayReport& r) {
  using nlohmann::json;
  os << json{{"step", "master-relaxation"}, {"point", vj(r.master_relaxation)}}.dump() << "\n";
  os << json{{"step", "first-stage"}, {"x", vj(r.first_x)}}.dump() << "\n";
  for (size_t w = 0; w < r.scenario_relaxation.size(); ++w) {
    os << json{{"step", "scenario-relaxation"}, {"scenario", w + 1}, {"point", vj(r.scenario_relaxation[w])}}.dump()
       << "\n";
    if (w < r.tangent_coef.size() && r.tangent_coef[w].size()) {
      Vec row(3);
      row << r.tangent_coef[w], r.tangent_rhs[w];
      os << json{{"step", "tangent-cut"}, {"scenario", w + 1}, {"sense", ">="}, {"row", vj(row)}}.dump() << "\n";
    }
  }
  for (size_t k = 0; k < r.integrality_coef.size(); ++k) {
    Vec row(3);
    row << r.integrality_coef[k], r.integrality_rhs[k];
    os << json{{"step", "integrality-cut"}, {"scenario", 1}, {"sense", ">="}, {"row", vj(row)}}.dump() << "\n";
  }
  for (size_t w = 0; w < r.scenario_cuts.size(); ++w)
    os << json{{"step", "benders-cut"},
               {"scenario", w + 1},
               {"slope", vj(r.scenario_cuts[w].slope)},
               {"intercept", r.scenario_cuts[w].intercept}}
              .dump()
       << "\n";
  if (r.aggregated.slope.size())
    os << json{{"step", "aggregated-cut"}, {"slope", vj(r.aggregated.slope)}, {"intercept", r.aggregated.intercept}}
              .dump()
       << "\n";
  os << json{{"step", "termination"},
             {"reason", r.result.termination},
             {"x", vj(r.result.x)},
             {"objective", r.result.objective}}
            .dump()
     << "\n";
  for (const auto& c : r.checks)
    os << json{{"step", "check"}, {"name", c.name}, {"passed", c.passed}, {"observed", c.observed}}.dump() << "\n";
}

}  // namespace micp
