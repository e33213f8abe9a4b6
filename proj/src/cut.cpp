#include "micp/cut.hpp"

#include <cmath>

namespace micp {

const char* to_string(CutProvenance p) {
  switch (p) {
    case CutProvenance::Separation: return "separation";
    case CutProvenance::Supporting: return "supporting";
    case CutProvenance::DisjunctiveCglp: return "disjunctive-cglp";
    case CutProvenance::NoGood: return "no-good";
    case CutProvenance::Benders: return "benders";
    case CutProvenance::Aggregated: return "aggregated";
  }
  return "?";
}

LinearCut normalized(LinearCut c) {
  const double s = c.coef.size() ? c.coef.cwiseAbs().maxCoeff() : 0.0;
  if (s > 0.0) {
    c.coef /= s;
    c.rhs /= s;
  }
  return c;
}

bool same_cut(const LinearCut& a, const LinearCut& b, double tol) {
  if (a.coef.size() != b.coef.size()) return false;
  LinearCut na = normalized(a), nb = normalized(b);
  return (na.coef - nb.coef).cwiseAbs().maxCoeff() <= tol && std::abs(na.rhs - nb.rhs) <= tol * (1.0 + std::abs(na.rhs));
}

}  // namespace micp
