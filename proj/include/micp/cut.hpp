#pragma once

#include "micp/model.hpp"

#include <string>
#include <vector>

namespace micp {

enum class CutProvenance { Separation, Supporting, DisjunctiveCglp, NoGood, Benders, Aggregated };

const char* to_string(CutProvenance p);

/// coef . z <= rhs over the full variable vector of the model it was built for.
struct LinearCut {
  Vec coef;
  double rhs = 0.0;
  CutProvenance provenance = CutProvenance::Separation;
  int iteration = 0;
  bool parametric_valid = false;

  double violation(const Vec& z) const { return coef.dot(z) - rhs; }
};

/// True when a and b agree coefficient-wise within tol after scaling both to
/// unit infinity norm.
bool same_cut(const LinearCut& a, const LinearCut& b, double tol = 1e-9);

/// Scales so the largest coefficient has magnitude one. Zero cuts untouched.
LinearCut normalized(LinearCut c);

}  // namespace micp
