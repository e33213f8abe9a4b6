#include "micp/convex.hpp"

#include <algorithm>
#include <cmath>

namespace micp {

namespace {

Vec least_squares(const Mat& C, const Vec& d) {
  if (C.cols() == 0) return Vec::Zero(0);
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(C);
  cod.setThreshold(1e-12);
  return cod.solve(d);
}

}  // namespace

Vec nnls(const Mat& C0, const Vec& d, const std::vector<bool>& free_cols) {
  // Free columns are split into a +/- pair and recombined at the end.
  const int n0 = static_cast<int>(C0.cols());
  std::vector<int> origin;
  std::vector<double> sign;
  for (int j = 0; j < n0; ++j) {
    origin.push_back(j);
    sign.push_back(1.0);
    if (j < static_cast<int>(free_cols.size()) && free_cols[j]) {
      origin.push_back(j);
      sign.push_back(-1.0);
    }
  }
  const int n = static_cast<int>(origin.size());
  Mat C(C0.rows(), n);
  for (int k = 0; k < n; ++k) C.col(k) = sign[k] * C0.col(origin[k]);

  Vec x = Vec::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 1e-12 * (1.0 + (C.size() ? C.cwiseAbs().maxCoeff() : 0.0)) * (1.0 + d.cwiseAbs().maxCoeff());
  for (int outer = 0; outer < 3 * n + 10; ++outer) {
    Vec w = C.transpose() * (d - C * x);
    int j = -1;
    double best = tol;
    for (int k = 0; k < n; ++k)
      if (!passive[k] && w[k] > best) {
        best = w[k];
        j = k;
      }
    if (j < 0) break;
    passive[j] = true;
    for (int inner = 0; inner < 3 * n + 10; ++inner) {
      std::vector<int> P;
      for (int k = 0; k < n; ++k)
        if (passive[k]) P.push_back(k);
      Mat CP(C.rows(), static_cast<int>(P.size()));
      for (size_t k = 0; k < P.size(); ++k) CP.col(static_cast<int>(k)) = C.col(P[k]);
      Vec sP = least_squares(CP, d);
      bool positive = true;
      for (int k = 0; k < sP.size(); ++k)
        if (sP[k] <= 0.0) positive = false;
      if (positive) {
        x.setZero();
        for (size_t k = 0; k < P.size(); ++k) x[P[k]] = sP[static_cast<int>(k)];
        break;
      }
      double alpha = 1.0;
      for (size_t k = 0; k < P.size(); ++k) {
        const double s = sP[static_cast<int>(k)];
        if (s <= 0.0) {
          const double xk = x[P[k]];
          const double a = xk / (xk - s);
          alpha = std::min(alpha, a);
        }
      }
      for (size_t k = 0; k < P.size(); ++k) x[P[k]] += alpha * (sP[static_cast<int>(k)] - x[P[k]]);
      for (int k = 0; k < n; ++k)
        if (passive[k] && x[k] <= 1e-15) {
          passive[k] = false;
          x[k] = 0.0;
        }
    }
  }
  Vec out = Vec::Zero(n0);
  for (int k = 0; k < n; ++k) out[origin[k]] += sign[k] * x[k];
  return out;
}

}  // namespace micp
