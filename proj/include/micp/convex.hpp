#pragma once

#include "micp/cut.hpp"
#include "micp/model.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace micp {

class AssumptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// min c.x (+ 0.5 ||x - target||^2)  s.t.  A x <= b, G x = h, g_i(x) <= 0,
/// lower <= x <= upper, x_k = v_k for each pin.
struct ConvexProgram {
  Vec c;
  std::optional<Vec> target;
  Mat A;
  Vec b;
  Mat G;
  Vec h;
  std::vector<ConvexExpr> constraints;
  std::vector<std::string> names;
  Vec lower;
  Vec upper;
  std::vector<std::pair<int, double>> pins;

  int num_vars() const { return static_cast<int>(lower.size()); }
  void validate() const;
};

/// Continuous relaxation data of a model: rows, convex constraints and box.
ConvexProgram program_from_model(const ModelInstance& m);
/// Only the convex constraints and the box (the set C intersected with the box).
ConvexProgram convex_set_of(const ModelInstance& m);

enum class ConvexStatus { Optimal, Infeasible, NumericalFailure };
const char* to_string(ConvexStatus s);

struct KktCertificate {
  ConvexStatus status = ConvexStatus::NumericalFailure;
  Vec x;
  double objective = 0.0;
  Vec lambda_convex;  // >= 0
  Vec lambda_le;      // >= 0
  Vec nu_eq;          // free
  Vec nu_pin;         // free, one per pin
  Vec z_lower;        // >= 0
  Vec z_upper;        // >= 0
  Vec constraint_values;
  double stationarity = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0;
  double min_violation = 0.0;  // phase-1 optimum when infeasible
  int newton_steps = 0;

  bool optimal() const { return status == ConvexStatus::Optimal; }
  /// Indices of convex constraints with value >= -activity.
  std::vector<int> active(double activity = 1e-6) const;
  bool on_boundary(double activity = 1e-6) const { return !active(activity).empty(); }
};

struct ConvexOptions {
  double tol = 1e-8;
  double feasibility_tol = 1e-7;  // phase-1 optimum above this means infeasible
  int max_newton = 2000;
};

KktCertificate convex_solve(const ConvexProgram& program, const ConvexOptions& opts = {});

struct Projection {
  ConvexStatus status = ConvexStatus::NumericalFailure;
  Vec z;
  double distance = 0.0;
  KktCertificate certificate;
};

/// Euclidean projection onto the feasible set of `set` (its objective is ignored).
Projection project(const Vec& point, const ConvexProgram& set, const ConvexOptions& opts = {});

/// (x - z).w <= (x - z).z
LinearCut separation_cut(const Vec& x, const Vec& z, double tol = 1e-12);

/// The separating hyperplane written as the multiplier-weighted sum of
/// constraint linearizations at the projection. Same normal as
/// separation_cut up to KKT residual, but valid by convexity alone.
LinearCut projection_cut(const ConvexProgram& set, const Projection& proj);

struct ConeSet {
  enum class Kind { Convex, Halfspaces, Affine };
  Kind kind = Kind::Convex;
  std::vector<ConvexExpr> constraints;
  Mat A;  // rows a.x <= b (Halfspaces) or a.x = b (Affine)
  Vec b;
};

struct NormalConeDecomposition {
  std::vector<Vec> parts;          // v_k
  std::vector<Vec> coefficients;   // generator weights per set
  double residual = 0.0;
  bool ok = false;
};

/// Splits `target` into v_k in N_{S_k}(point). Throws std::runtime_error
/// ("decomposition-failure") when the residual exceeds tol.
NormalConeDecomposition decompose_normal_cone(const Vec& target, const Vec& point, const std::vector<ConeSet>& sets,
                                              double activity = 1e-6, double tol = 1e-8);

enum class SupportMode { Plain, Parametric };

/**
 * Supporting inequalities at a boundary KKT point: one linearization per
 * active convex constraint; in parametric mode also one row for the normal
 * cone of the linear/box part restricted to the non-parameter block.
 * `param_mask` flags the parameter (x) block in parametric mode.
 */
std::vector<LinearCut> supporting_inequalities(const ConvexProgram& program, const KktCertificate& cert,
                                               SupportMode mode, const std::vector<bool>& param_mask = {},
                                               double activity = 1e-6);

/// LP {min c.x : rows, pins, box, cuts} reproduces the convex optimum.
bool lp_equivalence_check(const ConvexProgram& program, const KktCertificate& cert, const std::vector<LinearCut>& cuts,
                          double tol = 1e-6);

/// Lawson-Hanson nonnegative least squares; columns flagged free are
/// unrestricted in sign.
Vec nnls(const Mat& C, const Vec& d, const std::vector<bool>& free_cols = {});

}  // namespace micp
