#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace micp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class VarKind { Binary, Integer, Continuous };

const char* to_string(VarKind k);
VarKind var_kind_from_string(const std::string& s);

struct VariableSpec {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = 0.0;

  bool is_integer() const { return kind != VarKind::Continuous; }
};

enum class AtomKind {
  Affine,        // a.x + b
  Softplus,      // log(1 + exp(a.x + b))
  LogSumExp,     // log sum_k exp(A_k.x + b_k)
  Power,         // |a.x + b|^p, p >= 1
  SquaredNorm,   // ||Ax + b||^2
  Norm,          // ||Ax + b||
  Sum            // constant + sum_k w_k f_k, w_k >= 0
};

const char* to_string(AtomKind k);
AtomKind atom_kind_from_string(const std::string& s);

/**
 * @brief Convex function over a fixed-length variable vector, built from a
 * closed set of atoms. Cheap to copy; nodes are shared and immutable.
 */
class ConvexExpr {
 public:
  struct Term;

  ConvexExpr();

  static ConvexExpr affine(Vec a, double b);
  static ConvexExpr softplus(Vec a, double b);
  static ConvexExpr log_sum_exp(Mat A, Vec b);
  static ConvexExpr power(Vec a, double b, double p);
  static ConvexExpr squared_norm(Mat A, Vec b);
  static ConvexExpr norm(Mat A, Vec b);
  static ConvexExpr sum(std::vector<Term> terms, double constant = 0.0);

  AtomKind kind() const;
  int dim() const;

  // Inner affine data. Scalar atoms store a single row in A.
  const Mat& A() const;
  const Vec& b() const;
  double exponent() const;
  const std::vector<Term>& terms() const;
  double constant() const;

  double value(const Vec& x) const;
  /// Value and one element of the subdifferential. The norm atom returns
  /// zero at its kink, the power atom (p = 1) likewise.
  double value_and_subgradient(const Vec& x, Vec& g) const;
  /// Accumulates w * Hessian into H (n x n). Nonsmooth points get a
  /// regularized curvature.
  void add_hessian(const Vec& x, double w, Mat& H) const;

  bool differentiable() const;
  /// Variables with a nonzero coefficient somewhere in the tree.
  std::vector<bool> support() const;
  bool depends_on_any(const std::vector<bool>& mask) const;

  /// Same function on a larger vector: coefficient j moves to index map[j].
  ConvexExpr embed(const std::vector<int>& map, int new_dim) const;
  /// Fix the variables flagged in `fixed` at `values`, folding them into
  /// constants. Dimension is unchanged.
  ConvexExpr substitute(const std::vector<bool>& fixed, const Vec& values) const;

 private:
  struct Node;
  explicit ConvexExpr(std::shared_ptr<const Node> n);
  std::shared_ptr<const Node> node_;
};

struct ConvexExpr::Term {
  double weight = 1.0;
  ConvexExpr expr;
};

/// Linear objective with an optional convex part (g_0) still to be
/// epigraph-reformulated.
struct Objective {
  Vec linear;
  double constant = 0.0;
  std::optional<ConvexExpr> convex;
};

struct ModelInstance {
  std::vector<VariableSpec> vars;
  Objective objective;
  Mat A;  // A x <= b
  Vec b;
  Mat G;  // G x = h
  Vec h;
  std::vector<ConvexExpr> constraints;  // c_i(x) <= 0
  std::vector<std::string> constraint_names;
  // First-stage (x) block for the decomposition algorithms. Empty means
  // "no designated block".
  std::vector<bool> first_stage;

  int num_vars() const { return static_cast<int>(vars.size()); }
  int num_rows() const { return static_cast<int>(A.rows()); }
  Vec lower() const;
  Vec upper() const;
  std::vector<bool> integer_mask() const;
  std::string constraint_name(int i) const;

  /// Throws ModelError describing the first inconsistency.
  void validate() const;
};

/// Creates an empty model with n variables and zero linear objective.
ModelInstance make_model(std::vector<VariableSpec> vars);
void add_row(ModelInstance& m, const Vec& a, double rhs);
void add_equality(ModelInstance& m, const Vec& g, double rhs);

/// Objective value c.x + constant (+ g_0 if still present).
double objective_value(const ModelInstance& m, const Vec& x);
/// max(0, violation) over rows, equalities, bounds and convex constraints.
double max_violation(const ModelInstance& m, const Vec& x);

ModelInstance epigraph_reformulate(const ModelInstance& model);

/// Valid lower/upper bounds for a convex expression over a box: the upper
/// bound is the maximum over corners of its support, the lower bound the
/// best linearization bound from the corners and the center.
std::pair<double, double> expr_bounds_over_box(const ConvexExpr& e, const Vec& lo, const Vec& hi);

struct ConstraintFlags {
  bool differentiable = false;
  bool separable = false;
  bool assumption2 = false;
};

struct StructureReport {
  std::vector<ConstraintFlags> constraints;
  std::vector<std::string> warnings;
  std::optional<bool> assumption1;  // filled by check_assumption1 on request
  bool all_assumption2() const;
};

/// x block = model.first_stage if given, else all binary variables.
StructureReport check_assumptions(const ModelInstance& model);

std::vector<bool> first_stage_mask(const ModelInstance& model);

}  // namespace micp
