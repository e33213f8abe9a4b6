#include "micp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace micp {

struct ConvexExpr::Node {
  AtomKind kind = AtomKind::Affine;
  int n = 0;
  Mat A;
  Vec b;
  double p = 1.0;
  std::vector<Term> terms;
  double constant = 0.0;
};

namespace {

// log(1 + e^u) without overflow.
double softplus_fn(double u) { return u > 0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

double sigmoid(double u) {
  if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
  double e = std::exp(u);
  return e / (1.0 + e);
}

constexpr double kKink = 1e-12;

}  // namespace

const char* to_string(AtomKind k) {
  switch (k) {
    case AtomKind::Affine: return "affine";
    case AtomKind::Softplus: return "softplus";
    case AtomKind::LogSumExp: return "logsumexp";
    case AtomKind::Power: return "power";
    case AtomKind::SquaredNorm: return "sqnorm";
    case AtomKind::Norm: return "norm";
    case AtomKind::Sum: return "sum";
  }
  return "?";
}

AtomKind atom_kind_from_string(const std::string& s) {
  for (AtomKind k : {AtomKind::Affine, AtomKind::Softplus, AtomKind::LogSumExp, AtomKind::Power,
                     AtomKind::SquaredNorm, AtomKind::Norm, AtomKind::Sum})
    if (s == to_string(k)) return k;
  throw ModelError("unknown atom kind '" + s + "'");
}

ConvexExpr::ConvexExpr() : ConvexExpr(affine(Vec::Zero(0), 0.0)) {}

ConvexExpr::ConvexExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

ConvexExpr ConvexExpr::affine(Vec a, double b) {
  auto n = std::make_shared<Node>();
  n->kind = AtomKind::Affine;
  n->n = static_cast<int>(a.size());
  n->A = a.transpose();
  n->b = Vec::Constant(1, b);
  return ConvexExpr(n);
}

ConvexExpr ConvexExpr::softplus(Vec a, double b) {
  auto n = std::make_shared<Node>();
  n->kind = AtomKind::Softplus;
  n->n = static_cast<int>(a.size());
  n->A = a.transpose();
  n->b = Vec::Constant(1, b);
  return ConvexExpr(n);
}

ConvexExpr ConvexExpr::log_sum_exp(Mat A, Vec b) {
  if (A.rows() != b.size() || A.rows() == 0) throw ModelError("logsumexp: A and b disagree");
  auto n = std::make_shared<Node>();
  n->kind = AtomKind::LogSumExp;
  n->n = static_cast<int>(A.cols());
  n->A = std::move(A);
  n->b = std::move(b);
  return ConvexExpr(n);
}

ConvexExpr ConvexExpr::power(Vec a, double b, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ModelError("power atom needs a finite exponent p >= 1");
  auto n = std::make_shared<Node>();
  n->kind = AtomKind::Power;
  n->n = static_cast<int>(a.size());
  n->A = a.transpose();
  n->b = Vec::Constant(1, b);
  n->p = p;
  return ConvexExpr(n);
}

ConvexExpr ConvexExpr::squared_norm(Mat A, Vec b) {
  if (A.rows() != b.size()) throw ModelError("sqnorm: A and b disagree");
  auto n = std::make_shared<Node>();
  n->kind = AtomKind::SquaredNorm;
  n->n = static_cast<int>(A.cols());
  n->A = std::move(A);
  n->b = std::move(b);
  return ConvexExpr(n);
}

ConvexExpr ConvexExpr::norm(Mat A, Vec b) {
  if (A.rows() != b.size()) throw ModelError("norm: A and b disagree");
  auto n = std::make_shared<Node>();
  n->kind = AtomKind::Norm;
  n->n = static_cast<int>(A.cols());
  n->A = std::move(A);
  n->b = std::move(b);
  return ConvexExpr(n);
}

ConvexExpr ConvexExpr::sum(std::vector<Term> terms, double constant) {
  auto n = std::make_shared<Node>();
  n->kind = AtomKind::Sum;
  n->n = terms.empty() ? 0 : terms.front().expr.dim();
  for (const auto& t : terms) {
    if (!(t.weight >= 0.0) || !std::isfinite(t.weight)) throw ModelError("sum atom needs finite nonnegative weights");
    if (t.expr.dim() != n->n) throw ModelError("sum atom terms have different dimensions");
  }
  n->terms = std::move(terms);
  n->constant = constant;
  return ConvexExpr(n);
}

AtomKind ConvexExpr::kind() const { return node_->kind; }
int ConvexExpr::dim() const { return node_->n; }
const Mat& ConvexExpr::A() const { return node_->A; }
const Vec& ConvexExpr::b() const { return node_->b; }
double ConvexExpr::exponent() const { return node_->p; }
const std::vector<ConvexExpr::Term>& ConvexExpr::terms() const { return node_->terms; }
double ConvexExpr::constant() const { return node_->constant; }

double ConvexExpr::value(const Vec& x) const {
  const Node& nd = *node_;
  if (x.size() != nd.n) throw ModelError("expression dimension mismatch");
  switch (nd.kind) {
    case AtomKind::Affine: return nd.A.row(0).dot(x) + nd.b[0];
    case AtomKind::Softplus: return softplus_fn(nd.A.row(0).dot(x) + nd.b[0]);
    case AtomKind::LogSumExp: {
      Vec u = nd.A * x + nd.b;
      double m = u.maxCoeff();
      return m + std::log((u.array() - m).exp().sum());
    }
    case AtomKind::Power: return std::pow(std::abs(nd.A.row(0).dot(x) + nd.b[0]), nd.p);
    case AtomKind::SquaredNorm: return (nd.A * x + nd.b).squaredNorm();
    case AtomKind::Norm: return (nd.A * x + nd.b).norm();
    case AtomKind::Sum: {
      double v = nd.constant;
      for (const auto& t : nd.terms) v += t.weight * t.expr.value(x);
      return v;
    }
  }
  return 0.0;
}

double ConvexExpr::value_and_subgradient(const Vec& x, Vec& g) const {
  const Node& nd = *node_;
  if (x.size() != nd.n) throw ModelError("expression dimension mismatch");
  switch (nd.kind) {
    case AtomKind::Affine:
      g = nd.A.row(0).transpose();
      return nd.A.row(0).dot(x) + nd.b[0];
    case AtomKind::Softplus: {
      double u = nd.A.row(0).dot(x) + nd.b[0];
      g = sigmoid(u) * nd.A.row(0).transpose();
      return softplus_fn(u);
    }
    case AtomKind::LogSumExp: {
      Vec u = nd.A * x + nd.b;
      double m = u.maxCoeff();
      Vec w = (u.array() - m).exp();
      double s = w.sum();
      w /= s;
      g = nd.A.transpose() * w;
      return m + std::log(s);
    }
    case AtomKind::Power: {
      double u = nd.A.row(0).dot(x) + nd.b[0];
      double au = std::abs(u);
      double d = (au == 0.0) ? 0.0 : nd.p * std::pow(au, nd.p - 1.0) * (u > 0 ? 1.0 : -1.0);
      g = d * nd.A.row(0).transpose();
      return std::pow(au, nd.p);
    }
    case AtomKind::SquaredNorm: {
      Vec r = nd.A * x + nd.b;
      g = 2.0 * nd.A.transpose() * r;
      return r.squaredNorm();
    }
    case AtomKind::Norm: {
      Vec r = nd.A * x + nd.b;
      double v = r.norm();
      if (v > 0.0)
        g = nd.A.transpose() * (r / v);
      else
        g = Vec::Zero(nd.n);
      return v;
    }
    case AtomKind::Sum: {
      g = Vec::Zero(nd.n);
      double v = nd.constant;
      Vec gt;
      for (const auto& t : nd.terms) {
        v += t.weight * t.expr.value_and_subgradient(x, gt);
        g += t.weight * gt;
      }
      return v;
    }
  }
  return 0.0;
}

void ConvexExpr::add_hessian(const Vec& x, double w, Mat& H) const {
  const Node& nd = *node_;
  switch (nd.kind) {
    case AtomKind::Affine: return;
    case AtomKind::Softplus: {
      double s = sigmoid(nd.A.row(0).dot(x) + nd.b[0]);
      H.noalias() += (w * s * (1.0 - s)) * nd.A.transpose() * nd.A;
      return;
    }
    case AtomKind::LogSumExp: {
      Vec u = nd.A * x + nd.b;
      Vec pi = (u.array() - u.maxCoeff()).exp();
      pi /= pi.sum();
      Vec Ap = nd.A.transpose() * pi;
      H.noalias() += w * (nd.A.transpose() * pi.asDiagonal() * nd.A);
      H.noalias() -= w * Ap * Ap.transpose();
      return;
    }
    case AtomKind::Power: {
      if (nd.p == 1.0) return;
      double au = std::max(std::abs(nd.A.row(0).dot(x) + nd.b[0]), 1e-8);
      double c = nd.p * (nd.p - 1.0) * std::pow(au, nd.p - 2.0);
      H.noalias() += (w * c) * nd.A.transpose() * nd.A;
      return;
    }
    case AtomKind::SquaredNorm:
      H.noalias() += (2.0 * w) * nd.A.transpose() * nd.A;
      return;
    case AtomKind::Norm: {
      Vec r = nd.A * x + nd.b;
      double v = std::max(r.norm(), kKink);
      Mat P = Mat::Identity(r.size(), r.size()) - (r * r.transpose()) / (v * v);
      H.noalias() += (w / v) * nd.A.transpose() * P * nd.A;
      return;
    }
    case AtomKind::Sum:
      for (const auto& t : nd.terms) t.expr.add_hessian(x, w * t.weight, H);
      return;
  }
}

bool ConvexExpr::differentiable() const {
  const Node& nd = *node_;
  switch (nd.kind) {
    case AtomKind::Norm: return nd.A.rows() == 0 || nd.A.isZero(0.0);
    case AtomKind::Power: return nd.p > 1.0 || nd.A.isZero(0.0);
    case AtomKind::Sum:
      for (const auto& t : nd.terms)
        if (t.weight > 0.0 && !t.expr.differentiable()) return false;
      return true;
    default: return true;
  }
}

std::vector<bool> ConvexExpr::support() const {
  const Node& nd = *node_;
  std::vector<bool> s(nd.n, false);
  if (nd.kind == AtomKind::Sum) {
    for (const auto& t : nd.terms) {
      if (t.weight == 0.0) continue;
      auto st = t.expr.support();
      for (int j = 0; j < nd.n; ++j) s[j] = s[j] || st[j];
    }
    return s;
  }
  for (int j = 0; j < nd.n; ++j) s[j] = nd.A.rows() > 0 && !nd.A.col(j).isZero(0.0);
  return s;
}

bool ConvexExpr::depends_on_any(const std::vector<bool>& mask) const {
  auto s = support();
  for (size_t j = 0; j < s.size() && j < mask.size(); ++j)
    if (s[j] && mask[j]) return true;
  return false;
}

ConvexExpr ConvexExpr::embed(const std::vector<int>& map, int new_dim) const {
  const Node& nd = *node_;
  if (static_cast<int>(map.size()) != nd.n) throw ModelError("embed: map size mismatch");
  auto out = std::make_shared<Node>(nd);
  out->n = new_dim;
  if (nd.kind == AtomKind::Sum) {
    for (auto& t : out->terms) t.expr = t.expr.embed(map, new_dim);
    return ConvexExpr(out);
  }
  out->A = Mat::Zero(nd.A.rows(), new_dim);
  for (int j = 0; j < nd.n; ++j) out->A.col(map[j]) += nd.A.col(j);
  return ConvexExpr(out);
}

ConvexExpr ConvexExpr::substitute(const std::vector<bool>& fixed, const Vec& values) const {
  const Node& nd = *node_;
  auto out = std::make_shared<Node>(nd);
  if (nd.kind == AtomKind::Sum) {
    for (auto& t : out->terms) t.expr = t.expr.substitute(fixed, values);
    return ConvexExpr(out);
  }
  for (int j = 0; j < nd.n; ++j) {
    if (!fixed[j]) continue;
    out->b += out->A.col(j) * values[j];
    out->A.col(j).setZero();
  }
  return ConvexExpr(out);
}

}  // namespace micp
