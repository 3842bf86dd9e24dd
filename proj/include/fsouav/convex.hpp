// Copyright 2026 The fsouav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small convex programming layer: named variables, sparse affine
// expressions, a handful of smooth convex constraint kinds and a primal-dual
// interior-point solver with a sparse KKT system.
//
// Every inequality is handled through a smooth convex function g(x) <= 0:
//
//   linear          a^T x + b <= 0
//   soc             |u| <= r       (|u|^2 - d^2) / 2d   for constant r = d
//                                  |u|^2 / r - r        otherwise, r > 0
//   squared_norm    |u|^2 <= r     |u|^2 - r
//   log_norm        log|u| <= t    1/2 log |u|^2 - t
//   cubic_norm      k|u|^3 <= r    k |u|^3 - r
//
// where u and r are affine in x. log_norm is convex only where the
// variable part of u stays inside the ball set by its constant part; callers
// keep that region feasible through other constraints.

#ifndef FSOUAV_CONVEX_HPP_
#define FSOUAV_CONVEX_HPP_

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fsouav/errors.hpp"

namespace fsouav::convex {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term {
  int index = 0;
  double coeff = 0.0;
};

// Sparse affine form sum(coeff * x[index]) + constant.
struct Affine {
  std::vector<Term> terms;
  double constant = 0.0;

  Affine() = default;
  Affine(double c) : constant(c) {}  // NOLINT(google-explicit-constructor)

  static Affine variable(int index, double coeff = 1.0) {
    Affine a;
    a.terms.push_back({index, coeff});
    return a;
  }

  Affine& add(int index, double coeff) {
    if (coeff != 0.0) terms.push_back({index, coeff});
    return *this;
  }

  Affine& operator+=(const Affine& o) {
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    constant += o.constant;
    return *this;
  }
  Affine& operator-=(const Affine& o) { return *this += o * -1.0; }
  Affine& operator*=(double s) {
    for (auto& t : terms) t.coeff *= s;
    constant *= s;
    return *this;
  }
  friend Affine operator+(Affine a, const Affine& b) { return a += b; }
  friend Affine operator-(Affine a, const Affine& b) { return a -= b; }
  friend Affine operator*(Affine a, double s) { return a *= s; }
  friend Affine operator*(double s, Affine a) { return a *= s; }
  friend Affine operator-(Affine a) { return a *= -1.0; }

  bool is_constant() const {
    return std::all_of(terms.begin(), terms.end(), [](const Term& t) { return t.coeff == 0.0; });
  }

  double eval(const VectorXd& x) const {
    double v = constant;
    for (const auto& t : terms) v += t.coeff * x(t.index);
    return v;
  }
};

struct VariableBlock {
  std::string name;
  int offset = 0;
  int size = 0;
  double lower = -kInf;
  double upper = kInf;
};

class VariableSpace {
 public:
  int add(std::string name, int size = 1, double lower = -kInf, double upper = kInf) {
    if (size < 1) throw Error("variable block '" + name + "' must have positive size");
    if (by_name_.count(name)) throw Error("duplicate variable name '" + name + "'");
    if (lower > upper) throw Error("variable block '" + name + "' has empty bounds");
    VariableBlock b{name, dimension_, size, lower, upper};
    by_name_.emplace(b.name, blocks_.size());
    blocks_.push_back(std::move(b));
    dimension_ += size;
    return blocks_.back().offset;
  }

  int dimension() const { return dimension_; }
  const std::vector<VariableBlock>& blocks() const { return blocks_; }

  const VariableBlock& block(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) throw Error("unknown variable '" + std::string(name) + "'");
    return blocks_[it->second];
  }

  int index(std::string_view name, int i = 0) const {
    const auto& b = block(name);
    if (i < 0 || i >= b.size) throw Error("index out of range for '" + b.name + "'");
    return b.offset + i;
  }

  std::string scalar_name(int idx) const {
    for (const auto& b : blocks_)
      if (idx >= b.offset && idx < b.offset + b.size)
        return b.size == 1 ? b.name : b.name + "[" + std::to_string(idx - b.offset) + "]";
    return "x" + std::to_string(idx);
  }

 private:
  std::vector<VariableBlock> blocks_;
  std::map<std::string, std::size_t> by_name_;
  int dimension_ = 0;
};

enum class ConstraintKind { kLinearEq, kLinearIneq, kSoc, kSquaredNorm, kLogNorm, kCubicNorm };

inline const char* kind_name(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::kLinearEq:
      return "eq";
    case ConstraintKind::kLinearIneq:
      return "le";
    case ConstraintKind::kSoc:
      return "soc";
    case ConstraintKind::kSquaredNorm:
      return "sqnorm";
    case ConstraintKind::kLogNorm:
      return "lognorm";
    case ConstraintKind::kCubicNorm:
      return "cubic";
  }
  return "?";
}

struct Constraint {
  ConstraintKind kind = ConstraintKind::kLinearIneq;
  std::string tag;
  std::vector<Affine> parts;  // u
  Affine rhs;                 // r, t, or the linear form itself
  double kappa = 1.0;         // cubic_norm coefficient
  double scale = 1.0;         // positive multiplier on g, for conditioning only

  // lhs == 0
  static Constraint equal(Affine lhs, std::string tag) {
    Constraint c;
    c.kind = ConstraintKind::kLinearEq;
    c.rhs = std::move(lhs);
    c.tag = std::move(tag);
    return c;
  }
  // rows == 0, counted as one constraint
  static Constraint equal(std::vector<Affine> rows, std::string tag) {
    if (rows.empty()) throw Error("equality '" + tag + "' needs at least one row");
    Constraint c;
    c.kind = ConstraintKind::kLinearEq;
    c.parts = std::move(rows);
    c.tag = std::move(tag);
    return c;
  }
  // lhs <= 0
  static Constraint less_equal(Affine lhs, std::string tag) {
    Constraint c;
    c.kind = ConstraintKind::kLinearIneq;
    c.rhs = std::move(lhs);
    c.tag = std::move(tag);
    return c;
  }
  // |parts| <= rhs
  static Constraint soc(std::vector<Affine> parts, Affine rhs, std::string tag) {
    return make(ConstraintKind::kSoc, std::move(parts), std::move(rhs), std::move(tag));
  }
  // |parts|^2 <= rhs
  static Constraint squared_norm(std::vector<Affine> parts, Affine rhs, std::string tag) {
    return make(ConstraintKind::kSquaredNorm, std::move(parts), std::move(rhs), std::move(tag));
  }
  // log|parts| <= t
  static Constraint log_norm(std::vector<Affine> parts, Affine t, std::string tag) {
    return make(ConstraintKind::kLogNorm, std::move(parts), std::move(t), std::move(tag));
  }
  // kappa |parts|^3 <= rhs
  static Constraint cubic_norm(std::vector<Affine> parts, double kappa, Affine rhs,
                               std::string tag) {
    Constraint c = make(ConstraintKind::kCubicNorm, std::move(parts), std::move(rhs),
                        std::move(tag));
    c.kappa = kappa;
    return c;
  }

  Constraint&& scaled(double s) && {
    if (!(s > 0.0)) throw Error("constraint scale must be positive");
    scale = s;
    return std::move(*this);
  }

  std::vector<Affine> equality_rows() const {
    return parts.empty() ? std::vector<Affine>{rhs} : parts;
  }

  double norm_of_parts(const VectorXd& x) const {
    double q = 0.0;
    for (const auto& p : parts) {
      const double v = p.eval(x);
      q += v * v;
    }
    return std::sqrt(q);
  }

  // Signed violation in the constraint's natural units; <= 0 when satisfied.
  // Equalities report the largest |row|.
  double violation(const VectorXd& x) const {
    switch (kind) {
      case ConstraintKind::kLinearEq: {
        double worst = 0.0;
        for (const auto& r : equality_rows()) worst = std::max(worst, std::abs(r.eval(x)));
        return worst;
      }
      case ConstraintKind::kLinearIneq:
        return rhs.eval(x);
      case ConstraintKind::kSoc:
        return norm_of_parts(x) - rhs.eval(x);
      case ConstraintKind::kSquaredNorm: {
        const double n = norm_of_parts(x);
        return n * n - rhs.eval(x);
      }
      case ConstraintKind::kLogNorm: {
        const double n = norm_of_parts(x);
        return (n > 0.0 ? std::log(n) : -kInf) - rhs.eval(x);
      }
      case ConstraintKind::kCubicNorm: {
        const double n = norm_of_parts(x);
        return kappa * n * n * n - rhs.eval(x);
      }
    }
    return 0.0;
  }

 private:
  static Constraint make(ConstraintKind kind, std::vector<Affine> parts, Affine rhs,
                         std::string tag) {
    if (parts.empty()) throw Error("cone constraint '" + tag + "' needs at least one part");
    Constraint c;
    c.kind = kind;
    c.parts = std::move(parts);
    c.rhs = std::move(rhs);
    c.tag = std::move(tag);
    return c;
  }
};

// f0(x) = linear(x) + sum w (e(x))^2 + sum w |u(x)|, all weights >= 0.
struct Objective {
  struct Square {
    Affine expr;
    double weight = 1.0;
  };
  struct Norm {
    std::vector<Affine> parts;
    double weight = 1.0;
  };

  Affine linear;
  std::vector<Square> squares;
  std::vector<Norm> norms;

  void add_square(Affine e, double w) {
    if (!(w >= 0.0)) throw Error("square weight must be non-negative");
    squares.push_back({std::move(e), w});
  }
  void add_norm(std::vector<Affine> parts, double w) {
    if (!(w >= 0.0)) throw Error("norm weight must be non-negative");
    norms.push_back({std::move(parts), w});
  }

  double eval(const VectorXd& x) const {
    double f = linear.eval(x);
    for (const auto& s : squares) {
      const double v = s.expr.eval(x);
      f += s.weight * v * v;
    }
    for (const auto& n : norms) {
      double q = 0.0;
      for (const auto& p : n.parts) q += p.eval(x) * p.eval(x);
      f += n.weight * std::sqrt(q);
    }
    return f;
  }
};

struct ConvexProgram {
  VariableSpace variables;
  std::vector<Constraint> constraints;
  Objective objective;

  void add(Constraint c) { constraints.push_back(std::move(c)); }

  std::map<std::string, int> tag_census() const {
    std::map<std::string, int> census;
    for (const auto& c : constraints) ++census[c.tag];
    return census;
  }

  void validate() const {
    const int n = variables.dimension();
    auto check = [&](const Affine& a, const std::string& tag) {
      for (const auto& t : a.terms)
        if (t.index < 0 || t.index >= n)
          throw Error("constraint '" + tag + "' references variable " + std::to_string(t.index) +
                      " outside the space");
    };
    for (const auto& c : constraints) {
      check(c.rhs, c.tag);
      for (const auto& p : c.parts) check(p, c.tag);
      if (c.kind == ConstraintKind::kCubicNorm && !(c.kappa > 0.0))
        throw Error("cubic constraint '" + c.tag + "' needs kappa > 0");
    }
    check(objective.linear, "objective");
    for (const auto& s : objective.squares) check(s.expr, "objective");
    for (const auto& nm : objective.norms)
      for (const auto& p : nm.parts) check(p, "objective");
  }
};

namespace detail {

inline void write_affine(std::ostream& os, const Affine& a, const VariableSpace& vars) {
  std::vector<Term> terms = a.terms;
  std::stable_sort(terms.begin(), terms.end(),
                   [](const Term& l, const Term& r) { return l.index < r.index; });
  os << "(";
  bool first = true;
  for (const auto& t : terms) {
    if (t.coeff == 0.0) continue;
    if (!first) os << " ";
    os << (t.coeff < 0 ? "- " : (first ? "" : "+ ")) << std::abs(t.coeff) << "*"
       << vars.scalar_name(t.index);
    first = false;
  }
  if (a.constant != 0.0 || first) {
    if (!first) os << (a.constant < 0 ? " - " : " + ") << std::abs(a.constant);
    else os << a.constant;
  }
  os << ")";
}

}  // namespace detail

// Plain-text canonical form, one constraint per line.
inline void dump(const ConvexProgram& prog, std::ostream& os) {
  os.precision(17);
  os << "variables " << prog.variables.dimension() << "\n";
  for (const auto& b : prog.variables.blocks())
    os << "var " << b.name << " " << b.size << " [" << b.lower << ", " << b.upper << "]\n";
  os << "minimize linear ";
  detail::write_affine(os, prog.objective.linear, prog.variables);
  os << "\n";
  for (const auto& s : prog.objective.squares) {
    os << "minimize square " << s.weight << " ";
    detail::write_affine(os, s.expr, prog.variables);
    os << "\n";
  }
  for (const auto& nm : prog.objective.norms) {
    os << "minimize norm " << nm.weight;
    for (const auto& p : nm.parts) {
      os << " ";
      detail::write_affine(os, p, prog.variables);
    }
    os << "\n";
  }
  for (const auto& c : prog.constraints) {
    os << c.tag << " " << kind_name(c.kind);
    if (c.kind == ConstraintKind::kCubicNorm) os << " kappa=" << c.kappa;
    for (const auto& p : c.parts) {
      os << " ";
      detail::write_affine(os, p, prog.variables);
    }
    os << " | ";
    detail::write_affine(os, c.rhs, prog.variables);
    os << "\n";
  }
}

inline std::string dump(const ConvexProgram& prog) {
  std::ostringstream os;
  dump(prog, os);
  return os.str();
}

struct Violation {
  std::string tag;
  int index = 0;  // position in the constraint list; bounds come after
  double value = 0.0;
};

struct FeasibilityReport {
  std::vector<Violation> entries;
  double max_violation = -kInf;
  bool feasible = true;

  std::vector<Violation> flagged(double tol) const {
    std::vector<Violation> out;
    for (const auto& e : entries)
      if (e.value > tol) out.push_back(e);
    return out;
  }
};

inline FeasibilityReport check_feasible(const ConvexProgram& prog, const VectorXd& x,
                                        double tol) {
  if (x.size() != prog.variables.dimension())
    throw Error("point dimension does not match the variable space");
  FeasibilityReport r;
  auto record = [&](std::string tag, int idx, double v) {
    r.entries.push_back({std::move(tag), idx, v});
    r.max_violation = std::max(r.max_violation, v);
  };
  int idx = 0;
  for (const auto& c : prog.constraints) record(c.tag, idx++, c.violation(x));
  for (const auto& b : prog.variables.blocks()) {
    for (int i = 0; i < b.size; ++i) {
      if (std::isfinite(b.lower)) record("bound:" + b.name, idx++, b.lower - x(b.offset + i));
      if (std::isfinite(b.upper)) record("bound:" + b.name, idx++, x(b.offset + i) - b.upper);
    }
  }
  r.feasible = r.max_violation <= tol;
  return r;
}

enum class Status { kOptimal, kInfeasible, kMaxIter };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::kOptimal:
      return "optimal";
    case Status::kInfeasible:
      return "infeasible";
    case Status::kMaxIter:
      return "max_iter";
  }
  return "?";
}

// Residuals of the KKT conditions. Stationarity is relative to
// max(1, |grad f0|_inf), primal feasibility to max(1, |b|_inf),
// complementarity (max_i lambda_i * -g_i) to max(1, |f0|).
struct KktResiduals {
  double stationarity = kInf;
  double primal_feas = kInf;
  double dual_feas = kInf;
  double complementarity = kInf;

  double max() const { return std::max({stationarity, primal_feas, dual_feas, complementarity}); }
};

struct SolverOptions {
  double tol = 1e-7;
  int max_iterations = 200;
  double mu = 10.0;
  double backtrack = 0.5;
  double sufficient_decrease = 0.01;
  std::ostream* log = nullptr;  // per-iteration trace when set
};

struct Solution {
  Status status = Status::kMaxIter;
  VectorXd x;
  double objective = kInf;
  double dual_bound = -kInf;  // f0 - surrogate gap, a lower bound at convergence
  KktResiduals kkt;
  int iterations = 0;
  int phase1_iterations = 0;
  double infeasibility_certificate = 0.0;  // optimal phase-1 value when infeasible
  VectorXd inequality_duals;
  VectorXd equality_duals;
  VectorXd start;  // strictly feasible point the main phase started from
};

namespace detail {

// Smooth inequality in local coordinates: u = Ju * x_loc + bu,
// r = jr . x_loc + br.
struct CompiledIneq {
  ConstraintKind kind = ConstraintKind::kLinearIneq;
  bool constant_rhs = false;
  double kappa = 1.0;
  double scale = 1.0;
  std::vector<int> vars;
  MatrixXd ju;
  VectorXd bu;
  VectorXd jr;
  double br = 0.0;
  // workspace
  mutable VectorXd xl;
  mutable VectorXd u;
};

struct IneqValue {
  double g = 0.0;
  bool in_domain = true;
};

inline CompiledIneq compile(const Constraint& c) {
  CompiledIneq ci;
  ci.kind = c.kind;
  ci.kappa = c.kappa;
  ci.scale = c.scale;
  std::vector<int> vars;
  auto collect = [&](const Affine& a) {
    for (const auto& t : a.terms) vars.push_back(t.index);
  };
  for (const auto& p : c.parts) collect(p);
  collect(c.rhs);
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  ci.vars = vars;
  const int k = static_cast<int>(vars.size());
  auto local = [&](int idx) {
    return static_cast<int>(std::lower_bound(vars.begin(), vars.end(), idx) - vars.begin());
  };
  const int m = static_cast<int>(c.parts.size());
  ci.ju = MatrixXd::Zero(m, k);
  ci.bu = VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) {
    for (const auto& t : c.parts[i].terms) ci.ju(i, local(t.index)) += t.coeff;
    ci.bu(i) = c.parts[i].constant;
  }
  ci.jr = VectorXd::Zero(k);
  for (const auto& t : c.rhs.terms) ci.jr(local(t.index)) += t.coeff;
  ci.br = c.rhs.constant;
  ci.constant_rhs = ci.jr.isZero(0.0);
  if (ci.kind == ConstraintKind::kSoc && ci.constant_rhs && !(ci.br > 0.0))
    throw Error("cone '" + c.tag + "' has a non-positive constant radius");
  ci.xl.resize(k);
  ci.u.resize(m);
  return ci;
}

inline void gather(const CompiledIneq& c, const VectorXd& x) {
  for (std::size_t i = 0; i < c.vars.size(); ++i) c.xl(static_cast<Eigen::Index>(i)) = x(c.vars[i]);
}

// Value of g. `relaxed` selects the phase-1 form of the variable-radius cone,
// which is defined everywhere.
inline IneqValue value(const CompiledIneq& c, const VectorXd& x, bool relaxed) {
  gather(c, x);
  IneqValue v;
  const double r = c.jr.dot(c.xl) + c.br;
  if (c.kind == ConstraintKind::kLinearIneq) {
    v.g = c.scale * r;
    return v;
  }
  c.u.noalias() = c.ju * c.xl + c.bu;
  const double q = c.u.squaredNorm();
  switch (c.kind) {
    case ConstraintKind::kSoc:
      if (c.constant_rhs) {
        v.g = (q - r * r) / (2.0 * r);
      } else if (relaxed) {
        v.g = std::sqrt(q + 1e-12 * (1.0 + r * r)) - r;
      } else {
        if (!(r > 0.0)) {
          v.in_domain = false;
          v.g = kInf;
          return v;
        }
        v.g = q / r - r;
      }
      break;
    case ConstraintKind::kSquaredNorm:
      v.g = q - r;
      break;
    case ConstraintKind::kLogNorm:
      if (!(q > 0.0)) {
        v.in_domain = false;
        v.g = kInf;
        return v;
      }
      v.g = 0.5 * std::log(q) - r;
      break;
    case ConstraintKind::kCubicNorm:
      v.g = c.kappa * q * std::sqrt(q) - r;
      break;
    default:
      break;
  }
  v.g *= c.scale;
  return v;
}

// Value, gradient and Hessian in local coordinates. Hessians of log_norm are
// projected onto the PSD cone, which only matters outside its convex region.
inline IneqValue derivatives(const CompiledIneq& c, const VectorXd& x, bool relaxed,
                             VectorXd& grad, MatrixXd& hess) {
  const IneqValue v = value(c, x, relaxed);
  const Eigen::Index k = static_cast<Eigen::Index>(c.vars.size());
  grad.resize(k);
  hess.resize(k, k);
  if (!v.in_domain) return v;
  const double r = c.jr.dot(c.xl) + c.br;
  if (c.kind == ConstraintKind::kLinearIneq) {
    grad = c.scale * c.jr;
    hess.setZero();
    return v;
  }
  const VectorXd jtu = c.ju.transpose() * c.u;
  const double q = c.u.squaredNorm();
  switch (c.kind) {
    case ConstraintKind::kSoc:
      if (c.constant_rhs) {
        grad = jtu / r;
        hess.noalias() = c.ju.transpose() * c.ju / r;
      } else if (relaxed) {
        const double eps2 = 1e-12 * (1.0 + r * r);
        const double n = std::sqrt(q + eps2);
        // d/dr of eps2 is negligible and dropped.
        grad = jtu / n - c.jr;
        hess.noalias() = c.ju.transpose() * c.ju / n - jtu * jtu.transpose() / (n * n * n);
      } else {
        grad = 2.0 * jtu / r - (q / (r * r) + 1.0) * c.jr;
        hess.noalias() = (2.0 / r) * c.ju.transpose() * c.ju;
        hess.noalias() -= (2.0 / (r * r)) * (jtu * c.jr.transpose() + c.jr * jtu.transpose());
        hess.noalias() += (2.0 * q / (r * r * r)) * c.jr * c.jr.transpose();
      }
      break;
    case ConstraintKind::kSquaredNorm:
      grad = 2.0 * jtu - c.jr;
      hess.noalias() = 2.0 * c.ju.transpose() * c.ju;
      break;
    case ConstraintKind::kLogNorm: {
      grad = jtu / q - c.jr;
      hess.noalias() = c.ju.transpose() * c.ju / q - 2.0 * jtu * jtu.transpose() / (q * q);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(hess);
      if (es.eigenvalues().minCoeff() < 0.0)
        hess = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
               es.eigenvectors().transpose();
      break;
    }
    case ConstraintKind::kCubicNorm: {
      const double n = std::sqrt(q);
      grad = 3.0 * c.kappa * n * jtu - c.jr;
      hess.noalias() = 3.0 * c.kappa * n * c.ju.transpose() * c.ju;
      if (n > 0.0) hess.noalias() += (3.0 * c.kappa / n) * jtu * jtu.transpose();
      break;
    }
    default:
      break;
  }
  grad *= c.scale;
  hess *= c.scale;
  return v;
}

struct CompiledObjective {
  VectorXd c;           // linear coefficients over the extended space
  double constant = 0.0;
  struct Square {
    std::vector<int> vars;
    VectorXd a;
    double b = 0.0;
    double w = 0.0;
  };
  struct SmoothNorm {
    std::vector<int> vars;
    MatrixXd j;
    VectorXd b;
    double w = 0.0;
  };
  std::vector<Square> squares;
  std::vector<SmoothNorm> norms;
};

template <class Sparse>
std::vector<int> sparse_vars(const Sparse& affines) {
  std::vector<int> vars;
  for (const Affine& a : affines)
    for (const auto& t : a.terms) vars.push_back(t.index);
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

inline int local_index(const std::vector<int>& vars, int idx) {
  return static_cast<int>(std::lower_bound(vars.begin(), vars.end(), idx) - vars.begin());
}

// The program in solver form: inequalities g_i(x) <= 0 over an extended
// space (objective norms without a constant part move to epigraph
// variables) plus sparse equalities A x = b.
struct Compiled {
  int n_user = 0;
  int n = 0;
  std::vector<CompiledIneq> ineqs;
  std::vector<std::vector<Term>> eq_rows;
  VectorXd eq_rhs;
  CompiledObjective obj;
  std::vector<std::pair<int, int>> epigraphs;  // (epigraph variable, norm index)
  std::vector<Constraint> epigraph_constraints;
};

inline Compiled compile(const ConvexProgram& prog) {
  prog.validate();
  Compiled cp;
  cp.n_user = prog.variables.dimension();
  int n = cp.n_user;
  std::vector<Constraint> extra;
  CompiledObjective& obj = cp.obj;
  std::vector<std::pair<int, double>> epi_linear;
  for (std::size_t k = 0; k < prog.objective.norms.size(); ++k) {
    const auto& nm = prog.objective.norms[k];
    if (nm.weight == 0.0) continue;
    bool smooth = false;
    for (const auto& p : nm.parts)
      if (p.is_constant() && p.constant != 0.0) smooth = true;
    if (smooth) {
      CompiledObjective::SmoothNorm s;
      s.vars = sparse_vars(nm.parts);
      s.j = MatrixXd::Zero(static_cast<Eigen::Index>(nm.parts.size()),
                           static_cast<Eigen::Index>(s.vars.size()));
      s.b = VectorXd::Zero(static_cast<Eigen::Index>(nm.parts.size()));
      for (std::size_t i = 0; i < nm.parts.size(); ++i) {
        for (const auto& t : nm.parts[i].terms)
          s.j(static_cast<Eigen::Index>(i), local_index(s.vars, t.index)) += t.coeff;
        s.b(static_cast<Eigen::Index>(i)) = nm.parts[i].constant;
      }
      s.w = nm.weight;
      obj.norms.push_back(std::move(s));
    } else {
      const int t = n++;
      cp.epigraphs.emplace_back(t, static_cast<int>(k));
      extra.push_back(Constraint::soc(nm.parts, Affine::variable(t), "objective_epigraph"));
      epi_linear.emplace_back(t, nm.weight);
    }
  }
  cp.n = n;
  cp.epigraph_constraints = extra;
  obj.c = VectorXd::Zero(n);
  for (const auto& t : prog.objective.linear.terms) obj.c(t.index) += t.coeff;
  for (const auto& [t, w] : epi_linear) obj.c(t) += w;
  obj.constant = prog.objective.linear.constant;
  for (const auto& sq : prog.objective.squares) {
    if (sq.weight == 0.0) continue;
    CompiledObjective::Square s;
    s.vars = sparse_vars(std::vector<Affine>{sq.expr});
    s.a = VectorXd::Zero(static_cast<Eigen::Index>(s.vars.size()));
    for (const auto& t : sq.expr.terms) s.a(local_index(s.vars, t.index)) += t.coeff;
    s.b = sq.expr.constant;
    s.w = sq.weight;
    obj.squares.push_back(std::move(s));
  }
  std::vector<double> rhs;
  auto add_ineq = [&](const Constraint& c) { cp.ineqs.push_back(compile(c)); };
  for (const auto& c : prog.constraints) {
    if (c.kind == ConstraintKind::kLinearEq) {
      for (const auto& e : c.equality_rows()) {
        std::vector<Term> row;
        for (const auto& t : e.terms) {
          auto it = std::find_if(row.begin(), row.end(),
                                 [&](const Term& r) { return r.index == t.index; });
          if (it == row.end())
            row.push_back(t);
          else
            it->coeff += t.coeff;
        }
        cp.eq_rows.push_back(row);
        rhs.push_back(-e.constant);
      }
    } else {
      add_ineq(c);
    }
  }
  for (const auto& b : prog.variables.blocks()) {
    for (int i = 0; i < b.size; ++i) {
      if (std::isfinite(b.lower))
        add_ineq(Constraint::less_equal(Affine(b.lower) - Affine::variable(b.offset + i), "bound"));
      if (std::isfinite(b.upper))
        add_ineq(Constraint::less_equal(Affine::variable(b.offset + i) - Affine(b.upper), "bound"));
    }
  }
  for (const auto& c : extra) add_ineq(c);
  cp.eq_rhs = Eigen::Map<VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  return cp;
}

inline double objective_value(const CompiledObjective& o, const VectorXd& x) {
  double f = o.c.dot(x) + o.constant;
  for (const auto& s : o.squares) {
    double v = s.b;
    for (std::size_t i = 0; i < s.vars.size(); ++i) v += s.a(static_cast<Eigen::Index>(i)) * x(s.vars[i]);
    f += s.w * v * v;
  }
  for (const auto& nm : o.norms) {
    VectorXd xl(static_cast<Eigen::Index>(nm.vars.size()));
    for (std::size_t i = 0; i < nm.vars.size(); ++i) xl(static_cast<Eigen::Index>(i)) = x(nm.vars[i]);
    f += nm.w * (nm.j * xl + nm.b).norm();
  }
  return f;
}

// Interior-point state on one problem instance. In phase-1 mode an extra
// variable s (last coordinate) is appended, every inequality becomes
// g_i(x) - s <= 0, s >= -1 is added, and the objective is s.
class InteriorPoint {
 public:
  InteriorPoint(const Compiled& cp, bool phase1, const SolverOptions& opt)
      : cp_(cp), phase1_(phase1), opt_(opt) {
    n_ = cp.n + (phase1 ? 1 : 0);
    m_ = static_cast<int>(cp.ineqs.size()) + (phase1 ? 1 : 0);
    p_ = static_cast<int>(cp.eq_rows.size());
    grads_.resize(cp.ineqs.size());
    hessians_.resize(cp.ineqs.size());
    g_.resize(m_);
    build_pattern();
  }

  int n() const { return n_; }
  int m() const { return m_; }

  // Returns false if x0 is not strictly feasible for the inequalities.
  bool strictly_feasible(const VectorXd& x) const {
    for (int i = 0; i < m_; ++i) {
      const IneqValue v = ineq_value(i, x);
      if (!v.in_domain || !(v.g < 0.0) || !std::isfinite(v.g)) return false;
    }
    return true;
  }

  double max_ineq(const VectorXd& x) const {
    double worst = -kInf;
    for (int i = 0; i < static_cast<int>(cp_.ineqs.size()); ++i) {
      const IneqValue v = value(cp_.ineqs[i], x, phase1_);
      worst = std::max(worst, v.in_domain ? v.g : kInf);
    }
    return worst;
  }

  struct Outcome {
    VectorXd x;
    VectorXd lambda;
    VectorXd nu;
    int iterations = 0;
    bool converged = false;
    bool stalled = false;
    bool early_stop = false;
    KktResiduals kkt;
    double gap = kInf;
    double objective = kInf;
  };

  // Slack form: g(x) + w = 0 with w, lambda > 0 kept interior by a
  // fraction-to-boundary rule and g(x) < 0 held along the line search.
  // Steps are accepted on the merit
  //   f - tau sum log w + rho |(g + w, A x - b)|_1.
  // `early_stop`: phase 1 returns as soon as s < 0 with every constraint met.
  Outcome run(VectorXd x, bool early_stop) {
    Outcome out;
    const VectorXd x_start = x;
    VectorXd nu = VectorXd::Zero(p_);
    evaluate(x, true);
    constexpr double kSlackFloor = 1e-8;
    VectorXd w(m_), lambda(m_);
    for (int i = 0; i < m_; ++i) {
      w(i) = g_(i) < 0.0 ? -g_(i) : kSlackFloor * (1.0 + std::abs(g_(i)));
      lambda(i) = 1.0 / w(i);
    }
    const double b_scale = p_ > 0 ? std::max(1.0, cp_.eq_rhs.cwiseAbs().maxCoeff()) : 1.0;

    VectorXd r_dual(n_), r_pri(p_), r_ineq(m_), grad_f(n_);
    double rho = 0.0;
    auto infeasibility = [&]() {
      return (m_ ? r_ineq.lpNorm<1>() : 0.0) + (p_ ? r_pri.lpNorm<1>() : 0.0);
    };
    // The violation term keeps a degenerate Newton step from trading an
    // arbitrary constraint violation for descent while rho is still zero.
    double violation_weight = 0.0;
    auto merit = [&](const VectorXd& xx, const VectorXd& ww, double tau) {
      double v = objective(xx);
      for (int i = 0; i < m_; ++i) v += violation_weight * std::max(0.0, g_(i)) - tau * std::log(ww(i));
      return v + rho * infeasibility();
    };
    double last_step = 1.0;
    for (int it = 0; it < opt_.max_iterations; ++it) {
      out.iterations = it;
      evaluate(x, true);
      objective_gradient(x, grad_f);
      dual_residual(grad_f, lambda, nu, r_dual);
      primal_residual(x, r_pri);
      r_ineq = g_ + w;
      const double f = objective(x);
      const double mu_avg = m_ ? w.dot(lambda) / m_ : 0.0;
      // Centering from the spread of the complementarity products.
      double sigma = 0.0;
      if (m_) {
        const double xi = (w.array() * lambda.array()).minCoeff() / mu_avg;
        sigma = 0.1 * std::pow(std::min(0.05 * (1.0 - xi) / std::max(xi, 1e-12), 2.0), 3);
        sigma = std::max(sigma, std::pow(1.0 - std::min(last_step, 1.0), 3));
        sigma = std::clamp(sigma, 1.0 / opt_.mu, 1.0);
      }
      const double tau = sigma * mu_avg;
      const double f_scale = std::max(1.0, std::abs(f));
      const double g_scale = std::max(1.0, grad_f.cwiseAbs().maxCoeff());
      const double max_g = m_ ? g_.maxCoeff() : -kInf;
      KktResiduals kkt;
      kkt.stationarity = r_dual.cwiseAbs().maxCoeff() / g_scale;
      kkt.primal_feas = std::max(p_ ? r_pri.cwiseAbs().maxCoeff() / b_scale : 0.0,
                                 m_ ? std::max(0.0, max_g) : 0.0);
      kkt.dual_feas = m_ ? std::max(0.0, (-lambda).maxCoeff()) : 0.0;
      kkt.complementarity =
          m_ ? (lambda.array() * (-g_.array())).abs().maxCoeff() / f_scale : 0.0;
      out.kkt = kkt;
      const double eta = m_ ? -g_.dot(lambda) : 0.0;
      out.gap = eta;
      out.objective = f;
      if (opt_.log)
        *opt_.log << (phase1_ ? "phase1 " : "main ") << it << " f=" << f << " eta=" << eta
                  << " stat=" << kkt.stationarity << " pri=" << kkt.primal_feas
                  << " comp=" << kkt.complementarity << " step=" << last_step << "\n";
      if (early_stop && x(n_ - 1) < 0.0 && max_g < 0.0 && kkt.primal_feas <= opt_.tol) {
        out.early_stop = true;
        break;
      }
      const double ineq_gap = m_ ? r_ineq.cwiseAbs().maxCoeff() : 0.0;
      if (kkt.stationarity <= opt_.tol && kkt.primal_feas <= opt_.tol &&
          ineq_gap <= opt_.tol * std::max(1.0, m_ ? w.maxCoeff() : 0.0) &&
          w.dot(lambda) <= opt_.tol * f_scale && std::abs(eta) <= opt_.tol * f_scale) {
        out.converged = true;
        break;
      }

      // Condensed Newton system on (dx, nu + dnu).
      current_x_ = x;
      assemble(lambda, w);
      VectorXd rhs(n_ + p_);
      rhs.head(n_) = -grad_f;
      for (int i = 0; i < m_; ++i)
        add_gradient(i, rhs, -(tau / w(i) + lambda(i) / w(i) * r_ineq(i)));
      rhs.tail(p_) = -r_pri;
      VectorXd sol;
      if (!solve_kkt(rhs, sol)) {
        out.stalled = true;
        break;
      }
      const VectorXd dx = sol.head(n_);
      const VectorXd dnu = sol.tail(p_) - nu;
      VectorXd dw(m_), dlambda(m_);
      for (int i = 0; i < m_; ++i) {
        dw(i) = -r_ineq(i) - gradient_dot(i, dx);
        dlambda(i) = (tau - lambda(i) * w(i) - lambda(i) * dw(i)) / w(i);
      }
      double s_primal = 1.0, s_dual = 1.0;
      for (int i = 0; i < m_; ++i) {
        if (dw(i) < 0.0) s_primal = std::min(s_primal, -0.995 * w(i) / dw(i));
        if (dlambda(i) < 0.0) s_dual = std::min(s_dual, -0.995 * lambda(i) / dlambda(i));
      }

      // Directional derivative of the merit; rho keeps it a descent
      // direction while the iterate is infeasible.
      double barrier_slope = grad_f.dot(dx);
      for (int i = 0; i < m_; ++i) barrier_slope -= tau * dw(i) / w(i);
      const double infeas0 = infeasibility();
      // Residuals at rounding level would drive rho to overflow.
      if (infeas0 > 1e-2 * opt_.tol) {
        VectorXd ext = VectorXd::Zero(n_ + p_);
        ext.head(n_) = dx;
        const double curvature = std::max(0.0, dx.dot((k_true_ * ext).head(n_)));
        rho = std::max(rho, (barrier_slope + 0.5 * curvature) / (0.9 * infeas0));
      }
      violation_weight = g_scale;
      const double slope = barrier_slope - rho * infeas0;
      const double phi0 = merit(x, w, tau);

      double s = s_primal;
      bool accepted = false;
      VectorXd x_new, w_new;
      while (s >= 1e-16) {
        x_new = x + s * dx;
        if (in_domain(x_new)) {
          w_new = w + s * dw;
          evaluate(x_new, false);
          primal_residual(x_new, r_pri);
          r_ineq = g_ + w_new;
          const double phi1 = merit(x_new, w_new, tau);
          if (std::isfinite(phi1) &&
              phi1 <= phi0 + 1e-4 * s * std::min(slope, 0.0) + 1e-14 * std::abs(phi0)) {
            accepted = true;
            break;
          }
        }
        s *= opt_.backtrack;
      }
      if (!accepted) {
        evaluate(x, true);
        out.stalled = true;
        break;
      }
      last_step = std::min(s, s_dual);
      x = x_new;
      // Slack reset: a constraint satisfied with more room than w takes it.
      for (int i = 0; i < m_; ++i) w(i) = std::max(w_new(i), -g_(i));
      lambda += s_dual * dlambda;
      nu += s * dnu;
      // Keep each lambda_i w_i within a fixed factor of the target.
      for (int i = 0; i < m_; ++i)
        lambda(i) = std::clamp(lambda(i), tau / (1e10 * w(i)), 1e10 * tau / w(i));
      out.iterations = it + 1;
    }
    if (m_ && !strictly_feasible(x) && strictly_feasible(x_start)) {
      x = pull_back(x, x_start);
      evaluate(x, false);
      primal_residual(x, r_pri);
      out.kkt.primal_feas = p_ ? r_pri.cwiseAbs().maxCoeff() / b_scale : 0.0;
      out.gap = -g_.dot(lambda);
      out.objective = objective(x);
    }
    out.x = x;
    out.lambda = lambda;
    out.nu = nu;
    return out;
  }

  // Shortest move toward the strictly feasible `x0` that clears every
  // inequality. Convexity bounds each g on the segment by the chord.
  VectorXd pull_back(const VectorXd& x, const VectorXd& x0) const {
    double theta = 0.0;
    for (int i = 0; i < m_; ++i) {
      const IneqValue a = ineq_value(i, x), b = ineq_value(i, x0);
      if (!a.in_domain) return x0;
      if (a.g >= 0.0) theta = std::max(theta, a.g / (a.g - b.g));
    }
    for (theta = std::max(theta * (1.0 + 1e-6), 1e-15); theta < 1.0; theta *= 2.0) {
      const VectorXd y = x + theta * (x0 - x);
      if (strictly_feasible(y)) return y;
    }
    return x0;
  }

  bool in_domain(const VectorXd& x) const {
    for (int i = 0; i < m_; ++i) {
      const IneqValue v = ineq_value(i, x);
      if (!v.in_domain || !std::isfinite(v.g)) return false;
      if (i < static_cast<int>(cp_.ineqs.size()) && cp_.ineqs[i].kind == ConstraintKind::kSoc &&
          !cp_.ineqs[i].constant_rhs && !(v.g < 0.0))
        return false;
    }
    return true;
  }


  double objective(const VectorXd& x) const {
    if (phase1_) return x(n_ - 1);
    return objective_value(cp_.obj, x);
  }

 private:
  IneqValue ineq_value(int i, const VectorXd& x) const {
    const int mi = static_cast<int>(cp_.ineqs.size());
    if (i == mi) return IneqValue{-1.0 - x(n_ - 1), true};  // phase-1 floor s >= -1
    IneqValue v = value(cp_.ineqs[i], x, phase1_);
    if (phase1_ && v.in_domain) v.g -= x(n_ - 1);
    return v;
  }

  void evaluate(const VectorXd& x, bool with_derivatives) {
    const int mi = static_cast<int>(cp_.ineqs.size());
    for (int i = 0; i < mi; ++i) {
      IneqValue v;
      if (with_derivatives)
        v = derivatives(cp_.ineqs[i], x, phase1_, grads_[i], hessians_[i]);
      else
        v = value(cp_.ineqs[i], x, phase1_);
      g_(i) = v.g - (phase1_ ? x(n_ - 1) : 0.0);
    }
    if (phase1_) g_(mi) = -1.0 - x(n_ - 1);
  }

  // dot(grad g_i, v) over the full space.
  double gradient_dot(int i, const VectorXd& v) const {
    const int mi = static_cast<int>(cp_.ineqs.size());
    if (i == mi) return -v(n_ - 1);
    double d = 0.0;
    const auto& c = cp_.ineqs[i];
    for (std::size_t k = 0; k < c.vars.size(); ++k) d += grads_[i](static_cast<Eigen::Index>(k)) * v(c.vars[k]);
    if (phase1_) d -= v(n_ - 1);
    return d;
  }

  void add_gradient(int i, VectorXd& out, double w) const {
    const int mi = static_cast<int>(cp_.ineqs.size());
    if (i == mi) {
      out(n_ - 1) -= w;
      return;
    }
    const auto& c = cp_.ineqs[i];
    for (std::size_t k = 0; k < c.vars.size(); ++k) out(c.vars[k]) += w * grads_[i](static_cast<Eigen::Index>(k));
    if (phase1_) out(n_ - 1) -= w;
  }

  void objective_gradient(const VectorXd& x, VectorXd& grad) const {
    grad.setZero(n_);
    if (phase1_) {
      grad(n_ - 1) = 1.0;
      return;
    }
    grad.head(cp_.n) = cp_.obj.c;
    for (const auto& s : cp_.obj.squares) {
      double v = s.b;
      for (std::size_t i = 0; i < s.vars.size(); ++i) v += s.a(static_cast<Eigen::Index>(i)) * x(s.vars[i]);
      for (std::size_t i = 0; i < s.vars.size(); ++i) grad(s.vars[i]) += 2.0 * s.w * v * s.a(static_cast<Eigen::Index>(i));
    }
    for (const auto& nm : cp_.obj.norms) {
      VectorXd xl(static_cast<Eigen::Index>(nm.vars.size()));
      for (std::size_t i = 0; i < nm.vars.size(); ++i) xl(static_cast<Eigen::Index>(i)) = x(nm.vars[i]);
      const VectorXd u = nm.j * xl + nm.b;
      const VectorXd gl = nm.w * nm.j.transpose() * u / u.norm();
      for (std::size_t i = 0; i < nm.vars.size(); ++i) grad(nm.vars[i]) += gl(static_cast<Eigen::Index>(i));
    }
  }

  void dual_residual(const VectorXd& grad_f, const VectorXd& lambda, const VectorXd& nu,
                     VectorXd& r) const {
    r = grad_f;
    for (int i = 0; i < m_; ++i) add_gradient(i, r, lambda(i));
    for (int j = 0; j < p_; ++j)
      for (const auto& t : cp_.eq_rows[j]) r(t.index) += t.coeff * nu(j);
  }

  void primal_residual(const VectorXd& x, VectorXd& r) const {
    r.resize(p_);
    for (int j = 0; j < p_; ++j) {
      double v = -cp_.eq_rhs(j);
      for (const auto& t : cp_.eq_rows[j]) v += t.coeff * x(t.index);
      r(j) = v;
    }
  }

  // Fixed triplet layout so the sparsity pattern is identical every
  // iteration.
  void build_pattern() {
    std::vector<Eigen::Triplet<double>> trip;
    const int dim = n_ + p_;
    for (int i = 0; i < dim; ++i) trip.emplace_back(i, i, 0.0);
    auto block = [&](const std::vector<int>& vars, bool with_s) {
      std::vector<int> v = vars;
      if (with_s) v.push_back(n_ - 1);
      for (int a : v)
        for (int b : v) trip.emplace_back(a, b, 0.0);
    };
    for (const auto& c : cp_.ineqs) block(c.vars, phase1_);
    if (!phase1_) {
      for (const auto& s : cp_.obj.squares) block(s.vars, false);
      for (const auto& nm : cp_.obj.norms) block(nm.vars, false);
    }
    for (int j = 0; j < p_; ++j)
      for (const auto& t : cp_.eq_rows[j]) {
        trip.emplace_back(n_ + j, t.index, 0.0);
        trip.emplace_back(t.index, n_ + j, 0.0);
      }
    kkt_.resize(dim, dim);
    kkt_.setFromTriplets(trip.begin(), trip.end());
    kkt_.makeCompressed();
    k_true_ = kkt_;
  }

  void add_block(const std::vector<int>& vars, const MatrixXd& h) {
    for (std::size_t a = 0; a < vars.size(); ++a)
      for (std::size_t b = 0; b < vars.size(); ++b)
        k_true_.coeffRef(vars[a], vars[b]) += h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  }

  // Weights lambda_i / slack_i on the outer products of the gradients.
  void assemble(const VectorXd& lambda, const VectorXd& slack) {
    for (int k = 0; k < k_true_.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(k_true_, k); it; ++it) it.valueRef() = 0.0;
    const int mi = static_cast<int>(cp_.ineqs.size());
    for (int i = 0; i < mi; ++i) {
      const auto& c = cp_.ineqs[i];
      const double w = lambda(i) / slack(i);
      std::vector<int> vars = c.vars;
      const Eigen::Index k = static_cast<Eigen::Index>(vars.size());
      VectorXd gi = grads_[i];
      MatrixXd hi = lambda(i) * hessians_[i];
      if (phase1_) {
        vars.push_back(n_ - 1);
        gi.conservativeResize(k + 1);
        gi(k) = -1.0;
        hi.conservativeResize(k + 1, k + 1);
        hi.row(k).setZero();
        hi.col(k).setZero();
      }
      hi.noalias() += w * gi * gi.transpose();
      add_block(vars, hi);
    }
    if (phase1_) {
      const double w = lambda(mi) / slack(mi);
      k_true_.coeffRef(n_ - 1, n_ - 1) += w;
    } else {
      for (const auto& s : cp_.obj.squares) add_block(s.vars, 2.0 * s.w * s.a * s.a.transpose());
      for (const auto& nm : cp_.obj.norms) {
        VectorXd xl(static_cast<Eigen::Index>(nm.vars.size()));
        for (std::size_t i = 0; i < nm.vars.size(); ++i) xl(static_cast<Eigen::Index>(i)) = current_x_(nm.vars[i]);
        const VectorXd u = nm.j * xl + nm.b;
        const double un = u.norm();
        const MatrixXd hu =
            (MatrixXd::Identity(u.size(), u.size()) / un - u * u.transpose() / (un * un * un));
        add_block(nm.vars, nm.w * nm.j.transpose() * hu * nm.j);
      }
    }
    for (int j = 0; j < p_; ++j)
      for (const auto& tm : cp_.eq_rows[j]) {
        k_true_.coeffRef(n_ + j, tm.index) += tm.coeff;
        k_true_.coeffRef(tm.index, n_ + j) += tm.coeff;
      }
  }

  bool solve_kkt(const VectorXd& rhs, VectorXd& sol) {
    // Diagonal regularization relative to each entry, then refinement
    // against the true matrix.
    kkt_ = k_true_;
    for (int i = 0; i < n_; ++i) {
      double& d = kkt_.coeffRef(i, i);
      d += 1e-11 * std::max(1.0, std::abs(d));
    }
    for (int j = 0; j < p_; ++j) kkt_.coeffRef(n_ + j, n_ + j) -= 1e-11;
    if (!analyzed_) {
      lu_.analyzePattern(kkt_);
      analyzed_ = true;
    }
    lu_.factorize(kkt_);
    if (lu_.info() != Eigen::Success) return false;
    sol = lu_.solve(rhs);
    for (int r = 0; r < 10; ++r) {
      const VectorXd res = rhs - k_true_ * sol;
      if (res.cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, rhs.cwiseAbs().maxCoeff())) break;
      sol += lu_.solve(res);
    }
    return sol.allFinite();
  }

  const Compiled& cp_;
  bool phase1_;
  SolverOptions opt_;
  int n_ = 0, m_ = 0, p_ = 0;
  std::vector<VectorXd> grads_;
  std::vector<MatrixXd> hessians_;
  VectorXd g_;
  VectorXd current_x_;
  Eigen::SparseMatrix<double> kkt_;
  Eigen::SparseMatrix<double> k_true_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
};

}  // namespace detail

// Solves min f0 s.t. the program's constraints. `x0` (user coordinates) is the
// starting point; when it is not strictly feasible a phase-1 problem is
// solved first.
inline Solution solve(const ConvexProgram& prog, const SolverOptions& opt,
                      const VectorXd* x0 = nullptr) {
  const detail::Compiled cp = detail::compile(prog);
  Solution sol;
  VectorXd x = VectorXd::Zero(cp.n);
  if (x0) {
    if (x0->size() != cp.n_user) throw Error("initial point dimension mismatch");
    x.head(cp.n_user) = *x0;
  }
  for (const auto& [t, k] : cp.epigraphs) {
    double q = 0.0;
    for (const auto& p : prog.objective.norms[k].parts) q += p.eval(x.head(cp.n_user)) * p.eval(x.head(cp.n_user));
    x(t) = std::sqrt(q) + 1.0;
  }

  detail::InteriorPoint main(cp, false, opt);
  if (!main.strictly_feasible(x)) {
    detail::InteriorPoint ph1(cp, true, opt);
    VectorXd xs(cp.n + 1);
    xs.head(cp.n) = x;
    const double worst = ph1.max_ineq(xs);
    xs(cp.n) = std::max(0.0, std::isfinite(worst) ? worst : 0.0) + 1.0;
    if (!ph1.strictly_feasible(xs))
      throw Error("phase-1 start outside the constraint domain");
    const auto r = ph1.run(xs, true);
    sol.phase1_iterations = r.iterations;
    if (!r.early_stop) {
      sol.x = r.x.head(cp.n_user);
      sol.objective = prog.objective.eval(sol.x);
      sol.status = r.converged ? Status::kInfeasible : Status::kMaxIter;
      sol.infeasibility_certificate = r.objective;
      sol.kkt = r.kkt;
      return sol;
    }
    x = r.x.head(cp.n);
  }
  sol.start = x.head(cp.n_user);
  const auto out = main.run(x, false);
  sol.x = out.x.head(cp.n_user);
  sol.objective = prog.objective.eval(sol.x);
  sol.dual_bound = out.objective - out.gap;
  sol.kkt = out.kkt;
  sol.iterations = out.iterations;
  sol.inequality_duals = out.lambda;
  sol.equality_duals = out.nu;
  sol.status = out.converged ? Status::kOptimal : Status::kMaxIter;
  return sol;
}

inline Solution solve(const ConvexProgram& prog, double tol = 1e-7) {
  SolverOptions opt;
  opt.tol = tol;
  return solve(prog, opt);
}

}  // namespace fsouav::convex

#endif  // FSOUAV_CONVEX_HPP_
