#pragma once

// Adaptive directional decomposition for min f(x) s.t. c(x) = 0:
//   s = -P_V grad f - J A c,   x+ = x + eta s
// with P_V the projector onto null(J^T) and A a symmetric positive mapping
// such that J^T J A is symmetric positive definite.

#include <optional>
#include <string>

#include "json.hpp"
#include "ddopt/linalg.hpp"
#include "ddopt/metrics.hpp"
#include "ddopt/model.hpp"

namespace ddopt {

struct OperatorAChoice {
  enum class Kind { ScaledIdentity, GramInverse, Hybrid };
  Kind kind = Kind::GramInverse;
  double alpha1 = 1.0;  // weight on the identity part (or the only weight)
  double alpha2 = 1.0;  // Hybrid only: weight on the Gram-inverse part

  static OperatorAChoice scaled_identity(double a) { return {Kind::ScaledIdentity, a, 0.0}; }
  static OperatorAChoice gram_inverse(double a) { return {Kind::GramInverse, a, 0.0}; }
  static OperatorAChoice hybrid(double a1, double a2) { return {Kind::Hybrid, a1, a2}; }

  /// Same kind with every weight replaced by `alpha`.
  OperatorAChoice with_alpha(double alpha) const;
  void validate() const;
};

std::string to_string(OperatorAChoice::Kind k);
/// Accepts scaled-identity, gram-inverse, hybrid. Throws InvalidConfig.
OperatorAChoice::Kind parse_operator_kind(const std::string& s);

struct AResult {
  Vector ac;
  double beta = 0.0;     // lambda_min(J^T J A)
  double op_norm = 0.0;  // |J^T J A|
  Matrix a;              // the m x m mapping itself
};

/// Throws RankDeficient when J lacks full column rank.
AResult apply_A(const Matrix& j, const OperatorAChoice& choice, const Vector& c);

/// s = -project_tangent(J, grad_f) - J A c.
Vector direction_eq(const Vector& grad_f, const Matrix& j, const Vector& c, const OperatorAChoice& choice);

/// max((grad_f^T s + |s|^2/2) / (beta |c|), prev); prev when |c| is (numerically) zero.
double merit_param_eq(double prev_rho, const Vector& grad_f, const Vector& s, double c_norm, double beta);

/// min(tau / (L_f + rho L_c'), 1 / op_norm)
double stepsize_eq(double rho, double lip_grad_f, double lip_grad_c, double tau, double op_norm);

/// lambda = -(J^T J)^{-1} J^T grad_f
Vector multiplier_eq(const Matrix& j, const Vector& grad_f);

struct EqSolverConfig {
  double tau = 0.5;
  double rho0 = 1.0;
  int max_iter = 1000;
  double tol_eps = 1e-6;
  OperatorAChoice A;
  /// Replace A's weights by the problem's default_alpha.
  bool alpha_from_problem = false;
  std::optional<Lipschitz> lipschitz;
  /// Stop when |s| <= tol_eps min(delta, 1); off runs the full budget.
  bool early_stop = true;

  void validate() const;
  nlohmann::json to_json() const;
};

/// Never throws for solver failures: rank loss or domain errors end the run
/// with status Failed and a reason naming the iteration.
RunRecord solve_eq(const ProblemSpec& p, const EqSolverConfig& cfg);

}  // namespace ddopt
