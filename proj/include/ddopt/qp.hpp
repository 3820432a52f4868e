#pragma once

// Strictly convex QPs of the form
//
//   min  1/2 sum_i w_i (z_i - target_i)^2
//   s.t. eq_lhs z = eq_rhs,  z >= lower   (lower_i may be -inf)
//
// with w_i > 0 (all ones unless set). Duals follow the convention
//   W (z - target) + eq_lhs^T lambda - mu = 0,  mu >= 0.

#include <cmath>
#include <string_view>
#include <vector>

#include "ddopt/linalg.hpp"

namespace ddopt {

struct QpProblem {
  std::size_t n = 0;
  Vector target;
  Vector weights;  // empty means all ones
  Matrix eq_lhs;   // k x n
  Vector eq_rhs;
  Vector lower;    // empty means no bounds

  double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }
  double lower_at(std::size_t i) const { return lower.empty() ? -INFINITY : lower[i]; }
  std::size_t num_eq() const { return eq_lhs.rows(); }
  void validate() const;
};

enum class QpStatus { Optimal, Infeasible, MaxIter };
std::string_view to_string(QpStatus s);

struct QpSolution {
  Vector z;
  Vector eq_dual;     // lambda
  Vector bound_dual;  // mu >= 0
  QpStatus status = QpStatus::MaxIter;
  double primal_res = 0.0;
  double dual_res = 0.0;
  int iterations = 0;
  bool polished = false;
};

struct QpResiduals {
  double stationarity = 0.0;     // |W(z - t) + A^T lambda - mu|_inf
  double equality = 0.0;         // |A z - b|_inf
  double bound_violation = 0.0;  // max(lower - z, 0)
  double complementarity = 0.0;  // max |mu_i (z_i - lower_i)|
  double dual_sign = 0.0;        // max(-mu, 0)
  double max() const;
};

QpResiduals qp_residuals(const QpProblem& qp, const QpSolution& sol);
double qp_objective(const QpProblem& qp, const Vector& z);

/// Default subproblem tolerance: 1e-10, or DDOPT_QP_TOL when set.
double default_qp_tol();

/// ADMM (operator splitting) followed by an equality-constrained polish on the
/// identified active set.
QpSolution solve_qp(const QpProblem& qp, double tol = default_qp_tol(), int max_iter = 20000);

/// Enumerates every active set of the finite bounds (n <= 12) and solves each
/// equality-constrained KKT system by dense elimination. Test oracle.
QpSolution brute_force_qp(const QpProblem& qp);

// ---- feasibility subproblem ------------------------------------------------

enum class BallMode { L1, L2Penalty };

/// Variable layout of the feasibility QP:
///   [ r (m) | w (m) | v+ (d) | v- (d) | sigma (1) | q (nb) ]
/// with r = c - J^T J w, J^T (v+ - v-) = 0, sum(v+) + sum(v-) + sigma = |c|_1
/// (L1 mode only), and q_i = x_i - (J w)_i + v_i >= 0 for each bounded i.
/// The residual r carries weight 1; everything else carries `reg`, which
/// selects the minimum-norm solution among minimizers (q is anchored at x).
struct FeasibilityQp {
  QpProblem qp;
  std::size_t m = 0;
  std::size_t d = 0;
  std::vector<std::size_t> bounded;  // indices i with x_i >= 0 imposed
  BallMode mode = BallMode::L1;

  std::size_t r_off() const { return 0; }
  std::size_t w_off() const { return m; }
  std::size_t vp_off() const { return 2 * m; }
  std::size_t vm_off() const { return 2 * m + d; }
  std::size_t sigma_off() const { return 2 * m + 2 * d; }
  std::size_t q_off() const { return 2 * m + 2 * d + 1; }

  Vector w(const Vector& z) const;
  Vector v(const Vector& z) const;
};

/// `bounded_mask` empty means every component is bounded.
FeasibilityQp build_feasibility_qp(const Vector& x, const Vector& c, const Matrix& j, BallMode mode,
                                   const std::vector<bool>& bounded_mask = {}, double reg = 1e-8);

}  // namespace ddopt
