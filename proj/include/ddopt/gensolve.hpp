#pragma once

// Adaptive directional decomposition for min f(x) s.t. c(x) = 0, x_B >= 0.
// Each iteration solves a feasibility QP for (w, v) and a direction QP
//   min 1/2 |s + grad f + J w|^2  s.t.  J^T s = -J^T J w,  x_B + s_B >= 0.

#include <optional>
#include <vector>

#include "json.hpp"
#include "ddopt/linalg.hpp"
#include "ddopt/metrics.hpp"
#include "ddopt/model.hpp"
#include "ddopt/qp.hpp"

namespace ddopt {

struct FeasibilityResult {
  Vector w;
  Vector v;
  double residual = 0.0;      // |c - J^T J w|
  double vartheta_eff = 1.0;  // 1 - residual / |c|, 1 when c = 0
  bool closed_form = false;   // w = (J^T J)^{-1} c was already bound-feasible
};

/// `bounded` empty means every component carries x_i >= 0. Tries the exact
/// Gauss-Newton w first and falls back to the l1-ball QP. v is the
/// minimum-norm certificate with J^T v = 0 and x_B - (J w)_B + v_B >= 0.
FeasibilityResult feasibility_subproblem(const Vector& x, const Vector& c, const Matrix& j,
                                         const std::vector<bool>& bounded = {},
                                         double qp_tol = default_qp_tol());

struct StepResult {
  Vector s;
  Vector w;
  Vector v;
  Vector lambda;
  Vector mu;  // bound duals, zero on free components
  double rho = 0.0;
  double eta = 0.0;
  double feas_residual = 0.0;
  int qp_iterations = 0;
};

/// Throws SubproblemInfeasible or QpMaxIter when the direction QP fails.
StepResult direction_gen(const Vector& x, const Vector& grad_f, const Matrix& j, const Vector& w,
                         const std::vector<bool>& bounded = {}, double qp_tol = default_qp_tol());

/// max((grad_f^T s + |s|^2/2) / (vartheta |c|), prev); prev when |c| is zero.
double merit_param_gen(double prev_rho, const Vector& grad_f, const Vector& s, double c_norm, double vartheta);

/// min(tau / (L_f + rho L_c'), 1)
double stepsize_gen(double rho, double lip_grad_f, double lip_grad_c, double tau);

/// c_norm > eps and w_norm <= eps / max(kappa1, kappa2)
bool detect_infeasible_stationary(double c_norm, double w_norm, double eps, double kappa1, double kappa2);

struct GenConfig {
  double vartheta = 0.5;
  double tau = 0.5;
  double rho0 = 1.0;
  int max_iter = 1000;
  /// Stop once the KKT triple (with the direction QP's multipliers) is below this.
  double tol_eps = 1e-6;
  /// Threshold for declaring an infeasible stationary point.
  double infeas_eps = 1e-2;
  /// Defaults: L_c^2 (1 + L_c) and L_c^2 C with C the running max of |c|.
  std::optional<double> kappa1;
  std::optional<double> kappa2;
  std::optional<Lipschitz> lipschitz;
  double qp_tol = default_qp_tol();
  bool early_stop = true;

  void validate() const;
  nlohmann::json to_json() const;
};

/// x0 is projected onto the bounds first. Solver failures end the run with
/// status Failed instead of throwing.
RunRecord solve_gen(const ProblemSpec& p, const GenConfig& cfg);

/// mu = max(J c, 0) on bounded components: the multiplier certifying an
/// infeasible stationary point of min 1/2 |c|^2 s.t. x_B >= 0.
Vector infeasibility_multiplier(const Matrix& j, const Vector& c, const std::vector<bool>& bounded);

}  // namespace ddopt
