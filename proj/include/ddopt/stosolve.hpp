#pragma once

// Stochastic variant of the bound-constrained method. Gradients, Jacobians
// and constraint values are replaced by mini-batch or recursive-momentum
// estimates and the feasibility step has the closed form
//   w = vartheta (J^T J)^{-1} c.

#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"
#include "ddopt/gensolve.hpp"
#include "ddopt/linalg.hpp"
#include "ddopt/metrics.hpp"
#include "ddopt/model.hpp"

namespace ddopt {

// ---- batch sizes ---------------------------------------------------------------

/// ceil(9 m sigma^2 log(1/gamma) / eps^2), at least 1.
std::uint64_t batch_size_minibatch(double sigma, double eps, double gamma, std::size_t m_factor = 1);

enum class RecursiveBatchKind { Init, Step };
/// Which estimate the batch feeds; constraint values use the steeper eps powers.
enum class EstimateFamily { Gradient, ConstraintValue };

/// Init: ceil(81 m sigma^2 log^2(1/gamma) / eps^2).
/// Step: ceil(max(324 m L^2 |dx|^2 log^2 / (alpha eps^2), 81 m sigma^2 log^2 / eps)),
/// with eps^4 and eps^3 in place of eps^2 and eps for constraint values.
std::uint64_t batch_size_recursive(RecursiveBatchKind kind, double sigma, double eps_bar, double gamma,
                                   double alpha, double step_norm, double lipschitz, std::size_t m_factor = 1,
                                   EstimateFamily family = EstimateFamily::Gradient);

struct BatchSizes {
  std::uint64_t f = 1;  // objective gradient
  std::uint64_t c = 1;  // constraint Jacobian
  std::uint64_t v = 1;  // constraint values
};

struct MomentumWeights {
  double f = 0.1;
  double c = 0.1;
  double v = 0.1;
};

struct BatchSchedule {
  enum class Mode { Fixed, TheoryMiniBatch, TheoryRecursive };
  Mode mode = Mode::Fixed;
  BatchSizes fixed;
  // Noise levels and accuracies the complexity formulas are evaluated with.
  double sigma_f = 0.0, sigma_c = 0.0, sigma_v = 0.0;
  double eps_f = 1.0, eps_c = 1.0, eps_v = 1.0;
  double gamma = 0.1;
  /// Theoretical batch sizes explode for small eps; they are clipped here.
  std::uint64_t max_batch = std::uint64_t{1} << 20;
};

/// Batch sizes for iteration k; `step_norm` is |x_k - x_{k-1}| (ignored at k = 0).
BatchSizes batch_sizes_at(const BatchSchedule& s, int k, double step_norm, const Lipschitz& lip, std::size_t m,
                          const MomentumWeights& alpha);

/// Non-constructive constants of the complexity analysis, taken as inputs.
struct TargetConstants {
  double kappa5 = 1.0;
  double kappa6 = 1.0;
  double nu = 1.0;   // uniform lower bound on singular values of J
  double lip_c = 1.0;
  int K = 1000;
};

struct TheoryParameters {
  BatchSchedule schedule;
  MomentumWeights alpha;  // meaningful for the recursive schedule
};

enum class EstimatorKind { MiniBatch, RecursiveMomentum };

/// Evaluates the accuracy/confidence formulas for a target eps.
TheoryParameters from_target_eps(double eps, double sigma_f, double sigma_c, double sigma_v,
                                const TargetConstants& k, EstimatorKind kind);

// ---- estimators -----------------------------------------------------------------

struct EstimatorState {
  EstimatorKind kind = EstimatorKind::MiniBatch;
  MomentumWeights alpha;
  Vector grad_f;
  Matrix jac_c;
  Vector c;
  bool initialized = false;
  Vector prev_x;
  Evaluation prev_truth;  // noiseless values at prev_x, for sample-wise differences
  SampleCounts samples;
  SampleCounts evaluations;
};

/// Averages B independent samples per oracle around the noiseless values.
EstimatorState estimate_minibatch(const Evaluation& truth, const NoiseModel& noise, const BatchSizes& b,
                                  NoiseStreams& streams);

/// Per sample: fresh + (1 - alpha)(previous estimate - same sample at prev_x),
/// then the batch average. The first call applies the plain mini-batch rule.
void estimate_recursive(const Evaluation& truth, const Vector& x, const NoiseModel& noise, const BatchSizes& b,
                        NoiseStreams& streams, EstimatorState& state);

// ---- step -------------------------------------------------------------------------

/// vartheta (J^T J)^{-1} c; throws RankDeficient.
Vector w_tilde_closed_form(const Matrix& j, const Vector& c, double vartheta);

struct StoStep {
  StepResult step;
  double vartheta = 0.0;  // after any halving
  int halvings = 0;
};

/// Direction QP with w from the closed form. Halves vartheta (up to 30 times)
/// while the QP is infeasible; throws SubproblemInfeasible afterwards.
StoStep direction_sto(const Vector& x, const Vector& grad_f, const Matrix& j, const Vector& c, double vartheta,
                      const std::vector<bool>& bounded = {}, double qp_tol = default_qp_tol());

struct MeritStep {
  double rho = 0.0;
  double eta = 0.0;
};

/// rho = max((g^T s + |s|^2/2) / (vartheta |c|), prev); eta = min(tau / (L_f + rho (L_c' + 1)), 1).
MeritStep merit_step_sto(double prev_rho, const Vector& grad_f, const Vector& s, double c_norm, double vartheta,
                         double tau, double lip_grad_f, double lip_grad_c);

struct StoConfig {
  double vartheta_tilde = 0.5;
  double tau = 0.25;
  double rho0 = 1.0;
  int K = 1000;
  BatchSchedule schedule;
  EstimatorKind estimator = EstimatorKind::MiniBatch;
  MomentumWeights alpha;
  std::uint64_t seed = 0;
  std::optional<Lipschitz> lipschitz;
  double qp_tol = default_qp_tol();
  /// Noiseless KKT diagnostics every this many iterations (and at the end).
  int diag_every = 1;

  void validate() const;
  nlohmann::json to_json() const;
};

/// Runs exactly K steps. Noise streams are seeded from cfg.seed alone, so
/// NoiseModel::seed is not consulted. Noiseless residuals in the history are
/// diagnostics and never reach the iteration.
RunRecord solve_sto(const ProblemSpec& p, const NoiseModel& noise, const StoConfig& cfg);

}  // namespace ddopt
