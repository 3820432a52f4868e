#pragma once

// Problem definitions: min f(x) s.t. c(x) = 0 and x_i >= 0 for the
// components flagged in `lower_bounded`.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ddopt/linalg.hpp"
#include "ddopt/rng.hpp"

namespace ddopt {

struct Lipschitz {
  double grad_f = 1.0;  // Lipschitz constant of grad f
  double grad_c = 1.0;  // Lipschitz constant of the Jacobian (0 for linear c)
  double c = 1.0;       // bound on |jacobian|
};

struct ProblemSpec {
  std::string name;
  std::size_t d = 0;
  std::size_t m = 0;
  std::function<double(const Vector&)> f;
  std::function<Vector(const Vector&)> grad_f;
  std::function<Vector(const Vector&)> c;
  /// d x m, column i is grad c_i.
  std::function<Matrix(const Vector&)> jac_c;
  /// Empty or length d; true where x_i >= 0 is imposed.
  std::vector<bool> lower_bounded;
  Lipschitz lipschitz;
  Vector x0;
  std::optional<Vector> known_solution;
  std::optional<Vector> known_lambda;
  std::optional<Vector> known_mu;
  /// Default mapping scale used by the equality solver.
  double default_alpha = 1.0;

  bool has_bounds() const;
  bool bounded(std::size_t i) const { return !lower_bounded.empty() && lower_bounded[i]; }
  /// Throws InvalidConfig when dimensions or callbacks are inconsistent.
  void validate() const;
};

struct Evaluation {
  double f = 0.0;
  Vector grad_f;
  Vector c;
  Matrix jac_c;
};

/// Calls all four oracles; throws EvalDomain on non-finite output.
Evaluation evaluate(const ProblemSpec& p, const Vector& x);

// ---- stochastic oracles -----------------------------------------------------

enum class NoiseDistribution { UniformBall, SignedScaled };

struct NoiseModel {
  double sigma_f = 0.0;
  double sigma_c = 0.0;  // per Jacobian column
  double sigma_v = 0.0;  // constraint values
  NoiseDistribution distribution = NoiseDistribution::UniformBall;
  std::uint64_t seed = 0;

  static NoiseModel uniform(double sigma, std::uint64_t seed) {
    return {sigma, sigma, sigma, NoiseDistribution::UniformBall, seed};
  }
};

/// One independent stream per oracle kind.
struct NoiseStreams {
  RngStream grad_f;
  RngStream jac_c;
  RngStream c;

  explicit NoiseStreams(std::uint64_t seed) : grad_f(seed, 1), jac_c(seed, 2), c(seed, 3) {}
};

/// Draw from the chosen zero-mean distribution with norm <= sigma.
Vector draw_perturbation(RngStream& rng, std::size_t n, double sigma, NoiseDistribution dist);
/// d x m perturbation with each column drawn independently (radius sigma).
Matrix draw_jacobian_perturbation(RngStream& rng, std::size_t d, std::size_t m, double sigma,
                                  NoiseDistribution dist);

struct DrawCounts {
  std::uint64_t grad_f = 0;
  std::uint64_t jac_c = 0;
  std::uint64_t c = 0;
};

struct OracleSample {
  Vector grad_f;
  Vector c;
  Matrix jac_c;
  DrawCounts draws_used;
};

/// True values plus one bounded perturbation per oracle kind. The noise is
/// additive and independent of x, so every realization is as smooth as the
/// underlying problem.
OracleSample sample_stochastic(const ProblemSpec& p, const Vector& x, const NoiseModel& noise,
                               NoiseStreams& streams);

// ---- slack transformation ---------------------------------------------------

/// min f(x) s.t. c_eq(x) = 0, lower <= c_in(x) <= upper; infinite entries
/// mean one-sided.
struct GeneralProblem {
  std::string name;
  std::size_t n = 0;
  std::function<double(const Vector&)> f;
  std::function<Vector(const Vector&)> grad_f;
  std::size_t m_eq = 0;
  std::function<Vector(const Vector&)> c_eq;
  std::function<Matrix(const Vector&)> jac_eq;
  std::size_t m_in = 0;
  std::function<Vector(const Vector&)> c_in;
  std::function<Matrix(const Vector&)> jac_in;
  Vector lower;
  Vector upper;
  /// Empty or length n; true where x_i >= 0 is already part of the model.
  std::vector<bool> x_nonneg;
  Vector x0;
  Lipschitz lipschitz;
};

struct SlackOptions {
  /// Replace each free x_i by x_i+ - x_i- with both parts bounded.
  bool split_free = false;
};

/// Lifts to (x, slacks) with c_in - s_lo - lower = 0 and c_in + s_up - upper = 0.
/// Throws InvalidBounds when lower > upper or both bounds are infinite.
ProblemSpec to_slack_form(const GeneralProblem& g, const SlackOptions& opts = {});

/// Lifted point (x, c - lower, upper - c) matching to_slack_form's layout.
Vector lift_point(const GeneralProblem& g, const Vector& x, const SlackOptions& opts = {});

// ---- oracle validation -----------------------------------------------------

struct FdReport {
  double max_rel_err_f = 0.0;
  double max_rel_err_c = 0.0;
};

/// Central differences against grad_f and each Jacobian column. Errors are
/// measured as |fd - analytic|_inf / max(1, |analytic|_inf) per vector.
FdReport fd_check(const ProblemSpec& p, const Vector& x, double h);

/// Sampled Lipschitz estimates over the box x0 +- radius (finite differences of
/// the gradient / Jacobian along random directions).
Lipschitz estimate_lipschitz(const ProblemSpec& p, const Vector& center, double radius, int samples,
                             std::uint64_t seed);

}  // namespace ddopt
