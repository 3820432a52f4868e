#include "ddopt/stosolve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "ddopt/error.hpp"

namespace ddopt {

using nlohmann::json;

// ---- batch sizes ---------------------------------------------------------------

namespace {

// ceil that forgives rounding noise such as 900.0000000000001
std::uint64_t to_count(double v) {
  if (!(v > 1.0)) return 1;
  if (v >= 1.8e19) return std::numeric_limits<std::uint64_t>::max();
  const double r = std::round(v);
  const double c = std::fabs(v - r) <= 1e-9 * v ? r : std::ceil(v);
  return std::max<std::uint64_t>(1, std::uint64_t(c));
}

double log_inv(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorCode::InvalidConfig, "gamma must lie in (0,1)");
  return std::log(1.0 / gamma);
}

}  // namespace

std::uint64_t batch_size_minibatch(double sigma, double eps, double gamma, std::size_t m_factor) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidConfig, "batch size: eps must be positive");
  const double l = log_inv(gamma);
  return to_count(9.0 * double(m_factor) * sigma * sigma * l / (eps * eps));
}

std::uint64_t batch_size_recursive(RecursiveBatchKind kind, double sigma, double eps_bar, double gamma,
                                   double alpha, double step_norm, double lipschitz, std::size_t m_factor,
                                   EstimateFamily family) {
  if (!(eps_bar > 0.0)) throw Error(ErrorCode::InvalidConfig, "batch size: eps must be positive");
  const double l = log_inv(gamma);
  const double l2 = l * l;
  const double mf = double(m_factor);
  if (kind == RecursiveBatchKind::Init) return to_count(81.0 * mf * sigma * sigma * l2 / (eps_bar * eps_bar));
  const bool values = family == EstimateFamily::ConstraintValue;
  const double e_grad = values ? std::pow(eps_bar, 4) : eps_bar * eps_bar;
  const double e_var = values ? std::pow(eps_bar, 3) : eps_bar;
  double grad_branch = 0.0;
  if (step_norm > 0.0 && lipschitz > 0.0) {
    if (!(alpha > 0.0)) return std::numeric_limits<std::uint64_t>::max();
    grad_branch = 324.0 * mf * lipschitz * lipschitz * step_norm * step_norm * l2 / (alpha * e_grad);
  }
  const double var_branch = 81.0 * mf * sigma * sigma * l2 / e_var;
  return to_count(std::max(grad_branch, var_branch));
}

BatchSizes batch_sizes_at(const BatchSchedule& s, int k, double step_norm, const Lipschitz& lip, std::size_t m,
                          const MomentumWeights& alpha) {
  BatchSizes b;
  switch (s.mode) {
    case BatchSchedule::Mode::Fixed:
      b = s.fixed;
      break;
    case BatchSchedule::Mode::TheoryMiniBatch:
      b.f = batch_size_minibatch(s.sigma_f, s.eps_f, s.gamma, 1);
      b.c = batch_size_minibatch(s.sigma_c, s.eps_c, s.gamma, m);
      b.v = batch_size_minibatch(s.sigma_v, s.eps_v, s.gamma, 1);
      break;
    case BatchSchedule::Mode::TheoryRecursive: {
      const auto kind = k == 0 ? RecursiveBatchKind::Init : RecursiveBatchKind::Step;
      b.f = batch_size_recursive(kind, s.sigma_f, s.eps_f, s.gamma, alpha.f, step_norm, lip.grad_f, 1);
      b.c = batch_size_recursive(kind, s.sigma_c, s.eps_c, s.gamma, alpha.c, step_norm, lip.grad_c, m);
      b.v = batch_size_recursive(kind, s.sigma_v, s.eps_v, s.gamma, alpha.v, step_norm, lip.c, 1,
                                 EstimateFamily::ConstraintValue);
      break;
    }
  }
  b.f = std::clamp<std::uint64_t>(b.f, 1, s.max_batch);
  b.c = std::clamp<std::uint64_t>(b.c, 1, s.max_batch);
  b.v = std::clamp<std::uint64_t>(b.v, 1, s.max_batch);
  return b;
}

TheoryParameters from_target_eps(double eps, double sigma_f, double sigma_c, double sigma_v,
                                const TargetConstants& k, EstimatorKind kind) {
  if (!(eps > 0.0) || !(k.kappa5 > 0.0) || !(k.kappa6 > 0.0) || !(k.nu > 0.0) || !(k.lip_c > 0.0) || k.K < 1)
    throw Error(ErrorCode::InvalidConfig, "from_target_eps: constants must be positive");
  TheoryParameters out;
  BatchSchedule& s = out.schedule;
  s.sigma_f = sigma_f;
  s.sigma_c = sigma_c;
  s.sigma_v = sigma_v;
  const double nu2 = k.nu * k.nu;
  if (kind == EstimatorKind::MiniBatch) {
    s.mode = BatchSchedule::Mode::TheoryMiniBatch;
    const double e2 = eps * eps / (6.0 * k.kappa5 * k.kappa6);
    s.eps_f = std::sqrt(e2);
    s.eps_v = e2;
    s.eps_c = std::min({3.0 * nu2 / (8.0 * k.lip_c), nu2 / (4.0 + 2.0 * k.nu), s.eps_f});
    s.gamma = eps / (3.0 * k.K);
  } else {
    s.mode = BatchSchedule::Mode::TheoryRecursive;
    const double a = eps / std::sqrt(30.0 * k.kappa5 * k.kappa6);
    const double r5 = std::sqrt(5.0);
    s.eps_f = s.eps_v = a;
    s.eps_c = std::min({3.0 * nu2 / (8.0 * r5 * k.lip_c), nu2 / (4.0 * r5 + 2.0 * r5 * k.nu), a});
    out.alpha.f = out.alpha.v = std::min(a, 1.0);
    out.alpha.c = std::min(s.eps_c, 1.0);
    s.gamma = eps / (6.0 * k.K);
  }
  if (!(s.gamma < 1.0)) s.gamma = 0.5;
  return out;
}

// ---- estimators -----------------------------------------------------------------

namespace {

// Shared by both estimators so that alpha = 1 reproduces the mini-batch
// arithmetic exactly: the correction term is then 0 * (finite) = 0.
template <class Draw>
void average_samples(std::span<const double> at_x, std::span<const double> at_prev, std::span<const double> prev_est,
                     double alpha, std::uint64_t batch, Draw draw, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const bool recursive = !at_prev.empty();
  const double keep = 1.0 - alpha;
  for (std::uint64_t b = 0; b < batch; ++b) {
    const auto noise = draw();
    const std::span<const double> n(noise.data(), at_x.size());
    for (std::size_t i = 0; i < at_x.size(); ++i) {
      double term = at_x[i] + n[i];
      if (recursive) term += keep * (prev_est[i] - (at_prev[i] + n[i]));
      out[i] += term;
    }
  }
  const double denom = double(batch);
  for (double& v : out) v /= denom;
}

struct VecData {
  Vector v;
  const double* data() const { return v.data(); }
};
struct MatData {
  Matrix m;
  const double* data() const { return m.data().data(); }
};

void fill_estimates(const Evaluation& truth, const Evaluation* prev_truth, const EstimatorState* prev,
                    const MomentumWeights& alpha, const NoiseModel& noise, const BatchSizes& b, NoiseStreams& streams,
                    EstimatorState& out) {
  const std::size_t d = truth.grad_f.size();
  const std::size_t m = truth.c.size();
  const auto dist = noise.distribution;
  Vector g(d);
  Matrix jc(d, m);
  Vector cv(m);
  const std::span<const double> none;
  average_samples(truth.grad_f, prev_truth ? std::span<const double>(prev_truth->grad_f) : none,
                  prev ? std::span<const double>(prev->grad_f) : none, alpha.f, b.f,
                  [&] { return VecData{draw_perturbation(streams.grad_f, d, noise.sigma_f, dist)}; }, g);
  average_samples(truth.jac_c.data(), prev_truth ? prev_truth->jac_c.data() : none,
                  prev ? prev->jac_c.data() : none, alpha.c, b.c,
                  [&] { return MatData{draw_jacobian_perturbation(streams.jac_c, d, m, noise.sigma_c, dist)}; },
                  jc.data());
  average_samples(truth.c, prev_truth ? std::span<const double>(prev_truth->c) : none,
                  prev ? std::span<const double>(prev->c) : none, alpha.v, b.v,
                  [&] { return VecData{draw_perturbation(streams.c, m, noise.sigma_v, dist)}; }, cv);
  out.grad_f = std::move(g);
  out.jac_c = std::move(jc);
  out.c = std::move(cv);
}

void add_counts(SampleCounts& c, const BatchSizes& b, std::uint64_t factor) {
  c.grad_f += factor * b.f;
  c.jac_c += factor * b.c;
  c.c += factor * b.v;
}

}  // namespace

EstimatorState estimate_minibatch(const Evaluation& truth, const NoiseModel& noise, const BatchSizes& b,
                                  NoiseStreams& streams) {
  EstimatorState s;
  fill_estimates(truth, nullptr, nullptr, {}, noise, b, streams, s);
  add_counts(s.samples, b, 1);
  add_counts(s.evaluations, b, 1);
  s.initialized = true;
  return s;
}

void estimate_recursive(const Evaluation& truth, const Vector& x, const NoiseModel& noise, const BatchSizes& b,
                        NoiseStreams& streams, EstimatorState& state) {
  for (double a : {state.alpha.f, state.alpha.c, state.alpha.v})
    if (!(a >= 0.0 && a <= 1.0)) throw Error(ErrorCode::InvalidConfig, "momentum weights must lie in [0,1]");
  if (!state.initialized) {
    fill_estimates(truth, nullptr, nullptr, {}, noise, b, streams, state);
    add_counts(state.samples, b, 1);
    add_counts(state.evaluations, b, 1);
    state.initialized = true;
  } else {
    const EstimatorState prev = state;
    fill_estimates(truth, &prev.prev_truth, &prev, state.alpha, noise, b, streams, state);
    add_counts(state.samples, b, 1);
    add_counts(state.evaluations, b, 2);
  }
  state.prev_x = x;
  state.prev_truth = truth;
}

// ---- step -------------------------------------------------------------------------

Vector w_tilde_closed_form(const Matrix& j, const Vector& c, double vartheta) {
  if (j.cols() != c.size()) throw Error(ErrorCode::DimensionMismatch, "w_tilde: c length");
  return scaled(vartheta, GramFactor(j).solve(c));
}

StoStep direction_sto(const Vector& x, const Vector& grad_f, const Matrix& j, const Vector& c, double vartheta,
                      const std::vector<bool>& bounded, double qp_tol) {
  StoStep out;
  out.vartheta = vartheta;
  for (;; ++out.halvings) {
    const Vector w = w_tilde_closed_form(j, c, out.vartheta);
    try {
      out.step = direction_gen(x, grad_f, j, w, bounded, qp_tol);
      return out;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SubproblemInfeasible && e.code() != ErrorCode::QpMaxIter) throw;
      if (out.halvings >= 30)
        throw Error(ErrorCode::SubproblemInfeasible, "direction QP infeasible after 30 halvings of vartheta");
    }
    out.vartheta *= 0.5;
  }
}

MeritStep merit_step_sto(double prev_rho, const Vector& grad_f, const Vector& s, double c_norm, double vartheta,
                         double tau, double lip_grad_f, double lip_grad_c) {
  MeritStep r;
  r.rho = merit_param_gen(prev_rho, grad_f, s, c_norm, vartheta);
  r.eta = std::min(tau / (lip_grad_f + r.rho * (lip_grad_c + 1.0)), 1.0);
  return r;
}

// ---- driver -----------------------------------------------------------------------

void StoConfig::validate() const {
  if (!(vartheta_tilde > 0.0 && vartheta_tilde <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "vartheta_tilde must lie in (0,1]");
  if (!(tau > 0.0 && tau < 0.5)) throw Error(ErrorCode::InvalidConfig, "tau must lie in (0,1/2)");
  if (!(rho0 > 0.0)) throw Error(ErrorCode::InvalidConfig, "rho0 must be positive");
  if (K < 0) throw Error(ErrorCode::InvalidConfig, "K must be nonnegative");
  if (diag_every < 1) throw Error(ErrorCode::InvalidConfig, "diag_every must be positive");
  for (double a : {alpha.f, alpha.c, alpha.v})
    if (!(a >= 0.0 && a <= 1.0)) throw Error(ErrorCode::InvalidConfig, "momentum weights must lie in [0,1]");
  if (schedule.mode == BatchSchedule::Mode::Fixed &&
      (schedule.fixed.f < 1 || schedule.fixed.c < 1 || schedule.fixed.v < 1))
    throw Error(ErrorCode::InvalidConfig, "batch sizes must be at least 1");
}

namespace {

std::string schedule_name(BatchSchedule::Mode m) {
  switch (m) {
    case BatchSchedule::Mode::Fixed:
      return "fixed";
    case BatchSchedule::Mode::TheoryMiniBatch:
      return "minibatch-bound";
    case BatchSchedule::Mode::TheoryRecursive:
      return "recursive-bound";
  }
  return "fixed";
}

}  // namespace

json StoConfig::to_json() const {
  json j = {{"algorithm", "sto"},
            {"vartheta_tilde", vartheta_tilde},
            {"tau", tau},
            {"rho0", rho0},
            {"K", K},
            {"estimator", estimator == EstimatorKind::MiniBatch ? "minibatch" : "recursive"},
            {"alpha", {{"f", alpha.f}, {"c", alpha.c}, {"v", alpha.v}}},
            {"seed", seed},
            {"qp_tol", qp_tol},
            {"diag_every", diag_every}};
  json s = {{"mode", schedule_name(schedule.mode)}, {"max_batch", schedule.max_batch}};
  if (schedule.mode == BatchSchedule::Mode::Fixed) {
    s["batch"] = {{"f", schedule.fixed.f}, {"c", schedule.fixed.c}, {"v", schedule.fixed.v}};
  } else {
    s["sigma"] = {{"f", schedule.sigma_f}, {"c", schedule.sigma_c}, {"v", schedule.sigma_v}};
    s["eps"] = {{"f", schedule.eps_f}, {"c", schedule.eps_c}, {"v", schedule.eps_v}};
    s["gamma"] = schedule.gamma;
  }
  j["schedule"] = s;
  if (lipschitz)
    j["lipschitz"] = {{"grad_f", lipschitz->grad_f}, {"grad_c", lipschitz->grad_c}, {"c", lipschitz->c}};
  return j;
}

RunRecord solve_sto(const ProblemSpec& p, const NoiseModel& noise, const StoConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  RunRecord rec;
  rec.problem = p.name;
  rec.algorithm = "sto";
  rec.d = p.d;
  rec.m = p.m;
  rec.config = cfg.to_json();
  rec.config["noise"] = {{"sigma_f", noise.sigma_f},
                         {"sigma_c", noise.sigma_c},
                         {"sigma_v", noise.sigma_v},
                         {"distribution", noise.distribution == NoiseDistribution::UniformBall ? "uniform-ball"
                                                                                               : "signed-scaled"}};
  const Lipschitz lip = cfg.lipschitz.value_or(p.lipschitz);
  rec.config["lipschitz"] = {{"grad_f", lip.grad_f}, {"grad_c", lip.grad_c}, {"c", lip.c}};
  std::vector<bool> mask = p.lower_bounded;
  if (mask.empty()) mask.assign(p.d, false);

  int k = 0;
  try {
    Vector x = p.x0;
    for (std::size_t i = 0; i < p.d; ++i)
      if (mask[i]) x[i] = std::max(x[i], 0.0);
    NoiseStreams streams(cfg.seed);
    EstimatorState est;
    est.kind = cfg.estimator;
    est.alpha = cfg.alpha;
    double rho = cfg.rho0;
    double last_move = 0.0;
    for (;; ++k) {
      const Evaluation truth = evaluate(p, x);
      HistoryRow row;
      row.k = k;
      row.f = truth.f;
      row.rho = rho;
      row.kkt = {kNaN, norm(truth.c), kNaN};
      double min_x = INFINITY;
      for (std::size_t i = 0; i < p.d; ++i)
        if (mask[i]) min_x = std::min(min_x, x[i]);
      row.diag.min_x = min_x;
      rec.x_final = x;

      const bool last = k >= cfg.K;
      if (last || k % cfg.diag_every == 0) {
        // Noiseless reference quantities; they never feed the iteration.
        try {
          const FeasibilityResult fr = feasibility_subproblem(x, truth.c, truth.jac_c, mask, cfg.qp_tol);
          const StepResult ref = direction_gen(x, truth.grad_f, truth.jac_c, fr.w, mask, cfg.qp_tol);
          row.kkt = kkt_residual(truth, ref.lambda, ref.mu, x);
          rec.lambda_final = ref.lambda;
          rec.mu_final = ref.mu;
        } catch (const Error&) {
        }
      }
      if (last) {
        row.samples = est.samples;
        rec.history.push_back(row);
        rec.status = RunStatus::MaxIter;
        break;
      }

      const BatchSizes b = batch_sizes_at(cfg.schedule, k, last_move, lip, p.m, est.alpha);
      if (cfg.estimator == EstimatorKind::MiniBatch) {
        EstimatorState fresh = estimate_minibatch(truth, noise, b, streams);
        fresh.kind = est.kind;
        fresh.alpha = est.alpha;
        fresh.samples += est.samples;
        fresh.evaluations += est.evaluations;
        est = std::move(fresh);
      } else {
        estimate_recursive(truth, x, noise, b, streams, est);
      }
      row.samples = est.samples;
      row.diag.err_grad_f = norm(sub(est.grad_f, truth.grad_f));
      row.diag.err_jac_c = norm(sub(est.jac_c.data(), truth.jac_c.data()));
      row.diag.err_c = norm(sub(est.c, truth.c));

      const StoStep ss = direction_sto(x, est.grad_f, est.jac_c, est.c, cfg.vartheta_tilde, mask, cfg.qp_tol);
      const Vector& s = ss.step.s;
      const double c_norm = norm(est.c);
      const MeritStep ms = merit_step_sto(rho, est.grad_f, s, c_norm, ss.vartheta, cfg.tau, lip.grad_f, lip.grad_c);
      rho = ms.rho;
      row.rho = rho;
      row.eta = ms.eta;
      row.step_norm = norm(s);
      row.diag.vartheta = ss.vartheta;
      row.diag.contraction_err =
          std::fabs(norm(add(est.c, matvec_t(est.jac_c, s))) - (1.0 - ss.vartheta) * c_norm);
      row.diag.step_stationarity = stationarity_from_step(s, est.jac_c, ss.step.w);
      rec.history.push_back(row);
      axpy(ms.eta, s, x);
      last_move = ms.eta * row.step_norm;
    }
    rec.samples = est.samples;
    rec.evaluations = est.evaluations;
  } catch (const Error& e) {
    rec.status = RunStatus::Failed;
    rec.failure_reason = "iteration " + std::to_string(k) + ": " + e.what();
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace ddopt
