#include "ddopt/gensolve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

#include "ddopt/error.hpp"

namespace ddopt {

using nlohmann::json;

namespace {

bool is_bounded(const std::vector<bool>& mask, std::size_t i) { return mask.empty() || mask[i]; }

// Bound slack of x - J w; +inf on free components.
Vector bound_slack(const Vector& x, const Matrix& j, const Vector& w, const std::vector<bool>& bounded) {
  Vector g = sub(x, matvec(j, w));
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!is_bounded(bounded, i)) g[i] = INFINITY;
  return g;
}

// Minimum-norm v with J^T v = 0 and v_B >= -slack_B, if one exists.
std::optional<Vector> min_norm_certificate(const Matrix& j, const Vector& slack, double qp_tol) {
  const std::size_t d = slack.size();
  if (std::all_of(slack.begin(), slack.end(), [](double g) { return g >= 0.0; })) return Vector(d, 0.0);
  QpProblem qp;
  qp.n = d;
  qp.target.assign(d, 0.0);
  // Unit rows: with a tiny J an absolute residual test would accept v that
  // leaves the tangent space.
  qp.eq_lhs = j.transpose();
  for (std::size_t r = 0; r < qp.eq_lhs.rows(); ++r) {
    const double n = norm(qp.eq_lhs.row(r));
    if (n > 0.0)
      for (double& a : qp.eq_lhs.row(r)) a /= n;
  }
  qp.eq_rhs.assign(j.cols(), 0.0);
  qp.lower.resize(d);
  for (std::size_t i = 0; i < d; ++i) qp.lower[i] = std::isfinite(slack[i]) ? -slack[i] : -INFINITY;
  const QpSolution s = solve_qp(qp, qp_tol);
  if (s.status != QpStatus::Optimal) return std::nullopt;
  return s.z;
}

}  // namespace

FeasibilityResult feasibility_subproblem(const Vector& x, const Vector& c, const Matrix& j,
                                         const std::vector<bool>& bounded, double qp_tol) {
  const std::size_t d = x.size();
  const std::size_t m = c.size();
  if (j.rows() != d || j.cols() != m) throw Error(ErrorCode::DimensionMismatch, "feasibility: J shape");
  FeasibilityResult out;
  const double c_norm = norm(c);
  if (c_norm == 0.0) {
    out.w.assign(m, 0.0);
    out.v.assign(d, 0.0);
    return out;
  }
  const Matrix g = gram(j);
  // J may be (nearly) singular close to an infeasible stationary point, so
  // the closed form is only an opportunistic shortcut.
  bool have_w = false;
  if (auto ch = Cholesky::factor(g)) {
    double max_diag = 0.0;
    for (std::size_t i = 0; i < m; ++i) max_diag = std::max(max_diag, g(i, i));
    if (ch->min_pivot() > 1e-14 * max_diag) {
      Vector w = ch->solve(c);
      const Vector slack = bound_slack(x, j, w, bounded);
      if (all_finite(w) && std::all_of(slack.begin(), slack.end(), [](double s) { return s >= 0.0; })) {
        out.w = std::move(w);
        out.closed_form = true;
        have_w = true;
      }
    }
  }
  if (!have_w) {
    const FeasibilityQp fq = build_feasibility_qp(x, c, j, BallMode::L1, bounded);
    const QpSolution s = solve_qp(fq.qp, qp_tol);
    if (s.status == QpStatus::Infeasible)
      throw Error(ErrorCode::SubproblemInfeasible, "feasibility QP reported infeasible");
    if (s.status == QpStatus::MaxIter) throw Error(ErrorCode::QpMaxIter, "feasibility QP hit max_iter");
    out.w = fq.w(s.z);
  }
  // A QP solution can overshoot a bound by rounding, leaving no exact
  // certificate. Shrinking w restores one; as a last resort w is cut back
  // until x - J w >= 0 holds with v = 0.
  bool certified = false;
  for (double t : {1.0, 1.0 - 1e-9, 1.0 - 1e-6, 1.0 - 1e-3}) {
    const Vector wt = scaled(t, out.w);
    if (auto v = min_norm_certificate(j, bound_slack(x, j, wt, bounded), qp_tol)) {
      out.w = wt;
      out.v = std::move(*v);
      certified = true;
      break;
    }
  }
  if (!certified) {
    const Vector jw = matvec(j, out.w);
    double t = 1.0;
    for (std::size_t i = 0; i < d; ++i)
      if (is_bounded(bounded, i) && jw[i] > 0.0) t = std::min(t, std::max(x[i], 0.0) / jw[i]);
    out.w = scaled(t, out.w);
    out.v.assign(d, 0.0);
  }
  out.residual = norm(sub(c, matvec(g, out.w)));
  out.vartheta_eff = 1.0 - out.residual / c_norm;
  return out;
}

StepResult direction_gen(const Vector& x, const Vector& grad_f, const Matrix& j, const Vector& w,
                         const std::vector<bool>& bounded, double qp_tol) {
  const std::size_t d = x.size();
  if (grad_f.size() != d || j.rows() != d || j.cols() != w.size())
    throw Error(ErrorCode::DimensionMismatch, "direction_gen: dimensions");
  const Vector jw = matvec(j, w);
  QpProblem qp;
  qp.n = d;
  qp.target = scaled(-1.0, add(grad_f, jw));
  qp.eq_lhs = j.transpose();
  qp.eq_rhs = scaled(-1.0, matvec_t(j, jw));
  qp.lower.assign(d, -INFINITY);
  bool any_bound = false;
  for (std::size_t i = 0; i < d; ++i)
    if (is_bounded(bounded, i)) {
      qp.lower[i] = -x[i];
      any_bound = true;
    }
  if (!any_bound) qp.lower.clear();
  const QpSolution sol = solve_qp(qp, qp_tol);
  if (sol.status == QpStatus::Infeasible)
    throw Error(ErrorCode::SubproblemInfeasible, "direction QP reported infeasible");
  if (sol.status == QpStatus::MaxIter) throw Error(ErrorCode::QpMaxIter, "direction QP hit max_iter");
  StepResult r;
  r.s = sol.z;
  r.w = w;
  r.lambda = sol.eq_dual;
  r.mu = sol.bound_dual.empty() ? Vector(d, 0.0) : sol.bound_dual;
  r.qp_iterations = sol.iterations;
  return r;
}

namespace {
constexpr double kZeroViolation = 1e-300;
}

double merit_param_gen(double prev_rho, const Vector& grad_f, const Vector& s, double c_norm, double vartheta) {
  if (!(c_norm >= kZeroViolation)) return prev_rho;
  const double q = (dot(grad_f, s) + 0.5 * norm_sq(s)) / (vartheta * c_norm);
  return std::isfinite(q) ? std::max(q, prev_rho) : prev_rho;
}

double stepsize_gen(double rho, double lip_grad_f, double lip_grad_c, double tau) {
  return std::min(tau / (lip_grad_f + rho * lip_grad_c), 1.0);
}

bool detect_infeasible_stationary(double c_norm, double w_norm, double eps, double kappa1, double kappa2) {
  return c_norm > eps && w_norm <= eps / std::max(kappa1, kappa2);
}

Vector infeasibility_multiplier(const Matrix& j, const Vector& c, const std::vector<bool>& bounded) {
  Vector mu = matvec(j, c);
  for (std::size_t i = 0; i < mu.size(); ++i) mu[i] = is_bounded(bounded, i) ? std::max(mu[i], 0.0) : 0.0;
  return mu;
}

void GenConfig::validate() const {
  if (!(vartheta > 0.0 && vartheta < 1.0)) throw Error(ErrorCode::InvalidConfig, "vartheta must lie in (0,1)");
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::InvalidConfig, "tau must lie in (0,1)");
  if (!(rho0 > 0.0)) throw Error(ErrorCode::InvalidConfig, "rho0 must be positive");
  if (max_iter < 0) throw Error(ErrorCode::InvalidConfig, "max_iter must be nonnegative");
  if (!(tol_eps > 0.0) || !(infeas_eps > 0.0)) throw Error(ErrorCode::InvalidConfig, "tolerances must be positive");
  if ((kappa1 && !(*kappa1 > 0.0)) || (kappa2 && !(*kappa2 > 0.0)))
    throw Error(ErrorCode::InvalidConfig, "kappa values must be positive");
  if (!(qp_tol > 0.0)) throw Error(ErrorCode::InvalidConfig, "qp_tol must be positive");
}

json GenConfig::to_json() const {
  json j = {{"algorithm", "gen"},   {"vartheta", vartheta},     {"tau", tau},
            {"rho0", rho0},         {"max_iter", max_iter},     {"tol_eps", tol_eps},
            {"infeas_eps", infeas_eps}, {"qp_tol", qp_tol},     {"early_stop", early_stop}};
  if (kappa1) j["kappa1"] = *kappa1;
  if (kappa2) j["kappa2"] = *kappa2;
  if (lipschitz)
    j["lipschitz"] = {{"grad_f", lipschitz->grad_f}, {"grad_c", lipschitz->grad_c}, {"c", lipschitz->c}};
  return j;
}

RunRecord solve_gen(const ProblemSpec& p, const GenConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  RunRecord rec;
  rec.problem = p.name;
  rec.algorithm = "gen";
  rec.d = p.d;
  rec.m = p.m;
  rec.config = cfg.to_json();
  const Lipschitz lip = cfg.lipschitz.value_or(p.lipschitz);
  rec.config["lipschitz"] = {{"grad_f", lip.grad_f}, {"grad_c", lip.grad_c}, {"c", lip.c}};
  std::vector<bool> mask = p.lower_bounded;
  if (mask.empty()) mask.assign(p.d, false);

  int k = 0;
  try {
    Vector x = p.x0;
    for (std::size_t i = 0; i < p.d; ++i)
      if (mask[i]) x[i] = std::max(x[i], 0.0);
    double rho = cfg.rho0;
    double c_max = 0.0;
    const double lc2 = lip.c * lip.c;
    const double kappa1 = cfg.kappa1.value_or(lc2 * (1.0 + lip.c));
    Evaluation ev = evaluate(p, x);
    for (;; ++k) {
      const Matrix& j = ev.jac_c;
      const double c_norm = norm(ev.c);
      c_max = std::max(c_max, c_norm);
      const double kappa2 = cfg.kappa2.value_or(lc2 * c_max);

      double min_x = INFINITY;
      for (std::size_t i = 0; i < p.d; ++i)
        if (mask[i]) min_x = std::min(min_x, x[i]);

      const FeasibilityResult fr = feasibility_subproblem(x, ev.c, j, mask, cfg.qp_tol);
      HistoryRow row;
      row.k = k;
      row.f = ev.f;
      row.diag.min_x = min_x;
      rec.x_final = x;

      if (detect_infeasible_stationary(c_norm, norm(fr.w), cfg.infeas_eps, kappa1, kappa2)) {
        const Vector mu = infeasibility_multiplier(j, ev.c, mask);
        rec.has_infeasibility = true;
        rec.infeasibility = infeasibility_residual(j, ev.c, mu, x);
        row.kkt.feasibility = c_norm;
        row.rho = rho;
        rec.mu_final = mu;
        rec.lambda_final.clear();
        rec.history.push_back(row);
        rec.status = RunStatus::InfeasibleStationary;
        break;
      }

      StepResult st = direction_gen(x, ev.grad_f, j, fr.w, mask, cfg.qp_tol);
      st.v = fr.v;
      st.feas_residual = fr.residual;
      const double s_norm = norm(st.s);
      // The configured vartheta drives the merit update; the realized one is
      // only recorded (it collapses near infeasible stationary points).
      const double vt = cfg.vartheta;
      rho = merit_param_gen(rho, ev.grad_f, st.s, c_norm, vt);
      const double eta = stepsize_gen(rho, lip.grad_f, lip.grad_c, cfg.tau);

      row.kkt = kkt_residual(ev, st.lambda, st.mu, x);
      row.rho = rho;
      row.eta = eta;
      row.step_norm = s_norm;
      row.diag.vartheta = vt;
      row.diag.step_stationarity = stationarity_from_step(st.s, j, fr.w);
      rec.lambda_final = st.lambda;
      rec.mu_final = st.mu;

      if (cfg.early_stop && row.kkt.max() <= cfg.tol_eps) {
        rec.history.push_back(row);
        rec.status = RunStatus::Converged;
        break;
      }
      if (k >= cfg.max_iter) {
        rec.history.push_back(row);
        rec.status = RunStatus::MaxIter;
        break;
      }
      Vector x_next = x;
      axpy(eta, st.s, x_next);
      Evaluation ev_next = evaluate(p, x_next);
      row.diag.merit_before = ev.f + rho * c_norm;
      row.diag.merit_after = ev_next.f + rho * norm(ev_next.c);
      row.diag.required_decrease = eta * (1.0 - cfg.tau) / 2.0 * s_norm * s_norm;
      row.diag.contraction_err =
          norm(add(ev.c, scaled(eta, matvec_t(j, st.s)))) - (1.0 - eta * fr.vartheta_eff) * c_norm;
      rec.history.push_back(row);
      x = std::move(x_next);
      ev = std::move(ev_next);
    }
  } catch (const Error& e) {
    rec.status = RunStatus::Failed;
    rec.failure_reason = "iteration " + std::to_string(k) + ": " + e.what();
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace ddopt
