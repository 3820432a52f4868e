#include "ddopt/eqsolve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ddopt/error.hpp"

namespace ddopt {

using nlohmann::json;

OperatorAChoice OperatorAChoice::with_alpha(double alpha) const {
  OperatorAChoice out = *this;
  out.alpha1 = alpha;
  out.alpha2 = kind == Kind::Hybrid ? alpha : 0.0;
  return out;
}

void OperatorAChoice::validate() const {
  if (!(alpha1 > 0.0) || (kind == Kind::Hybrid && !(alpha2 > 0.0)))
    throw Error(ErrorCode::InvalidConfig, "mapping weights must be positive");
}

std::string to_string(OperatorAChoice::Kind k) {
  switch (k) {
    case OperatorAChoice::Kind::ScaledIdentity:
      return "scaled-identity";
    case OperatorAChoice::Kind::GramInverse:
      return "gram-inverse";
    case OperatorAChoice::Kind::Hybrid:
      return "hybrid";
  }
  return "gram-inverse";
}

OperatorAChoice::Kind parse_operator_kind(const std::string& s) {
  for (auto k : {OperatorAChoice::Kind::ScaledIdentity, OperatorAChoice::Kind::GramInverse,
                 OperatorAChoice::Kind::Hybrid})
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::InvalidConfig, "unknown mapping: " + s);
}

AResult apply_A(const Matrix& j, const OperatorAChoice& choice, const Vector& c) {
  choice.validate();
  const std::size_t m = j.cols();
  if (c.size() != m) throw Error(ErrorCode::DimensionMismatch, "apply_A: c length");
  const GramFactor gf(j);  // throws RankDeficient
  AResult r;
  r.a = Matrix(m, m);
  r.ac.assign(m, 0.0);
  if (choice.kind != OperatorAChoice::Kind::GramInverse) {
    const double a1 = choice.alpha1;
    const Matrix& g = gf.gram();
    r.beta += a1 * min_eigenvalue_spd(g);
    r.op_norm += a1 * max_eigenvalue_sym(g);
    axpy(a1, c, r.ac);
    for (std::size_t i = 0; i < m; ++i) r.a(i, i) += a1;
  }
  if (choice.kind != OperatorAChoice::Kind::ScaledIdentity) {
    const double a2 = choice.kind == OperatorAChoice::Kind::GramInverse ? choice.alpha1 : choice.alpha2;
    r.beta += a2;
    r.op_norm += a2;
    axpy(a2, gf.solve(c), r.ac);
    Vector e(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      e[i] = 1.0;
      const Vector col = gf.solve(e);
      for (std::size_t k = 0; k < m; ++k) r.a(k, i) += a2 * col[k];
      e[i] = 0.0;
    }
  }
  return r;
}

Vector direction_eq(const Vector& grad_f, const Matrix& j, const Vector& c, const OperatorAChoice& choice) {
  const AResult ar = apply_A(j, choice, c);
  Vector s = scaled(-1.0, project_tangent(j, grad_f));
  axpy(-1.0, matvec(j, ar.ac), s);
  return s;
}

namespace {
constexpr double kZeroViolation = 1e-300;
}

double merit_param_eq(double prev_rho, const Vector& grad_f, const Vector& s, double c_norm, double beta) {
  if (!(c_norm >= kZeroViolation)) return prev_rho;
  const double q = (dot(grad_f, s) + 0.5 * norm_sq(s)) / (beta * c_norm);
  return std::isfinite(q) ? std::max(q, prev_rho) : prev_rho;
}

double stepsize_eq(double rho, double lip_grad_f, double lip_grad_c, double tau, double op_norm) {
  return std::min(tau / (lip_grad_f + rho * lip_grad_c), 1.0 / op_norm);
}

Vector multiplier_eq(const Matrix& j, const Vector& grad_f) { return GramFactor(j).multiplier(grad_f); }

void EqSolverConfig::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::InvalidConfig, "tau must lie in (0,1)");
  if (!(rho0 > 0.0)) throw Error(ErrorCode::InvalidConfig, "rho0 must be positive");
  if (max_iter < 0) throw Error(ErrorCode::InvalidConfig, "max_iter must be nonnegative");
  if (!(tol_eps > 0.0)) throw Error(ErrorCode::InvalidConfig, "tol_eps must be positive");
  if (!alpha_from_problem) A.validate();
}

json EqSolverConfig::to_json() const {
  json j = {{"algorithm", "eq"},
            {"tau", tau},
            {"rho0", rho0},
            {"max_iter", max_iter},
            {"tol_eps", tol_eps},
            {"A", {{"kind", to_string(A.kind)}, {"alpha1", A.alpha1}, {"alpha2", A.alpha2}}},
            {"alpha_from_problem", alpha_from_problem},
            {"early_stop", early_stop}};
  if (lipschitz)
    j["lipschitz"] = {{"grad_f", lipschitz->grad_f}, {"grad_c", lipschitz->grad_c}, {"c", lipschitz->c}};
  return j;
}

RunRecord solve_eq(const ProblemSpec& p, const EqSolverConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  RunRecord rec;
  rec.problem = p.name;
  rec.algorithm = "eq";
  rec.d = p.d;
  rec.m = p.m;
  const OperatorAChoice choice = cfg.alpha_from_problem ? cfg.A.with_alpha(p.default_alpha) : cfg.A;
  rec.config = cfg.to_json();
  rec.config["A"] = {{"kind", to_string(choice.kind)}, {"alpha1", choice.alpha1}, {"alpha2", choice.alpha2}};
  const Lipschitz lip = cfg.lipschitz.value_or(p.lipschitz);
  rec.config["lipschitz"] = {{"grad_f", lip.grad_f}, {"grad_c", lip.grad_c}, {"c", lip.c}};

  int k = 0;
  try {
    if (p.has_bounds()) throw Error(ErrorCode::InvalidConfig, "equality solver given a bounded problem");
    Vector x = p.x0;
    double rho = cfg.rho0;
    Evaluation ev = evaluate(p, x);
    for (;; ++k) {
      const Matrix& j = ev.jac_c;
      const GramFactor gf(j);
      const AResult ar = apply_A(j, choice, ev.c);
      Vector s = scaled(-1.0, gf.project(ev.grad_f));
      axpy(-1.0, matvec(j, ar.ac), s);
      const Vector lambda = gf.multiplier(ev.grad_f);
      const double c_norm = norm(ev.c);
      const double s_norm = norm(s);

      rho = merit_param_eq(rho, ev.grad_f, s, c_norm, ar.beta);
      const double eta = stepsize_eq(rho, lip.grad_f, lip.grad_c, cfg.tau, ar.op_norm);

      HistoryRow row;
      row.k = k;
      row.f = ev.f;
      row.kkt = kkt_residual(ev, lambda, {}, x);
      row.rho = rho;
      row.eta = eta;
      row.step_norm = s_norm;
      row.diag.vartheta = ar.beta;

      rec.x_final = x;
      rec.lambda_final = lambda;
      const double delta = min_singular_value(matmul(j, ar.a));
      if (cfg.early_stop && s_norm <= cfg.tol_eps * std::min(delta, 1.0)) {
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
      axpy(eta, s, x_next);
      Evaluation ev_next = evaluate(p, x_next);
      row.diag.merit_before = ev.f + rho * c_norm;
      row.diag.merit_after = ev_next.f + rho * norm(ev_next.c);
      row.diag.required_decrease = eta * (1.0 - cfg.tau) / 2.0 * s_norm * s_norm;
      row.diag.contraction_err = norm(add(ev.c, scaled(eta, matvec_t(j, s)))) - (1.0 - eta * ar.beta) * c_norm;
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
