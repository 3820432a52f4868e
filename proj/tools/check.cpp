#include <cmath>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include "cli.hpp"
#include "ddopt/eqsolve.hpp"
#include "ddopt/error.hpp"
#include "ddopt/gensolve.hpp"
#include "ddopt/qp.hpp"
#include "ddopt/registry.hpp"
#include "ddopt/stosolve.hpp"

namespace ddopt::cli {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

Vector normal_vector(RngStream& rng, std::size_t n) {
  Vector v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

// Feasible by construction: the equalities pass through a bound-feasible point.
QpProblem random_qp(RngStream& rng) {
  QpProblem qp;
  qp.n = 1 + rng.next_u64() % 8;
  const std::size_t k = std::min<std::size_t>(rng.next_u64() % 4, qp.n - 1);
  qp.target = normal_vector(rng, qp.n);
  qp.lower.assign(qp.n, -INFINITY);
  for (double& l : qp.lower)
    if (rng.uniform() < 0.7) l = rng.uniform(-1.0, 1.0);
  Vector zf(qp.n);
  for (std::size_t i = 0; i < qp.n; ++i)
    zf[i] = std::isfinite(qp.lower[i]) ? qp.lower[i] + rng.uniform(0.0, 1.0) : rng.normal();
  qp.eq_lhs = Matrix(k, qp.n);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < qp.n; ++c) qp.eq_lhs(r, c) = rng.normal();
  qp.eq_rhs = matvec(qp.eq_lhs, zf);
  return qp;
}

CheckResult check_qp_brute_force() {
  RngStream rng(2024, 0);
  int compared = 0;
  int bad = 0;
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const QpProblem qp = random_qp(rng);
    const QpSolution bf = brute_force_qp(qp);
    const QpSolution ad = solve_qp(qp);
    if (bf.status != QpStatus::Optimal) continue;
    ++compared;
    if (ad.status != QpStatus::Optimal) {
      ++bad;
      continue;
    }
    const double dz = norm_inf(sub(bf.z, ad.z));
    const double dobj = std::fabs(qp_objective(qp, bf.z) - qp_objective(qp, ad.z));
    worst = std::max(worst, dz);
    if (dz > 1e-6 || dobj > 1e-9) ++bad;
  }
  return {"qp-brute-force", bad == 0 && compared >= 150,
          std::to_string(compared) + " QPs, " + std::to_string(bad) + " mismatches, max |dz| " + sci(worst)};
}

std::vector<CheckResult> check_gradients() {
  const char* corrupt = std::getenv("DDOPT_CHECK_CORRUPT_GRADIENT");
  std::vector<CheckResult> out;
  RngStream rng(7, 0);
  for (const std::string& name : registry_names()) {
    ProblemSpec p = registry_get(name);
    if (corrupt && name == corrupt) {
      auto g = p.grad_f;
      p.grad_f = [g](const Vector& x) {
        Vector v = g(x);
        v[0] += 1e-2;
        return v;
      };
    }
    double err_f = 0.0;
    double err_c = 0.0;
    for (int t = 0; t < 2; ++t) {
      Vector x = p.x0;
      if (t > 0)
        for (double& xi : x) xi += 0.1 * rng.normal();
      if (p.has_bounds())
        for (std::size_t i = 0; i < p.d; ++i)
          if (p.bounded(i)) x[i] = std::fabs(x[i]) + 0.1;
      const FdReport r = fd_check(p, x, 1e-6);
      err_f = std::max(err_f, r.max_rel_err_f);
      err_c = std::max(err_c, r.max_rel_err_c);
    }
    out.push_back({"fd[" + name + "]", err_f <= 1e-5 && err_c <= 1e-5,
                   "grad f " + sci(err_f) + ", jacobian " + sci(err_c)});
  }
  return out;
}

CheckResult check_planted_kkt() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed)
    for (bool bounds : {false, true}) {
      const ProblemSpec p = make_rand_quad({seed, 8, 3, bounds});
      const Evaluation ev = evaluate(p, *p.known_solution);
      worst = std::max(worst, kkt_residual(ev, *p.known_lambda, *p.known_mu, *p.known_solution).max());
    }
  return {"planted-kkt", worst <= 1e-10, "max residual " + sci(worst)};
}

bool same_bits(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

CheckResult check_estimator_identity() {
  const ProblemSpec p = registry_get("HS48");
  const NoiseModel noise = NoiseModel::uniform(1e-2, 0);
  RngStream pts(5, 0);
  int bad = 0;
  for (int t = 0; t < 25; ++t) {
    NoiseStreams a(t), b(t);
    EstimatorState rec;
    rec.kind = EstimatorKind::RecursiveMomentum;
    rec.alpha = {1.0, 1.0, 1.0};
    for (int s = 0; s < 2; ++s) {
      const Vector x = normal_vector(pts, p.d);
      const Evaluation truth = evaluate(p, x);
      const EstimatorState mb = estimate_minibatch(truth, noise, {2, 2, 2}, a);
      estimate_recursive(truth, x, noise, {2, 2, 2}, b, rec);
      if (!same_bits(mb.grad_f, rec.grad_f) || !same_bits(mb.jac_c.data(), rec.jac_c.data()) ||
          !same_bits(mb.c, rec.c))
        ++bad;
    }
  }
  return {"estimator-identity", bad == 0, std::to_string(bad) + " of 50 pairs differ"};
}

CheckResult check_zero_noise() {
  const ProblemSpec p = registry_get("HS28");
  const Evaluation truth = evaluate(p, p.x0);
  NoiseStreams s(1);
  const EstimatorState mb = estimate_minibatch(truth, NoiseModel{}, {3, 3, 3}, s);
  const double err = norm(sub(mb.grad_f, truth.grad_f)) + norm(sub(mb.c, truth.c));
  return {"estimator-zero-noise", err == 0.0, "error " + sci(err)};
}

CheckResult check_eq_descent() {
  double worst = -INFINITY;
  double contraction = 0.0;
  int failed = 0;
  for (const std::string& name : equality_suite()) {
    EqSolverConfig cfg;
    cfg.alpha_from_problem = true;
    cfg.max_iter = 200;
    const RunRecord r = solve_eq(registry_get(name), cfg);
    if (r.status == RunStatus::Failed) ++failed;
    for (const HistoryRow& h : r.history)
      if (std::isfinite(h.diag.merit_after)) {
        worst = std::max(worst, h.diag.descent_violation());
        contraction = std::max(contraction, h.diag.contraction_err);
      }
  }
  return {"eq-merit-descent", failed == 0 && worst <= 1e-8 && contraction <= 1e-9,
          "max violation " + sci(worst) + ", contraction " + sci(contraction)};
}

CheckResult check_gen_bounds() {
  double min_x = INFINITY;
  double worst = -INFINITY;
  int failed = 0;
  for (const std::string& name : bounded_suite()) {
    GenConfig cfg;
    cfg.max_iter = 300;
    const RunRecord r = solve_gen(registry_get(name), cfg);
    if (r.status == RunStatus::Failed) ++failed;
    for (const HistoryRow& h : r.history) {
      min_x = std::min(min_x, h.diag.min_x);
      if (std::isfinite(h.diag.merit_after)) worst = std::max(worst, h.diag.descent_violation());
    }
  }
  return {"gen-bounds-descent", failed == 0 && min_x >= -1e-9 && worst <= 1e-8,
          "min x " + sci(min_x) + ", max violation " + sci(worst)};
}

CheckResult check_sto_contraction() {
  double worst = 0.0;
  int failed = 0;
  const double tol = default_qp_tol();
  for (const char* name : {"HS48", "BOUNDQ"}) {
    StoConfig cfg;
    cfg.K = 100;
    cfg.seed = 3;
    const RunRecord r = solve_sto(registry_get(name), NoiseModel::uniform(1e-4, 0), cfg);
    if (r.status == RunStatus::Failed) ++failed;
    for (const HistoryRow& h : r.history)
      if (std::isfinite(h.diag.contraction_err)) worst = std::max(worst, h.diag.contraction_err);
  }
  return {"sto-contraction", failed == 0 && worst <= 2.0 * tol, "max error " + sci(worst)};
}

CheckResult check_infeasible() {
  GenConfig cfg;
  cfg.max_iter = 5000;
  const RunRecord r = solve_gen(registry_get("INFEAS1"), cfg);
  const bool ok = r.status == RunStatus::InfeasibleStationary && r.has_infeasibility &&
                  r.infeasibility.stationarity <= 1e-6 && r.infeasibility.complementarity <= 1e-6;
  return {"infeasible-detection", ok,
          std::string(to_string(r.status)) + " after " + std::to_string(r.iterations()) + " iterations"};
}

template <class F>
void guarded(std::vector<CheckResult>& out, const char* name, F f) {
  try {
    out.push_back(f());
  } catch (const std::exception& e) {
    out.push_back({name, false, std::string("threw: ") + e.what()});
  }
}

}  // namespace

std::vector<CheckResult> run_checks() {
  std::vector<CheckResult> out;
  guarded(out, "qp-brute-force", check_qp_brute_force);
  try {
    for (CheckResult& r : check_gradients()) out.push_back(std::move(r));
  } catch (const std::exception& e) {
    out.push_back({"fd", false, std::string("threw: ") + e.what()});
  }
  guarded(out, "planted-kkt", check_planted_kkt);
  guarded(out, "estimator-identity", check_estimator_identity);
  guarded(out, "estimator-zero-noise", check_zero_noise);
  guarded(out, "eq-merit-descent", check_eq_descent);
  guarded(out, "gen-bounds-descent", check_gen_bounds);
  guarded(out, "sto-contraction", check_sto_contraction);
  guarded(out, "infeasible-detection", check_infeasible);
  return out;
}

}  // namespace ddopt::cli
