#include <cmath>

#include "doctest.h"
#include "ddopt/eqsolve.hpp"
#include "ddopt/error.hpp"
#include "ddopt/registry.hpp"
#include "oracles.hpp"

using namespace ddopt;

namespace {

const Matrix kCol11 = Matrix::column(Vector{1, 1});

EqSolverConfig default_cfg(int iters = 1000) {
  EqSolverConfig cfg;
  cfg.alpha_from_problem = true;
  cfg.max_iter = iters;
  return cfg;
}

}  // namespace

TEST_CASE("apply_A examples") {
  RngStream rng(5, 0);
  const Matrix j = oracle::random_matrix(rng, 5, 2);
  const AResult g = apply_A(j, OperatorAChoice::gram_inverse(2.0), {0.3, -0.1});
  CHECK(g.beta == 2.0);
  CHECK(g.op_norm == 2.0);

  const AResult s = apply_A(kCol11, OperatorAChoice::scaled_identity(1.0), {-1.0});
  CHECK(s.ac[0] == -1.0);
  CHECK(s.beta == doctest::Approx(2.0));
  CHECK(s.op_norm == doctest::Approx(2.0));

  const AResult h = apply_A(kCol11, OperatorAChoice::hybrid(1.0, 1.0), {-1.0});
  CHECK(h.beta == doctest::Approx(3.0));
  CHECK(h.op_norm == doctest::Approx(3.0));
}

TEST_CASE("apply_A bounds the spectrum of J^T J A") {
  RngStream rng(6, 0);
  for (int t = 0; t < 30; ++t) {
    const Matrix j = oracle::random_matrix(rng, 6, 3);
    for (auto choice : {OperatorAChoice::scaled_identity(0.7), OperatorAChoice::gram_inverse(1.3),
                        OperatorAChoice::hybrid(0.4, 0.9)}) {
      const AResult r = apply_A(j, choice, {1, 2, 3});
      const Matrix jtja = oracle::naive_transpose_times(j, matmul(j, r.a));
      // J^T J A is symmetric for all three mappings.
      for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) CHECK(std::fabs(jtja(a, b) - jtja(b, a)) <= 1e-10 * (1 + std::fabs(jtja(a, b))));
      const Vector ev = oracle::jacobi_eigenvalues(jtja);
      CHECK(r.beta == doctest::Approx(ev.front()).epsilon(1e-7));
      CHECK(r.op_norm == doctest::Approx(ev.back()).epsilon(1e-7));
      const Vector ac = oracle::naive_matvec(r.a, {1, 2, 3});
      for (std::size_t i = 0; i < 3; ++i) CHECK(r.ac[i] == doctest::Approx(ac[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("apply_A rejects rank-deficient Jacobians and bad weights") {
  const Matrix j = Matrix::from_rows({{1, 2}, {2, 4}, {0, 0}});
  CHECK_THROWS_AS(apply_A(j, OperatorAChoice::gram_inverse(1.0), {1, 1}), Error);
  try {
    apply_A(j, OperatorAChoice::scaled_identity(1.0), {1, 1});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RankDeficient);
  }
  CHECK_THROWS_AS(apply_A(kCol11, OperatorAChoice::gram_inverse(0.0), {1}), Error);
}

TEST_CASE("direction_eq examples") {
  const Vector s1 = direction_eq({0, 0}, kCol11, {-1}, OperatorAChoice::scaled_identity(1.0));
  CHECK(s1[0] == doctest::Approx(1.0));
  CHECK(s1[1] == doctest::Approx(1.0));

  const Vector s2 = direction_eq({0, 0}, kCol11, {-1}, OperatorAChoice::gram_inverse(1.0));
  CHECK(s2[0] == doctest::Approx(0.5));
  CHECK(s2[1] == doctest::Approx(0.5));
  CHECK(oracle::naive_matvec_t(kCol11, s2)[0] == doctest::Approx(1.0));

  const Vector g{1, -1};  // in null(J^T)
  const Vector s3 = direction_eq(g, kCol11, {0}, OperatorAChoice::gram_inverse(1.0));
  CHECK(s3[0] == doctest::Approx(-1.0));
  CHECK(s3[1] == doctest::Approx(1.0));
}

TEST_CASE("direction_eq splits into orthogonal tangent and normal parts") {
  RngStream rng(8, 0);
  for (int t = 0; t < 50; ++t) {
    const Matrix j = oracle::random_matrix(rng, 7, 3);
    const Vector g = oracle::random_vector(rng, 7);
    const Vector c = oracle::random_vector(rng, 3);
    const double alpha = rng.uniform(0.2, 3.0);
    const auto choice = OperatorAChoice::gram_inverse(alpha);
    const Vector s = direction_eq(g, j, c, choice);
    const Vector tangent = oracle::projection_via_normal_equations(j, g);
    Vector normal = s;
    for (std::size_t i = 0; i < 7; ++i) normal[i] += tangent[i];  // = -J A c
    CHECK(std::fabs(oracle::naive_dot(tangent, normal)) <= 1e-10 * oracle::naive_norm(g) * (1 + oracle::naive_norm(c)) * 10);
    // Gram-inverse mapping reproduces the linearized system J^T s = -alpha c.
    const Vector jts = oracle::naive_matvec_t(j, s);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::fabs(jts[i] + alpha * c[i]) <= 1e-9 * (1 + oracle::naive_norm(c)));
  }
}

TEST_CASE("merit_param_eq examples") {
  CHECK(merit_param_eq(1.0, {1, 0}, {1, 1}, 1.0, 0.5) == doctest::Approx(4.0));
  CHECK(merit_param_eq(2.5, {1, 0}, {1, 1}, 0.0, 0.5) == 2.5);
  CHECK(merit_param_eq(2.5, {-10, 0}, {1, 1}, 1.0, 0.5) == 2.5);
  CHECK(merit_param_eq(2.5, {1, 0}, {1, 1}, 1e-320, 0.5) == 2.5);
}

TEST_CASE("stepsize_eq examples") {
  CHECK(stepsize_eq(4.0, 2.0, 1.0, 0.5, 10.0) == doctest::Approx(1.0 / 12.0));
  CHECK(stepsize_eq(4.0, 2.0, 1.0, 0.5, 1e9) == doctest::Approx(1e-9));
  CHECK(stepsize_eq(1e12, 2.0, 1.0, 0.5, 1.0) < 1e-12);
}

TEST_CASE("multiplier_eq examples") {
  const Vector l0 = multiplier_eq(kCol11, {1, -1});
  CHECK(std::fabs(l0[0]) < 1e-15);

  const Matrix j = Matrix::column(Vector{1, 0});
  const Vector l = multiplier_eq(j, {2, 1});
  CHECK(l[0] == doctest::Approx(-2.0));
  Vector r{2, 1};
  r[0] += l[0];
  CHECK(oracle::naive_norm(r) == doctest::Approx(1.0));

  const ProblemSpec p = registry_get("rand-quad(seed=7,d=6,m=2)");
  const Evaluation ev = evaluate(p, *p.known_solution);
  const Vector lam = multiplier_eq(ev.jac_c, ev.grad_f);
  Vector st = ev.grad_f;
  const Vector jl = oracle::naive_matvec(ev.jac_c, lam);
  for (std::size_t i = 0; i < st.size(); ++i) st[i] += jl[i];
  CHECK(oracle::naive_norm(st) <= 1e-8);
}

TEST_CASE("multiplier residual equals the tangent component") {
  RngStream rng(9, 0);
  for (int t = 0; t < 40; ++t) {
    const Matrix j = oracle::random_matrix(rng, 6, 2);
    const Vector g = oracle::random_vector(rng, 6);
    const Vector lam = multiplier_eq(j, g);
    Vector st = g;
    const Vector jl = oracle::naive_matvec(j, lam);
    for (std::size_t i = 0; i < 6; ++i) st[i] += jl[i];
    CHECK(std::fabs(oracle::naive_norm(st) - oracle::naive_norm(project_tangent(j, g))) <= 1e-10);
  }
}

TEST_CASE("solve_eq reaches the reference accuracy on BOOTH and HS6") {
  const RunRecord booth = solve_eq(registry_get("BOOTH"), default_cfg());
  CHECK(booth.status != RunStatus::Failed);
  CHECK(booth.final_kkt().feasibility <= 1e-4);

  const RunRecord hs6 = solve_eq(registry_get("HS6"), default_cfg());
  CHECK(hs6.final_kkt().stationarity <= 1e-4);
  CHECK(hs6.final_kkt().feasibility <= 1e-4);
}

TEST_CASE("solve_eq converges to the planted KKT point") {
  for (std::uint64_t seed : {1u, 7u, 11u}) {
    const ProblemSpec p = make_rand_quad({seed, 8, 3, false});
    EqSolverConfig cfg = default_cfg(5000);
    cfg.tol_eps = 1e-7;
    const RunRecord r = solve_eq(p, cfg);
    CAPTURE(seed);
    CHECK(r.status == RunStatus::Converged);
    CHECK(r.final_kkt().max() <= 1e-6);
    for (std::size_t i = 0; i < p.d; ++i) CHECK(std::fabs(r.x_final[i] - (*p.known_solution)[i]) <= 1e-5);
  }
}

TEST_CASE("solve_eq invariants on the equality suite") {
  for (const std::string& name : equality_suite()) {
    const ProblemSpec p = registry_get(name);
    const EqSolverConfig cfg = default_cfg(300);
    const RunRecord r = solve_eq(p, cfg);
    CAPTURE(name);
    REQUIRE(r.status != RunStatus::Failed);
    CHECK(r.history.size() <= std::size_t(cfg.max_iter) + 1);
    const double eta_cap = cfg.tau / (p.lipschitz.grad_f + cfg.rho0 * p.lipschitz.grad_c);
    for (std::size_t i = 0; i < r.history.size(); ++i) {
      const HistoryRow& h = r.history[i];
      CHECK(h.k == int(i));
      if (i > 0) CHECK(h.rho >= r.history[i - 1].rho);
      CHECK(h.eta <= eta_cap * (1 + 1e-12));
      if (std::isfinite(h.diag.merit_after)) {
        CHECK(h.diag.descent_violation() <= 1e-8);
        CHECK(h.diag.contraction_err <= 1e-9);
      }
    }
  }
}

TEST_CASE("average squared step decreases along a run") {
  const RunRecord r = solve_eq(registry_get("HS40"), [] {
    EqSolverConfig c = default_cfg(400);
    c.early_stop = false;
    return c;
  }());
  double sum = 0.0;
  double avg_100 = 0.0;
  for (const HistoryRow& h : r.history) {
    sum += h.step_norm * h.step_norm;
    if (h.k == 99) avg_100 = sum / 100.0;
  }
  CHECK(sum / double(r.history.size()) < avg_100);
}

TEST_CASE("solve_eq reports rank loss as a failed run") {
  ProblemSpec p;
  p.name = "rankloss";
  p.d = 2;
  p.m = 1;
  p.f = [](const Vector& x) { return x[0] + x[1]; };
  p.grad_f = [](const Vector&) { return Vector{1, 1}; };
  p.c = [](const Vector& x) { return Vector{x[0] * x[0] + x[1] * x[1]}; };
  p.jac_c = [](const Vector& x) { return Matrix::column(Vector{2 * x[0], 2 * x[1]}); };
  p.x0 = {0, 0};
  const RunRecord r = solve_eq(p, default_cfg());
  CHECK(r.status == RunStatus::Failed);
  CHECK(r.failure_reason.find("iteration 0") != std::string::npos);
  CHECK(r.failure_reason.find("RankDeficient") != std::string::npos);
}

TEST_CASE("solve_eq validates its configuration") {
  EqSolverConfig cfg;
  cfg.tau = 1.5;
  CHECK_THROWS_AS(solve_eq(registry_get("HS6"), cfg), Error);
  CHECK(solve_eq(registry_get("BOUNDQ"), EqSolverConfig{}).status == RunStatus::Failed);
}
