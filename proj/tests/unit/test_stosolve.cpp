#include <algorithm>
#include <cmath>
#include <cstring>

#include "doctest.h"
#include "ddopt/error.hpp"
#include "ddopt/registry.hpp"
#include "ddopt/stosolve.hpp"
#include "oracles.hpp"

using namespace ddopt;

namespace {

const Matrix kCol11 = Matrix::column(Vector{1, 1});
const double kInvE = std::exp(-1.0);

Evaluation sample_truth() {
  const ProblemSpec p = registry_get("HS28");
  return evaluate(p, p.x0);
}

bool same_bits(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0) return false;
  return true;
}

}  // namespace

TEST_CASE("mini-batch sizes") {
  CHECK(batch_size_minibatch(1.0, 0.1, kInvE, 1) == 900);
  CHECK(batch_size_minibatch(0.0, 0.1, kInvE, 1) == 1);
  CHECK(batch_size_minibatch(1.0, 0.1, kInvE, 4) == 3600);
  CHECK(batch_size_minibatch(1e-3, 1.0, 0.5, 1) == 1);
  CHECK_THROWS_AS(batch_size_minibatch(1.0, 0.0, 0.5, 1), Error);
  CHECK_THROWS_AS(batch_size_minibatch(1.0, 0.1, 1.0, 1), Error);
}

TEST_CASE("recursive-momentum batch sizes") {
  using K = RecursiveBatchKind;
  CHECK(batch_size_recursive(K::Init, 1.0, 0.3, kInvE, 0.1, 0.0, 1.0) == 900);
  // Zero step: only the variance branch 81 / 0.3 remains.
  CHECK(batch_size_recursive(K::Step, 1.0, 0.3, kInvE, 0.1, 0.0, 1.0) == 270);
  // Gradient branch 324 * 0.01 / (0.1 * 0.09) = 360 dominates the variance branch 270.
  CHECK(batch_size_recursive(K::Step, 1.0, 0.3, kInvE, 0.1, 0.1, 1.0) == 360);
  // Constraint values use eps^4 and eps^3.
  const double l4 = 324.0 * 0.01 / (0.1 * std::pow(0.3, 4));
  const double v3 = 81.0 / std::pow(0.3, 3);
  CHECK(batch_size_recursive(K::Step, 1.0, 0.3, kInvE, 0.1, 0.1, 1.0, 1, EstimateFamily::ConstraintValue) ==
        std::uint64_t(std::ceil(std::max(l4, v3) - 1e-9)));
  CHECK(batch_size_recursive(K::Init, 0.0, 0.3, kInvE, 0.1, 0.0, 1.0) == 1);
  CHECK(batch_size_recursive(K::Init, 1.0, 0.3, kInvE, 0.1, 0.0, 1.0, 3) == 2700);
}

TEST_CASE("batch schedules are clipped and never below one") {
  BatchSchedule s;
  s.mode = BatchSchedule::Mode::TheoryMiniBatch;
  s.sigma_f = s.sigma_c = s.sigma_v = 1.0;
  s.eps_f = s.eps_c = s.eps_v = 1e-6;
  s.max_batch = 5000;
  const BatchSizes b = batch_sizes_at(s, 0, 0.0, {1, 1, 1}, 2, {});
  CHECK(b.f == 5000);
  CHECK(b.c == 5000);
  s.sigma_f = s.sigma_c = s.sigma_v = 0.0;
  const BatchSizes z = batch_sizes_at(s, 3, 0.1, {1, 1, 1}, 2, {});
  CHECK(z.f == 1);
  CHECK(z.c == 1);
  CHECK(z.v == 1);

  s.mode = BatchSchedule::Mode::TheoryRecursive;
  s.sigma_f = s.sigma_c = s.sigma_v = 0.01;
  s.eps_f = s.eps_c = s.eps_v = 0.3;
  s.gamma = kInvE;
  s.max_batch = std::uint64_t{1} << 20;
  const BatchSizes r0 = batch_sizes_at(s, 0, 0.0, {1, 1, 1}, 1, {});
  const BatchSizes r1 = batch_sizes_at(s, 1, 0.1, {1, 1, 1}, 1, {});
  CHECK(r0.f == 1);
  CHECK(r1.f == 360);
}

TEST_CASE("from_target_eps formulas") {
  TargetConstants k;
  k.kappa5 = 2.0;
  k.kappa6 = 3.0;
  k.K = 50;
  const TheoryParameters mb = from_target_eps(0.1, 1, 1, 1, k, EstimatorKind::MiniBatch);
  CHECK(mb.schedule.mode == BatchSchedule::Mode::TheoryMiniBatch);
  CHECK(mb.schedule.eps_f == doctest::Approx(0.1 / 6.0));
  CHECK(mb.schedule.eps_v == doctest::Approx(0.01 / 36.0));
  CHECK(mb.schedule.eps_c <= mb.schedule.eps_f);
  CHECK(mb.schedule.gamma == doctest::Approx(0.1 / 150.0));

  const TheoryParameters rm = from_target_eps(0.1, 1, 1, 1, k, EstimatorKind::RecursiveMomentum);
  const double a = 0.1 / std::sqrt(180.0);
  CHECK(rm.schedule.mode == BatchSchedule::Mode::TheoryRecursive);
  CHECK(rm.schedule.eps_f == doctest::Approx(a));
  CHECK(rm.alpha.f == doctest::Approx(a));
  CHECK(rm.schedule.gamma == doctest::Approx(0.1 / 300.0));
  CHECK_THROWS_AS(from_target_eps(0.0, 1, 1, 1, k, EstimatorKind::MiniBatch), Error);
}

TEST_CASE("zero noise estimators are exact") {
  const Evaluation t = sample_truth();
  NoiseStreams streams(3);
  const EstimatorState mb = estimate_minibatch(t, NoiseModel{}, {4, 5, 6}, streams);
  CHECK(same_bits(mb.grad_f, t.grad_f));
  CHECK(same_bits(mb.jac_c.data(), t.jac_c.data()));
  CHECK(same_bits(mb.c, t.c));
  CHECK(mb.samples == SampleCounts{4, 5, 6});

  EstimatorState st;
  st.kind = EstimatorKind::RecursiveMomentum;
  st.alpha = {0.3, 0.6, 0.9};
  estimate_recursive(t, {0, 0, 0}, NoiseModel{}, {2, 2, 2}, streams, st);
  const ProblemSpec p = registry_get("HS28");
  const Vector x1{0.5, -0.2, 1.0};
  const Evaluation t1 = evaluate(p, x1);
  estimate_recursive(t1, x1, NoiseModel{}, {2, 2, 2}, streams, st);
  for (std::size_t i = 0; i < t1.grad_f.size(); ++i) CHECK(st.grad_f[i] == doctest::Approx(t1.grad_f[i]).epsilon(1e-14));
  for (std::size_t i = 0; i < t1.c.size(); ++i) CHECK(st.c[i] == doctest::Approx(t1.c[i]).epsilon(1e-14));
}

TEST_CASE("recursive estimate at an unchanged point") {
  const Evaluation t = sample_truth();
  const Vector x{1, 2, 3};
  NoiseStreams streams(4);
  for (double alpha : {1.0, 0.0}) {
    EstimatorState st;
    st.kind = EstimatorKind::RecursiveMomentum;
    st.alpha = {alpha, alpha, alpha};
    st.initialized = true;
    st.prev_x = x;
    st.prev_truth = t;
    st.grad_f = add(t.grad_f, Vector(t.grad_f.size(), 0.25));
    st.jac_c = t.jac_c;
    st.c = add(t.c, Vector(t.c.size(), -0.5));
    const Vector stale_g = st.grad_f;
    const Vector stale_c = st.c;
    estimate_recursive(t, x, NoiseModel{}, {3, 3, 3}, streams, st);
    CAPTURE(alpha);
    for (std::size_t i = 0; i < t.grad_f.size(); ++i)
      CHECK(st.grad_f[i] == doctest::Approx(alpha == 1.0 ? t.grad_f[i] : stale_g[i]).epsilon(1e-14));
    for (std::size_t i = 0; i < t.c.size(); ++i)
      CHECK(st.c[i] == doctest::Approx(alpha == 1.0 ? t.c[i] : stale_c[i]).epsilon(1e-14));
  }
}

TEST_CASE("recursive estimator with unit weights reproduces the mini-batch stream bit for bit") {
  const ProblemSpec p = registry_get("HS48");
  RngStream pts(77, 0);
  const NoiseModel noise = NoiseModel::uniform(1e-2, 0);
  for (int t = 0; t < 40; ++t) {
    NoiseStreams a(100 + t);
    NoiseStreams b(100 + t);
    EstimatorState rec;
    rec.kind = EstimatorKind::RecursiveMomentum;
    rec.alpha = {1.0, 1.0, 1.0};
    for (int step = 0; step < 3; ++step) {
      const Vector x = oracle::random_vector(pts, p.d);
      const Evaluation truth = evaluate(p, x);
      const BatchSizes bs{std::uint64_t(1 + step), 2, 3};
      const EstimatorState mb = estimate_minibatch(truth, noise, bs, a);
      estimate_recursive(truth, x, noise, bs, b, rec);
      CHECK(same_bits(mb.grad_f, rec.grad_f));
      CHECK(same_bits(mb.jac_c.data(), rec.jac_c.data()));
      CHECK(same_bits(mb.c, rec.c));
    }
  }
}

TEST_CASE("mini-batch gradient error obeys the concentration bound") {
  const Evaluation t = sample_truth();
  const double sigma = 0.5;
  const double gamma = 0.1;
  const std::uint64_t batch = 16;
  const NoiseModel noise = NoiseModel::uniform(sigma, 0);
  NoiseStreams streams(9);
  const double bound = 3.0 * sigma * std::sqrt(std::log(1.0 / gamma) / double(batch));
  int inside = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    const EstimatorState e = estimate_minibatch(t, noise, {batch, 1, 1}, streams);
    if (oracle::naive_norm(sub(e.grad_f, t.grad_f)) <= bound) ++inside;
  }
  CHECK(double(inside) / trials >= 1.0 - gamma);
}

TEST_CASE("recursive evaluations count both points after initialization") {
  const Evaluation t = sample_truth();
  NoiseStreams streams(5);
  EstimatorState st;
  st.kind = EstimatorKind::RecursiveMomentum;
  estimate_recursive(t, {0, 0, 0}, NoiseModel{}, {2, 3, 4}, streams, st);
  estimate_recursive(t, {0, 0, 0}, NoiseModel{}, {2, 3, 4}, streams, st);
  CHECK(st.samples == SampleCounts{4, 6, 8});
  CHECK(st.evaluations == SampleCounts{6, 9, 12});
  st.alpha.f = 1.5;
  CHECK_THROWS_AS(estimate_recursive(t, {0, 0, 0}, NoiseModel{}, {1, 1, 1}, streams, st), Error);
}

TEST_CASE("w_tilde_closed_form examples") {
  CHECK(w_tilde_closed_form(kCol11, {2}, 0.5)[0] == doctest::Approx(0.5));
  CHECK(w_tilde_closed_form(kCol11, {0}, 0.5)[0] == 0.0);
  const Matrix eye = Matrix::identity(3);
  const Vector w = w_tilde_closed_form(eye, {1, -2, 3}, 1.0);
  CHECK(w[1] == doctest::Approx(-2.0));
  CHECK_THROWS_AS(w_tilde_closed_form(Matrix::column(Vector{0, 0}), {1}, 0.5), Error);

  RngStream rng(12, 0);
  for (int t = 0; t < 30; ++t) {
    const Matrix j = oracle::random_matrix(rng, 5, 2);
    const Vector c = oracle::random_vector(rng, 2);
    const Vector wt = w_tilde_closed_form(j, c, 0.7);
    const Vector ref = oracle::gauss_solve(oracle::naive_transpose_times(j, j), c);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::fabs(wt[i] - 0.7 * ref[i]) <= 1e-10 * (1 + std::fabs(ref[i])));
  }
}

TEST_CASE("direction_sto matches the deterministic direction and contracts exactly") {
  RngStream rng(13, 0);
  for (int t = 0; t < 60; ++t) {
    const Vector x = [&] {
      Vector v(6);
      for (double& xi : v) xi = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.0, 2.0);
      return v;
    }();
    const Vector g = oracle::random_vector(rng, 6);
    const Vector c = oracle::random_vector(rng, 2);
    const Matrix j = oracle::random_matrix(rng, 6, 2);
    const StoStep ss = direction_sto(x, g, j, c, 0.5);
    const StepResult ref = direction_gen(x, g, j, w_tilde_closed_form(j, c, ss.vartheta));
    CAPTURE(t);
    for (std::size_t i = 0; i < 6; ++i) CHECK(ss.step.s[i] == ref.s[i]);
    for (std::size_t i = 0; i < 6; ++i) CHECK(x[i] + ss.step.s[i] >= -1e-9);
    const double lin = oracle::naive_norm(add(c, oracle::naive_matvec_t(j, ss.step.s)));
    CHECK(std::fabs(lin - (1.0 - ss.vartheta) * oracle::naive_norm(c)) <= 2e-9);
  }
}

TEST_CASE("direction_sto interior case has the equality-only closed form") {
  const Vector x{10, 10, 10};
  const Vector g{0.2, -0.1, 0.3};
  const Matrix j = Matrix::from_rows({{1, 0}, {1, 1}, {0, 2}});
  const Vector c{0.4, -0.2};
  const StoStep ss = direction_sto(x, g, j, c, 0.5);
  // s = -P g - J w with J^T J w = 0.5 c and P the projector onto null(J^T).
  const Vector w = oracle::gauss_solve(oracle::naive_transpose_times(j, j), scaled(0.5, c));
  const Vector pg = oracle::projection_via_normal_equations(j, g);
  const Vector jw = oracle::naive_matvec(j, w);
  for (std::size_t i = 0; i < 3; ++i) CHECK(ss.step.s[i] == doctest::Approx(-pg[i] - jw[i]).epsilon(1e-9));
  CHECK(ss.halvings == 0);
}

TEST_CASE("direction_sto at a planted KKT point") {
  const ProblemSpec p = registry_get("rand-quad(seed=4,d=8,m=2,bounds=1)");
  const Evaluation ev = evaluate(p, *p.known_solution);
  const StoStep ss = direction_sto(*p.known_solution, ev.grad_f, ev.jac_c, ev.c, 0.5, p.lower_bounded);
  CHECK(oracle::naive_norm(ss.step.s) <= 1e-8);
}

TEST_CASE("merit_step_sto examples") {
  const MeritStep a = merit_step_sto(1.0, {1, 0}, {1, 1}, 1.0, 0.5, 0.3, 1.0, 1.0);
  CHECK(a.rho == doctest::Approx(4.0));
  CHECK(a.eta == doctest::Approx(1.0 / 30.0));
  CHECK(merit_step_sto(2.0, {1, 0}, {1, 1}, 0.0, 0.5, 0.3, 1.0, 1.0).rho == 2.0);
  CHECK(merit_step_sto(50.0, {1, 0}, {1, 1}, 1.0, 0.5, 0.3, 1.0, 1.0).rho == 50.0);
  CHECK(merit_step_sto(1e-9, {0, 0}, {0, 0}, 1.0, 0.5, 0.4, 0.01, 0.01).eta == 1.0);
}

TEST_CASE("noiseless solve_sto follows the deterministic recursion") {
  const ProblemSpec p = registry_get("BOUNDQ");
  StoConfig cfg;
  cfg.K = 40;
  const RunRecord r = solve_sto(p, NoiseModel{}, cfg);
  REQUIRE(r.status == RunStatus::MaxIter);
  REQUIRE(r.history.size() == 41);

  // Reference loop: exact oracles, closed-form w, merit and stepsize by hand.
  Vector x = p.x0;
  for (double& xi : x) xi = std::max(xi, 0.0);
  double rho = cfg.rho0;
  for (int k = 0; k < cfg.K; ++k) {
    const Evaluation ev = evaluate(p, x);
    const Vector w = w_tilde_closed_form(ev.jac_c, ev.c, cfg.vartheta_tilde);
    const StepResult st = direction_gen(x, ev.grad_f, ev.jac_c, w, p.lower_bounded);
    const double cn = oracle::naive_norm(ev.c);
    if (cn > 0) {
      const double q = (oracle::naive_dot(ev.grad_f, st.s) + 0.5 * oracle::naive_dot(st.s, st.s)) / (cfg.vartheta_tilde * cn);
      rho = std::max(rho, q);
    }
    const double eta = std::min(cfg.tau / (p.lipschitz.grad_f + rho * (p.lipschitz.grad_c + 1.0)), 1.0);
    CAPTURE(k);
    CHECK(r.history[k].rho == doctest::Approx(rho).epsilon(1e-12));
    CHECK(r.history[k].eta == doctest::Approx(eta).epsilon(1e-12));
    for (std::size_t i = 0; i < p.d; ++i) x[i] += eta * st.s[i];
  }
  for (std::size_t i = 0; i < p.d; ++i) CHECK(r.x_final[i] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("solve_sto invariants and sample accounting") {
  const ProblemSpec p = registry_get("HS48");
  StoConfig cfg;
  cfg.K = 200;
  cfg.seed = 3;
  cfg.schedule.fixed = {2, 3, 4};
  const RunRecord r = solve_sto(p, NoiseModel::uniform(1e-4, 0), cfg);
  REQUIRE(r.status == RunStatus::MaxIter);
  CHECK(r.history.size() == std::size_t(cfg.K) + 1);
  CHECK(r.samples == SampleCounts{2 * 200, 3 * 200, 4 * 200});
  CHECK(r.evaluations == r.samples);
  for (std::size_t i = 0; i < r.history.size(); ++i) {
    const HistoryRow& h = r.history[i];
    CHECK(h.k == int(i));
    if (i > 0) CHECK(h.rho >= r.history[i - 1].rho);
    if (i + 1 < r.history.size()) {
      CHECK(h.eta > 0.0);
      CHECK(h.eta <= 1.0);
      CHECK(h.diag.contraction_err <= 2e-9);
      CHECK(h.samples.grad_f == 2 * (i + 1));
    }
  }

  StoConfig rm = cfg;
  rm.estimator = EstimatorKind::RecursiveMomentum;
  const RunRecord r2 = solve_sto(p, NoiseModel::uniform(1e-4, 0), rm);
  CHECK(r2.samples == r.samples);
  CHECK(r2.evaluations == SampleCounts{2 * 399, 3 * 399, 4 * 399});

  // Same seed, same trajectory.
  const RunRecord again = solve_sto(p, NoiseModel::uniform(1e-4, 0), cfg);
  CHECK(same_bits(again.x_final, r.x_final));
}

TEST_CASE("solve_sto keeps bounded iterates feasible") {
  for (const std::string& name : bounded_suite()) {
    StoConfig cfg;
    cfg.K = 150;
    cfg.seed = 8;
    const RunRecord r = solve_sto(registry_get(name), NoiseModel::uniform(1e-3, 0), cfg);
    CAPTURE(name);
    REQUIRE(r.status == RunStatus::MaxIter);
    for (const HistoryRow& h : r.history) CHECK(h.diag.min_x >= -1e-9);
  }
}

TEST_CASE("solve_sto drives a random quadratic to feasibility under small noise") {
  StoConfig cfg;
  cfg.K = 2000;
  cfg.seed = 1;
  cfg.diag_every = 100;
  const ProblemSpec p = registry_get("rand-quad(seed=7,d=6,m=2)");
  const RunRecord r = solve_sto(p, NoiseModel::uniform(1e-6, 0), cfg);
  CHECK(r.final_kkt().feasibility <= 1e-4);
}

TEST_CASE("solve_sto validates tau") {
  StoConfig cfg;
  cfg.tau = 0.5;
  CHECK_THROWS_AS(solve_sto(registry_get("HS28"), NoiseModel{}, cfg), Error);
}
