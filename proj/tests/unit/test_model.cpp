#include <cmath>

#include "doctest.h"
#include "ddopt/error.hpp"
#include "ddopt/linalg.hpp"
#include "ddopt/model.hpp"
#include "ddopt/registry.hpp"
#include "oracles.hpp"

using namespace ddopt;

namespace {

ProblemSpec half_norm_sq(std::size_t d) {
  ProblemSpec p;
  p.name = "halfnorm";
  p.d = d;
  p.m = 0;
  p.f = [](const Vector& x) { return 0.5 * oracle::naive_dot(x, x); };
  p.grad_f = [](const Vector& x) { return x; };
  p.x0 = Vector(d, 0.0);
  return p;
}

ProblemSpec linear_constraints() {
  ProblemSpec p = half_norm_sq(3);
  p.name = "lin";
  p.m = 2;
  p.c = [](const Vector& x) { return Vector{x[0] + 2 * x[1] - x[2] + 4, 3 * x[2] - x[0]}; };
  p.jac_c = [](const Vector&) { return Matrix::from_rows({{1, -1}, {2, 0}, {-1, 3}}); };
  return p;
}

ProblemSpec rosenbrock() {
  ProblemSpec p = half_norm_sq(2);
  p.f = [](const Vector& x) { return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2); };
  p.grad_f = [](const Vector& x) {
    return Vector{-400 * x[0] * (x[1] - x[0] * x[0]) - 2 * (1 - x[0]), 200 * (x[1] - x[0] * x[0])};
  };
  return p;
}

Vector perturbed(const Vector& x, std::uint64_t seed) {
  RngStream rng(seed, 5);
  Vector y = x;
  for (double& v : y) v += 0.3 * rng.normal();
  return y;
}

}  // namespace

TEST_CASE("evaluate examples") {
  const ProblemSpec booth = registry_get("BOOTH");
  const Evaluation e = evaluate(booth, Vector{1, 3});
  CHECK(e.c[0] == 0.0);
  CHECK(e.c[1] == 0.0);
  const Evaluation q = evaluate(half_norm_sq(4), Vector(4, 0.0));
  CHECK(q.f == 0.0);
  CHECK(oracle::naive_norm(q.grad_f) == 0.0);
  const ProblemSpec hs6 = registry_get("HS6");
  CHECK(oracle::naive_norm(evaluate(hs6, *hs6.known_solution).c) <= 1e-8);
}

TEST_CASE("evaluate reports non-finite oracle values") {
  ProblemSpec p = half_norm_sq(1);
  p.f = [](const Vector& x) { return std::log(x[0]); };
  try {
    evaluate(p, Vector{-1.0});
    FAIL("expected EvalDomain");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EvalDomain);
  }
}

TEST_CASE("fd_check examples") {
  for (double h : {1e-3, 1.0, 10.0}) CHECK(fd_check(linear_constraints(), Vector{0.2, -1, 3}, h).max_rel_err_c <= 1e-12);
  CHECK(fd_check(half_norm_sq(3), Vector{1, -2, 0.5}, 1e-5).max_rel_err_f <= 1e-10);
  CHECK(fd_check(rosenbrock(), Vector{-1.2, 1}, 1e-6).max_rel_err_f <= 1e-5);
}

TEST_CASE("fd_check detects a wrong gradient") {
  ProblemSpec p = rosenbrock();
  auto g = p.grad_f;
  p.grad_f = [g](const Vector& x) {
    Vector v = g(x);
    v[0] *= 1.01;
    return v;
  };
  CHECK(fd_check(p, Vector{-1.2, 1}, 1e-6).max_rel_err_f > 1e-3);
}

TEST_CASE("every registry problem passes finite-difference checks at three points") {
  std::vector<std::string> names = registry_names();
  names.push_back("rand-quad(seed=7,d=6,m=2)");
  names.push_back("rand-quad(seed=3,d=9,m=2,bounds=1)");
  for (const auto& name : names) {
    CAPTURE(name);
    const ProblemSpec p = registry_get(name);
    std::vector<Vector> pts{p.x0, perturbed(p.x0, 1)};
    pts.push_back(p.known_solution ? *p.known_solution : perturbed(p.x0, 2));
    for (const auto& x : pts) {
      const FdReport r = fd_check(p, x, 1e-6);
      CHECK(r.max_rel_err_f <= 1e-5);
      CHECK(r.max_rel_err_c <= 1e-5);
    }
  }
}

TEST_CASE("registry known solutions are feasible and stationary") {
  for (const auto& name : registry_names()) {
    const ProblemSpec p = registry_get(name);
    if (!p.known_solution) continue;
    CAPTURE(name);
    const Vector& xs = *p.known_solution;
    const Evaluation e = evaluate(p, xs);
    CHECK(oracle::naive_norm(e.c) <= 1e-8);
    for (std::size_t i = 0; i < p.d; ++i)
      if (p.bounded(i)) CHECK(xs[i] >= 0.0);
    if (p.known_mu) {
      Vector r = e.grad_f;
      const Vector jl = oracle::naive_matvec(e.jac_c, *p.known_lambda);
      for (std::size_t i = 0; i < p.d; ++i) r[i] += jl[i] - (*p.known_mu)[i];
      CHECK(oracle::naive_norm(r) <= 1e-8);
    } else {
      // Stationarity over the free components with least-squares multipliers
      // restricted to the inactive bounds.
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < p.d; ++i)
        if (!p.bounded(i) || xs[i] > 1e-12) rows.push_back(i);
      Matrix jf(rows.size(), p.m);
      Vector gf(rows.size());
      for (std::size_t a = 0; a < rows.size(); ++a) {
        gf[a] = e.grad_f[rows[a]];
        for (std::size_t j = 0; j < p.m; ++j) jf(a, j) = e.jac_c(rows[a], j);
      }
      const Vector pg = oracle::projection_via_normal_equations(jf, gf);
      CHECK(oracle::naive_norm(pg) <= 1e-8 * (1 + oracle::naive_norm(gf)));
    }
  }
}

TEST_CASE("registry dimensions and lookup errors") {
  const ProblemSpec booth = registry_get("BOOTH");
  CHECK(booth.d == 2);
  CHECK(booth.m == 2);
  const ProblemSpec hs6 = registry_get("HS6");
  CHECK(hs6.d == 2);
  CHECK(hs6.m == 1);
  CHECK(equality_suite().size() >= 15);
  CHECK(bounded_suite().size() >= 3);
  for (const auto& n : bounded_suite()) CHECK(registry_get(n).has_bounds());
  for (const auto& n : equality_suite()) CHECK_FALSE(registry_get(n).has_bounds());
  try {
    registry_get("nosuch");
    FAIL("expected UnknownProblem");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownProblem);
  }
  CHECK_THROWS(registry_get("rand-quad(seed=1,d=3,m=5)"));
  CHECK_FALSE(parse_rand_quad("rand-quad(seed=1,q=3)"));
}

TEST_CASE("rand-quad plants a KKT point") {
  for (const char* name : {"rand-quad(seed=7,d=6,m=2)", "rand-quad(seed=2,d=10,m=3)",
                           "rand-quad(seed=9,d=9,m=3,bounds=1)"}) {
    CAPTURE(name);
    const ProblemSpec p = registry_get(name);
    const Vector& xs = *p.known_solution;
    const Evaluation e = evaluate(p, xs);
    Vector r = e.grad_f;
    const Vector jl = oracle::naive_matvec(e.jac_c, *p.known_lambda);
    for (std::size_t i = 0; i < p.d; ++i) r[i] += jl[i] - (*p.known_mu)[i];
    CHECK(oracle::naive_norm(r) <= 1e-10);
    CHECK(oracle::naive_norm(e.c) <= 1e-10);
    CHECK(std::fabs(oracle::naive_dot(*p.known_mu, xs)) <= 1e-10);
    const auto parsed = parse_rand_quad(name);
    REQUIRE(parsed);
    CHECK(rand_quad_name(*parsed) == name);
  }
}

TEST_CASE("sample_stochastic with zero noise equals evaluate") {
  const ProblemSpec p = registry_get("HS40");
  NoiseStreams st(1);
  const OracleSample s = sample_stochastic(p, p.x0, NoiseModel{}, st);
  const Evaluation e = evaluate(p, p.x0);
  CHECK(s.grad_f == e.grad_f);
  CHECK(s.c == e.c);
  CHECK(s.jac_c == e.jac_c);
  CHECK(s.draws_used.grad_f >= 1);
}

TEST_CASE("noise draws are bounded, unbiased and reproducible") {
  const ProblemSpec p = registry_get("HS40");
  const Evaluation e = evaluate(p, p.x0);
  for (auto dist : {NoiseDistribution::UniformBall, NoiseDistribution::SignedScaled}) {
    const double sigma = 0.1;
    NoiseModel nm{sigma, sigma, sigma, dist, 42};
    NoiseStreams st(nm.seed);
    const int n = 100000;
    Vector mean(p.d, 0.0);
    for (int k = 0; k < n; ++k) {
      const OracleSample s = sample_stochastic(p, p.x0, nm, st);
      Vector dg(p.d);
      for (std::size_t i = 0; i < p.d; ++i) dg[i] = s.grad_f[i] - e.grad_f[i];
      CHECK(oracle::naive_norm(dg) <= sigma * (1 + 1e-12));
      for (std::size_t j = 0; j < p.m; ++j) {
        Vector dc(p.d);
        for (std::size_t i = 0; i < p.d; ++i) dc[i] = s.jac_c(i, j) - e.jac_c(i, j);
        CHECK(oracle::naive_norm(dc) <= sigma * (1 + 1e-12));
      }
      Vector dv(p.m);
      for (std::size_t j = 0; j < p.m; ++j) dv[j] = s.c[j] - e.c[j];
      CHECK(oracle::naive_norm(dv) <= sigma * (1 + 1e-12));
      for (std::size_t i = 0; i < p.d; ++i) mean[i] += dg[i] / n;
    }
    CHECK(oracle::naive_norm(mean) <= 5 * sigma / std::sqrt(double(n)));
  }
  NoiseModel nm = NoiseModel::uniform(0.01, 9);
  NoiseStreams a(9), b(9), c(10);
  const OracleSample sa = sample_stochastic(p, p.x0, nm, a);
  const OracleSample sb = sample_stochastic(p, p.x0, nm, b);
  const OracleSample sc = sample_stochastic(p, p.x0, nm, c);
  CHECK(sa.grad_f == sb.grad_f);
  CHECK(sa.jac_c == sb.jac_c);
  CHECK(sa.c == sb.c);
  CHECK(sa.grad_f != sc.grad_f);
}

TEST_CASE("signed-scaled draws sit on the sphere") {
  RngStream rng(1, 1);
  for (int k = 0; k < 100; ++k) {
    const Vector v = draw_perturbation(rng, 7, 0.3, NoiseDistribution::SignedScaled);
    CHECK(oracle::naive_norm(v) == doctest::Approx(0.3).epsilon(1e-14));
  }
}

namespace {

GeneralProblem two_sided_r3() {
  GeneralProblem g;
  g.name = "box";
  g.n = 3;
  g.f = [](const Vector& x) { return oracle::naive_dot(x, x); };
  g.grad_f = [](const Vector& x) { return Vector{2 * x[0], 2 * x[1], 2 * x[2]}; };
  g.m_in = 2;
  g.c_in = [](const Vector& x) { return Vector{x[0] * x[1] + x[2], x[0] - x[2] * x[2]}; };
  g.jac_in = [](const Vector& x) { return Matrix::from_rows({{x[1], 1}, {x[0], 0}, {1, -2 * x[2]}}); };
  g.lower = {-1, -2};
  g.upper = {1, 3};
  g.x0 = {0.1, 0.2, 0.3};
  return g;
}

}  // namespace

TEST_CASE("to_slack_form examples") {
  GeneralProblem one = two_sided_r3();
  one.m_in = 1;
  one.c_in = [](const Vector& x) { return Vector{x[0] + x[1]}; };
  one.jac_in = [](const Vector&) { return Matrix::from_rows({{1}, {1}, {0}}); };
  one.lower = {-INFINITY};
  one.upper = {2};
  const ProblemSpec p1 = to_slack_form(one);
  CHECK(p1.d == 4);
  CHECK(p1.m == 1);
  CHECK(p1.c(Vector{1, 0.5, 0, 0.5})[0] == doctest::Approx(0.0));  // 1.5 + 0.5 - 2

  GeneralProblem eq = one;
  eq.lower = {2};
  const ProblemSpec p2 = to_slack_form(eq);
  CHECK(p2.d == 5);
  CHECK(p2.m == 2);
  // x1 + x2 = 2 forces both slacks to zero
  const Vector c2 = p2.c(Vector{1, 1, 0, 0, 0});
  CHECK(c2[0] == 0.0);
  CHECK(c2[1] == 0.0);

  const ProblemSpec p3 = to_slack_form(two_sided_r3());
  CHECK(p3.d == 7);
  CHECK(p3.m == 4);
  CHECK(p3.has_bounds());
  CHECK_FALSE(p3.bounded(0));
  CHECK(p3.bounded(6));
}

TEST_CASE("to_slack_form preserves feasibility and derivatives") {
  const GeneralProblem g = two_sided_r3();
  for (const SlackOptions opts : {SlackOptions{false}, SlackOptions{true}}) {
    const ProblemSpec p = to_slack_form(g, opts);
    const Vector x{0.3, -0.4, 0.5};
    const Vector z = lift_point(g, x, opts);
    CHECK(oracle::naive_norm(p.c(z)) <= 1e-12);
    CHECK(p.f(z) == doctest::Approx(g.f(x)));
    const FdReport r = fd_check(p, z, 1e-6);
    CHECK(r.max_rel_err_f <= 1e-6);
    CHECK(r.max_rel_err_c <= 1e-6);
  }
  CHECK(to_slack_form(g, {true}).d == 3 + 3 + 4);
}

TEST_CASE("to_slack_form rejects inverted bounds") {
  GeneralProblem g = two_sided_r3();
  g.lower = {2, -2};
  try {
    to_slack_form(g);
    FAIL("expected InvalidBounds");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidBounds);
  }
}

TEST_CASE("Lipschitz estimates are positive and bounded by curated values on quadratics") {
  const ProblemSpec p = registry_get("rand-quad(seed=7,d=6,m=2)");
  const Lipschitz est = estimate_lipschitz(p, p.x0, 1.0, 50, 1);
  CHECK(est.grad_f > 0.0);
  CHECK(est.grad_f <= p.lipschitz.grad_f * (1 + 1e-6));
  CHECK(est.grad_c <= 1e-6);
}
