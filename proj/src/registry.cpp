#include "ddopt/registry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <regex>

#include "ddopt/error.hpp"

namespace ddopt {
namespace {

using Builder = std::function<ProblemSpec()>;

ProblemSpec make(std::string name, std::size_t d, std::size_t m,
                 std::function<double(const Vector&)> f, std::function<Vector(const Vector&)> g,
                 std::function<Vector(const Vector&)> c, std::function<Matrix(const Vector&)> j,
                 Vector x0, Lipschitz lip, double alpha) {
  ProblemSpec p;
  p.name = std::move(name);
  p.d = d;
  p.m = m;
  p.f = std::move(f);
  p.grad_f = std::move(g);
  p.c = std::move(c);
  p.jac_c = std::move(j);
  p.x0 = std::move(x0);
  p.lipschitz = lip;
  p.default_alpha = alpha;
  return p;
}

// Jacobian helper: columns given as gradients of each constraint.
Matrix columns(std::size_t d, std::initializer_list<Vector> cols) {
  Matrix j(d, cols.size());
  std::size_t k = 0;
  for (const auto& col : cols) j.set_col(k++, col);
  return j;
}

double sq(double v) { return v * v; }

ProblemSpec booth() {
  auto p = make(
      "BOOTH", 2, 2, [](const Vector&) { return 0.0; }, [](const Vector&) { return Vector{0.0, 0.0}; },
      [](const Vector& x) { return Vector{x[0] + 2 * x[1] - 7, 2 * x[0] + x[1] - 5}; },
      [](const Vector&) { return columns(2, {{1, 2}, {2, 1}}); }, {0, 0}, {1.0, 0.0, 3.0}, 1.0);
  p.known_solution = Vector{1, 3};
  return p;
}

ProblemSpec hs6() {
  auto p = make(
      "HS6", 2, 1, [](const Vector& x) { return sq(1 - x[0]); },
      [](const Vector& x) { return Vector{-2 * (1 - x[0]), 0.0}; },
      [](const Vector& x) { return Vector{10 * (x[1] - x[0] * x[0])}; },
      [](const Vector& x) { return columns(2, {{-20 * x[0], 10}}); }, {-1.2, 1}, {2.0, 20.0, 30.0},
      1.0);
  p.known_solution = Vector{1, 1};
  return p;
}

ProblemSpec hs7() {
  auto p = make(
      "HS7", 2, 1, [](const Vector& x) { return std::log(1 + x[0] * x[0]) - x[1]; },
      [](const Vector& x) { return Vector{2 * x[0] / (1 + x[0] * x[0]), -1.0}; },
      [](const Vector& x) { return Vector{sq(1 + x[0] * x[0]) + x[1] * x[1] - 4}; },
      [](const Vector& x) { return columns(2, {{4 * x[0] * (1 + x[0] * x[0]), 2 * x[1]}}); },
      {2, 2}, {2.0, 8.0, 40.0}, 1.0);
  p.known_solution = Vector{0, std::sqrt(3.0)};
  return p;
}

ProblemSpec hs8() {
  auto p = make(
      "HS8", 2, 2, [](const Vector&) { return -1.0; }, [](const Vector&) { return Vector{0.0, 0.0}; },
      [](const Vector& x) { return Vector{x[0] * x[0] + x[1] * x[1] - 25, x[0] * x[1] - 9}; },
      [](const Vector& x) { return columns(2, {{2 * x[0], 2 * x[1]}, {x[1], x[0]}}); }, {2, 1},
      {1.0, 2.5, 12.0}, 1.0);
  const double a = std::sqrt(43.0);
  const double b = std::sqrt(7.0);
  p.known_solution = Vector{(a + b) / 2, (a - b) / 2};
  return p;
}

ProblemSpec hs9() {
  constexpr double pi = std::numbers::pi;
  auto p = make(
      "HS9", 2, 1,
      [](const Vector& x) { return std::sin(pi * x[0] / 12) * std::cos(pi * x[1] / 16); },
      [](const Vector& x) {
        return Vector{pi / 12 * std::cos(pi * x[0] / 12) * std::cos(pi * x[1] / 16),
                      -pi / 16 * std::sin(pi * x[0] / 12) * std::sin(pi * x[1] / 16)};
      },
      [](const Vector& x) { return Vector{4 * x[0] - 3 * x[1]}; },
      [](const Vector&) { return columns(2, {{4, -3}}); }, {0, 0}, {0.1, 0.0, 5.0}, 1.0);
  p.known_solution = Vector{-3, -4};
  return p;
}

ProblemSpec hs26() {
  auto p = make(
      "HS26", 3, 1,
      [](const Vector& x) { return sq(x[0] - x[1]) + std::pow(x[1] - x[2], 4); },
      [](const Vector& x) {
        const double a = x[0] - x[1];
        const double b = std::pow(x[1] - x[2], 3);
        return Vector{2 * a, -2 * a + 4 * b, -4 * b};
      },
      [](const Vector& x) { return Vector{(1 + x[1] * x[1]) * x[0] + std::pow(x[2], 4) - 3}; },
      [](const Vector& x) {
        return columns(3, {{1 + x[1] * x[1], 2 * x[0] * x[1], 4 * std::pow(x[2], 3)}});
      },
      {-2.6, 2, 2}, {12.0, 20.0, 35.0}, 1.0);
  p.known_solution = Vector{1, 1, 1};
  return p;
}

ProblemSpec hs27() {
  auto p = make(
      "HS27", 3, 1,
      [](const Vector& x) { return 0.01 * sq(x[0] - 1) + sq(x[1] - x[0] * x[0]); },
      [](const Vector& x) {
        const double r = x[1] - x[0] * x[0];
        return Vector{0.02 * (x[0] - 1) - 4 * x[0] * r, 2 * r, 0.0};
      },
      [](const Vector& x) { return Vector{x[0] + x[2] * x[2] + 1}; },
      [](const Vector& x) { return columns(3, {{1, 0, 2 * x[2]}}); }, {2, 2, 2}, {20.0, 2.0, 5.0},
      1.0);
  p.known_solution = Vector{-1, 1, 0};
  return p;
}

ProblemSpec hs28() {
  auto p = make(
      "HS28", 3, 1, [](const Vector& x) { return sq(x[0] + x[1]) + sq(x[1] + x[2]); },
      [](const Vector& x) {
        const double a = 2 * (x[0] + x[1]);
        const double b = 2 * (x[1] + x[2]);
        return Vector{a, a + b, b};
      },
      [](const Vector& x) { return Vector{x[0] + 2 * x[1] + 3 * x[2] - 1}; },
      [](const Vector&) { return columns(3, {{1, 2, 3}}); }, {-4, 1, 1}, {6.0, 0.0, 3.8}, 1.0);
  p.known_solution = Vector{0.5, -0.5, 0.5};
  return p;
}

ProblemSpec hs40() {
  auto p = make(
      "HS40", 4, 3, [](const Vector& x) { return -x[0] * x[1] * x[2] * x[3]; },
      [](const Vector& x) {
        return Vector{-x[1] * x[2] * x[3], -x[0] * x[2] * x[3], -x[0] * x[1] * x[3],
                      -x[0] * x[1] * x[2]};
      },
      [](const Vector& x) {
        return Vector{std::pow(x[0], 3) + x[1] * x[1] - 1, x[0] * x[0] * x[3] - x[2],
                      x[3] * x[3] - x[1]};
      },
      [](const Vector& x) {
        return columns(4, {{3 * x[0] * x[0], 2 * x[1], 0, 0},
                           {2 * x[0] * x[3], 0, -1, x[0] * x[0]},
                           {0, -1, 0, 2 * x[3]}});
      },
      {0.8, 0.8, 0.8, 0.8}, {2.0, 6.0, 4.0}, 1.0);
  p.known_solution = Vector{std::pow(2.0, -1.0 / 3), std::pow(2.0, -0.5), std::pow(2.0, -11.0 / 12),
                            std::pow(2.0, -0.25)};
  return p;
}

ProblemSpec hs42() {
  auto p = make(
      "HS42", 4, 2,
      [](const Vector& x) {
        return sq(x[0] - 1) + sq(x[1] - 2) + sq(x[2] - 3) + sq(x[3] - 4);
      },
      [](const Vector& x) {
        return Vector{2 * (x[0] - 1), 2 * (x[1] - 2), 2 * (x[2] - 3), 2 * (x[3] - 4)};
      },
      [](const Vector& x) { return Vector{x[0] - 2, x[2] * x[2] + x[3] * x[3] - 2}; },
      [](const Vector& x) { return columns(4, {{1, 0, 0, 0}, {0, 0, 2 * x[2], 2 * x[3]}}); },
      {1, 1, 1, 1}, {2.0, 2.0, 4.0}, 1.0);
  const double r2 = std::sqrt(2.0);
  p.known_solution = Vector{2, 2, 0.6 * r2, 0.8 * r2};
  return p;
}

ProblemSpec hs48() {
  auto p = make(
      "HS48", 5, 2,
      [](const Vector& x) { return sq(x[0] - 1) + sq(x[1] - x[2]) + sq(x[3] - x[4]); },
      [](const Vector& x) {
        const double a = 2 * (x[1] - x[2]);
        const double b = 2 * (x[3] - x[4]);
        return Vector{2 * (x[0] - 1), a, -a, b, -b};
      },
      [](const Vector& x) {
        return Vector{x[0] + x[1] + x[2] + x[3] + x[4] - 5, x[2] - 2 * (x[3] + x[4]) + 3};
      },
      [](const Vector&) { return columns(5, {{1, 1, 1, 1, 1}, {0, 0, 1, -2, -2}}); },
      {3, 5, -3, 2, -2}, {4.0, 0.0, 3.5}, 1.0);
  p.known_solution = Vector{1, 1, 1, 1, 1};
  return p;
}

ProblemSpec maratos() {
  auto p = make(
      "MARATOS", 2, 1,
      [](const Vector& x) { return -x[0] + 2 * (x[0] * x[0] + x[1] * x[1] - 1); },
      [](const Vector& x) { return Vector{-1 + 4 * x[0], 4 * x[1]}; },
      [](const Vector& x) { return Vector{x[0] * x[0] + x[1] * x[1] - 1}; },
      [](const Vector& x) { return columns(2, {{2 * x[0], 2 * x[1]}}); }, {1.1, 0.1},
      {4.0, 2.0, 2.5}, 1.0);
  p.known_solution = Vector{1, 0};
  return p;
}

ProblemSpec bt1() {
  auto p = make(
      "BT1", 2, 1,
      [](const Vector& x) { return 100 * x[0] * x[0] + 100 * x[1] * x[1] - x[0] - 100; },
      [](const Vector& x) { return Vector{200 * x[0] - 1, 200 * x[1]}; },
      [](const Vector& x) { return Vector{x[0] * x[0] + x[1] * x[1] - 1}; },
      [](const Vector& x) { return columns(2, {{2 * x[0], 2 * x[1]}}); }, {0.08, 0.06},
      {200.0, 2.0, 2.5}, 1.0);
  p.known_solution = Vector{1, 0};
  return p;
}

ProblemSpec bt11() {
  auto p = make(
      "BT11", 5, 3,
      [](const Vector& x) {
        return sq(x[0] - 1) + sq(x[0] - x[1]) + sq(x[1] - x[2]) + std::pow(x[2] - x[3], 4) +
               std::pow(x[3] - x[4], 4);
      },
      [](const Vector& x) {
        const double a = 2 * (x[0] - x[1]);
        const double b = 2 * (x[1] - x[2]);
        const double c3 = 4 * std::pow(x[2] - x[3], 3);
        const double c4 = 4 * std::pow(x[3] - x[4], 3);
        return Vector{2 * (x[0] - 1) + a, -a + b, -b + c3, -c3 + c4, -c4};
      },
      [](const Vector& x) {
        return Vector{x[0] + x[1] * x[1] + std::pow(x[2], 3) - 3, x[1] - x[2] * x[2] + x[3] - 1,
                      x[0] * x[4] - 1};
      },
      [](const Vector& x) {
        return columns(5, {{1, 2 * x[1], 3 * x[2] * x[2], 0, 0},
                           {0, 1, -2 * x[2], 1, 0},
                           {x[4], 0, 0, 0, x[0]}});
      },
      {2, 2, 2, 2, 2}, {10.0, 12.0, 14.0}, 1.0);
  p.known_solution = Vector{1, 1, 1, 1, 1};
  return p;
}

ProblemSpec bt12() {
  auto p = make(
      "BT12", 5, 3, [](const Vector& x) { return 0.01 * x[0] * x[0] + x[1] * x[1]; },
      [](const Vector& x) { return Vector{0.02 * x[0], 2 * x[1], 0, 0, 0}; },
      [](const Vector& x) {
        return Vector{x[0] + x[1] - x[2] * x[2] - 25, x[0] * x[0] + x[1] * x[1] - x[3] * x[3] - 25,
                      x[0] - x[4] * x[4] - 2};
      },
      [](const Vector& x) {
        return columns(5, {{1, 1, -2 * x[2], 0, 0},
                           {2 * x[0], 2 * x[1], 0, -2 * x[3], 0},
                           {1, 0, 0, 0, -2 * x[4]}});
      },
      {15, -2, 0, 1, 3}, {2.0, 3.5, 60.0}, 1.0);
  const double x1 = 2500.0 / 101.0;
  const double x2 = 25.0 / 101.0;
  p.known_solution = Vector{x1, x2, 0, std::sqrt(x1 * x1 + x2 * x2 - 25), std::sqrt(x1 - 2)};
  return p;
}

// ---- bound-constrained ----------------------------------------------------

// HS53 with x in [-10, 10]^5 shifted to y = x + 10 >= 0 and upper bounds
// carried by slacks t = 20 - y >= 0. Variables (y, t).
ProblemSpec hs53() {
  auto xs = [](const Vector& z) {
    Vector x(5);
    for (int i = 0; i < 5; ++i) x[i] = z[i] - 10;
    return x;
  };
  ProblemSpec p = make(
      "HS53", 10, 8,
      [xs](const Vector& z) {
        const Vector x = xs(z);
        return sq(x[0] - x[1]) + sq(x[1] + x[2] - 2) + sq(x[3] - 1) + sq(x[4] - 1);
      },
      [xs](const Vector& z) {
        const Vector x = xs(z);
        const double a = 2 * (x[0] - x[1]);
        const double b = 2 * (x[1] + x[2] - 2);
        Vector g(10, 0.0);
        g[0] = a;
        g[1] = -a + b;
        g[2] = b;
        g[3] = 2 * (x[3] - 1);
        g[4] = 2 * (x[4] - 1);
        return g;
      },
      [xs](const Vector& z) {
        const Vector x = xs(z);
        Vector c{x[0] + 3 * x[1], x[2] + x[3] - 2 * x[4], x[1] - x[4]};
        for (int i = 0; i < 5; ++i) c.push_back(z[i] + z[5 + i] - 20);
        return c;
      },
      [](const Vector&) {
        Matrix j(10, 8);
        j(0, 0) = 1;
        j(1, 0) = 3;
        j(2, 1) = 1;
        j(3, 1) = 1;
        j(4, 1) = -2;
        j(1, 2) = 1;
        j(4, 2) = -1;
        for (int i = 0; i < 5; ++i) {
          j(i, 3 + i) = 1;
          j(5 + i, 3 + i) = 1;
        }
        return j;
      },
      {12, 12, 12, 12, 12, 8, 8, 8, 8, 8}, {6.0, 0.0, 4.0}, 1.0);
  p.lower_bounded.assign(10, true);
  Vector sol{-33.0 / 43, 11.0 / 43, 27.0 / 43, -5.0 / 43, 11.0 / 43};
  Vector z(10);
  for (int i = 0; i < 5; ++i) {
    z[i] = sol[i] + 10;
    z[5 + i] = 20 - z[i];
  }
  p.known_solution = z;
  return p;
}

// Small instance in the style of HS119: pairwise products of
// (x_i^2 + x_i + 1) factors, linear equalities, x >= 0.
ProblemSpec hs119_style() {
  constexpr std::size_t d = 8;
  constexpr std::size_t m = 4;
  RngStream rng(119, 0);
  Matrix a(d, m);
  for (double& v : a.data()) v = rng.uniform(-1.0, 1.0);
  for (std::size_t j = 0; j < m; ++j) a(j, j) += 2.0;
  const Vector x_feas{1.0, 0.5, 0.0, 1.5, 0.2, 0.0, 0.8, 0.3};
  const Vector b = matvec_t(a, x_feas);
  auto phi = [](double t) { return t * t + t + 1; };
  auto dphi = [](double t) { return 2 * t + 1; };
  auto pairs = [] {
    std::vector<std::pair<std::size_t, std::size_t>> ps;
    for (std::size_t i = 0; i < d; ++i) ps.emplace_back(i, i);
    for (std::size_t i = 0; i + 1 < d; ++i) ps.emplace_back(i, i + 1);
    ps.emplace_back(0, 4);
    ps.emplace_back(2, 7);
    ps.emplace_back(3, 6);
    return ps;
  }();
  ProblemSpec p = make(
      "HS119S", d, m,
      [=](const Vector& x) {
        double s = 0.0;
        for (auto [i, j] : pairs) s += 0.1 * phi(x[i]) * phi(x[j]);
        return s;
      },
      [=](const Vector& x) {
        Vector g(d, 0.0);
        for (auto [i, j] : pairs) {
          g[i] += 0.1 * dphi(x[i]) * phi(x[j]);
          g[j] += 0.1 * phi(x[i]) * dphi(x[j]);
        }
        return g;
      },
      [=](const Vector& x) { return sub(matvec_t(a, x), b); }, [=](const Vector&) { return a; },
      Vector(d, 1.0), {8.0, 0.0, operator_norm(a)}, 1.0);
  p.lower_bounded.assign(d, true);
  return p;
}

// min (x1+1)^2 + (x2-2)^2 + x3^2 s.t. x1 + x2 + x3 = 1, x >= 0.
ProblemSpec boundq() {
  ProblemSpec p = make(
      "BOUNDQ", 3, 1,
      [](const Vector& x) { return sq(x[0] + 1) + sq(x[1] - 2) + x[2] * x[2]; },
      [](const Vector& x) { return Vector{2 * (x[0] + 1), 2 * (x[1] - 2), 2 * x[2]}; },
      [](const Vector& x) { return Vector{x[0] + x[1] + x[2] - 1}; },
      [](const Vector&) { return columns(3, {{1, 1, 1}}); }, {1, 1, 1}, {2.0, 0.0, 1.8}, 1.0);
  p.lower_bounded.assign(3, true);
  p.known_solution = Vector{0, 1, 0};
  p.known_lambda = Vector{2};
  p.known_mu = Vector{4, 0, 2};
  return p;
}

// min (x1-1)^2 + (x2-1)^2 s.t. x1^2 + 1 = 0, x >= 0: no feasible point; the
// feasibility measure is stationary at x1 = 0.
ProblemSpec infeas1() {
  ProblemSpec p = make(
      "INFEAS1", 2, 1, [](const Vector& x) { return sq(x[0] - 1) + sq(x[1] - 1); },
      [](const Vector& x) { return Vector{2 * (x[0] - 1), 2 * (x[1] - 1)}; },
      [](const Vector& x) { return Vector{x[0] * x[0] + 1}; },
      [](const Vector& x) { return columns(2, {{2 * x[0], 0}}); }, {1, 1}, {2.0, 2.0, 2.0}, 1.0);
  p.lower_bounded.assign(2, true);
  return p;
}

const std::map<std::string, Builder>& table() {
  static const std::map<std::string, Builder> t = {
      {"BOOTH", booth},   {"HS6", hs6},         {"HS7", hs7},         {"HS8", hs8},
      {"HS9", hs9},       {"HS26", hs26},       {"HS27", hs27},       {"HS28", hs28},
      {"HS40", hs40},     {"HS42", hs42},       {"HS48", hs48},       {"MARATOS", maratos},
      {"BT1", bt1},       {"BT11", bt11},       {"BT12", bt12},       {"HS53", hs53},
      {"HS119S", hs119_style}, {"BOUNDQ", boundq}, {"INFEAS1", infeas1},
      {"SLACKQ", [] {
         ProblemSpec p = to_slack_form(slack_example_general());
         p.known_solution = lift_point(slack_example_general(), {1.0, 1.0});
         return p;
       }},
  };
  return t;
}

}  // namespace

// min (x1-2)^2 + (x2-1)^2 s.t. x1^2 - x2 <= 0, x1 + x2 <= 2, x free.
// Solution (1, 1) with both inequalities active.
GeneralProblem slack_example_general() {
  GeneralProblem g;
  g.name = "SLACKQ";
  g.n = 2;
  g.f = [](const Vector& x) { return sq(x[0] - 2) + sq(x[1] - 1); };
  g.grad_f = [](const Vector& x) { return Vector{2 * (x[0] - 2), 2 * (x[1] - 1)}; };
  g.m_in = 2;
  g.c_in = [](const Vector& x) { return Vector{x[0] * x[0] - x[1], x[0] + x[1]}; };
  g.jac_in = [](const Vector& x) { return columns(2, {{2 * x[0], -1}, {1, 1}}); };
  g.lower = {-INFINITY, -INFINITY};
  g.upper = {0.0, 2.0};
  g.x0 = {0.5, 0.5};
  g.lipschitz = {2.0, 2.0, 3.0};
  return g;
}

std::optional<RandQuadParams> parse_rand_quad(const std::string& name) {
  static const std::regex outer(R"(^rand-quad\(([^()]*)\)$)");
  std::smatch mt;
  if (!std::regex_match(name, mt, outer)) return std::nullopt;
  RandQuadParams rp;
  const std::string body = mt[1];
  static const std::regex kv(R"(\s*([a-z]+)\s*=\s*([0-9]+)\s*)");
  std::size_t pos = 0;
  while (pos <= body.size()) {
    const std::size_t comma = body.find(',', pos);
    const std::string item = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    std::smatch im;
    if (!std::regex_match(item, im, kv)) return std::nullopt;
    const std::string key = im[1];
    const unsigned long long val = std::stoull(im[2]);
    if (key == "seed") rp.seed = val;
    else if (key == "d") rp.d = val;
    else if (key == "m") rp.m = val;
    else if (key == "bounds") rp.bounds = val != 0;
    else return std::nullopt;
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return rp;
}

std::string rand_quad_name(const RandQuadParams& p) {
  std::string s = "rand-quad(seed=" + std::to_string(p.seed) + ",d=" + std::to_string(p.d) +
                  ",m=" + std::to_string(p.m);
  if (p.bounds) s += ",bounds=1";
  return s + ")";
}

ProblemSpec make_rand_quad(const RandQuadParams& rp) {
  const std::size_t d = rp.d;
  const std::size_t m = rp.m;
  const std::size_t n_active = rp.bounds ? d / 3 : 0;
  if (d == 0 || m > d || (rp.bounds && m + n_active >= d))
    throw Error(ErrorCode::UnknownProblem, "rand-quad: need m <= d, and m + d/3 < d with bounds");
  RngStream rng(rp.seed, 0x7a);

  Matrix b(d, d);
  for (double& v : b.data()) v = rng.normal();
  Matrix q = gram(b);
  for (double& v : q.data()) v /= static_cast<double>(d);
  for (std::size_t i = 0; i < d; ++i) q(i, i) += 0.5;

  Matrix a(d, m);
  for (double& v : a.data()) v = rng.normal();

  Vector xs(d);
  Vector mus(d, 0.0);
  std::vector<std::size_t> perm(d);
  for (std::size_t i = 0; i < d; ++i) perm[i] = i;
  for (std::size_t i = d; i-- > 1;) std::swap(perm[i], perm[rng.next_u64() % (i + 1)]);
  for (std::size_t i = 0; i < d; ++i) xs[i] = rp.bounds ? rng.uniform(0.5, 2.0) : rng.normal();
  for (std::size_t k = 0; k < n_active; ++k) {
    xs[perm[k]] = 0.0;
    mus[perm[k]] = rng.uniform(0.5, 1.5);
  }
  Vector lam(m);
  for (double& v : lam) v = rng.normal();

  // q_lin = mu* - Q x* - A lambda*
  Vector lin = mus;
  axpy(-1.0, matvec(q, xs), lin);
  axpy(-1.0, matvec(a, lam), lin);
  const Vector rhs = matvec_t(a, xs);

  Vector x0(d);
  for (double& v : x0) v = rp.bounds ? rng.uniform(0.5, 1.5) : rng.normal();

  ProblemSpec p = make(
      rand_quad_name(rp), d, m,
      [q, lin](const Vector& x) { return 0.5 * dot(x, matvec(q, x)) + dot(lin, x); },
      [q, lin](const Vector& x) { return add(matvec(q, x), lin); },
      [a, rhs](const Vector& x) { return sub(matvec_t(a, x), rhs); },
      [a](const Vector&) { return a; }, x0, {max_eigenvalue_sym(q) * 1.0001, 0.0, operator_norm(a)},
      1.0);
  if (rp.bounds) p.lower_bounded.assign(d, true);
  p.known_solution = xs;
  p.known_lambda = lam;
  p.known_mu = mus;
  return p;
}

ProblemSpec registry_get(const std::string& name) {
  ProblemSpec p;
  if (auto rp = parse_rand_quad(name)) {
    p = make_rand_quad(*rp);
  } else {
    const auto& t = table();
    const auto it = t.find(name);
    if (it == t.end()) throw Error(ErrorCode::UnknownProblem, "no problem named '" + name + "'");
    p = it->second();
  }
  p.validate();
  return p;
}

std::vector<std::string> registry_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : table()) names.push_back(k);
  return names;
}

std::vector<std::string> equality_suite() {
  return {"BOOTH", "BT1",  "BT11", "BT12", "HS26", "HS27", "HS28",   "HS40",
          "HS42",  "HS48", "HS6",  "HS7",  "HS8",  "HS9",  "MARATOS"};
}

std::vector<std::string> bounded_suite() { return {"BOUNDQ", "HS119S", "HS53", "SLACKQ"}; }

}  // namespace ddopt
