#include "ddopt/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ddopt/error.hpp"

namespace ddopt {

bool ProblemSpec::has_bounds() const {
  return std::any_of(lower_bounded.begin(), lower_bounded.end(), [](bool b) { return b; });
}

void ProblemSpec::validate() const {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::InvalidConfig, name + ": " + why);
  };
  if (d == 0) fail("no variables");
  if (!f || !grad_f) fail("missing objective oracle");
  if (m > 0 && (!c || !jac_c)) fail("missing constraint oracle");
  if (!lower_bounded.empty() && lower_bounded.size() != d) fail("bound mask length");
  if (x0.size() != d) fail("x0 length");
  if (known_solution && known_solution->size() != d) fail("known solution length");
  if (known_lambda && known_lambda->size() != m) fail("known multiplier length");
  if (known_mu && known_mu->size() != d) fail("known bound multiplier length");
  if (!(lipschitz.grad_f > 0.0) || !(lipschitz.grad_c >= 0.0) || !(lipschitz.c > 0.0))
    fail("Lipschitz constants");
}

Evaluation evaluate(const ProblemSpec& p, const Vector& x) {
  if (x.size() != p.d) throw Error(ErrorCode::DimensionMismatch, p.name + ": x has wrong length");
  if (!all_finite(x)) throw Error(ErrorCode::EvalDomain, p.name + ": non-finite x");
  Evaluation e;
  e.f = p.f(x);
  e.grad_f = p.grad_f(x);
  if (p.m > 0) {
    e.c = p.c(x);
    e.jac_c = p.jac_c(x);
  } else {
    e.jac_c = Matrix(p.d, 0);
  }
  if (e.grad_f.size() != p.d || e.c.size() != p.m || e.jac_c.rows() != p.d || e.jac_c.cols() != p.m)
    throw Error(ErrorCode::DimensionMismatch, p.name + ": oracle output shape");
  if (!std::isfinite(e.f) || !all_finite(e.grad_f) || !all_finite(e.c) || !e.jac_c.all_finite())
    throw Error(ErrorCode::EvalDomain, p.name + ": oracle returned non-finite values");
  return e;
}

// ---- noise ------------------------------------------------------------------

Vector draw_perturbation(RngStream& rng, std::size_t n, double sigma, NoiseDistribution dist) {
  Vector v(n, 0.0);
  if (n == 0 || sigma == 0.0) return v;
  if (dist == NoiseDistribution::SignedScaled) {
    const double a = sigma / std::sqrt(static_cast<double>(n));
    for (double& x : v) x = a * rng.sign();
    return v;
  }
  double nv = 0.0;
  while (!(nv > 0.0)) {
    for (double& x : v) x = rng.normal();
    nv = norm(v);
  }
  const double radius = sigma * rng.uniform();
  for (double& x : v) x *= radius / nv;
  return v;
}

Matrix draw_jacobian_perturbation(RngStream& rng, std::size_t d, std::size_t m, double sigma,
                                  NoiseDistribution dist) {
  Matrix e(d, m);
  if (sigma == 0.0) return e;
  for (std::size_t j = 0; j < m; ++j) e.set_col(j, draw_perturbation(rng, d, sigma, dist));
  return e;
}

OracleSample sample_stochastic(const ProblemSpec& p, const Vector& x, const NoiseModel& noise,
                               NoiseStreams& streams) {
  Evaluation e = evaluate(p, x);
  OracleSample s;
  s.grad_f = std::move(e.grad_f);
  s.c = std::move(e.c);
  s.jac_c = std::move(e.jac_c);
  if (noise.sigma_f > 0.0)
    axpy(1.0, draw_perturbation(streams.grad_f, p.d, noise.sigma_f, noise.distribution), s.grad_f);
  if (noise.sigma_c > 0.0) {
    const Matrix dj = draw_jacobian_perturbation(streams.jac_c, p.d, p.m, noise.sigma_c,
                                                 noise.distribution);
    axpy(1.0, dj.data(), s.jac_c.data());
  }
  if (noise.sigma_v > 0.0)
    axpy(1.0, draw_perturbation(streams.c, p.m, noise.sigma_v, noise.distribution), s.c);
  s.draws_used = {1, 1, 1};
  return s;
}

// ---- slack form -------------------------------------------------------------

namespace {

struct SlackLayout {
  std::size_t n = 0;
  std::vector<std::size_t> free_idx;  // split variables (only when split_free)
  std::vector<std::size_t> lo_idx;    // inequalities with finite lower bound
  std::vector<std::size_t> up_idx;    // inequalities with finite upper bound
  std::size_t nx() const { return n + free_idx.size(); }
  std::size_t d() const { return nx() + lo_idx.size() + up_idx.size(); }
};

SlackLayout make_layout(const GeneralProblem& g, const SlackOptions& opts) {
  if (g.lower.size() != g.m_in || g.upper.size() != g.m_in)
    throw Error(ErrorCode::DimensionMismatch, g.name + ": inequality bound lengths");
  if (!g.x_nonneg.empty() && g.x_nonneg.size() != g.n)
    throw Error(ErrorCode::DimensionMismatch, g.name + ": x_nonneg length");
  SlackLayout lay;
  lay.n = g.n;
  for (std::size_t j = 0; j < g.m_in; ++j) {
    const double l = g.lower[j];
    const double u = g.upper[j];
    if (std::isnan(l) || std::isnan(u) || l > u)
      throw Error(ErrorCode::InvalidBounds, g.name + ": lower > upper for inequality " + std::to_string(j));
    if (std::isinf(l) && std::isinf(u))
      throw Error(ErrorCode::InvalidBounds, g.name + ": inequality " + std::to_string(j) + " has no finite bound");
    if (std::isfinite(l)) lay.lo_idx.push_back(j);
    if (std::isfinite(u)) lay.up_idx.push_back(j);
  }
  if (opts.split_free) {
    for (std::size_t i = 0; i < g.n; ++i)
      if (g.x_nonneg.empty() || !g.x_nonneg[i]) lay.free_idx.push_back(i);
  }
  return lay;
}

Vector original_x(const SlackLayout& lay, const Vector& z) {
  Vector x(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(lay.n));
  for (std::size_t k = 0; k < lay.free_idx.size(); ++k) x[lay.free_idx[k]] -= z[lay.n + k];
  return x;
}

}  // namespace

ProblemSpec to_slack_form(const GeneralProblem& g, const SlackOptions& opts) {
  const SlackLayout lay = make_layout(g, opts);
  const std::size_t n_lo = lay.lo_idx.size();
  const std::size_t n_up = lay.up_idx.size();
  const std::size_t d = lay.d();
  const std::size_t m = g.m_eq + n_lo + n_up;

  ProblemSpec p;
  p.name = g.name;
  p.d = d;
  p.m = m;
  p.f = [lay, f = g.f](const Vector& z) { return f(original_x(lay, z)); };
  p.grad_f = [lay, gf = g.grad_f](const Vector& z) {
    const Vector gx = gf(original_x(lay, z));
    Vector out(lay.d(), 0.0);
    std::copy(gx.begin(), gx.end(), out.begin());
    for (std::size_t k = 0; k < lay.free_idx.size(); ++k) out[lay.n + k] = -gx[lay.free_idx[k]];
    return out;
  };
  p.c = [lay, g](const Vector& z) {
    const Vector x = original_x(lay, z);
    Vector out;
    out.reserve(g.m_eq + lay.lo_idx.size() + lay.up_idx.size());
    if (g.m_eq > 0) {
      const Vector ce = g.c_eq(x);
      out.insert(out.end(), ce.begin(), ce.end());
    }
    if (g.m_in > 0) {
      const Vector ci = g.c_in(x);
      std::size_t s = lay.nx();
      for (std::size_t j : lay.lo_idx) out.push_back(ci[j] - z[s++] - g.lower[j]);
      for (std::size_t j : lay.up_idx) out.push_back(ci[j] + z[s++] - g.upper[j]);
    }
    return out;
  };
  p.jac_c = [lay, g, m](const Vector& z) {
    const Vector x = original_x(lay, z);
    Matrix jac(lay.d(), m);
    auto put_x_rows = [&](const Matrix& src, std::size_t col_src, std::size_t col_dst) {
      for (std::size_t i = 0; i < lay.n; ++i) jac(i, col_dst) = src(i, col_src);
      for (std::size_t k = 0; k < lay.free_idx.size(); ++k)
        jac(lay.n + k, col_dst) = -src(lay.free_idx[k], col_src);
    };
    if (g.m_eq > 0) {
      const Matrix je = g.jac_eq(x);
      for (std::size_t j = 0; j < g.m_eq; ++j) put_x_rows(je, j, j);
    }
    if (g.m_in > 0) {
      const Matrix ji = g.jac_in(x);
      std::size_t col = g.m_eq;
      std::size_t s = lay.nx();
      for (std::size_t j : lay.lo_idx) {
        put_x_rows(ji, j, col);
        jac(s++, col++) = -1.0;
      }
      for (std::size_t j : lay.up_idx) {
        put_x_rows(ji, j, col);
        jac(s++, col++) = 1.0;
      }
    }
    return jac;
  };
  p.lower_bounded.assign(d, true);
  for (std::size_t i = 0; i < g.n; ++i) {
    const bool nonneg = !g.x_nonneg.empty() && g.x_nonneg[i];
    p.lower_bounded[i] = nonneg || opts.split_free;
  }
  p.x0 = lift_point(g, g.x0, opts);
  for (std::size_t i = 0; i < d; ++i)
    if (p.lower_bounded[i]) p.x0[i] = std::max(p.x0[i], 0.0);
  p.lipschitz = g.lipschitz;
  p.lipschitz.c = std::sqrt(g.lipschitz.c * g.lipschitz.c + 1.0);
  return p;
}

Vector lift_point(const GeneralProblem& g, const Vector& x, const SlackOptions& opts) {
  const SlackLayout lay = make_layout(g, opts);
  if (x.size() != g.n) throw Error(ErrorCode::DimensionMismatch, g.name + ": lift_point length");
  Vector z(lay.d(), 0.0);
  std::copy(x.begin(), x.end(), z.begin());
  for (std::size_t k = 0; k < lay.free_idx.size(); ++k) {
    const double v = x[lay.free_idx[k]];
    z[lay.free_idx[k]] = std::max(v, 0.0);
    z[lay.n + k] = std::max(-v, 0.0);
  }
  if (g.m_in > 0) {
    const Vector ci = g.c_in(x);
    std::size_t s = lay.nx();
    for (std::size_t j : lay.lo_idx) z[s++] = ci[j] - g.lower[j];
    for (std::size_t j : lay.up_idx) z[s++] = g.upper[j] - ci[j];
  }
  return z;
}

// ---- finite differences -----------------------------------------------------

namespace {

double rel_err(const Vector& fd, const Vector& an) {
  const double scale = std::max(1.0, norm_inf(an));
  return norm_inf(sub(fd, an)) / scale;
}

}  // namespace

FdReport fd_check(const ProblemSpec& p, const Vector& x, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidConfig, "fd_check: h must be positive");
  const Evaluation e = evaluate(p, x);
  Vector fd_g(p.d);
  Matrix fd_j(p.d, p.m);
  Vector xp = x;
  for (std::size_t i = 0; i < p.d; ++i) {
    xp[i] = x[i] + h;
    const double fp = p.f(xp);
    const Vector cp = p.m > 0 ? p.c(xp) : Vector{};
    xp[i] = x[i] - h;
    const double fm = p.f(xp);
    const Vector cm = p.m > 0 ? p.c(xp) : Vector{};
    xp[i] = x[i];
    fd_g[i] = (fp - fm) / (2.0 * h);
    for (std::size_t j = 0; j < p.m; ++j) fd_j(i, j) = (cp[j] - cm[j]) / (2.0 * h);
  }
  FdReport r;
  r.max_rel_err_f = rel_err(fd_g, e.grad_f);
  for (std::size_t j = 0; j < p.m; ++j)
    r.max_rel_err_c = std::max(r.max_rel_err_c, rel_err(fd_j.col(j), e.jac_c.col(j)));
  return r;
}

Lipschitz estimate_lipschitz(const ProblemSpec& p, const Vector& center, double radius, int samples,
                             std::uint64_t seed) {
  RngStream rng(seed, 99);
  Lipschitz est{0.0, 0.0, 0.0};
  const double t = 1e-4 * std::max(radius, 1e-3);
  for (int k = 0; k < samples; ++k) {
    Vector x = center;
    for (double& v : x) v += rng.uniform(-radius, radius);
    Vector u(p.d);
    for (double& v : u) v = rng.normal();
    const double nu = norm(u);
    for (double& v : u) v /= nu;
    Vector xt = x;
    axpy(t, u, xt);
    const Evaluation a = evaluate(p, x);
    const Evaluation b = evaluate(p, xt);
    est.grad_f = std::max(est.grad_f, norm(sub(b.grad_f, a.grad_f)) / t);
    if (p.m > 0) {
      est.grad_c = std::max(est.grad_c, norm(sub(b.jac_c.data(), a.jac_c.data())) / t);
      est.c = std::max(est.c, operator_norm(a.jac_c));
    }
  }
  est.grad_f = std::max(est.grad_f, 1e-12);
  est.c = std::max(est.c, 1e-12);
  return est;
}

}  // namespace ddopt
