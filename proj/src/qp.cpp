#include "ddopt/qp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "ddopt/error.hpp"

namespace ddopt {
namespace {

constexpr double kSigma = 1e-6;     // proximal term on x
constexpr double kRho = 1.0;        // penalty on bound rows
constexpr double kRhoEq = 1e3;      // penalty on (normalized) equality rows
constexpr double kRelax = 1.6;      // over-relaxation
constexpr int kStallWindow = 500;   // consecutive certificate hits before Infeasible

bool finite_lower(const QpProblem& qp, std::size_t i) { return std::isfinite(qp.lower_at(i)); }

double data_scale(const QpProblem& qp) {
  double s = 1.0;
  s = std::max(s, norm_inf(qp.target));
  s = std::max(s, norm_inf(qp.eq_rhs));
  for (std::size_t i = 0; i < qp.n; ++i)
    if (finite_lower(qp, i)) s = std::max(s, std::fabs(qp.lower[i]));
  return s;
}

// ---- equality-constrained solve on a fixed active set ---------------------

struct FixedSolve {
  Vector z;
  Vector lambda;
  Vector mu;
};

// Cholesky that drops pivots which are numerically zero (dependent rows);
// dropped unknowns are set to zero.
struct SkipCholesky {
  Matrix l;
  std::vector<char> dropped;

  explicit SkipCholesky(const Matrix& s) : l(s.rows(), s.rows()), dropped(s.rows(), 0) {
    const std::size_t k = s.rows();
    for (std::size_t j = 0; j < k; ++j) {
      const auto lj = l.row(j).first(j);
      const double p = s(j, j) - dot(lj, lj);
      if (!(p > 1e-11 * std::max(s(j, j), 1e-300))) {
        dropped[j] = 1;
        continue;
      }
      const double ljj = std::sqrt(p);
      l(j, j) = ljj;
      for (std::size_t i = j + 1; i < k; ++i) l(i, j) = (s(i, j) - dot(l.row(i).first(j), lj)) / ljj;
    }
  }

  Vector solve(const Vector& b) const {
    const std::size_t k = b.size();
    Vector y(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      if (dropped[i]) continue;
      y[i] = (b[i] - dot(l.row(i).first(i), std::span<const double>(y).first(i))) / l(i, i);
    }
    for (std::size_t i = k; i-- > 0;) {
      if (dropped[i]) {
        y[i] = 0.0;
        continue;
      }
      double acc = y[i];
      for (std::size_t r = i + 1; r < k; ++r) acc -= l(r, i) * y[r];
      y[i] = acc / l(i, i);
    }
    return y;
  }
};

FixedSolve solve_fixed(const QpProblem& qp, const std::vector<char>& fixed) {
  const std::size_t n = qp.n;
  const std::size_t k = qp.num_eq();
  FixedSolve out;
  out.z.assign(n, 0.0);
  out.mu.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) out.z[i] = fixed[i] ? qp.lower[i] : qp.target[i];
  out.lambda.assign(k, 0.0);
  if (k > 0) {
    // Schur complement in lambda: (A_F W_F^{-1} A_F^T) lambda = A_F t_F - (b - A_S l_S)
    Matrix s(k, k);
    Vector rhs(k);
    for (std::size_t a = 0; a < k; ++a) {
      const auto ra = qp.eq_lhs.row(a);
      rhs[a] = dot(ra, out.z) - qp.eq_rhs[a];
      for (std::size_t b = a; b < k; ++b) {
        const auto rb = qp.eq_lhs.row(b);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          if (!fixed[i]) acc += ra[i] * rb[i] / qp.weight(i);
        s(a, b) = acc;
        s(b, a) = acc;
      }
    }
    const SkipCholesky ch(s);
    out.lambda = ch.solve(rhs);
    Vector r = matvec(s, out.lambda);
    for (std::size_t a = 0; a < k; ++a) r[a] = ch.dropped[a] ? 0.0 : rhs[a] - r[a];
    axpy(1.0, ch.solve(r), out.lambda);
    const Vector atl = matvec_t(qp.eq_lhs, out.lambda);
    for (std::size_t i = 0; i < n; ++i)
      if (!fixed[i]) out.z[i] = qp.target[i] - atl[i] / qp.weight(i);
  }
  const Vector atl = k > 0 ? matvec_t(qp.eq_lhs, out.lambda) : Vector(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (fixed[i]) out.mu[i] = qp.weight(i) * (qp.lower[i] - qp.target[i]) + atl[i];
  return out;
}

QpSolution pack(const QpProblem& qp, FixedSolve fs) {
  QpSolution sol;
  sol.z = std::move(fs.z);
  sol.eq_dual = std::move(fs.lambda);
  sol.bound_dual = std::move(fs.mu);
  for (double& v : sol.bound_dual) v = std::max(v, 0.0);
  const QpResiduals r = qp_residuals(qp, sol);
  sol.primal_res = std::max(r.equality, r.bound_violation);
  sol.dual_res = std::max({r.stationarity, r.dual_sign, r.complementarity});
  return sol;
}

// Polish candidate is valid only if the unclipped multipliers are
// nonnegative and the point is feasible.
bool try_polish(const QpProblem& qp, const std::vector<char>& fixed, double acc, QpSolution& out) {
  FixedSolve fs = solve_fixed(qp, fixed);
  for (std::size_t i = 0; i < qp.n; ++i)
    if (fixed[i] && fs.mu[i] < -acc) return false;
  QpSolution sol = pack(qp, std::move(fs));
  if (qp_residuals(qp, sol).max() > acc) return false;
  sol.polished = true;
  out = std::move(sol);
  return true;
}

// Starts from an active-set guess and repairs it one index at a time: release
// the bound with the most negative multiplier, or fix the most violated one.
bool refine_polish(const QpProblem& qp, std::vector<char> fixed, double acc, QpSolution& out) {
  const std::size_t n = qp.n;
  const int max_changes = 2 * int(n) + 10;
  for (int t = 0; t <= max_changes; ++t) {
    if (try_polish(qp, fixed, acc, out)) return true;
    const FixedSolve fs = solve_fixed(qp, fixed);
    std::size_t worst = n;
    double worst_val = acc;
    for (std::size_t i = 0; i < n; ++i) {
      if (!finite_lower(qp, i)) continue;
      const double viol = fixed[i] ? -fs.mu[i] : qp.lower[i] - fs.z[i];
      if (viol > worst_val) {
        worst_val = viol;
        worst = i;
      }
    }
    if (worst == n) return false;
    fixed[worst] = !fixed[worst];
  }
  return false;
}

}  // namespace

// ---- public helpers -----------------------------------------------------------

void QpProblem::validate() const {
  auto bad = [](const char* what) { throw Error(ErrorCode::DimensionMismatch, what); };
  if (target.size() != n) bad("qp: target length");
  if (!weights.empty() && weights.size() != n) bad("qp: weights length");
  if (eq_lhs.rows() != eq_rhs.size()) bad("qp: eq_rhs length");
  if (eq_lhs.rows() > 0 && eq_lhs.cols() != n) bad("qp: eq_lhs columns");
  if (!lower.empty() && lower.size() != n) bad("qp: lower length");
  for (double w : weights)
    if (!(w > 0.0)) throw Error(ErrorCode::InvalidConfig, "qp: weights must be positive");
  for (double l : lower)
    if (std::isnan(l) || l == INFINITY) throw Error(ErrorCode::InvalidBounds, "qp: bad lower bound");
}

std::string_view to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal:
      return "Optimal";
    case QpStatus::Infeasible:
      return "Infeasible";
    case QpStatus::MaxIter:
      return "MaxIter";
  }
  return "Unknown";
}

double QpResiduals::max() const {
  return std::max({stationarity, equality, bound_violation, complementarity, dual_sign});
}

QpResiduals qp_residuals(const QpProblem& qp, const QpSolution& sol) {
  QpResiduals r;
  const std::size_t n = qp.n;
  Vector st(n);
  for (std::size_t i = 0; i < n; ++i) st[i] = qp.weight(i) * (sol.z[i] - qp.target[i]) - sol.bound_dual[i];
  if (qp.num_eq() > 0) {
    axpy(1.0, matvec_t(qp.eq_lhs, sol.eq_dual), st);
    r.equality = norm_inf(sub(matvec(qp.eq_lhs, sol.z), qp.eq_rhs));
  }
  r.stationarity = norm_inf(st);
  for (std::size_t i = 0; i < n; ++i) {
    r.dual_sign = std::max(r.dual_sign, -sol.bound_dual[i]);
    if (finite_lower(qp, i)) {
      r.bound_violation = std::max(r.bound_violation, qp.lower[i] - sol.z[i]);
      r.complementarity =
          std::max(r.complementarity, std::fabs(sol.bound_dual[i] * (sol.z[i] - qp.lower[i])));
    } else {
      r.complementarity = std::max(r.complementarity, std::fabs(sol.bound_dual[i]));
    }
  }
  return r;
}

double qp_objective(const QpProblem& qp, const Vector& z) {
  double acc = 0.0;
  for (std::size_t i = 0; i < qp.n; ++i) {
    const double e = z[i] - qp.target[i];
    acc += qp.weight(i) * e * e;
  }
  return 0.5 * acc;
}

double default_qp_tol() {
  static const double tol = [] {
    if (const char* env = std::getenv("DDOPT_QP_TOL")) {
      char* end = nullptr;
      const double v = std::strtod(env, &end);
      if (end != env && v > 0.0) return v;
    }
    return 1e-10;
  }();
  return tol;
}

// ---- ADMM -------------------------------------------------------------------

QpSolution solve_qp(const QpProblem& qp, double tol, int max_iter) {
  qp.validate();
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidConfig, "qp: tol must be positive");
  const std::size_t n = qp.n;
  const std::size_t k = qp.num_eq();
  const double acc = tol * data_scale(qp);

  std::vector<std::size_t> brow;  // bounded coordinates
  for (std::size_t i = 0; i < n; ++i)
    if (finite_lower(qp, i)) brow.push_back(i);
  const std::size_t nb = brow.size();

  // Bounds inactive at the equality-only optimum: done.
  QpSolution best;
  if (try_polish(qp, std::vector<char>(n, 0), acc, best)) {
    best.status = QpStatus::Optimal;
    return best;
  }
  if (nb == 0) {
    best = pack(qp, solve_fixed(qp, std::vector<char>(n, 0)));
    best.status = QpStatus::Infeasible;
    return best;
  }

  // Equilibrate equality rows to unit norm.
  Matrix a = qp.eq_lhs;
  Vector b = qp.eq_rhs;
  Vector row_scale(k, 1.0);
  for (std::size_t r = 0; r < k; ++r) {
    const double nr = norm(a.row(r));
    if (nr > 0.0) {
      row_scale[r] = 1.0 / nr;
      for (double& v : a.row(r)) v /= nr;
      b[r] /= nr;
    }
  }

  Matrix kkt(n, n);
  for (std::size_t i = 0; i < n; ++i) kkt(i, i) = qp.weight(i) + kSigma;
  for (std::size_t i : brow) kkt(i, i) += kRho;
  if (k > 0) {
    const Matrix ata = gram(a);
    for (std::size_t i = 0; i < n; ++i) axpy(kRhoEq, ata.row(i), kkt.row(i));
  }
  const auto chol = Cholesky::factor(kkt);
  if (!chol) throw Error(ErrorCode::NotPositiveDefinite, "qp: ADMM system");

  Vector q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = -qp.weight(i) * qp.target[i];

  Vector x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) x[i] = finite_lower(qp, i) ? std::max(qp.target[i], qp.lower[i]) : qp.target[i];
  Vector za = b;             // equality copies (always projected onto b)
  Vector zb(nb);             // bound copies
  for (std::size_t t = 0; t < nb; ++t) zb[t] = x[brow[t]];
  Vector ya(k, 0.0);
  Vector yb(nb, 0.0);
  Vector ya_prev = ya;
  Vector yb_prev = yb;

  bool converged = false;
  bool infeasible = false;
  int stall = 0;
  int last_polish = -1000;
  int it = 0;
  double prim = INFINITY;
  double dual = INFINITY;

  auto current = [&]() {
    QpSolution s;
    s.z = x;
    s.eq_dual.assign(k, 0.0);
    for (std::size_t r = 0; r < k; ++r) s.eq_dual[r] = ya[r] * row_scale[r];
    s.bound_dual.assign(n, 0.0);
    for (std::size_t t = 0; t < nb; ++t) s.bound_dual[brow[t]] = std::max(-yb[t], 0.0);
    return s;
  };
  auto guess_active = [&]() {
    std::vector<char> fixed(n, 0);
    for (std::size_t t = 0; t < nb; ++t) {
      const std::size_t i = brow[t];
      const double gap = zb[t] - qp.lower[i];
      fixed[i] = (gap <= 10.0 * tol || -yb[t] > gap) ? 1 : 0;
    }
    return fixed;
  };

  for (it = 1; it <= max_iter; ++it) {
    Vector rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = kSigma * x[i] - q[i];
    for (std::size_t r = 0; r < k; ++r) axpy(kRhoEq * za[r] - ya[r], a.row(r), rhs);
    for (std::size_t t = 0; t < nb; ++t) rhs[brow[t]] += kRho * zb[t] - yb[t];
    const Vector xt = chol->solve(rhs);
    const Vector zat = k > 0 ? matvec(a, xt) : Vector{};

    for (std::size_t i = 0; i < n; ++i) x[i] = kRelax * xt[i] + (1.0 - kRelax) * x[i];
    ya_prev = ya;
    yb_prev = yb;
    for (std::size_t r = 0; r < k; ++r) {
      const double zh = kRelax * zat[r] + (1.0 - kRelax) * za[r];
      const double zn = b[r];
      ya[r] += kRhoEq * (zh - zn);
      za[r] = zn;
    }
    for (std::size_t t = 0; t < nb; ++t) {
      const std::size_t i = brow[t];
      const double zh = kRelax * xt[i] + (1.0 - kRelax) * zb[t];
      const double zn = std::max(qp.lower[i], zh + yb[t] / kRho);
      yb[t] += kRho * (zh - zn);
      zb[t] = zn;
    }

    // Residuals in the original scaling.
    prim = 0.0;
    if (k > 0) prim = norm_inf(sub(matvec(qp.eq_lhs, x), qp.eq_rhs));
    for (std::size_t t = 0; t < nb; ++t) prim = std::max(prim, std::fabs(x[brow[t]] - zb[t]));
    Vector st(n);
    for (std::size_t i = 0; i < n; ++i) st[i] = qp.weight(i) * x[i] + q[i];
    for (std::size_t r = 0; r < k; ++r) axpy(ya[r], a.row(r), st);
    for (std::size_t t = 0; t < nb; ++t) st[brow[t]] += yb[t];
    dual = norm_inf(st);

    if (prim <= acc && dual <= acc) {
      converged = true;
      break;
    }

    const bool near = std::max(prim, dual) <= 1e-6 * data_scale(qp);
    if ((near && it - last_polish >= 25) || it - last_polish >= 200) {
      last_polish = it;
      QpSolution pol;
      const bool ok = near ? refine_polish(qp, guess_active(), acc, pol) : try_polish(qp, guess_active(), acc, pol);
      if (ok) {
        pol.status = QpStatus::Optimal;
        pol.iterations = it;
        return pol;
      }
    }

    // Primal infeasibility certificate from the dual increment: C^T dy ~ 0,
    // dy on bound rows <= 0, and the support value is negative.
    if (prim > 1e3 * acc) {
      Vector dya = sub(ya, ya_prev);
      Vector dyb = sub(yb, yb_prev);
      const double ndy = std::max(norm_inf(dya), norm_inf(dyb));
      bool cert = false;
      if (ndy > 0.0) {
        Vector ctdy(n, 0.0);
        for (std::size_t r = 0; r < k; ++r) axpy(dya[r], a.row(r), ctdy);
        for (std::size_t t = 0; t < nb; ++t) ctdy[brow[t]] += dyb[t];
        double support = k > 0 ? dot(b, dya) : 0.0;
        double pos = 0.0;
        for (std::size_t t = 0; t < nb; ++t) {
          support += qp.lower[brow[t]] * std::min(dyb[t], 0.0);
          pos = std::max(pos, dyb[t]);
        }
        cert = norm_inf(ctdy) <= 1e-6 * ndy && pos <= 1e-6 * ndy && support < -1e-6 * ndy;
      }
      stall = cert ? stall + 1 : 0;
      if (stall >= kStallWindow) {
        infeasible = true;
        break;
      }
    } else {
      stall = 0;
    }
  }

  best = current();
  best.iterations = std::min(it, max_iter);
  {
    const QpResiduals r = qp_residuals(qp, best);
    best.primal_res = std::max(r.equality, r.bound_violation);
    best.dual_res = std::max({r.stationarity, r.dual_sign, r.complementarity});
  }
  QpSolution pol;
  if (refine_polish(qp, guess_active(), acc, pol) &&
      (!converged || qp_residuals(qp, pol).max() <= qp_residuals(qp, best).max())) {
    pol.status = QpStatus::Optimal;
    pol.iterations = best.iterations;
    return pol;
  }
  best.status = converged ? QpStatus::Optimal : infeasible ? QpStatus::Infeasible : QpStatus::MaxIter;
  return best;
}

// ---- brute force ------------------------------------------------------------

namespace {

// Gaussian elimination with partial pivoting; false when singular.
bool gauss_solve(Matrix m, Vector rhs, Vector& out) {
  const std::size_t n = m.rows();
  double big = 0.0;
  for (double v : m.data()) big = std::max(big, std::fabs(v));
  const double eps = 1e-12 * std::max(big, 1e-300);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(m(r, c)) > std::fabs(m(piv, c))) piv = r;
    if (std::fabs(m(piv, c)) <= eps) return false;
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(c, j), m(piv, j));
      std::swap(rhs[c], rhs[piv]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = m(r, c) / m(c, c);
      if (f == 0.0) continue;
      for (std::size_t j = c; j < n; ++j) m(r, j) -= f * m(c, j);
      rhs[r] -= f * rhs[c];
    }
  }
  out.assign(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double acc = rhs[r];
    for (std::size_t j = r + 1; j < n; ++j) acc -= m(r, j) * out[j];
    out[r] = acc / m(r, r);
  }
  return true;
}

}  // namespace

QpSolution brute_force_qp(const QpProblem& qp) {
  qp.validate();
  const std::size_t n = qp.n;
  const std::size_t k = qp.num_eq();
  std::vector<std::size_t> fin;
  for (std::size_t i = 0; i < n; ++i)
    if (finite_lower(qp, i)) fin.push_back(i);
  if (fin.size() > 12) throw Error(ErrorCode::InvalidConfig, "brute_force_qp: more than 12 finite bounds");
  const double feas_tol = 1e-9 * data_scale(qp);

  QpSolution best;
  best.status = QpStatus::Infeasible;
  best.z = qp.target;
  best.eq_dual.assign(k, 0.0);
  best.bound_dual.assign(n, 0.0);
  double best_obj = INFINITY;
  int best_card = 0;
  int tried = 0;

  const std::uint64_t count = std::uint64_t{1} << fin.size();
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    ++tried;
    std::vector<char> fixed(n, 0);
    int card = 0;
    for (std::size_t t = 0; t < fin.size(); ++t)
      if (mask & (std::uint64_t{1} << t)) {
        fixed[fin[t]] = 1;
        ++card;
      }
    // Unknowns: z_F then lambda.
    std::vector<std::size_t> free_idx;
    for (std::size_t i = 0; i < n; ++i)
      if (!fixed[i]) free_idx.push_back(i);
    const std::size_t nf = free_idx.size();
    Matrix kk(nf + k, nf + k);
    Vector rhs(nf + k, 0.0);
    for (std::size_t a = 0; a < nf; ++a) {
      const std::size_t i = free_idx[a];
      kk(a, a) = qp.weight(i);
      rhs[a] = qp.weight(i) * qp.target[i];
      for (std::size_t r = 0; r < k; ++r) {
        kk(a, nf + r) = qp.eq_lhs(r, i);
        kk(nf + r, a) = qp.eq_lhs(r, i);
      }
    }
    for (std::size_t r = 0; r < k; ++r) {
      double v = qp.eq_rhs[r];
      for (std::size_t i = 0; i < n; ++i)
        if (fixed[i]) v -= qp.eq_lhs(r, i) * qp.lower[i];
      rhs[nf + r] = v;
    }
    Vector sol;
    if (!gauss_solve(kk, rhs, sol)) continue;

    Vector z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = fixed[i] ? qp.lower[i] : 0.0;
    for (std::size_t a = 0; a < nf; ++a) z[free_idx[a]] = sol[a];
    Vector lam(sol.begin() + static_cast<std::ptrdiff_t>(nf), sol.end());

    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i)
      if (!fixed[i] && finite_lower(qp, i) && z[i] < qp.lower[i] - feas_tol) ok = false;
    if (k > 0 && norm_inf(sub(matvec(qp.eq_lhs, z), qp.eq_rhs)) > feas_tol) ok = false;
    Vector mu(n, 0.0);
    if (ok) {
      const Vector atl = k > 0 ? matvec_t(qp.eq_lhs, lam) : Vector(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (!fixed[i]) continue;
        mu[i] = qp.weight(i) * (z[i] - qp.target[i]) + atl[i];
        if (mu[i] < -feas_tol) ok = false;
        mu[i] = std::max(mu[i], 0.0);
      }
    }
    if (!ok) continue;
    const double obj = qp_objective(qp, z);
    const double tie = 1e-12 * std::max(1.0, std::fabs(obj));
    const bool better = obj < best_obj - tie || (std::fabs(obj - best_obj) <= tie && card < best_card);
    if (better) {
      best_obj = obj;
      best_card = card;
      best.z = std::move(z);
      best.eq_dual = std::move(lam);
      best.bound_dual = std::move(mu);
      best.status = QpStatus::Optimal;
    }
  }
  best.iterations = tried;
  const QpResiduals r = qp_residuals(qp, best);
  best.primal_res = std::max(r.equality, r.bound_violation);
  best.dual_res = std::max({r.stationarity, r.dual_sign, r.complementarity});
  return best;
}

// ---- feasibility QP ---------------------------------------------------------

Vector FeasibilityQp::w(const Vector& z) const {
  return Vector(z.begin() + static_cast<std::ptrdiff_t>(w_off()),
                z.begin() + static_cast<std::ptrdiff_t>(w_off() + m));
}

Vector FeasibilityQp::v(const Vector& z) const {
  Vector out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = z[vp_off() + i] - z[vm_off() + i];
  return out;
}

FeasibilityQp build_feasibility_qp(const Vector& x, const Vector& c, const Matrix& j, BallMode mode,
                                   const std::vector<bool>& bounded_mask, double reg) {
  const std::size_t d = x.size();
  const std::size_t m = c.size();
  if (j.rows() != d || j.cols() != m) throw Error(ErrorCode::DimensionMismatch, "feasibility qp: J shape");
  FeasibilityQp f;
  f.m = m;
  f.d = d;
  f.mode = mode;
  for (std::size_t i = 0; i < d; ++i)
    if (bounded_mask.empty() || bounded_mask[i]) f.bounded.push_back(i);
  const std::size_t nb = f.bounded.size();
  const std::size_t n = 2 * m + 2 * d + 1 + nb;
  const bool l1 = mode == BallMode::L1;
  const std::size_t rows = 2 * m + (l1 ? 1 : 0) + nb;

  QpProblem& qp = f.qp;
  qp.n = n;
  qp.target.assign(n, 0.0);
  qp.weights.assign(n, reg);
  for (std::size_t i = 0; i < m; ++i) qp.weights[f.r_off() + i] = 1.0;
  if (!l1)
    for (std::size_t i = 0; i < 2 * d; ++i) qp.weights[f.vp_off() + i] = 1.0;
  qp.lower.assign(n, 0.0);
  for (std::size_t i = 0; i < 2 * m; ++i) qp.lower[i] = -INFINITY;
  qp.eq_lhs = Matrix(rows, n);
  qp.eq_rhs.assign(rows, 0.0);

  const Matrix g = gram(j);
  std::size_t row = 0;
  // r + J^T J w = c
  for (std::size_t i = 0; i < m; ++i, ++row) {
    qp.eq_lhs(row, f.r_off() + i) = 1.0;
    for (std::size_t k = 0; k < m; ++k) qp.eq_lhs(row, f.w_off() + k) = g(i, k);
    qp.eq_rhs[row] = c[i];
  }
  // J^T (v+ - v-) = 0
  for (std::size_t i = 0; i < m; ++i, ++row) {
    for (std::size_t k = 0; k < d; ++k) {
      qp.eq_lhs(row, f.vp_off() + k) = j(k, i);
      qp.eq_lhs(row, f.vm_off() + k) = -j(k, i);
    }
  }
  // sum(v+) + sum(v-) + sigma = |c|_1
  if (l1) {
    for (std::size_t k = 0; k < 2 * d; ++k) qp.eq_lhs(row, f.vp_off() + k) = 1.0;
    qp.eq_lhs(row, f.sigma_off()) = 1.0;
    qp.eq_rhs[row] = norm1(c);
    ++row;
  }
  // -(J w)_i + v_i - q_i = -x_i
  for (std::size_t t = 0; t < nb; ++t, ++row) {
    const std::size_t i = f.bounded[t];
    for (std::size_t k = 0; k < m; ++k) qp.eq_lhs(row, f.w_off() + k) = -j(i, k);
    qp.eq_lhs(row, f.vp_off() + i) = 1.0;
    qp.eq_lhs(row, f.vm_off() + i) = -1.0;
    qp.eq_lhs(row, f.q_off() + t) = -1.0;
    qp.eq_rhs[row] = -x[i];
    // Anchoring q at x keeps the slack penalty from pulling w or v off zero.
    qp.target[f.q_off() + t] = std::max(x[i], 0.0);
  }
  return f;
}

}  // namespace ddopt
