#include "ddopt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ddopt/error.hpp"
#include "ddopt/simd.hpp"

namespace ddopt {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::DimensionMismatch, what);
}

constexpr int kPowerIters = 200;

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch:
      return "DimensionMismatch";
    case ErrorCode::NotPositiveDefinite:
      return "NotPositiveDefinite";
    case ErrorCode::RankDeficient:
      return "RankDeficient";
    case ErrorCode::EvalDomain:
      return "EvalDomain";
    case ErrorCode::UnknownProblem:
      return "UnknownProblem";
    case ErrorCode::InvalidBounds:
      return "InvalidBounds";
    case ErrorCode::InvalidConfig:
      return "InvalidConfig";
    case ErrorCode::SubproblemInfeasible:
      return "SubproblemInfeasible";
    case ErrorCode::QpMaxIter:
      return "QpMaxIter";
    case ErrorCode::EmptyInput:
      return "EmptyInput";
  }
  return "Unknown";
}

// ---- Matrix -----------------------------------------------------------------

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    require(row.size() == c, "ragged rows");
    std::copy(row.begin(), row.end(), m.row(i).begin());
    ++i;
  }
  return m;
}

Matrix Matrix::column(std::span<const double> v) {
  Matrix m(v.size(), 1);
  std::copy(v.begin(), v.end(), m.data_.begin());
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Vector Matrix::col(std::size_t c) const {
  Vector v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

void Matrix::set_col(std::size_t c, std::span<const double> v) {
  require(v.size() == rows_, "set_col: length");
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

bool Matrix::all_finite() const { return ddopt::all_finite(data_); }

// ---- vectors ----------------------------------------------------------------

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: length");
  return simd::active().dot(a.data(), b.data(), a.size());
}

double norm_sq(std::span<const double> x) { return simd::active().sum_sq(x.data(), x.size()); }

double norm(std::span<const double> x) {
  // Rescale only when the plain sum would over- or underflow.
  const double s = norm_sq(x);
  if (std::isfinite(s) && s > 1e-280) return std::sqrt(s);
  const double big = norm_inf(x);
  if (big == 0.0 || !std::isfinite(big)) return big;
  double acc = 0.0;
  for (double v : x) acc += (v / big) * (v / big);
  return big * std::sqrt(acc);
}

double norm_inf(std::span<const double> x) { return simd::active().max_abs(x.data(), x.size()); }

double norm1(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::fabs(v);
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require(x.size() == y.size(), "axpy: length");
  simd::active().axpy(alpha, x.data(), y.data(), x.size());
}

Vector add(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "add: length");
  Vector y(a.begin(), a.end());
  axpy(1.0, b, y);
  return y;
}

Vector sub(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "sub: length");
  Vector y(a.size());
  simd::active().sub(a.data(), b.data(), y.data(), a.size());
  return y;
}

Vector scaled(double alpha, std::span<const double> x) {
  Vector y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = alpha * x[i];
  return y;
}

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

// ---- products ---------------------------------------------------------------

Vector matvec(const Matrix& m, std::span<const double> x) {
  require(m.cols() == x.size(), "matvec: shape");
  Vector y(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) y[r] = dot(m.row(r), x);
  return y;
}

Vector matvec_t(const Matrix& m, std::span<const double> x) {
  require(m.rows() == x.size(), "matvec_t: shape");
  Vector y(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r)
    if (x[r] != 0.0) axpy(x[r], m.row(r), y);
  return y;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matmul: shape");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k)
      if (a(i, k) != 0.0) axpy(a(i, k), b.row(k), c.row(i));
  return c;
}

Matrix gram(const Matrix& j) {
  const std::size_t m = j.cols();
  Matrix g(m, m);
  for (std::size_t r = 0; r < j.rows(); ++r) {
    const auto row = j.row(r);
    for (std::size_t i = 0; i < m; ++i)
      if (row[i] != 0.0) axpy(row[i], row, g.row(i));
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = i + 1; k < m; ++k) g(k, i) = g(i, k);
  return g;
}

double frobenius_norm(const Matrix& m) { return norm(m.data()); }

double max_column_norm(const Matrix& m) {
  double best = 0.0;
  for (std::size_t c = 0; c < m.cols(); ++c) best = std::max(best, norm(m.col(c)));
  return best;
}

double operator_norm(const Matrix& m) {
  if (m.empty()) return 0.0;
  const Matrix g = m.rows() >= m.cols() ? gram(m) : gram(m.transpose());
  return std::sqrt(std::max(0.0, max_eigenvalue_sym(g)));
}

// ---- Cholesky ---------------------------------------------------------------

std::optional<Cholesky> Cholesky::factor(const Matrix& m, double reg) {
  require(m.rows() == m.cols(), "cholesky: not square");
  const std::size_t n = m.rows();
  Cholesky ch;
  ch.l_ = Matrix(n, n);
  ch.min_pivot_ = n == 0 ? 0.0 : INFINITY;
  Matrix& l = ch.l_;
  for (std::size_t j = 0; j < n; ++j) {
    const auto lj = l.row(j).first(j);
    const double pivot = m(j, j) + reg - dot(lj, lj);
    if (!(pivot > 0.0)) return std::nullopt;
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    ch.min_pivot_ = std::min(ch.min_pivot_, pivot);
    for (std::size_t i = j + 1; i < n; ++i) {
      l(i, j) = (m(i, j) - dot(l.row(i).first(j), lj)) / ljj;
    }
  }
  return ch;
}

Vector Cholesky::solve(std::span<const double> b) const {
  const std::size_t n = size();
  require(b.size() == n, "cholesky solve: length");
  Vector y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) y[i] = (y[i] - dot(l_.row(i).first(i), std::span(y).first(i))) / l_(i, i);
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) acc -= l_(k, ii) * y[k];
    y[ii] = acc / l_(ii, ii);
  }
  return y;
}

Vector solve_spd(const Matrix& m, std::span<const double> b, double reg) {
  require(m.rows() == m.cols() && m.rows() == b.size(), "solve_spd: shape");
  const std::size_t n = m.rows();
  auto ch = Cholesky::factor(m, reg);
  double used = reg;
  if (!ch && n > 0) {
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += m(i, i);
    const double ridge = 1e-12 * trace / static_cast<double>(n);
    if (ridge > 0.0) {
      used = reg + ridge;
      ch = Cholesky::factor(m, used);
    }
  }
  if (!ch) throw Error(ErrorCode::NotPositiveDefinite, "Cholesky pivot <= 0");
  Vector y = ch->solve(b);
  // One refinement sweep against the regularized system.
  Vector r = matvec(m, y);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i] - used * y[i];
  const Vector dy = ch->solve(r);
  axpy(1.0, dy, y);
  return y;
}

// ---- Gram-based projections ------------------------------------------------

GramFactor::GramFactor(const Matrix& j) : j_(j), g_(ddopt::gram(j)) {
  const std::size_t m = g_.rows();
  if (m > j.rows()) throw Error(ErrorCode::RankDeficient, "more constraints than variables");
  auto ch = Cholesky::factor(g_);
  double scale = 0.0;
  for (std::size_t i = 0; i < m; ++i) scale = std::max(scale, g_(i, i));
  if (!ch || !(ch->min_pivot() > 1e-14 * scale)) {
    throw Error(ErrorCode::RankDeficient, "Jacobian Gram matrix is numerically singular");
  }
  chol_ = std::move(*ch);
}

Vector GramFactor::solve(std::span<const double> b) const {
  Vector y = chol_.solve(b);
  Vector r = matvec(g_, y);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  axpy(1.0, chol_.solve(r), y);
  return y;
}

Vector GramFactor::project(std::span<const double> g) const {
  Vector p(g.begin(), g.end());
  for (int sweep = 0; sweep < 2; ++sweep) {
    const Vector y = chol_.solve(matvec_t(j_, p));
    axpy(-1.0, matvec(j_, y), p);
  }
  return p;
}

Vector GramFactor::multiplier(std::span<const double> g) const {
  Vector lam = chol_.solve(matvec_t(j_, g));
  for (double& v : lam) v = -v;
  Vector resid(g.begin(), g.end());
  axpy(1.0, matvec(j_, lam), resid);
  axpy(-1.0, chol_.solve(matvec_t(j_, resid)), lam);
  return lam;
}

Vector project_tangent(const Matrix& j, std::span<const double> g) {
  require(j.rows() == g.size(), "project_tangent: shape");
  if (j.cols() == 0) return Vector(g.begin(), g.end());
  return GramFactor(j).project(g);
}

Vector least_squares_multiplier(const Matrix& j, std::span<const double> g) {
  require(j.rows() == g.size(), "least_squares_multiplier: shape");
  if (j.cols() == 0) return {};
  return GramFactor(j).multiplier(g);
}

// ---- spectra ----------------------------------------------------------------

namespace {

Vector start_vector(std::size_t n) {
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i % 7) / 7.0;
  const double nv = norm(v);
  for (double& x : v) x /= nv;
  return v;
}

}  // namespace

double min_eigenvalue_spd(const Matrix& m) {
  require(m.rows() == m.cols(), "min_eigenvalue_spd: not square");
  const std::size_t n = m.rows();
  if (n == 0) return 0.0;
  auto ch = Cholesky::factor(m);
  if (!ch) return 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, m(i, i));
  if (!(ch->min_pivot() > 1e-15 * scale)) return 0.0;
  Vector v = start_vector(n);
  double lam = dot(v, matvec(m, v));
  for (int it = 0; it < kPowerIters; ++it) {
    Vector y = ch->solve(v);
    const double ny = norm(y);
    if (!(ny > 0.0) || !std::isfinite(ny)) return 0.0;
    for (double& x : y) x /= ny;
    const double next = dot(y, matvec(m, y));
    v = std::move(y);
    const bool done = std::fabs(next - lam) <= 1e-15 * std::fabs(next);
    lam = next;
    if (done) break;
  }
  return std::max(0.0, lam);
}

double max_eigenvalue_sym(const Matrix& m) {
  require(m.rows() == m.cols(), "max_eigenvalue_sym: not square");
  const std::size_t n = m.rows();
  if (n == 0) return 0.0;
  if (n == 1) return m(0, 0);
  Vector v = start_vector(n);
  double lam = dot(v, matvec(m, v));
  for (int it = 0; it < kPowerIters; ++it) {
    Vector y = matvec(m, v);
    const double ny = norm(y);
    if (ny == 0.0) return 0.0;
    for (double& x : y) x /= ny;
    const double next = dot(y, matvec(m, y));
    v = std::move(y);
    const bool done = std::fabs(next - lam) <= 1e-15 * std::fabs(next);
    lam = next;
    if (done) break;
  }
  return lam;
}

double min_singular_value(const Matrix& j) {
  if (j.cols() == 0) return 0.0;
  if (j.rows() < j.cols()) return 0.0;
  return std::sqrt(min_eigenvalue_spd(gram(j)));
}

}  // namespace ddopt
