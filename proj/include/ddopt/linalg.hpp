#pragma once

// Dense linear algebra for desk-scale problems (d + m in the hundreds).
//
// Jacobians are stored as d x m matrices whose columns are the constraint
// gradients, so J^T J is the m x m Gram matrix and J y lives in R^d.

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace ddopt {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  /// Single-column matrix holding `v`.
  static Matrix column(std::span<const double> v);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  Vector col(std::size_t c) const;
  void set_col(std::size_t c, std::span<const double> v);

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  Matrix transpose() const;
  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// ---- vector helpers (dispatch to the SIMD kernels) -------------------------

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> x);
double norm_sq(std::span<const double> x);
double norm_inf(std::span<const double> x);
double norm1(std::span<const double> x);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
Vector add(std::span<const double> a, std::span<const double> b);
Vector sub(std::span<const double> a, std::span<const double> b);
Vector scaled(double alpha, std::span<const double> x);
bool all_finite(std::span<const double> x);

// ---- matrix products -------------------------------------------------------

/// M x
Vector matvec(const Matrix& m, std::span<const double> x);
/// M^T x
Vector matvec_t(const Matrix& m, std::span<const double> x);
/// A B
Matrix matmul(const Matrix& a, const Matrix& b);

/// J^T J for a d x m matrix J.
Matrix gram(const Matrix& j);

double frobenius_norm(const Matrix& m);
/// Largest Euclidean column norm (the per-constraint gradient bound).
double max_column_norm(const Matrix& m);
/// Spectral norm via power iteration on M^T M.
double operator_norm(const Matrix& m);

// ---- factorizations --------------------------------------------------------

/// Cholesky factor of a symmetric positive definite matrix (lower triangle).
class Cholesky {
 public:
  /// Returns nullopt when a pivot is <= 0.
  static std::optional<Cholesky> factor(const Matrix& m, double reg = 0.0);

  std::size_t size() const noexcept { return l_.rows(); }
  Vector solve(std::span<const double> b) const;
  /// Smallest squared diagonal entry of L.
  double min_pivot() const noexcept { return min_pivot_; }
  const Matrix& lower() const noexcept { return l_; }

 private:
  Matrix l_;
  double min_pivot_ = 0.0;
};

/// Solves (M + reg I) y = b. When the factorization breaks down a ridge of
/// 1e-12 * trace(M) / m is added once before giving up.
Vector solve_spd(const Matrix& m, std::span<const double> b, double reg = 0.0);

/// Pre-factored Gram matrix of a full-column-rank Jacobian. Applications of
/// (J^T J)^{-1} go through the Cholesky factor; explicit inverses are never
/// formed.
class GramFactor {
 public:
  /// Throws RankDeficient when J^T J is numerically singular.
  explicit GramFactor(const Matrix& j);

  const Matrix& jacobian() const noexcept { return j_; }
  const Matrix& gram() const noexcept { return g_; }

  /// (J^T J)^{-1} b
  Vector solve(std::span<const double> b) const;
  /// g - J (J^T J)^{-1} J^T g, with one step of iterative refinement.
  Vector project(std::span<const double> g) const;
  /// argmin_y |g + J y|
  Vector multiplier(std::span<const double> g) const;

 private:
  Matrix j_;
  Matrix g_;
  Cholesky chol_;
};

/// Orthogonal projection of g onto null(J^T).
Vector project_tangent(const Matrix& j, std::span<const double> g);
/// lambda minimizing |g + J lambda|.
Vector least_squares_multiplier(const Matrix& j, std::span<const double> g);

/// Extreme eigenvalues of a symmetric PSD matrix (inverse / direct power
/// iteration, 200 iteration cap).
double min_eigenvalue_spd(const Matrix& m);
double max_eigenvalue_sym(const Matrix& m);

/// Smallest singular value of a d x m matrix J (0 if rank deficient or d < m).
double min_singular_value(const Matrix& j);

}  // namespace ddopt
