#pragma once

// Dense linear-algebra kernels for small symmetric problems (d up to a few
// hundred). Everything here is a pure function of its inputs.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace agmm {

using Vector = std::vector<double>;

// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);
  static Matrix from_rows(const std::vector<Vector>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  Vector col(std::size_t j) const;

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  Matrix transpose() const;
  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Vector operator*(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double norm(std::span<const double> a) noexcept;
double frobenius_norm(const Matrix& a) noexcept;
Vector subtract(std::span<const double> a, std::span<const double> b);
double trace(const Matrix& a) noexcept;
double max_asymmetry(const Matrix& a) noexcept;

// (S + S^T)/2; throws InvalidArgument if S is not square or its asymmetry
// exceeds 1e-8 relative to max(1, max|S_ij|).
Matrix symmetrized(const Matrix& s);

struct SymEig {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // column i pairs with eigenvalues[i]
};

struct SvdTopK {
  Vector singular_values;  // descending
  Matrix right_vectors;    // d x r, orthonormal columns
};

// Lower Cholesky factor. Throws NotPositiveDefinite when a pivot is <= 0.
Matrix chol_lower(const Matrix& s);

// Like chol_lower but additionally rejects pivots below rel_tol * max diag(S).
Matrix chol_lower_strict(const Matrix& s, double rel_tol);

// Cyclic Jacobi. At most 100 sweeps; stops once the off-diagonal Frobenius
// norm falls below 1e-12 * ||S||_F. Throws NoConvergence otherwise.
SymEig sym_eig(const Matrix& s);

Matrix spd_inverse(const Matrix& s);
double log_det_spd(const Matrix& s);
Matrix spd_sqrt(const Matrix& s);
Matrix spd_inv_sqrt(const Matrix& s);

// Top-r singular values/right vectors via the eigen-decomposition of M^T M.
// Each right vector is sign-normalised so its largest-magnitude entry is positive.
SvdTopK svd_topk(const Matrix& m, std::size_t r);

// Triangular solves against a Cholesky factor L.
Vector solve_lower(const Matrix& l, std::span<const double> b);
Vector solve_lower_transposed(const Matrix& l, std::span<const double> b);

// Orthonormalises the columns of A by twice-iterated modified Gram-Schmidt.
// Equivalent to the Q factor of a QR decomposition whose R has a positive
// diagonal. Throws NumericalFailure for rank-deficient input.
Matrix orthonormalize_columns(const Matrix& a);

}  // namespace agmm
