#include "agmm/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "agmm/error.hpp"

namespace agmm {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) fail(ErrorKind::InvalidArgument, "ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::from_rows(const std::vector<Vector>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) fail(ErrorKind::InvalidArgument, "ragged row list");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

Vector Matrix::col(std::size_t j) const {
  Vector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorKind::InvalidArgument, std::string("shape mismatch in ") + what);
}

void require_square(const Matrix& s, const char* what) {
  if (!s.is_square() || s.rows() == 0)
    fail(ErrorKind::InvalidArgument, std::string(what) + " requires a non-empty square matrix");
}

}  // namespace

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator+");
  Matrix c = a;
  auto cv = c.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < cv.size(); ++i) cv[i] += bv[i];
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator-");
  Matrix c = a;
  auto cv = c.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < cv.size(); ++i) cv[i] -= bv[i];
  return c;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) fail(ErrorKind::InvalidArgument, "shape mismatch in operator*");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t l = 0; l < a.cols(); ++l) {
      const double ail = a(i, l);
      if (ail == 0.0) continue;
      auto bl = b.row(l);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += ail * bl[j];
    }
  }
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (double& v : c.values()) v *= s;
  return c;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) fail(ErrorKind::InvalidArgument, "shape mismatch in matvec");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

double frobenius_norm(const Matrix& a) noexcept { return norm(a.values()); }

Vector subtract(std::span<const double> a, std::span<const double> b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

double trace(const Matrix& a) noexcept {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) t += a(i, i);
  return t;
}

double max_asymmetry(const Matrix& a) noexcept {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      worst = std::max(worst, std::abs(a(i, j) - a(j, i)));
  return worst;
}

Matrix symmetrized(const Matrix& s) {
  require_square(s, "symmetrized");
  double scale = 1.0;
  for (double v : s.values()) scale = std::max(scale, std::abs(v));
  const double asym = max_asymmetry(s);
  if (asym > 1e-8 * scale) {
    std::ostringstream msg;
    msg << "matrix is not symmetric (max |S_ij - S_ji| = " << asym << ")";
    fail(ErrorKind::InvalidArgument, msg.str());
  }
  Matrix out = s;
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = i + 1; j < s.cols(); ++j) {
      const double m = 0.5 * (s(i, j) + s(j, i));
      out(i, j) = m;
      out(j, i) = m;
    }
  return out;
}

namespace {

Matrix cholesky_impl(const Matrix& s, double rel_tol) {
  const Matrix a = symmetrized(s);
  const std::size_t n = a.rows();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, a(i, i));
  const double floor = rel_tol * max_diag;

  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = a(j, j);
    for (std::size_t p = 0; p < j; ++p) pivot -= l(j, p) * l(j, p);
    if (!(pivot > 0.0) || pivot <= floor) {
      std::ostringstream msg;
      msg << "pivot " << j << " = " << pivot;
      fail(ErrorKind::NotPositiveDefinite, msg.str());
    }
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a(i, j);
      for (std::size_t p = 0; p < j; ++p) v -= l(i, p) * l(j, p);
      l(i, j) = v / ljj;
    }
  }
  return l;
}

}  // namespace

Matrix chol_lower(const Matrix& s) { return cholesky_impl(s, 0.0); }

Matrix chol_lower_strict(const Matrix& s, double rel_tol) { return cholesky_impl(s, rel_tol); }

SymEig sym_eig(const Matrix& s) {
  Matrix a = symmetrized(s);
  const std::size_t n = a.rows();
  Matrix v = Matrix::identity(n);

  const double target = 1e-12 * frobenius_norm(a);
  auto off_norm = [&] {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(off);
  };

  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  for (; sweep < kMaxSweeps && off_norm() > target; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Symmetric Schur rotation zeroing a(p,q).
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }
  if (off_norm() > target) {
    fail(ErrorKind::NoConvergence, "Jacobi eigensolver exceeded 100 sweeps");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymEig out{Vector(n), Matrix(n, n)};
  for (std::size_t c = 0; c < n; ++c) {
    out.eigenvalues[c] = a(order[c], order[c]);
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, c) = v(r, order[c]);
  }
  return out;
}

Vector solve_lower(const Matrix& l, std::span<const double> b) {
  const std::size_t n = l.rows();
  Vector x(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    double v = x[i];
    for (std::size_t j = 0; j < i; ++j) v -= l(i, j) * x[j];
    x[i] = v / l(i, i);
  }
  return x;
}

Vector solve_lower_transposed(const Matrix& l, std::span<const double> b) {
  const std::size_t n = l.rows();
  Vector x(b.begin(), b.end());
  for (std::size_t ii = n; ii-- > 0;) {
    double v = x[ii];
    for (std::size_t j = ii + 1; j < n; ++j) v -= l(j, ii) * x[j];
    x[ii] = v / l(ii, ii);
  }
  return x;
}

Matrix spd_inverse(const Matrix& s) {
  const Matrix l = chol_lower(s);
  const std::size_t n = l.rows();
  Matrix inv(n, n);
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    const Vector col = solve_lower_transposed(l, solve_lower(l, e));
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return symmetrized(inv);
}

double log_det_spd(const Matrix& s) {
  const Matrix l = chol_lower(s);
  double acc = 0.0;
  for (std::size_t i = 0; i < l.rows(); ++i) acc += std::log(l(i, i));
  return 2.0 * acc;
}

namespace {

Matrix spectral_function(const Matrix& s, double (*f)(double)) {
  chol_lower(s);  // PD gate
  const SymEig eig = sym_eig(s);
  const std::size_t n = s.rows();
  Matrix out(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    const double fl = f(std::max(eig.eigenvalues[c], 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      const double vi = eig.eigenvectors(i, c) * fl;
      if (vi == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += vi * eig.eigenvectors(j, c);
    }
  }
  return symmetrized(out);
}

}  // namespace

Matrix spd_sqrt(const Matrix& s) {
  return spectral_function(s, [](double x) { return std::sqrt(x); });
}

Matrix spd_inv_sqrt(const Matrix& s) {
  return spectral_function(s, [](double x) { return 1.0 / std::sqrt(x); });
}

SvdTopK svd_topk(const Matrix& m, std::size_t r) {
  const std::size_t d = m.cols();
  if (r < 1 || r > std::min(m.rows(), d))
    fail(ErrorKind::InvalidArgument, "svd_topk requires 1 <= r <= min(n, d)");

  Matrix gram(d, d);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = m.row(i);
    for (std::size_t a = 0; a < d; ++a) {
      if (row[a] == 0.0) continue;
      for (std::size_t b = a; b < d; ++b) gram(a, b) += row[a] * row[b];
    }
  }
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < a; ++b) gram(a, b) = gram(b, a);

  const SymEig eig = sym_eig(gram);
  SvdTopK out{Vector(r), Matrix(d, r)};
  for (std::size_t c = 0; c < r; ++c) {
    const std::size_t src = d - 1 - c;
    out.singular_values[c] = std::sqrt(std::max(eig.eigenvalues[src], 0.0));
    std::size_t pivot = 0;
    for (std::size_t i = 1; i < d; ++i)
      if (std::abs(eig.eigenvectors(i, src)) > std::abs(eig.eigenvectors(pivot, src))) pivot = i;
    const double sign = eig.eigenvectors(pivot, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < d; ++i) out.right_vectors(i, c) = sign * eig.eigenvectors(i, src);
  }
  return out;
}

Matrix orthonormalize_columns(const Matrix& a) {
  const std::size_t n = a.rows();
  const std::size_t m = a.cols();
  if (m > n) fail(ErrorKind::InvalidArgument, "more columns than rows in orthonormalize_columns");
  Matrix q = a;
  for (std::size_t j = 0; j < m; ++j) {
    const double original = [&] {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += q(i, j) * q(i, j);
      return std::sqrt(s);
    }();
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t p = 0; p < j; ++p) {
        double proj = 0.0;
        for (std::size_t i = 0; i < n; ++i) proj += q(i, p) * q(i, j);
        for (std::size_t i = 0; i < n; ++i) q(i, j) -= proj * q(i, p);
      }
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += q(i, j) * q(i, j);
    nrm = std::sqrt(nrm);
    if (!(nrm > 1e-12 * std::max(original, 1e-300)))
      fail(ErrorKind::NumericalFailure, "rank-deficient input to orthonormalize_columns");
    for (std::size_t i = 0; i < n; ++i) q(i, j) /= nrm;
  }
  return q;
}

}  // namespace agmm
