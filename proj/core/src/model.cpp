#include "agmm/model.hpp"

#include <cmath>
#include <sstream>

#include "agmm/error.hpp"
#include "agmm/rng.hpp"

namespace agmm {

CovarianceSpec CovarianceSpec::homogeneous(Matrix sigma) {
  CovarianceSpec spec;
  spec.homogeneous_ = true;
  spec.sigmas_.push_back(std::move(sigma));
  return spec;
}

CovarianceSpec CovarianceSpec::heterogeneous(std::vector<Matrix> sigmas) {
  CovarianceSpec spec;
  spec.homogeneous_ = false;
  spec.sigmas_ = std::move(sigmas);
  return spec;
}

CovarianceSpec CovarianceSpec::as_heterogeneous(std::size_t k) const {
  if (!homogeneous_) return *this;
  return heterogeneous(std::vector<Matrix>(k, sigmas_.front()));
}

namespace {

[[noreturn]] void invalid(const std::string& what) { fail(ErrorKind::InvalidParams, what); }

void check_covariance(const Matrix& s, std::size_t d, const std::string& label) {
  if (s.rows() != d || s.cols() != d) {
    std::ostringstream msg;
    msg << label << " is " << s.rows() << "x" << s.cols() << ", expected " << d << "x" << d;
    invalid(msg.str());
  }
  if (!s.all_finite()) invalid(label + " has non-finite entries");
  if (max_asymmetry(s) > 1e-12 * std::max(1.0, frobenius_norm(s)))
    invalid(label + " is not symmetric");
  try {
    chol_lower(s);
  } catch (const Error& e) {
    invalid(label + " is not positive definite (" + e.what() + ")");
  }
}

}  // namespace

void validate_structure(const GmmParams& params) {
  if (params.k < 1) invalid("k must be at least 1");
  if (params.d < 1) invalid("d must be at least 1");
  if (params.centers.rows() != params.k || params.centers.cols() != params.d)
    invalid("centers must be a k x d matrix");
  if (!params.centers.all_finite()) invalid("centers have non-finite entries");
  const auto& cov = params.covariance;
  if (cov.matrices().empty()) invalid("covariance is missing");
  if (cov.is_homogeneous()) {
    if (cov.matrices().size() != 1) invalid("homogeneous covariance must hold one matrix");
    check_covariance(cov.of(0), params.d, "sigma");
  } else {
    if (cov.matrices().size() != params.k) {
      std::ostringstream msg;
      msg << "heterogeneous covariance lists " << cov.matrices().size() << " matrices for k = "
          << params.k;
      invalid(msg.str());
    }
    for (std::size_t a = 0; a < params.k; ++a)
      check_covariance(cov.of(a), params.d, "sigmas[" + std::to_string(a) + "]");
  }
}

void validate(const GmmParams& params) {
  if (params.k < 2) invalid("k must be at least 2");
  validate_structure(params);
  for (std::size_t a = 0; a < params.k; ++a)
    for (std::size_t b = a + 1; b < params.k; ++b) {
      const Vector gap = subtract(params.centers.row(a), params.centers.row(b));
      if (!(norm(gap) > 0.0)) {
        std::ostringstream msg;
        msg << "centers " << a << " and " << b << " coincide";
        invalid(msg.str());
      }
    }
}

void check_labels(const LabelVector& z, std::size_t k) {
  for (std::size_t j = 0; j < z.size(); ++j)
    if (z[j] < 0 || static_cast<std::size_t>(z[j]) >= k) {
      std::ostringstream msg;
      msg << "label " << z[j] << " at position " << j << " is outside [0, " << k << ")";
      fail(ErrorKind::InvalidArgument, msg.str());
    }
}

Dataset sample(const GmmParams& params, const LabelVector& assignment, std::uint64_t seed) {
  validate_structure(params);
  check_labels(assignment, params.k);

  const std::size_t d = params.d;
  std::vector<Matrix> roots;
  const std::size_t distinct = params.covariance.is_homogeneous() ? 1 : params.k;
  roots.reserve(distinct);
  for (std::size_t a = 0; a < distinct; ++a) roots.push_back(spd_sqrt(params.covariance.of(a)));

  Philox4x32 rng(seed);
  Dataset out;
  out.y = Matrix(assignment.size(), d);
  Vector w(d);
  for (std::size_t j = 0; j < assignment.size(); ++j) {
    const auto a = static_cast<std::size_t>(assignment[j]);
    rng.fill_normal(w);
    const Matrix& root = roots[params.covariance.is_homogeneous() ? 0 : a];
    auto yj = out.y.row(j);
    auto center = params.centers.row(a);
    for (std::size_t i = 0; i < d; ++i) yj[i] = center[i] + dot(root.row(i), w);
  }
  out.truth = assignment;
  out.params = params;
  return out;
}

LabelVector balanced_assignment(std::size_t n, std::size_t k) {
  if (k == 0) fail(ErrorKind::InvalidArgument, "balanced_assignment needs k >= 1");
  LabelVector z;
  z.values.reserve(n);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  for (std::size_t a = 0; a < k; ++a) {
    const std::size_t size = base + (a < extra ? 1 : 0);
    z.values.insert(z.values.end(), size, static_cast<int>(a));
  }
  return z;
}

namespace {

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Philox4x32& rng) {
  Matrix g(rows, cols);
  rng.fill_normal(g.values());
  return g;
}

Vector random_direction(std::size_t d, Philox4x32& rng) {
  Vector v(d);
  double len = 0.0;
  while (!(len > 1e-12)) {
    rng.fill_normal(v);
    len = norm(v);
  }
  for (double& x : v) x /= len;
  return v;
}

}  // namespace

Matrix random_orthogonal(std::size_t d, std::uint64_t seed) {
  if (d == 0) fail(ErrorKind::InvalidArgument, "random_orthogonal needs d >= 1");
  Philox4x32 rng(seed);
  return orthonormalize_columns(gaussian_matrix(d, d, rng));
}

Vector linspace(double lo, double hi, std::size_t count) {
  Vector out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

GmmParams make_sim1(std::uint64_t seed) {
  constexpr std::size_t d = 50;
  constexpr std::size_t k = 30;
  constexpr double center_norm = 9.0;

  const Matrix u = random_orthogonal(d, derive_seed(seed, 0, 0));
  const Matrix lambda = Matrix::diagonal(linspace(0.5, 8.0, d));
  Matrix sigma = symmetrized(u.transpose() * lambda * u);

  // First k columns of an independent Haar matrix form an orthonormal frame.
  const Matrix frame = random_orthogonal(d, derive_seed(seed, 1, 0));
  GmmParams p;
  p.k = k;
  p.d = d;
  p.centers = Matrix(k, d);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t i = 0; i < d; ++i) p.centers(a, i) = center_norm * frame(i, a);
  p.covariance = CovarianceSpec::homogeneous(std::move(sigma));
  return p;
}

GmmParams make_sim2(std::uint64_t seed) {
  constexpr std::size_t d = 5;
  constexpr std::size_t k = 3;

  Philox4x32 rng(derive_seed(seed, 0, 0));
  const Matrix u = random_orthogonal(d, derive_seed(seed, 1, 0));

  Vector lambda3(d);
  for (double& v : lambda3) v = 0.5 + 1.5 * rng.uniform();

  std::vector<Matrix> sigmas;
  sigmas.push_back(Matrix::identity(d));
  sigmas.push_back(Matrix::diagonal(linspace(0.5, 8.0, d)));
  sigmas.push_back(symmetrized(u.transpose() * Matrix::diagonal(lambda3) * u));

  const Vector theta1 = random_direction(d, rng);
  Vector theta2 = theta1;
  theta2[0] += 5.0;
  const Vector v1 = random_direction(d, rng);
  Vector theta3 = theta2;
  for (std::size_t i = 0; i < d; ++i) theta3[i] += 10.0 * v1[i];

  GmmParams p;
  p.k = k;
  p.d = d;
  p.centers = Matrix::from_rows({theta1, theta2, theta3});
  p.covariance = CovarianceSpec::heterogeneous(std::move(sigmas));
  return p;
}

}  // namespace agmm
