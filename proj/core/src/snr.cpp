#include "agmm/snr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "agmm/error.hpp"

namespace agmm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double QuadraticBoundary::value(std::span<const double> x) const {
  const Vector ax = a_mat * x;
  return dot(b_vec, x) + 0.5 * dot(x, ax) + c;
}

double min_center_gap(const GmmParams& params) {
  if (params.k < 2) fail(ErrorKind::InvalidArgument, "min_center_gap needs k >= 2");
  double best = kInf;
  for (std::size_t a = 0; a < params.k; ++a)
    for (std::size_t b = a + 1; b < params.k; ++b)
      best = std::min(best, norm(subtract(params.centers.row(a), params.centers.row(b))));
  return best;
}

double snr_homogeneous(const GmmParams& params) {
  if (!params.covariance.is_homogeneous())
    fail(ErrorKind::InvalidArgument, "snr_homogeneous needs a shared covariance");
  if (params.k < 2) fail(ErrorKind::InvalidArgument, "snr_homogeneous needs k >= 2");
  // ||Sigma^{-1/2} v|| = ||L^{-1} v|| for Sigma = L L^T.
  const Matrix l = chol_lower(params.covariance.of(0));
  double best = kInf;
  for (std::size_t a = 0; a < params.k; ++a)
    for (std::size_t b = a + 1; b < params.k; ++b) {
      const Vector w = solve_lower(l, subtract(params.centers.row(a), params.centers.row(b)));
      best = std::min(best, norm(w));
    }
  return best;
}

QuadraticBoundary boundary(const GmmParams& params, std::size_t a, std::size_t b) {
  if (a == b || a >= params.k || b >= params.k)
    fail(ErrorKind::InvalidArgument, "boundary needs two distinct cluster indices below k");
  const Matrix& sigma_a = params.covariance.of(a);
  const Matrix& sigma_b = params.covariance.of(b);
  const Matrix root_a = spd_sqrt(sigma_a);
  const Matrix inv_b = spd_inverse(sigma_b);
  const Vector gap = subtract(params.centers.row(a), params.centers.row(b));

  QuadraticBoundary qb;
  qb.a_mat = symmetrized(root_a * inv_b * root_a - Matrix::identity(params.d));
  qb.b_vec = root_a * (inv_b * gap);
  qb.c = 0.5 * dot(gap, inv_b * gap) - 0.5 * log_det_spd(sigma_a) + 0.5 * log_det_spd(sigma_b);
  return qb;
}

namespace {

// The problem min ||x|| s.t. g(x) <= 0 in the eigenbasis of A, where
// stationary points are x_i(mu) = -mu v_i / (1 + mu lambda_i).
struct Secular {
  Vector lambda;
  Vector v;
  double c = 0.0;

  // g(x(mu)) = c - sum_i v_i^2 mu (1 + lambda_i mu / 2) / (1 + mu lambda_i)^2
  double phi(double mu) const {
    double acc = c;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == 0.0) continue;
      const double den = 1.0 + mu * lambda[i];
      acc -= v[i] * v[i] * mu * (1.0 + 0.5 * lambda[i] * mu) / (den * den);
    }
    return acc;
  }

  Vector point(double mu) const {
    Vector x(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) x[i] = -mu * v[i] / (1.0 + mu * lambda[i]);
    return x;
  }

  // Value of g at mu -> infinity when no eigenvalue is negative.
  double phi_at_infinity() const {
    double acc = c;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == 0.0) continue;
      if (lambda[i] == 0.0) return -kInf;
      acc -= 0.5 * v[i] * v[i] / lambda[i];
    }
    return acc;
  }
};

// Bisection on a sign-change bracket, carried to adjacent doubles. Returns
// the endpoint where phi <= 0 (the feasible side).
double bisect(const Secular& s, double lo, double hi) {
  double flo = s.phi(lo);
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= std::min(lo, hi) || mid >= std::max(lo, hi)) break;
    const double fmid = s.phi(mid);
    if ((fmid > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return flo <= 0.0 ? lo : hi;
}

struct Candidate {
  Vector x;  // original coordinates
  double norm = kInf;
};

class BoundarySolver {
 public:
  BoundarySolver(const QuadraticBoundary& qb, double tol) : qb_(qb), tol_(tol) {
    const SymEig eig = sym_eig(qb.a_mat);
    basis_ = eig.eigenvectors;
    double scale = 1.0;
    for (double l : eig.eigenvalues) scale = std::max(scale, std::abs(l));
    lambda_scale_ = scale;
    secular_.lambda = eig.eigenvalues;
    for (double& l : secular_.lambda)
      if (std::abs(l) <= 1e-12 * scale) l = 0.0;
    secular_.v = basis_.transpose() * std::span<const double>(qb.b_vec);
    secular_.c = qb.c;
    v_orig_ = secular_.v;
    b_norm_ = norm(qb.b_vec);
  }

  MinNormResult solve() {
    MinNormResult out;
    bool global_found = false;
    std::vector<Candidate> found = scan(global_found);
    if (!global_found && perturb_hard_case()) {
      out.perturbed = true;
      found = scan(global_found);
      add_hard_case_limit(found);
    }
    if (found.empty()) {
      if (region_is_empty()) {
        out.status = MinNormStatus::EmptyRegion;
        out.value = kInf;
        return out;
      }
      fail(ErrorKind::NumericalFailure, "no stationary point satisfies the boundary tolerance");
    }
    const auto best = std::min_element(found.begin(), found.end(),
                                       [](const Candidate& l, const Candidate& r) { return l.norm < r.norm; });
    out.x_star = best->x;
    out.value = best->norm;
    return out;
  }

 private:
  double residual_limit() const { return tol_ * std::max(1.0, std::abs(qb_.c)); }

  void try_candidate(double mu, std::vector<Candidate>& out) const {
    const Vector local = secular_.point(mu);
    Vector x = basis_ * std::span<const double>(local);
    const double g = qb_.value(x);
    if (!std::isfinite(g) || std::abs(g) > residual_limit()) return;
    out.push_back({std::move(x), norm(local)});
  }

  std::vector<double> poles() const {
    std::vector<double> p;
    for (std::size_t i = 0; i < secular_.lambda.size(); ++i)
      if (secular_.lambda[i] < 0.0) p.push_back(-1.0 / secular_.lambda[i]);
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    return p;
  }

  std::vector<Candidate> scan(bool& global_found) const {
    std::vector<Candidate> out;
    const std::vector<double> p = poles();

    // First interval (0, p_1): phi decreases monotonically from c, so it holds
    // at most one root, and that root is the global minimiser.
    const double first_hi = p.empty() ? kInf : p.front();
    if (std::isfinite(first_hi)) {
      const double near_pole = std::nextafter(first_hi, 0.0);
      if (secular_.phi(near_pole) <= 0.0) try_candidate(bisect(secular_, 0.0, near_pole), out);
    } else {
      double hi = 1.0 / lambda_scale_;
      while (secular_.phi(hi) > 0.0 && hi < 1e300) hi *= 2.0;
      if (secular_.phi(hi) <= 0.0) try_candidate(bisect(secular_, 0.0, hi), out);
    }
    global_found = !out.empty();

    // Remaining intervals: phi -> -inf at every active pole; sample and
    // bisect each sign change.
    constexpr int kSamples = 256;
    for (std::size_t s = 0; s < p.size(); ++s) {
      const double lo = p[s];
      const double hi = s + 1 < p.size() ? p[s + 1] : kInf;
      std::vector<double> mus;
      mus.reserve(kSamples);
      for (int t = 1; t < kSamples; ++t) {
        const double u = static_cast<double>(t) / kSamples;
        double mu;
        if (std::isfinite(hi)) {
          mu = lo + (hi - lo) * 0.5 * (1.0 - std::cos(std::numbers::pi * u));
        } else {
          mu = lo + (lo + 1.0 / lambda_scale_) * u / (1.0 - u) * 16.0;
        }
        if (mu > lo && (!std::isfinite(hi) || mu < hi)) mus.push_back(mu);
      }
      for (std::size_t t = 0; t + 1 < mus.size(); ++t) {
        const double f0 = secular_.phi(mus[t]);
        const double f1 = secular_.phi(mus[t + 1]);
        if ((f0 > 0.0) != (f1 > 0.0)) try_candidate(bisect(secular_, mus[t], mus[t + 1]), out);
      }
    }
    return out;
  }

  // Hard case: every eigendirection of the most negative eigenvalue is
  // orthogonal to b, so phi stays positive up to the first pole. Nudge b
  // along those directions by 1e-10 * max(||b||, 1).
  bool perturb_hard_case() {
    if (secular_.lambda.empty() || secular_.lambda.front() >= 0.0) return false;
    const double lmin = secular_.lambda.front();
    const double eps = 1e-10 * std::max(b_norm_, 1.0);
    bool changed = false;
    for (std::size_t i = 0; i < secular_.lambda.size(); ++i) {
      if (secular_.lambda[i] != lmin || std::abs(secular_.v[i]) > eps) continue;
      secular_.v[i] = secular_.v[i] < 0.0 ? -eps : eps;
      changed = true;
    }
    return changed;
  }

  // The perturbed first-interval root sits within ~eps of the pole, where x
  // is too sensitive to mu to meet the residual tolerance. Use its eps -> 0
  // limit instead: mu at the pole, and the degenerate component sized so
  // that g = 0.
  void add_hard_case_limit(std::vector<Candidate>& out) const {
    const double lmin = secular_.lambda.front();
    const double mu = -1.0 / lmin;
    Vector local(secular_.v.size(), 0.0);
    std::size_t first_degenerate = local.size();
    for (std::size_t i = 0; i < local.size(); ++i) {
      if (secular_.lambda[i] == lmin) {
        if (first_degenerate == local.size()) first_degenerate = i;
        continue;
      }
      local[i] = -mu * v_orig_[i] / (1.0 + mu * secular_.lambda[i]);
    }
    double g = secular_.c;
    for (std::size_t i = 0; i < local.size(); ++i)
      g += v_orig_[i] * local[i] + 0.5 * secular_.lambda[i] * local[i] * local[i];
    if (!(g > 0.0)) return;
    const double t = std::sqrt(2.0 * g / -lmin);
    local[first_degenerate] = secular_.v[first_degenerate] < 0.0 ? -t : t;
    Vector x = basis_ * std::span<const double>(local);
    if (std::abs(qb_.value(x)) > residual_limit()) return;
    out.push_back({std::move(x), norm(local)});
  }

  bool region_is_empty() const {
    if (!secular_.lambda.empty() && secular_.lambda.front() < 0.0) return false;
    return secular_.phi_at_infinity() > 0.0;
  }

  const QuadraticBoundary& qb_;
  double tol_;
  Matrix basis_;
  Secular secular_;
  Vector v_orig_;
  double lambda_scale_ = 1.0;
  double b_norm_ = 0.0;
};

}  // namespace

MinNormResult min_norm_on_boundary(const QuadraticBoundary& qb, double tol) {
  const std::size_t d = qb.dim();
  if (d == 0 || qb.a_mat.rows() != d || qb.a_mat.cols() != d)
    fail(ErrorKind::InvalidArgument, "inconsistent boundary dimensions");
  if (max_asymmetry(qb.a_mat) > 1e-10 * std::max(1.0, frobenius_norm(qb.a_mat)))
    fail(ErrorKind::InvalidArgument, "boundary matrix is not symmetric");
  if (qb.c <= 0.0) {
    MinNormResult out;
    out.x_star = Vector(d, 0.0);
    out.value = 0.0;
    out.status = MinNormStatus::OriginInside;
    return out;
  }
  BoundarySolver solver(qb, tol);
  return solver.solve();
}

SnrReport snr_hetero(const GmmParams& params) {
  validate(params);
  const std::size_t k = params.k;
  SnrReport report;
  report.delta = min_center_gap(params);
  report.snr_pairs.assign(k, std::vector<double>(k, 0.0));
  report.witnesses.assign(k, std::vector<Vector>(k));
  report.snr_prime = kInf;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) continue;
      const MinNormResult r = min_norm_on_boundary(boundary(params, a, b));
      report.snr_pairs[a][b] = 2.0 * r.value;
      report.witnesses[a][b] = r.x_star;
      if (std::isfinite(r.value)) report.snr_prime = std::min(report.snr_prime, 2.0 * r.value);
    }
  return report;
}

SnrReport snr_report(const GmmParams& params) {
  if (!params.covariance.is_homogeneous()) return snr_hetero(params);

  validate(params);
  // With a shared covariance every region is the halfspace
  // {x : w.x <= -||w||^2 / 2}, w = Sigma^{-1/2}(theta_a - theta_b).
  const std::size_t k = params.k;
  const Matrix whiten = spd_inv_sqrt(params.covariance.of(0));
  SnrReport report;
  report.delta = min_center_gap(params);
  report.snr_pairs.assign(k, std::vector<double>(k, 0.0));
  report.witnesses.assign(k, std::vector<Vector>(k));
  report.snr_prime = kInf;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) continue;
      Vector w = whiten * subtract(params.centers.row(a), params.centers.row(b));
      report.snr_pairs[a][b] = norm(w);
      for (double& x : w) x *= -0.5;
      report.witnesses[a][b] = std::move(w);
      report.snr_prime = std::min(report.snr_prime, report.snr_pairs[a][b]);
    }
  report.snr = snr_homogeneous(params);
  return report;
}

namespace {

struct GridHit {
  Vector x;
  double norm = kInf;
};

// Scans the axis-aligned box centred at `center` with half-width `half`,
// `res` points per axis. Calls visit(x, norm) for every feasible point.
template <typename Visit>
void scan_box(const QuadraticBoundary& qb, std::span<const double> center, double half,
              std::size_t res, Visit&& visit) {
  const std::size_t d = qb.dim();
  const std::size_t outer_dims = d - 1;
  const double step = 2.0 * half / static_cast<double>(res - 1);
  const std::size_t last = d - 1;
  const double a_zz = qb.a_mat(last, last);

  std::vector<std::size_t> idx(outer_dims, 0);
  Vector x(d);
  std::vector<double> zs(res);
  for (std::size_t t = 0; t < res; ++t) zs[t] = center[last] - half + step * static_cast<double>(t);

  while (true) {
    for (std::size_t i = 0; i < outer_dims; ++i)
      x[i] = center[i] - half + step * static_cast<double>(idx[i]);
    // g = base + z * slope + 0.5 * a_zz * z^2 along the last axis.
    double base = qb.c;
    double slope = qb.b_vec[last];
    double outer_norm2 = 0.0;
    for (std::size_t i = 0; i < outer_dims; ++i) {
      base += qb.b_vec[i] * x[i];
      outer_norm2 += x[i] * x[i];
      slope += qb.a_mat(last, i) * x[i];
      for (std::size_t j = 0; j < outer_dims; ++j) base += 0.5 * x[i] * qb.a_mat(i, j) * x[j];
    }
    for (std::size_t t = 0; t < res; ++t) {
      const double z = zs[t];
      if (base + z * (slope + 0.5 * a_zz * z) <= 0.0) {
        x[last] = z;
        visit(x, std::sqrt(outer_norm2 + z * z));
      }
    }
    std::size_t i = 0;
    for (; i < outer_dims; ++i) {
      if (++idx[i] < res) break;
      idx[i] = 0;
    }
    if (i == outer_dims) break;
  }
}

}  // namespace

double grid_oracle(const QuadraticBoundary& qb, double radius, std::size_t resolution) {
  const std::size_t d = qb.dim();
  if (d == 0 || d > 3) fail(ErrorKind::InvalidArgument, "grid_oracle supports 1 <= d <= 3");
  if (resolution < 2 || !(radius > 0.0)) fail(ErrorKind::InvalidArgument, "grid_oracle needs resolution >= 2 and radius > 0");

  const Vector origin(d, 0.0);
  const double step = 2.0 * radius / static_cast<double>(resolution - 1);
  const double slack = std::sqrt(static_cast<double>(d)) * step;

  // Coarse pass: keep the best point and everything within `slack` of it.
  double best = kInf;
  scan_box(qb, origin, radius, resolution, [&](const Vector&, double r) { best = std::min(best, r); });
  if (!std::isfinite(best)) return kInf;

  std::vector<GridHit> near;
  scan_box(qb, origin, radius, resolution, [&](const Vector& x, double r) {
    if (r <= best + slack) near.push_back({x, r});
  });
  std::sort(near.begin(), near.end(), [](const GridHit& l, const GridHit& r) { return l.norm < r.norm; });

  // A near-optimal grid point can sit anywhere on the cap of the feasible set
  // within `slack` of the optimum; its radius is about sqrt(2 * best * slack).
  const double half = std::sqrt(2.0 * best * slack) + 2.0 * step;
  std::vector<Vector> seeds;
  constexpr std::size_t kMaxSeeds = 8;
  for (const GridHit& h : near) {
    const bool covered = std::any_of(seeds.begin(), seeds.end(), [&](const Vector& s) {
      return norm(subtract(s, h.x)) <= half;
    });
    if (!covered) seeds.push_back(h.x);
    if (seeds.size() == kMaxSeeds) break;
  }

  double refined = best;
  for (const Vector& s : seeds)
    scan_box(qb, s, half, resolution, [&](const Vector&, double r) { refined = std::min(refined, r); });
  return refined;
}

SnrPrimeBounds snr_prime_bounds(double gap, double lambda_min, double lambda_max, std::size_t d) {
  const double lo = lambda_min;
  const double hi = lambda_max;
  const double dd = static_cast<double>(d);
  SnrPrimeBounds b;
  b.lower = (-std::sqrt(hi) + std::sqrt(hi + lo * (lo + hi) / (2.0 * hi))) / (lo + hi) * gap;
  b.upper = gap / std::sqrt(lo) + std::sqrt(1.5 * dd) + std::sqrt(dd * std::log(hi / lo));
  return b;
}

}  // namespace agmm
