#include "agmm/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "agmm/error.hpp"
#include "agmm/loss.hpp"
#include "agmm/rng.hpp"

namespace agmm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Pivots below this fraction of the largest diagonal entry count as singular.
constexpr double kPivotFloor = 1e-14;

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

std::vector<std::size_t> cluster_sizes(const LabelVector& z, std::size_t k) {
  std::vector<std::size_t> sizes(k, 0);
  for (int v : z.values) ++sizes[static_cast<std::size_t>(v)];
  return sizes;
}

// Gives every empty cluster the point farthest from its own center
// (dist[j] in the caller's metric), taking only from clusters with more
// than one member. Returns the number of moves.
std::size_t repair_empty(LabelVector& z, std::vector<double>& dist, std::size_t k) {
  std::vector<std::size_t> sizes = cluster_sizes(z, k);
  std::size_t moves = 0;
  for (std::size_t e = 0; e < k; ++e) {
    if (sizes[e] != 0) continue;
    std::size_t pick = z.size();
    double worst = -kInf;
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (sizes[static_cast<std::size_t>(z[j])] < 2) continue;
      if (dist[j] > worst) {
        worst = dist[j];
        pick = j;
      }
    }
    if (pick == z.size()) fail(ErrorKind::TooFewPoints, "cannot refill an empty cluster");
    --sizes[static_cast<std::size_t>(z[pick])];
    z[pick] = static_cast<int>(e);
    ++sizes[e];
    dist[pick] = 0.0;
    ++moves;
  }
  return moves;
}

void check_inputs(const Dataset& data, std::size_t k) {
  if (k == 0) fail(ErrorKind::InvalidArgument, "k must be positive");
  if (data.n() < k) {
    fail(ErrorKind::TooFewPoints,
         "need at least k = " + std::to_string(k) + " points, got " + std::to_string(data.n()));
  }
}

// Euclidean assignment to the nearest center; ties go to the smaller index.
LabelVector nearest_center(const Matrix& y, const Matrix& centers, std::vector<double>& dist) {
  LabelVector z(std::vector<int>(y.rows(), 0));
  dist.assign(y.rows(), 0.0);
  for (std::size_t j = 0; j < y.rows(); ++j) {
    double best = kInf;
    int arg = 0;
    for (std::size_t a = 0; a < centers.rows(); ++a) {
      const double s = squared_distance(y.row(j), centers.row(a));
      if (s < best) {
        best = s;
        arg = static_cast<int>(a);
      }
    }
    z[j] = arg;
    dist[j] = best;
  }
  return z;
}

struct LloydRun {
  LabelVector labels;
  Matrix centers;
  std::size_t iterations = 0;
};

LloydRun lloyd_from(const Matrix& y, Matrix centers, std::size_t max_iters) {
  const std::size_t k = centers.rows();
  std::vector<double> dist;
  LloydRun run;
  run.labels = nearest_center(y, centers, dist);
  repair_empty(run.labels, dist, k);
  for (std::size_t it = 1; it <= max_iters; ++it) {
    centers = cluster_means(y, run.labels, k);
    LabelVector next = nearest_center(y, centers, dist);
    repair_empty(next, dist, k);
    run.iterations = it;
    const bool same = next == run.labels;
    run.labels = std::move(next);
    if (same) break;
  }
  run.centers = cluster_means(y, run.labels, k);
  return run;
}

struct ClusterMetric {
  Matrix chol;
  double logdet = 0.0;
  Matrix sigma;  // the matrix actually factored
};

ClusterMetric factor_covariance(const Matrix& scatter, bool force_ridge, double ridge,
                                std::size_t& events) {
  const std::size_t d = scatter.rows();
  if (!force_ridge) {
    try {
      ClusterMetric m{chol_lower_strict(scatter, kPivotFloor), 0.0, scatter};
      for (std::size_t i = 0; i < d; ++i) m.logdet += 2.0 * std::log(m.chol(i, i));
      return m;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
    }
  }
  double scale = trace(scatter) / static_cast<double>(d);
  if (!(scale > 0.0)) scale = 1.0;
  Matrix reg = scatter;
  for (std::size_t i = 0; i < d; ++i) reg(i, i) += ridge * scale;
  ++events;
  try {
    ClusterMetric m{chol_lower_strict(reg, kPivotFloor), 0.0, reg};
    for (std::size_t i = 0; i < d; ++i) m.logdet += 2.0 * std::log(m.chol(i, i));
    return m;
  } catch (const Error& e) {
    fail(ErrorKind::DegenerateCovariance, std::string("covariance stays singular after ridge: ") + e.what());
  }
}

Matrix scatter_matrix(const Matrix& y, const LabelVector& z, const Matrix& centers,
                      std::optional<std::size_t> only_cluster) {
  const std::size_t d = y.cols();
  Matrix s(d, d);
  Vector r(d);
  for (std::size_t j = 0; j < y.rows(); ++j) {
    const auto a = static_cast<std::size_t>(z[j]);
    if (only_cluster && *only_cluster != a) continue;
    auto yj = y.row(j);
    auto ca = centers.row(a);
    for (std::size_t i = 0; i < d; ++i) r[i] = yj[i] - ca[i];
    for (std::size_t p = 0; p < d; ++p) {
      if (r[p] == 0.0) continue;
      for (std::size_t q = p; q < d; ++q) s(p, q) += r[p] * r[q];
    }
  }
  for (std::size_t p = 0; p < d; ++p)
    for (std::size_t q = 0; q < p; ++q) s(p, q) = s(q, p);
  return s;
}

FitTrace run_adjusted(const Dataset& data, std::size_t k, const LabelVector& z0,
                      std::size_t max_iters, double ridge, bool shared) {
  check_inputs(data, k);
  if (z0.size() != data.n())
    fail(ErrorKind::LengthMismatch, "initial labels have length " + std::to_string(z0.size()) +
                                        ", data has " + std::to_string(data.n()) + " rows");
  check_labels(z0, k);
  if (max_iters < 1) fail(ErrorKind::InvalidArgument, "max_iters must be at least 1");
  if (!(ridge > 0.0)) fail(ErrorKind::InvalidArgument, "ridge must be positive");

  const Matrix& y = data.y;
  const std::size_t n = data.n();
  const std::size_t d = data.d();

  FitTrace trace;
  trace.initial_labels = z0;
  LabelVector z = z0;
  const std::vector<std::size_t> initial_sizes = cluster_sizes(z, k);
  if (std::find(initial_sizes.begin(), initial_sizes.end(), 0u) != initial_sizes.end()) {
    // Only reachable for initial labels with an empty cluster.
    const Matrix means = cluster_means(y, z, k);
    std::vector<double> dist(n);
    for (std::size_t j = 0; j < n; ++j)
      dist[j] = squared_distance(y.row(j), means.row(static_cast<std::size_t>(z[j])));
    trace.empty_cluster_events += repair_empty(z, dist, k);
  }

  if (data.truth) {
    trace.h_curve.emplace();
    trace.h_curve->push_back(misclustering_rate(trace.initial_labels, *data.truth, k).rate);
  }

  std::vector<ClusterMetric> metrics;
  std::vector<double> dist(n);
  Vector whitened_y(d), diff(d);
  for (std::size_t t = 1; t <= max_iters; ++t) {
    const Matrix centers = cluster_means(y, z, k);
    const std::vector<std::size_t> sizes = cluster_sizes(z, k);

    metrics.clear();
    if (shared) {
      Matrix s = scatter_matrix(y, z, centers, std::nullopt);
      s = (1.0 / static_cast<double>(n)) * s;
      metrics.push_back(factor_covariance(s, false, ridge, trace.regularization_events));
    } else {
      for (std::size_t a = 0; a < k; ++a) {
        Matrix s = scatter_matrix(y, z, centers, a);
        s = (1.0 / static_cast<double>(sizes[a])) * s;
        metrics.push_back(factor_covariance(s, sizes[a] < d + 1, ridge, trace.regularization_events));
      }
    }

    LabelVector next(std::vector<int>(n, 0));
    if (shared) {
      const Matrix& l = metrics.front().chol;
      std::vector<Vector> wc(k);
      for (std::size_t a = 0; a < k; ++a) wc[a] = solve_lower(l, centers.row(a));
      for (std::size_t j = 0; j < n; ++j) {
        whitened_y = solve_lower(l, y.row(j));
        double best = kInf;
        int arg = 0;
        for (std::size_t a = 0; a < k; ++a) {
          const double s = squared_distance(whitened_y, wc[a]);
          if (s < best) {
            best = s;
            arg = static_cast<int>(a);
          }
        }
        next[j] = arg;
        dist[j] = best;
      }
    } else {
      for (std::size_t j = 0; j < n; ++j) {
        double best = kInf;
        double best_mahal = 0.0;
        int arg = 0;
        for (std::size_t a = 0; a < k; ++a) {
          auto yj = y.row(j);
          auto ca = centers.row(a);
          for (std::size_t i = 0; i < d; ++i) diff[i] = yj[i] - ca[i];
          const Vector w = solve_lower(metrics[a].chol, diff);
          const double mahal = dot(w, w);
          const double score = mahal + metrics[a].logdet;
          if (score < best) {
            best = score;
            best_mahal = mahal;
            arg = static_cast<int>(a);
          }
        }
        next[j] = arg;
        dist[j] = best_mahal;
      }
    }
    trace.empty_cluster_events += repair_empty(next, dist, k);

    FitState state;
    state.centers = centers;
    if (shared) {
      state.covariance = CovarianceSpec::homogeneous(metrics.front().sigma);
    } else {
      std::vector<Matrix> sigmas;
      sigmas.reserve(k);
      for (const auto& m : metrics) sigmas.push_back(m.sigma);
      state.covariance = CovarianceSpec::heterogeneous(std::move(sigmas));
    }
    state.labels = next;
    state.iteration = t;
    trace.objective.push_back(classification_objective(data, state));
    trace.states.push_back(std::move(state));
    if (trace.h_curve) trace.h_curve->push_back(misclustering_rate(next, *data.truth, k).rate);

    const bool same = next == z;
    z = std::move(next);
    if (same) {
      trace.converged_at = t;
      break;
    }
  }
  return trace;
}

}  // namespace

std::size_t default_iterations(std::size_t n) {
  if (n < 2) return 1;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::log(static_cast<double>(n)))));
}

Matrix cluster_means(const Matrix& y, const LabelVector& labels, std::size_t k) {
  Matrix means(k, y.cols());
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t j = 0; j < y.rows(); ++j) {
    const auto a = static_cast<std::size_t>(labels[j]);
    ++counts[a];
    auto m = means.row(a);
    auto yj = y.row(j);
    for (std::size_t i = 0; i < y.cols(); ++i) m[i] += yj[i];
  }
  for (std::size_t a = 0; a < k; ++a) {
    if (counts[a] == 0) continue;
    for (double& v : means.row(a)) v /= static_cast<double>(counts[a]);
  }
  return means;
}

LabelVector assign_nearest(const Matrix& y, const Matrix& centers) {
  if (y.cols() != centers.cols()) fail(ErrorKind::LengthMismatch, "centers and data differ in dimension");
  std::vector<double> dist;
  return nearest_center(y, centers, dist);
}

double within_cluster_sse(const Matrix& y, const LabelVector& labels, const Matrix& centers) {
  double sse = 0.0;
  for (std::size_t j = 0; j < y.rows(); ++j)
    sse += squared_distance(y.row(j), centers.row(static_cast<std::size_t>(labels[j])));
  return sse;
}

Matrix kmeanspp_seed(const Dataset& data, std::size_t k, std::uint64_t seed) {
  check_inputs(data, k);
  const Matrix& y = data.y;
  const std::size_t n = data.n();
  Philox4x32 rng(seed);

  std::vector<std::size_t> chosen;
  std::vector<char> taken(n, 0);
  std::vector<double> mind(n, kInf);
  auto take = [&](std::size_t j) {
    chosen.push_back(j);
    taken[j] = 1;
    for (std::size_t i = 0; i < n; ++i)
      mind[i] = std::min(mind[i], squared_distance(y.row(i), y.row(j)));
  };

  take(static_cast<std::size_t>(rng.uniform_index(n)));
  while (chosen.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (!taken[i]) total += mind[i];
    std::size_t pick = n;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i] || mind[i] == 0.0) continue;
        acc += mind[i];
        pick = i;
        if (acc > u) break;
      }
    } else {
      // Fewer distinct rows than k: fall back to a uniform unchosen row.
      std::uint64_t r = rng.uniform_index(n - chosen.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        if (r-- == 0) {
          pick = i;
          break;
        }
      }
    }
    take(pick);
  }

  Matrix centers(k, data.d());
  for (std::size_t a = 0; a < k; ++a) std::copy(y.row(chosen[a]).begin(), y.row(chosen[a]).end(), centers.row(a).begin());
  return centers;
}

LloydResult vanilla_lloyd(const Dataset& data, std::size_t k, std::uint64_t seed,
                          const LloydOptions& options) {
  check_inputs(data, k);
  if (options.restarts == 0) fail(ErrorKind::InvalidArgument, "restarts must be positive");
  LloydResult best;
  best.sse = kInf;
  for (std::size_t r = 0; r < options.restarts; ++r) {
    const Matrix seeds = kmeanspp_seed(data, k, derive_seed(seed, r, StreamTag::Restart));
    LloydRun run = lloyd_from(data.y, seeds, options.max_iters);
    const double sse = within_cluster_sse(data.y, run.labels, run.centers);
    if (sse < best.sse) {
      best.labels = std::move(run.labels);
      best.centers = std::move(run.centers);
      best.iterations = run.iterations;
      best.sse = sse;
      best.restart = r;
    }
  }
  return best;
}

LabelVector spectral_init(const Dataset& data, std::size_t k, std::uint64_t seed,
                          const LloydOptions& options) {
  check_inputs(data, k);
  const std::size_t r = std::min({k, data.d(), data.n()});
  const SvdTopK svd = svd_topk(data.y, r);
  Dataset projected;
  projected.y = data.y * svd.right_vectors;
  return vanilla_lloyd(projected, k, seed, options).labels;
}

FitTrace adjusted_lloyd_homog(const Dataset& data, std::size_t k, const LabelVector& z0,
                              std::size_t max_iters, double ridge) {
  return run_adjusted(data, k, z0, max_iters, ridge, true);
}

FitTrace adjusted_lloyd_hetero(const Dataset& data, std::size_t k, const LabelVector& z0,
                               std::size_t max_iters, double ridge) {
  return run_adjusted(data, k, z0, max_iters, ridge, false);
}

double classification_objective(const Dataset& data, const FitState& state) {
  const std::size_t k = state.centers.rows();
  check_labels(state.labels, k);
  if (state.labels.size() != data.n()) fail(ErrorKind::LengthMismatch, "state labels do not match data");
  const bool shared = state.covariance.is_homogeneous();
  std::vector<Matrix> chol;
  std::vector<double> logdet;
  const std::size_t distinct = shared ? 1 : k;
  for (std::size_t a = 0; a < distinct; ++a) {
    chol.push_back(chol_lower(state.covariance.of(a)));
    double ld = 0.0;
    for (std::size_t i = 0; i < data.d(); ++i) ld += 2.0 * std::log(chol.back()(i, i));
    logdet.push_back(ld);
  }
  double total = 0.0;
  for (std::size_t j = 0; j < data.n(); ++j) {
    const auto a = static_cast<std::size_t>(state.labels[j]);
    const std::size_t m = shared ? 0 : a;
    const Vector w = solve_lower(chol[m], subtract(data.y.row(j), state.centers.row(a)));
    total += dot(w, w) + logdet[m];
  }
  return total;
}

}  // namespace agmm
