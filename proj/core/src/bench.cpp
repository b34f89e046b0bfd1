#include "agmm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "agmm/error.hpp"
#include "agmm/io.hpp"
#include "agmm/loss.hpp"
#include "agmm/rng.hpp"
#include "agmm/snr.hpp"

namespace agmm {

namespace {

struct MethodName {
  Method method;
  std::string_view name;
};

constexpr MethodName kMethodNames[] = {
    {Method::Spectral, "spectral"},
    {Method::Vanilla, "vanilla"},
    {Method::SpectralAlg1, "spectral+alg1"},
    {Method::VanillaAlg1, "vanilla+alg1"},
    {Method::SpectralAlg2, "spectral+alg2"},
    {Method::VanillaAlg2, "vanilla+alg2"},
};

bool uses_spectral(Method m) {
  return m == Method::Spectral || m == Method::SpectralAlg1 || m == Method::SpectralAlg2;
}
bool uses_alg1(Method m) { return m == Method::SpectralAlg1 || m == Method::VanillaAlg1; }
bool uses_alg2(Method m) { return m == Method::SpectralAlg2 || m == Method::VanillaAlg2; }

GmmParams fixed_params(const ExperimentConfig& config) {
  if (config.params) return *config.params;
  return read_params(config.params_file);
}

GmmParams draw_params(const ExperimentConfig& config, const GmmParams* fixed, std::uint64_t seed) {
  GmmParams p;
  switch (config.model_kind) {
    case ModelKind::Sim1: p = make_sim1(seed); break;
    case ModelKind::Sim2: p = make_sim2(seed); break;
    case ModelKind::Custom: p = *fixed; break;
  }
  if (config.covariance_scale != 1.0) {
    std::vector<Matrix> scaled;
    for (const Matrix& s : p.covariance.matrices()) scaled.push_back(config.covariance_scale * s);
    p.covariance = p.covariance.is_homogeneous() ? CovarianceSpec::homogeneous(std::move(scaled.front()))
                                                 : CovarianceSpec::heterogeneous(std::move(scaled));
  }
  return p;
}

// Scores the trace against truth, padding with the final value so every
// curve has max_iters + 1 entries.
std::vector<double> padded_curve(std::vector<double> h, std::size_t max_iters) {
  const double last = h.back();
  h.resize(max_iters + 1, last);
  return h;
}

ReplicationRecord replicate(const ExperimentConfig& config, const GmmParams* fixed, std::size_t r) {
  ReplicationRecord rec;
  rec.index = r;
  rec.params_seed = derive_seed(config.base_seed, r, StreamTag::Params);
  rec.data_seed = derive_seed(config.base_seed, r, StreamTag::Data);
  rec.vanilla_seed = derive_seed(config.base_seed, r, StreamTag::InitVanilla);
  rec.spectral_seed = derive_seed(config.base_seed, r, StreamTag::InitSpectral);

  const GmmParams params = draw_params(config, fixed, rec.params_seed);
  const LabelVector truth = balanced_assignment(config.n, params.k);
  const Dataset data = sample(params, truth, rec.data_seed);

  const SnrReport report = snr_report(params);
  rec.snr = report.snr ? *report.snr : report.snr_prime;
  rec.exponent = -rec.snr * rec.snr / 8.0;

  std::optional<LabelVector> z_vanilla, z_spectral;
  const bool need_vanilla = std::any_of(config.methods.begin(), config.methods.end(),
                                        [](Method m) { return !uses_spectral(m); });
  const bool need_spectral = std::any_of(config.methods.begin(), config.methods.end(), uses_spectral);
  if (need_vanilla) z_vanilla = vanilla_lloyd(data, params.k, rec.vanilla_seed, config.lloyd).labels;
  if (need_spectral) z_spectral = spectral_init(data, params.k, rec.spectral_seed, config.lloyd);

  for (Method m : config.methods) {
    const LabelVector& z0 = uses_spectral(m) ? *z_spectral : *z_vanilla;
    if (uses_alg1(m) || uses_alg2(m)) {
      const FitTrace trace = uses_alg1(m)
                                 ? adjusted_lloyd_homog(data, params.k, z0, config.max_iters, config.ridge)
                                 : adjusted_lloyd_hetero(data, params.k, z0, config.max_iters, config.ridge);
      rec.regularization_events += trace.regularization_events;
      rec.empty_cluster_events += trace.empty_cluster_events;
      rec.h.push_back(padded_curve(*trace.h_curve, config.max_iters));
    } else {
      rec.h.push_back(padded_curve({misclustering_rate(z0, truth, params.k).rate}, config.max_iters));
    }
  }
  return rec;
}

}  // namespace

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Sim1: return "sim1";
    case ModelKind::Sim2: return "sim2";
    case ModelKind::Custom: return "custom";
  }
  return "unknown";
}

std::string_view to_string(Method method) noexcept {
  for (const auto& entry : kMethodNames)
    if (entry.method == method) return entry.name;
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "sim1") return ModelKind::Sim1;
  if (name == "sim2") return ModelKind::Sim2;
  if (name == "custom") return ModelKind::Custom;
  fail(ErrorKind::InvalidArgument, "unknown model_kind '" + std::string(name) + "'");
}

Method parse_method(std::string_view name) {
  for (const auto& entry : kMethodNames)
    if (entry.name == name) return entry.method;
  fail(ErrorKind::InvalidArgument, "unknown method '" + std::string(name) + "'");
}

void validate(const ExperimentConfig& config) {
  if (config.replications < 1) fail(ErrorKind::InvalidArgument, "replications must be at least 1");
  if (config.methods.empty()) fail(ErrorKind::InvalidArgument, "methods must not be empty");
  if (config.max_iters < 1) fail(ErrorKind::InvalidArgument, "max_iters must be at least 1");
  if (config.workers < 1) fail(ErrorKind::InvalidArgument, "workers must be at least 1");
  if (!(config.ridge > 0.0)) fail(ErrorKind::InvalidArgument, "ridge must be positive");
  if (!(config.covariance_scale > 0.0) || !std::isfinite(config.covariance_scale))
    fail(ErrorKind::InvalidArgument, "covariance_scale must be positive and finite");
  if (config.time_budget_seconds && !(*config.time_budget_seconds > 0.0))
    fail(ErrorKind::InvalidArgument, "time_budget_seconds must be positive");
  if (config.lloyd.restarts < 1 || config.lloyd.max_iters < 1)
    fail(ErrorKind::InvalidArgument, "lloyd restarts and iterations must be at least 1");

  bool homogeneous = true;
  std::size_t k = 0;
  switch (config.model_kind) {
    case ModelKind::Sim1: k = 30; break;
    case ModelKind::Sim2: homogeneous = false; k = 3; break;
    case ModelKind::Custom: {
      if (!config.params && config.params_file.empty())
        fail(ErrorKind::InvalidArgument, "custom model needs params_file");
      const GmmParams p = fixed_params(config);
      validate(p);
      homogeneous = p.covariance.is_homogeneous();
      k = p.k;
      break;
    }
  }
  if (config.n < k) fail(ErrorKind::InvalidArgument, "n must be at least the number of clusters");
  for (Method m : config.methods) {
    if (uses_alg1(m) && !homogeneous)
      fail(ErrorKind::InvalidParams, std::string(to_string(m)) + " needs a shared covariance model");
    if (uses_alg2(m) && homogeneous)
      fail(ErrorKind::InvalidParams, std::string(to_string(m)) + " needs a per-cluster covariance model");
  }
}

ReplicationRecord run_replication(const ExperimentConfig& config, std::size_t index) {
  std::optional<GmmParams> fixed;
  if (config.model_kind == ModelKind::Custom) fixed = fixed_params(config);
  return replicate(config, fixed ? &*fixed : nullptr, index);
}

std::vector<MethodCurve> aggregate(const std::vector<Method>& methods,
                                   const std::vector<ReplicationRecord>& records,
                                   std::size_t max_iters) {
  std::vector<MethodCurve> curves;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    MethodCurve c;
    c.method = methods[m];
    c.mean_h.assign(max_iters + 1, 0.0);
    c.mean_ln_h.assign(max_iters + 1, 0.0);
    c.n_zero_reps.assign(max_iters + 1, 0);
    for (std::size_t t = 0; t <= max_iters; ++t) {
      double sum = 0.0, sum_ln = 0.0;
      std::size_t positive = 0;
      for (const auto& rec : records) {
        const double h = rec.h[m][t];
        sum += h;
        if (h > 0.0) {
          sum_ln += std::log(h);
          ++positive;
        } else {
          ++c.n_zero_reps[t];
        }
      }
      c.mean_h[t] = records.empty() ? std::numeric_limits<double>::quiet_NaN()
                                    : sum / static_cast<double>(records.size());
      c.mean_ln_h[t] = positive == 0 ? std::numeric_limits<double>::quiet_NaN()
                                     : sum_ln / static_cast<double>(positive);
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

CurveTable run_experiment(const ExperimentConfig& config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  std::optional<GmmParams> fixed;
  if (config.model_kind == ModelKind::Custom) fixed = fixed_params(config);
  const GmmParams* fixed_ptr = fixed ? &*fixed : nullptr;

  const std::size_t reps = config.replications;
  std::vector<std::optional<ReplicationRecord>> slots(reps);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::atomic<bool> out_of_time{false};
  std::mutex error_mutex;
  std::optional<std::size_t> failed_index;
  std::exception_ptr failure;

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t r = next.fetch_add(1);
      if (r >= reps) return;
      if (config.time_budget_seconds && elapsed() > *config.time_budget_seconds) {
        out_of_time = true;
        return;
      }
      try {
        slots[r] = replicate(config, fixed_ptr, r);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        // Report the lowest failing index so the message is deterministic.
        if (!failed_index || r < *failed_index) {
          failed_index = r;
          failure = std::current_exception();
        }
        stop = true;
      }
    }
  };

  const std::size_t workers = std::min(config.workers, reps);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (failure) {
    const std::string prefix = "replication " + std::to_string(*failed_index) + ": ";
    try {
      std::rethrow_exception(failure);
    } catch (const Error& e) {
      throw Error(e.kind(), prefix + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorKind::NumericalFailure, prefix + e.what());
    }
  }

  CurveTable table;
  table.config = config;
  for (auto& slot : slots)
    if (slot) table.replications.push_back(std::move(*slot));
  table.truncated = out_of_time.load() || table.replications.size() < reps;
  table.curves = aggregate(config.methods, table.replications, config.max_iters);
  table.wall_seconds = elapsed();
  return table;
}

std::string curves_csv(const CurveTable& table) {
  std::string out = "method,iteration,mean_h,mean_ln_h,n_zero_reps\n";
  for (const auto& c : table.curves) {
    for (std::size_t t = 0; t < c.mean_h.size(); ++t) {
      out += to_string(c.method);
      out += ',';
      out += std::to_string(t);
      out += ',';
      out += format_double(c.mean_h[t]);
      out += ',';
      out += format_double(c.mean_ln_h[t]);
      out += ',';
      out += std::to_string(c.n_zero_reps[t]);
      out += '\n';
    }
  }
  if (table.truncated) {
    out += "# truncated: " + std::to_string(table.replications.size()) + " of " +
           std::to_string(table.config.replications) + " replications completed\n";
  }
  return out;
}

void write_curves(const CurveTable& table, const std::string& path) { write_text(path, curves_csv(table)); }

}  // namespace agmm
