#pragma once

// Replicated clustering experiments on the two synthetic mixtures (or a
// fixed parameter file) with per-iteration mean error curves.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agmm/cluster.hpp"
#include "agmm/model.hpp"

namespace agmm {

enum class ModelKind { Sim1, Sim2, Custom };

enum class Method {
  Spectral,
  Vanilla,
  SpectralAlg1,
  VanillaAlg1,
  SpectralAlg2,
  VanillaAlg2,
};

std::string_view to_string(ModelKind kind) noexcept;
std::string_view to_string(Method method) noexcept;
// Accepts the names produced by to_string; throws InvalidArgument otherwise.
ModelKind parse_model_kind(std::string_view name);
Method parse_method(std::string_view name);

struct ExperimentConfig {
  ModelKind model_kind = ModelKind::Sim1;
  std::string params_file;                // read when model_kind is Custom and params is unset
  std::optional<GmmParams> params;        // fixed parameters for Custom
  std::size_t n = 1200;
  std::size_t replications = 1;
  std::vector<Method> methods;
  std::size_t max_iters = 10;
  std::uint64_t base_seed = 0;
  double ridge = kDefaultRidge;
  std::size_t workers = 1;
  std::optional<double> time_budget_seconds;
  // Multiplies every covariance after the parameters are drawn.
  double covariance_scale = 1.0;
  LloydOptions lloyd;  // vanilla Lloyd settings, also used inside spectral
};

// Throws InvalidArgument for an unusable config and InvalidParams when a
// method does not fit the covariance structure of the model.
void validate(const ExperimentConfig& config);

struct MethodCurve {
  Method method = Method::Vanilla;
  std::vector<double> mean_h;         // max_iters + 1 entries
  std::vector<double> mean_ln_h;      // over replications with h > 0, NaN if none
  std::vector<std::size_t> n_zero_reps;
};

struct ReplicationRecord {
  std::size_t index = 0;
  std::uint64_t params_seed = 0;
  std::uint64_t data_seed = 0;
  std::uint64_t vanilla_seed = 0;
  std::uint64_t spectral_seed = 0;
  double snr = 0.0;  // SNR for shared covariance, SNR' otherwise
  double exponent = 0.0;  // -snr^2 / 8
  std::vector<std::vector<double>> h;  // per configured method, max_iters + 1 entries
  std::size_t regularization_events = 0;
  std::size_t empty_cluster_events = 0;
};

struct CurveTable {
  ExperimentConfig config;
  std::vector<MethodCurve> curves;            // in config.methods order
  std::vector<ReplicationRecord> replications;  // ascending index, completed ones only
  double wall_seconds = 0.0;
  bool truncated = false;
};

// Runs one replication end to end. Exposed for tests of replication
// independence; run_experiment calls it for every index.
ReplicationRecord run_replication(const ExperimentConfig& config, std::size_t index);

CurveTable run_experiment(const ExperimentConfig& config);

// Aggregates completed replications into mean curves.
std::vector<MethodCurve> aggregate(const std::vector<Method>& methods,
                                   const std::vector<ReplicationRecord>& records,
                                   std::size_t max_iters);

// CSV text `method,iteration,mean_h,mean_ln_h,n_zero_reps`, shortest
// round-trip decimal formatting. A truncated run ends with a `# truncated`
// comment line.
std::string curves_csv(const CurveTable& table);
void write_curves(const CurveTable& table, const std::string& path);

}  // namespace agmm
