// gmm-bench: generate mixtures, cluster them, compute separation measures,
// estimate optimal pairwise test errors and run replicated experiments.
//
// Exit codes: 0 success, 2 invalid arguments/config/params, 3 numerical
// failure, 4 I/O error.

#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "agmm/bayes.hpp"
#include "agmm/bench.hpp"
#include "agmm/cluster.hpp"
#include "agmm/error.hpp"
#include "agmm/io.hpp"
#include "agmm/loss.hpp"
#include "agmm/rng.hpp"
#include "agmm/snr.hpp"
#include "json.hpp"

using nlohmann::json;

namespace {

int exit_code(agmm::ErrorKind kind) {
  using agmm::ErrorKind;
  switch (kind) {
    case ErrorKind::Io: return 4;
    case ErrorKind::NotPositiveDefinite:
    case ErrorKind::NoConvergence:
    case ErrorKind::NumericalFailure:
    case ErrorKind::DegenerateCovariance: return 3;
    default: return 2;
  }
}

// JSON has no infinity; empty regions are written as null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void emit(const json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    agmm::write_text(path, text);
  }
}

json trace_json(const agmm::FitTrace& trace) {
  json j;
  j["iterations"] = trace.states.size();
  j["objective"] = trace.objective;
  if (trace.h_curve) j["h_curve"] = *trace.h_curve;
  j["converged_at"] = trace.converged_at ? json(*trace.converged_at) : json(nullptr);
  j["regularization_events"] = trace.regularization_events;
  j["empty_cluster_events"] = trace.empty_cluster_events;
  return j;
}

struct GenerateArgs {
  std::string model = "sim1";
  std::string params_file;
  std::size_t n = 1200;
  std::uint64_t seed = 0;
  std::string out;
  std::string truth_out;
  std::string params_out;
};

void run_generate(const GenerateArgs& a) {
  agmm::GmmParams params;
  const std::uint64_t params_seed = agmm::derive_seed(a.seed, 0, agmm::StreamTag::Params);
  if (!a.params_file.empty()) {
    params = agmm::read_params(a.params_file);
  } else if (a.model == "sim1") {
    params = agmm::make_sim1(params_seed);
  } else if (a.model == "sim2") {
    params = agmm::make_sim2(params_seed);
  } else {
    agmm::fail(agmm::ErrorKind::InvalidArgument, "--model must be sim1 or sim2 (or pass --params)");
  }
  const agmm::LabelVector truth = agmm::balanced_assignment(a.n, params.k);
  const agmm::Dataset data =
      agmm::sample(params, truth, agmm::derive_seed(a.seed, 0, agmm::StreamTag::Data));
  agmm::write_dataset(data.y, a.out);
  if (!a.truth_out.empty()) agmm::write_labels(truth, a.truth_out);
  if (!a.params_out.empty()) agmm::write_params(params, a.params_out);
}

struct ClusterArgs {
  std::string data;
  std::size_t k = 0;
  std::string model = "homog";
  std::string init = "vanilla";
  std::optional<std::size_t> iters;
  double ridge = agmm::kDefaultRidge;
  std::uint64_t seed = 0;
  std::string out;
  std::string report;
  std::string truth;
};

void run_cluster(const ClusterArgs& a) {
  agmm::Dataset data;
  data.y = agmm::read_dataset(a.data);
  if (!a.truth.empty()) {
    data.truth = agmm::read_labels(a.truth);
    if (data.truth->size() != data.n())
      agmm::fail(agmm::ErrorKind::LengthMismatch, "--truth has " + std::to_string(data.truth->size()) +
                                                      " labels for " + std::to_string(data.n()) + " rows");
    agmm::check_labels(*data.truth, a.k);
  }
  const std::size_t iters = a.iters ? *a.iters : agmm::default_iterations(data.n());
  agmm::LloydOptions lloyd;
  json report;
  report["model"] = a.model;
  report["k"] = a.k;
  report["seed"] = a.seed;

  auto initial_labels = [&]() -> agmm::LabelVector {
    if (a.init == "kmeanspp") {
      const agmm::Matrix seeds =
          agmm::kmeanspp_seed(data, a.k, agmm::derive_seed(a.seed, 0, agmm::StreamTag::InitVanilla));
      return agmm::assign_nearest(data.y, seeds);
    }
    if (a.init == "vanilla")
      return agmm::vanilla_lloyd(data, a.k, agmm::derive_seed(a.seed, 0, agmm::StreamTag::InitVanilla), lloyd)
          .labels;
    if (a.init == "spectral")
      return agmm::spectral_init(data, a.k, agmm::derive_seed(a.seed, 0, agmm::StreamTag::InitSpectral), lloyd);
    if (a.init.rfind("file:", 0) == 0) {
      agmm::LabelVector z = agmm::read_labels(a.init.substr(5));
      if (z.size() != data.n())
        agmm::fail(agmm::ErrorKind::LengthMismatch, "initial labels do not match the data row count");
      agmm::check_labels(z, a.k);
      return z;
    }
    agmm::fail(agmm::ErrorKind::InvalidArgument, "--init must be kmeanspp, vanilla, spectral or file:<labels>");
  };

  agmm::LabelVector labels;
  if (a.model == "vanilla") {
    const auto res = agmm::vanilla_lloyd(data, a.k, agmm::derive_seed(a.seed, 0, agmm::StreamTag::InitVanilla), lloyd);
    labels = res.labels;
    report["iterations"] = res.iterations;
    report["sse"] = res.sse;
    report["restart"] = res.restart;
  } else if (a.model == "spectral") {
    labels = agmm::spectral_init(data, a.k, agmm::derive_seed(a.seed, 0, agmm::StreamTag::InitSpectral), lloyd);
  } else if (a.model == "homog" || a.model == "hetero") {
    report["init"] = a.init;
    const agmm::LabelVector z0 = initial_labels();
    const agmm::FitTrace trace = a.model == "homog" ? agmm::adjusted_lloyd_homog(data, a.k, z0, iters, a.ridge)
                                                    : agmm::adjusted_lloyd_hetero(data, a.k, z0, iters, a.ridge);
    labels = trace.final_labels();
    report["max_iters"] = iters;
    report["ridge"] = a.ridge;
    report["trace"] = trace_json(trace);
  } else {
    agmm::fail(agmm::ErrorKind::InvalidArgument, "--model must be homog, hetero, vanilla or spectral");
  }
  if (data.truth) report["h"] = agmm::misclustering_rate(labels, *data.truth, a.k).rate;

  agmm::write_labels(labels, a.out);
  if (!a.report.empty()) emit(report, a.report);
}

void run_snr(const std::string& params_file) {
  const agmm::GmmParams params = agmm::read_params(params_file);
  const agmm::SnrReport r = agmm::snr_report(params);
  json j;
  j["delta"] = r.delta;
  j["snr"] = r.snr ? json(*r.snr) : json(nullptr);
  j["snr_prime"] = finite_or_null(r.snr_prime);
  json pairs = json::array();
  for (const auto& row : r.snr_pairs) {
    json jr = json::array();
    for (double v : row) jr.push_back(finite_or_null(v));
    pairs.push_back(jr);
  }
  j["snr_pairs"] = pairs;
  const double s = r.snr ? *r.snr : r.snr_prime;
  j["exponent"] = finite_or_null(-s * s / 8.0);
  std::cout << j.dump(2) << "\n";
}

void run_oracle(const std::string& params_file, const std::vector<std::size_t>& pair, std::size_t trials,
                std::uint64_t seed) {
  const agmm::GmmParams params = agmm::read_params(params_file);
  const std::size_t a = pair.at(0), b = pair.at(1);
  if (a >= params.k || b >= params.k || a == b)
    agmm::fail(agmm::ErrorKind::InvalidArgument, "--pair needs two distinct cluster indices below k");
  if (trials == 0) agmm::fail(agmm::ErrorKind::InvalidArgument, "--trials must be positive");
  const auto hyp = agmm::PairHypothesis::from_params(params, a, b);
  const agmm::McError mc = agmm::mc_pair_error(hyp, trials, seed);
  const agmm::SnrReport r = agmm::snr_report(params);
  const double s = r.snr_pairs[a][b];
  json j;
  j["pair"] = {a, b};
  j["trials"] = trials;
  j["mc_error"] = mc.total_error;
  j["std_error"] = mc.std_error;
  j["type1"] = mc.type1;
  j["type2"] = mc.type2;
  j["snr_prime_ab"] = finite_or_null(s);
  j["exponent_bound"] = std::isfinite(s) ? agmm::minimax_exponent_bound(s) : 0.0;
  std::cout << j.dump(2) << "\n";
}

void run_experiment_cmd(const std::string& config_file, const std::string& out, std::optional<std::size_t> workers,
                        const std::string& report) {
  agmm::ExperimentConfig config = agmm::read_config(config_file);
  if (workers) config.workers = *workers;
  const agmm::CurveTable table = agmm::run_experiment(config);
  agmm::write_curves(table, out);
  if (!report.empty()) agmm::write_text(report, agmm::experiment_report_json(table));
  if (table.truncated)
    std::cerr << "time budget exhausted: " << table.replications.size() << " of " << config.replications
              << " replications written\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustering and benchmarks for anisotropic Gaussian mixtures"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Sample a dataset from sim1, sim2 or a params file");
  generate->add_option("--model", gen.model, "sim1 or sim2")->check(CLI::IsMember({"sim1", "sim2"}));
  generate->add_option("--params", gen.params_file, "Params JSON (overrides --model)");
  generate->add_option("--n", gen.n, "Number of points")->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen.seed, "Base seed");
  generate->add_option("--out", gen.out, "Dataset CSV")->required();
  generate->add_option("--truth", gen.truth_out, "Write true labels here");
  generate->add_option("--params-out", gen.params_out, "Write the drawn params here");

  ClusterArgs cl;
  std::size_t iters = 0;
  auto* cluster = app.add_subcommand("cluster", "Cluster a dataset");
  cluster->add_option("--data", cl.data, "Dataset CSV")->required();
  cluster->add_option("--k", cl.k, "Number of clusters")->required()->check(CLI::PositiveNumber);
  cluster->add_option("--model", cl.model, "homog, hetero, vanilla or spectral");
  cluster->add_option("--init", cl.init, "kmeanspp, vanilla, spectral or file:<labels>");
  auto* iters_opt = cluster->add_option("--iters", iters, "Adjusted Lloyd iterations (default ceil(ln n))");
  cluster->add_option("--ridge", cl.ridge, "Covariance ridge factor");
  cluster->add_option("--seed", cl.seed, "Seed");
  cluster->add_option("--out", cl.out, "Output labels")->required();
  cluster->add_option("--report", cl.report, "Report JSON");
  cluster->add_option("--truth", cl.truth, "True labels for the h curve");

  std::string snr_params;
  auto* snr = app.add_subcommand("snr", "Print Delta, SNR and SNR'");
  snr->add_option("--params", snr_params, "Params JSON")->required();

  std::string oracle_params;
  std::vector<std::size_t> pair;
  std::size_t trials = 100000;
  std::uint64_t oracle_seed = 0;
  auto* oracle = app.add_subcommand("oracle", "Monte Carlo error of the optimal test for one pair");
  oracle->add_option("--params", oracle_params, "Params JSON")->required();
  oracle->add_option("--pair", pair, "Cluster indices a b")->required()->expected(2);
  oracle->add_option("--trials", trials, "Draws per hypothesis");
  oracle->add_option("--seed", oracle_seed, "Seed");

  std::string config_file, curves_out, exp_report;
  std::size_t workers = 1;
  auto* experiment = app.add_subcommand("experiment", "Run a replicated experiment");
  experiment->add_option("--config", config_file, "Config JSON")->required();
  experiment->add_option("--out", curves_out, "Curve CSV")->required();
  auto* workers_opt = experiment->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  experiment->add_option("--report", exp_report, "Metadata JSON (config, seeds, SNR per replication)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*generate) {
      run_generate(gen);
    } else if (*cluster) {
      if (*iters_opt) cl.iters = iters;
      run_cluster(cl);
    } else if (*snr) {
      run_snr(snr_params);
    } else if (*oracle) {
      run_oracle(oracle_params, pair, trials, oracle_seed);
    } else if (*experiment) {
      run_experiment_cmd(config_file, curves_out, *workers_opt ? std::optional(workers) : std::nullopt, exp_report);
    }
  } catch (const agmm::Error& e) {
    std::cerr << "gmm-bench: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "gmm-bench: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
