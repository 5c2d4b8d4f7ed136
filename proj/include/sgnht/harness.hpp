#pragma once

// Experiment configuration, stepsize sweeps over (method, stepsize, run)
// work units, CSV results and run manifests.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sgnht/core.hpp"
#include "sgnht/models.hpp"
#include "sgnht/observables.hpp"

namespace sgnht {

enum class ExperimentKind { molecular, gaussian_mean, logistic, harmonic };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

/// Geometric stepsize grid start * growth^k, k = 0..count-1, unless an
/// explicit list is given.
struct StepsizeGrid {
  double start = 0.03;
  double growth = 1.1;
  std::size_t count = 10;
  std::vector<double> explicit_values;

  std::vector<double> values() const;
};

struct MolecularSettings {
  PendulumParams pendulum;
  /// "U" (average potential energy) and/or "Tconf" (configurational temperature).
  std::vector<std::string> metrics{"U"};
  /// Exact <U> when known; otherwise computed by a reference run below.
  std::optional<double> reference_u;
  std::string reference_method = "BADODAB";
  double reference_h = 0.01;
  std::size_t reference_runs = 10;
  /// Reduced time units per reference run; 0 uses the sweep's sim_time.
  double reference_time = 0.0;
  /// Reference thermostat; unset values fall back to the sweep's thermostat.
  std::optional<double> reference_sigma_a;
  std::optional<double> reference_mu;
};

struct HarmonicSettings {
  std::size_t dim = 1;
  double stiffness = 1.0;
  /// Standard deviation of the noise injected into the force.
  double sigma = 0.0;
};

struct GaussianMeanSettings {
  std::size_t n = 100;
  double sigma_hat = 1.0;
  std::size_t minibatch = 10;
  MinibatchSampling sampling = MinibatchSampling::with_replacement;
  /// Existing dataset to load; when empty, data are generated from data_seed.
  std::string data_file;
  std::uint64_t data_seed = 1;
  std::size_t bins = 100;
  /// Histogram range: posterior mean +- range_sd posterior standard deviations.
  double range_sd = 5.0;
};

struct LogisticSettings {
  std::size_t n = 1000;
  std::size_t minibatch = 100;
  MinibatchSampling sampling = MinibatchSampling::without_replacement;
  std::string data_file;
  std::uint64_t data_seed = 1;
  /// Known posterior mean; otherwise computed by a clean-gradient reference run.
  std::optional<std::vector<double>> truth;
  /// Where the computed posterior mean is cached beside the dataset (optional).
  std::string truth_file;
  double truth_h = 0.001;
  std::size_t truth_steps = 1000000;
  std::size_t truth_runs = 10;
  double truth_sigma_a = 6.0;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::molecular;
  std::vector<std::string> methods{"PAD", "BADODAB"};
  ThermostatParams thermostat;
  StepsizeGrid stepsizes;
  double sim_time = 5000.0;
  std::size_t runs = 10;
  double burn_in_fraction = 0.2;
  std::uint64_t seed = 1;
  std::string output = "results.csv";
  /// Abort a cell whose runs would need more steps than this; 0 disables.
  std::size_t max_steps = 0;

  MolecularSettings molecular;
  HarmonicSettings harmonic;
  GaussianMeanSettings gaussian;
  LogisticSettings logistic;

  /// Checks every field; throws ConfigError naming the offending key.
  void validate() const;
};

/// Default settings for an experiment (thermostat, stepsize grid, run length).
ExperimentConfig default_config(ExperimentKind kind);

/// Parses a key=value file with [sections]. Keys not set keep the experiment's
/// defaults; unknown sections or keys are rejected.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical text form; parse_config(render_config(c)) reproduces c.
std::string render_config(const ExperimentConfig& config);

struct SweepCell {
  std::string method;
  double stepsize = 0.0;
  std::string metric;
  std::optional<double> value;
  std::size_t runs = 0;
  std::size_t diverged = 0;
  bool unstable = false;
  /// Cell skipped because it exceeded the max_steps budget.
  bool budget = false;
  /// Standard error of the value across surviving runs (not serialized).
  double std_error = 0.0;
  double wall_seconds = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  /// Exact value the errors were measured against (reference <U>, posterior
  /// mean, ...), in the order the metrics need them.
  std::vector<double> reference;
};

/// Observables accumulated by one trajectory.
struct RunStats {
  bool diverged = false;
  std::size_t steps = 0;
  std::size_t retained = 0;
  double u_mean = 0.0;
  double xi_mean = 0.0;
  double grad_sq_mean = 0.0;
  double laplacian_mean = 0.0;
  /// Posterior-mean estimate (time average of q) for Bayesian runs.
  std::vector<double> q_mean;
  std::optional<Histogram> histogram;
};

/// Seed of the (method, stepsize index, run) work unit; independent of the
/// other methods in the sweep.
std::uint64_t cell_seed(std::uint64_t master, const std::string& method, std::size_t stepsize_index,
                        std::size_t run);

/// Worker threads used for sweeps: SGNHT_WORKERS if set, else 1.
std::size_t worker_count();

/// Runs one trajectory of `config` with the given method and stepsize.
RunStats simulate_run(const ExperimentConfig& config, const ForceModel& model, const std::string& method, double h,
                      std::uint64_t seed, const std::optional<Histogram>& histogram_template = std::nullopt);

/// Builds the experiment's force model (loading or generating data).
std::unique_ptr<ForceModel> build_model(const ExperimentConfig& config);

/// Reference <U> (total potential energy) for the molecular experiment.
double molecular_reference(const ExperimentConfig& config, const PendulumSystem& system);
/// Posterior mean from a clean full-data BADODAB run.
std::vector<double> logistic_reference(const ExperimentConfig& config, const LogisticModel& model);

SweepResult run_experiment(const ExperimentConfig& config);

/// Writes the CSV and, beside it, `<path>.manifest.json`.
void write_csv(const SweepResult& result, const std::filesystem::path& path);
void write_manifest(const SweepResult& result, const ExperimentConfig& config, const std::filesystem::path& csv_path);
std::string format_csv(const SweepResult& result);
SweepResult parse_csv(const std::string& text);
SweepResult read_csv(const std::filesystem::path& path);

/// Cells of one method and metric as order-fit points (unstable and budget
/// cells are marked unstable).
std::vector<OrderPoint> order_points(const SweepResult& result, const std::string& method, const std::string& metric);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sgnht
