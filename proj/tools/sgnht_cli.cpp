// Command-line front end: run a config file, run an ad-hoc sweep, generate
// synthetic datasets, and fit convergence orders from result CSVs.

#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sgnht/harness.hpp"
#include "sgnht/integrators.hpp"

using namespace sgnht;

namespace {

void print_summary(const SweepResult& result, std::ostream& out) {
  for (const auto& c : result.cells) {
    out << c.method << "  h=" << c.stepsize << "  " << c.metric << "=";
    if (c.budget) {
      out << "budget";
    } else if (c.unstable || !c.value) {
      out << "unstable";
    } else {
      out << *c.value << " (+-" << c.std_error << ")";
    }
    out << "  diverged " << c.diverged << "/" << c.runs << "\n";
  }
}

int execute(const ExperimentConfig& config) {
  const SweepResult result = run_experiment(config);
  write_csv(result, config.output);
  write_manifest(result, config, config.output);
  print_summary(result, std::cout);
  std::cout << "wrote " << config.output << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic-gradient thermostat samplers: sweeps, data and order fits"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Config file (key = value with [sections])")->required();

  std::string experiment = "molecular";
  std::string methods;
  double h0 = 0.0, growth = 0.0, sim_time = 0.0, burn_in = -1.0;
  std::size_t n_steps = 0, runs = 0, max_steps = 0, n_particles = 0;
  std::uint64_t seed = 1;
  std::string out = "results.csv";
  std::optional<double> sigma_a, mu, reference_u;
  auto* sweep = app.add_subcommand("sweep", "Run a stepsize sweep from command-line settings");
  sweep->add_option("--experiment", experiment, "molecular, gaussian-mean, logistic or harmonic")->required();
  sweep->add_option("--methods", methods, "Comma-separated methods, e.g. PAD,BADODAB,SGLD");
  sweep->add_option("--h0", h0, "First stepsize");
  sweep->add_option("--growth", growth, "Stepsize growth factor");
  sweep->add_option("--n-steps", n_steps, "Number of stepsizes");
  sweep->add_option("--runs", runs, "Independent runs per stepsize");
  sweep->add_option("--seed", seed, "Master seed");
  sweep->add_option("--out", out, "Output CSV path");
  sweep->add_option("--sim-time", sim_time, "Reduced time units per run");
  sweep->add_option("--burn-in", burn_in, "Discarded fraction of each run");
  sweep->add_option("--sigma-a", sigma_a, "Artificial noise amplitude");
  sweep->add_option("--mu", mu, "Thermal mass");
  sweep->add_option("--max-steps", max_steps, "Skip cells needing more steps per run than this");
  sweep->add_option("--n-particles", n_particles, "Pendulum particle count (molecular)");
  sweep->add_option("--reference-u", reference_u, "Known <U> for the molecular experiment");

  std::string spec = "gaussian-mean";
  std::uint64_t data_seed = 1;
  std::string data_out;
  std::size_t data_n = 0;
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  gen->add_option("--spec", spec, "gaussian-mean or logistic")->required();
  gen->add_option("--seed", data_seed, "Generator seed")->required();
  gen->add_option("--out", data_out, "Output path")->required();
  gen->add_option("--n", data_n, "Number of records (default 100 or 1000)");

  std::string csv_in, fit_method, fit_metric;
  auto* fit = app.add_subcommand("fit-order", "Fit log(error) against log(h) for one method");
  fit->add_option("--in", csv_in, "Sweep CSV")->required();
  fit->add_option("--method", fit_method, "Method name")->required();
  fit->add_option("--metric", fit_metric, "Metric column (default: first found for the method)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return execute(load_config(config_path));

    if (*sweep) {
      ExperimentConfig c = default_config(parse_experiment_kind(experiment));
      if (!methods.empty()) {
        c.methods.clear();
        std::stringstream ss(methods);
        std::string m;
        while (std::getline(ss, m, ',')) {
          if (!m.empty()) c.methods.push_back(m);
        }
      }
      if (h0 > 0.0) c.stepsizes.start = h0;
      if (growth > 0.0) c.stepsizes.growth = growth;
      if (n_steps > 0) c.stepsizes.count = n_steps;
      if (runs > 0) c.runs = runs;
      if (sim_time > 0.0) c.sim_time = sim_time;
      if (burn_in >= 0.0) c.burn_in_fraction = burn_in;
      if (sigma_a) c.thermostat.sigma_a = *sigma_a;
      if (mu) c.thermostat.mu = *mu;
      if (n_particles > 0) c.molecular.pendulum.n_particles = n_particles;
      if (reference_u) c.molecular.reference_u = reference_u;
      c.max_steps = max_steps;
      c.seed = seed;
      c.output = out;
      c.validate();
      return execute(c);
    }

    if (*gen) {
      SyntheticSpec s;
      s.name = spec;
      s.n = data_n;
      const Dataset data = generate_synthetic_data(s, data_seed);
      write_dataset(data, data_out);
      std::cout << "wrote " << data.rows() << " records to " << data_out << "\n";
      return 0;
    }

    if (*fit) {
      const SweepResult result = read_csv(csv_in);
      if (fit_metric.empty()) {
        for (const auto& c : result.cells) {
          if (c.method == fit_method || canonical_method(c.method) == canonical_method(fit_method)) {
            fit_metric = c.metric;
            break;
          }
        }
      }
      const auto points = order_points(result, fit_method, fit_metric);
      const OrderFit f = fit_order(points);
      std::printf("method=%s metric=%s slope=%.6f stderr=%.6f intercept=%.6f points=%zu\n", fit_method.c_str(),
                  fit_metric.c_str(), f.slope, f.slope_stderr, f.intercept, f.points);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InsufficientDataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
