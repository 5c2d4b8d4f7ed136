#include "sgnht/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "sgnht/integrators.hpp"

namespace sgnht {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t cell_seed(std::uint64_t master, const std::string& method, std::size_t stepsize_index,
                        std::size_t run) {
  return derive_seed(master, {fnv1a(canonical_method(method)), stepsize_index, run});
}

std::size_t worker_count() {
  const char* env = std::getenv("SGNHT_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) throw ConfigError("SGNHT_WORKERS must be a positive integer");
  return static_cast<std::size_t>(v);
}

namespace {

std::size_t steps_for(double sim_time, double h) {
  const double r = sim_time / h;
  // Guard against 500 / 0.1 = 5000.000000000001 rounding up to an extra step.
  return static_cast<std::size_t>(std::ceil(r - 1e-9 * r));
}

Dataset load_or_generate(const std::string& file, const std::string& spec, std::size_t n, std::uint64_t seed) {
  if (!file.empty()) return read_dataset(file);
  SyntheticSpec s;
  s.name = spec;
  s.n = n;
  return generate_synthetic_data(s, seed);
}

PhaseState initial_state(const ExperimentConfig& config, const ForceModel& model, const std::string& method,
                         RngStream& rng) {
  const auto& tp = config.thermostat;
  const std::size_t d = model.dimension();
  std::vector<double> q(d);
  switch (config.experiment) {
    case ExperimentKind::molecular:
      q = static_cast<const PendulumSystem&>(model).grid_positions();
      break;
    case ExperimentKind::harmonic: {
      const double sd = std::sqrt(tp.kT() / config.harmonic.stiffness);
      for (auto& v : q) v = sd * rng.normal();
      break;
    }
    case ExperimentKind::gaussian_mean:
    case ExperimentKind::logistic:
      for (auto& v : q) v = rng.normal();
      break;
  }
  std::vector<double> p(d);
  for (std::size_t i = 0; i < d; ++i) p[i] = std::sqrt(tp.kT() * tp.mass_at(i)) * rng.normal();
  double xi = tp.stationary_xi();
  if (canonical_method(method) == "adBD") xi = tp.beta * config.harmonic.sigma * config.harmonic.sigma / 2.0;
  return PhaseState(std::move(q), std::move(p), xi);
}

}  // namespace

std::unique_ptr<ForceModel> build_model(const ExperimentConfig& config) {
  switch (config.experiment) {
    case ExperimentKind::molecular:
      return std::make_unique<PendulumSystem>(config.molecular.pendulum);
    case ExperimentKind::harmonic:
      return std::make_unique<HarmonicModel>(config.harmonic.dim, config.harmonic.stiffness, config.harmonic.sigma,
                                             config.thermostat.mass);
    case ExperimentKind::gaussian_mean: {
      const auto& g = config.gaussian;
      const Dataset data = load_or_generate(g.data_file, "gaussian-mean", g.n, g.data_seed);
      return std::make_unique<GaussianMeanModel>(make_gaussian_mean_model(data, g.sigma_hat, g.minibatch, g.sampling));
    }
    case ExperimentKind::logistic: {
      const auto& l = config.logistic;
      const Dataset data = load_or_generate(l.data_file, "logistic", l.n, l.data_seed);
      return std::make_unique<LogisticModel>(make_logistic_model(data, l.minibatch, l.sampling));
    }
  }
  throw ConfigError("experiment.name: unsupported experiment");
}

RunStats simulate_run(const ExperimentConfig& config, const ForceModel& model, const std::string& method, double h,
                      std::uint64_t seed, const std::optional<Histogram>& histogram_template) {
  RngStream rng(seed);
  PhaseState state = initial_state(config, model, method, rng);
  auto sampler = make_sampler(method, model, config.thermostat);

  RunStats stats;
  const std::size_t steps = steps_for(config.sim_time, h);
  const bool molecular = config.experiment == ExperimentKind::molecular;
  const bool bayesian =
      config.experiment == ExperimentKind::gaussian_mean || config.experiment == ExperimentKind::logistic;
  bool want_tconf = false;
  if (molecular) {
    for (const auto& m : config.molecular.metrics) want_tconf = want_tconf || m == "Tconf";
  }
  const auto* pendulum = molecular ? static_cast<const PendulumSystem*>(&model) : nullptr;

  RunningAverage u(steps, config.burn_in_fraction);
  RunningAverage xi(steps, config.burn_in_fraction);
  RunningAverage grad_sq(steps, config.burn_in_fraction);
  RunningAverage lap(steps, config.burn_in_fraction);
  std::vector<RunningAverage> q_avg;
  if (bayesian) q_avg.assign(model.dimension(), RunningAverage(steps, config.burn_in_fraction));
  if (histogram_template) stats.histogram = Histogram(histogram_template->bins(), histogram_template->lo(),
                                                      histogram_template->hi());
  const std::size_t burn_in = static_cast<std::size_t>(std::floor(config.burn_in_fraction * static_cast<double>(steps)));

  for (std::size_t n = 0; n < steps; ++n) {
    const StepReport report = sampler->step(state, h, rng);
    ++stats.steps;
    if (report.diverged) {
      stats.diverged = true;
      return stats;
    }
    if (!bayesian) {
      const double energy = sampler->potential(state, rng);
      if (!std::isfinite(energy)) {
        stats.diverged = true;
        return stats;
      }
      u.push(energy);
      xi.push(state.xi);
    }
    if (want_tconf) {
      const auto terms = pendulum->configurational_temperature(state.q);
      grad_sq.push(terms.grad_sq);
      lap.push(terms.laplacian);
    }
    if (bayesian) {
      for (std::size_t i = 0; i < q_avg.size(); ++i) q_avg[i].push(state.q[i]);
      if (stats.histogram && n >= burn_in) stats.histogram->add(state.q[0]);
    }
  }
  stats.retained = steps - burn_in;
  stats.u_mean = u.mean();
  stats.xi_mean = xi.mean();
  stats.grad_sq_mean = grad_sq.mean();
  stats.laplacian_mean = lap.mean();
  for (const auto& a : q_avg) stats.q_mean.push_back(a.mean());
  return stats;
}

namespace {

/// Runs `count` independent jobs on the configured number of workers. Jobs
/// write only to their own slot, so the schedule cannot change results.
template <class Job>
void run_parallel(std::size_t count, Job&& job) {
  const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

double molecular_reference(const ExperimentConfig& config, const PendulumSystem& system) {
  const auto& m = config.molecular;
  if (m.reference_u) return *m.reference_u;
  ExperimentConfig ref = config;
  if (m.reference_time > 0.0) ref.sim_time = m.reference_time;
  if (m.reference_sigma_a) ref.thermostat.sigma_a = *m.reference_sigma_a;
  if (m.reference_mu) ref.thermostat.mu = *m.reference_mu;
  ref.molecular.metrics = {"U"};
  std::vector<RunStats> runs(m.reference_runs);
  const std::uint64_t tag = fnv1a("reference");
  run_parallel(runs.size(), [&](std::size_t r) {
    runs[r] = simulate_run(ref, system, m.reference_method, m.reference_h, derive_seed(config.seed, {tag, r}));
  });
  std::vector<double> values;
  for (const auto& r : runs) {
    if (!r.diverged) values.push_back(r.u_mean);
  }
  if (values.empty()) throw std::runtime_error("molecular reference: every reference run diverged");
  return mean_and_standard_error(values).mean;
}

std::vector<double> logistic_reference(const ExperimentConfig& config, const LogisticModel& model) {
  const auto& l = config.logistic;
  if (l.truth) return *l.truth;
  if (!l.truth_file.empty() && std::filesystem::exists(l.truth_file)) {
    std::ifstream in(l.truth_file);
    std::vector<double> truth;
    double v = 0.0;
    while (in >> v) truth.push_back(v);
    if (truth.size() != model.dimension()) throw std::runtime_error("logistic truth file has the wrong length");
    return truth;
  }
  // Clean gradient: the whole dataset as one batch.
  const Dataset data = load_or_generate(l.data_file, "logistic", l.n, l.data_seed);
  const LogisticModel clean = make_logistic_model(data, model.rows(), MinibatchSampling::without_replacement);
  ExperimentConfig ref = config;
  ref.thermostat.sigma_a = l.truth_sigma_a;
  ref.sim_time = l.truth_h * static_cast<double>(l.truth_steps);
  std::vector<RunStats> runs(l.truth_runs);
  const std::uint64_t tag = fnv1a("truth");
  run_parallel(runs.size(), [&](std::size_t r) {
    runs[r] = simulate_run(ref, clean, "BADODAB", l.truth_h, derive_seed(config.seed, {tag, r}));
  });
  std::vector<double> truth(model.dimension(), 0.0);
  std::size_t used = 0;
  for (const auto& r : runs) {
    if (r.diverged) continue;
    ++used;
    for (std::size_t j = 0; j < truth.size(); ++j) truth[j] += r.q_mean[j];
  }
  if (used == 0) throw std::runtime_error("logistic truth: every reference run diverged");
  for (auto& v : truth) v /= static_cast<double>(used);
  if (!l.truth_file.empty()) {
    std::ofstream out(l.truth_file);
    out << std::setprecision(17);
    for (double v : truth) out << v << "\n";
    if (!out) throw std::runtime_error("cannot write logistic truth file " + l.truth_file);
  }
  return truth;
}

SweepResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto model = build_model(config);
  const std::vector<double> hs = config.stepsizes.values();

  SweepResult result;
  std::optional<Histogram> hist_template;
  double u_exact = 0.0;
  std::vector<double> truth;
  GaussianPosterior posterior{0.0, 1.0};
  switch (config.experiment) {
    case ExperimentKind::molecular:
      u_exact = molecular_reference(config, static_cast<const PendulumSystem&>(*model));
      result.reference = {u_exact};
      break;
    case ExperimentKind::harmonic:
      u_exact = static_cast<double>(config.harmonic.dim) * config.thermostat.kT() / 2.0;
      result.reference = {u_exact};
      break;
    case ExperimentKind::gaussian_mean: {
      posterior = gaussian_mean_exact_posterior(static_cast<const GaussianMeanModel&>(*model));
      const double sd = std::sqrt(posterior.variance);
      hist_template = Histogram(config.gaussian.bins, posterior.mean - config.gaussian.range_sd * sd,
                                posterior.mean + config.gaussian.range_sd * sd);
      result.reference = {posterior.mean, posterior.variance};
      break;
    }
    case ExperimentKind::logistic:
      truth = logistic_reference(config, static_cast<const LogisticModel&>(*model));
      result.reference = truth;
      break;
  }

  struct Unit {
    std::size_t method;
    std::size_t h_index;
    std::size_t run;
  };
  std::vector<Unit> units;
  std::vector<std::vector<bool>> over_budget(config.methods.size(), std::vector<bool>(hs.size(), false));
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    for (std::size_t k = 0; k < hs.size(); ++k) {
      if (config.max_steps > 0 && steps_for(config.sim_time, hs[k]) > config.max_steps) {
        over_budget[m][k] = true;
        continue;
      }
      for (std::size_t r = 0; r < config.runs; ++r) units.push_back({m, k, r});
    }
  }

  std::vector<RunStats> stats(units.size());
  std::vector<double> seconds(units.size(), 0.0);
  run_parallel(units.size(), [&](std::size_t i) {
    const Unit& u = units[i];
    const auto t0 = std::chrono::steady_clock::now();
    stats[i] = simulate_run(config, *model, config.methods[u.method], hs[u.h_index],
                            cell_seed(config.seed, config.methods[u.method], u.h_index, u.run), hist_template);
    seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });

  // Ordered reduction: units were enumerated method-major, then stepsize, then run.
  std::size_t cursor = 0;
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    const std::string& method = config.methods[m];
    const bool second_order = is_second_order(canonical_method(method));
    for (std::size_t k = 0; k < hs.size(); ++k) {
      std::vector<std::string> metrics;
      switch (config.experiment) {
        case ExperimentKind::molecular:
          for (const auto& name : config.molecular.metrics) metrics.push_back("rel_err_" + name);
          break;
        case ExperimentKind::harmonic:
          metrics = {"rel_err_U"};
          if (second_order || canonical_method(method) == "adBD") metrics.push_back("rel_err_xi");
          break;
        case ExperimentKind::gaussian_mean:
          metrics = {"mae"};
          break;
        case ExperimentKind::logistic:
          metrics = {"rmse"};
          break;
      }

      SweepCell base;
      base.method = method;
      base.stepsize = hs[k];
      base.runs = config.runs;
      if (over_budget[m][k]) {
        base.budget = true;
        for (const auto& name : metrics) {
          SweepCell cell = base;
          cell.metric = name;
          result.cells.push_back(cell);
        }
        continue;
      }

      std::vector<const RunStats*> alive;
      double wall = 0.0;
      for (std::size_t r = 0; r < config.runs; ++r, ++cursor) {
        wall += seconds[cursor];
        if (stats[cursor].diverged) {
          ++base.diverged;
        } else {
          alive.push_back(&stats[cursor]);
        }
      }
      base.wall_seconds = wall;
      base.unstable = alive.empty();

      for (const auto& name : metrics) {
        SweepCell cell = base;
        cell.metric = name;
        if (!alive.empty()) {
          std::vector<double> per_run;
          if (name == "rel_err_U") {
            for (const auto* s : alive) per_run.push_back(s->u_mean);
            const auto me = mean_and_standard_error(per_run);
            cell.value = relative_error(me.mean, u_exact).value;
            cell.std_error = me.std_error / std::abs(u_exact);
          } else if (name == "rel_err_Tconf") {
            double g = 0.0;
            double l = 0.0;
            for (const auto* s : alive) {
              g += s->grad_sq_mean;
              l += s->laplacian_mean;
              per_run.push_back(s->grad_sq_mean / s->laplacian_mean);
            }
            const double kT = config.thermostat.kT();
            cell.value = relative_error(g / l, kT).value;
            cell.std_error = mean_and_standard_error(per_run).std_error / kT;
          } else if (name == "rel_err_xi") {
            const double sigma = config.harmonic.sigma;
            const double beta = config.thermostat.beta;
            const double expected = canonical_method(method) == "adBD"
                                        ? beta * sigma * sigma / 2.0
                                        : config.thermostat.stationary_xi(sigma * std::sqrt(hs[k]));
            for (const auto* s : alive) per_run.push_back(s->xi_mean);
            const auto me = mean_and_standard_error(per_run);
            cell.value = relative_error(me.mean, expected).value;
            cell.std_error = expected != 0.0 ? me.std_error / std::abs(expected) : me.std_error;
          } else if (name == "mae") {
            Histogram pooled(hist_template->bins(), hist_template->lo(), hist_template->hi());
            for (const auto* s : alive) {
              pooled.merge(*s->histogram);
              per_run.push_back(mae(*s->histogram, [&](double x) {
                return normal_cdf((x - posterior.mean) / std::sqrt(posterior.variance));
              }));
            }
            const double survivors = mae(pooled, [&](double x) {
              return normal_cdf((x - posterior.mean) / std::sqrt(posterior.variance));
            });
            cell.value = (survivors * static_cast<double>(alive.size()) +
                          kDivergedMae * static_cast<double>(base.diverged)) /
                         static_cast<double>(config.runs);
            cell.std_error = mean_and_standard_error(per_run).std_error;
          } else if (name == "rmse") {
            std::vector<std::vector<double>> estimates;
            for (const auto* s : alive) {
              estimates.push_back(s->q_mean);
              double sq = 0.0;
              for (std::size_t j = 0; j < truth.size(); ++j) sq += (s->q_mean[j] - truth[j]) * (s->q_mean[j] - truth[j]);
              per_run.push_back(sq);
            }
            cell.value = rmse(estimates, truth);
            // Delta method: se(rmse) = se(mean squared error) / (2 rmse).
            if (*cell.value > 0.0) cell.std_error = mean_and_standard_error(per_run).std_error / (2.0 * *cell.value);
          }
        }
        result.cells.push_back(cell);
      }
    }
  }
  return result;
}

// --- CSV --------------------------------------------------------------------

namespace {

std::string fmt17(double v) {
  std::ostringstream o;
  o << std::setprecision(17) << v;
  return o.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

constexpr const char* kHeader = "method,stepsize,metric,value,runs,diverged,unstable";

}  // namespace

std::string format_csv(const SweepResult& result) {
  std::ostringstream o;
  o << kHeader << "\n";
  for (const auto& c : result.cells) {
    o << c.method << "," << fmt17(c.stepsize) << "," << c.metric << ",";
    if (c.budget) {
      o << "budget";
    } else if (c.value && !c.unstable) {
      o << fmt17(*c.value);
    }
    o << "," << c.runs << "," << c.diverged << "," << (c.unstable ? "true" : "false") << "\n";
  }
  return o.str();
}

SweepResult parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw std::runtime_error("CSV: unexpected header");
  SweepResult result;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw std::runtime_error("CSV line " + std::to_string(line_no) + ": expected 7 fields");
    try {
      SweepCell c;
      c.method = f[0];
      c.stepsize = std::stod(f[1]);
      c.metric = f[2];
      if (f[3] == "budget") {
        c.budget = true;
      } else if (!f[3].empty()) {
        c.value = std::stod(f[3]);
      }
      c.runs = std::stoul(f[4]);
      c.diverged = std::stoul(f[5]);
      if (f[6] != "true" && f[6] != "false") throw std::invalid_argument("unstable flag");
      c.unstable = f[6] == "true";
      result.cells.push_back(c);
    } catch (const std::exception&) {
      throw std::runtime_error("CSV line " + std::to_string(line_no) + ": malformed field");
    }
  }
  return result;
}

SweepResult read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_csv(text.str());
}

void write_csv(const SweepResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << format_csv(result);
  out.close();
  if (!out) throw std::runtime_error("error while writing " + path.string());
}

void write_manifest(const SweepResult& result, const ExperimentConfig& config, const std::filesystem::path& csv_path) {
  const std::string config_text = render_config(config);
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a(config_text);
  nlohmann::json j;
  j["version"] = kVersion;
  j["seed"] = config.seed;
  j["config_hash"] = hash.str();
  j["experiment"] = to_string(config.experiment);
  j["config"] = config_text;
  j["reference"] = result.reference;
  j["workers"] = worker_count();
  j["csv"] = csv_path.filename().string();
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : result.cells) {
    cells.push_back({{"method", c.method},
                     {"stepsize", c.stepsize},
                     {"metric", c.metric},
                     {"std_error", c.std_error},
                     {"wall_seconds", c.wall_seconds}});
  }
  j["cells"] = cells;
  const std::filesystem::path path = csv_path.string() + ".manifest.json";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("error while writing " + path.string());
}

std::vector<OrderPoint> order_points(const SweepResult& result, const std::string& method, const std::string& metric) {
  std::vector<OrderPoint> points;
  for (const auto& c : result.cells) {
    if (c.metric != metric) continue;
    if (c.method != method && canonical_method(c.method) != canonical_method(method)) continue;
    OrderPoint p;
    p.h = c.stepsize;
    p.unstable = c.unstable || c.budget || !c.value;
    p.error = c.value.value_or(0.0);
    points.push_back(p);
  }
  return points;
}

}  // namespace sgnht
