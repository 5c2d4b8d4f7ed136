#pragma once

// Built-in force models: harmonic/flat test potentials with optional injected
// noise, the periodic cutoff-spring ("pendulum") particle system, Gaussian
// mean inference and Bayesian logistic regression with minibatch gradients,
// plus synthetic dataset generation and the plain-text dataset format.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sgnht/core.hpp"

namespace sgnht {

/// U(q) = k/2 |q|^2 in d dimensions; k = 0 gives a flat potential. When
/// sigma > 0 the force carries injected noise sigma M^1/2 R.
class HarmonicModel final : public ForceModel, public AnalyticModel {
 public:
  explicit HarmonicModel(std::size_t dim = 1, double stiffness = 1.0, double sigma = 0.0,
                         std::vector<double> mass = {});

  std::size_t dimension() const override { return dim_; }
  std::string name() const override { return "harmonic"; }
  void compute_force(std::span<const double> q, RngStream& rng, ForceSample& out) const override;
  double potential(std::span<const double> q) const override;
  bool provides_covariance() const override { return true; }
  void compute_force_with_covariance(std::span<const double> q, RngStream& rng, ForceSample& out) const override;

  void gradient(std::span<const double> q, std::span<double> out) const override;
  double laplacian(std::span<const double> q) const override;
  double noise_sigma() const override { return sigma_; }

  double stiffness() const { return stiffness_; }

 private:
  std::size_t dim_;
  double stiffness_;
  double sigma_;
  std::vector<double> mass_;
};

struct PendulumParams {
  std::size_t n_particles = 500;
  double density = 4.0;
  double k_spring = 25.0;
  double r_cut = 1.0;
};

/// Numerator and denominator of the configurational temperature,
/// sum_i |grad_i U|^2 and sum_i laplacian_i U, for one configuration.
struct ConfigurationalTemperatureTerms {
  double grad_sq = 0.0;
  double laplacian = 0.0;
};

/// N identical unit-mass particles in a periodic cube interacting through
/// phi(r) = k/2 (r - r_c)^2 for r < r_c. Positions are stored as
/// (x0, y0, z0, x1, ...) and need not be wrapped into the box.
class PendulumSystem final : public ForceModel {
 public:
  explicit PendulumSystem(PendulumParams params = {});

  std::size_t dimension() const override { return 3 * params_.n_particles; }
  std::string name() const override { return "pendulum"; }
  /// Fills the force and potential. Throws SingularityError when two
  /// interacting particles coincide.
  void compute_force(std::span<const double> q, RngStream& rng, ForceSample& out) const override;
  double potential(std::span<const double> q) const override;

  /// Force and potential energy in one pass using cell lists.
  double force_energy(std::span<const double> q, std::span<double> force) const;
  ConfigurationalTemperatureTerms configurational_temperature(std::span<const double> q) const;

  /// Pair potential phi(r).
  double pair_energy(double r) const;
  /// Analytic 3D Laplacian of the pair term, k (3 - 2 r_c / r), zero beyond r_c.
  double pair_laplacian(double r) const;

  /// Equidistant cubic grid filling the box.
  std::vector<double> grid_positions() const;

  const PendulumParams& params() const { return params_; }
  double box_side() const { return box_; }
  /// Cells per box side used by the neighbour search; at 3 or fewer the search
  /// falls back to looping over all pairs.
  std::size_t cells_per_side() const { return cells_; }

 private:
  template <class PairFn>
  void for_each_pair(std::span<const double> q, PairFn&& fn) const;

  PendulumParams params_;
  double box_;
  std::size_t cells_;
};

enum class MinibatchSampling { without_replacement, with_replacement };

/// Posterior of the mean of N(theta, sigma_hat^2) data under a flat prior.
/// The force is (N / sigma_hat^2)(xbar_batch - theta).
class GaussianMeanModel final : public ForceModel {
 public:
  GaussianMeanModel(std::vector<double> data, double sigma_hat, std::size_t minibatch,
                    MinibatchSampling sampling = MinibatchSampling::with_replacement);

  std::size_t dimension() const override { return 1; }
  std::string name() const override { return "gaussian-mean"; }
  void compute_force(std::span<const double> q, RngStream& rng, ForceSample& out) const override;
  double potential(std::span<const double> q) const override;
  bool provides_covariance() const override { return true; }
  void compute_force_with_covariance(std::span<const double> q, RngStream& rng, ForceSample& out) const override;

  /// Exact full-data force.
  double clean_force(double theta) const;
  /// Analytic variance of the noisy force for the configured sampling mode.
  /// With replacement this is N (N - 1) / n~ * VarX / sigma_hat^4, VarX the
  /// unbiased data variance; without replacement N (N - n~) / n~ * VarX / sigma_hat^4.
  double force_variance() const;

  const std::vector<double>& data() const { return data_; }
  double data_mean() const { return mean_; }
  /// Unbiased sample variance of the data.
  double data_variance() const { return var_; }
  double sigma_hat() const { return sigma_hat_; }
  std::size_t minibatch() const { return minibatch_; }
  MinibatchSampling sampling() const { return sampling_; }

 private:
  double batch_mean(RngStream& rng) const;

  std::vector<double> data_;
  double sigma_hat_;
  std::size_t minibatch_;
  MinibatchSampling sampling_;
  double mean_ = 0.0;
  double var_ = 0.0;
};

struct GaussianPosterior {
  double mean;
  double variance;
};

/// N(xbar, sigma_hat^2 / N).
GaussianPosterior gaussian_mean_exact_posterior(const GaussianMeanModel& model);

/// Bayesian logistic regression with a standard normal prior on beta and
/// labels in {-1, +1}. The force is the log-posterior gradient with the
/// likelihood sum over a minibatch rescaled by N / n~.
class LogisticModel final : public ForceModel {
 public:
  /// design is row-major N x d.
  LogisticModel(std::vector<double> design, std::vector<double> labels, std::size_t d, std::size_t minibatch,
                MinibatchSampling sampling = MinibatchSampling::without_replacement);

  std::size_t dimension() const override { return d_; }
  std::string name() const override { return "logistic"; }
  void compute_force(std::span<const double> q, RngStream& rng, ForceSample& out) const override;
  /// Negative log posterior, up to a constant, over the full dataset.
  double potential(std::span<const double> q) const override;
  bool provides_covariance() const override { return true; }
  /// Diagonal covariance estimated from the batch: unbiased sample variance
  /// of the per-datum likelihood gradients times N^2 / n~.
  void compute_force_with_covariance(std::span<const double> q, RngStream& rng, ForceSample& out) const override;

  /// Full-data gradient of the log posterior.
  void clean_force(std::span<const double> beta, std::span<double> out) const;

  std::size_t rows() const { return n_; }
  std::size_t minibatch() const { return minibatch_; }

 private:
  void batch_force(std::span<const double> beta, RngStream& rng, ForceSample& out, bool with_cov) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::size_t d_;
  std::size_t n_;
  std::size_t minibatch_;
  MinibatchSampling sampling_;
};

/// 1 / (1 + e^{-z}).
double logistic(double z);

/// Fills out with n distinct (without replacement) or independent (with
/// replacement) uniform indices from [0, population).
void draw_minibatch(RngStream& rng, std::size_t population, std::size_t n, MinibatchSampling sampling,
                    std::vector<std::size_t>& out);

/// A plain-text table: a comment line carrying the dataset name, seed and
/// generation parameters, a column-name line, then one record per line.
struct Dataset {
  std::string spec;
  std::uint64_t seed = 0;
  /// Extra key=value metadata recorded in the comment line.
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  /// Row-major values, rows() x columns.size().
  std::vector<double> values;

  std::size_t rows() const { return columns.empty() ? 0 : values.size() / columns.size(); }
  std::vector<double> column(std::size_t c) const;
};

struct SyntheticSpec {
  /// "gaussian-mean" or "logistic".
  std::string name = "gaussian-mean";
  std::size_t n = 0;  // 0: the experiment's default (100 or 1000)
  std::array<double, 3> beta_star{1.0, -1.0, 0.5};
};

/// Gaussian: N draws from N(0, 1), column "x". Logistic: columns x1 x2 x3 y
/// with x3 = 1 and y = +1 with probability f(beta*^T x).
Dataset generate_synthetic_data(const SyntheticSpec& spec, std::uint64_t seed);

void write_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

GaussianMeanModel make_gaussian_mean_model(const Dataset& data, double sigma_hat, std::size_t minibatch,
                                           MinibatchSampling sampling = MinibatchSampling::with_replacement);
LogisticModel make_logistic_model(const Dataset& data, std::size_t minibatch,
                                  MinibatchSampling sampling = MinibatchSampling::without_replacement);

}  // namespace sgnht
