#pragma once

// Extended phase-space state, force-model abstraction and the random-number
// contract shared by every integrator and model in the library.

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgnht {

/// Raised for invalid parameters, dimension mismatches and malformed input.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a force field hits a genuine singularity (e.g. coincident
/// particles). Integrators translate it into a diverged step.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Positions, momenta and the auxiliary friction of the adaptive thermostat.
struct PhaseState {
  std::vector<double> q;
  std::vector<double> p;
  double xi = 0.0;

  PhaseState() = default;
  /// Zero momenta of matching length; throws ConfigError on empty q.
  explicit PhaseState(std::vector<double> positions, double friction = 0.0);
  PhaseState(std::vector<double> positions, std::vector<double> momenta, double friction);

  std::size_t dof() const { return q.size(); }
  bool finite() const;
};

struct ThermostatParams {
  double beta = 1.0;
  double sigma_a = 0.0;
  double mu = 10.0;
  /// Diagonal mass matrix. Empty means unit masses.
  std::vector<double> mass;
  /// Degrees of freedom N_d in the friction control law. Zero means "use the
  /// state dimension".
  std::size_t n_dof = 0;

  double kT() const { return 1.0 / beta; }
  double mass_at(std::size_t i) const { return mass.empty() ? 1.0 : mass[i]; }
  std::size_t dof_for(std::size_t state_dim) const { return n_dof == 0 ? state_dim : n_dof; }

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Stationary friction mean beta*(sigma_f^2 + sigma_a^2)/2.
  double stationary_xi(double sigma_f = 0.0) const;
};

struct ForceSample {
  std::vector<double> force;
  bool is_stochastic = false;
  /// Diagonal covariance estimate of the noisy force, when the consumer
  /// asked for it.
  std::optional<std::vector<double>> cov_estimate;
  /// Clean potential at the evaluation point, NaN when the model does not
  /// produce it alongside the force.
  double potential = std::numeric_limits<double>::quiet_NaN();
};

/// Identifies one independent trajectory inside an experiment.
struct StreamId {
  std::uint64_t run = 0;
  std::uint64_t trajectory = 0;
};

/// Deterministic stream of random variates. Identical (seed, id) pairs give
/// identical sequences; distinct ids are decorrelated by hashing into the
/// generator seed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, StreamId id = {});

  std::uint64_t seed() const { return seed_; }
  StreamId id() const { return id_; }

  double normal() { return normal_(engine_); }
  void fill_normal(std::span<double> out);
  std::vector<double> standard_normals(std::size_t n);
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform integer on [0, n).
  std::size_t index(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  StreamId id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// splitmix64 finalizer; used to derive stream seeds.
std::uint64_t mix64(std::uint64_t x);
/// Order-sensitive combination of a master seed with a list of indices.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> indices);

/// Throws ConfigError when n < 1.
std::vector<double> draw_standard_normals(RngStream& rng, std::size_t n);

/// A source of (possibly stochastic) forces for a configuration.
class ForceModel {
 public:
  virtual ~ForceModel() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::string name() const = 0;

  /// Writes a force sample for q into out. Implementations must resize
  /// out.force to dimension().
  virtual void compute_force(std::span<const double> q, RngStream& rng, ForceSample& out) const = 0;

  /// Clean potential energy U(q).
  virtual double potential(std::span<const double> q) const = 0;

  /// True when compute_force_with_covariance is implemented.
  virtual bool provides_covariance() const { return false; }

  /// Like compute_force, additionally filling out.cov_estimate (diagonal).
  /// The default throws ConfigError.
  virtual void compute_force_with_covariance(std::span<const double> q, RngStream& rng, ForceSample& out) const;

  ForceSample force(std::span<const double> q, RngStream& rng) const;

 protected:
  void check_dimension(std::span<const double> q) const;
};

/// Models whose gradient, Laplacian and noise amplitude are separately known.
/// Only these can drive the adaptive Brownian scheme.
class AnalyticModel {
 public:
  virtual ~AnalyticModel() = default;
  virtual void gradient(std::span<const double> q, std::span<double> out) const = 0;
  virtual double laplacian(std::span<const double> q) const = 0;
  virtual double noise_sigma() const = 0;
};

}  // namespace sgnht
