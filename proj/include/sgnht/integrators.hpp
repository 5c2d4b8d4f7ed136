#pragma once

// Exact sub-flow solvers for the adaptive Langevin (SGNHT) system, their
// composition into splitting schemes, and the first-order samplers.
//
// Sub-flows, all acting in place on a PhaseState:
//   A  q <- q + h M^-1 p
//   B  p <- p + h F~(q)               (force and its noise applied together)
//   O  p <- e^{-xi h} p + sigma_A sqrt((1 - e^{-2 xi h}) / (2 xi)) M^1/2 R
//   D  xi <- xi + h/mu (p^T M^-1 p - N_d kT)
//   P  Euler update of B + O, used only by the PAD scheme.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "sgnht/core.hpp"

namespace sgnht {

enum class Letter : char { A = 'A', B = 'B', O = 'O', D = 'D', P = 'P' };

struct SplittingScheme {
  std::string name;
  std::vector<Letter> letters;
  /// Fraction of the step length used by each letter; per letter they sum to 1.
  std::vector<double> fractions;
  bool symmetric = false;

  std::size_t size() const { return letters.size(); }
  bool uses(Letter l) const;
  std::string sequence() const;
};

/// Accepts any nonempty string over {A,B,O,D}, plus the names PAD, SGNHT-N
/// (the three-line Euler scheme) and SGNHT-S (alias of BADODAB).
SplittingScheme compile_scheme(std::string_view spec);

struct StepReport {
  std::size_t force_evaluations = 0;
  bool diverged = false;
};

/// Variance factor (1 - e^{-2 xi h}) / (2 xi) of the exact OU solve, with the
/// series h (1 - x + 2/3 x^2 - 1/3 x^3), x = xi h, for |x| below 1e-4.
double ou_variance_factor(double xi, double h);

void step_A(PhaseState& s, double h, const ThermostatParams& params);
void step_B(PhaseState& s, double h, const ForceSample& f);
void step_O(PhaseState& s, double h, const ThermostatParams& params, RngStream& rng);
void step_D(PhaseState& s, double h, const ThermostatParams& params);
/// PAD's combined stage: p <- p + h F~ - h xi p + sqrt(h) sigma_A M^1/2 R.
void step_P(PhaseState& s, double h, const ForceSample& f, const ThermostatParams& params, RngStream& rng);

/// Common interface of every stepping method driven by the harness.
class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual std::string name() const = 0;
  virtual StepReport step(PhaseState& s, double h, RngStream& rng) = 0;
  /// Clean potential at the current positions. May evaluate (and cache) a
  /// force sample that the next step consumes. NaN when the force is singular.
  virtual double potential(const PhaseState& s, RngStream& rng) = 0;
  /// Forgets any cached force; call after modifying the state externally.
  virtual void reset() = 0;
  virtual std::size_t total_force_evaluations() const = 0;
};

/// Runs a compiled splitting scheme. When force reuse is enabled, a force
/// evaluated at the current positions is kept and consumed by the next B
/// (or P) stage that sees the same positions, so BADODAB costs one
/// evaluation per step.
class SchemeIntegrator final : public Sampler {
 public:
  SchemeIntegrator(SplittingScheme scheme, const ForceModel& model, ThermostatParams params,
                   bool reuse_force = true);

  std::string name() const override { return scheme_.name; }
  StepReport step(PhaseState& s, double h, RngStream& rng) override;
  double potential(const PhaseState& s, RngStream& rng) override;
  void reset() override { cache_valid_ = false; }
  std::size_t total_force_evaluations() const override { return evaluations_; }

  const SplittingScheme& scheme() const { return scheme_; }
  const ThermostatParams& params() const { return params_; }

 private:
  const ForceSample& current_force(const PhaseState& s, RngStream& rng, StepReport& report);

  SplittingScheme scheme_;
  const ForceModel& model_;
  ThermostatParams params_;
  bool reuse_force_;
  bool leading_force_reusable_ = false;
  ForceSample cache_;
  bool cache_valid_ = false;
  std::size_t evaluations_ = 0;
};

/// One step of a splitting scheme with a fresh force at every B stage.
StepReport step_splitting(PhaseState& s, double h, const SplittingScheme& scheme, const ForceModel& model,
                          const ThermostatParams& params, RngStream& rng);

/// The SGNHT-N update: P, then A, then D.
StepReport step_sgnht_n(PhaseState& s, double h, const ForceModel& model, const ThermostatParams& params,
                        RngStream& rng);

/// q <- q + h F~(q) + sqrt(2 h / beta) R. Momentum and friction are ignored.
void step_sgld(PhaseState& s, double h, const ForceModel& model, const ThermostatParams& params, RngStream& rng);

/// SGLD with the noise premultiplied by (I - h/4 Cov F~), Cov taken diagonal
/// from the model's estimate. Throws ConfigError if the model has none.
void step_msgld(PhaseState& s, double h, const ForceModel& model, const ThermostatParams& params, RngStream& rng);

/// Euler discretization of the adaptive Brownian dynamics
///   q <- q - h xi grad U + sigma sqrt(h) R
///   xi <- xi + h (-laplacian U / beta + |grad U|^2)
/// using the model's separately known gradient, Laplacian and sigma.
void step_adaptive_brownian(PhaseState& s, double h, const AnalyticModel& model, const ThermostatParams& params,
                            RngStream& rng);

/// chi(q) = -laplacian U / beta + |grad U|^2.
double adaptive_brownian_drift(std::span<const double> q, const AnalyticModel& model, double beta);

/// First-order samplers wrapped for the harness. Both cache the force at the
/// current position the same way SchemeIntegrator does.
class SgldSampler final : public Sampler {
 public:
  SgldSampler(const ForceModel& model, ThermostatParams params, bool modified);
  std::string name() const override { return modified_ ? "mSGLD" : "SGLD"; }
  StepReport step(PhaseState& s, double h, RngStream& rng) override;
  double potential(const PhaseState& s, RngStream& rng) override;
  void reset() override { cache_valid_ = false; }
  std::size_t total_force_evaluations() const override { return evaluations_; }

 private:
  const ForceModel& model_;
  ThermostatParams params_;
  bool modified_;
  ForceSample cache_;
  bool cache_valid_ = false;
  std::size_t evaluations_ = 0;
  std::vector<double> noise_;
};

class AdaptiveBrownianSampler final : public Sampler {
 public:
  AdaptiveBrownianSampler(const ForceModel& model, const AnalyticModel& analytic, ThermostatParams params);
  std::string name() const override { return "adBD"; }
  StepReport step(PhaseState& s, double h, RngStream& rng) override;
  double potential(const PhaseState& s, RngStream&) override { return model_.potential(s.q); }
  void reset() override {}
  std::size_t total_force_evaluations() const override { return evaluations_; }

 private:
  const ForceModel& model_;
  const AnalyticModel& analytic_;
  ThermostatParams params_;
  std::size_t evaluations_ = 0;
};

/// Canonical method name for a user string: "SGLD", "mSGLD", "adBD", "PAD",
/// "BADODAB" or the verbatim letter sequence. Throws ConfigError otherwise.
std::string canonical_method(std::string_view method);

/// True for methods that evolve momentum and friction.
bool is_second_order(std::string_view method);

/// Builds a sampler for a method name. adBD requires the model to also be an
/// AnalyticModel.
std::unique_ptr<Sampler> make_sampler(std::string_view method, const ForceModel& model,
                                      const ThermostatParams& params);

}  // namespace sgnht
