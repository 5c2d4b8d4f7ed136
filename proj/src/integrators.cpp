#include "sgnht/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sgnht {

bool SplittingScheme::uses(Letter l) const { return std::find(letters.begin(), letters.end(), l) != letters.end(); }

std::string SplittingScheme::sequence() const {
  std::string out;
  out.reserve(letters.size());
  for (Letter l : letters) out.push_back(static_cast<char>(l));
  return out;
}

SplittingScheme compile_scheme(std::string_view spec) {
  if (spec == "PAD" || spec == "SGNHT-N") {
    return SplittingScheme{"PAD", {Letter::P, Letter::A, Letter::D}, {1.0, 1.0, 1.0}, false};
  }
  if (spec == "SGNHT-S") spec = "BADODAB";
  if (spec.empty()) throw ConfigError("scheme string is empty");

  SplittingScheme scheme;
  scheme.name = std::string(spec);
  int counts[4] = {0, 0, 0, 0};
  auto slot = [](char c) {
    switch (c) {
      case 'A': return 0;
      case 'B': return 1;
      case 'O': return 2;
      case 'D': return 3;
      default: return -1;
    }
  };
  for (char c : spec) {
    const int k = slot(c);
    if (k < 0) throw ConfigError(std::string("scheme '") + std::string(spec) + "': invalid letter '" + c + "'");
    ++counts[k];
    scheme.letters.push_back(static_cast<Letter>(c));
  }
  for (char c : spec) scheme.fractions.push_back(1.0 / counts[slot(c)]);

  scheme.symmetric = true;
  const std::size_t n = scheme.letters.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    if (scheme.letters[i] != scheme.letters[n - 1 - i] || scheme.fractions[i] != scheme.fractions[n - 1 - i]) {
      scheme.symmetric = false;
      break;
    }
  }
  return scheme;
}

double ou_variance_factor(double xi, double h) {
  const double x = xi * h;
  if (std::abs(x) < 1e-4) return h * (1.0 - x + (2.0 / 3.0) * x * x - (1.0 / 3.0) * x * x * x);
  return -std::expm1(-2.0 * x) / (2.0 * xi);
}

void step_A(PhaseState& s, double h, const ThermostatParams& params) {
  const std::size_t n = s.q.size();
  if (params.mass.empty()) {
    for (std::size_t i = 0; i < n; ++i) s.q[i] += h * s.p[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) s.q[i] += h * s.p[i] / params.mass[i];
  }
}

void step_B(PhaseState& s, double h, const ForceSample& f) {
  const std::size_t n = s.p.size();
  for (std::size_t i = 0; i < n; ++i) s.p[i] += h * f.force[i];
}

void step_O(PhaseState& s, double h, const ThermostatParams& params, RngStream& rng) {
  const double decay = std::exp(-s.xi * h);
  // With no injected noise the variance factor is irrelevant; skipping it keeps
  // the noiseless flow defined for negative h (used by reversibility checks).
  const double amp = params.sigma_a > 0.0 ? params.sigma_a * std::sqrt(ou_variance_factor(s.xi, h)) : 0.0;
  const std::size_t n = s.p.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = rng.normal();
    const double sqrt_m = params.mass.empty() ? 1.0 : std::sqrt(params.mass[i]);
    s.p[i] = decay * s.p[i] + amp * sqrt_m * r;
  }
}

namespace {

double kinetic_twice(const PhaseState& s, const ThermostatParams& params) {
  double sum = 0.0;
  const std::size_t n = s.p.size();
  if (params.mass.empty()) {
    for (std::size_t i = 0; i < n; ++i) sum += s.p[i] * s.p[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) sum += s.p[i] * s.p[i] / params.mass[i];
  }
  return sum;
}

}  // namespace

void step_D(PhaseState& s, double h, const ThermostatParams& params) {
  const double target = static_cast<double>(params.dof_for(s.p.size())) * params.kT();
  s.xi += h / params.mu * (kinetic_twice(s, params) - target);
}

void step_P(PhaseState& s, double h, const ForceSample& f, const ThermostatParams& params, RngStream& rng) {
  const double sqrt_h = std::sqrt(h);
  const double xi = s.xi;
  const std::size_t n = s.p.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = rng.normal();
    const double sqrt_m = params.mass.empty() ? 1.0 : std::sqrt(params.mass[i]);
    s.p[i] = s.p[i] + h * f.force[i] - h * xi * s.p[i] + sqrt_h * params.sigma_a * sqrt_m * r;
  }
}

// ---------------------------------------------------------------------------

SchemeIntegrator::SchemeIntegrator(SplittingScheme scheme, const ForceModel& model, ThermostatParams params,
                                   bool reuse_force)
    : scheme_(std::move(scheme)), model_(model), params_(std::move(params)), reuse_force_(reuse_force) {
  params_.validate();
  if (scheme_.letters.empty()) throw ConfigError("empty splitting scheme");
  if (!params_.mass.empty() && params_.mass.size() != model_.dimension()) {
    throw ConfigError("thermostat.mass length does not match model dimension");
  }
  // A force at the step's starting positions is useful only if a force stage
  // comes before the first drift.
  for (Letter l : scheme_.letters) {
    if (l == Letter::A) break;
    if (l == Letter::B || l == Letter::P) {
      leading_force_reusable_ = true;
      break;
    }
  }
}

const ForceSample& SchemeIntegrator::current_force(const PhaseState& s, RngStream& rng, StepReport& report) {
  if (reuse_force_ && cache_valid_) return cache_;
  model_.compute_force(s.q, rng, cache_);
  ++evaluations_;
  ++report.force_evaluations;
  cache_valid_ = reuse_force_;
  return cache_;
}

StepReport SchemeIntegrator::step(PhaseState& s, double h, RngStream& rng) {
  StepReport report;
  try {
    for (std::size_t i = 0; i < scheme_.letters.size(); ++i) {
      const double sub = h * scheme_.fractions[i];
      switch (scheme_.letters[i]) {
        case Letter::A:
          step_A(s, sub, params_);
          cache_valid_ = false;
          break;
        case Letter::B:
          step_B(s, sub, current_force(s, rng, report));
          break;
        case Letter::O:
          step_O(s, sub, params_, rng);
          break;
        case Letter::D:
          step_D(s, sub, params_);
          break;
        case Letter::P:
          step_P(s, sub, current_force(s, rng, report), params_, rng);
          break;
      }
    }
  } catch (const SingularityError&) {
    cache_valid_ = false;
    report.diverged = true;
    return report;
  }
  report.diverged = !s.finite();
  return report;
}

double SchemeIntegrator::potential(const PhaseState& s, RngStream& rng) {
  if (reuse_force_ && !cache_valid_ && leading_force_reusable_) {
    try {
      model_.compute_force(s.q, rng, cache_);
    } catch (const SingularityError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    ++evaluations_;
    cache_valid_ = true;
  }
  if (reuse_force_ && cache_valid_ && std::isfinite(cache_.potential)) return cache_.potential;
  return model_.potential(s.q);
}

StepReport step_splitting(PhaseState& s, double h, const SplittingScheme& scheme, const ForceModel& model,
                          const ThermostatParams& params, RngStream& rng) {
  SchemeIntegrator integrator(scheme, model, params, false);
  return integrator.step(s, h, rng);
}

StepReport step_sgnht_n(PhaseState& s, double h, const ForceModel& model, const ThermostatParams& params,
                        RngStream& rng) {
  static const SplittingScheme pad = compile_scheme("PAD");
  return step_splitting(s, h, pad, model, params, rng);
}

// ---------------------------------------------------------------------------

namespace {

void sgld_update(PhaseState& s, double h, const ForceSample& f, const ThermostatParams& params, RngStream& rng,
                 bool modified) {
  const double scale = std::sqrt(2.0 * h / params.beta);
  const std::size_t n = s.q.size();
  for (std::size_t i = 0; i < n; ++i) {
    double noise = scale * rng.normal();
    if (modified) noise *= 1.0 - 0.25 * h * (*f.cov_estimate)[i];
    s.q[i] += h * f.force[i] + noise;
  }
}

}  // namespace

void step_sgld(PhaseState& s, double h, const ForceModel& model, const ThermostatParams& params, RngStream& rng) {
  ForceSample f;
  model.compute_force(s.q, rng, f);
  sgld_update(s, h, f, params, rng, false);
}

void step_msgld(PhaseState& s, double h, const ForceModel& model, const ThermostatParams& params, RngStream& rng) {
  if (!model.provides_covariance()) throw ConfigError("mSGLD: " + model.name() + " provides no force covariance");
  ForceSample f;
  model.compute_force_with_covariance(s.q, rng, f);
  if (!f.cov_estimate || f.cov_estimate->size() != s.q.size()) {
    throw ConfigError("mSGLD: missing covariance estimate from " + model.name());
  }
  sgld_update(s, h, f, params, rng, true);
}

double adaptive_brownian_drift(std::span<const double> q, const AnalyticModel& model, double beta) {
  std::vector<double> grad(q.size());
  model.gradient(q, grad);
  double norm2 = 0.0;
  for (double g : grad) norm2 += g * g;
  return -model.laplacian(q) / beta + norm2;
}

void step_adaptive_brownian(PhaseState& s, double h, const AnalyticModel& model, const ThermostatParams& params,
                            RngStream& rng) {
  std::vector<double> grad(s.q.size());
  model.gradient(s.q, grad);
  double norm2 = 0.0;
  for (double g : grad) norm2 += g * g;
  const double chi = -model.laplacian(s.q) / params.beta + norm2;
  const double noise = model.noise_sigma() * std::sqrt(h);
  for (std::size_t i = 0; i < s.q.size(); ++i) s.q[i] += -h * s.xi * grad[i] + noise * rng.normal();
  s.xi += h * chi;
}

// ---------------------------------------------------------------------------

SgldSampler::SgldSampler(const ForceModel& model, ThermostatParams params, bool modified)
    : model_(model), params_(std::move(params)), modified_(modified) {
  params_.validate();
  if (modified_ && !model_.provides_covariance()) {
    throw ConfigError("mSGLD: " + model_.name() + " provides no force covariance");
  }
}

StepReport SgldSampler::step(PhaseState& s, double h, RngStream& rng) {
  StepReport report;
  try {
    if (!cache_valid_) {
      if (modified_) {
        model_.compute_force_with_covariance(s.q, rng, cache_);
      } else {
        model_.compute_force(s.q, rng, cache_);
      }
      ++evaluations_;
      ++report.force_evaluations;
    }
    cache_valid_ = false;
    sgld_update(s, h, cache_, params_, rng, modified_);
  } catch (const SingularityError&) {
    report.diverged = true;
    return report;
  }
  report.diverged = !s.finite();
  return report;
}

double SgldSampler::potential(const PhaseState& s, RngStream& rng) {
  if (!cache_valid_) {
    try {
      if (modified_) {
        model_.compute_force_with_covariance(s.q, rng, cache_);
      } else {
        model_.compute_force(s.q, rng, cache_);
      }
    } catch (const SingularityError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    ++evaluations_;
    cache_valid_ = true;
  }
  return std::isfinite(cache_.potential) ? cache_.potential : model_.potential(s.q);
}

AdaptiveBrownianSampler::AdaptiveBrownianSampler(const ForceModel& model, const AnalyticModel& analytic,
                                                 ThermostatParams params)
    : model_(model), analytic_(analytic), params_(std::move(params)) {
  params_.validate();
}

StepReport AdaptiveBrownianSampler::step(PhaseState& s, double h, RngStream& rng) {
  StepReport report;
  step_adaptive_brownian(s, h, analytic_, params_, rng);
  ++evaluations_;
  report.force_evaluations = 1;
  report.diverged = !s.finite();
  return report;
}

// ---------------------------------------------------------------------------

std::string canonical_method(std::string_view method) {
  if (method == "SGLD") return "SGLD";
  if (method == "mSGLD" || method == "MSGLD") return "mSGLD";
  if (method == "adBD" || method == "adaptive-brownian") return "adBD";
  return compile_scheme(method).name;
}

bool is_second_order(std::string_view method) {
  const std::string m = canonical_method(method);
  return m != "SGLD" && m != "mSGLD" && m != "adBD";
}

std::unique_ptr<Sampler> make_sampler(std::string_view method, const ForceModel& model,
                                      const ThermostatParams& params) {
  const std::string m = canonical_method(method);
  if (m == "SGLD") return std::make_unique<SgldSampler>(model, params, false);
  if (m == "mSGLD") return std::make_unique<SgldSampler>(model, params, true);
  if (m == "adBD") {
    const auto* analytic = dynamic_cast<const AnalyticModel*>(&model);
    if (analytic == nullptr) {
      throw ConfigError("adBD: " + model.name() + " does not expose gradient, Laplacian and sigma separately");
    }
    return std::make_unique<AdaptiveBrownianSampler>(model, *analytic, params);
  }
  return std::make_unique<SchemeIntegrator>(compile_scheme(method), model, params);
}

}  // namespace sgnht
