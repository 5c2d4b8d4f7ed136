#include <cmath>
#include <limits>

#include "doctest.h"
#include "oracles.hpp"
#include "sgnht/integrators.hpp"
#include "sgnht/models.hpp"

using namespace sgnht;

namespace {

ThermostatParams noiseless(double mu = 10.0) {
  ThermostatParams p;
  p.beta = 1.0;
  p.sigma_a = 0.0;
  p.mu = mu;
  return p;
}

PhaseState random_state(std::size_t d, std::uint64_t seed, double xi) {
  RngStream rng(seed);
  return PhaseState(rng.standard_normals(d), rng.standard_normals(d), xi);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

// --- sub-flows ----------------------------------------------------------------

TEST_CASE("A drifts positions by h p / m") {
  const auto params = noiseless();
  PhaseState a({1.0}, {0.0}, 0.0);
  step_A(a, 0.1, params);
  CHECK(a.q[0] == 1.0);
  PhaseState b({0.0}, {2.0}, 0.0);
  step_A(b, 0.5, params);
  CHECK(b.q[0] == doctest::Approx(1.0));

  ThermostatParams heavy = params;
  heavy.mass = {4.0};
  PhaseState c({0.0}, {2.0}, 0.0);
  step_A(c, 0.5, heavy);
  CHECK(c.q[0] == doctest::Approx(0.25));
}

TEST_CASE("A is reversed by A with negative step") {
  const auto params = noiseless();
  PhaseState s = random_state(6, 11, 0.0);
  const auto q0 = s.q;
  step_A(s, 0.37, params);
  step_A(s, -0.37, params);
  CHECK(max_abs_diff(s.q, q0) < 1e-15);
}

TEST_CASE("B applies a constant kick") {
  PhaseState s({0.0}, {0.0}, 0.0);
  ForceSample f;
  f.force = {-1.0};
  step_B(s, 0.1, f);
  CHECK(s.p[0] == doctest::Approx(-0.1));

  PhaseState t = random_state(3, 2, 0.4);
  const PhaseState before = t;
  ForceSample zero;
  zero.force = {0.0, 0.0, 0.0};
  step_B(t, 0.2, zero);
  CHECK(t.p == before.p);
  CHECK(t.q == before.q);
}

TEST_CASE("B with injected noise accumulates variance h^2 sigma^2 per step") {
  HarmonicModel flat(1, 0.0, 1.0);
  RngStream rng(21);
  PhaseState s({0.0}, {0.0}, 0.0);
  const double h = 0.01;
  std::vector<double> dp;
  for (int i = 0; i < 100000; ++i) {
    const double before = s.p[0];
    step_B(s, h, flat.force(s.q, rng));
    dp.push_back(s.p[0] - before);
  }
  CHECK(std::abs(oracle::moments(dp).variance - h * h) / (h * h) < 0.03);
}

TEST_CASE("O decays momentum exactly without noise") {
  ThermostatParams params = noiseless();
  RngStream rng(1);
  PhaseState s({0.0}, {2.0}, 1.0);
  step_O(s, 0.1, params, rng);
  CHECK(s.p[0] == doctest::Approx(2.0 * std::exp(-0.1)).epsilon(1e-14));
}

TEST_CASE("O moments match the exact Ornstein-Uhlenbeck solution") {
  // Closed-form transition: mean p0 e^{-xi h}, variance sigma^2 (1 - e^{-2 xi h}) / (2 xi),
  // and sigma^2 h in the xi = 0 limit.
  auto exact_variance = [](double xi, double h, double sigma) {
    return xi == 0.0 ? sigma * sigma * h : sigma * sigma * (1.0 - std::exp(-2.0 * xi * h)) / (2.0 * xi);
  };
  struct Case {
    double xi;
    double h;
    double sigma;
    double p0;
  };
  const Case cases[] = {{0.0, 0.04, 3.0, 0.0}, {2.0, 0.3, 1.5, 1.0}, {-0.5, 0.1, 1.0, 0.5}};
  for (const auto& c : cases) {
    CAPTURE(c.xi);
    ThermostatParams params = noiseless();
    params.sigma_a = c.sigma;
    RngStream rng(77);
    std::vector<double> out;
    for (int i = 0; i < 100000; ++i) {
      PhaseState s({0.0}, {c.p0}, c.xi);
      step_O(s, c.h, params, rng);
      out.push_back(s.p[0]);
    }
    const auto m = oracle::moments(out);
    const double var = exact_variance(c.xi, c.h, c.sigma);
    CHECK(std::abs(m.variance - var) / var < 0.03);
    CHECK(std::abs(m.mean - c.p0 * std::exp(-c.xi * c.h)) < 4.0 * std::sqrt(var / 1e5));
  }
}

TEST_CASE("O is valid for negative friction") {
  const double xi = -0.5;
  const double h = 0.1;
  const double factor = ou_variance_factor(xi, h);
  CHECK(factor > 0.0);
  CHECK(factor == doctest::Approx((1.0 - std::exp(0.1)) / -1.0).epsilon(1e-14));
  ThermostatParams params = noiseless();
  RngStream rng(1);
  PhaseState s({0.0}, {1.0}, xi);
  step_O(s, h, params, rng);
  CHECK(s.p[0] == doctest::Approx(std::exp(0.05)).epsilon(1e-14));
}

TEST_CASE("O variance factor is continuous across the series switch") {
  const double h = 0.01;
  for (double xi : {-0.0099, -0.00999, 0.00999, 0.0099, 0.01001, 0.0101}) {
    CAPTURE(xi);
    // Direct long-double evaluation as the oracle.
    const long double x = static_cast<long double>(xi) * h;
    const long double direct = -std::expm1(-2.0L * x) / (2.0L * static_cast<long double>(xi));
    CHECK(std::abs(ou_variance_factor(xi, h) - static_cast<double>(direct)) < 1e-17);
  }
  CHECK(ou_variance_factor(0.0, h) == h);
}

TEST_CASE("D follows the kinetic-energy control law") {
  ThermostatParams params = noiseless(10.0);
  PhaseState fixed({0.0}, {1.0}, 0.25);
  step_D(fixed, 0.1, params);
  CHECK(fixed.xi == 0.25);

  PhaseState hot({0.0}, {2.0}, 0.0);
  step_D(hot, 0.1, params);
  CHECK(hot.xi == doctest::Approx(0.03));

  ThermostatParams unit = noiseless(1.0);
  PhaseState cold({0.0}, {0.0}, 0.0);
  step_D(cold, 1.0, unit);
  CHECK(cold.xi == doctest::Approx(-1.0));
}

TEST_CASE("D uses the configured degrees of freedom and masses") {
  ThermostatParams params = noiseless(2.0);
  params.mass = {4.0, 1.0};
  params.n_dof = 1;
  PhaseState s({0.0, 0.0}, {2.0, 1.0}, 0.0);
  step_D(s, 0.5, params);
  // p^T M^-1 p = 1 + 1 = 2, N_d kT = 1.
  CHECK(s.xi == doctest::Approx(0.25));
}

// --- scheme compilation ----------------------------------------------------------

TEST_CASE("BADODAB compiles to seven symmetric stages with a full O step") {
  const auto s = compile_scheme("BADODAB");
  CHECK(s.symmetric);
  CHECK(s.size() == 7);
  CHECK(s.sequence() == "BADODAB");
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s.fractions[i] == (s.letters[i] == Letter::O ? 1.0 : 0.5));
  }
  CHECK(compile_scheme("SGNHT-S").sequence() == "BADODAB");
}

TEST_CASE("PAD is not symmetric") {
  const auto s = compile_scheme("PAD");
  CHECK_FALSE(s.symmetric);
  CHECK(s.sequence() == "PAD");
  CHECK(compile_scheme("SGNHT-N").sequence() == "PAD");
}

TEST_CASE("other letter sequences") {
  CHECK(compile_scheme("BAB").symmetric);
  CHECK(compile_scheme("ABDODBA").symmetric);
  CHECK(compile_scheme("BAODOAB").symmetric);
  CHECK(compile_scheme("BAOAB").symmetric);
  CHECK_FALSE(compile_scheme("BAO").symmetric);
  CHECK_THROWS_AS(compile_scheme(""), ConfigError);
  CHECK_THROWS_AS(compile_scheme("BAX"), ConfigError);
}

TEST_CASE("BAB with thermostat switched off is velocity Verlet") {
  HarmonicModel model(1, 1.0, 0.0);
  const auto params = noiseless(std::numeric_limits<double>::max());
  const auto scheme = compile_scheme("BAB");
  RngStream rng(1);
  PhaseState s({1.0}, {0.3}, 0.0);
  double q = 1.0, p = 0.3;
  const double h = 0.2;
  for (int n = 0; n < 50; ++n) {
    step_splitting(s, h, scheme, model, params, rng);
    p -= 0.5 * h * q;
    q += h * p;
    p -= 0.5 * h * q;
  }
  CHECK(s.q[0] == doctest::Approx(q).epsilon(1e-13));
  CHECK(s.p[0] == doctest::Approx(p).epsilon(1e-13));
}

// --- PAD -------------------------------------------------------------------------

TEST_CASE("PAD step evaluated by hand") {
  HarmonicModel model(1, 1.0, 0.0);
  const auto params = noiseless(10.0);
  RngStream rng(1);
  PhaseState s({1.0}, {0.0}, 0.0);
  step_sgnht_n(s, 0.1, model, params, rng);
  // P: p = 0 + 0.1 * (-1) = -0.1; A: q = 1 + 0.1 * (-0.1) = 0.99;
  // D: xi = 0 + 0.1 / 10 * (0.01 - 1).
  CHECK(s.p[0] == doctest::Approx(-0.1));
  CHECK(s.q[0] == doctest::Approx(0.99));
  CHECK(s.xi == doctest::Approx(0.01 * (0.01 - 1.0)));
}

TEST_CASE("PAD friction decays momentum geometrically on a flat potential") {
  HarmonicModel flat(1, 0.0, 0.0);
  const auto params = noiseless(std::numeric_limits<double>::max());
  RngStream rng(1);
  const double h = 0.05, gamma = 2.0;
  PhaseState s({0.0}, {1.0}, gamma);
  double expected = 1.0;
  for (int n = 0; n < 20; ++n) {
    step_sgnht_n(s, h, flat, params, rng);
    expected *= 1.0 - h * gamma;
    CHECK(s.p[0] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("PAD becomes unstable at a smaller stepsize than BADODAB") {
  HarmonicModel model(1, 1.0, 0.0);
  ThermostatParams params;
  params.sigma_a = 1.0;
  params.mu = 10.0;
  auto first_unstable = [&](const std::string& method) {
    for (int k = 1; k <= 25; ++k) {
      const double h = 0.08 * k;
      auto sampler = make_sampler(method, model, params);
      RngStream rng(derive_seed(5, {static_cast<std::uint64_t>(k)}));
      PhaseState s({1.0}, {0.0}, params.stationary_xi());
      for (int n = 0; n < 20000; ++n) {
        if (sampler->step(s, h, rng).diverged || std::abs(s.q[0]) > 1e6) return h;
      }
    }
    return std::numeric_limits<double>::infinity();
  };
  const double pad = first_unstable("PAD");
  const double badodab = first_unstable("BADODAB");
  CHECK(std::isfinite(pad));
  CHECK(pad < badodab);
}

// --- BADODAB -------------------------------------------------------------------

TEST_CASE("BADODAB with noise and thermostat off reduces to velocity Verlet") {
  HarmonicModel model(1, 1.0, 0.0);
  SchemeIntegrator integrator(compile_scheme("BADODAB"), model, noiseless(std::numeric_limits<double>::max()));
  RngStream rng(1);
  PhaseState s({1.0}, {0.0}, 0.0);
  const double h = 0.1;
  const double e0 = 0.5;
  double max_err = 0.0, early = 0.0, late = 0.0;
  double q = 1.0, p = 0.0;
  for (int n = 0; n < 1000; ++n) {
    integrator.step(s, h, rng);
    p -= 0.5 * h * q;
    q += h * p;
    p -= 0.5 * h * q;
    const double err = std::abs(0.5 * s.p[0] * s.p[0] + 0.5 * s.q[0] * s.q[0] - e0);
    max_err = std::max(max_err, err);
    if (n < 100) early = std::max(early, err);
    if (n >= 900) late = std::max(late, err);
  }
  CHECK(s.q[0] == doctest::Approx(q).epsilon(1e-10));
  CHECK(s.p[0] == doctest::Approx(p).epsilon(1e-10));
  // Verlet's shadow energy bounds the error by O(h^2) with no secular growth.
  CHECK(max_err < h * h);
  CHECK(late < 1.5 * early);
}

TEST_CASE("BADODAB step equals its composition of sub-flows") {
  PendulumSystem model(PendulumParams{64, 4.0, 25.0, 1.0});
  const auto params = noiseless(10.0);
  PhaseState s(model.grid_positions(), 0.3);
  RngStream init(4);
  for (auto& v : s.q) v += 0.05 * init.normal();
  for (auto& v : s.p) v = init.normal();
  PhaseState manual = s;

  RngStream rng(9);
  RngStream rng2(9);
  SchemeIntegrator integrator(compile_scheme("BADODAB"), model, params);
  integrator.step(s, 0.05, rng);

  const double h = 0.05;
  step_B(manual, h / 2, model.force(manual.q, rng2));
  step_A(manual, h / 2, params);
  step_D(manual, h / 2, params);
  step_O(manual, h, params, rng2);
  step_D(manual, h / 2, params);
  step_A(manual, h / 2, params);
  step_B(manual, h / 2, model.force(manual.q, rng2));

  CHECK(max_abs_diff(s.q, manual.q) == 0.0);
  CHECK(max_abs_diff(s.p, manual.p) == 0.0);
  CHECK(s.xi == manual.xi);
}

TEST_CASE("BADODAB needs one force evaluation per step") {
  HarmonicModel model(3, 1.0, 0.5);
  ThermostatParams params;
  params.sigma_a = 1.0;
  SchemeIntegrator integrator(compile_scheme("BADODAB"), model, params);
  RngStream rng(3);
  PhaseState s({0.1, 0.2, 0.3}, 0.5);
  // The first step also evaluates the leading force; afterwards the trailing
  // force of one step is the leading force of the next.
  CHECK(integrator.step(s, 0.1, rng).force_evaluations == 2);
  for (int n = 0; n < 100; ++n) CHECK(integrator.step(s, 0.1, rng).force_evaluations == 1);
  CHECK(integrator.total_force_evaluations() == 102);
  // A potential query between steps is served from the cached force.
  integrator.potential(s, rng);
  CHECK(integrator.step(s, 0.1, rng).force_evaluations == 1);
  CHECK(integrator.total_force_evaluations() == 103);
}

TEST_CASE("symmetric schemes are time reversible with noise off") {
  PendulumSystem model(PendulumParams{64, 4.0, 25.0, 1.0});
  const auto params = noiseless(10.0);
  for (const char* name : {"BADODAB", "ABDODBA", "BAOAB", "BAB", "BAODOAB"}) {
    CAPTURE(name);
    const auto scheme = compile_scheme(name);
    REQUIRE(scheme.symmetric);
    PhaseState s(model.grid_positions(), 0.2);
    RngStream init(8);
    for (auto& v : s.q) v += 0.05 * init.normal();
    for (auto& v : s.p) v = init.normal();
    const PhaseState start = s;
    RngStream rng(1);
    step_splitting(s, 0.02, scheme, model, params, rng);
    step_splitting(s, -0.02, scheme, model, params, rng);
    CHECK(max_abs_diff(s.q, start.q) < 1e-12);
    CHECK(max_abs_diff(s.p, start.p) < 1e-12);
    CHECK(std::abs(s.xi - start.xi) < 1e-12);
  }
}

TEST_CASE("a singular force marks the step diverged") {
  PendulumSystem model(PendulumParams{64, 4.0, 25.0, 1.0});
  PhaseState s(model.grid_positions(), 0.0);
  s.q[3] = s.q[0];
  s.q[4] = s.q[1];
  s.q[5] = s.q[2];
  SchemeIntegrator integrator(compile_scheme("BADODAB"), model, noiseless());
  RngStream rng(1);
  CHECK(integrator.step(s, 0.01, rng).diverged);
  CHECK(std::isnan(integrator.potential(s, rng)));
}

// --- SGLD family ------------------------------------------------------------------

TEST_CASE("SGLD diffuses with variance 2h/beta") {
  HarmonicModel flat(1, 0.0, 0.0);
  ThermostatParams params;
  RngStream rng(13);
  PhaseState s({0.0}, 0.0);
  const double h = 0.02;
  std::vector<double> dq;
  for (int i = 0; i < 100000; ++i) {
    const double before = s.q[0];
    step_sgld(s, h, flat, params, rng);
    dq.push_back(s.q[0] - before);
  }
  CHECK(std::abs(oracle::moments(dq).variance - 2.0 * h) / (2.0 * h) < 0.03);
}

TEST_CASE("SGLD samples the unit harmonic oscillator for small h") {
  HarmonicModel model(1, 1.0, 0.0);
  ThermostatParams params;
  RngStream rng(17);
  PhaseState s({0.0}, 0.0);
  std::vector<double> qs;
  for (int i = 0; i < 2000000; ++i) {
    step_sgld(s, 0.01, model, params, rng);
    if (i >= 10000) qs.push_back(s.q[0]);
  }
  CHECK(std::abs(oracle::moments(qs).variance - 1.0) < 0.05);
}

TEST_CASE("mSGLD with zero force covariance is SGLD") {
  HarmonicModel model(2, 1.0, 0.0);
  ThermostatParams params;
  PhaseState a({0.4, -0.2}, 0.0);
  PhaseState b = a;
  RngStream ra(3), rb(3);
  for (int n = 0; n < 10; ++n) {
    step_sgld(a, 0.05, model, params, ra);
    step_msgld(b, 0.05, model, params, rb);
  }
  CHECK(a.q == b.q);
}

TEST_CASE("mSGLD scales the noise by 1 - h/4 Cov F") {
  RngStream data_rng(1);
  std::vector<double> data = data_rng.standard_normals(100);
  GaussianMeanModel model(data, 1.0, 10, MinibatchSampling::with_replacement);
  const double var_x = oracle::moments(data).variance;
  CHECK(model.force_variance() == doctest::Approx(990.0 * var_x));
  const double h = 0.001;
  const double expected = 1.0 - h / 4.0 * 990.0 * var_x;
  // With a unit data variance the multiplier is 1 - 0.2475.
  CHECK(std::abs(expected - (1.0 - 0.2475)) < 0.2475 * std::abs(var_x - 1.0) + 1e-12);

  ThermostatParams params;
  PhaseState a({0.1}, 0.0), b({0.1}, 0.0);
  RngStream ra(8), rb(8), rf(8);
  step_sgld(a, h, model, params, ra);
  step_msgld(b, h, model, params, rb);
  const double f = model.force(std::vector<double>{0.1}, rf).force[0];
  const double noise_plain = a.q[0] - 0.1 - h * f;
  const double noise_mod = b.q[0] - 0.1 - h * f;
  CHECK(noise_mod / noise_plain == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("mSGLD requires a force covariance") {
  PendulumSystem model(PendulumParams{64, 4.0, 25.0, 1.0});
  CHECK_THROWS_AS(make_sampler("mSGLD", model, ThermostatParams{}), ConfigError);
}

// --- adaptive Brownian dynamics ---------------------------------------------------------

TEST_CASE("adaptive Brownian drift on the unit harmonic oscillator") {
  HarmonicModel model(1, 1.0, 1.0);
  for (double q : {-1.5, 0.0, 0.3, 2.0}) {
    const std::vector<double> x{q};
    CHECK(adaptive_brownian_drift(x, model, 1.0) == doctest::Approx(-1.0 + q * q));
  }
}

TEST_CASE("noiseless adaptive Brownian dynamics at zero temperature is a preconditioned descent") {
  // Without noise the Laplacian term of the friction drift must vanish too
  // (beta -> infinity); otherwise the friction is driven negative.
  HarmonicModel model(1, 1.0, 0.0);
  ThermostatParams params;
  params.beta = 1e12;
  RngStream rng(1);
  PhaseState s({2.0}, 1.0);
  double prev = std::abs(s.q[0]);
  for (int n = 0; n < 2000; ++n) {
    step_adaptive_brownian(s, 0.01, model, params, rng);
    CHECK(std::abs(s.q[0]) <= prev);
    prev = std::abs(s.q[0]);
  }
  CHECK(std::abs(s.q[0]) < 1e-3);
}

TEST_CASE("adaptive Brownian dynamics requires an analytic model") {
  PendulumSystem model(PendulumParams{64, 4.0, 25.0, 1.0});
  CHECK_THROWS_AS(make_sampler("adBD", model, ThermostatParams{}), ConfigError);
}

TEST_CASE("method names") {
  CHECK(canonical_method("SGNHT-S") == "BADODAB");
  CHECK(canonical_method("SGNHT-N") == "PAD");
  CHECK(canonical_method("MSGLD") == "mSGLD");
  CHECK(canonical_method("BAOAB") == "BAOAB");
  CHECK_THROWS_AS(canonical_method("Euler"), ConfigError);
  CHECK(is_second_order("BADODAB"));
  CHECK(is_second_order("PAD"));
  CHECK_FALSE(is_second_order("SGLD"));
  CHECK_FALSE(is_second_order("adBD"));
}
