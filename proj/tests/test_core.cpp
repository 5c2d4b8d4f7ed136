#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "sgnht/core.hpp"
#include "sgnht/models.hpp"

using namespace sgnht;

TEST_CASE("standard normals obey the law of large numbers") {
  RngStream rng(1, {0, 0});
  const auto xs = draw_standard_normals(rng, 1000000);
  const auto m = oracle::moments(xs);
  CHECK(std::abs(m.mean) < 5e-3);
  CHECK(std::abs(m.variance - 1.0) < 1e-2);
}

TEST_CASE("identical seed and stream give identical draws") {
  RngStream a(7, {3, 1});
  RngStream b(7, {3, 1});
  CHECK(draw_standard_normals(a, 1000) == draw_standard_normals(b, 1000));
}

TEST_CASE("distinct streams are uncorrelated") {
  RngStream a(1, {0, 0});
  RngStream b(1, {0, 1});
  RngStream c(1, {1, 0});
  const auto xa = draw_standard_normals(a, 100000);
  const auto xb = draw_standard_normals(b, 100000);
  const auto xc = draw_standard_normals(c, 100000);
  CHECK(std::abs(oracle::correlation(xa, xb)) < 0.01);
  CHECK(std::abs(oracle::correlation(xa, xc)) < 0.01);
  CHECK(std::abs(oracle::correlation(xb, xc)) < 0.01);
}

TEST_CASE("drawing zero normals is rejected") {
  RngStream rng(1);
  CHECK_THROWS_AS(draw_standard_normals(rng, 0), ConfigError);
}

TEST_CASE("uniform and index stay in range") {
  RngStream rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.index(7) < 7u);
  }
}

TEST_CASE("derived seeds depend on every index and their order") {
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(2, {2, 3}));
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
}

TEST_CASE("phase state validation") {
  CHECK_THROWS_AS(PhaseState(std::vector<double>{}), ConfigError);
  CHECK_THROWS_AS(PhaseState({1.0, 2.0}, {1.0}, 0.0), ConfigError);
  PhaseState s({1.0, 2.0}, 0.5);
  CHECK(s.p == std::vector<double>{0.0, 0.0});
  CHECK(s.finite());
  s.p[1] = std::nan("");
  CHECK_FALSE(s.finite());
}

TEST_CASE("thermostat parameter validation names the field") {
  ThermostatParams p;
  p.mu = 0.0;
  try {
    p.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("mu") != std::string::npos);
  }
  ThermostatParams q;
  q.sigma_a = -1.0;
  CHECK_THROWS_AS(q.validate(), ConfigError);
}

TEST_CASE("stationary friction") {
  ThermostatParams p;
  p.beta = 1.0;
  p.sigma_a = 1.0;
  const double sigma_f = std::sqrt(0.01);
  CHECK(p.stationary_xi(sigma_f) == doctest::Approx((0.01 + 1.0) / 2.0));
}

TEST_CASE("clean harmonic force") {
  HarmonicModel model(1, 1.0, 0.0);
  RngStream rng(1);
  const std::vector<double> q{0.5};
  CHECK(model.force(q, rng).force[0] == doctest::Approx(-0.5));
  CHECK_FALSE(model.force(q, rng).is_stochastic);
}

TEST_CASE("injected force noise has the configured variance") {
  HarmonicModel flat(1, 0.0, 2.0);
  RngStream rng(5);
  const std::vector<double> q{0.3};
  std::vector<double> fs;
  for (int i = 0; i < 100000; ++i) fs.push_back(flat.force(q, rng).force[0]);
  const auto m = oracle::moments(fs);
  CHECK(std::abs(m.variance - 4.0) / 4.0 < 0.02);
}

TEST_CASE("force models check the position dimension") {
  HarmonicModel model(2);
  RngStream rng(1);
  const std::vector<double> q{1.0};
  CHECK_THROWS_AS(model.force(q, rng), ConfigError);
}
