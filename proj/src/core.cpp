#include "sgnht/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sgnht {

PhaseState::PhaseState(std::vector<double> positions, double friction)
    : q(std::move(positions)), p(q.size(), 0.0), xi(friction) {
  if (q.empty()) throw ConfigError("PhaseState: need at least one degree of freedom");
}

PhaseState::PhaseState(std::vector<double> positions, std::vector<double> momenta, double friction)
    : q(std::move(positions)), p(std::move(momenta)), xi(friction) {
  if (q.empty()) throw ConfigError("PhaseState: need at least one degree of freedom");
  if (q.size() != p.size()) throw ConfigError("PhaseState: q and p lengths differ");
}

bool PhaseState::finite() const {
  if (!std::isfinite(xi)) return false;
  auto ok = [](double v) { return std::isfinite(v); };
  return std::all_of(q.begin(), q.end(), ok) && std::all_of(p.begin(), p.end(), ok);
}

void ThermostatParams::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("thermostat.beta must be > 0");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("thermostat.mu must be > 0");
  if (!(sigma_a >= 0.0) || !std::isfinite(sigma_a)) throw ConfigError("thermostat.sigma_a must be >= 0");
  for (double m : mass) {
    if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("thermostat.mass entries must be > 0");
  }
}

double ThermostatParams::stationary_xi(double sigma_f) const {
  return beta * (sigma_f * sigma_f + sigma_a * sigma_a) / 2.0;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> indices) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t i : indices) h = mix64(h ^ mix64(i + 0x632be59bd9b4e019ULL));
  return h;
}

RngStream::RngStream(std::uint64_t seed, StreamId id) : seed_(seed), id_(id) {
  const std::uint64_t s = derive_seed(seed, {id.run, id.trajectory});
  // Expand to a full seed sequence so nearby seeds do not share state.
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                    static_cast<std::uint32_t>(mix64(s)), static_cast<std::uint32_t>(mix64(s) >> 32)};
  engine_.seed(seq);
}

void RngStream::fill_normal(std::span<double> out) {
  for (double& v : out) v = normal_(engine_);
}

std::vector<double> RngStream::standard_normals(std::size_t n) {
  std::vector<double> out(n);
  fill_normal(out);
  return out;
}

double RngStream::uniform() { return std::generate_canonical<double, 53>(engine_); }

std::size_t RngStream::index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

std::vector<double> draw_standard_normals(RngStream& rng, std::size_t n) {
  if (n < 1) throw ConfigError("draw_standard_normals: n must be >= 1");
  return rng.standard_normals(n);
}

ForceSample ForceModel::force(std::span<const double> q, RngStream& rng) const {
  ForceSample out;
  compute_force(q, rng, out);
  return out;
}

void ForceModel::compute_force_with_covariance(std::span<const double>, RngStream&, ForceSample&) const {
  throw ConfigError(name() + ": model does not provide a force covariance estimate");
}

void ForceModel::check_dimension(std::span<const double> q) const {
  if (q.size() != dimension()) {
    std::ostringstream msg;
    msg << name() << ": position has " << q.size() << " entries, model expects " << dimension();
    throw ConfigError(msg.str());
  }
}

}  // namespace sgnht
