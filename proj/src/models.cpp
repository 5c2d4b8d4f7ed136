#include "sgnht/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace sgnht {

// --- harmonic ---------------------------------------------------------------

HarmonicModel::HarmonicModel(std::size_t dim, double stiffness, double sigma, std::vector<double> mass)
    : dim_(dim), stiffness_(stiffness), sigma_(sigma), mass_(std::move(mass)) {
  if (dim_ == 0) throw ConfigError("harmonic: dimension must be >= 1");
  if (!(sigma_ >= 0.0)) throw ConfigError("harmonic: sigma must be >= 0");
  if (!mass_.empty() && mass_.size() != dim_) throw ConfigError("harmonic: mass length must equal dimension");
}

void HarmonicModel::compute_force(std::span<const double> q, RngStream& rng, ForceSample& out) const {
  check_dimension(q);
  out.force.resize(dim_);
  for (std::size_t i = 0; i < dim_; ++i) out.force[i] = -stiffness_ * q[i];
  if (sigma_ > 0.0) {
    for (std::size_t i = 0; i < dim_; ++i) {
      const double sqrt_m = mass_.empty() ? 1.0 : std::sqrt(mass_[i]);
      out.force[i] += sigma_ * sqrt_m * rng.normal();
    }
  }
  out.is_stochastic = sigma_ > 0.0;
  out.cov_estimate.reset();
  out.potential = potential(q);
}

void HarmonicModel::compute_force_with_covariance(std::span<const double> q, RngStream& rng,
                                                  ForceSample& out) const {
  compute_force(q, rng, out);
  std::vector<double> cov(dim_);
  for (std::size_t i = 0; i < dim_; ++i) cov[i] = sigma_ * sigma_ * (mass_.empty() ? 1.0 : mass_[i]);
  out.cov_estimate = std::move(cov);
}

double HarmonicModel::potential(std::span<const double> q) const {
  double sum = 0.0;
  for (double v : q) sum += v * v;
  return 0.5 * stiffness_ * sum;
}

void HarmonicModel::gradient(std::span<const double> q, std::span<double> out) const {
  for (std::size_t i = 0; i < dim_; ++i) out[i] = stiffness_ * q[i];
}

double HarmonicModel::laplacian(std::span<const double>) const { return stiffness_ * static_cast<double>(dim_); }

// --- pendulum ---------------------------------------------------------------

PendulumSystem::PendulumSystem(PendulumParams params) : params_(params) {
  if (params_.n_particles < 2) throw ConfigError("pendulum.n_particles must be >= 2");
  if (!(params_.density > 0.0)) throw ConfigError("pendulum.density must be > 0");
  if (!(params_.k_spring > 0.0)) throw ConfigError("pendulum.k_spring must be > 0");
  if (!(params_.r_cut > 0.0)) throw ConfigError("pendulum.r_cut must be > 0");
  box_ = std::cbrt(static_cast<double>(params_.n_particles) / params_.density);
  if (params_.r_cut > box_ / 2.0) {
    throw ConfigError("pendulum.r_cut exceeds half the box side; minimum image is invalid");
  }
  cells_ = static_cast<std::size_t>(std::floor(box_ / params_.r_cut));
}

double PendulumSystem::pair_energy(double r) const {
  if (r >= params_.r_cut) return 0.0;
  const double d = r - params_.r_cut;
  return 0.5 * params_.k_spring * d * d;
}

double PendulumSystem::pair_laplacian(double r) const {
  if (r >= params_.r_cut) return 0.0;
  return params_.k_spring * (3.0 - 2.0 * params_.r_cut / r);
}

namespace {

// Minimum-image separations from (xi, yi, zi) to particles [begin, end) for
// coordinates already wrapped into [0, side). Kept free of the pair callback
// so the loop vectorises.
void minimum_image_distances(std::size_t begin, std::size_t end, double xi, double yi, double zi,
                             const double* __restrict px, const double* __restrict py,
                             const double* __restrict pz, double side, double* __restrict ox,
                             double* __restrict oy, double* __restrict oz, double* __restrict orr) {
  const double half = 0.5 * side;
  for (std::size_t j = begin; j < end; ++j) {
    double a = xi - px[j];
    double b = yi - py[j];
    double c = zi - pz[j];
    a -= side * static_cast<double>(a > half);
    a += side * static_cast<double>(a < -half);
    b -= side * static_cast<double>(b > half);
    b += side * static_cast<double>(b < -half);
    c -= side * static_cast<double>(c > half);
    c += side * static_cast<double>(c < -half);
    ox[j] = a;
    oy[j] = b;
    oz[j] = c;
    orr[j] = a * a + b * b + c * c;
  }
}

}  // namespace

template <class PairFn>
void PendulumSystem::for_each_pair(std::span<const double> q, PairFn&& fn) const {
  const std::size_t n = params_.n_particles;
  const double side = box_;
  const double inv_side = 1.0 / side;
  const double rc2 = params_.r_cut * params_.r_cut;

  // Wrap into [0, side) once so pair differences lie in (-side, side) and the
  // minimum image reduces to a branch-free compare per axis.
  thread_local std::vector<double> wrapped;
  wrapped.resize(3 * n);
  for (std::size_t k = 0; k < 3 * n; ++k) {
    const double w = q[k] - side * std::floor(q[k] * inv_side);
    wrapped[k] = w >= side ? w - side : w;
  }
  const double half = 0.5 * side;
  const double* w = wrapped.data();

  auto visit = [&](std::size_t i, std::size_t j) {
    double d[3];
    double r2 = 0.0;
    for (int a = 0; a < 3; ++a) {
      double v = w[3 * i + a] - w[3 * j + a];
      v -= side * static_cast<double>(v > half);
      v += side * static_cast<double>(v < -half);
      d[a] = v;
      r2 += v * v;
    }
    if (r2 < rc2) fn(i, j, d, r2);
  };

  // With three or fewer cells per side every cell neighbours every other, so
  // the plain pair loop visits the same pairs with less bookkeeping.
  if (cells_ <= 3) {
    // Structure-of-arrays copy so the distance pass vectorises; the pair
    // callback then runs only for the pairs inside the cutoff.
    thread_local std::vector<double> xs, ys, zs, dx, dy, dz, rr;
    xs.resize(n);
    ys.resize(n);
    zs.resize(n);
    dx.resize(n);
    dy.resize(n);
    dz.resize(n);
    rr.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = w[3 * i];
      ys[i] = w[3 * i + 1];
      zs[i] = w[3 * i + 2];
    }
    const double* __restrict px = xs.data();
    const double* __restrict py = ys.data();
    const double* __restrict pz = zs.data();
    double* __restrict ox = dx.data();
    double* __restrict oy = dy.data();
    double* __restrict oz = dz.data();
    double* __restrict orr = rr.data();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double xi = px[i], yi = py[i], zi = pz[i];
      minimum_image_distances(i + 1, n, xi, yi, zi, px, py, pz, side, ox, oy, oz, orr);
      for (std::size_t j = i + 1; j < n; ++j) {
        if (orr[j] < rc2) {
          const double d[3] = {ox[j], oy[j], oz[j]};
          fn(i, j, d, orr[j]);
        }
      }
    }
    return;
  }

  const int nc = static_cast<int>(cells_);
  thread_local std::vector<long> head;
  thread_local std::vector<long> next;
  head.assign(static_cast<std::size_t>(nc) * nc * nc, -1);
  next.assign(n, -1);
  auto cell_coord = [&](double w) {
    const int c = static_cast<int>(w * inv_side * nc);
    return std::clamp(c, 0, nc - 1);
  };
  auto cell_index = [nc](int x, int y, int z) {
    x = (x + nc) % nc;
    y = (y + nc) % nc;
    z = (z + nc) % nc;
    return static_cast<std::size_t>((x * nc + y) * nc + z);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c =
        cell_index(cell_coord(wrapped[3 * i]), cell_coord(wrapped[3 * i + 1]), cell_coord(wrapped[3 * i + 2]));
    next[i] = head[c];
    head[c] = static_cast<long>(i);
  }

  // Half shell: each unordered pair of neighbouring cells is visited once.
  static constexpr int shell[13][3] = {{1, 0, 0},  {-1, 1, 0}, {0, 1, 0},  {1, 1, 0},  {-1, -1, 1},
                                       {0, -1, 1}, {1, -1, 1}, {-1, 0, 1}, {0, 0, 1},  {1, 0, 1},
                                       {-1, 1, 1}, {0, 1, 1},  {1, 1, 1}};
  for (int cx = 0; cx < nc; ++cx) {
    for (int cy = 0; cy < nc; ++cy) {
      for (int cz = 0; cz < nc; ++cz) {
        const std::size_t c = cell_index(cx, cy, cz);
        for (long i = head[c]; i >= 0; i = next[i]) {
          for (long j = next[i]; j >= 0; j = next[j]) visit(i, j);
          for (const auto& off : shell) {
            const std::size_t nb = cell_index(cx + off[0], cy + off[1], cz + off[2]);
            for (long j = head[nb]; j >= 0; j = next[j]) visit(i, j);
          }
        }
      }
    }
  }
}

double PendulumSystem::force_energy(std::span<const double> q, std::span<double> force) const {
  check_dimension(q);
  std::fill(force.begin(), force.end(), 0.0);
  const double k = params_.k_spring;
  const double rc = params_.r_cut;
  double energy = 0.0;
  for_each_pair(q, [&](std::size_t i, std::size_t j, const double* d, double r2) {
    if (r2 == 0.0) throw SingularityError("pendulum: coincident particles");
    const double r = std::sqrt(r2);
    const double stretch = r - rc;
    energy += 0.5 * k * stretch * stretch;
    const double coef = -k * stretch / r;
    for (int a = 0; a < 3; ++a) {
      force[3 * i + a] += coef * d[a];
      force[3 * j + a] -= coef * d[a];
    }
  });
  return energy;
}

void PendulumSystem::compute_force(std::span<const double> q, RngStream&, ForceSample& out) const {
  out.force.resize(dimension());
  out.potential = force_energy(q, out.force);
  out.is_stochastic = false;
  out.cov_estimate.reset();
}

double PendulumSystem::potential(std::span<const double> q) const {
  check_dimension(q);
  const double k = params_.k_spring;
  const double rc = params_.r_cut;
  double energy = 0.0;
  for_each_pair(q, [&](std::size_t, std::size_t, const double*, double r2) {
    const double stretch = std::sqrt(r2) - rc;
    energy += 0.5 * k * stretch * stretch;
  });
  return energy;
}

ConfigurationalTemperatureTerms PendulumSystem::configurational_temperature(std::span<const double> q) const {
  check_dimension(q);
  std::vector<double> force(dimension(), 0.0);
  const double k = params_.k_spring;
  const double rc = params_.r_cut;
  ConfigurationalTemperatureTerms terms;
  for_each_pair(q, [&](std::size_t i, std::size_t j, const double* d, double r2) {
    if (r2 == 0.0) throw SingularityError("pendulum: coincident particles");
    const double r = std::sqrt(r2);
    const double coef = -k * (r - rc) / r;
    for (int a = 0; a < 3; ++a) {
      force[3 * i + a] += coef * d[a];
      force[3 * j + a] -= coef * d[a];
    }
    // Both particles of the pair see the same radial Laplacian.
    terms.laplacian += 2.0 * k * (3.0 - 2.0 * rc / r);
  });
  for (double f : force) terms.grad_sq += f * f;
  return terms;
}

std::vector<double> PendulumSystem::grid_positions() const {
  const std::size_t n = params_.n_particles;
  std::size_t per_side = 1;
  while (per_side * per_side * per_side < n) ++per_side;
  const double spacing = box_ / static_cast<double>(per_side);
  std::vector<double> q;
  q.reserve(3 * n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const std::size_t ix = idx / (per_side * per_side);
    const std::size_t iy = (idx / per_side) % per_side;
    const std::size_t iz = idx % per_side;
    q.push_back((static_cast<double>(ix) + 0.5) * spacing);
    q.push_back((static_cast<double>(iy) + 0.5) * spacing);
    q.push_back((static_cast<double>(iz) + 0.5) * spacing);
  }
  return q;
}

// --- minibatches -----------------------------------------------------------

void draw_minibatch(RngStream& rng, std::size_t population, std::size_t n, MinibatchSampling sampling,
                    std::vector<std::size_t>& out) {
  out.resize(n);
  if (sampling == MinibatchSampling::with_replacement) {
    for (std::size_t k = 0; k < n; ++k) out[k] = rng.index(population);
    return;
  }
  if (n == population) {
    std::iota(out.begin(), out.end(), std::size_t{0});
    return;
  }
  // Partial Fisher-Yates over a fresh identity permutation so the draw does
  // not depend on what ran before on this thread.
  thread_local std::vector<std::size_t> perm;
  perm.resize(population);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = k + rng.index(population - k);
    std::swap(perm[k], perm[j]);
    out[k] = perm[k];
  }
}

// --- gaussian mean ----------------------------------------------------------

GaussianMeanModel::GaussianMeanModel(std::vector<double> data, double sigma_hat, std::size_t minibatch,
                                     MinibatchSampling sampling)
    : data_(std::move(data)), sigma_hat_(sigma_hat), minibatch_(minibatch), sampling_(sampling) {
  if (data_.empty()) throw ConfigError("gaussian-mean: empty dataset");
  if (!(sigma_hat_ > 0.0)) throw ConfigError("gaussian-mean.sigma_hat must be > 0");
  if (minibatch_ < 1 || minibatch_ > data_.size()) throw ConfigError("gaussian-mean.minibatch must be in [1, N]");
  const double n = static_cast<double>(data_.size());
  mean_ = std::accumulate(data_.begin(), data_.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : data_) ss += (x - mean_) * (x - mean_);
  var_ = data_.size() > 1 ? ss / (n - 1.0) : 0.0;
}

double GaussianMeanModel::batch_mean(RngStream& rng) const {
  if (minibatch_ == data_.size() && sampling_ == MinibatchSampling::without_replacement) return mean_;
  thread_local std::vector<std::size_t> idx;
  draw_minibatch(rng, data_.size(), minibatch_, sampling_, idx);
  double sum = 0.0;
  for (std::size_t i : idx) sum += data_[i];
  return sum / static_cast<double>(minibatch_);
}

void GaussianMeanModel::compute_force(std::span<const double> q, RngStream& rng, ForceSample& out) const {
  check_dimension(q);
  const double n = static_cast<double>(data_.size());
  out.force.resize(1);
  out.force[0] = n / (sigma_hat_ * sigma_hat_) * (batch_mean(rng) - q[0]);
  out.is_stochastic = !(minibatch_ == data_.size() && sampling_ == MinibatchSampling::without_replacement);
  out.cov_estimate.reset();
  out.potential = potential(q);
}

void GaussianMeanModel::compute_force_with_covariance(std::span<const double> q, RngStream& rng,
                                                      ForceSample& out) const {
  compute_force(q, rng, out);
  out.cov_estimate = std::vector<double>{force_variance()};
}

double GaussianMeanModel::potential(std::span<const double> q) const {
  const double n = static_cast<double>(data_.size());
  const double d = q[0] - mean_;
  return 0.5 * n / (sigma_hat_ * sigma_hat_) * d * d;
}

double GaussianMeanModel::clean_force(double theta) const {
  const double n = static_cast<double>(data_.size());
  return n / (sigma_hat_ * sigma_hat_) * (mean_ - theta);
}

double GaussianMeanModel::force_variance() const {
  const double n = static_cast<double>(data_.size());
  const double m = static_cast<double>(minibatch_);
  const double s4 = sigma_hat_ * sigma_hat_ * sigma_hat_ * sigma_hat_;
  if (sampling_ == MinibatchSampling::with_replacement) return n * (n - 1.0) / m * var_ / s4;
  return n * (n - m) / m * var_ / s4;
}

GaussianPosterior gaussian_mean_exact_posterior(const GaussianMeanModel& model) {
  const double n = static_cast<double>(model.data().size());
  return {model.data_mean(), model.sigma_hat() * model.sigma_hat() / n};
}

// --- logistic ---------------------------------------------------------------

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

LogisticModel::LogisticModel(std::vector<double> design, std::vector<double> labels, std::size_t d,
                             std::size_t minibatch, MinibatchSampling sampling)
    : x_(std::move(design)), y_(std::move(labels)), d_(d), minibatch_(minibatch), sampling_(sampling) {
  if (d_ == 0) throw ConfigError("logistic: dimension must be >= 1");
  if (x_.size() % d_ != 0) throw ConfigError("logistic: design size is not a multiple of d");
  n_ = x_.size() / d_;
  if (n_ == 0) throw ConfigError("logistic: empty dataset");
  if (y_.size() != n_) throw ConfigError("logistic: label count does not match design rows");
  for (double y : y_) {
    if (y != 1.0 && y != -1.0) throw ConfigError("logistic: labels must be -1 or +1");
  }
  if (minibatch_ < 1 || minibatch_ > n_) throw ConfigError("logistic.minibatch must be in [1, N]");
}

void LogisticModel::batch_force(std::span<const double> beta, RngStream& rng, ForceSample& out,
                                bool with_cov) const {
  check_dimension(beta);
  thread_local std::vector<std::size_t> idx;
  draw_minibatch(rng, n_, minibatch_, sampling_, idx);

  std::vector<double> grad(d_, 0.0);
  std::vector<double> grad_sq(with_cov ? d_ : 0, 0.0);
  for (std::size_t i : idx) {
    const double* row = &x_[i * d_];
    double z = 0.0;
    for (std::size_t j = 0; j < d_; ++j) z += beta[j] * row[j];
    const double w = y_[i] * logistic(-y_[i] * z);
    for (std::size_t j = 0; j < d_; ++j) {
      const double g = w * row[j];
      grad[j] += g;
      if (with_cov) grad_sq[j] += g * g;
    }
  }
  const double scale = static_cast<double>(n_) / static_cast<double>(minibatch_);
  out.force.resize(d_);
  for (std::size_t j = 0; j < d_; ++j) out.force[j] = -beta[j] + scale * grad[j];
  out.is_stochastic = !(minibatch_ == n_ && sampling_ == MinibatchSampling::without_replacement);
  out.potential = std::numeric_limits<double>::quiet_NaN();
  out.cov_estimate.reset();
  if (with_cov) {
    const double m = static_cast<double>(minibatch_);
    std::vector<double> cov(d_, 0.0);
    if (minibatch_ > 1) {
      const double n = static_cast<double>(n_);
      for (std::size_t j = 0; j < d_; ++j) {
        const double mean = grad[j] / m;
        const double var = (grad_sq[j] - m * mean * mean) / (m - 1.0);
        cov[j] = n * n / m * std::max(var, 0.0);
      }
    }
    out.cov_estimate = std::move(cov);
  }
}

void LogisticModel::compute_force(std::span<const double> q, RngStream& rng, ForceSample& out) const {
  batch_force(q, rng, out, false);
}

void LogisticModel::compute_force_with_covariance(std::span<const double> q, RngStream& rng,
                                                  ForceSample& out) const {
  batch_force(q, rng, out, true);
}

void LogisticModel::clean_force(std::span<const double> beta, std::span<double> out) const {
  check_dimension(beta);
  std::vector<double> grad(d_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const double* row = &x_[i * d_];
    double z = 0.0;
    for (std::size_t j = 0; j < d_; ++j) z += beta[j] * row[j];
    const double w = y_[i] * logistic(-y_[i] * z);
    for (std::size_t j = 0; j < d_; ++j) grad[j] += w * row[j];
  }
  for (std::size_t j = 0; j < d_; ++j) out[j] = -beta[j] + grad[j];
}

double LogisticModel::potential(std::span<const double> q) const {
  check_dimension(q);
  double u = 0.0;
  for (double b : q) u += 0.5 * b * b;
  for (std::size_t i = 0; i < n_; ++i) {
    const double* row = &x_[i * d_];
    double z = 0.0;
    for (std::size_t j = 0; j < d_; ++j) z += q[j] * row[j];
    u += softplus(-y_[i] * z);
  }
  return u;
}

// --- datasets ---------------------------------------------------------------

std::vector<double> Dataset::column(std::size_t c) const {
  if (c >= columns.size()) throw ConfigError("dataset: column index out of range");
  std::vector<double> out;
  out.reserve(rows());
  for (std::size_t r = 0; r < rows(); ++r) out.push_back(values[r * columns.size() + c]);
  return out;
}

Dataset generate_synthetic_data(const SyntheticSpec& spec, std::uint64_t seed) {
  RngStream rng(seed, {0, 0});
  Dataset data;
  data.spec = spec.name;
  data.seed = seed;
  if (spec.name == "gaussian-mean") {
    const std::size_t n = spec.n == 0 ? 100 : spec.n;
    data.meta.emplace_back("N", std::to_string(n));
    data.columns = {"x"};
    data.values = rng.standard_normals(n);
    return data;
  }
  if (spec.name == "logistic") {
    const std::size_t n = spec.n == 0 ? 1000 : spec.n;
    std::ostringstream bs;
    bs << std::setprecision(17) << spec.beta_star[0] << ',' << spec.beta_star[1] << ',' << spec.beta_star[2];
    data.meta.emplace_back("N", std::to_string(n));
    data.meta.emplace_back("beta_star", bs.str());
    data.columns = {"x1", "x2", "x3", "y"};
    data.values.reserve(4 * n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x1 = rng.normal();
      const double x2 = rng.normal();
      const double z = spec.beta_star[0] * x1 + spec.beta_star[1] * x2 + spec.beta_star[2];
      const double y = rng.uniform() < logistic(z) ? 1.0 : -1.0;
      data.values.insert(data.values.end(), {x1, x2, 1.0, y});
    }
    return data;
  }
  throw ConfigError("gen-data: unknown dataset spec '" + spec.name + "'");
}

void write_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "# spec=" << data.spec << " seed=" << data.seed;
  for (const auto& [k, v] : data.meta) out << ' ' << k << '=' << v;
  out << '\n';
  for (std::size_t c = 0; c < data.columns.size(); ++c) out << (c ? " " : "") << data.columns[c];
  out << '\n';
  out << std::setprecision(17);
  const std::size_t width = data.columns.size();
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < width; ++c) out << (c ? " " : "") << data.values[r * width + c];
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());
  Dataset data;
  std::string line;
  if (!std::getline(in, line) || line.rfind('#', 0) != 0) {
    throw ConfigError(path.string() + ": missing '#' metadata line");
  }
  {
    std::istringstream meta(line.substr(1));
    std::string token;
    while (meta >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = token.substr(0, eq);
      const std::string value = token.substr(eq + 1);
      if (key == "spec") {
        data.spec = value;
      } else if (key == "seed") {
        data.seed = std::stoull(value);
      } else {
        data.meta.emplace_back(key, value);
      }
    }
  }
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": missing column header");
  {
    std::istringstream header(line);
    std::string name;
    while (header >> name) data.columns.push_back(name);
  }
  if (data.columns.empty()) throw ConfigError(path.string() + ": empty column header");
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::size_t count = 0;
    double v;
    while (row >> v) {
      data.values.push_back(v);
      ++count;
    }
    if (count != data.columns.size()) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(data.columns.size()) + " columns");
    }
  }
  return data;
}

GaussianMeanModel make_gaussian_mean_model(const Dataset& data, double sigma_hat, std::size_t minibatch,
                                           MinibatchSampling sampling) {
  if (data.columns.size() != 1) throw ConfigError("gaussian-mean dataset must have one column");
  return GaussianMeanModel(data.values, sigma_hat, minibatch, sampling);
}

LogisticModel make_logistic_model(const Dataset& data, std::size_t minibatch, MinibatchSampling sampling) {
  const std::size_t width = data.columns.size();
  if (width < 2) throw ConfigError("logistic dataset needs feature columns and a label column");
  const std::size_t d = width - 1;
  std::vector<double> x;
  std::vector<double> y;
  x.reserve(data.rows() * d);
  y.reserve(data.rows());
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) x.push_back(data.values[r * width + c]);
    y.push_back(data.values[r * width + d]);
  }
  return LogisticModel(std::move(x), std::move(y), d, minibatch, sampling);
}

}  // namespace sgnht
