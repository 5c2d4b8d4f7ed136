#pragma once

// Independent reference computations used by the test suites. Nothing here
// calls into the library under test: each oracle is a direct, unoptimised
// restatement of the quantity it checks.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace oracle {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
};

inline Moments moments(std::span<const double> xs) {
  Moments m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  m.variance = ss / static_cast<double>(xs.size() - 1);
  return m;
}

inline double correlation(std::span<const double> a, std::span<const double> b) {
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  double c = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) c += (a[i] - ma.mean) * (b[i] - mb.mean);
  c /= static_cast<double>(a.size() - 1);
  return c / std::sqrt(ma.variance * mb.variance);
}

/// Ordinary least squares y = a + b x via the normal equations solved with
/// Cramer's rule, and the textbook slope standard error.
struct Regression {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

inline Regression least_squares(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  Regression r;
  r.slope = (n * sxy - sx * sy) / det;
  r.intercept = (sxx * sy - sx * sxy) / det;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - r.intercept - r.slope * x[i];
    rss += e * e;
  }
  const double s2 = rss / (n - 2.0);
  r.slope_stderr = std::sqrt(n * s2 / det);
  return r;
}

/// Central finite-difference gradient of f at x.
inline std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                       std::vector<double> x, double step) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + step;
    const double up = f(x);
    x[i] = x0 - step;
    const double down = f(x);
    x[i] = x0;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

/// Central finite-difference Laplacian (trace of the Hessian) of f at x.
inline double fd_laplacian(const std::function<double(std::span<const double>)>& f, std::vector<double> x,
                           double step) {
  const double f0 = f(x);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + step;
    const double up = f(x);
    x[i] = x0 - step;
    const double down = f(x);
    x[i] = x0;
    sum += (up - 2.0 * f0 + down) / (step * step);
  }
  return sum;
}

/// Brute-force periodic cutoff-spring system: every pair, explicit
/// nearest-image search over the 27 neighbouring images.
struct SpringPairs {
  double side;
  double k;
  double rc;

  double nearest(double d) const {
    double best = d;
    for (int s = -2; s <= 2; ++s) {
      const double c = d + s * side;
      if (std::abs(c) < std::abs(best)) best = c;
    }
    return best;
  }

  /// Energy of the pairs that involve particle i.
  double local_energy(std::span<const double> q, std::size_t i) const {
    const std::size_t n = q.size() / 3;
    double u = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double r2 = 0.0;
      for (int a = 0; a < 3; ++a) {
        const double d = nearest(q[3 * i + a] - q[3 * j + a]);
        r2 += d * d;
      }
      const double r = std::sqrt(r2);
      if (r < rc) u += 0.5 * k * (r - rc) * (r - rc);
    }
    return u;
  }

  /// Sum over particles of the central-difference Laplacian of the local
  /// energy; avoids the cancellation of differencing the total energy.
  double fd_laplacian(std::vector<double> q, double step) const {
    const std::size_t n = q.size() / 3;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u0 = local_energy(q, i);
      for (int a = 0; a < 3; ++a) {
        const double x0 = q[3 * i + a];
        q[3 * i + a] = x0 + step;
        const double up = local_energy(q, i);
        q[3 * i + a] = x0 - step;
        const double down = local_energy(q, i);
        q[3 * i + a] = x0;
        sum += (up - 2.0 * u0 + down) / (step * step);
      }
    }
    return sum;
  }

  double energy(std::span<const double> q, std::vector<double>* force = nullptr) const {
    const std::size_t n = q.size() / 3;
    if (force) force->assign(q.size(), 0.0);
    double u = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double d[3];
        for (int a = 0; a < 3; ++a) d[a] = nearest(q[3 * i + a] - q[3 * j + a]);
        const double r = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
        if (r >= rc) continue;
        u += 0.5 * k * (r - rc) * (r - rc);
        if (force) {
          // -dphi/dr along the unit separation vector from j to i.
          const double mag = -k * (r - rc);
          for (int a = 0; a < 3; ++a) {
            (*force)[3 * i + a] += mag * d[a] / r;
            (*force)[3 * j + a] -= mag * d[a] / r;
          }
        }
      }
    }
    return u;
  }
};

}  // namespace oracle
