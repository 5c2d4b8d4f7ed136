#pragma once

// Time averages with burn-in, histograms, and the error metrics used to
// compare samplers: relative error, histogram MAE, RMSE, and log-log order
// fits.

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace sgnht {

class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Welford accumulator that ignores the first floor(burn_in_fraction *
/// expected_samples) pushes.
class RunningAverage {
 public:
  RunningAverage() = default;
  RunningAverage(std::size_t expected_samples, double burn_in_fraction);

  void push(double x);

  std::size_t count() const { return count_; }
  std::size_t skipped() const { return seen_ - count_; }
  double mean() const { return mean_; }
  /// Unbiased sample variance of the retained samples.
  double variance() const;
  /// sqrt(variance / count); only meaningful for independent samples.
  double iid_standard_error() const;
  double burn_in_fraction() const { return burn_in_fraction_; }

 private:
  std::size_t burn_in_ = 0;
  double burn_in_fraction_ = 0.0;
  std::size_t seen_ = 0;
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Uniform bins on [lo, hi). Samples outside the range are counted in
/// underflow/overflow and still contribute to the total.
class Histogram {
 public:
  Histogram(std::size_t bins, double lo, double hi);

  void add(double x);
  void merge(const Histogram& other);

  std::size_t bins() const { return counts_.size(); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double bin_edge(std::size_t i) const;
  const std::vector<std::size_t>& counts() const { return counts_; }
  std::size_t underflow() const { return underflow_; }
  std::size_t overflow() const { return overflow_; }
  std::size_t total() const { return total_; }

  /// Bin counts divided by the total sample count; together with
  /// outside_fraction() they sum to one.
  std::vector<double> frequencies() const;
  double outside_fraction() const;

 private:
  double lo_;
  double hi_;
  double width_;
  std::vector<std::size_t> counts_;
  std::size_t underflow_ = 0;
  std::size_t overflow_ = 0;
  std::size_t total_ = 0;
};

struct RelativeError {
  double value = 0.0;
  /// Set when the exact value is zero and value holds the absolute error.
  bool absolute = false;
};

RelativeError relative_error(double observed, double exact);

/// Standard normal CDF.
double normal_cdf(double x);

/// Exact bin masses cdf(edge[i+1]) - cdf(edge[i]) for the histogram's bins.
std::vector<double> bin_masses(const Histogram& hist, const std::function<double(double)>& cdf);

/// (1 / bins) * sum_i |observed_i - expected_i|.
double mae(std::span<const double> observed, std::span<const double> expected);
double mae(const Histogram& hist, const std::function<double(double)>& cdf);

/// Score recorded for a run that diverged.
inline constexpr double kDivergedMae = 1.0;

/// sqrt(mean over runs of |estimate - truth|^2).
double rmse(const std::vector<std::vector<double>>& estimates, std::span<const double> truth);

struct OrderPoint {
  double h = 0.0;
  double error = 0.0;
  bool unstable = false;
};

struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Standard error of the slope.
  double slope_stderr = 0.0;
  std::size_t points = 0;
};

/// Least-squares fit of log(error) against log(h) over stable points.
/// Throws InsufficientDataError with fewer than 4 usable points and
/// std::invalid_argument for non-positive h or error.
OrderFit fit_order(std::span<const OrderPoint> points);

struct MeanAndError {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Mean and standard error of independent values (e.g. per-run averages).
MeanAndError mean_and_standard_error(std::span<const double> values);

}  // namespace sgnht
