#include "sgnht/observables.hpp"

#include <algorithm>
#include <cmath>

namespace sgnht {

RunningAverage::RunningAverage(std::size_t expected_samples, double burn_in_fraction)
    : burn_in_fraction_(burn_in_fraction) {
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) {
    throw std::invalid_argument("burn-in fraction must be in [0, 1)");
  }
  burn_in_ = static_cast<std::size_t>(std::floor(burn_in_fraction * static_cast<double>(expected_samples)));
}

void RunningAverage::push(double x) {
  ++seen_;
  if (seen_ <= burn_in_) return;
  ++count_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (x - mean_);
}

double RunningAverage::variance() const {
  return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
}

double RunningAverage::iid_standard_error() const {
  return count_ > 0 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
}

Histogram::Histogram(std::size_t bins, double lo, double hi)
    : lo_(lo), hi_(hi), width_((hi - lo) / static_cast<double>(bins)), counts_(bins, 0) {
  if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
  if (!(hi > lo)) throw std::invalid_argument("histogram range must satisfy hi > lo");
}

void Histogram::add(double x) {
  ++total_;
  if (!(x >= lo_)) {  // NaN lands here too
    ++underflow_;
    return;
  }
  if (x >= hi_) {
    ++overflow_;
    return;
  }
  auto bin = static_cast<std::size_t>((x - lo_) / width_);
  if (bin >= counts_.size()) bin = counts_.size() - 1;
  ++counts_[bin];
}

void Histogram::merge(const Histogram& other) {
  if (other.bins() != bins() || other.lo_ != lo_ || other.hi_ != hi_) {
    throw std::invalid_argument("cannot merge histograms with different binning");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  underflow_ += other.underflow_;
  overflow_ += other.overflow_;
  total_ += other.total_;
}

double Histogram::bin_edge(std::size_t i) const {
  return i == counts_.size() ? hi_ : lo_ + width_ * static_cast<double>(i);
}

std::vector<double> Histogram::frequencies() const {
  std::vector<double> f(counts_.size(), 0.0);
  if (total_ == 0) return f;
  const double inv = 1.0 / static_cast<double>(total_);
  for (std::size_t i = 0; i < counts_.size(); ++i) f[i] = static_cast<double>(counts_[i]) * inv;
  return f;
}

double Histogram::outside_fraction() const {
  return total_ == 0 ? 0.0 : static_cast<double>(underflow_ + overflow_) / static_cast<double>(total_);
}

RelativeError relative_error(double observed, double exact) {
  if (exact == 0.0) return {std::abs(observed), true};
  return {std::abs(observed - exact) / std::abs(exact), false};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

std::vector<double> bin_masses(const Histogram& hist, const std::function<double(double)>& cdf) {
  std::vector<double> masses(hist.bins());
  double prev = cdf(hist.bin_edge(0));
  for (std::size_t i = 0; i < hist.bins(); ++i) {
    const double next = cdf(hist.bin_edge(i + 1));
    masses[i] = next - prev;
    prev = next;
  }
  return masses;
}

double mae(std::span<const double> observed, std::span<const double> expected) {
  if (observed.size() != expected.size() || observed.empty()) {
    throw std::invalid_argument("mae: frequency vectors must be nonempty and of equal length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) sum += std::abs(observed[i] - expected[i]);
  return sum / static_cast<double>(observed.size());
}

double mae(const Histogram& hist, const std::function<double(double)>& cdf) {
  const auto freq = hist.frequencies();
  const auto exact = bin_masses(hist, cdf);
  return mae(freq, exact);
}

double rmse(const std::vector<std::vector<double>>& estimates, std::span<const double> truth) {
  if (estimates.empty()) throw std::invalid_argument("rmse: need at least one run");
  double sum = 0.0;
  for (const auto& est : estimates) {
    if (est.size() != truth.size()) throw std::invalid_argument("rmse: estimate and truth lengths differ");
    for (std::size_t j = 0; j < truth.size(); ++j) sum += (est[j] - truth[j]) * (est[j] - truth[j]);
  }
  return std::sqrt(sum / static_cast<double>(estimates.size()));
}

OrderFit fit_order(std::span<const OrderPoint> points) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& pt : points) {
    if (pt.unstable) continue;
    if (!(pt.h > 0.0) || !(pt.error > 0.0)) {
      throw std::invalid_argument("fit_order: stepsizes and errors must be positive");
    }
    xs.push_back(std::log(pt.h));
    ys.push_back(std::log(pt.error));
  }
  if (xs.size() < 4) throw InsufficientDataError("fit_order: need at least 4 stable points");

  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw InsufficientDataError("fit_order: all stepsizes are equal");

  OrderFit fit;
  fit.points = xs.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ssr += r * r;
  }
  fit.slope_stderr = std::sqrt(ssr / (n - 2.0) / sxx);
  return fit;
}

MeanAndError mean_and_standard_error(std::span<const double> values) {
  MeanAndError out;
  out.n = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std_error = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  }
  return out;
}

}  // namespace sgnht
