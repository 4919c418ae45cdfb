#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>

#include "rydcycle/errors.hpp"
#include "rydcycle/meanfield.hpp"

namespace rydcycle {

namespace {

std::vector<double> moving_average(std::span<const double> x, std::size_t window) {
  const std::size_t half = window / 2;
  const std::size_t n = x.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

// Times where x crosses its mean upwards, linearly interpolated.
std::vector<double> upward_crossings(std::span<const double> t, std::span<const double> x) {
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  std::vector<double> out;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double a = x[i - 1] - mean;
    const double b = x[i] - mean;
    if (a < 0.0 && b >= 0.0) out.push_back(t[i - 1] + (t[i] - t[i - 1]) * (-a) / (b - a));
  }
  return out;
}

// One peak per cycle: the maximum between successive upward mean crossings,
// refined by a parabola through the neighbouring samples.
std::vector<double> cycle_peaks(std::span<const double> t, std::span<const double> x) {
  const auto crossings = upward_crossings(t, x);
  std::vector<double> peaks;
  if (crossings.size() < 2) return peaks;
  const double dt = t[1] - t[0];
  std::size_t i = 0;
  for (std::size_t c = 0; c + 1 < crossings.size(); ++c) {
    while (i < t.size() && t[i] < crossings[c]) ++i;
    std::size_t best = i;
    for (std::size_t k = i; k < t.size() && t[k] < crossings[c + 1]; ++k) {
      if (x[k] > x[best]) best = k;
    }
    double tp = t[best];
    if (best > 0 && best + 1 < t.size()) {
      const double denom = x[best - 1] - 2.0 * x[best] + x[best + 1];
      if (denom < 0.0) tp += 0.5 * dt * (x[best - 1] - x[best + 1]) / denom;
    }
    peaks.push_back(tp);
  }
  return peaks;
}

double wrap_half(double v) {
  // [-0.5, 0.5)
  return v - std::floor(v + 0.5);
}

}  // namespace

LimitCycleMetrics limit_cycle_metrics(std::span<const double> times, std::span<const double> n_s,
                                      std::span<const double> n_r, double smoothing_fraction) {
  if (times.size() != n_s.size() || times.size() != n_r.size() || times.size() < 8) {
    throw std::invalid_argument("limit_cycle_metrics: series must be aligned and non-trivial");
  }
  const double dt = times[1] - times[0];
  const auto rough = upward_crossings(times, n_r);
  if (rough.size() < 3) {
    throw NotPeriodicError("limit_cycle_metrics: fewer than three oscillations in n_r");
  }
  const double period_guess = (rough.back() - rough.front()) / static_cast<double>(rough.size() - 1);
  const auto window = static_cast<std::size_t>(
      std::max(1L, std::lround(smoothing_fraction * period_guess / dt)) | 1L);
  const auto smooth_s = moving_average(n_s, window);
  const auto smooth_r = moving_average(n_r, window);

  const auto peaks_r = cycle_peaks(times, smooth_r);
  const auto peaks_s = cycle_peaks(times, smooth_s);
  if (peaks_r.size() < 3 || peaks_s.size() < 3) {
    throw NotPeriodicError("limit_cycle_metrics: detected " + std::to_string(peaks_r.size()) + " n_r and " +
                           std::to_string(peaks_s.size()) + " n_s peaks; need at least three");
  }

  LimitCycleMetrics m;
  m.n_peaks = peaks_r.size();
  m.period = (peaks_r.back() - peaks_r.front()) / static_cast<double>(peaks_r.size() - 1);

  // Circular mean of the lag to the next n_s peak, so lags near +-T/2 do not
  // cancel each other.
  std::complex<double> phasor = 0.0;
  int used = 0;
  for (double tr : peaks_r) {
    const auto it = std::lower_bound(peaks_s.begin(), peaks_s.end(), tr - 1e-9 * m.period);
    if (it == peaks_s.end()) break;
    const double phase = 2.0 * std::numbers::pi * (*it - tr) / m.period;
    phasor += std::polar(1.0, phase);
    ++used;
  }
  if (used == 0) throw NotPeriodicError("limit_cycle_metrics: no n_s peak follows an n_r peak");
  m.t_rs = wrap_half(std::arg(phasor) / (2.0 * std::numbers::pi));
  m.dt_rs = m.t_rs * m.period;

  const auto [smin, smax] = std::minmax_element(n_s.begin(), n_s.end());
  const auto [rmin, rmax] = std::minmax_element(n_r.begin(), n_r.end());
  m.amplitude_s = *smax - *smin;
  m.amplitude_r = *rmax - *rmin;
  return m;
}

LimitCycleMetrics limit_cycle_metrics(const MFTrajectory& series, double smoothing_fraction) {
  const auto ns = series.n_s();
  const auto nr = series.n_r();
  return limit_cycle_metrics(series.times, ns, nr, smoothing_fraction);
}

}  // namespace rydcycle
