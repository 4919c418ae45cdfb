#include "rydcycle/observables.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "rydcycle/errors.hpp"

namespace rydcycle {

namespace {

// FFTW planning is not thread-safe; execution with new-array calls is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftBuffers {
  int size;
  double* real;
  fftw_complex* freq;
  fftw_plan forward;
  fftw_plan backward;

  explicit FftBuffers(int n) : size(n) {
    real = fftw_alloc_real(static_cast<std::size_t>(n));
    freq = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    std::lock_guard<std::mutex> lock(planner_mutex());
    forward = fftw_plan_dft_r2c_1d(n, real, freq, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(n, freq, real, FFTW_ESTIMATE);
  }
  ~FftBuffers() {
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      fftw_destroy_plan(forward);
      fftw_destroy_plan(backward);
    }
    fftw_free(real);
    fftw_free(freq);
  }
  FftBuffers(const FftBuffers&) = delete;
  FftBuffers& operator=(const FftBuffers&) = delete;
};

struct Prepared {
  std::size_t first = 0;   // index of the first post-transient sample
  std::size_t length = 0;  // post-transient samples
  std::size_t max_lag = 0;
};

Prepared prepare(std::size_t n, double dt, const CorrelationOptions& options) {
  if (!(dt > 0.0)) throw InputError("correlation: time step must be positive");
  if (!(options.t_max_lag > 0.0)) throw InputError("correlation: t_max_lag must be positive");
  Prepared p;
  p.first = static_cast<std::size_t>(std::ceil(options.t_transient / dt - 1e-9));
  p.length = n > p.first ? n - p.first : 0;
  p.max_lag = static_cast<std::size_t>(std::lround(options.t_max_lag / dt));
  const double have = static_cast<double>(p.length) * dt;
  const double need = options.min_duration_factor * options.t_max_lag;
  if (have < need || p.length <= p.max_lag) {
    throw InputError("correlation: series too short; need a duration of at least " +
                     std::to_string(options.t_transient + need) + " (transient " +
                     std::to_string(options.t_transient) + " + " + std::to_string(need) + "), have " +
                     std::to_string(static_cast<double>(n) * dt));
  }
  return p;
}

std::vector<double> centered(std::span<const double> x, const Prepared& p) {
  std::vector<double> out(x.begin() + static_cast<std::ptrdiff_t>(p.first), x.end());
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(out.size());
  for (double& v : out) v -= mean;
  return out;
}

void check_pairs(const std::vector<std::span<const double>>& a, const std::vector<std::span<const double>>& b) {
  if (a.empty() || a.size() != b.size()) throw InputError("correlation: need matching non-empty input lists");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) throw InputError("correlation: paired series differ in length");
  }
}

// Raw lagged sums c_k = sum_i a_i b_{i+k} for k in [-max_lag, max_lag].
std::vector<double> lagged_sums(const std::vector<double>& a, const std::vector<double>& b, std::size_t max_lag) {
  const std::size_t n = a.size();
  const int m = static_cast<int>(2 * n);
  FftBuffers fa(m);
  std::vector<std::complex<double>> spec_a(static_cast<std::size_t>(m / 2 + 1));
  std::fill(fa.real, fa.real + m, 0.0);
  std::copy(a.begin(), a.end(), fa.real);
  fftw_execute(fa.forward);
  for (std::size_t q = 0; q < spec_a.size(); ++q) spec_a[q] = {fa.freq[q][0], fa.freq[q][1]};
  std::fill(fa.real, fa.real + m, 0.0);
  std::copy(b.begin(), b.end(), fa.real);
  fftw_execute(fa.forward);
  for (std::size_t q = 0; q < spec_a.size(); ++q) {
    const std::complex<double> prod = std::conj(spec_a[q]) * std::complex<double>(fa.freq[q][0], fa.freq[q][1]);
    fa.freq[q][0] = prod.real();
    fa.freq[q][1] = prod.imag();
  }
  fftw_execute(fa.backward);
  std::vector<double> out(2 * max_lag + 1);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    out[max_lag + k] = fa.real[k] * scale;
    if (k > 0) out[max_lag - k] = fa.real[static_cast<std::size_t>(m) - k] * scale;
  }
  return out;
}

CorrelationSeries correlate(const std::vector<std::span<const double>>& a,
                            const std::vector<std::span<const double>>& b, double dt,
                            const CorrelationOptions& options, bool two_sided) {
  check_pairs(a, b);
  const Prepared p = prepare(a.front().size(), dt, options);
  const std::size_t width = 2 * p.max_lag + 1;
  std::vector<double> acc(width, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != a.front().size()) throw InputError("correlation: series differ in length");
    const auto sums = lagged_sums(centered(a[i], p), centered(b[i], p), p.max_lag);
    for (std::size_t j = 0; j < width; ++j) {
      const auto lag = static_cast<std::size_t>(std::abs(static_cast<long>(j) - static_cast<long>(p.max_lag)));
      acc[j] += sums[j] / static_cast<double>(p.length - lag);
    }
  }
  CorrelationSeries out;
  out.dt = dt;
  out.n_series = a.size();
  const std::size_t begin = two_sided ? 0 : p.max_lag;
  for (std::size_t j = begin; j < width; ++j) {
    out.lag.push_back((static_cast<double>(j) - static_cast<double>(p.max_lag)) * dt);
    out.values.push_back(acc[j] / static_cast<double>(a.size()));
  }
  return out;
}

}  // namespace

double relative_fraction(double n_s, double n_r) {
  const double total = n_s + n_r;
  if (!(total >= 1e-9)) return std::numeric_limits<double>::quiet_NaN();
  return (n_r - n_s) / total;
}

SiteAverage site_average_fraction(std::span<const double> n_s, std::span<const double> n_r) {
  if (n_s.size() != n_r.size()) throw InputError("site_average_fraction: length mismatch");
  SiteAverage out;
  double sum = 0.0;
  for (std::size_t l = 0; l < n_s.size(); ++l) {
    const double f = relative_fraction(n_s[l], n_r[l]);
    if (std::isnan(f)) continue;
    sum += f;
    ++out.n_defined;
  }
  if (out.n_defined > 0) out.value = sum / static_cast<double>(out.n_defined);
  return out;
}

CorrelationSeries two_time_correlation(const std::vector<std::span<const double>>& a,
                                       const std::vector<std::span<const double>>& b, double dt,
                                       const CorrelationOptions& options) {
  return correlate(a, b, dt, options, false);
}

CorrelationSeries two_time_correlation(std::span<const double> a, std::span<const double> b, double dt,
                                       const CorrelationOptions& options) {
  return correlate({a}, {b}, dt, options, false);
}

CorrelationSeries two_sided_correlation(const std::vector<std::span<const double>>& a,
                                        const std::vector<std::span<const double>>& b, double dt,
                                        const CorrelationOptions& options) {
  return correlate(a, b, dt, options, true);
}

CorrelationSeries direct_correlation(std::span<const double> a, std::span<const double> b, double dt,
                                     const CorrelationOptions& options) {
  if (a.size() != b.size()) throw InputError("correlation: paired series differ in length");
  const Prepared p = prepare(a.size(), dt, options);
  const auto da = centered(a, p);
  const auto db = centered(b, p);
  CorrelationSeries out;
  out.dt = dt;
  out.n_series = 1;
  for (std::size_t k = 0; k <= p.max_lag; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i + k < p.length; ++i) sum += da[i] * db[i + k];
    out.lag.push_back(static_cast<double>(k) * dt);
    out.values.push_back(sum / static_cast<double>(p.length - k));
  }
  return out;
}

double Spectrum::magnitude(std::size_t m) const { return std::hypot(re[m], im[m]); }

Spectrum fourier_spectrum(const CorrelationSeries& corr, Taper taper) {
  const std::size_t k_len = corr.values.size();
  if (k_len < 2 || !(corr.dt > 0.0)) throw InputError("fourier_spectrum: need at least two lags");
  const int n = static_cast<int>(k_len);
  fftw_complex* buf = fftw_alloc_complex(k_len);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  for (std::size_t k = 0; k < k_len; ++k) {
    double w = 1.0;
    if (taper == Taper::Cosine) {
      w = 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(k) / static_cast<double>(k_len)));
    }
    buf[k][0] = w * corr.values[k];
    buf[k][1] = 0.0;
  }
  fftw_execute(plan);

  Spectrum out;
  out.dt = corr.dt;
  out.resolution = 2.0 * std::numbers::pi / (static_cast<double>(k_len) * corr.dt);
  out.omega.resize(k_len);
  out.re.resize(k_len);
  out.im.resize(k_len);
  for (std::size_t m = 0; m < k_len; ++m) {
    const double index = m <= k_len / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(k_len);
    out.omega[m] = index * out.resolution;
    out.re[m] = corr.dt * buf[m][0];
    out.im[m] = corr.dt * buf[m][1];
  }
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return out;
}

namespace {

// Positive-frequency bins that have a positive-frequency right neighbour.
std::size_t last_interior_bin(const Spectrum& s) { return (s.size() - 1) / 2; }

bool is_local_max(const Spectrum& s, std::size_t m) {
  const double y = s.magnitude(m);
  return y >= s.magnitude(m - 1) && y > s.magnitude(m + 1);
}

SpectralPeak refine(const Spectrum& s, std::size_t m) {
  const double y0 = s.magnitude(m - 1);
  const double y1 = s.magnitude(m);
  const double y2 = s.magnitude(m + 1);
  const double denom = y0 - 2.0 * y1 + y2;
  double delta = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
  delta = std::clamp(delta, -0.5, 0.5);
  return {s.omega[m] + delta * s.resolution, y1 - 0.25 * (y0 - y2) * delta, m};
}

}  // namespace

SpectralPeak spectral_peak(const Spectrum& spectrum, double omega_min) {
  bool found = false;
  SpectralPeak best;
  for (std::size_t m = 1; m < last_interior_bin(spectrum); ++m) {
    if (spectrum.omega[m] <= omega_min || !is_local_max(spectrum, m)) continue;
    if (!found || spectrum.magnitude(m) > spectrum.magnitude(best.bin)) {
      best.bin = m;
      found = true;
    }
  }
  if (!found) throw InputError("spectral_peak: no local maximum above omega_min");
  return refine(spectrum, best.bin);
}

std::vector<int> find_harmonics(const Spectrum& spectrum, double omega0, int max_order, double rel_tol,
                                double prominence) {
  std::vector<int> orders;
  const std::size_t last = last_interior_bin(spectrum);
  for (int n = 2; n <= max_order; ++n) {
    const double target = n * omega0;
    if (target * (1.0 + rel_tol) >= spectrum.omega[last]) break;
    std::vector<double> band;
    for (std::size_t m = 1; m <= last; ++m) {
      const double w = spectrum.omega[m];
      if (w >= (n - 0.5) * omega0 && w <= (n + 0.5) * omega0) band.push_back(spectrum.magnitude(m));
    }
    if (band.empty()) continue;
    std::nth_element(band.begin(), band.begin() + static_cast<std::ptrdiff_t>(band.size() / 2), band.end());
    const double median = band[band.size() / 2];
    for (std::size_t m = 1; m < last; ++m) {
      if (std::abs(spectrum.omega[m] - target) > rel_tol * target + spectrum.resolution) continue;
      if (!is_local_max(spectrum, m)) continue;
      const SpectralPeak p = refine(spectrum, m);
      if (std::abs(p.omega - target) <= rel_tol * target && p.magnitude >= prominence * median) {
        orders.push_back(n);
        break;
      }
    }
  }
  return orders;
}

EnvelopeFit fit_envelope(const CorrelationSeries& corr, double floor) {
  const auto& g = corr.values;
  if (g.size() < 3) throw InputError("fit_envelope: correlation too short");
  const double g0 = std::abs(g[0]);
  std::vector<double> t;
  std::vector<double> y;
  for (std::size_t k = 1; k + 1 < g.size(); ++k) {
    const double v = std::abs(g[k]);
    if (!(v >= std::abs(g[k - 1]) && v > std::abs(g[k + 1]))) continue;
    if (v < floor * g0) break;
    t.push_back(corr.lag[k]);
    y.push_back(std::log(v));
  }
  EnvelopeFit fit;
  fit.n_peaks = t.size();
  if (t.size() < 4) {
    throw InputError("fit_envelope: found " + std::to_string(t.size()) + " envelope peaks, need at least 4");
  }
  const double n = static_cast<double>(t.size());
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
  }
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  const double intercept = (sy - slope * st) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - (intercept + slope * t[i]);
    ss += r * r;
  }
  fit.amplitude = std::exp(intercept);
  fit.residual = std::sqrt(ss / n);
  const double span = t.back() - t.front();
  if (slope >= 0.0 || -1.0 / slope > 100.0 * span) {
    fit.infinite = true;
    fit.tau = std::numeric_limits<double>::infinity();
  } else {
    fit.tau = -1.0 / slope;
  }
  return fit;
}

double first_peak_lag(const CorrelationSeries& corr, double min_fraction) {
  const auto& g = corr.values;
  if (g.size() < 3) throw InputError("first_peak_lag: correlation too short");
  const double top = *std::max_element(g.begin(), g.end());
  for (std::size_t k = 1; k + 1 < g.size(); ++k) {
    if (g[k] >= g[k - 1] && g[k] > g[k + 1] && g[k] >= min_fraction * top) return corr.lag[k];
  }
  return 0.0;
}

CollapseReport scaling_collapse(std::span<const double> sizes, std::span<const double> peak_values,
                                double tolerance) {
  if (sizes.size() != peak_values.size()) throw InputError("scaling_collapse: length mismatch");
  if (sizes.size() < 3) throw InputError("scaling_collapse: need at least three sizes");
  CollapseReport report;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (!(peak_values[i] > 0.0) || !std::isfinite(peak_values[i])) {
      throw InputError("scaling_collapse: not applicable, spectrum " + std::to_string(i) + " has no peak");
    }
    report.sizes.push_back(sizes[i]);
    report.peaks.push_back(peak_values[i]);
    report.scaled.push_back(sizes[i] * peak_values[i]);
  }
  const auto [lo, hi] = std::minmax_element(report.scaled.begin(), report.scaled.end());
  report.deviation = (*hi - *lo) / *lo;
  report.collapsed = report.deviation < tolerance;
  return report;
}

}  // namespace rydcycle
