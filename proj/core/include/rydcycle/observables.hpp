#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace rydcycle {

/// f = (n_r - n_s) / (n_r + n_s); NaN when n_s + n_r < 1e-9.
double relative_fraction(double n_s, double n_r);

struct SiteAverage {
  double value = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_defined = 0;
  bool undefined() const { return n_defined == 0; }
};

/// Mean of the site fractions over sites where the fraction is defined.
SiteAverage site_average_fraction(std::span<const double> n_s, std::span<const double> n_r);

struct CorrelationSeries {
  double dt = 0.0;
  std::vector<double> lag;
  std::vector<double> values;
  std::size_t n_series = 0;  // trajectories averaged
};

struct CorrelationOptions {
  double t_transient = 0.0;
  double t_max_lag = 0.0;
  // Post-transient duration must reach min_duration_factor * t_max_lag.
  double min_duration_factor = 10.0;
};

/// G_ab(t) = < da(t') db(t' + t) >_{t'} with per-series mean removal and the
/// unbiased 1/(n - k) normalisation, evaluated by FFT. Each (a_i, b_i) pair is
/// correlated separately and the results averaged.
CorrelationSeries two_time_correlation(const std::vector<std::span<const double>>& a,
                                       const std::vector<std::span<const double>>& b, double dt,
                                       const CorrelationOptions& options);

CorrelationSeries two_time_correlation(std::span<const double> a, std::span<const double> b, double dt,
                                       const CorrelationOptions& options);

/// Lags -K..K; entry K + k holds G_ab(k dt) and K - k holds G_ab(-k dt) = G_ba(k dt).
CorrelationSeries two_sided_correlation(const std::vector<std::span<const double>>& a,
                                        const std::vector<std::span<const double>>& b, double dt,
                                        const CorrelationOptions& options);

/// Direct O(n^2) evaluation of the same estimator, single pair.
CorrelationSeries direct_correlation(std::span<const double> a, std::span<const double> b, double dt,
                                     const CorrelationOptions& options);

enum class Taper { None, Cosine };

struct Spectrum {
  double dt = 0.0;          // lag step of the transformed series
  double resolution = 0.0;  // 2 pi / (K dt)
  std::vector<double> omega;  // signed angular frequency, FFT order
  std::vector<double> re, im;

  std::size_t size() const { return omega.size(); }
  double magnitude(std::size_t m) const;
};

/// F(omega_m) = dt sum_k w_k G_k exp(i omega_m t_k) on the full K-point grid.
Spectrum fourier_spectrum(const CorrelationSeries& corr, Taper taper = Taper::None);

struct SpectralPeak {
  double omega = 0.0;
  double magnitude = 0.0;
  std::size_t bin = 0;
};

/// Largest local maximum of |F| at omega > omega_min, refined by a parabola
/// through the three bins around it. Throws InputError when none exists.
SpectralPeak spectral_peak(const Spectrum& spectrum, double omega_min = 0.0);

/// Orders n = 2..max_order for which a local maximum of |F| lies within
/// rel_tol * n * omega0 of n * omega0 and stands at least `prominence` times
/// above the median |F| of the band [(n - 1/2) omega0, (n + 1/2) omega0].
std::vector<int> find_harmonics(const Spectrum& spectrum, double omega0, int max_order = 6,
                                double rel_tol = 0.05, double prominence = 3.0);

struct EnvelopeFit {
  double amplitude = 0.0;
  double tau = 0.0;
  double residual = 0.0;
  bool infinite = false;
  std::size_t n_peaks = 0;
};

/// Log-linear fit of the local maxima of |G| at t > 0 down to floor * |G(0)|.
/// A non-decaying envelope (tau < 0 or tau beyond 100 fitted spans) returns
/// infinite = true.
EnvelopeFit fit_envelope(const CorrelationSeries& corr, double floor = 0.05);

/// Lag of the first local maximum of G at t > 0 whose value is at least
/// min_fraction of max G over the grid; 0 when there is none.
double first_peak_lag(const CorrelationSeries& corr, double min_fraction = 0.5);

struct CollapseReport {
  std::vector<double> sizes;
  std::vector<double> peaks;
  std::vector<double> scaled;  // N * F_peak
  double deviation = 0.0;      // (max - min) / min of scaled
  bool collapsed = false;
};

/// Needs at least three sizes.
CollapseReport scaling_collapse(std::span<const double> sizes, std::span<const double> peak_values,
                                double tolerance = 0.2);

}  // namespace rydcycle
