#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "rydcycle/csv.hpp"
#include "rydcycle/errors.hpp"
#include "rydcycle/observables.hpp"

using namespace rydcycle;

namespace {

CorrelationSeries synthetic_corr(double dt, std::size_t k, auto&& f) {
  CorrelationSeries c;
  c.dt = dt;
  for (std::size_t i = 0; i < k; ++i) {
    c.lag.push_back(dt * static_cast<double>(i));
    c.values.push_back(f(dt * static_cast<double>(i)));
  }
  c.n_series = 1;
  return c;
}

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& x : out) x = d(gen);
  return out;
}

}  // namespace

TEST(RelativeFraction, Examples) {
  EXPECT_DOUBLE_EQ(relative_fraction(0.0, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(relative_fraction(0.5, 0.0), -1.0);
  EXPECT_DOUBLE_EQ(relative_fraction(0.2, 0.2), 0.0);
  EXPECT_TRUE(std::isnan(relative_fraction(0.0, 0.0)));
  const std::vector<double> ns{0.0, 0.1, 0.3}, nr{0.0, 0.3, 0.1};
  const SiteAverage avg = site_average_fraction(ns, nr);
  EXPECT_EQ(avg.n_defined, 2u);
  EXPECT_NEAR(avg.value, 0.0, 1e-15);
  const std::vector<double> zero{0.0, 0.0};
  EXPECT_TRUE(site_average_fraction(zero, zero).undefined());
}

TEST(Correlation, FftMatchesDirect) {
  const auto a = noise(3000, 1), b = noise(3000, 2);
  CorrelationOptions opt{5.0, 10.0, 10.0};
  for (auto [x, y] : {std::pair{&a, &b}, std::pair{&a, &a}}) {
    const auto fft = two_time_correlation(*x, *y, 0.05, opt);
    const auto direct = direct_correlation(*x, *y, 0.05, opt);
    ASSERT_EQ(fft.values.size(), direct.values.size());
    for (std::size_t k = 0; k < fft.values.size(); ++k) EXPECT_NEAR(fft.values[k], direct.values[k], 1e-10);
  }
}

TEST(Correlation, RejectsShortSeries) {
  const auto a = noise(100, 3);
  EXPECT_THROW(two_time_correlation(a, a, 0.1, {0.0, 5.0, 10.0}), InputError);
}

TEST(Correlation, SineGivesHalfCosine) {
  std::vector<double> s;
  const double w = 2.0;
  for (int i = 0; i < 200000; ++i) s.push_back(std::sin(w * 0.01 * i));
  const auto g = two_time_correlation(s, s, 0.01, {0.0, 10.0, 10.0});
  for (std::size_t k = 0; k < g.values.size(); k += 37) EXPECT_NEAR(g.values[k], 0.5 * std::cos(w * g.lag[k]), 1e-3);
}

TEST(Correlation, WhiteNoiseIsDelta) {
  const auto a = noise(200000, 9);
  const auto g = two_time_correlation(a, a, 1.0, {0.0, 50.0, 10.0});
  EXPECT_NEAR(g.values[0], 1.0, 0.02);
  for (std::size_t k = 1; k < g.values.size(); ++k) EXPECT_NEAR(g.values[k], 0.0, 0.015);
}

TEST(Correlation, TwoSidedReversal) {
  const auto a = noise(2000, 4), b = noise(2000, 5);
  std::vector<std::span<const double>> va{a}, vb{b};
  CorrelationOptions opt{0.0, 10.0, 10.0};
  const auto two = two_sided_correlation(va, vb, 0.1, opt);
  const auto ab = two_time_correlation(a, b, 0.1, opt);
  const auto ba = two_time_correlation(b, a, 0.1, opt);
  const std::size_t kk = ab.values.size() - 1;
  ASSERT_EQ(two.values.size(), 2 * kk + 1);
  for (std::size_t k = 0; k <= kk; ++k) {
    EXPECT_NEAR(two.values[kk + k], ab.values[k], 1e-12);
    EXPECT_NEAR(two.values[kk - k], ba.values[k], 1e-12);
  }
}

TEST(Correlation, LaggedCrossPeak) {
  std::vector<double> a, b;
  const double w = std::numbers::pi;  // period 2
  for (int i = 0; i < 20000; ++i) {
    const double t = 0.01 * i;
    a.push_back(std::sin(w * t));
    b.push_back(std::sin(w * (t - 0.5)));
  }
  const auto g = two_time_correlation(a, b, 0.01, {0.0, 5.0, 10.0});
  EXPECT_NEAR(first_peak_lag(g), 0.5, 0.011);
}

TEST(Spectrum, ParsevalAndPeak) {
  const double w0 = 2.4;
  const auto g = synthetic_corr(0.05, 400, [&](double t) { return std::exp(-t / 8.0) * std::cos(w0 * t); });
  const Spectrum s = fourier_spectrum(g);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t m = 0; m < s.size(); ++m) lhs += s.re[m] * s.re[m] + s.im[m] * s.im[m];
  for (double v : g.values) rhs += v * v;
  rhs *= static_cast<double>(g.values.size()) * g.dt * g.dt;
  EXPECT_NEAR(lhs, rhs, 1e-8 * rhs);
  EXPECT_NEAR(spectral_peak(s, 0.5).omega, w0, s.resolution / 2.0);
  const Spectrum tapered = fourier_spectrum(g, Taper::Cosine);
  EXPECT_NEAR(spectral_peak(tapered, 0.5).omega, w0, s.resolution / 2.0);
}

TEST(Spectrum, HarmonicsDetected) {
  const auto g = synthetic_corr(0.02, 2000, [](double t) {
    return std::cos(2.0 * t) + 0.5 * std::cos(4.0 * t) + 0.3 * std::cos(6.0 * t);
  });
  const Spectrum s = fourier_spectrum(g, Taper::Cosine);
  const auto peak = spectral_peak(s, 0.5);
  EXPECT_NEAR(peak.omega, 2.0, 0.05);
  EXPECT_EQ(find_harmonics(s, peak.omega), (std::vector<int>{2, 3}));
  const auto pure = fourier_spectrum(synthetic_corr(0.02, 2000, [](double t) { return std::cos(2.0 * t); }), Taper::Cosine);
  EXPECT_TRUE(find_harmonics(pure, 2.0).empty());
}

TEST(Envelope, DecayTimeRecovered) {
  const auto g = synthetic_corr(0.01, 3000, [](double t) { return 0.7 * std::exp(-t / 3.0) * std::cos(4.0 * t); });
  const EnvelopeFit fit = fit_envelope(g);
  EXPECT_FALSE(fit.infinite);
  EXPECT_NEAR(fit.tau, 3.0, 0.15);
  EXPECT_NEAR(fit.amplitude, 0.7, 0.05);
}

TEST(Envelope, UndampedIsInfinite) {
  const auto g = synthetic_corr(0.01, 3000, [](double t) { return std::cos(4.0 * t); });
  EXPECT_TRUE(fit_envelope(g).infinite);
}

TEST(Collapse, Synthetics) {
  const std::vector<double> sizes{64, 256, 1024};
  const std::vector<double> quasi{1.0 / 64, 1.0 / 256, 1.0 / 1024};
  const auto q = scaling_collapse(sizes, quasi);
  EXPECT_TRUE(q.collapsed);
  EXPECT_NEAR(q.deviation, 0.0, 1e-12);
  const std::vector<double> flat{0.3, 0.3, 0.3};
  const auto lc = scaling_collapse(sizes, flat);
  EXPECT_FALSE(lc.collapsed);
  EXPECT_NEAR(lc.deviation, 15.0, 1e-12);
  const std::vector<double> two{1.0, 2.0};
  EXPECT_THROW(scaling_collapse(std::span(two), std::span(two)), InputError);
}

TEST(Csv, RoundTrip) {
  const auto t = parse_csv("a,b\n1,\n2.5,3\n");
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  const auto b = t.numeric_column("b");
  EXPECT_TRUE(std::isnan(b[0]));
  EXPECT_EQ(b[1], 3.0);
  EXPECT_THROW(t.column_index("c"), InputError);
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(std::nan("")), "");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}
