#pragma once

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "rydcycle/params.hpp"

namespace rydcycle {

/// Real coordinates (sigma^ss, sigma^rr, Re sigma^gs, Im sigma^gs,
/// Re sigma^gr, Im sigma^gr, Re sigma^sr, Im sigma^sr); sigma^gg follows
/// from the trace.
using MFCoords = Eigen::Matrix<double, 8, 1>;
using Jacobian8 = Eigen::Matrix<double, 8, 8>;

/// Single-atom density matrix of the factorized state, basis {g, s, r}.
/// sigma^ab = <|a><b|> = rho(b, a).
struct MFState {
  Eigen::Matrix3cd rho = Eigen::Matrix3cd::Zero();

  static MFState ground();
  /// Diagonal mixture with the given Rydberg populations.
  static MFState mixture(double n_s, double n_r);
  static MFState from_coords(const MFCoords& x);

  MFCoords coords() const;
  std::complex<double> sigma(int a, int b) const { return rho(b, a); }
  double n_s() const { return rho(1, 1).real(); }
  double n_r() const { return rho(2, 2).real(); }

  double trace_error() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;
};

/// Lindblad right-hand side of one atom in a fixed Hamiltonian:
/// -i[H, rho] + sum_a Gamma_a (L_a rho L_a^+ - {L_a^+ L_a, rho}/2), L_a = |g><a|.
Eigen::Matrix3cd lindblad_rhs(const Eigen::Matrix3cd& rho, const Eigen::Matrix3cd& h,
                              const SystemParams& p);

/// Mean-field flow: lindblad_rhs with shifts evaluated at the state's own
/// populations.
Eigen::Matrix3cd mf_rhs(const MFState& state, const SystemParams& p, const CollectiveCouplings& chi);
MFCoords mf_rhs(const MFCoords& x, const SystemParams& p, const CollectiveCouplings& chi);

struct MFTrajectory {
  std::vector<double> times;
  std::vector<MFState> states;

  std::vector<double> n_s() const;
  std::vector<double> n_r() const;
};

/// Fixed-step RK4 with step t_end / ceil(t_end / dt_max). States are kept
/// every `sample_interval` (rounded to a whole number of steps; 0 keeps every
/// step). Throws IntegrationError once |trace - 1| exceeds 1e-6.
MFTrajectory evolve_mf(const MFState& initial, const SystemParams& p, const CollectiveCouplings& chi,
                       double t_end, double dt_max, double sample_interval = 0.0);

struct FixedPoint {
  MFState state;
  double residual = 0.0;
};

/// Damped Newton from a deterministic grid of starting states. Returns
/// physical roots with |mf_rhs| < 1e-10, merged when entrywise closer than
/// 1e-6, ordered by (n_r, n_s). Throws std::runtime_error if none is found.
std::vector<FixedPoint> find_fixed_points(const SystemParams& p, const CollectiveCouplings& chi,
                                          int n_starts = 32);

/// Central finite differences in MFCoords at step 1e-6, validated against
/// step 1e-5 (per-entry agreement 1e-4, otherwise IllConditionedError).
Jacobian8 jacobian(const MFState& fixed_point, const SystemParams& p, const CollectiveCouplings& chi);

/// Eigenvalues sorted by descending real part; conjugate pairs adjacent with
/// the positive imaginary part first.
struct EigenSpectrum {
  std::array<std::complex<double>, 8> values{};

  const std::complex<double>& dominant() const { return values[0]; }
  bool stable() const { return values[0].real() < 0.0; }
  /// -|Im lambda_0| / Re lambda_0; large and positive near a stable focus.
  double quasicycle_ratio() const { return -std::abs(values[0].imag()) / values[0].real(); }
};

EigenSpectrum eigen_spectrum(const Jacobian8& j);

struct LimitCycleMetrics {
  double period = 0.0;
  double dt_rs = 0.0;  // time advance of n_r peaks over n_s peaks
  double t_rs = 0.0;   // dt_rs / period in [-0.5, 0.5)
  double amplitude_s = 0.0;
  double amplitude_r = 0.0;
  std::size_t n_peaks = 0;
};

/// Period and predator-prey time advance from uniformly sampled n_s(t),
/// n_r(t). Series are smoothed with a moving average over
/// `smoothing_fraction` of a period before peak detection. Throws
/// NotPeriodicError when fewer than three peaks are found.
LimitCycleMetrics limit_cycle_metrics(std::span<const double> times, std::span<const double> n_s,
                                      std::span<const double> n_r, double smoothing_fraction = 1.0 / 20.0);
LimitCycleMetrics limit_cycle_metrics(const MFTrajectory& series, double smoothing_fraction = 1.0 / 20.0);

enum class Phase { MonostableSTA, PureLC, CoexistSTA_LC, BistableSTA, Indeterminate };

std::string_view to_string(Phase phase);

struct FixedPointReport {
  MFState state;
  EigenSpectrum spectrum;
  bool stable = false;
};

struct PhaseLabel {
  Phase phase = Phase::Indeterminate;
  std::vector<FixedPointReport> fixed_points;
  // Of the stable fixed point with the largest Re[lambda_0].
  std::optional<double> quasicycle_ratio;
  std::optional<std::complex<double>> dominant_eigenvalue;
  std::optional<LimitCycleMetrics> cycle;

  int stable_count() const;
};

struct ClassifyOptions {
  double t_total = 200.0;   // first integration; the second half is analysed
  double t_max = 4000.0;    // cap when the first pass is inconclusive
  double dt = 5e-3;
  double lc_amplitude = 1e-3;
  double ambiguous_floor = 1e-4;
  double poincare_tolerance = 1e-4;
  int n_starts = 32;
};

PhaseLabel classify_phase(const SystemParams& p, const CollectiveCouplings& chi,
                          const ClassifyOptions& options = {});

}  // namespace rydcycle
