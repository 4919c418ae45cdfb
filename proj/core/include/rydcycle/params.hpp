#pragma once

namespace rydcycle {

/// Laser and decay constants of the three-level scheme, all in units of the
/// reference decay rate. Basis order everywhere is {g, s, r}.
struct SystemParams {
  double omega_s = 2.0;
  double omega_r = 2.0;
  double delta_s = 8.0;
  double delta_r = 3.0;
  double gamma_s = 1.0;
  double gamma_r = 1.0;

  /// Throws ConfigError unless both decay rates are positive and both Rabi
  /// frequencies are non-negative and everything is finite. Closed-system
  /// checks pass allow_zero_decay to accept gamma = 0.
  void validate(bool allow_zero_decay = false) const;

  double gamma_max() const { return gamma_s > gamma_r ? gamma_s : gamma_r; }

  /// gamma_s = gamma_r = 1, omega_s = omega_r = omega, delta_s = 8.
  static SystemParams reference(double omega, double delta_r);
};

/// Collective mean-field couplings chi_ab = 2 N^-1 sum_{k != l} V_{lk,ab}.
struct CollectiveCouplings {
  double ss = 12.0;
  double rr = 12.0;
  double sr = 12.0;

  static CollectiveCouplings uniform(double chi) { return {chi, chi, chi}; }
};

struct FieldShift {
  double s = 0.0;
  double r = 0.0;
};

/// Interaction-induced level shifts felt by an atom when the surrounding
/// medium has Rydberg populations (n_s, n_r).
constexpr FieldShift mean_field_shifts(double n_s, double n_r, const CollectiveCouplings& chi) {
  return {chi.ss * n_s + chi.sr * n_r, chi.rr * n_r + chi.sr * n_s};
}

}  // namespace rydcycle
