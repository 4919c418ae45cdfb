#pragma once

#include <vector>

#include <Eigen/Core>

#include "rydcycle/params.hpp"

namespace rydcycle {

/// Rate-equation limit with all coherences adiabatically eliminated at frozen
/// populations (weak-drive linear response):
///   dn_a/dt = gamma_up_a(n_s, n_r) * n_g - Gamma_a * n_a,
///   gamma_up_a = (Omega_a^2 / 4) Gamma_a / (delta_a^2 + Gamma_a^2 / 4),
///   delta_a = Delta_a - h_a(n_s, n_r).

double excitation_rate(double omega, double detuning, double gamma);

struct ClassicalRates {
  double dn_s = 0.0;
  double dn_r = 0.0;
};

ClassicalRates classical_rhs(double n_s, double n_r, const SystemParams& p, const CollectiveCouplings& chi);

/// Analytic 2x2 Jacobian d(dn_a/dt)/dn_b.
Eigen::Matrix2d classical_jacobian(double n_s, double n_r, const SystemParams& p,
                                   const CollectiveCouplings& chi);

struct ClassicalFixedPoint {
  double n_s = 0.0;
  double n_r = 0.0;
  Eigen::Vector2cd eigenvalues;
  bool stable = false;
};

/// All fixed points inside the simplex n_s, n_r >= 0, n_s + n_r <= 1, found by
/// Newton from a regular grid of starts.
std::vector<ClassicalFixedPoint> classical_fixed_points(const SystemParams& p, const CollectiveCouplings& chi);

}  // namespace rydcycle
