#include "rydcycle/classical.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace rydcycle {

namespace {

double excitation_rate_slope(double omega, double detuning, double gamma) {
  const double denom = detuning * detuning + 0.25 * gamma * gamma;
  return -0.25 * omega * omega * gamma * 2.0 * detuning / (denom * denom);
}

}  // namespace

double excitation_rate(double omega, double detuning, double gamma) {
  return 0.25 * omega * omega * gamma / (detuning * detuning + 0.25 * gamma * gamma);
}

ClassicalRates classical_rhs(double n_s, double n_r, const SystemParams& p, const CollectiveCouplings& chi) {
  const FieldShift h = mean_field_shifts(n_s, n_r, chi);
  const double n_g = 1.0 - n_s - n_r;
  return {excitation_rate(p.omega_s, p.delta_s - h.s, p.gamma_s) * n_g - p.gamma_s * n_s,
          excitation_rate(p.omega_r, p.delta_r - h.r, p.gamma_r) * n_g - p.gamma_r * n_r};
}

Eigen::Matrix2d classical_jacobian(double n_s, double n_r, const SystemParams& p,
                                   const CollectiveCouplings& chi) {
  const FieldShift h = mean_field_shifts(n_s, n_r, chi);
  const double n_g = 1.0 - n_s - n_r;
  const double det_s = p.delta_s - h.s;
  const double det_r = p.delta_r - h.r;
  const double up_s = excitation_rate(p.omega_s, det_s, p.gamma_s);
  const double up_r = excitation_rate(p.omega_r, det_r, p.gamma_r);
  const double slope_s = excitation_rate_slope(p.omega_s, det_s, p.gamma_s);
  const double slope_r = excitation_rate_slope(p.omega_r, det_r, p.gamma_r);
  // d(det_s)/dn_s = -chi_ss, d(det_s)/dn_r = -chi_sr, and symmetrically for r.
  Eigen::Matrix2d j;
  j(0, 0) = -slope_s * chi.ss * n_g - up_s - p.gamma_s;
  j(0, 1) = -slope_s * chi.sr * n_g - up_s;
  j(1, 0) = -slope_r * chi.sr * n_g - up_r;
  j(1, 1) = -slope_r * chi.rr * n_g - up_r - p.gamma_r;
  return j;
}

std::vector<ClassicalFixedPoint> classical_fixed_points(const SystemParams& p, const CollectiveCouplings& chi) {
  constexpr int kGrid = 12;
  std::vector<ClassicalFixedPoint> out;
  for (int a = 0; a < kGrid; ++a) {
    for (int b = 0; a + b < kGrid; ++b) {
      Eigen::Vector2d x(a / static_cast<double>(kGrid), b / static_cast<double>(kGrid));
      bool converged = false;
      for (int iter = 0; iter < 100; ++iter) {
        const ClassicalRates f = classical_rhs(x[0], x[1], p, chi);
        const Eigen::Vector2d fv(f.dn_s, f.dn_r);
        if (fv.norm() < 1e-13) {
          converged = true;
          break;
        }
        const Eigen::Vector2d step = classical_jacobian(x[0], x[1], p, chi).fullPivLu().solve(-fv);
        double alpha = 1.0;
        Eigen::Vector2d trial = x + step;
        for (int k = 0; k < 30; ++k, alpha *= 0.5) {
          trial = x + alpha * step;
          const ClassicalRates ft = classical_rhs(trial[0], trial[1], p, chi);
          if (Eigen::Vector2d(ft.dn_s, ft.dn_r).norm() < fv.norm()) break;
        }
        x = trial;
      }
      if (!converged) continue;
      if (x[0] < -1e-12 || x[1] < -1e-12 || x[0] + x[1] > 1.0 + 1e-12) continue;
      const bool duplicate = std::any_of(out.begin(), out.end(), [&](const ClassicalFixedPoint& fp) {
        return std::abs(fp.n_s - x[0]) < 1e-8 && std::abs(fp.n_r - x[1]) < 1e-8;
      });
      if (duplicate) continue;
      ClassicalFixedPoint fp;
      fp.n_s = x[0];
      fp.n_r = x[1];
      fp.eigenvalues = classical_jacobian(x[0], x[1], p, chi).eigenvalues();
      fp.stable = fp.eigenvalues.real().maxCoeff() < 0.0;
      out.push_back(fp);
    }
  }
  return out;
}

}  // namespace rydcycle
