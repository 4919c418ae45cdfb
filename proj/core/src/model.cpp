#include "rydcycle/model.hpp"

#include <cmath>

#include "rydcycle/errors.hpp"

namespace rydcycle {

void SystemParams::validate(bool allow_zero_decay) const {
  const double all[] = {omega_s, omega_r, delta_s, delta_r, gamma_s, gamma_r};
  for (double v : all) {
    if (!std::isfinite(v)) throw ConfigError("system parameters must be finite");
  }
  if (allow_zero_decay ? (gamma_s < 0.0 || gamma_r < 0.0) : (gamma_s <= 0.0 || gamma_r <= 0.0)) {
    throw ConfigError(allow_zero_decay ? "decay rates must be non-negative" : "decay rates must be positive");
  }
  if (omega_s < 0.0 || omega_r < 0.0) throw ConfigError("Rabi frequencies must be non-negative");
}

SystemParams SystemParams::reference(double omega, double delta_r) {
  return {omega, omega, 8.0, delta_r, 1.0, 1.0};
}

Eigen::Matrix3cd single_atom_hamiltonian(const SystemParams& p, FieldShift shift) {
  using level::g;
  using level::r;
  using level::s;
  Eigen::Matrix3cd h = Eigen::Matrix3cd::Zero();
  h(g, s) = h(s, g) = 0.5 * p.omega_s;
  h(g, r) = h(r, g) = 0.5 * p.omega_r;
  h(s, s) = -p.delta_s + shift.s;
  h(r, r) = -p.delta_r + shift.r;
  return h;
}

}  // namespace rydcycle
