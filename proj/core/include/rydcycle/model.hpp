#pragma once

#include <Eigen/Core>

#include "rydcycle/params.hpp"

namespace rydcycle {

namespace level {
inline constexpr int g = 0;
inline constexpr int s = 1;
inline constexpr int r = 2;
}  // namespace level

/// Single-atom Hamiltonian: drives Omega_a/2 on g<->a, diagonal energies
/// -Delta_a + h_a.
Eigen::Matrix3cd single_atom_hamiltonian(const SystemParams& p, FieldShift shift);

}  // namespace rydcycle
