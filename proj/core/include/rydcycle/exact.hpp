#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rydcycle/coupling.hpp"
#include "rydcycle/params.hpp"

namespace rydcycle {

inline constexpr int kMaxExactAtoms = 6;

/// Many-body density matrix over the site-major tensor basis: basis index
/// i = sum_l d_l 3^(N-1-l) with d_l in {g=0, s=1, r=2}.
class DensityMatrix {
 public:
  DensityMatrix(int n_atoms, Eigen::MatrixXcd rho);

  static DensityMatrix ground(int n_atoms);
  /// Tensor product of single-site density matrices.
  static DensityMatrix product(std::span<const Eigen::Matrix3cd> sites);

  int n_atoms() const { return n_atoms_; }
  Eigen::Index dim() const { return rho_.rows(); }
  const Eigen::MatrixXcd& matrix() const { return rho_; }
  Eigen::MatrixXcd& matrix() { return rho_; }

  double trace_error() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;
  /// <sigma_l^{aa}>.
  double population(int site, int level) const;

 private:
  int n_atoms_;
  Eigen::MatrixXcd rho_;
};

/// Action of the full master-equation generator, applied term by term from
/// index tables; the 9^N superoperator is never formed.
class ExactLiouvillian {
 public:
  ExactLiouvillian(const SystemParams& p, const CouplingMatrix& couplings);

  int n_atoms() const { return n_atoms_; }
  Eigen::Index dim() const { return dim_; }

  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const;
  /// Re tr(H rho).
  double energy(const Eigen::MatrixXcd& rho) const;
  int digit(Eigen::Index basis_index, int site) const {
    return digits_[static_cast<std::size_t>(basis_index) * n_atoms_ + site];
  }

 private:
  struct Partner {
    std::int32_t index;
    double weight;  // Omega_a / 2
  };
  struct Recycle {
    std::int32_t from;  // basis index with |a> at site l
    std::int32_t to;    // same index with |g> at site l
    double gamma;
  };

  SystemParams params_;
  int n_atoms_;
  Eigen::Index dim_;
  std::vector<std::uint8_t> digits_;
  std::vector<double> energy_;
  std::vector<double> decay_;  // half the total decay rate out of each basis state
  std::vector<std::int32_t> partner_offsets_;
  std::vector<Partner> partners_;
  // recycles_[c] holds, for channel c = (site, level), the upward map
  // restricted to indices with |g> at that site.
  std::vector<std::vector<Recycle>> recycles_;
};

Eigen::MatrixXcd liouvillian_apply(const DensityMatrix& rho, const SystemParams& p,
                                   const CouplingMatrix& couplings);

struct ExactTrajectory {
  int n_atoms = 0;
  std::vector<double> times;
  // Row-major [sample][site].
  std::vector<double> n_s;
  std::vector<double> n_r;

  double site_n_s(std::size_t sample, int site) const { return n_s[sample * n_atoms + site]; }
  double site_n_r(std::size_t sample, int site) const { return n_r[sample * n_atoms + site]; }
  double mean_n_s(std::size_t sample) const;
  double mean_n_r(std::size_t sample) const;
};

/// Fixed-step RK4 of the full master equation. Trace drift above 1e-6 throws
/// IntegrationError; for N <= 3 positivity is checked at ten evenly spaced
/// times.
ExactTrajectory evolve_exact(const DensityMatrix& initial, const SystemParams& p,
                             const CouplingMatrix& couplings, double t_end, double dt,
                             double sample_interval = 0.0);

}  // namespace rydcycle
