#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "rydcycle/lattice.hpp"
#include "rydcycle/params.hpp"

namespace rydcycle {

struct AllToAll {
  CollectiveCouplings chi;
};

struct VanDerWaals {
  double c6_ss = 0.0;
  double c6_rr = 0.0;
  double c6_sr = 0.0;
  double cutoff = 6.0;
};

using InteractionSpec = std::variant<AllToAll, VanDerWaals>;

/// Pair energies V_{lk,ab} for one unordered pair.
struct PairCoupling {
  double ss = 0.0;
  double rr = 0.0;
  double sr = 0.0;
};

/// Symmetric, zero-diagonal pair couplings of an N-atom register.
///
/// All-to-all couplings are stored as a single uniform pair value so that
/// fields cost O(N); finite-range couplings are stored as per-site neighbor
/// lists restricted to the cutoff.
class CouplingMatrix {
 public:
  struct Neighbor {
    std::uint32_t site;
    PairCoupling v;
  };

  static CouplingMatrix uniform(std::size_t n_sites, PairCoupling v);
  static CouplingMatrix from_neighbors(std::vector<std::vector<Neighbor>> neighbors);

  std::size_t size() const { return n_sites_; }
  bool is_uniform() const { return uniform_; }

  /// V_{lk}; zero for l == k.
  PairCoupling pair(std::size_t l, std::size_t k) const;

  /// Empty for uniform matrices.
  std::span<const Neighbor> neighbors(std::size_t l) const;

  /// 2 sum_k V_{lk,ab}: the shift on atom l if every other atom were fully
  /// excited in the corresponding channel.
  PairCoupling total_weight(std::size_t l) const;

  /// Site-resolved shifts h_s^l = 2 sum_k (V_ss p_s^k + V_sr p_r^k) and
  /// h_r^l = 2 sum_k (V_rr p_r^k + V_sr p_s^k).
  void site_fields(std::span<const double> p_s, std::span<const double> p_r,
                   std::span<double> h_s, std::span<double> h_r) const;

 private:
  std::size_t n_sites_ = 0;
  bool uniform_ = true;
  PairCoupling uniform_value_{};
  std::vector<std::vector<Neighbor>> neighbors_;
};

struct CouplingBuildOptions {
  // Accept a cutoff below one lattice spacing (an interaction-free register).
  bool allow_degenerate = false;
};

CouplingMatrix build_coupling_matrix(const Lattice& lattice, const InteractionSpec& spec,
                                     CouplingBuildOptions options = {});

/// Arbitrary site positions (unit spacing grid coordinates); used for chains
/// in the exact oracle.
CouplingMatrix build_coupling_matrix(std::span<const Site> sites, const InteractionSpec& spec,
                                     CouplingBuildOptions options = {});

/// S(R) = sum over (m, n) != 0 with m^2 + n^2 <= R^2 of (m^2 + n^2)^-3.
double square_lattice_sum(double cutoff);

/// C6 coefficients that give a bulk atom the same total field as the
/// collective couplings: 2 * c6_ab * S(cutoff) = chi_ab.
VanDerWaals calibrate_vdw(const CollectiveCouplings& chi, double cutoff = 6.0);

}  // namespace rydcycle
