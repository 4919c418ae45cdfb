#include "rydcycle/coupling.hpp"

#include <cmath>
#include <string>

#include "rydcycle/errors.hpp"

namespace rydcycle {

CouplingMatrix CouplingMatrix::uniform(std::size_t n_sites, PairCoupling v) {
  CouplingMatrix m;
  m.n_sites_ = n_sites;
  m.uniform_ = true;
  m.uniform_value_ = n_sites > 1 ? v : PairCoupling{};
  return m;
}

CouplingMatrix CouplingMatrix::from_neighbors(std::vector<std::vector<Neighbor>> neighbors) {
  CouplingMatrix m;
  m.n_sites_ = neighbors.size();
  m.uniform_ = false;
  m.neighbors_ = std::move(neighbors);
  return m;
}

PairCoupling CouplingMatrix::pair(std::size_t l, std::size_t k) const {
  if (l == k) return {};
  if (uniform_) return uniform_value_;
  for (const auto& nb : neighbors_[l]) {
    if (nb.site == k) return nb.v;
  }
  return {};
}

std::span<const CouplingMatrix::Neighbor> CouplingMatrix::neighbors(std::size_t l) const {
  if (uniform_) return {};
  return neighbors_[l];
}

PairCoupling CouplingMatrix::total_weight(std::size_t l) const {
  if (uniform_) {
    const double pairs = 2.0 * static_cast<double>(n_sites_ > 0 ? n_sites_ - 1 : 0);
    return {pairs * uniform_value_.ss, pairs * uniform_value_.rr, pairs * uniform_value_.sr};
  }
  PairCoupling w;
  for (const auto& nb : neighbors_[l]) {
    w.ss += 2.0 * nb.v.ss;
    w.rr += 2.0 * nb.v.rr;
    w.sr += 2.0 * nb.v.sr;
  }
  return w;
}

void CouplingMatrix::site_fields(std::span<const double> p_s, std::span<const double> p_r,
                                 std::span<double> h_s, std::span<double> h_r) const {
  const std::size_t n = n_sites_;
  if (uniform_) {
    double sum_s = 0.0;
    double sum_r = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      sum_s += p_s[l];
      sum_r += p_r[l];
    }
    const PairCoupling v = uniform_value_;
    for (std::size_t l = 0; l < n; ++l) {
      const double others_s = sum_s - p_s[l];
      const double others_r = sum_r - p_r[l];
      h_s[l] = 2.0 * (v.ss * others_s + v.sr * others_r);
      h_r[l] = 2.0 * (v.rr * others_r + v.sr * others_s);
    }
    return;
  }
  for (std::size_t l = 0; l < n; ++l) {
    double acc_s = 0.0;
    double acc_r = 0.0;
    for (const auto& nb : neighbors_[l]) {
      const double ps = p_s[nb.site];
      const double pr = p_r[nb.site];
      acc_s += nb.v.ss * ps + nb.v.sr * pr;
      acc_r += nb.v.rr * pr + nb.v.sr * ps;
    }
    h_s[l] = 2.0 * acc_s;
    h_r[l] = 2.0 * acc_r;
  }
}

namespace {

void check_finite(const InteractionSpec& spec) {
  const bool ok = std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, AllToAll>) {
          return std::isfinite(s.chi.ss) && std::isfinite(s.chi.rr) && std::isfinite(s.chi.sr);
        } else {
          return std::isfinite(s.c6_ss) && std::isfinite(s.c6_rr) && std::isfinite(s.c6_sr) &&
                 std::isfinite(s.cutoff);
        }
      },
      spec);
  if (!ok) throw ConfigError("interaction couplings must be finite");
}

CouplingMatrix all_to_all(std::size_t n, const CollectiveCouplings& chi) {
  if (n < 2) return CouplingMatrix::uniform(n, {});
  const double norm = 2.0 * static_cast<double>(n - 1);
  return CouplingMatrix::uniform(n, {chi.ss / norm, chi.rr / norm, chi.sr / norm});
}

template <typename DistanceFn>
CouplingMatrix van_der_waals(std::size_t n, const VanDerWaals& vdw, CouplingBuildOptions options,
                             DistanceFn&& distance) {
  if (vdw.cutoff < 1.0 && !options.allow_degenerate) {
    throw ConfigError("vdW cutoff " + std::to_string(vdw.cutoff) +
                      " is below one lattice spacing; no atom would interact");
  }
  std::vector<std::vector<CouplingMatrix::Neighbor>> neighbors(n);
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t k = 0; k < n; ++k) {
      if (k == l) continue;
      const double r = distance(l, k);
      if (r > vdw.cutoff) continue;
      const double inv6 = 1.0 / (r * r * r * r * r * r);
      neighbors[l].push_back({static_cast<std::uint32_t>(k),
                              {vdw.c6_ss * inv6, vdw.c6_rr * inv6, vdw.c6_sr * inv6}});
    }
  }
  return CouplingMatrix::from_neighbors(std::move(neighbors));
}

}  // namespace

CouplingMatrix build_coupling_matrix(const Lattice& lattice, const InteractionSpec& spec,
                                     CouplingBuildOptions options) {
  check_finite(spec);
  if (const auto* a2a = std::get_if<AllToAll>(&spec)) return all_to_all(lattice.size(), a2a->chi);
  return van_der_waals(lattice.size(), std::get<VanDerWaals>(spec), options,
                       [&](std::size_t l, std::size_t k) { return lattice.distance(l, k); });
}

CouplingMatrix build_coupling_matrix(std::span<const Site> sites, const InteractionSpec& spec,
                                     CouplingBuildOptions options) {
  check_finite(spec);
  if (const auto* a2a = std::get_if<AllToAll>(&spec)) return all_to_all(sites.size(), a2a->chi);
  return van_der_waals(sites.size(), std::get<VanDerWaals>(spec), options,
                       [&](std::size_t l, std::size_t k) {
                         return std::hypot(static_cast<double>(sites[l].i - sites[k].i),
                                           static_cast<double>(sites[l].j - sites[k].j));
                       });
}

double square_lattice_sum(double cutoff) {
  const int reach = static_cast<int>(std::floor(cutoff));
  const double r2_max = cutoff * cutoff;
  double sum = 0.0;
  for (int m = -reach; m <= reach; ++m) {
    for (int n = -reach; n <= reach; ++n) {
      if (m == 0 && n == 0) continue;
      const double r2 = static_cast<double>(m * m + n * n);
      if (r2 > r2_max) continue;
      sum += 1.0 / (r2 * r2 * r2);
    }
  }
  return sum;
}

VanDerWaals calibrate_vdw(const CollectiveCouplings& chi, double cutoff) {
  const double s = square_lattice_sum(cutoff);
  if (s <= 0.0) throw ConfigError("cannot calibrate C6 with a cutoff below one lattice spacing");
  return {chi.ss / (2.0 * s), chi.rr / (2.0 * s), chi.sr / (2.0 * s), cutoff};
}

}  // namespace rydcycle
