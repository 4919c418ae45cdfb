#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "rydcycle/coupling.hpp"
#include "rydcycle/errors.hpp"
#include "rydcycle/lattice.hpp"
#include "rydcycle/model.hpp"

using namespace rydcycle;

namespace {

// Independent brute-force lattice sum over a square block, no cutoff.
double brute_lattice_sum(int radius) {
  double s = 0.0;
  for (int m = -radius; m <= radius; ++m) {
    for (int n = -radius; n <= radius; ++n) {
      if (m == 0 && n == 0) continue;
      const double r2 = double(m) * m + double(n) * n;
      s += 1.0 / (r2 * r2 * r2);
    }
  }
  return s;
}

}  // namespace

TEST(Lattice, SiteIndexRoundTrip) {
  Lattice lat(5);
  EXPECT_EQ(lat.size(), 25u);
  for (std::size_t l = 0; l < lat.size(); ++l) {
    const Site s = lat.site(l);
    EXPECT_EQ(lat.index(s.i, s.j), l);
  }
}

TEST(Lattice, PeriodicUsesMinimumImage) {
  Lattice open(6, Boundary::Open);
  Lattice ring(6, Boundary::Periodic);
  EXPECT_DOUBLE_EQ(open.distance(open.index(0, 0), open.index(0, 5)), 5.0);
  EXPECT_DOUBLE_EQ(ring.distance(ring.index(0, 0), ring.index(0, 5)), 1.0);
  EXPECT_DOUBLE_EQ(ring.distance(ring.index(0, 0), ring.index(5, 5)), std::sqrt(2.0));
}

TEST(Coupling, AllToAllPairValue) {
  const auto cm = build_coupling_matrix(Lattice(2), AllToAll{CollectiveCouplings::uniform(12.0)});
  for (std::size_t l = 0; l < 4; ++l) {
    for (std::size_t k = 0; k < 4; ++k) {
      const double expect = l == k ? 0.0 : 2.0;
      EXPECT_DOUBLE_EQ(cm.pair(l, k).ss, expect);
      EXPECT_DOUBLE_EQ(cm.pair(l, k).sr, expect);
    }
    EXPECT_DOUBLE_EQ(cm.total_weight(l).rr, 12.0);
  }
}

TEST(Coupling, VdwTwoAtomsAtDistanceTwo) {
  const std::vector<Site> sites{{0, 0}, {0, 2}};
  const auto cm = build_coupling_matrix(sites, VanDerWaals{1.0, 1.0, 1.0, 5.0});
  EXPECT_DOUBLE_EQ(cm.pair(0, 1).ss, 1.0 / 64.0);
  EXPECT_DOUBLE_EQ(cm.pair(1, 0).rr, 1.0 / 64.0);
}

TEST(Coupling, LatticeSumMatchesBruteForce) {
  const double full = brute_lattice_sum(300);
  EXPECT_NEAR(full, 4.6589, 5e-4);
  // The r^-6 tail beyond six sites is below a part in a thousand.
  EXPECT_NEAR(square_lattice_sum(6.0), full, 1e-3 * full);
  const VanDerWaals c = calibrate_vdw(CollectiveCouplings::uniform(12.0), 6.0);
  EXPECT_NEAR(c.c6_ss, 12.0 / (2.0 * square_lattice_sum(6.0)), 1e-12);
  EXPECT_NEAR(c.c6_ss, 1.29, 0.01);
}

TEST(Coupling, CalibratedBulkAtomSeesChi) {
  const VanDerWaals c = calibrate_vdw(CollectiveCouplings::uniform(12.0), 6.0);
  const Lattice lat(16, Boundary::Periodic);
  const auto cm = build_coupling_matrix(lat, c);
  EXPECT_NEAR(cm.total_weight(lat.index(8, 8)).ss, 12.0, 1e-9);
}

TEST(Coupling, OpenEdgeAtomsSeeSmallerField) {
  const Lattice lat(10, Boundary::Open);
  const auto cm = build_coupling_matrix(lat, calibrate_vdw(CollectiveCouplings::uniform(12.0)));
  EXPECT_LT(cm.total_weight(lat.index(0, 0)).ss, cm.total_weight(lat.index(0, 5)).ss);
  EXPECT_LT(cm.total_weight(lat.index(0, 5)).ss, cm.total_weight(lat.index(5, 5)).ss);
}

TEST(Coupling, SymmetricZeroDiagonal) {
  const Lattice lat(5, Boundary::Periodic);
  const auto cm = build_coupling_matrix(lat, VanDerWaals{1.3, 0.7, 2.0, 3.0});
  for (std::size_t l = 0; l < lat.size(); ++l) {
    EXPECT_EQ(cm.pair(l, l).ss, 0.0);
    for (std::size_t k = 0; k < lat.size(); ++k) {
      EXPECT_EQ(cm.pair(l, k).ss, cm.pair(k, l).ss);
      EXPECT_EQ(cm.pair(l, k).sr, cm.pair(k, l).sr);
    }
  }
}

TEST(Coupling, VdwDecaysAndVanishesBeyondCutoff) {
  const Lattice lat(12, Boundary::Open);
  const auto cm = build_coupling_matrix(lat, VanDerWaals{1.0, 1.0, 1.0, 4.0});
  double prev_r = 0.0;
  double prev_v = 1e300;
  for (int j = 1; j < 12; ++j) {
    const std::size_t k = lat.index(0, j);
    const double r = lat.distance(0, k);
    const double v = cm.pair(0, k).ss;
    ASSERT_GT(r, prev_r);
    if (r > 4.0) {
      EXPECT_EQ(v, 0.0);
    } else {
      EXPECT_LT(v, prev_v);
    }
    prev_r = r;
    prev_v = v;
  }
}

TEST(Coupling, DegenerateCutoffRejectedUnlessForced) {
  const Lattice lat(3);
  EXPECT_THROW(build_coupling_matrix(lat, VanDerWaals{1.0, 1.0, 1.0, 0.5}), ConfigError);
  const auto cm = build_coupling_matrix(lat, VanDerWaals{1.0, 1.0, 1.0, 0.5}, {true});
  EXPECT_EQ(cm.total_weight(4).ss, 0.0);
}

TEST(MeanFieldShifts, Examples) {
  const auto chi = CollectiveCouplings::uniform(12.0);
  auto h = mean_field_shifts(0.0, 0.0, chi);
  EXPECT_EQ(h.s, 0.0);
  EXPECT_EQ(h.r, 0.0);
  h = mean_field_shifts(0.0, 0.5, chi);
  EXPECT_DOUBLE_EQ(h.s, 6.0);
  EXPECT_DOUBLE_EQ(h.r, 6.0);
  h = mean_field_shifts(0.25, 0.25, chi);
  EXPECT_DOUBLE_EQ(h.s, 6.0);
  EXPECT_DOUBLE_EQ(h.r, 6.0);
  h = mean_field_shifts(0.1, 0.3, CollectiveCouplings{1.0, 2.0, 5.0});
  EXPECT_DOUBLE_EQ(h.s, 0.1 + 5.0 * 0.3);
  EXPECT_DOUBLE_EQ(h.r, 2.0 * 0.3 + 5.0 * 0.1);
}

TEST(MeanFieldShifts, AllToAllFieldMatchesUniformOccupation) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  for (int edge : {2, 3, 7, 16}) {
    const CollectiveCouplings chi{u(gen) * 20, u(gen) * 20, u(gen) * 20};
    const auto cm = build_coupling_matrix(Lattice(edge), AllToAll{chi});
    const double ns = u(gen);
    const double nr = u(gen);
    const std::size_t n = cm.size();
    std::vector<double> ps(n, ns), pr(n, nr), hs(n), hr(n);
    cm.site_fields(ps, pr, hs, hr);
    const FieldShift ref = mean_field_shifts(ns, nr, chi);
    for (std::size_t l = 0; l < n; ++l) {
      EXPECT_NEAR(hs[l], ref.s, 1e-12);
      EXPECT_NEAR(hr[l], ref.r, 1e-12);
    }
  }
}

TEST(MeanFieldShifts, NeighborListFieldMatchesDirectSum) {
  const Lattice lat(6, Boundary::Periodic);
  const auto cm = build_coupling_matrix(lat, VanDerWaals{1.1, 0.9, 1.4, 2.5});
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  const std::size_t n = lat.size();
  std::vector<double> ps(n), pr(n), hs(n), hr(n);
  for (std::size_t l = 0; l < n; ++l) {
    ps[l] = u(gen);
    pr[l] = u(gen);
  }
  cm.site_fields(ps, pr, hs, hr);
  for (std::size_t l = 0; l < n; ++l) {
    double s = 0.0, r = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const PairCoupling v = cm.pair(l, k);
      s += 2.0 * (v.ss * ps[k] + v.sr * pr[k]);
      r += 2.0 * (v.rr * pr[k] + v.sr * ps[k]);
    }
    EXPECT_NEAR(hs[l], s, 1e-12);
    EXPECT_NEAR(hr[l], r, 1e-12);
  }
}

TEST(Hamiltonian, IsHermitian) {
  const SystemParams p{1.7, 2.3, 8.0, 2.1, 1.0, 0.5};
  const Eigen::Matrix3cd h = single_atom_hamiltonian(p, {3.0, -1.5});
  EXPECT_LT((h - h.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_DOUBLE_EQ(h(1, 1).real(), -8.0 + 3.0);
  EXPECT_DOUBLE_EQ(h(0, 2).real(), 2.3 / 2.0);
}

TEST(SystemParams, Validation) {
  EXPECT_NO_THROW(SystemParams::reference(2.0, 3.0).validate());
  SystemParams p = SystemParams::reference(2.0, 3.0);
  p.gamma_s = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_NO_THROW(p.validate(true));
  p.omega_r = -1.0;
  EXPECT_THROW(p.validate(true), ConfigError);
}
