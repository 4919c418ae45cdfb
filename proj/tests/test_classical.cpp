#include <cmath>

#include <gtest/gtest.h>

#include "rydcycle/classical.hpp"

using namespace rydcycle;

namespace {
const CollectiveCouplings kChi = CollectiveCouplings::uniform(12.0);
}

TEST(Classical, NoDriveRelaxesToGround) {
  const SystemParams p{0.0, 0.0, 8.0, 3.0, 1.0, 0.5};
  EXPECT_EQ(excitation_rate(0.0, 3.0, 1.0), 0.0);
  const auto fps = classical_fixed_points(p, kChi);
  ASSERT_EQ(fps.size(), 1u);
  EXPECT_NEAR(fps[0].n_s, 0.0, 1e-12);
  EXPECT_NEAR(fps[0].n_r, 0.0, 1e-12);
  std::vector<double> ev{fps[0].eigenvalues[0].real(), fps[0].eigenvalues[1].real()};
  std::sort(ev.begin(), ev.end());
  EXPECT_NEAR(ev[0], -1.0, 1e-12);
  EXPECT_NEAR(ev[1], -0.5, 1e-12);
}

TEST(Classical, LorentzianPeakAndSymmetry) {
  // Oracle: steady state of a damped two-level coherence at weak drive.
  const double omega = 0.7, gamma = 1.3;
  double prev = -1.0;
  for (int k = 0; k <= 60; ++k) {
    const double d = 0.1 * k;
    const double up = excitation_rate(omega, d, gamma);
    const double oracle = (omega * omega / 4.0) * gamma / (d * d + gamma * gamma / 4.0);
    EXPECT_NEAR(up, oracle, 1e-14);
    EXPECT_DOUBLE_EQ(up, excitation_rate(omega, -d, gamma));
    if (k > 0) EXPECT_LT(up, prev);
    prev = up;
  }
}

TEST(Classical, RateEquationAtOrigin) {
  const SystemParams p = SystemParams::reference(2.0, 3.0);
  const auto r = classical_rhs(0.0, 0.0, p, kChi);
  EXPECT_NEAR(r.dn_s, excitation_rate(2.0, 8.0, 1.0), 1e-14);
  EXPECT_NEAR(r.dn_r, excitation_rate(2.0, 3.0, 1.0), 1e-14);
}

TEST(Classical, AnalyticJacobianMatchesFiniteDifference) {
  const SystemParams p = SystemParams::reference(1.7, 2.4);
  for (double ns : {0.05, 0.2, 0.4}) {
    for (double nr : {0.05, 0.15, 0.35}) {
      const Eigen::Matrix2d j = classical_jacobian(ns, nr, p, kChi);
      const double h = 1e-6;
      const auto a = classical_rhs(ns + h, nr, p, kChi);
      const auto b = classical_rhs(ns - h, nr, p, kChi);
      const auto c = classical_rhs(ns, nr + h, p, kChi);
      const auto d = classical_rhs(ns, nr - h, p, kChi);
      EXPECT_NEAR(j(0, 0), (a.dn_s - b.dn_s) / (2 * h), 1e-6);
      EXPECT_NEAR(j(1, 0), (a.dn_r - b.dn_r) / (2 * h), 1e-6);
      EXPECT_NEAR(j(0, 1), (c.dn_s - d.dn_s) / (2 * h), 1e-6);
      EXPECT_NEAR(j(1, 1), (c.dn_r - d.dn_r) / (2 * h), 1e-6);
    }
  }
}

TEST(Classical, StableRootsHaveRealNegativeSpectrum) {
  for (double omega : {0.5, 2.0, 4.0}) {
    for (double dr : {0.0, 2.1, 3.0, 6.0}) {
      const SystemParams p = SystemParams::reference(omega, dr);
      const auto fps = classical_fixed_points(p, kChi);
      ASSERT_FALSE(fps.empty());
      for (const auto& fp : fps) {
        const auto r = classical_rhs(fp.n_s, fp.n_r, p, kChi);
        EXPECT_LT(std::abs(r.dn_s) + std::abs(r.dn_r), 1e-10);
        EXPECT_GE(fp.n_s, -1e-12);
        EXPECT_LE(fp.n_s + fp.n_r, 1.0 + 1e-12);
        if (fp.stable) {
          for (int i = 0; i < 2; ++i) {
            EXPECT_LT(std::abs(fp.eigenvalues[i].imag()), 1e-8);
            EXPECT_LT(fp.eigenvalues[i].real(), 0.0);
          }
        }
      }
    }
  }
}
