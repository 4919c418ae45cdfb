#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rydcycle/coupling.hpp"
#include "rydcycle/lattice.hpp"
#include "rydcycle/params.hpp"
#include "rydcycle/seeding.hpp"

namespace rydcycle {

/// Phase point of one atom. Populations p_s, p_r (p_g = 1 - p_s - p_r) and
/// quadrature pairs with rho_ab = (x_ab - i y_ab) / 2 for a < b.
struct AtomPhasePoint {
  double p_s = 0.0;
  double p_r = 0.0;
  double x_gs = 0.0;
  double y_gs = 0.0;
  double x_gr = 0.0;
  double y_gr = 0.0;
  double x_sr = 0.0;
  double y_sr = 0.0;

  bool operator==(const AtomPhasePoint&) const = default;
};

/// Coordinate-major storage: component c of atom l lives at data[c * N + l].
struct PhaseArrays {
  enum Component : std::size_t { Ps = 0, Pr, Xgs, Ygs, Xgr, Ygr, Xsr, Ysr, Count };

  std::size_t n_atoms = 0;
  std::vector<double> data;

  explicit PhaseArrays(std::size_t n = 0) : n_atoms(n), data(Count * n, 0.0) {}

  double* component(std::size_t c) { return data.data() + c * n_atoms; }
  const double* component(std::size_t c) const { return data.data() + c * n_atoms; }

  AtomPhasePoint atom(std::size_t l) const;
  void set_atom(std::size_t l, const AtomPhasePoint& a);
};

struct TrajectoryState {
  PhaseArrays phase;
  double time = 0.0;
  std::uint64_t seed = 0;
  Xoshiro256 rng;

  std::size_t size() const { return phase.n_atoms; }
};

/// Fresh ground-state sample for one atom: x_gs, y_gs, x_gr, y_gr each +-1
/// with probability 1/2, everything else zero.
AtomPhasePoint sample_ground_atom(Xoshiro256& rng);

TrajectoryState sample_initial(std::size_t n_atoms, std::uint64_t seed);
inline TrajectoryState sample_initial(const Lattice& lattice, std::uint64_t seed) {
  return sample_initial(lattice.size(), seed);
}

inline constexpr double kDefaultQuadratureBound = 2.0;

/// Per-atom jump rates f_a = Gamma_a clamp(p_a, 0, 1), scaled down together
/// when f_s + f_r exceeds `cap`. A negative cap selects
/// min(Gamma_s, Gamma_r) / 2, the largest value for which no coherence grows
/// under the drift; +infinity leaves the rates unscaled.
struct JumpRates {
  double s = 0.0;
  double r = 0.0;
};
JumpRates jump_rates(const SystemParams& p, double p_s, double p_r, double cap);
double resolve_rate_cap(const SystemParams& p, double cap);

/// Deterministic part of the unraveled dynamics plus the jump step.
class TwaEngine {
 public:
  TwaEngine(const SystemParams& p, const CouplingMatrix& couplings,
            double quadrature_bound = kDefaultQuadratureBound, double rate_cap = -1.0);

  std::size_t size() const { return couplings_->size(); }
  const SystemParams& params() const { return params_; }
  double rate_cap() const { return cap_; }

  /// Per-atom derivatives with site-resolved fields. Includes the
  /// anticommutator damping and the norm-restoring term (f_s + f_r) rho with
  /// the jump rates above; p_g stays implicit so tr rho = 1 between jumps.
  void drift(const PhaseArrays& y, PhaseArrays& dy) const;

  /// One RK4 substep of the drift, then one jump decision per atom and
  /// channel. Throws IntegrationError when the divergence guard trips.
  void step(TrajectoryState& state, double dt) const;

  /// Throws IntegrationError on non-finite values or a quadrature beyond the
  /// bound.
  void check_guard(const TrajectoryState& state) const;

 private:
  SystemParams params_;
  const CouplingMatrix* couplings_;
  double bound_;
  double cap_;
  mutable std::vector<double> h_s_, h_r_;
  mutable PhaseArrays k1_, k2_, k3_, k4_, tmp_;
};

struct EnsembleOptions {
  double dt = 5e-3;
  double t_end = 100.0;
  double sample_dt = 0.05;
  std::size_t n_traj = 1;
  std::uint64_t master_seed = 1;
  // Per-site f_rs of trajectory 0 is recorded at the sample nearest each time.
  std::vector<double> snapshot_times;
  // Edge of a centered square window whose averages are recorded too; 0 = off.
  int subsystem_window = 0;
  double quadrature_bound = kDefaultQuadratureBound;
  double rate_cap = -1.0;
  std::size_t workers = 0;  // 0 = worker_count()
  // Applied to each freshly sampled state before evolution.
  std::function<void(TrajectoryState&)> prepare;
};

struct TrajectorySeries {
  std::uint64_t seed = 0;
  bool aborted = false;
  std::string abort_reason;
  // Site averages of the raw phase-point populations on the sample grid.
  std::vector<double> n_s, n_r;
  std::vector<double> window_n_s, window_n_r;
};

struct SiteSnapshot {
  double time = 0.0;
  // Row-major over the lattice; NaN where the site fraction is undefined.
  std::vector<double> f_rs;
};

struct EnsembleResult {
  int edge = 0;
  std::vector<double> times;
  std::vector<double> n_s, n_r, f_rs;
  std::vector<double> window_n_s, window_n_r, window_f_rs;
  std::vector<TrajectorySeries> trajectories;
  std::vector<SiteSnapshot> snapshots;
  std::size_t n_aborted = 0;
  bool unreliable = false;
  double wall_seconds = 0.0;

  std::size_t n_completed() const { return trajectories.size() - n_aborted; }
};

/// Single trajectory on the sample grid of `options`.
TrajectorySeries run_trajectory(const TwaEngine& engine, const Lattice& lattice, std::uint64_t seed,
                                const EnsembleOptions& options, std::vector<SiteSnapshot>* snapshots = nullptr);
/// Same for a register without geometry (chains, clusters): engine.size()
/// atoms, no subsystem window.
TrajectorySeries run_trajectory(const TwaEngine& engine, std::uint64_t seed, const EnsembleOptions& options,
                                std::vector<SiteSnapshot>* snapshots = nullptr);

/// Independent trajectories with seeds derive_seed(master_seed, i), run in
/// parallel and merged in index order. More than 1% aborted trajectories sets
/// `unreliable`.
EnsembleResult run_ensemble(const SystemParams& p, const Lattice& lattice, const CouplingMatrix& couplings,
                            const EnsembleOptions& options);
/// Register without geometry; `edge` of the result is 0.
EnsembleResult run_ensemble(const SystemParams& p, const CouplingMatrix& couplings, const EnsembleOptions& options);

}  // namespace rydcycle
