#include "rydcycle/osdtwa.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "rydcycle/errors.hpp"
#include "rydcycle/observables.hpp"
#include "rydcycle/parallel.hpp"

namespace rydcycle {

namespace {

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

// y = a + h * b over the flat storage.
void axpy(const PhaseArrays& a, double h, const PhaseArrays& b, PhaseArrays& y) {
  const std::size_t n = a.data.size();
  const double* pa = a.data.data();
  const double* pb = b.data.data();
  double* py = y.data.data();
  for (std::size_t i = 0; i < n; ++i) py[i] = pa[i] + h * pb[i];
}

std::vector<std::size_t> window_sites(const Lattice& lattice, int window) {
  std::vector<std::size_t> sites;
  if (window <= 0) return sites;
  const int edge = lattice.edge();
  if (window > edge) {
    throw ConfigError("subsystem_window " + std::to_string(window) + " exceeds lattice edge " +
                      std::to_string(edge));
  }
  const int lo = (edge - window) / 2;
  for (int i = lo; i < lo + window; ++i) {
    for (int j = lo; j < lo + window; ++j) sites.push_back(lattice.index(i, j));
  }
  return sites;
}

}  // namespace

AtomPhasePoint PhaseArrays::atom(std::size_t l) const {
  const double* d = data.data();
  const std::size_t n = n_atoms;
  return {d[Ps * n + l],  d[Pr * n + l],  d[Xgs * n + l], d[Ygs * n + l],
          d[Xgr * n + l], d[Ygr * n + l], d[Xsr * n + l], d[Ysr * n + l]};
}

void PhaseArrays::set_atom(std::size_t l, const AtomPhasePoint& a) {
  double* d = data.data();
  const std::size_t n = n_atoms;
  d[Ps * n + l] = a.p_s;
  d[Pr * n + l] = a.p_r;
  d[Xgs * n + l] = a.x_gs;
  d[Ygs * n + l] = a.y_gs;
  d[Xgr * n + l] = a.x_gr;
  d[Ygr * n + l] = a.y_gr;
  d[Xsr * n + l] = a.x_sr;
  d[Ysr * n + l] = a.y_sr;
}

AtomPhasePoint sample_ground_atom(Xoshiro256& rng) {
  // One 64-bit draw supplies all four signs.
  const std::uint64_t bits = rng();
  auto sign = [bits](int k) { return ((bits >> (63 - k)) & 1U) ? 1.0 : -1.0; };
  AtomPhasePoint a;
  a.x_gs = sign(0);
  a.y_gs = sign(1);
  a.x_gr = sign(2);
  a.y_gr = sign(3);
  return a;
}

TrajectoryState sample_initial(std::size_t n_atoms, std::uint64_t seed) {
  TrajectoryState state{PhaseArrays(n_atoms), 0.0, seed, Xoshiro256(seed)};
  for (std::size_t l = 0; l < n_atoms; ++l) state.phase.set_atom(l, sample_ground_atom(state.rng));
  return state;
}

double resolve_rate_cap(const SystemParams& p, double cap) {
  return cap < 0.0 ? 0.5 * std::min(p.gamma_s, p.gamma_r) : cap;
}

JumpRates jump_rates(const SystemParams& p, double p_s, double p_r, double cap) {
  JumpRates f{p.gamma_s * clamp01(p_s), p.gamma_r * clamp01(p_r)};
  const double total = f.s + f.r;
  if (total > cap) {
    const double scale = cap / total;
    f.s *= scale;
    f.r *= scale;
  }
  return f;
}

TwaEngine::TwaEngine(const SystemParams& p, const CouplingMatrix& couplings, double quadrature_bound,
                     double rate_cap)
    : params_(p),
      couplings_(&couplings),
      bound_(quadrature_bound),
      cap_(resolve_rate_cap(p, rate_cap)),
      h_s_(couplings.size()),
      h_r_(couplings.size()),
      k1_(couplings.size()),
      k2_(couplings.size()),
      k3_(couplings.size()),
      k4_(couplings.size()),
      tmp_(couplings.size()) {
  p.validate(true);
  if (!(quadrature_bound > 0.0)) throw ConfigError("quadrature bound must be positive");
}

void TwaEngine::drift(const PhaseArrays& y, PhaseArrays& dy) const {
  using C = PhaseArrays;
  const std::size_t n = y.n_atoms;
  const double* ps = y.component(C::Ps);
  const double* pr = y.component(C::Pr);
  const double* xgs = y.component(C::Xgs);
  const double* ygs = y.component(C::Ygs);
  const double* xgr = y.component(C::Xgr);
  const double* ygr = y.component(C::Ygr);
  const double* xsr = y.component(C::Xsr);
  const double* ysr = y.component(C::Ysr);
  double* dps = dy.component(C::Ps);
  double* dpr = dy.component(C::Pr);
  double* dxgs = dy.component(C::Xgs);
  double* dygs = dy.component(C::Ygs);
  double* dxgr = dy.component(C::Xgr);
  double* dygr = dy.component(C::Ygr);
  double* dxsr = dy.component(C::Xsr);
  double* dysr = dy.component(C::Ysr);

  couplings_->site_fields({ps, n}, {pr, n}, h_s_, h_r_);

  const double a = 0.5 * params_.omega_s;
  const double b = 0.5 * params_.omega_r;
  const double gs = params_.gamma_s;
  const double gr = params_.gamma_r;
  const double* hs = h_s_.data();
  const double* hr = h_r_.data();
  for (std::size_t l = 0; l < n; ++l) {
    const double es = -params_.delta_s + hs[l];
    const double er = -params_.delta_r + hr[l];
    const double d = es - er;
    const double pg = 1.0 - ps[l] - pr[l];
    const JumpRates f = jump_rates(params_, ps[l], pr[l], cap_);
    const double norm = f.s + f.r;
    const double k_gs = norm - 0.5 * gs;
    const double k_gr = norm - 0.5 * gr;
    const double k_sr = norm - 0.5 * (gs + gr);

    dps[l] = -a * ygs[l] + (norm - gs) * ps[l];
    dpr[l] = -b * ygr[l] + (norm - gr) * pr[l];
    dxgs[l] = b * ysr[l] + es * ygs[l] + k_gs * xgs[l];
    dygs[l] = 2.0 * a * (ps[l] - pg) + b * xsr[l] - es * xgs[l] + k_gs * ygs[l];
    dxgr[l] = -a * ysr[l] + er * ygr[l] + k_gr * xgr[l];
    dygr[l] = 2.0 * b * (pr[l] - pg) + a * xsr[l] - er * xgr[l] + k_gr * ygr[l];
    dxsr[l] = -a * ygr[l] - b * ygs[l] - d * ysr[l] + k_sr * xsr[l];
    dysr[l] = a * xgr[l] - b * xgs[l] + d * xsr[l] + k_sr * ysr[l];
  }
}

void TwaEngine::step(TrajectoryState& state, double dt) const {
  PhaseArrays& y = state.phase;
  drift(y, k1_);
  axpy(y, 0.5 * dt, k1_, tmp_);
  drift(tmp_, k2_);
  axpy(y, 0.5 * dt, k2_, tmp_);
  drift(tmp_, k3_);
  axpy(y, dt, k3_, tmp_);
  drift(tmp_, k4_);
  {
    const std::size_t m = y.data.size();
    double* py = y.data.data();
    const double* a1 = k1_.data.data();
    const double* a2 = k2_.data.data();
    const double* a3 = k3_.data.data();
    const double* a4 = k4_.data.data();
    const double w = dt / 6.0;
    for (std::size_t i = 0; i < m; ++i) py[i] += w * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
  }

  const std::size_t n = y.n_atoms;
  const double* ps = y.component(PhaseArrays::Ps);
  const double* pr = y.component(PhaseArrays::Pr);
  for (std::size_t l = 0; l < n; ++l) {
    const JumpRates f = jump_rates(params_, ps[l], pr[l], cap_);
    const double prob_s = -std::expm1(-f.s * dt);
    const double prob_r = -std::expm1(-f.r * dt);
    const double u_s = state.rng.uniform();
    const double u_r = state.rng.uniform();
    if (u_s < prob_s || u_r < prob_r) y.set_atom(l, sample_ground_atom(state.rng));
  }
  state.time += dt;
  check_guard(state);
}

void TwaEngine::check_guard(const TrajectoryState& state) const {
  const PhaseArrays& y = state.phase;
  const std::size_t n = y.n_atoms;
  for (std::size_t c = 0; c < PhaseArrays::Count; ++c) {
    const double* v = y.component(c);
    const bool quadrature = c >= PhaseArrays::Xgs;
    for (std::size_t l = 0; l < n; ++l) {
      if (!std::isfinite(v[l]) || (quadrature && std::abs(v[l]) > bound_)) {
        throw IntegrationError("divergence guard: component " + std::to_string(c) + " of atom " +
                               std::to_string(l) + " = " + std::to_string(v[l]) + " at t = " +
                               std::to_string(state.time));
      }
    }
  }
}

namespace {

// lattice == nullptr: a register without geometry (no windows).
TrajectorySeries trajectory_impl(const TwaEngine& engine, const Lattice* lattice, std::uint64_t seed,
                                 const EnsembleOptions& options, std::vector<SiteSnapshot>* snapshots) {
  const std::size_t n = engine.size();
  if (lattice != nullptr && lattice->size() != n) throw ConfigError("coupling matrix size does not match lattice");
  if (lattice == nullptr && options.subsystem_window > 0) {
    throw ConfigError("subsystem_window needs a lattice register");
  }
  const long n_steps = std::lround(options.t_end / options.dt);
  const long stride = std::max(1L, std::lround(options.sample_dt / options.dt));
  const auto window = lattice != nullptr ? window_sites(*lattice, options.subsystem_window) : std::vector<std::size_t>{};

  std::vector<long> snapshot_samples;
  for (double t : options.snapshot_times) {
    snapshot_samples.push_back(std::lround(t / (static_cast<double>(stride) * options.dt)));
  }

  TrajectorySeries out;
  out.seed = seed;
  TrajectoryState state = sample_initial(n, seed);
  if (options.prepare) options.prepare(state);

  auto record = [&](long sample) {
    const double* ps = state.phase.component(PhaseArrays::Ps);
    const double* pr = state.phase.component(PhaseArrays::Pr);
    double sum_s = 0.0;
    double sum_r = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      sum_s += ps[l];
      sum_r += pr[l];
    }
    out.n_s.push_back(sum_s / static_cast<double>(n));
    out.n_r.push_back(sum_r / static_cast<double>(n));
    if (!window.empty()) {
      double ws = 0.0;
      double wr = 0.0;
      for (std::size_t l : window) {
        ws += ps[l];
        wr += pr[l];
      }
      out.window_n_s.push_back(ws / static_cast<double>(window.size()));
      out.window_n_r.push_back(wr / static_cast<double>(window.size()));
    }
    if (snapshots != nullptr) {
      for (std::size_t q = 0; q < snapshot_samples.size(); ++q) {
        if (snapshot_samples[q] != sample) continue;
        SiteSnapshot snap;
        snap.time = static_cast<double>(sample * stride) * options.dt;
        snap.f_rs.resize(n);
        for (std::size_t l = 0; l < n; ++l) snap.f_rs[l] = relative_fraction(clamp01(ps[l]), clamp01(pr[l]));
        snapshots->push_back(std::move(snap));
      }
    }
  };

  try {
    record(0);
    for (long step = 1; step <= n_steps; ++step) {
      engine.step(state, options.dt);
      if (step % stride == 0) record(step / stride);
    }
  } catch (const IntegrationError& e) {
    out.aborted = true;
    out.abort_reason = e.what();
    out.n_s.clear();
    out.n_r.clear();
    out.window_n_s.clear();
    out.window_n_r.clear();
  }
  return out;
}

EnsembleResult ensemble_impl(const SystemParams& p, const Lattice* lattice, const CouplingMatrix& couplings,
                             const EnsembleOptions& options) {
  if (options.n_traj < 1) throw ConfigError("n_traj must be at least 1");
  if (!(options.dt > 0.0) || !(options.t_end > 0.0) || !(options.sample_dt > 0.0)) {
    throw ConfigError("dt, t_end and sample_dt must be positive");
  }
  if (!(p.gamma_max() * options.dt < 0.05)) {
    throw ConfigError("time step too large: gamma_max * dt must stay below 0.05");
  }
  const auto start = std::chrono::steady_clock::now();
  const long n_steps = std::lround(options.t_end / options.dt);
  const long stride = std::max(1L, std::lround(options.sample_dt / options.dt));

  EnsembleResult result;
  result.edge = lattice != nullptr ? lattice->edge() : 0;
  for (long k = 0; k * stride <= n_steps; ++k) result.times.push_back(static_cast<double>(k * stride) * options.dt);

  result.trajectories.resize(options.n_traj);
  const std::size_t workers = options.workers > 0 ? options.workers : worker_count();
  parallel_for(
      options.n_traj,
      [&](std::size_t i) {
        const TwaEngine engine(p, couplings, options.quadrature_bound, options.rate_cap);
        result.trajectories[i] = trajectory_impl(engine, lattice, derive_seed(options.master_seed, i), options,
                                                i == 0 ? &result.snapshots : nullptr);
      },
      workers);

  const std::size_t n_samples = result.times.size();
  const bool windowed = options.subsystem_window > 0;
  result.n_s.assign(n_samples, 0.0);
  result.n_r.assign(n_samples, 0.0);
  if (windowed) {
    result.window_n_s.assign(n_samples, 0.0);
    result.window_n_r.assign(n_samples, 0.0);
  }
  for (const auto& traj : result.trajectories) {
    if (traj.aborted) {
      ++result.n_aborted;
      continue;
    }
    for (std::size_t k = 0; k < n_samples; ++k) {
      result.n_s[k] += traj.n_s[k];
      result.n_r[k] += traj.n_r[k];
      if (windowed) {
        result.window_n_s[k] += traj.window_n_s[k];
        result.window_n_r[k] += traj.window_n_r[k];
      }
    }
  }
  const std::size_t done = result.n_completed();
  const double inv = done > 0 ? 1.0 / static_cast<double>(done) : std::numeric_limits<double>::quiet_NaN();
  auto finish = [&](std::vector<double>& ns, std::vector<double>& nr, std::vector<double>& f) {
    f.resize(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) {
      ns[k] *= inv;
      nr[k] *= inv;
      f[k] = relative_fraction(ns[k], nr[k]);
    }
  };
  finish(result.n_s, result.n_r, result.f_rs);
  if (windowed) finish(result.window_n_s, result.window_n_r, result.window_f_rs);

  result.unreliable = done == 0 || static_cast<double>(result.n_aborted) > 0.01 * static_cast<double>(options.n_traj);
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace

TrajectorySeries run_trajectory(const TwaEngine& engine, const Lattice& lattice, std::uint64_t seed,
                                const EnsembleOptions& options, std::vector<SiteSnapshot>* snapshots) {
  return trajectory_impl(engine, &lattice, seed, options, snapshots);
}

TrajectorySeries run_trajectory(const TwaEngine& engine, std::uint64_t seed, const EnsembleOptions& options,
                                std::vector<SiteSnapshot>* snapshots) {
  return trajectory_impl(engine, nullptr, seed, options, snapshots);
}

EnsembleResult run_ensemble(const SystemParams& p, const Lattice& lattice, const CouplingMatrix& couplings,
                            const EnsembleOptions& options) {
  return ensemble_impl(p, &lattice, couplings, options);
}

EnsembleResult run_ensemble(const SystemParams& p, const CouplingMatrix& couplings, const EnsembleOptions& options) {
  return ensemble_impl(p, nullptr, couplings, options);
}

}  // namespace rydcycle
