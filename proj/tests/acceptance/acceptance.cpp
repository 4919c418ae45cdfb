// Acceptance checks, one line per criterion. RYDCYCLE_ACCEPTANCE=1,2,5 runs a
// subset; RYDCYCLE_THREADS caps the worker pool.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rydcycle/classical.hpp"
#include "rydcycle/coupling.hpp"
#include "rydcycle/exact.hpp"
#include "rydcycle/meanfield.hpp"
#include "rydcycle/observables.hpp"
#include "rydcycle/osdtwa.hpp"
#include "rydcycle/parallel.hpp"

using namespace rydcycle;

namespace {

const CollectiveCouplings kChi = CollectiveCouplings::uniform(12.0);

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double leading_real(const SystemParams& p) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& fp : find_fixed_points(p, kChi)) {
    best = std::max(best, eigen_spectrum(jacobian(fp.state, p, kChi)).dominant().real());
  }
  return best;
}

// ---- mean field -----------------------------------------------------------

Verdict hopf_transition() {
  std::vector<double> dr, re;
  for (int k = 0; k <= 40; ++k) {
    dr.push_back(1.5 + 0.05 * k);
    re.push_back(leading_real(SystemParams::reference(2.0, dr.back())));
  }
  int changes = 0;
  double where = NAN;
  for (std::size_t k = 1; k < re.size(); ++k) {
    if ((re[k - 1] < 0.0) != (re[k] < 0.0)) {
      ++changes;
      where = 0.5 * (dr[k - 1] + dr[k]);
    }
  }
  const SystemParams q = SystemParams::reference(2.0, 2.1);
  const auto fps = find_fixed_points(q, kChi);
  const auto sp = eigen_spectrum(jacobian(fps.front().state, q, kChi));
  const double im = std::abs(sp.dominant().imag());
  const bool ok = changes == 1 && where > 2.1 && where < 3.0 && fps.size() == 1 && sp.stable() &&
                  std::abs(im - 3.7) <= 0.4;
  return {ok, fmt("sign changes=%d at delta_r*~%.3f; at 2.1: %zu fixed point(s), lambda0=%.4f%+.4fi", changes, where,
                  fps.size(), sp.dominant().real(), sp.dominant().imag())};
}

Verdict lc_metrics() {
  const SystemParams p = SystemParams::reference(2.0, 3.0);
  auto tr = evolve_mf(MFState::ground(), p, kChi, 400.0, 1e-3, 0.01);
  const std::size_t cut = tr.times.size() / 2;
  tr.times.erase(tr.times.begin(), tr.times.begin() + static_cast<long>(cut));
  tr.states.erase(tr.states.begin(), tr.states.begin() + static_cast<long>(cut));
  const auto m = limit_cycle_metrics(tr);
  const bool ok = m.period >= 1.4 && m.period <= 2.6 && m.t_rs > 0.2 && m.t_rs < 0.5;
  return {ok, fmt("T=%.4f t_rs=%.4f (peaks %zu)", m.period, m.t_rs, m.n_peaks)};
}

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> v;
  const int n = static_cast<int>(std::lround((hi - lo) / step));
  for (int k = 0; k <= n; ++k) v.push_back(lo + step * k);
  return v;
}

Verdict four_phases() {
  const auto omegas = grid(0.5, 4.0, 0.1);
  const auto deltas = grid(0.0, 6.0, 0.1);
  std::vector<Phase> labels(omegas.size() * deltas.size());
  parallel_for(labels.size(), [&](std::size_t i) {
    labels[i] = classify_phase(SystemParams::reference(omegas[i / deltas.size()], deltas[i % deltas.size()]), kChi).phase;
  });
  std::map<Phase, int> count;
  for (Phase ph : labels) ++count[ph];
  const auto at = [&](double om, double dr) {
    const auto oi = static_cast<std::size_t>(std::lround((om - 0.5) / 0.1));
    const auto di = static_cast<std::size_t>(std::lround(dr / 0.1));
    return labels[oi * deltas.size() + di];
  };
  // Small delta_r along the reference drive: monostable up to the Hopf point.
  bool small_mono = true;
  for (double dr = 0.0; dr <= 2.1 + 1e-9; dr += 0.1) small_mono &= at(2.0, dr) == Phase::MonostableSTA;
  const bool all_four = count[Phase::MonostableSTA] > 0 && count[Phase::PureLC] > 0 &&
                        count[Phase::CoexistSTA_LC] > 0 && count[Phase::BistableSTA] > 0;
  const bool ok = all_four && small_mono && at(2.0, 3.0) == Phase::PureLC;
  return {ok, fmt("mono=%d pureLC=%d coexist=%d bistable=%d indeterminate=%d; (2,3)=%s; omega=2, delta_r<=2.1 mono=%s",
                  count[Phase::MonostableSTA], count[Phase::PureLC], count[Phase::CoexistSTA_LC],
                  count[Phase::BistableSTA], count[Phase::Indeterminate], std::string(to_string(at(2.0, 3.0))).c_str(),
                  small_mono ? "yes" : "no")};
}

Verdict classical_null() {
  double max_im = 0.0, max_re = -std::numeric_limits<double>::infinity();
  int stable = 0;
  for (double om : grid(0.5, 4.0, 0.1)) {
    for (double dr : grid(0.0, 6.0, 0.1)) {
      for (const auto& fp : classical_fixed_points(SystemParams::reference(om, dr), kChi)) {
        if (!fp.stable) continue;
        ++stable;
        for (int i = 0; i < 2; ++i) {
          max_im = std::max(max_im, std::abs(fp.eigenvalues[i].imag()));
          max_re = std::max(max_re, fp.eigenvalues[i].real());
        }
      }
    }
  }
  return {stable > 0 && max_im < 1e-8 && max_re < 0.0,
          fmt("%d stable fixed points; max|Im|=%.2e, max Re=%.4f", stable, max_im, max_re)};
}

// ---- OSDTWA ---------------------------------------------------------------

Verdict oracle_equivalence() {
  const SystemParams p = SystemParams::reference(2.0, 3.0);
  // N = 1 against the exact flow.
  EnsembleOptions opt;
  opt.t_end = 10.0;
  opt.sample_dt = 0.05;
  opt.n_traj = 10000;
  opt.master_seed = 101;
  const auto one = run_ensemble(p, Lattice(1), CouplingMatrix::uniform(1, {}), opt);
  const auto ex1 = evolve_exact(DensityMatrix::ground(1), p, CouplingMatrix::uniform(1, {}), 10.0, 1e-3, 0.05);
  double dev = 0.0;
  for (std::size_t k = 0; k < one.times.size(); ++k) {
    dev = std::max({dev, std::abs(one.n_s[k] - ex1.site_n_s(k, 0)), std::abs(one.n_r[k] - ex1.site_n_r(k, 0))});
  }
  std::string detail = fmt("N=1 max dev %.4f", dev);
  bool ok = dev < 0.02 && one.n_aborted == 0;

  // N = 2, 3 chains with calibrated vdW couplings; steady window [20, 60].
  const VanDerWaals vdw = calibrate_vdw(kChi);
  for (int n : {2, 3}) {
    std::vector<Site> sites;
    for (int l = 0; l < n; ++l) sites.push_back({0, l});
    const auto cm = build_coupling_matrix(sites, vdw);
    const auto ex = evolve_exact(DensityMatrix::ground(n), p, cm, 60.0, 1e-3, 0.05);
    EnsembleOptions o;
    o.t_end = 60.0;
    o.sample_dt = 0.05;
    o.n_traj = 4000;
    o.master_seed = 200 + static_cast<std::uint64_t>(n);
    const auto twa = run_ensemble(p, cm, o);
    ok &= !twa.unreliable;
    double ts = 0, tr = 0, es = 0, er = 0;
    for (std::size_t k = 0; k < twa.times.size(); ++k) {
      if (twa.times[k] < 20.0) continue;
      ts += twa.n_s[k];
      tr += twa.n_r[k];
    }
    std::size_t m = 0;
    for (std::size_t k = 0; k < ex.times.size(); ++k) {
      if (ex.times[k] < 20.0) continue;
      es += ex.mean_n_s(k);
      er += ex.mean_n_r(k);
      ++m;
    }
    ts /= static_cast<double>(m);
    tr /= static_cast<double>(m);
    es /= static_cast<double>(m);
    er /= static_cast<double>(m);
    const double rs = std::abs(ts - es) / es, rr = std::abs(tr - er) / er;
    ok &= rs < 0.15 && rr < 0.15;
    detail += fmt("; N=%d n_s %.4f vs %.4f (%.1f%%), n_r %.4f vs %.4f (%.1f%%)", n, ts, es, 100 * rs, tr, er, 100 * rr);
  }
  return {ok, detail};
}

struct SizeRun {
  int edge = 0;
  EnsembleResult result;
};

// Ringing of the deterministic approach to the focus decays as exp(Re lambda_0 t).
double focus_transient(double delta_r) {
  const double re = leading_real(SystemParams::reference(2.0, delta_r));
  return std::ceil(5.0 / std::abs(re) / 100.0) * 100.0;
}

SizeRun run_all_to_all(double delta_r, int edge, double t_end, std::size_t n_traj, std::uint64_t seed) {
  const Lattice lat(edge);
  const auto cm = build_coupling_matrix(lat, AllToAll{kChi});
  EnsembleOptions o;
  o.t_end = t_end;
  o.sample_dt = 0.05;
  o.n_traj = n_traj;
  o.master_seed = seed;
  return {edge, run_ensemble(SystemParams::reference(2.0, delta_r), lat, cm, o)};
}

SizeRun run_vdw(int edge, double t_end, std::size_t n_traj, std::uint64_t seed, int window) {
  const Lattice lat(edge);
  const auto cm = build_coupling_matrix(lat, calibrate_vdw(kChi));
  EnsembleOptions o;
  o.t_end = t_end;
  o.sample_dt = 0.05;
  o.n_traj = n_traj;
  o.master_seed = seed;
  o.subsystem_window = window;
  return {edge, run_ensemble(SystemParams::reference(2.0, 3.0), lat, cm, o)};
}

struct Correlations {
  CorrelationSeries rr, rs;
};

Correlations correlate(const EnsembleResult& res, double t_transient, double t_max_lag) {
  std::vector<std::span<const double>> s, r;
  for (const auto& t : res.trajectories) {
    if (t.aborted) continue;
    s.emplace_back(t.n_s);
    r.emplace_back(t.n_r);
  }
  const double dt = res.times[1] - res.times[0];
  const CorrelationOptions o{t_transient, t_max_lag, 10.0};
  return {two_time_correlation(r, r, dt, o), two_time_correlation(r, s, dt, o)};
}

constexpr double kTransient = 100.0;
constexpr double kMaxLag = 20.0;

std::string sizes_text(const std::vector<SizeRun>& runs, const CollapseReport& c) {
  std::ostringstream out;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    out << (i ? ", " : "") << "N=" << runs[i].edge * runs[i].edge << " N*F=" << fmt("%.4g", c.scaled[i]);
  }
  return out.str();
}

struct RegimeData {
  std::vector<SizeRun> runs;
  std::vector<Correlations> corr;
  double transient = kTransient;
};

RegimeData& quasicycle_data() {
  static RegimeData d = [] {
    RegimeData out;
    out.transient = focus_transient(2.1);
    const std::pair<int, std::size_t> plan[] = {{8, 16}, {16, 8}, {32, 4}};
    for (auto [edge, n] : plan) {
      out.runs.push_back(
          run_all_to_all(2.1, edge, out.transient + 2000.0, n, 600 + static_cast<std::uint64_t>(edge)));
      out.corr.push_back(correlate(out.runs.back().result, out.transient, kMaxLag));
    }
    return out;
  }();
  return d;
}

RegimeData& cycle_data() {
  static RegimeData d = [] {
    RegimeData out;
    const std::pair<int, std::size_t> plan[] = {{8, 8}, {16, 4}, {32, 2}};
    for (auto [edge, n] : plan) {
      out.runs.push_back(run_all_to_all(3.0, edge, 1000.0, n, 700 + static_cast<std::uint64_t>(edge)));
      out.corr.push_back(correlate(out.runs.back().result, kTransient, kMaxLag));
    }
    return out;
  }();
  return d;
}

std::string abort_text(const std::vector<SizeRun>& runs) {
  std::size_t aborted = 0, total = 0;
  for (const auto& r : runs) {
    aborted += r.result.n_aborted;
    total += r.result.trajectories.size();
  }
  return fmt("aborted %zu/%zu", aborted, total);
}

Verdict quasicycle_collapse() {
  auto& d = quasicycle_data();
  std::vector<double> sizes, peaks, omegas;
  for (std::size_t i = 0; i < d.runs.size(); ++i) {
    const auto pk = spectral_peak(fourier_spectrum(d.corr[i].rr, Taper::Cosine), 0.5);
    sizes.push_back(static_cast<double>(d.runs[i].edge * d.runs[i].edge));
    peaks.push_back(pk.magnitude);
    omegas.push_back(pk.omega);
  }
  const auto c = scaling_collapse(sizes, peaks, 0.2);
  bool in_band = true;
  for (double w : omegas) in_band &= w >= 1.9 && w <= 2.9;
  return {c.collapsed && in_band,
          fmt("transient %.0f + 2000; deviation %.3f; peak omega %.3f/%.3f/%.3f (band [1.9, 2.9]); ", d.transient,
              c.deviation, omegas[0], omegas[1], omegas[2]) +
              sizes_text(d.runs, c) + "; " + abort_text(d.runs)};
}

Verdict lc_spectra() {
  auto& d = cycle_data();
  // f_rs of a single trajectory at N = 1024 after the transient.
  const auto& big = d.runs.back().result;
  double f_max = -1.0;
  for (std::size_t k = 0; k < big.times.size(); ++k) {
    if (big.times[k] < kTransient) continue;
    const auto& t = big.trajectories.front();
    const double f = relative_fraction(t.n_s[k], t.n_r[k]);
    if (!std::isnan(f)) f_max = std::max(f_max, f);
  }
  const Spectrum big_spec = fourier_spectrum(d.corr.back().rr, Taper::None);
  const auto fundamental = spectral_peak(big_spec, 0.5);
  const auto harmonics = find_harmonics(big_spec, fundamental.omega);
  std::vector<double> sizes, peaks;
  for (std::size_t i = 0; i < d.runs.size(); ++i) {
    sizes.push_back(static_cast<double>(d.runs[i].edge * d.runs[i].edge));
    peaks.push_back(spectral_peak(fourier_spectrum(d.corr[i].rr, Taper::None), 0.5).magnitude);
  }
  const auto c = scaling_collapse(sizes, peaks, 0.2);
  std::string orders;
  for (int h : harmonics) orders += (orders.empty() ? "" : ",") + std::to_string(h);
  const bool ok = f_max >= 0.7 && harmonics.size() >= 2 && !c.collapsed;
  return {ok, fmt("f_rs max %.3f; fundamental %.3f, harmonics {%s}; collapse deviation %.2f; ", f_max,
                  fundamental.omega, orders.c_str(), c.deviation) +
                  sizes_text(d.runs, c) + "; " + abort_text(d.runs)};
}

Verdict predator_prey() {
  // Reference period: the mean-field cycle at delta_r = 3 and 2 pi / omega_peak
  // for the quasicycle.
  const SystemParams p = SystemParams::reference(2.0, 3.0);
  auto tr = evolve_mf(MFState::ground(), p, kChi, 300.0, 1e-3, 0.01);
  tr.times.erase(tr.times.begin(), tr.times.begin() + 15000);
  tr.states.erase(tr.states.begin(), tr.states.begin() + 15000);
  const double t_lc = limit_cycle_metrics(tr).period;
  bool ok = true;
  std::string detail;
  for (auto* regime : {&cycle_data(), &quasicycle_data()}) {
    const bool lc = regime == &cycle_data();
    for (std::size_t i = 0; i < regime->runs.size(); ++i) {
      const auto& corr = regime->corr[i];
      const double period =
          lc ? t_lc : 2.0 * std::numbers::pi / spectral_peak(fourier_spectrum(corr.rr, Taper::Cosine), 0.5).omega;
      const double lag = first_peak_lag(corr.rs);
      const bool hit = lag > 0.0 && lag <= period / 2.0;
      ok &= hit;
      detail += fmt("%s%s N=%d lag %.2f T/2 %.2f", detail.empty() ? "" : "; ", lc ? "LC" : "QC",
                    regime->runs[i].edge * regime->runs[i].edge, lag, period / 2.0);
    }
  }
  return {ok, detail};
}

double peak_to_peak(std::span<const double> s, std::span<const double> r, const std::vector<double>& times) {
  double lo = 1e9, hi = -1e9;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < kTransient) continue;
    const double f = relative_fraction(s[k], r[k]);
    if (std::isnan(f)) continue;
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  return hi - lo;
}

Verdict vdw_desync() {
  std::vector<SizeRun> runs;
  const std::pair<int, std::size_t> plan[] = {{8, 8}, {12, 6}, {16, 4}};
  for (auto [edge, n] : plan) runs.push_back(run_vdw(edge, 1000.0, n, 800 + static_cast<std::uint64_t>(edge), 4));
  std::vector<double> sizes, peaks;
  for (const auto& r : runs) {
    const auto corr = correlate(r.result, kTransient, kMaxLag);
    sizes.push_back(static_cast<double>(r.edge * r.edge));
    peaks.push_back(spectral_peak(fourier_spectrum(corr.rr, Taper::Cosine), 0.5).magnitude);
  }
  const auto c = scaling_collapse(sizes, peaks, 0.3);
  const auto& big = runs.back().result;
  double whole = 0.0, window = 0.0;
  std::size_t n = 0;
  for (const auto& t : big.trajectories) {
    if (t.aborted) continue;
    whole += peak_to_peak(t.n_s, t.n_r, big.times);
    window += peak_to_peak(t.window_n_s, t.window_n_r, big.times);
    ++n;
  }
  whole /= static_cast<double>(n);
  window /= static_cast<double>(n);
  const bool ok = c.collapsed && window >= 3.0 * whole;
  return {ok, fmt("collapse deviation %.3f (limit 0.3); ", c.deviation) + sizes_text(runs, c) +
                  fmt("; L=16 p2p f_rs window %.3f vs whole %.3f (ratio %.2f); ", window, whole, window / whole) +
                  abort_text(runs)};
}

// ---- hygiene --------------------------------------------------------------

Verdict hygiene() {
  std::string fails;
  // Trace and Hermiticity along a mean-field RK4 trajectory.
  const SystemParams p = SystemParams::reference(2.0, 3.0);
  double trace = 0.0, herm = 0.0;
  for (const auto& s : evolve_mf(MFState::ground(), p, kChi, 50.0, 1e-3, 0.1).states) {
    trace = std::max(trace, s.trace_error());
    herm = std::max(herm, s.hermiticity_error());
  }
  if (!(trace < 1e-9)) fails += " mf-trace";
  if (!(herm < 1e-12)) fails += " mf-hermiticity";
  // Exact generator output is traceless and Hermitian.
  std::vector<Site> sites{{0, 0}, {0, 1}, {0, 2}};
  const auto cm = build_coupling_matrix(sites, calibrate_vdw(kChi));
  std::vector<Eigen::Matrix3cd> mixed(3, Eigen::Matrix3cd::Identity() / 3.0);
  mixed[1](0, 1) = mixed[1](1, 0) = 0.1;
  const Eigen::MatrixXcd d = liouvillian_apply(DensityMatrix::product(mixed), p, cm);
  if (!(std::abs(d.trace()) < 1e-12 && (d - d.adjoint()).cwiseAbs().maxCoeff() < 1e-12)) fails += " exact-generator";
  // Conjugation closure and sort on spectra across the Hopf window.
  for (double dr = 1.5; dr <= 3.5; dr += 0.25) {
    const SystemParams q = SystemParams::reference(2.0, dr);
    for (const auto& fp : find_fixed_points(q, kChi)) {
      const auto sp = eigen_spectrum(jacobian(fp.state, q, kChi));
      for (int i = 0; i < 8; ++i) {
        if (i + 1 < 8 && sp.values[i].real() < sp.values[i + 1].real()) fails += " spectrum-sort";
        double best = 1e9;
        for (const auto& w : sp.values) best = std::min(best, std::abs(std::conj(sp.values[i]) - w));
        if (best > 1e-8) fails += " spectrum-conjugation";
      }
    }
  }
  // FFT correlation against the direct sum.
  std::vector<double> a(2000), b(2000);
  Xoshiro256 rng(5);
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k] = rng.uniform() + std::sin(0.1 * static_cast<double>(k));
    b[k] = rng.uniform();
  }
  const CorrelationOptions co{0.0, 5.0, 10.0};
  const auto f = two_time_correlation(a, b, 0.05, co);
  const auto g = direct_correlation(a, b, 0.05, co);
  double fft_dev = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) fft_dev = std::max(fft_dev, std::abs(f.values[k] - g.values[k]));
  if (!(fft_dev < 1e-10)) fails += " fft-correlation";
  // Seed determinism of an ensemble.
  const Lattice lat(4);
  const auto cm4 = build_coupling_matrix(lat, calibrate_vdw(kChi));
  EnsembleOptions o;
  o.t_end = 5.0;
  o.n_traj = 4;
  o.master_seed = 99;
  const auto r1 = run_ensemble(p, lat, cm4, o);
  const auto r2 = run_ensemble(p, lat, cm4, o);
  if (r1.n_s != r2.n_s || r1.n_r != r2.n_r) fails += " seed-determinism";
  return {fails.empty(), fmt("trace %.1e, hermiticity %.1e, fft-vs-direct %.1e", trace, herm, fft_dev) +
                             (fails.empty() ? "" : "; failed:" + fails)};
}

}  // namespace

int main() {
  std::set<int> only;
  if (const char* env = std::getenv("RYDCYCLE_ACCEPTANCE")) {
    std::stringstream ss(env);
    std::string item;
    while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
  }
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"Hopf transition", hopf_transition},
      {"limit-cycle metrics", lc_metrics},
      {"four-phase coverage", four_phases},
      {"classical null result", classical_null},
      {"oracle equivalence", oracle_equivalence},
      {"quasicycle collapse", quasicycle_collapse},
      {"limit-cycle spectra", lc_spectra},
      {"predator-prey cross-correlation", predator_prey},
      {"vdW desynchronization", vdw_desync},
      {"numerics hygiene", hygiene},
  };
  std::printf("workers: %zu\n", worker_count());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %-32s %s  %s  [%.0f s]\n", id, criteria[i].first, v.pass ? "PASS" : "FAIL",
                v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
