#include <algorithm>
#include <cmath>

#include "rydcycle/errors.hpp"
#include "rydcycle/meanfield.hpp"
#include "rydcycle/model.hpp"
#include "rydcycle/rk4.hpp"

namespace rydcycle {

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::MonostableSTA: return "MonostableSTA";
    case Phase::PureLC: return "PureLC";
    case Phase::CoexistSTA_LC: return "CoexistSTA_LC";
    case Phase::BistableSTA: return "BistableSTA";
    case Phase::Indeterminate: return "Indeterminate";
  }
  return "?";
}

int PhaseLabel::stable_count() const {
  return static_cast<int>(std::count_if(fixed_points.begin(), fixed_points.end(),
                                        [](const FixedPointReport& fp) { return fp.stable; }));
}

namespace {

enum class Outcome { Fixed, Cycle, Ambiguous };

struct Window {
  std::vector<double> t, ns, nr;
};

struct ProbeResult {
  Outcome outcome = Outcome::Ambiguous;
  Window last;
};

// Upward crossings of the window mean in n_r define the Poincare section;
// returns are the per-cycle maxima and minima of n_r, parabola-refined.
struct Returns {
  std::vector<double> maxima;
  std::vector<double> amplitudes;
  std::vector<double> times;
};

double refine_extremum(const std::vector<double>& x, std::size_t k) {
  if (k == 0 || k + 1 >= x.size()) return x[k];
  const double a = x[k - 1];
  const double b = x[k];
  const double c = x[k + 1];
  const double denom = a - 2.0 * b + c;
  if (denom == 0.0) return b;
  return b - 0.125 * (a - c) * (a - c) / denom;
}

Returns poincare_returns(const std::vector<double>& t, const std::vector<double>& nr) {
  Returns out;
  double mean = 0.0;
  for (double v : nr) mean += v;
  mean /= static_cast<double>(nr.size());
  std::vector<std::size_t> cross;
  for (std::size_t i = 1; i < nr.size(); ++i) {
    if (nr[i - 1] < mean && nr[i] >= mean) cross.push_back(i);
  }
  for (std::size_t c = 0; c + 1 < cross.size(); ++c) {
    std::size_t hi = cross[c];
    std::size_t lo = cross[c];
    for (std::size_t k = cross[c]; k < cross[c + 1]; ++k) {
      if (nr[k] > nr[hi]) hi = k;
      if (nr[k] < nr[lo]) lo = k;
    }
    const double top = refine_extremum(nr, hi);
    out.maxima.push_back(top);
    out.amplitudes.push_back(top - refine_extremum(nr, lo));
    out.times.push_back(t[cross[c]]);
  }
  return out;
}

ProbeResult probe(const MFState& start, const SystemParams& p, const CollectiveCouplings& chi,
                  const ClassifyOptions& o, std::optional<double> slowest_stable_rate) {
  Eigen::Matrix3cd rho = start.rho;
  auto f = [&](const Eigen::Matrix3cd& y) {
    const FieldShift shift = mean_field_shifts(y(1, 1).real(), y(2, 2).real(), chi);
    return lindblad_rhs(y, single_atom_hamiltonian(p, shift), p);
  };
  const double window_len = 0.5 * o.t_total;
  const auto steps_per_window = static_cast<long>(std::lround(window_len / o.dt));
  for (long k = 0; k < steps_per_window; ++k) rk4_step(rho, o.dt, f);

  ProbeResult result;
  double t = window_len;
  while (t < o.t_max - 1e-9) {
    Window w;
    w.t.reserve(steps_per_window);
    w.ns.reserve(steps_per_window);
    w.nr.reserve(steps_per_window);
    for (long k = 0; k < steps_per_window; ++k) {
      rk4_step(rho, o.dt, f);
      t += o.dt;
      w.t.push_back(t);
      w.ns.push_back(rho(1, 1).real());
      w.nr.push_back(rho(2, 2).real());
    }
    if (!rho.allFinite()) throw IntegrationError("classify_phase: trajectory diverged");

    const auto [lo, hi] = std::minmax_element(w.nr.begin(), w.nr.end());
    const double amplitude = *hi - *lo;
    result.last = std::move(w);
    if (amplitude < o.ambiguous_floor) {
      result.outcome = Outcome::Fixed;
      return result;
    }
    const Returns ret = poincare_returns(result.last.t, result.last.nr);
    if (ret.maxima.size() < 3) continue;
    const auto& a = ret.amplitudes;
    // Decay at the linear rate of a stable fixed point means the orbit is
    // inside that fixed point's linear neighbourhood.
    if (slowest_stable_rate && a.size() >= 4 && std::is_sorted(a.rbegin(), a.rend())) {
      const double rate = std::log(a.back() / a.front()) / (ret.times.back() - ret.times.front());
      if (std::abs(rate - *slowest_stable_rate) < 0.1 * std::abs(*slowest_stable_rate)) {
        result.outcome = Outcome::Fixed;
        return result;
      }
    }
    double spread = 0.0;
    for (std::size_t k = 1; k < ret.maxima.size(); ++k) {
      spread = std::max(spread, std::abs(ret.maxima[k] - ret.maxima[k - 1]));
    }
    // A slowly spiralling orbit can pass the return test cycle by cycle;
    // the amplitude must also hold still across the window.
    const double drift = std::abs(a.back() / a.front() - 1.0);
    if (spread < o.poincare_tolerance && drift < 1e-3) {
      result.outcome = amplitude >= o.lc_amplitude ? Outcome::Cycle : Outcome::Ambiguous;
      return result;
    }
  }
  result.outcome = Outcome::Ambiguous;
  return result;
}

}  // namespace

PhaseLabel classify_phase(const SystemParams& p, const CollectiveCouplings& chi,
                          const ClassifyOptions& o) {
  PhaseLabel label;
  for (const FixedPoint& fp : find_fixed_points(p, chi, o.n_starts)) {
    FixedPointReport report;
    report.state = fp.state;
    report.spectrum = eigen_spectrum(jacobian(fp.state, p, chi));
    report.stable = report.spectrum.stable();
    label.fixed_points.push_back(report);
  }

  std::optional<double> slowest_stable_rate;
  for (const auto& fp : label.fixed_points) {
    if (!fp.stable) continue;
    const double re = fp.spectrum.dominant().real();
    if (!slowest_stable_rate || re > *slowest_stable_rate) {
      slowest_stable_rate = re;
      label.quasicycle_ratio = fp.spectrum.quasicycle_ratio();
      label.dominant_eigenvalue = fp.spectrum.dominant();
    }
  }
  if (!label.dominant_eigenvalue && !label.fixed_points.empty()) {
    label.dominant_eigenvalue = label.fixed_points.front().spectrum.dominant();
  }

  // Unstable fixed points are the likeliest seeds of a cycle; the spread
  // initial conditions cover cycles that encircle several fixed points.
  std::vector<MFState> starts;
  for (const auto& fp : label.fixed_points) {
    if (fp.stable) continue;
    MFCoords x = fp.state.coords();
    x[2] += 1e-3;
    x[4] += 1e-3;
    starts.push_back(MFState::from_coords(x));
  }
  starts.push_back(MFState::ground());
  starts.push_back(MFState::mixture(0.3, 0.3));
  starts.push_back(MFState::mixture(0.6, 0.1));
  starts.push_back(MFState::mixture(0.1, 0.6));

  bool ambiguous = false;
  for (const MFState& start : starts) {
    const ProbeResult res = probe(start, p, chi, o, slowest_stable_rate);
    if (res.outcome == Outcome::Cycle) {
      try {
        label.cycle = limit_cycle_metrics(res.last.t, res.last.ns, res.last.nr);
      } catch (const NotPeriodicError&) {
        // The cycle is real by the return criterion; metrics stay unset.
      }
      label.phase = label.stable_count() == 0 ? Phase::PureLC : Phase::CoexistSTA_LC;
      return label;
    }
    if (res.outcome == Outcome::Ambiguous) ambiguous = true;
  }

  const int stable = label.stable_count();
  if (ambiguous) label.phase = Phase::Indeterminate;
  else if (stable == 1) label.phase = Phase::MonostableSTA;
  else if (stable == 2) label.phase = Phase::BistableSTA;
  else label.phase = Phase::Indeterminate;
  return label;
}

}  // namespace rydcycle
