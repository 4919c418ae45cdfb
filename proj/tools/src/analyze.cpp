#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "rydcycle/csv.hpp"
#include "rydcycle/errors.hpp"
#include "rydcycle/harness.hpp"
#include "rydcycle/meanfield.hpp"

namespace rydcycle::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct SeriesSet {
  fs::path source;  // file actually read
  std::string sha256;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> n_s, n_r;  // one entry per trajectory
  std::optional<double> n_atoms;
};

double uniform_step(const std::vector<double>& t, const fs::path& source) {
  if (t.size() < 2) throw InputError(source.string() + ": need at least two samples");
  const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (std::abs((t[k] - t[k - 1]) - dt) > 1e-6 * dt + 1e-12) {
      throw InputError(source.string() + ": time grid is not uniform");
    }
  }
  return dt;
}

SeriesSet load_series(const fs::path& input, bool window) {
  SeriesSet set;
  fs::path file = input;
  if (fs::is_directory(input)) {
    file = fs::exists(input / "trajectories.csv") ? input / "trajectories.csv" : input / "ensemble.csv";
    if (fs::exists(input / "metadata.json")) {
      std::ifstream meta(input / "metadata.json");
      const json j = json::parse(meta, nullptr, false);
      if (!j.is_discarded() && j.contains("n_atoms")) set.n_atoms = j["n_atoms"].get<double>();
    }
  }
  if (!fs::exists(file)) throw IoError("missing input " + file.string());
  set.source = file;
  set.sha256 = file_sha256(file);
  const CsvTable table = read_csv(file);
  const std::string col_s = window ? "window_n_s" : "n_s";
  const std::string col_r = window ? "window_n_r" : "n_r";
  const auto time = table.numeric_column("time");
  const auto ns = table.numeric_column(col_s);
  const auto nr = table.numeric_column(col_r);
  const bool grouped = std::find(table.header.begin(), table.header.end(), "trajectory") != table.header.end();
  if (!grouped) {
    set.times = time;
    set.n_s.push_back(ns);
    set.n_r.push_back(nr);
  } else {
    const auto traj = table.numeric_column("trajectory");
    std::map<long, std::size_t> index;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const long id = std::lround(traj[i]);
      auto [it, inserted] = index.try_emplace(id, set.n_s.size());
      if (inserted) {
        set.n_s.emplace_back();
        set.n_r.emplace_back();
      }
      if (it->second == 0) set.times.push_back(time[i]);
      set.n_s[it->second].push_back(ns[i]);
      set.n_r[it->second].push_back(nr[i]);
    }
    for (const auto& s : set.n_s) {
      if (s.size() != set.times.size()) throw InputError(file.string() + ": trajectories differ in length");
    }
  }
  set.dt = uniform_step(set.times, file);
  return set;
}

std::vector<SeriesSet> load_all(const AnalyzeOptions& o) {
  if (o.inputs.empty()) throw InputError("analyze: no inputs given");
  std::vector<SeriesSet> sets;
  for (const auto& in : o.inputs) sets.push_back(load_series(in, o.window));
  for (const auto& s : sets) {
    if (std::abs(s.dt - sets.front().dt) > 1e-9 * sets.front().dt) {
      throw InputMismatch("analyze: inputs have different time steps (" + format_number(sets.front().dt) + " vs " +
                          format_number(s.dt) + ")");
    }
  }
  return sets;
}

json input_hashes(const std::vector<SeriesSet>& sets) {
  json arr = json::array();
  for (const auto& s : sets) arr.push_back({{"path", s.source.string()}, {"sha256", s.sha256}});
  return arr;
}

struct Correlations {
  CorrelationSeries rr, rs, ss;
};

Correlations correlate_sets(const std::vector<const SeriesSet*>& sets, const AnalyzeOptions& o) {
  std::vector<std::span<const double>> s, r;
  for (const SeriesSet* set : sets) {
    for (std::size_t i = 0; i < set->n_s.size(); ++i) {
      s.emplace_back(set->n_s[i]);
      r.emplace_back(set->n_r[i]);
    }
  }
  const CorrelationOptions co{o.t_transient, o.t_max_lag, o.min_duration_factor};
  const double dt = sets.front()->dt;
  return {two_time_correlation(r, r, dt, co), two_time_correlation(r, s, dt, co), two_time_correlation(s, s, dt, co)};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

void write_correlation_csv(const fs::path& path, const Correlations& c) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_csv_row(out, {"lag", "G_rr", "G_rs", "G_ss"});
  for (std::size_t k = 0; k < c.rr.lag.size(); ++k) {
    write_csv_row(out, {format_number(c.rr.lag[k]), format_number(c.rr.values[k]), format_number(c.rs.values[k]),
                        format_number(c.ss.values[k])});
  }
}

json spectrum_summary(const Correlations& c, const Spectrum& fr, const AnalyzeOptions& o,
                      std::optional<double> n_atoms) {
  json j;
  j["resolution"] = fr.resolution;
  try {
    const SpectralPeak peak = spectral_peak(fr, o.omega_min);
    j["peak_omega"] = peak.omega;
    j["peak_F_r"] = peak.magnitude;
    j["harmonics"] = find_harmonics(fr, peak.omega);
    if (n_atoms) j["scaled_peak"] = *n_atoms * peak.magnitude;
  } catch (const InputError&) {
    j["peak_omega"] = nullptr;
  }
  try {
    const EnvelopeFit fit = fit_envelope(c.rr);
    j["A"] = fit.amplitude;
    j["tau"] = fit.infinite ? json(nullptr) : json(fit.tau);
    j["tau_infinite"] = fit.infinite;
    j["fit_residual"] = fit.residual;
  } catch (const InputError&) {
    j["A"] = nullptr;
    j["tau"] = nullptr;
  }
  return j;
}

}  // namespace

AnalyzeMode parse_analyze_mode(const std::string& text) {
  if (text == "correlate") return AnalyzeMode::Correlate;
  if (text == "spectrum") return AnalyzeMode::Spectrum;
  if (text == "collapse") return AnalyzeMode::Collapse;
  if (text == "cycle-metrics") return AnalyzeMode::CycleMetrics;
  throw ConfigError("unknown analyze mode '" + text + "'");
}

int cmd_analyze(const AnalyzeOptions& o, std::ostream& log) {
  ensure_directory(o.output_dir);
  if (o.mode == AnalyzeMode::CycleMetrics) {
    json runs = json::array();
    std::vector<SeriesSet> sets;
    for (const auto& in : o.inputs) {
      fs::path file = fs::is_directory(in) ? (fs::exists(in / "trajectory.csv") ? in / "trajectory.csv" : in / "ensemble.csv") : in;
      SeriesSet set = load_series(file, o.window);
      const auto first = static_cast<std::size_t>(std::ceil(o.t_transient / set.dt - 1e-9));
      if (first >= set.times.size()) throw InputError(file.string() + ": transient longer than the series");
      const std::span<const double> t(set.times.begin() + first, set.times.end());
      const std::span<const double> ns(set.n_s[0].begin() + first, set.n_s[0].end());
      const std::span<const double> nr(set.n_r[0].begin() + first, set.n_r[0].end());
      json r{{"path", set.source.string()}, {"sha256", set.sha256}};
      try {
        const LimitCycleMetrics m = limit_cycle_metrics(t, ns, nr);
        r.update({{"T", m.period}, {"dT_rs", m.dt_rs}, {"t_rs", m.t_rs}, {"amplitude_s", m.amplitude_s},
                  {"amplitude_r", m.amplitude_r}, {"n_peaks", m.n_peaks}, {"periodic", true}});
        log << "cycle-metrics: T=" << m.period << " t_rs=" << m.t_rs << '\n';
      } catch (const NotPeriodicError& e) {
        r.update({{"periodic", false}, {"reason", e.what()}});
        log << "cycle-metrics: not periodic\n";
      }
      runs.push_back(r);
      sets.push_back(std::move(set));
    }
    for (const auto& s : sets) {
      if (std::abs(s.dt - sets.front().dt) > 1e-9 * sets.front().dt) throw InputMismatch("analyze: mixed time steps");
    }
    write_text(o.output_dir / "cycle_metrics.json", json{{"mode", "cycle-metrics"}, {"inputs", input_hashes(sets)}, {"runs", runs}}.dump(2) + "\n");
    return kOk;
  }

  const std::vector<SeriesSet> sets = load_all(o);
  const json hashes = input_hashes(sets);

  if (o.mode == AnalyzeMode::Collapse) {
    std::vector<double> sizes, peaks;
    json runs = json::array();
    for (const auto& set : sets) {
      if (!set.n_atoms) throw InputError(set.source.string() + ": collapse needs n_atoms from metadata.json");
      const Correlations c = correlate_sets({&set}, o);
      const Spectrum fr = fourier_spectrum(c.rr, o.taper);
      double peak = std::numeric_limits<double>::quiet_NaN();
      double omega = std::numeric_limits<double>::quiet_NaN();
      try {
        const SpectralPeak p = spectral_peak(fr, o.omega_min);
        peak = p.magnitude;
        omega = p.omega;
      } catch (const InputError&) {
      }
      sizes.push_back(*set.n_atoms);
      peaks.push_back(peak);
      runs.push_back({{"path", set.source.string()}, {"n_atoms", *set.n_atoms}, {"peak_omega", omega}, {"peak_F_r", peak}});
    }
    json out{{"mode", "collapse"}, {"inputs", hashes}, {"runs", runs}};
    try {
      const CollapseReport rep = scaling_collapse(sizes, peaks, o.collapse_tolerance);
      out["collapse_report"] = {{"scaled_peaks", rep.scaled}, {"deviation", rep.deviation},
                                {"collapsed", rep.collapsed}, {"tolerance", o.collapse_tolerance}};
      log << "collapse: deviation " << rep.deviation << (rep.collapsed ? " (collapse)" : " (no collapse)") << '\n';
    } catch (const InputError& e) {
      out["collapse_report"] = {{"applicable", false}, {"reason", e.what()}};
      log << "collapse: not applicable\n";
    }
    write_text(o.output_dir / "collapse.json", out.dump(2) + "\n");
    return kOk;
  }

  std::vector<const SeriesSet*> ptrs;
  for (const auto& s : sets) ptrs.push_back(&s);
  const Correlations c = correlate_sets(ptrs, o);
  write_correlation_csv(o.output_dir / "correlation.csv", c);
  json out{{"mode", o.mode == AnalyzeMode::Correlate ? "correlate" : "spectrum"},
           {"inputs", hashes},
           {"dt", sets.front().dt},
           {"n_series", c.rr.n_series},
           {"first_peak_lag_rs", first_peak_lag(c.rs)}};
  if (o.mode == AnalyzeMode::Spectrum) {
    const Spectrum fr = fourier_spectrum(c.rr, o.taper);
    const Spectrum fs_ = fourier_spectrum(c.ss, o.taper);
    std::ofstream sp(o.output_dir / "spectrum.csv");
    if (!sp) throw IoError("cannot write spectrum.csv");
    write_csv_row(sp, {"omega", "F_r", "F_s"});
    for (std::size_t m = 0; m < fr.size(); ++m) {
      if (fr.omega[m] < 0.0) continue;
      write_csv_row(sp, {format_number(fr.omega[m]), format_number(fr.magnitude(m)), format_number(fs_.magnitude(m))});
    }
    std::optional<double> n_atoms = sets.size() == 1 ? sets.front().n_atoms : std::nullopt;
    out.update(spectrum_summary(c, fr, o, n_atoms));
    write_text(o.output_dir / "fit.json", out.dump(2) + "\n");
  } else {
    write_text(o.output_dir / "correlation.json", out.dump(2) + "\n");
  }
  log << "analyze: " << c.rr.n_series << " series, first G_rs peak at lag " << first_peak_lag(c.rs) << '\n';
  return kOk;
}

}  // namespace rydcycle::harness
