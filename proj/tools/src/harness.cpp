#include "rydcycle/harness.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "rydcycle/coupling.hpp"
#include "rydcycle/csv.hpp"
#include "rydcycle/errors.hpp"
#include "rydcycle/exact.hpp"
#include "rydcycle/meanfield.hpp"
#include "rydcycle/osdtwa.hpp"
#include "rydcycle/parallel.hpp"

namespace rydcycle::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_output(const fs::path& path, std::ios::openmode mode = std::ios::trunc) {
  std::ofstream out(path, std::ios::out | mode);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::string num(double v) { return format_number(v); }

// Grid values keyed at 1e-9 resolution so text round trips compare equal.
long long grid_key(double v) { return std::llround(v * 1e9); }

const std::vector<std::string> kScanHeader = {"omega",          "delta_r",    "phase_label", "re_lambda0",
                                              "im_lambda0",     "quasicycle_ratio", "T",     "t_rs"};

std::vector<std::string> scan_row(double omega, double delta_r, const PhaseLabel& label) {
  std::vector<std::string> row{num(omega), num(delta_r), std::string(to_string(label.phase))};
  if (label.dominant_eigenvalue) {
    row.push_back(num(label.dominant_eigenvalue->real()));
    row.push_back(num(label.dominant_eigenvalue->imag()));
  } else {
    row.emplace_back();
    row.emplace_back();
  }
  row.push_back(label.quasicycle_ratio ? num(*label.quasicycle_ratio) : std::string());
  if (label.cycle) {
    row.push_back(num(label.cycle->period));
    row.push_back(num(label.cycle->t_rs));
  } else {
    row.emplace_back();
    row.emplace_back();
  }
  return row;
}

Backend require_backend(const RunConfig& config, Backend expected) {
  if (config.backend && *config.backend != expected) {
    throw ConfigError("config selects backend '" + std::string(to_string(*config.backend)) +
                      "' but the subcommand runs '" + std::string(to_string(expected)) + "'");
  }
  return expected;
}

}  // namespace

std::vector<double> Range::values() const {
  if (!(step > 0.0) || max < min) throw ConfigError("range needs step > 0 and max >= min");
  const long n = std::lround((max - min) / step);
  std::vector<double> out;
  for (long i = 0; i <= n; ++i) out.push_back(min + static_cast<double>(i) * step);
  return out;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
  const fs::path probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw IoError("output directory is not writable: " + dir.string());
  }
  fs::remove(probe, ec);
}

void write_resolved_config(const RunConfig& config, const fs::path& dir) {
  auto out = open_output(dir / "resolved.cfg");
  out << serialize(config);
  if (!out) throw IoError("write failed: " + (dir / "resolved.cfg").string());
}

std::string file_sha256(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

int cmd_mf_scan(const RunConfig& input, const ScanGrid& grid, std::ostream& log) {
  RunConfig config = input;
  resolve(config, require_backend(config, Backend::MeanField));
  const auto omegas = grid.omega.values();
  const auto deltas = grid.delta_r.values();
  if (omegas.size() < 2 || deltas.size() < 2) throw ConfigError("mf-scan needs at least a 2x2 grid");

  const fs::path dir = config.output_dir;
  ensure_directory(dir);
  write_resolved_config(config, dir);
  const fs::path csv_path = dir / "phase_diagram.csv";

  std::map<std::pair<long long, long long>, std::vector<std::string>> done;
  if (fs::exists(csv_path)) {
    const CsvTable existing = read_csv(csv_path);
    if (existing.header != kScanHeader) throw InputMismatch("existing phase_diagram.csv has a different header");
    const auto om = existing.numeric_column("omega");
    const auto dr = existing.numeric_column("delta_r");
    for (std::size_t i = 0; i < existing.rows.size(); ++i) {
      if (existing.rows[i].size() == kScanHeader.size()) done[{grid_key(om[i]), grid_key(dr[i])}] = existing.rows[i];
    }
  }

  struct Point {
    double omega, delta_r;
  };
  std::vector<Point> todo;
  for (double om : omegas) {
    for (double dr : deltas) {
      if (!done.contains({grid_key(om), grid_key(dr)})) todo.push_back({om, dr});
    }
  }
  log << "mf-scan: " << omegas.size() * deltas.size() << " points, " << todo.size() << " to compute\n";

  if (!todo.empty()) {
    const bool fresh = !fs::exists(csv_path);
    auto out = open_output(csv_path, std::ios::app);
    if (fresh) write_csv_row(out, kScanHeader);
    // Chunks are appended as they finish so an interrupted scan resumes.
    const std::size_t chunk = 64;
    for (std::size_t begin = 0; begin < todo.size(); begin += chunk) {
      const std::size_t end = std::min(todo.size(), begin + chunk);
      std::vector<std::vector<std::string>> rows(end - begin);
      parallel_for(end - begin, [&](std::size_t i) {
        const Point& pt = todo[begin + i];
        const SystemParams p{pt.omega, pt.omega, config.model.params.delta_s, pt.delta_r,
                             config.model.params.gamma_s, config.model.params.gamma_r};
        rows[i] = scan_row(pt.omega, pt.delta_r, classify_phase(p, config.model.chi));
      });
      for (std::size_t i = 0; i < rows.size(); ++i) {
        write_csv_row(out, rows[i]);
        done[{grid_key(todo[begin + i].omega), grid_key(todo[begin + i].delta_r)}] = rows[i];
      }
      out.flush();
      if (!out) throw IoError("write failed: " + csv_path.string());
    }
  }

  // Rewrite in grid order when a resumed run appended out of order.
  std::vector<std::vector<std::string>> ordered;
  for (double om : omegas) {
    for (double dr : deltas) ordered.push_back(done.at({grid_key(om), grid_key(dr)}));
  }
  const CsvTable current = read_csv(csv_path);
  if (current.rows != ordered) {
    auto out = open_output(csv_path);
    write_csv_row(out, kScanHeader);
    for (const auto& row : ordered) write_csv_row(out, row);
  }
  return kOk;
}

int cmd_mf_evolve(const RunConfig& input, std::ostream& log) {
  RunConfig config = input;
  resolve(config, require_backend(config, Backend::MeanField));
  const fs::path dir = config.output_dir;
  ensure_directory(dir);
  write_resolved_config(config, dir);
  const MFTrajectory traj = evolve_mf(MFState::ground(), config.model.params, config.model.chi, config.run.t_end,
                                      *config.run.dt, config.run.sample_dt);
  auto out = open_output(dir / "trajectory.csv");
  write_csv_row(out, {"time", "n_s", "n_r", "re_sigma_gs", "im_sigma_gs", "re_sigma_gr", "im_sigma_gr",
                      "re_sigma_sr", "im_sigma_sr"});
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const MFCoords x = traj.states[k].coords();
    std::vector<std::string> row{num(traj.times[k])};
    for (int c = 0; c < 8; ++c) row.push_back(num(x[c]));
    write_csv_row(out, row);
  }
  write_json(dir / "metadata.json", {{"backend", "mf"}, {"samples", traj.times.size()}});
  log << "mf-evolve: " << traj.times.size() << " samples written to " << (dir / "trajectory.csv").string() << '\n';
  return kOk;
}

int cmd_exact_run(const RunConfig& input, std::ostream& log) {
  RunConfig config = input;
  resolve(config, require_backend(config, Backend::Exact));
  std::vector<Site> sites;
  if (config.run.n_atoms) {
    for (int l = 0; l < *config.run.n_atoms; ++l) sites.push_back({0, l});
  } else {
    const Lattice lattice = config.model.lattice();
    for (std::size_t l = 0; l < lattice.size(); ++l) sites.push_back(lattice.site(l));
  }
  const int n = static_cast<int>(sites.size());
  if (n > kMaxExactAtoms) {
    throw CapacityError("exact-run supports at most " + std::to_string(kMaxExactAtoms) + " atoms, got " +
                        std::to_string(n));
  }
  const CouplingMatrix couplings = build_coupling_matrix(
      sites, config.model.interaction_spec(), CouplingBuildOptions{config.model.allow_degenerate});

  const fs::path dir = config.output_dir;
  ensure_directory(dir);
  write_resolved_config(config, dir);
  const ExactTrajectory traj = evolve_exact(DensityMatrix::ground(n), config.model.params, couplings,
                                            config.run.t_end, *config.run.dt, config.run.sample_dt);
  auto out = open_output(dir / "populations.csv");
  write_csv_row(out, {"time", "site", "n_s", "n_r"});
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    for (int l = 0; l < n; ++l) {
      write_csv_row(out, {num(traj.times[k]), std::to_string(l), num(traj.site_n_s(k, l)), num(traj.site_n_r(k, l))});
    }
  }
  write_json(dir / "metadata.json", {{"backend", "exact"}, {"n_atoms", n}, {"samples", traj.times.size()}});
  log << "exact-run: " << n << " atoms, " << traj.times.size() << " samples\n";
  return kOk;
}

namespace {

bool twa_single(const RunConfig& config, std::ostream& log) {
  const Lattice lattice = config.model.lattice();
  const CouplingMatrix couplings = build_coupling_matrix(
      lattice, config.model.interaction_spec(), CouplingBuildOptions{config.model.allow_degenerate});
  EnsembleOptions opt;
  opt.dt = *config.run.dt;
  opt.t_end = config.run.t_end;
  opt.sample_dt = config.run.sample_dt;
  opt.n_traj = config.run.n_traj;
  opt.master_seed = config.master_seed;
  opt.snapshot_times = config.run.snapshot_times;
  opt.subsystem_window = config.run.subsystem_window;

  const fs::path dir = config.output_dir;
  ensure_directory(dir);
  write_resolved_config(config, dir);
  const EnsembleResult res = run_ensemble(config.model.params, lattice, couplings, opt);
  const bool windowed = opt.subsystem_window > 0;

  {
    auto out = open_output(dir / "ensemble.csv");
    std::vector<std::string> header{"time", "n_s", "n_r", "f_rs"};
    if (windowed) header.insert(header.end(), {"window_n_s", "window_n_r", "window_f_rs"});
    write_csv_row(out, header);
    for (std::size_t k = 0; k < res.times.size(); ++k) {
      std::vector<std::string> row{num(res.times[k]), num(res.n_s[k]), num(res.n_r[k]), num(res.f_rs[k])};
      if (windowed) row.insert(row.end(), {num(res.window_n_s[k]), num(res.window_n_r[k]), num(res.window_f_rs[k])});
      write_csv_row(out, row);
    }
  }
  {
    auto out = open_output(dir / "trajectories.csv");
    std::vector<std::string> header{"trajectory", "time", "n_s", "n_r"};
    if (windowed) header.insert(header.end(), {"window_n_s", "window_n_r"});
    write_csv_row(out, header);
    for (std::size_t i = 0; i < res.trajectories.size(); ++i) {
      const auto& tr = res.trajectories[i];
      if (tr.aborted) continue;
      for (std::size_t k = 0; k < res.times.size(); ++k) {
        std::vector<std::string> row{std::to_string(i), num(res.times[k]), num(tr.n_s[k]), num(tr.n_r[k])};
        if (windowed) row.insert(row.end(), {num(tr.window_n_s[k]), num(tr.window_n_r[k])});
        write_csv_row(out, row);
      }
    }
  }
  {
    auto out = open_output(dir / "snapshots.csv");
    write_csv_row(out, {"site_i", "site_j", "f_rs_l", "time"});
    for (const auto& snap : res.snapshots) {
      for (std::size_t l = 0; l < snap.f_rs.size(); ++l) {
        const Site s = lattice.site(l);
        write_csv_row(out, {std::to_string(s.i), std::to_string(s.j), num(snap.f_rs[l]), num(snap.time)});
      }
    }
  }
  json seeds = json::array();
  json aborts = json::array();
  for (std::size_t i = 0; i < res.trajectories.size(); ++i) {
    seeds.push_back(res.trajectories[i].seed);
    if (res.trajectories[i].aborted) aborts.push_back({{"trajectory", i}, {"reason", res.trajectories[i].abort_reason}});
  }
  write_json(dir / "metadata.json", {{"backend", "twa"},
                                     {"n_atoms", lattice.size()},
                                     {"edge", lattice.edge()},
                                     {"dt", opt.dt},
                                     {"sample_dt", opt.sample_dt},
                                     {"master_seed", opt.master_seed},
                                     {"n_traj", opt.n_traj},
                                     {"seeds", seeds},
                                     {"abort_count", res.n_aborted},
                                     {"aborts", aborts},
                                     {"unreliable", res.unreliable},
                                     {"wall_seconds", res.wall_seconds}});
  log << "twa-run: L=" << lattice.edge() << " n_traj=" << opt.n_traj << " aborted=" << res.n_aborted
      << (res.unreliable ? " (unreliable)" : "") << " wall=" << res.wall_seconds << "s\n";
  return !res.unreliable;
}

}  // namespace

int cmd_twa_run(const RunConfig& input, const std::vector<int>& sweep_edges, std::ostream& log) {
  RunConfig config = input;
  resolve(config, require_backend(config, Backend::Twa));
  bool reliable = true;
  if (sweep_edges.empty()) {
    reliable = twa_single(config, log);
  } else {
    for (int edge : sweep_edges) {
      RunConfig sized = config;
      sized.model.edge = edge;
      sized.output_dir = (fs::path(config.output_dir) / ("L" + std::to_string(edge))).string();
      reliable = twa_single(sized, log) && reliable;
    }
  }
  return reliable ? kOk : kQuality;
}

}  // namespace rydcycle::harness
