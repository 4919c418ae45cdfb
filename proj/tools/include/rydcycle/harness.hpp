#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "rydcycle/config.hpp"
#include "rydcycle/observables.hpp"

namespace rydcycle::harness {

enum ExitCode : int {
  kOk = 0,
  kConfig = 1,
  kIo = 2,
  kQuality = 3,
  kInputMismatch = 4,
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Range {
  double min = 0.0;
  double max = 0.0;
  double step = 0.1;

  std::vector<double> values() const;
};

struct ScanGrid {
  Range omega{0.5, 4.0, 0.1};
  Range delta_r{0.0, 6.0, 0.1};
};

/// Phase-diagram CSV in <output_dir>/phase_diagram.csv. Points already
/// present in the file are not recomputed.
int cmd_mf_scan(const RunConfig& config, const ScanGrid& grid, std::ostream& log);

/// Mean-field trajectory from |g> into <output_dir>/trajectory.csv.
int cmd_mf_evolve(const RunConfig& config, std::ostream& log);

/// Exact propagation from the product ground state into
/// <output_dir>/populations.csv. Sites form a chain when n_atoms is set.
int cmd_exact_run(const RunConfig& config, std::ostream& log);

/// OSDTWA ensemble. A non-empty `sweep_edges` runs one ensemble per edge
/// into <output_dir>/L<edge>/. Returns kQuality when any run is unreliable.
int cmd_twa_run(const RunConfig& config, const std::vector<int>& sweep_edges, std::ostream& log);

enum class AnalyzeMode { Correlate, Spectrum, Collapse, CycleMetrics };

AnalyzeMode parse_analyze_mode(const std::string& text);

struct AnalyzeOptions {
  AnalyzeMode mode = AnalyzeMode::Correlate;
  std::vector<std::filesystem::path> inputs;
  std::filesystem::path output_dir = "analysis";
  double t_transient = 0.0;
  double t_max_lag = 20.0;
  double min_duration_factor = 10.0;
  Taper taper = Taper::None;
  double omega_min = 0.5;
  // Use the subsystem-window series of twa-run outputs.
  bool window = false;
  double collapse_tolerance = 0.2;
};

int cmd_analyze(const AnalyzeOptions& options, std::ostream& log);

/// Lower-case hex SHA-256 of a file's bytes.
std::string file_sha256(const std::filesystem::path& path);

/// Writes the serialized config to <dir>/resolved.cfg.
void write_resolved_config(const RunConfig& config, const std::filesystem::path& dir);

/// Creates the directory or throws IoError.
void ensure_directory(const std::filesystem::path& dir);

}  // namespace rydcycle::harness
