#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rydcycle/coupling.hpp"
#include "rydcycle/lattice.hpp"
#include "rydcycle/params.hpp"

namespace rydcycle {

enum class Backend { MeanField, Exact, Twa };
enum class InteractionKind { AllToAll, VanDerWaals };

std::string_view to_string(Backend b);
Backend parse_backend(std::string_view text);

struct ModelConfig {
  SystemParams params;
  int edge = 1;
  Boundary boundary = Boundary::Open;
  InteractionKind interaction = InteractionKind::AllToAll;
  CollectiveCouplings chi;
  // Explicit C6 values; when absent they are calibrated from chi.
  std::optional<double> c6_ss, c6_rr, c6_sr;
  double cutoff = 6.0;
  bool allow_degenerate = false;

  Lattice lattice() const { return Lattice(edge, boundary); }
  InteractionSpec interaction_spec() const;
};

/// Backend run settings. Unset dt takes the backend default at resolve time.
struct RunSettings {
  std::optional<double> dt;
  double t_end = 100.0;
  double t_transient = 0.0;
  double sample_dt = 0.05;
  std::size_t n_traj = 1;
  std::vector<double> snapshot_times;
  int subsystem_window = 0;
  std::optional<int> n_atoms;
};

struct RunConfig {
  ModelConfig model;
  std::optional<Backend> backend;
  RunSettings run;
  std::string output_dir = "out";
  std::uint64_t master_seed = 1;
};

/// Parses `key = value` lines; '#' starts a comment. Unknown keys, duplicate
/// keys and malformed values throw ConfigError.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies one `key=value` setting on top of an existing config.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Fixes the backend and fills backend-dependent defaults (dt).
void resolve(RunConfig& config, Backend backend);

/// Canonical text form; parse_run_config(serialize(c)) reproduces c exactly.
std::string serialize(const RunConfig& config);

double default_dt(Backend backend);

}  // namespace rydcycle
