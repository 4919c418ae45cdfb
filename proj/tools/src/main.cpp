#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rydcycle/errors.hpp"
#include "rydcycle/harness.hpp"

namespace {

using namespace rydcycle;
using namespace rydcycle::harness;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "key = value config file");
  cmd->add_option("--set", c.overrides, "override a config key (key=value); repeatable");
  cmd->add_option("-o,--output", c.output, "output directory (overrides output_dir)");
}

RunConfig load(const Common& c) {
  if (!c.config_path.empty() && !std::filesystem::is_regular_file(c.config_path)) {
    throw IoError("cannot open config file " + c.config_path);
  }
  RunConfig config = c.config_path.empty() ? RunConfig{} : load_run_config(c.config_path);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!c.output.empty()) config.output_dir = c.output;
  return config;
}

Range parse_range(const std::string& text) {
  Range r;
  const auto a = text.find(':');
  const auto b = text.find(':', a == std::string::npos ? a : a + 1);
  if (a == std::string::npos || b == std::string::npos) throw ConfigError("range must be min:max:step, got " + text);
  r.min = std::stod(text.substr(0, a));
  r.max = std::stod(text.substr(a + 1, b - a - 1));
  r.step = std::stod(text.substr(b + 1));
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven-dissipative three-level Rydberg lattice toolkit"};
  app.require_subcommand(1);

  Common scan_c, evolve_c, exact_c, twa_c;
  std::string omega_range = "0.5:4:0.1";
  std::string delta_range = "0:6:0.1";
  auto* scan = app.add_subcommand("mf-scan", "mean-field phase diagram over omega x delta_r");
  add_common(scan, scan_c);
  scan->add_option("--omega", omega_range, "min:max:step");
  scan->add_option("--delta-r", delta_range, "min:max:step");

  auto* evolve = app.add_subcommand("mf-evolve", "mean-field trajectory from the ground state");
  add_common(evolve, evolve_c);

  auto* exact = app.add_subcommand("exact-run", "exact master-equation propagation (N <= 6)");
  add_common(exact, exact_c);

  std::vector<int> sizes;
  auto* twa = app.add_subcommand("twa-run", "OSDTWA trajectory ensemble");
  add_common(twa, twa_c);
  twa->add_option("--sizes", sizes, "lattice edges to sweep, comma separated")->delimiter(',');

  AnalyzeOptions an;
  std::string mode = "correlate";
  std::string taper = "none";
  std::vector<std::string> inputs;
  std::string an_out = "analysis";
  auto* analyze = app.add_subcommand("analyze", "correlations, spectra, collapse and cycle metrics");
  analyze->add_option("mode", mode, "correlate | spectrum | collapse | cycle-metrics")->required();
  analyze->add_option("inputs", inputs, "run directories or CSV files")->required();
  analyze->add_option("-o,--output", an_out, "output directory");
  analyze->add_option("--transient", an.t_transient, "time dropped from the start of each series");
  analyze->add_option("--max-lag", an.t_max_lag, "largest correlation lag");
  analyze->add_option("--min-duration-factor", an.min_duration_factor, "required duration in units of max-lag");
  analyze->add_option("--taper", taper, "none | cosine");
  analyze->add_option("--omega-min", an.omega_min, "ignore spectral peaks below this frequency");
  analyze->add_flag("--window", an.window, "use the subsystem-window series");
  analyze->add_option("--tolerance", an.collapse_tolerance, "collapse tolerance on N * F_peak");

  CLI11_PARSE(app, argc, argv);

  try {
    if (scan->parsed()) {
      return cmd_mf_scan(load(scan_c), ScanGrid{parse_range(omega_range), parse_range(delta_range)}, std::cerr);
    }
    if (evolve->parsed()) return cmd_mf_evolve(load(evolve_c), std::cerr);
    if (exact->parsed()) return cmd_exact_run(load(exact_c), std::cerr);
    if (twa->parsed()) return cmd_twa_run(load(twa_c), sizes, std::cerr);
    if (analyze->parsed()) {
      an.mode = parse_analyze_mode(mode);
      if (taper == "cosine") {
        an.taper = Taper::Cosine;
      } else if (taper != "none") {
        throw ConfigError("unknown taper '" + taper + "'");
      }
      for (const auto& in : inputs) an.inputs.emplace_back(in);
      an.output_dir = an_out;
      return cmd_analyze(an, std::cerr);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const InputMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputMismatch;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputMismatch;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }
  return kConfig;
}
