#include "rydcycle/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "rydcycle/errors.hpp"

namespace rydcycle {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("key '" + std::string(key) + "': not a number: '" + std::string(value) + "'");
  }
  return out;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view value) {
  Int out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("key '" + std::string(key) + "': not an integer: '" + std::string(value) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("key '" + std::string(key) + "': not a boolean: '" + std::string(value) + "'");
}

std::vector<double> parse_list(std::string_view key, std::string_view value) {
  std::vector<double> out;
  while (!value.empty()) {
    const auto comma = value.find(',');
    const auto item = trim(value.substr(0, comma));
    if (!item.empty()) out.push_back(parse_double(key, item));
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Keys that set several fields at once are applied before the specific ones,
// so `chi = 12` followed anywhere by `chi_sr = 6` leaves chi_sr = 6.
constexpr std::string_view kGroupKeys[] = {"omega", "gamma", "chi", "c6"};

bool is_group_key(std::string_view key) {
  return std::find(std::begin(kGroupKeys), std::end(kGroupKeys), key) != std::end(kGroupKeys);
}

}  // namespace

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::MeanField: return "mf";
    case Backend::Exact: return "exact";
    case Backend::Twa: return "twa";
  }
  return "?";
}

Backend parse_backend(std::string_view text) {
  if (text == "mf") return Backend::MeanField;
  if (text == "exact") return Backend::Exact;
  if (text == "twa") return Backend::Twa;
  throw ConfigError("backend must be one of mf, exact, twa; got '" + std::string(text) + "'");
}

double default_dt(Backend backend) {
  return backend == Backend::Twa ? 5e-3 : 1e-3;
}

InteractionSpec ModelConfig::interaction_spec() const {
  if (interaction == InteractionKind::AllToAll) return AllToAll{chi};
  VanDerWaals vdw = calibrate_vdw(chi, cutoff);
  if (c6_ss) vdw.c6_ss = *c6_ss;
  if (c6_rr) vdw.c6_rr = *c6_rr;
  if (c6_sr) vdw.c6_sr = *c6_sr;
  return vdw;
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
  auto& m = c.model;
  auto& p = m.params;
  auto num = [&] { return parse_double(key, value); };

  if (key == "omega") { p.omega_s = p.omega_r = num(); }
  else if (key == "omega_s") { p.omega_s = num(); }
  else if (key == "omega_r") { p.omega_r = num(); }
  else if (key == "delta_s") { p.delta_s = num(); }
  else if (key == "delta_r") { p.delta_r = num(); }
  else if (key == "gamma") { p.gamma_s = p.gamma_r = num(); }
  else if (key == "gamma_s") { p.gamma_s = num(); }
  else if (key == "gamma_r") { p.gamma_r = num(); }
  else if (key == "interaction") {
    if (value == "all_to_all") m.interaction = InteractionKind::AllToAll;
    else if (value == "vdw") m.interaction = InteractionKind::VanDerWaals;
    else throw ConfigError("interaction must be all_to_all or vdw; got '" + std::string(value) + "'");
  }
  else if (key == "chi") { m.chi = CollectiveCouplings::uniform(num()); }
  else if (key == "chi_ss") { m.chi.ss = num(); }
  else if (key == "chi_rr") { m.chi.rr = num(); }
  else if (key == "chi_sr") { m.chi.sr = num(); }
  else if (key == "c6") { m.c6_ss = m.c6_rr = m.c6_sr = num(); }
  else if (key == "c6_ss") { m.c6_ss = num(); }
  else if (key == "c6_rr") { m.c6_rr = num(); }
  else if (key == "c6_sr") { m.c6_sr = num(); }
  else if (key == "cutoff") { m.cutoff = num(); }
  else if (key == "allow_degenerate") { m.allow_degenerate = parse_bool(key, value); }
  else if (key == "L") {
    m.edge = parse_int<int>(key, value);
    if (m.edge < 1) throw ConfigError("L must be >= 1");
  }
  else if (key == "boundary") { m.boundary = parse_boundary(value); }
  else if (key == "backend") { c.backend = parse_backend(value); }
  else if (key == "output_dir") { c.output_dir = std::string(value); }
  else if (key == "master_seed") { c.master_seed = parse_int<std::uint64_t>(key, value); }
  else if (key == "n_traj") {
    c.run.n_traj = parse_int<std::size_t>(key, value);
    if (c.run.n_traj < 1) throw ConfigError("n_traj must be >= 1");
  }
  else if (key == "dt") {
    const double dt = num();
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    c.run.dt = dt;
  }
  else if (key == "t_end") { c.run.t_end = num(); }
  else if (key == "t_transient") { c.run.t_transient = num(); }
  else if (key == "sample_dt") { c.run.sample_dt = num(); }
  else if (key == "snapshot_times") { c.run.snapshot_times = parse_list(key, value); }
  else if (key == "subsystem_window") { c.run.subsystem_window = parse_int<int>(key, value); }
  else if (key == "n_atoms") { c.run.n_atoms = parse_int<int>(key, value); }
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

RunConfig parse_run_config(std::string_view text) {
  std::map<std::string, std::string> entries;
  std::vector<std::string> order;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!entries.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    order.push_back(std::move(key));
  }

  RunConfig config;
  for (const auto& key : order) {
    if (is_group_key(key)) apply_setting(config, key, entries[key]);
  }
  for (const auto& key : order) {
    if (!is_group_key(key)) apply_setting(config, key, entries[key]);
  }
  config.model.params.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

void resolve(RunConfig& config, Backend backend) {
  config.backend = backend;
  if (!config.run.dt) config.run.dt = default_dt(backend);
  config.model.params.validate();
  if (config.run.t_end <= 0.0) throw ConfigError("t_end must be positive");
  if (config.run.sample_dt <= 0.0) throw ConfigError("sample_dt must be positive");
}

std::string serialize(const RunConfig& c) {
  const auto& m = c.model;
  const auto& p = m.params;
  std::ostringstream out;
  out << "omega_s = " << fmt(p.omega_s) << '\n'
      << "omega_r = " << fmt(p.omega_r) << '\n'
      << "delta_s = " << fmt(p.delta_s) << '\n'
      << "delta_r = " << fmt(p.delta_r) << '\n'
      << "gamma_s = " << fmt(p.gamma_s) << '\n'
      << "gamma_r = " << fmt(p.gamma_r) << '\n'
      << "interaction = " << (m.interaction == InteractionKind::AllToAll ? "all_to_all" : "vdw") << '\n'
      << "chi_ss = " << fmt(m.chi.ss) << '\n'
      << "chi_rr = " << fmt(m.chi.rr) << '\n'
      << "chi_sr = " << fmt(m.chi.sr) << '\n';
  if (m.c6_ss) out << "c6_ss = " << fmt(*m.c6_ss) << '\n';
  if (m.c6_rr) out << "c6_rr = " << fmt(*m.c6_rr) << '\n';
  if (m.c6_sr) out << "c6_sr = " << fmt(*m.c6_sr) << '\n';
  out << "cutoff = " << fmt(m.cutoff) << '\n'
      << "allow_degenerate = " << (m.allow_degenerate ? "true" : "false") << '\n'
      << "L = " << m.edge << '\n'
      << "boundary = " << to_string(m.boundary) << '\n';
  if (c.backend) out << "backend = " << to_string(*c.backend) << '\n';
  out << "output_dir = " << c.output_dir << '\n'
      << "master_seed = " << c.master_seed << '\n'
      << "n_traj = " << c.run.n_traj << '\n';
  if (c.run.dt) out << "dt = " << fmt(*c.run.dt) << '\n';
  out << "t_end = " << fmt(c.run.t_end) << '\n'
      << "t_transient = " << fmt(c.run.t_transient) << '\n'
      << "sample_dt = " << fmt(c.run.sample_dt) << '\n';
  if (!c.run.snapshot_times.empty()) {
    out << "snapshot_times = ";
    for (std::size_t i = 0; i < c.run.snapshot_times.size(); ++i) {
      out << (i ? "," : "") << fmt(c.run.snapshot_times[i]);
    }
    out << '\n';
  }
  out << "subsystem_window = " << c.run.subsystem_window << '\n';
  if (c.run.n_atoms) out << "n_atoms = " << *c.run.n_atoms << '\n';
  return out.str();
}

}  // namespace rydcycle
