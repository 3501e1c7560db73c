#include "qs/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <utility>

namespace {

// accepts "Emin:Emax" with an optional trailing ":meV" unit tag
std::pair<double, double> parse_seed_scan(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto colon = s.find(':', pos);
    parts.push_back(s.substr(pos, colon == std::string::npos ? colon : colon - pos));
    if (colon == std::string::npos) break;
    pos = colon + 1;
  }
  if (parts.size() == 3) {
    std::string unit = parts.back();
    for (auto& c : unit) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (unit != "mev") throw qs::ConfigError("--seed-scan: unit must be meV, got '" + parts.back() + "'");
    parts.pop_back();
  }
  if (parts.size() != 2) throw qs::ConfigError("--seed-scan wants Emin:Emax (meV)");
  auto one = [](const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0' || !std::isfinite(x))
      throw qs::ConfigError("--seed-scan: not a number: '" + v + "'");
    return x;
  };
  return {one(parts[0]), one(parts[1])};
}

const char* blurb(qs::RunMode m) {
  switch (m) {
    case qs::RunMode::Poles: return "resonance pole table";
    case qs::RunMode::Snapshot: return "wavefunction over x at fixed times";
    case qs::RunMode::Trace: return "density at a fixed plane over time";
    case qs::RunMode::Timescales: return "lifetime, buildup and response times";
    case qs::RunMode::Validate: return "grid propagator vs the analytic solution";
  }
  return "";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"transient tunneling through a 1-D double barrier: pole tables, shutter-released "
               "wavefunction snapshots, exit-plane traces, time scales, and a grid-propagator "
               "cross-check"};
  app.set_version_flag("--version", std::string(qs::kCodeVersion));

  std::string config_path, out_dir, seed_scan;
  int n_poles = 0;
  app.add_option("--config", config_path, "scenario file, flat key = value lines");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--poles", n_poles, "resonance levels to carry")->check(CLI::PositiveNumber);
  app.add_option("--seed-scan", seed_scan, "pole search energy window Emin:Emax in meV");
  app.require_subcommand(1);
  for (qs::RunMode m : {qs::RunMode::Poles, qs::RunMode::Snapshot, qs::RunMode::Trace,
                        qs::RunMode::Timescales, qs::RunMode::Validate})
    app.add_subcommand(qs::mode_name(m), blurb(m))->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e); // --help / --version
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const qs::RunMode mode = *qs::parse_mode(app.get_subcommands().front()->get_name());
  try {
    qs::ScenarioConfig cfg =
        config_path.empty() ? qs::default_config(mode) : qs::load_config(config_path, mode);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (n_poles > 0) cfg.n_poles = n_poles;
    if (!seed_scan.empty()) cfg.seed_window_mev = parse_seed_scan(seed_scan);
    qs::run_scenario(cfg);
    return 0;
  } catch (const qs::ConfigError& e) {
    std::cerr << "qsrun: config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qsrun: numerical failure: " << e.what() << "\n";
    return 3;
  }
}
