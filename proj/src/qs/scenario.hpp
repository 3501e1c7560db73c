#pragma once

#include "qs/cn_grid.hpp"
#include "qs/transient.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qs {

inline constexpr const char* kCodeVersion = "qsrun 1.0.0";

// invalid scenario input; the CLI maps this to the config-error exit code
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RunMode { Poles, Snapshot, Trace, Timescales, Validate };

const char* mode_name(RunMode m);
std::optional<RunMode> parse_mode(std::string_view name);

// Incidence is given either as an absolute energy or as a detuning from the
// lowest resonance in units of its width (resolved from the refined pole at
// run time). Exactly one form per run; trace mode may carry several
// detunings, one output file each.
struct IncidenceSpec {
  bool by_detuning = false;
  double energy_mev = 0.0;
  std::vector<double> detuning_gamma;
  bool above = false;
};

// Flat key = value scenario. Unset optionals fall back to mode-dependent
// defaults when the run is resolved; everything that influenced the outputs
// lands in the manifest.
struct ScenarioConfig {
  RunMode mode = RunMode::Snapshot;
  std::string source = "builtin defaults";

  double barrier_height_mev = 230.0;
  double barrier_width_nm = 5.0;
  double well_width_nm = 5.0;
  double mass_ratio = 0.067;

  std::optional<IncidenceSpec> incidence;

  std::optional<int> n_poles;                              // levels to carry, by increasing Re k
  std::optional<std::pair<double, double>> seed_window_mev; // restrict the pole search to an energy window

  std::optional<double> x_min_nm, x_max_nm, x_step_nm; // snapshot sampling
  std::optional<double> t_min_fs, t_max_fs, t_step_fs; // trace time grid
  std::vector<double> t_list_fs;                       // explicit times
  std::optional<double> x_fixed_nm;                    // trace detector plane

  std::optional<double> box_min_nm, box_max_nm; // grid-propagator box (validate)
  std::optional<double> box_dx_nm, box_dt_fs;
  std::optional<double> compare_beyond_nm; // comparison window ends at L + this

  std::string out_dir = "out";
};

ScenarioConfig default_config(RunMode mode);

// Parse a flat key = value file ('#' starts a comment). Unknown keys,
// duplicate keys, malformed numbers and an empty file are ConfigErrors
// carrying file:line positions. `mode` comes from the CLI subcommand; a
// mode key in the file must agree with it.
ScenarioConfig load_config(const std::string& path, RunMode mode);

struct RunOutput {
  std::filesystem::path out_dir;
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> files; // data products, manifest excluded
};

// Execute one scenario: compute, then write the mode's data files plus
// manifest.json into cfg.out_dir. Writes go to a temp file first and are
// renamed into place, so readers never see partial output.
RunOutput run_scenario(const ScenarioConfig& cfg);

// log verbosity from QSRUN_LOG: quiet|info|debug (default info), to stderr
int log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

} // namespace qs
