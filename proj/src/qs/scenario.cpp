#include "qs/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace qs {

int log_level() {
  static const int lvl = [] {
    const char* e = std::getenv("QSRUN_LOG");
    if (!e) return 1;
    std::string s(e);
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "quiet" || s == "0") return 0;
    if (s == "debug" || s == "2") return 2;
    return 1;
  }();
  return lvl;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "qsrun: " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "qsrun[debug]: " << msg << "\n";
}

const char* mode_name(RunMode m) {
  switch (m) {
    case RunMode::Poles: return "poles";
    case RunMode::Snapshot: return "snapshot";
    case RunMode::Trace: return "trace";
    case RunMode::Timescales: return "timescales";
    case RunMode::Validate: return "validate";
  }
  return "?";
}

std::optional<RunMode> parse_mode(std::string_view name) {
  for (RunMode m : {RunMode::Poles, RunMode::Snapshot, RunMode::Trace,
                    RunMode::Timescales, RunMode::Validate})
    if (name == mode_name(m)) return m;
  return std::nullopt;
}

namespace {

// 17 significant digits round-trip a double exactly; pinned for byte-stable CSVs
std::string num17(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

// shorter form for file names and log lines
std::string num10(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.10g", v);
  return b;
}

void write_atomic(const fs::path& dir, const std::string& name, const std::string& body) {
  fs::path tmp = dir / (name + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << body;
    out.flush();
    if (!out) throw ConfigError("short write to " + tmp.string());
  }
  fs::rename(tmp, dir / name);
}

std::string trimmed(std::string s) {
  auto sp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && sp(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  while (!s.empty() && sp(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

[[noreturn]] void fail_at(const std::string& path, int line, const std::string& msg) {
  throw ConfigError(path + ":" + std::to_string(line) + ": " + msg);
}

double parse_num(const std::string& raw, const std::string& path, int line,
                 const std::string& key) {
  char* end = nullptr;
  double v = std::strtod(raw.c_str(), &end);
  while (end && *end != '\0' && std::isspace(static_cast<unsigned char>(*end))) ++end;
  if (end == raw.c_str() || *end != '\0' || !std::isfinite(v))
    fail_at(path, line, "field '" + key + "': not a finite number: '" + raw + "'");
  return v;
}

int parse_count(const std::string& raw, const std::string& path, int line,
                const std::string& key) {
  double v = parse_num(raw, path, line, key);
  if (v != std::floor(v) || v < 1.0 || v > 1e6)
    fail_at(path, line, "field '" + key + "': expected a positive integer, got '" + raw + "'");
  return static_cast<int>(v);
}

std::vector<double> parse_list(const std::string& raw, const std::string& path, int line,
                               const std::string& key) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t comma = raw.find(',', pos);
    std::string item = trimmed(raw.substr(pos, comma == std::string::npos ? comma : comma - pos));
    if (item.empty()) fail_at(path, line, "field '" + key + "': empty list entry");
    out.push_back(parse_num(item, path, line, key));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

std::vector<double> expand_range(double lo, double hi, double step) {
  auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + static_cast<double>(i) * step;
  return out;
}

void validate_config(const ScenarioConfig& c) {
  require(c.barrier_height_mev > 0.0, "barrier_height_mev must be positive");
  require(c.barrier_width_nm > 0.0 && c.well_width_nm > 0.0,
          "barrier_width_nm and well_width_nm must be positive");
  require(c.mass_ratio > 0.0, "mass_ratio must be positive");
  if (c.n_poles) require(*c.n_poles >= 1 && *c.n_poles <= 64, "n_poles must be in 1..64");
  if (c.seed_window_mev)
    require(c.seed_window_mev->first >= 0.0 && c.seed_window_mev->second > c.seed_window_mev->first,
            "pole search window needs 0 <= Emin < Emax");

  if (c.incidence) {
    const IncidenceSpec& inc = *c.incidence;
    if (inc.by_detuning) {
      require(!inc.detuning_gamma.empty(), "detuning_gamma list is empty");
      for (double d : inc.detuning_gamma)
        require(d >= 0.0, "detuning_gamma entries must be >= 0; detuning_side carries the sign");
      require(inc.detuning_gamma.size() == 1 || c.mode == RunMode::Trace,
              "a detuning_gamma list is only meaningful in trace mode");
    } else {
      require(inc.energy_mev > 0.0, "energy_mev must be positive");
    }
  }

  auto forbid = [&](bool given, const std::string& what) {
    require(!given, what + " is not used in " + mode_name(c.mode) + " mode");
  };
  const bool x_grid = c.x_min_nm || c.x_max_nm || c.x_step_nm;
  const bool t_grid = c.t_min_fs || c.t_max_fs || c.t_step_fs;
  const bool box = c.box_min_nm || c.box_max_nm || c.box_dx_nm || c.box_dt_fs ||
                   c.compare_beyond_nm;

  switch (c.mode) {
    case RunMode::Poles:
      forbid(c.incidence.has_value(), "an incidence setting");
      forbid(x_grid || t_grid || !c.t_list_fs.empty() || c.x_fixed_nm.has_value(),
             "a sampling grid");
      forbid(box, "the grid-propagator box");
      break;
    case RunMode::Snapshot:
      forbid(c.x_fixed_nm.has_value(), "x_fixed_nm");
      forbid(box, "the grid-propagator box");
      require(!(t_grid && !c.t_list_fs.empty()), "give t_list_fs or a t range, not both");
      break;
    case RunMode::Trace:
      forbid(x_grid, "an x sampling range");
      forbid(box, "the grid-propagator box");
      require(!(t_grid && !c.t_list_fs.empty()), "give t_list_fs or a t range, not both");
      break;
    case RunMode::Timescales:
      forbid(x_grid || t_grid || !c.t_list_fs.empty() || c.x_fixed_nm.has_value(),
             "a sampling grid");
      forbid(box, "the grid-propagator box");
      break;
    case RunMode::Validate:
      forbid(x_grid, "an x sampling range");
      forbid(t_grid, "a t range (give t_list_fs)");
      forbid(c.x_fixed_nm.has_value(), "x_fixed_nm");
      break;
  }

  if (x_grid) {
    require(c.x_min_nm && c.x_max_nm && c.x_step_nm,
            "x_min_nm, x_max_nm and x_step_nm must be given together");
    require(*c.x_min_nm >= 0.0, "x_min_nm must be >= 0; the solution starts at the shutter plane");
    require(*c.x_max_nm > *c.x_min_nm, "x_max_nm must exceed x_min_nm");
    require(*c.x_step_nm > 0.0, "x_step_nm must be positive");
    require((*c.x_max_nm - *c.x_min_nm) / *c.x_step_nm < 2e6, "x grid has over 2e6 points");
  }
  if (t_grid) {
    require(c.t_min_fs && c.t_max_fs && c.t_step_fs,
            "t_min_fs, t_max_fs and t_step_fs must be given together");
    require(*c.t_min_fs > 0.0, "t_min_fs must be positive; the shutter opens at t = 0");
    require(*c.t_max_fs > *c.t_min_fs, "t_max_fs must exceed t_min_fs");
    require(*c.t_step_fs > 0.0, "t_step_fs must be positive");
    require((*c.t_max_fs - *c.t_min_fs) / *c.t_step_fs < 2e6, "t grid has over 2e6 points");
  }
  for (double t : c.t_list_fs)
    require(t > 0.0, "t_list_fs entries must be positive; the shutter opens at t = 0");
  if (c.mode == RunMode::Validate)
    for (std::size_t i = 1; i < c.t_list_fs.size(); ++i)
      require(c.t_list_fs[i] > c.t_list_fs[i - 1],
              "t_list_fs must be strictly ascending in validate mode");
  if (c.x_fixed_nm) require(*c.x_fixed_nm >= 0.0, "x_fixed_nm must be >= 0");

  if (c.box_min_nm) require(*c.box_min_nm < 0.0, "box_min_nm must be negative (left wall below the shutter)");
  if (c.box_dx_nm) require(*c.box_dx_nm > 0.0, "box_dx_nm must be positive");
  if (c.box_dt_fs) require(*c.box_dt_fs > 0.0, "box_dt_fs must be positive");
  if (c.compare_beyond_nm) require(*c.compare_beyond_nm >= 0.0, "compare_beyond_nm must be >= 0");
}

std::vector<GamowMode> enumerate_poles(const BarrierProfile& p, const ScenarioConfig& c,
                                       ordered_json& search) {
  if (c.seed_window_mev) {
    auto [e_lo, e_hi] = *c.seed_window_mev;
    double k_hi = wavenumber_from_energy(e_hi, p.c2m);
    auto found = find_modes(p, k_hi * 1.05 + 0.05);
    std::erase_if(found, [&](const GamowMode& g) { return g.eps() < e_lo || g.eps() > e_hi; });
    if (c.n_poles && found.size() > static_cast<std::size_t>(*c.n_poles))
      found.resize(static_cast<std::size_t>(*c.n_poles));
    search["kind"] = "energy window";
    search["e_min_mev"] = e_lo;
    search["e_max_mev"] = e_hi;
    return found;
  }
  const int n = c.n_poles.value_or(10);
  // level spacing of the inner well is roughly pi/L, so this first guess
  // usually lands on the first try
  double k_max = std::max(0.8, (n + 2) * std::numbers::pi / p.length);
  for (;;) {
    auto found = find_modes(p, k_max);
    if (found.size() >= static_cast<std::size_t>(n)) {
      found.resize(static_cast<std::size_t>(n));
      search["kind"] = "level count";
      search["levels"] = n;
      search["k_max_per_nm"] = k_max;
      return found;
    }
    if (k_max > 40.0)
      throw std::runtime_error("pole search stalled: only " + std::to_string(found.size()) +
                               " of " + std::to_string(n) + " levels below k = 40 /nm");
    log_debug("pole search: " + std::to_string(found.size()) + " levels below k = " +
              num10(k_max) + ", widening");
    k_max *= 1.4;
  }
}

struct ResolvedIncidence {
  bool by_detuning = false;
  double detuning_gamma = 0.0;
  bool above = false;
  double energy_mev = 0.0;
  ShutterModel model;
};

IncidenceSpec default_incidence(RunMode mode) {
  IncidenceSpec s;
  switch (mode) {
    case RunMode::Trace:
      s.by_detuning = true;
      s.detuning_gamma = {2.0, 5.0}; // one response slower, one faster than the lifetime
      break;
    case RunMode::Timescales:
      s.by_detuning = true;
      s.detuning_gamma = {5.0};
      break;
    default:
      s.energy_mev = 74.97; // canonical below-resonance incidence on the stock structure
      break;
  }
  return s;
}

ResolvedIncidence resolve_one(const BarrierProfile& p, const std::vector<GamowMode>& modes,
                              const IncidenceSpec& spec, double detuning) {
  ResolvedIncidence r;
  r.by_detuning = spec.by_detuning;
  r.above = spec.above;
  r.detuning_gamma = detuning;
  if (spec.by_detuning) {
    if (modes.empty())
      throw std::runtime_error("incidence resolution: no resonance level to anchor the detuning");
    const GamowMode& ground = modes.front();
    r.energy_mev = ground.eps() + (spec.above ? 1.0 : -1.0) * detuning * ground.gamma();
    if (r.energy_mev <= 0.0)
      throw std::runtime_error("incidence resolution: detuning pushes the energy below zero");
  } else {
    r.energy_mev = spec.energy_mev;
  }
  r.model = make_shutter_model(p, modes, r.energy_mev);
  return r;
}

ordered_json pole_json(const GamowMode& g) {
  ordered_json j;
  j["re_k_per_nm"] = g.k.real();
  j["im_k_per_nm"] = g.k.imag();
  j["eps_mev"] = g.eps();
  j["gamma_mev"] = g.gamma();
  j["re_u0"] = g.u0.real();
  j["im_u0"] = g.u0.imag();
  j["re_uL"] = g.uL.real();
  j["im_uL"] = g.uL.imag();
  return j;
}

ordered_json incidence_json(const ResolvedIncidence& r, const BarrierProfile& p) {
  ordered_json j;
  j["form"] = r.by_detuning ? "detuning_gamma" : "energy_mev";
  if (r.by_detuning) {
    j["detuning_gamma"] = r.detuning_gamma;
    j["side"] = r.above ? "above" : "below";
  }
  j["energy_mev"] = r.energy_mev;
  j["wavenumber_per_nm"] = r.model.k;
  j["speed_nm_per_ps"] = classical_speed(r.energy_mev, p.c2m);
  j["transmission_re"] = r.model.t_k.real();
  j["transmission_im"] = r.model.t_k.imag();
  j["transmission_abs2"] = std::norm(r.model.t_k);
  if (!r.model.modes.empty()) {
    const GamowMode& lvl = r.model.modes.front();
    j["nearest_level"] = ordered_json{{"eps_mev", lvl.eps()}, {"gamma_mev", lvl.gamma()}};
  }
  return j;
}

cplx psi_at(const ShutterModel& m, double x, double t) {
  return x < m.profile.length ? psi_internal(m, x, t) : psi_external(m, x, t);
}

std::string poles_csv(const std::vector<GamowMode>& modes) {
  std::string s = "level,re_k_per_nm,im_k_per_nm,eps_mev,gamma_mev,re_u0,im_u0,re_uL,im_uL\n";
  int i = 1;
  for (const GamowMode& g : modes) {
    s += std::to_string(i++);
    for (double v : {g.k.real(), g.k.imag(), g.eps(), g.gamma(), g.u0.real(), g.u0.imag(),
                     g.uL.real(), g.uL.imag()}) {
      s += ',';
      s += num17(v);
    }
    s += '\n';
  }
  return s;
}

void append_row(std::string& s, double x, cplx v, double t2) {
  s += num17(x);
  s += ',';
  s += num17(v.real());
  s += ',';
  s += num17(v.imag());
  s += ',';
  s += num17(std::norm(v) / t2);
  s += '\n';
}

std::string snapshot_csv(const ShutterModel& m, const std::vector<double>& xs, double t) {
  std::string s = "x_nm,re_psi,im_psi,density_over_t2\n";
  const double t2 = std::norm(m.t_k);
  for (double x : xs) append_row(s, x, psi_at(m, x, t), t2);
  return s;
}

std::string stationary_csv(const ShutterModel& m, const std::vector<double>& xs) {
  std::string s = "x_nm,re_psi,im_psi,density_over_t2\n";
  const double t2 = std::norm(m.t_k);
  for (double x : xs) append_row(s, x, stationary_wave(m.profile, m.k, x), t2);
  return s;
}

std::string trace_csv(const ShutterModel& m, double x_fixed, const std::vector<double>& ts) {
  std::string s = "t_fs,density_over_t2\n";
  const double t2 = std::norm(m.t_k);
  for (double t : ts) {
    s += num17(t);
    s += ',';
    s += num17(std::norm(psi_at(m, x_fixed, t)) / t2);
    s += '\n';
  }
  return s;
}

struct Emitter {
  const fs::path& dir;
  RunOutput& out;
  std::set<std::string> names;

  void operator()(const std::string& name, const std::string& body) {
    if (!names.insert(name).second)
      throw ConfigError("output file name collision: " + name);
    write_atomic(dir, name, body);
    out.files.push_back(dir / name);
    log_debug("wrote " + name);
  }
};

void run_snapshot(const ScenarioConfig& c, const BarrierProfile& p,
                  const std::vector<GamowMode>& modes, ordered_json& man, Emitter& emit) {
  const IncidenceSpec spec = c.incidence.value_or(default_incidence(RunMode::Snapshot));
  const ResolvedIncidence r =
      resolve_one(p, modes, spec, spec.by_detuning ? spec.detuning_gamma.front() : 0.0);

  double x0, x1, dx;
  std::string x_src = "config";
  if (c.x_min_nm) {
    x0 = *c.x_min_nm;
    x1 = *c.x_max_nm;
    dx = *c.x_step_nm;
  } else if (r.by_detuning) {
    x0 = 0.0;
    x1 = std::max(400.0, p.length); // structure plus the near field where pulses are born
    dx = 0.25;
    x_src = "default near field";
  } else {
    x0 = 0.0;
    x1 = 8000.0; // far field, front of a 10 ps run included
    dx = 2.0;
    x_src = "default far field";
  }
  const std::vector<double> xs = expand_range(x0, x1, dx);

  std::vector<double> ts;
  std::string t_src = "config";
  if (!c.t_list_fs.empty()) {
    ts = c.t_list_fs;
  } else if (c.t_min_fs) {
    ts = expand_range(*c.t_min_fs, *c.t_max_fs, *c.t_step_fs);
  } else if (!r.by_detuning) {
    ts = {2000.0, 10000.0};
    t_src = "default";
  } else {
    // reconstruct the emission-cycle extrema: density maxima at odd
    // half-periods of the detuning frequency, minima at the even ones
    const GamowMode& lvl = r.model.modes.front();
    const double w = std::abs(r.energy_mev - lvl.eps());
    if (!(w > 0.0))
      throw ConfigError("snapshot times cannot be reconstructed at resonance incidence; give t_list_fs");
    for (int mi = 1; mi <= 3; ++mi) {
      ts.push_back(response_maximum_time(lvl, r.energy_mev, mi));
      ts.push_back(2.0 * mi * std::numbers::pi * kHbar / w);
    }
    std::sort(ts.begin(), ts.end());
    t_src = "reconstructed: emission maxima (2m-1) pi hbar/|E-eps| interleaved with minima "
            "2m pi hbar/|E-eps|, m = 1..3";
  }

  man["incidence"] = incidence_json(r, p);
  man["grids"] = ordered_json{{"x_min_nm", x0},
                              {"x_max_nm", x1},
                              {"x_step_nm", dx},
                              {"x_count", xs.size()},
                              {"x_source", x_src},
                              {"times_fs", ts},
                              {"times_source", t_src}};

  for (double t : ts) emit("snapshot_t" + num10(t) + "fs.csv", snapshot_csv(r.model, xs, t));
  // the stationary density the buildup approaches, same grid and normalization
  if (r.by_detuning) emit("stationary.csv", stationary_csv(r.model, xs));
}

void run_trace(const ScenarioConfig& c, const BarrierProfile& p,
               const std::vector<GamowMode>& modes, ordered_json& man, Emitter& emit) {
  const IncidenceSpec spec = c.incidence.value_or(default_incidence(RunMode::Trace));
  const double x_f = c.x_fixed_nm.value_or(p.length);

  std::vector<double> ts;
  ordered_json tgrid;
  tgrid["x_fixed_nm"] = x_f;
  if (!c.t_list_fs.empty()) {
    ts = c.t_list_fs;
    tgrid["times_fs"] = ts;
    tgrid["times_source"] = "config";
  } else {
    const double lo = c.t_min_fs.value_or(2.0);
    const double hi = c.t_max_fs.value_or(6000.0);
    const double st = c.t_step_fs.value_or(2.0);
    ts = expand_range(lo, hi, st);
    tgrid["t_min_fs"] = lo;
    tgrid["t_max_fs"] = hi;
    tgrid["t_step_fs"] = st;
    tgrid["t_count"] = ts.size();
    tgrid["times_source"] = c.t_min_fs ? "config range" : "default range";
  }
  man["grids"] = tgrid;

  ordered_json traces = ordered_json::array();
  if (spec.by_detuning) {
    for (double d : spec.detuning_gamma) {
      const ResolvedIncidence r = resolve_one(p, modes, spec, d);
      const std::string name =
          std::string("trace_") + (spec.above ? "above" : "below") + "_" + num10(d) + "gamma.csv";
      emit(name, trace_csv(r.model, x_f, ts));
      ordered_json tj = incidence_json(r, p);
      tj["file"] = name;
      traces.push_back(tj);
    }
  } else {
    const ResolvedIncidence r = resolve_one(p, modes, spec, 0.0);
    const std::string name = "trace_e" + num10(spec.energy_mev) + "mev.csv";
    emit(name, trace_csv(r.model, x_f, ts));
    ordered_json tj = incidence_json(r, p);
    tj["file"] = name;
    traces.push_back(tj);
  }
  man["traces"] = traces;
}

void run_timescales(const ScenarioConfig& c, const BarrierProfile& p,
                    const std::vector<GamowMode>& modes, ordered_json& man, Emitter& emit) {
  const IncidenceSpec spec = c.incidence.value_or(default_incidence(RunMode::Timescales));
  const ResolvedIncidence r =
      resolve_one(p, modes, spec, spec.by_detuning ? spec.detuning_gamma.front() : 0.0);
  if (r.model.modes.empty())
    throw std::runtime_error("timescales: no resonance level available");
  const GamowMode& lvl = r.model.modes.front(); // nearest level governs the response
  const TimeScales s = time_scales(lvl, r.energy_mev);

  ordered_json j;
  j["reference_level"] = pole_json(lvl);
  j["incidence_energy_mev"] = r.energy_mev;
  j["detuning_mev"] = r.energy_mev - lvl.eps();
  j["omega_per_fs"] = std::abs(r.energy_mev - lvl.eps()) / kHbar;
  j["tau_lifetime_fs"] = s.tau_lifetime;
  j["tau_buildup_fs"] = s.tau_buildup;
  j["tau_response_fs"] = s.tau_response; // null at resonance incidence
  j["crossover_detuning_mev"] = s.crossover_detuning;
  ordered_json maxima = ordered_json::array();
  for (int mi = 1; mi <= 5; ++mi) maxima.push_back(response_maximum_time(lvl, r.energy_mev, mi));
  j["response_maxima_fs"] = maxima;

  man["incidence"] = incidence_json(r, p);
  emit("timescales.json", j.dump(2) + "\n");
}

void run_validate(const ScenarioConfig& c, const BarrierProfile& p,
                  const std::vector<GamowMode>& modes, ordered_json& man, Emitter& emit) {
  const IncidenceSpec spec = c.incidence.value_or(default_incidence(RunMode::Validate));
  const ResolvedIncidence r =
      resolve_one(p, modes, spec, spec.by_detuning ? spec.detuning_gamma.front() : 0.0);

  const double box_min = c.box_min_nm.value_or(-3000.0);
  const double box_max = c.box_max_nm.value_or(1500.0);
  const double dx = c.box_dx_nm.value_or(0.05);
  const double dt = c.box_dt_fs.value_or(0.1);
  const double window_hi = p.length + c.compare_beyond_nm.value_or(300.0);
  require(box_max > window_hi, "box_max_nm must clear the comparison window L + compare_beyond_nm");

  std::vector<double> ts = c.t_list_fs.empty() ? std::vector<double>{500.0, 1000.0, 2000.0}
                                               : c.t_list_fs;
  for (double t : ts) {
    const double steps = t / dt;
    require(std::abs(std::round(steps) * dt - t) <= 1e-9,
            "t_list_fs entry " + num10(t) + " is not a whole number of box_dt_fs steps");
  }

  const GridSpec g = make_grid(box_min, box_max, dx, dt, r.model.k);
  const double v = speed_nm_fs(r.model.k, p.c2m);
  const double horizon = validity_horizon(g, 0.0, window_hi, v);
  GridState st = initialize_shutter_state(g, r.model.k);

  const auto j0 = static_cast<std::size_t>(std::max(0.0, std::ceil((0.0 - g.x_min) / g.dx - 1e-9)));
  const auto j1 = std::min(g.n - 1, static_cast<std::size_t>(std::floor((window_hi - g.x_min) / g.dx + 1e-9)));
  const double t2 = std::norm(r.model.t_k);

  ordered_json samples = ordered_json::array();
  for (double t : ts) {
    evolve(st, p, t);
    std::string oracle = "x_nm,re_psi,im_psi,density_over_t2\n";
    std::string analytic = oracle;
    double num_c = 0.0, den_c = 0.0, num_i = 0.0, den_i = 0.0, num_e = 0.0, den_e = 0.0;
    for (std::size_t j = j0; j <= j1; ++j) {
      const double x = std::max(g.x(j), 0.0);
      const cplx pn = st.psi[j];
      const cplx pa = psi_at(r.model, x, t);
      append_row(oracle, x, pn, t2);
      append_row(analytic, x, pa, t2);
      const double d2 = std::norm(pn - pa), a2 = std::norm(pa);
      num_c += d2;
      den_c += a2;
      (x < p.length ? num_i : num_e) += d2;
      (x < p.length ? den_i : den_e) += a2;
    }
    auto rel = [](double nm2, double dn2) {
      return dn2 > 0.0 ? std::sqrt(nm2 / dn2) : std::numeric_limits<double>::quiet_NaN();
    };
    const std::string tag = "t" + num10(t) + "fs.csv";
    emit("oracle_" + tag, oracle);
    emit("analytic_" + tag, analytic);
    ordered_json sj;
    sj["t_fs"] = t;
    sj["within_horizon"] = t <= horizon;
    sj["rel_l2_combined"] = rel(num_c, den_c);
    sj["rel_l2_internal"] = rel(num_i, den_i);
    sj["rel_l2_external"] = rel(num_e, den_e);
    sj["oracle_csv"] = "oracle_" + tag;
    sj["analytic_csv"] = "analytic_" + tag;
    samples.push_back(sj);
    log_info("validate t = " + num10(t) + " fs: rel L2 " + num10(sj["rel_l2_combined"].get<double>()) +
             (t <= horizon ? "" : " (past the validity horizon)"));
  }

  ordered_json grid_j{{"box_min_nm", g.x_min},
                      {"box_max_nm", box_max},
                      {"last_node_nm", g.x(g.n - 1)},
                      {"dx_nm", g.dx},
                      {"dt_fs", g.dt},
                      {"nodes", g.n},
                      {"stability_ratio", g.stability_ratio}};
  ordered_json rep;
  rep["grid"] = grid_j;
  rep["window"] = ordered_json{{"x_lo_nm", 0.0}, {"x_hi_nm", window_hi}};
  rep["front_speed_nm_per_fs"] = v;
  rep["validity_horizon_fs"] = horizon;
  rep["samples"] = samples;
  rep["note"] = "past the validity horizon, wall reflections re-enter the comparison window; "
                "those errors are reported for reference only";
  emit("validation.json", rep.dump(2) + "\n");

  man["incidence"] = incidence_json(r, p);
  man["grids"] = ordered_json{{"box", grid_j},
                              {"window_x_hi_nm", window_hi},
                              {"times_fs", ts},
                              {"validity_horizon_fs", horizon}};
}

} // namespace

ScenarioConfig default_config(RunMode mode) {
  ScenarioConfig c;
  c.mode = mode;
  return c;
}

ScenarioConfig load_config(const std::string& path, RunMode mode) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ScenarioConfig c = default_config(mode);
  c.source = path;

  std::optional<double> energy;
  std::optional<std::vector<double>> detunings;
  std::optional<bool> above;

  std::set<std::string> seen;
  std::string line;
  int no = 0;
  int entries = 0;
  while (std::getline(in, line)) {
    ++no;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trimmed(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail_at(path, no, "expected key = value");
    const std::string key = trimmed(line.substr(0, eq));
    const std::string value = trimmed(line.substr(eq + 1));
    if (key.empty()) fail_at(path, no, "missing key before '='");
    if (value.empty()) fail_at(path, no, "field '" + key + "': missing value");
    if (!seen.insert(key).second) fail_at(path, no, "duplicate key '" + key + "'");
    ++entries;

    auto num = [&] { return parse_num(value, path, no, key); };
    if (key == "mode") {
      const auto m = parse_mode(value);
      if (!m) fail_at(path, no, "unknown mode '" + value + "'");
      if (*m != mode)
        fail_at(path, no, "config mode '" + value + "' conflicts with subcommand '" +
                              mode_name(mode) + "'");
    } else if (key == "barrier_height_mev") {
      c.barrier_height_mev = num();
    } else if (key == "barrier_width_nm") {
      c.barrier_width_nm = num();
    } else if (key == "well_width_nm") {
      c.well_width_nm = num();
    } else if (key == "mass_ratio") {
      c.mass_ratio = num();
    } else if (key == "energy_mev") {
      energy = num();
    } else if (key == "detuning_gamma") {
      detunings = parse_list(value, path, no, key);
    } else if (key == "detuning_side") {
      if (value == "above") above = true;
      else if (value == "below") above = false;
      else fail_at(path, no, "detuning_side must be 'above' or 'below', got '" + value + "'");
    } else if (key == "n_poles") {
      c.n_poles = parse_count(value, path, no, key);
    } else if (key == "x_min_nm") {
      c.x_min_nm = num();
    } else if (key == "x_max_nm") {
      c.x_max_nm = num();
    } else if (key == "x_step_nm") {
      c.x_step_nm = num();
    } else if (key == "t_min_fs") {
      c.t_min_fs = num();
    } else if (key == "t_max_fs") {
      c.t_max_fs = num();
    } else if (key == "t_step_fs") {
      c.t_step_fs = num();
    } else if (key == "t_list_fs") {
      c.t_list_fs = parse_list(value, path, no, key);
    } else if (key == "x_fixed_nm") {
      c.x_fixed_nm = num();
    } else if (key == "box_min_nm") {
      c.box_min_nm = num();
    } else if (key == "box_max_nm") {
      c.box_max_nm = num();
    } else if (key == "box_dx_nm") {
      c.box_dx_nm = num();
    } else if (key == "box_dt_fs") {
      c.box_dt_fs = num();
    } else if (key == "compare_beyond_nm") {
      c.compare_beyond_nm = num();
    } else if (key == "out_dir") {
      c.out_dir = value;
    } else {
      fail_at(path, no, "unknown key '" + key + "'");
    }
  }
  if (entries == 0) throw ConfigError(path + ": empty config");

  if (energy && detunings)
    throw ConfigError(path + ": give exactly one incidence form, energy_mev or detuning_gamma");
  if (above.has_value() && !detunings)
    throw ConfigError(path + ": detuning_side without detuning_gamma");
  if (energy) {
    IncidenceSpec s;
    s.energy_mev = *energy;
    c.incidence = s;
  } else if (detunings) {
    IncidenceSpec s;
    s.by_detuning = true;
    s.detuning_gamma = *detunings;
    s.above = above.value_or(false);
    c.incidence = s;
  }
  return c;
}

RunOutput run_scenario(const ScenarioConfig& cfg) {
  validate_config(cfg);
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());

  const BarrierProfile p = build_double_barrier(cfg.barrier_height_mev, cfg.barrier_width_nm,
                                                cfg.well_width_nm, cfg.mass_ratio);
  ordered_json search;
  const std::vector<GamowMode> modes = enumerate_poles(p, cfg, search);
  log_info(std::string(mode_name(cfg.mode)) + ": carrying " + std::to_string(modes.size()) +
           " resonance levels");
  if (modes.empty() && cfg.mode != RunMode::Poles)
    log_info("warning: no resonance levels found; series part of the solution is empty");

  ordered_json man;
  man["tool"] = "qsrun";
  man["code_version"] = kCodeVersion;
  man["mode"] = mode_name(cfg.mode);
  man["config_source"] = cfg.source;
  man["constants"] =
      ordered_json{{"hbar_mev_fs", kHbar}, {"hbar2_over_2me_mev_nm2", kHalfHbar2OverMe}};
  man["potential"] = ordered_json{{"barrier_height_mev", cfg.barrier_height_mev},
                                  {"barrier_width_nm", cfg.barrier_width_nm},
                                  {"well_width_nm", cfg.well_width_nm},
                                  {"mass_ratio", cfg.mass_ratio},
                                  {"length_nm", p.length},
                                  {"hbar2_over_2m_mev_nm2", p.c2m}};
  man["pole_search"] = search;
  ordered_json pv = ordered_json::array();
  for (const GamowMode& g : modes) pv.push_back(pole_json(g));
  man["poles"] = pv;

  RunOutput out{dir, dir / "manifest.json", {}};
  Emitter emit{dir, out, {}};
  switch (cfg.mode) {
    case RunMode::Poles:
      emit("poles.csv", poles_csv(modes));
      break;
    case RunMode::Snapshot:
      run_snapshot(cfg, p, modes, man, emit);
      break;
    case RunMode::Trace:
      run_trace(cfg, p, modes, man, emit);
      break;
    case RunMode::Timescales:
      run_timescales(cfg, p, modes, man, emit);
      break;
    case RunMode::Validate:
      run_validate(cfg, p, modes, man, emit);
      break;
  }

  ordered_json names = ordered_json::array();
  for (const fs::path& f : out.files) names.push_back(f.filename().string());
  man["outputs"] = names;
  write_atomic(dir, "manifest.json", man.dump(2) + "\n");
  log_info("wrote " + out.manifest.string() + " and " + std::to_string(out.files.size()) +
           " data files");
  return out;
}

} // namespace qs
