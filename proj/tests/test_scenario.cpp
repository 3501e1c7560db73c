#include <doctest.h>

#include "qs/scenario.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace qs;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const bool env_quiet = [] {
  setenv("QSRUN_LOG", "quiet", 1);
  return true;
}();

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::path("scenario_io") / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write_file(const fs::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << body;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto nl = s.find('\n', pos);
    out.push_back(s.substr(pos, nl == std::string::npos ? nl : nl - pos));
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return out;
}

std::vector<double> row_values(const std::string& row) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= row.size()) {
    const auto comma = row.find(',', pos);
    out.push_back(std::strtod(row.substr(pos, comma - pos).c_str(), nullptr));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

} // namespace

TEST_CASE("config parser rejects malformed input with file:line positions") {
  const fs::path dir = fresh_dir("parse");
  auto cfg = [&](const std::string& body) {
    const fs::path p = dir / "c.cfg";
    write_file(p, body);
    return p.string();
  };

  CHECK_THROWS_AS(load_config(cfg(""), RunMode::Snapshot), ConfigError);
  CHECK_THROWS_AS(load_config(cfg("# only a comment\n"), RunMode::Snapshot), ConfigError);
  CHECK_THROWS_AS(load_config((dir / "absent.cfg").string(), RunMode::Snapshot), ConfigError);

  try {
    load_config(cfg("x_min_nm 3\n"), RunMode::Snapshot);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(":1:") != std::string::npos);
  }
  try {
    load_config(cfg("# header\nnot_a_key = 2\n"), RunMode::Snapshot);
    CHECK(false);
  } catch (const ConfigError& e) {
    const std::string w = e.what();
    CHECK(w.find(":2:") != std::string::npos);
    CHECK(w.find("not_a_key") != std::string::npos);
  }

  CHECK_THROWS_AS(load_config(cfg("x_min_nm = abc\n"), RunMode::Snapshot), ConfigError);
  CHECK_THROWS_AS(load_config(cfg("t_list_fs = 1,,2\n"), RunMode::Snapshot), ConfigError);
  CHECK_THROWS_AS(load_config(cfg("n_poles = 2.5\n"), RunMode::Snapshot), ConfigError);
  CHECK_THROWS_AS(load_config(cfg("x_min_nm = 1\nx_min_nm = 2\n"), RunMode::Snapshot), ConfigError);
  CHECK_THROWS_AS(load_config(cfg("energy_mev = 74.97\ndetuning_gamma = 5\n"), RunMode::Snapshot),
                  ConfigError);
  CHECK_THROWS_AS(load_config(cfg("detuning_side = below\n"), RunMode::Snapshot), ConfigError);
  CHECK_THROWS_AS(load_config(cfg("detuning_gamma = 5\ndetuning_side = left\n"), RunMode::Trace),
                  ConfigError);
  CHECK_THROWS_AS(load_config(cfg("mode = trace\n"), RunMode::Snapshot), ConfigError);

  // a valid file round-trips into the struct
  const ScenarioConfig c = load_config(
      cfg("mode = trace\nx_fixed_nm = 20\ndetuning_gamma = 2, 5\nt_min_fs = 10\n"
          "t_max_fs = 50\nt_step_fs = 10\nout_dir = somewhere\n"),
      RunMode::Trace);
  CHECK(c.x_fixed_nm == 20.0);
  REQUIRE(c.incidence.has_value());
  CHECK(c.incidence->by_detuning);
  CHECK(c.incidence->detuning_gamma == std::vector<double>{2.0, 5.0});
  CHECK(c.out_dir == "somewhere");
}

TEST_CASE("grids inconsistent with the mode are refused") {
  ScenarioConfig c = default_config(RunMode::Poles);
  c.x_fixed_nm = 15.0;
  CHECK_THROWS_AS(run_scenario(c), ConfigError);

  c = default_config(RunMode::Poles);
  c.incidence = IncidenceSpec{false, 74.97, {}, false};
  CHECK_THROWS_AS(run_scenario(c), ConfigError);

  c = default_config(RunMode::Snapshot);
  c.x_min_nm = 0.0; // incomplete range triple
  CHECK_THROWS_AS(run_scenario(c), ConfigError);

  c = default_config(RunMode::Snapshot);
  c.incidence = IncidenceSpec{true, 0.0, {2.0, 5.0}, false}; // list only fits trace mode
  CHECK_THROWS_AS(run_scenario(c), ConfigError);

  c = default_config(RunMode::Snapshot);
  c.x_min_nm = -5.0;
  c.x_max_nm = 10.0;
  c.x_step_nm = 1.0; // solution starts at the shutter plane
  CHECK_THROWS_AS(run_scenario(c), ConfigError);

  c = default_config(RunMode::Trace);
  c.t_min_fs = 10.0;
  c.t_max_fs = 100.0;
  c.t_step_fs = 10.0;
  c.t_list_fs = {5.0}; // range and list together
  CHECK_THROWS_AS(run_scenario(c), ConfigError);

  c = default_config(RunMode::Timescales);
  c.t_list_fs = {100.0};
  CHECK_THROWS_AS(run_scenario(c), ConfigError);

  c = default_config(RunMode::Validate);
  c.t_list_fs = {100.1}; // not a whole number of dt = 0.1 fs steps... but it is; use dt 0.25
  c.box_dt_fs = 0.25;
  CHECK_THROWS_AS(run_scenario(c), ConfigError);

  c = default_config(RunMode::Validate);
  c.t_list_fs = {200.0, 100.0}; // must ascend, the oracle marches forward
  CHECK_THROWS_AS(run_scenario(c), ConfigError);
}

TEST_CASE("poles mode writes the refined table") {
  const fs::path dir = fresh_dir("poles");
  ScenarioConfig c = default_config(RunMode::Poles);
  c.n_poles = 3;
  c.out_dir = dir.string();
  const RunOutput out = run_scenario(c);
  REQUIRE(out.files.size() == 1);

  const auto rows = lines(slurp(out.files[0]));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "level,re_k_per_nm,im_k_per_nm,eps_mev,gamma_mev,re_u0,im_u0,re_uL,im_uL");
  const auto r1 = row_values(rows[1]);
  REQUIRE(r1.size() == 9);
  CHECK(r1[0] == 1.0);
  CHECK(std::abs(r1[1] - 0.3752065817564768) < 1e-11);
  CHECK(std::abs(r1[2] + 0.00120439484076512) < 1e-11);
  CHECK(r1[3] == doctest::Approx(80.05423548271574).epsilon(1e-9));
  CHECK(r1[4] == doctest::Approx(1.0278913681625192).epsilon(1e-9));

  const json man = json::parse(slurp(out.manifest));
  CHECK(man["code_version"] == kCodeVersion);
  CHECK(man["mode"] == "poles");
  CHECK(man["poles"].size() == 3);
  CHECK(man["constants"]["hbar_mev_fs"] == kHbar);
  CHECK(man["outputs"] == json::array({"poles.csv"}));
}

TEST_CASE("snapshot rows reproduce the library solution and runs are byte-stable") {
  const fs::path dir1 = fresh_dir("snap1");
  const fs::path dir2 = fresh_dir("snap2");
  ScenarioConfig c = default_config(RunMode::Snapshot);
  c.incidence = IncidenceSpec{false, 74.97, {}, false};
  c.x_min_nm = 0.0;
  c.x_max_nm = 60.0;
  c.x_step_nm = 3.0;
  c.t_list_fs = {500.0};
  c.out_dir = dir1.string();

  const RunOutput out = run_scenario(c);
  REQUIRE(out.files.size() == 1);
  CHECK(out.files[0].filename() == "snapshot_t500fs.csv");

  const std::string csv = slurp(out.files[0]);
  const auto rows = lines(csv);
  REQUIRE(rows.size() == 22);
  CHECK(rows[0] == "x_nm,re_psi,im_psi,density_over_t2");

  BarrierProfile p = build_double_barrier(230.0, 5.0, 5.0, 0.067);
  const ShutterModel m = make_shutter_model(p, find_modes(p, 2.2), 74.97);
  const double t2 = std::norm(m.t_k);

  const auto ext = row_values(rows[11]); // x = 30, beyond the structure
  REQUIRE(ext.size() == 4);
  CHECK(ext[0] == 30.0);
  const cplx we = psi_external(m, 30.0, 500.0);
  CHECK(ext[1] == doctest::Approx(we.real()).epsilon(1e-8));
  CHECK(ext[2] == doctest::Approx(we.imag()).epsilon(1e-8));
  CHECK(ext[3] == doctest::Approx(std::norm(we) / t2).epsilon(1e-8));

  const auto in = row_values(rows[4]); // x = 9, inside the well
  const cplx wi = psi_internal(m, 9.0, 500.0);
  CHECK(in[3] == doctest::Approx(std::norm(wi) / t2).epsilon(1e-8));

  const json man = json::parse(slurp(out.manifest));
  CHECK(man["incidence"]["energy_mev"] == 74.97);
  CHECK(man["incidence"]["form"] == "energy_mev");
  CHECK(man["grids"]["x_count"] == 21);
  CHECK(man["grids"]["times_source"] == "config");

  c.out_dir = dir2.string();
  const RunOutput rerun = run_scenario(c);
  CHECK(slurp(rerun.files[0]) == csv);
  CHECK(slurp(rerun.manifest) == slurp(out.manifest));
}

TEST_CASE("detuning snapshots default to the reconstructed emission extrema") {
  const fs::path dir = fresh_dir("snap_extrema");
  ScenarioConfig c = default_config(RunMode::Snapshot);
  c.incidence = IncidenceSpec{true, 0.0, {5.0}, false};
  c.x_min_nm = 0.0;
  c.x_max_nm = 20.0;
  c.x_step_nm = 5.0;
  c.out_dir = dir.string();
  const RunOutput out = run_scenario(c);

  // six extrema plus the stationary profile
  REQUIRE(out.files.size() == 7);
  CHECK(out.files.back().filename() == "stationary.csv");

  const json man = json::parse(slurp(out.manifest));
  const auto ts = man["grids"]["times_fs"].get<std::vector<double>>();
  REQUIRE(ts.size() == 6);
  // alternating odd/even half-periods of the detuning frequency
  CHECK(ts[0] == doctest::Approx(402.3448220989548).epsilon(1e-6));
  CHECK(ts[1] == doctest::Approx(2.0 * ts[0]).epsilon(1e-9));
  CHECK(ts[5] == doctest::Approx(6.0 * ts[0]).epsilon(1e-9));
  CHECK(std::string(man["grids"]["times_source"]).find("reconstructed") == 0);
  CHECK(man["incidence"]["energy_mev"] == doctest::Approx(74.91477864190314).epsilon(1e-9));

  // at resonance there is no cycle to reconstruct
  c.incidence = IncidenceSpec{true, 0.0, {0.0}, false};
  CHECK_THROWS_AS(run_scenario(c), ConfigError);
}

TEST_CASE("trace mode emits one file per detuning") {
  const fs::path dir = fresh_dir("trace");
  ScenarioConfig c = default_config(RunMode::Trace);
  c.t_min_fs = 100.0;
  c.t_max_fs = 400.0;
  c.t_step_fs = 100.0;
  c.out_dir = dir.string();
  const RunOutput out = run_scenario(c); // defaults: 2 and 5 gamma below

  REQUIRE(out.files.size() == 2);
  CHECK(out.files[0].filename() == "trace_below_2gamma.csv");
  CHECK(out.files[1].filename() == "trace_below_5gamma.csv");

  const auto rows = lines(slurp(out.files[1]));
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == "t_fs,density_over_t2");

  BarrierProfile p = build_double_barrier(230.0, 5.0, 5.0, 0.067);
  auto modes = find_modes(p, 2.2);
  const double e = modes.front().eps() - 5.0 * modes.front().gamma();
  const ShutterModel m = make_shutter_model(p, modes, e);
  const auto last = row_values(rows[4]);
  CHECK(last[0] == 400.0);
  CHECK(last[1] ==
        doctest::Approx(std::norm(psi_external(m, 15.0, 400.0)) / std::norm(m.t_k)).epsilon(1e-8));

  const json man = json::parse(slurp(out.manifest));
  REQUIRE(man["traces"].size() == 2);
  CHECK(man["traces"][0]["detuning_gamma"] == 2.0);
  CHECK(man["traces"][1]["file"] == "trace_below_5gamma.csv");
  CHECK(man["grids"]["x_fixed_nm"] == 15.0);
}

TEST_CASE("timescales mode reports the derived times") {
  const fs::path dir = fresh_dir("timescales");
  ScenarioConfig c = default_config(RunMode::Timescales);
  c.out_dir = dir.string();
  const RunOutput out = run_scenario(c); // default: 5 gamma below

  REQUIRE(out.files.size() == 1);
  const json j = json::parse(slurp(out.files[0]));

  BarrierProfile p = build_double_barrier(230.0, 5.0, 5.0, 0.067);
  auto modes = find_modes(p, 2.2);
  const GamowMode& lvl = modes.front();
  const double e = lvl.eps() - 5.0 * lvl.gamma();
  const TimeScales ts = time_scales(lvl, e);

  CHECK(j["tau_lifetime_fs"].get<double>() == doctest::Approx(ts.tau_lifetime).epsilon(1e-9));
  CHECK(j["tau_buildup_fs"].get<double>() == doctest::Approx(ts.tau_buildup).epsilon(1e-9));
  CHECK(j["tau_response_fs"].get<double>() == doctest::Approx(ts.tau_response).epsilon(1e-9));
  CHECK(j["crossover_detuning_mev"].get<double>() ==
        doctest::Approx(ts.crossover_detuning).epsilon(1e-9));
  REQUIRE(j["response_maxima_fs"].size() == 5);
  CHECK(j["response_maxima_fs"][1].get<double>() ==
        doctest::Approx(3.0 * j["response_maxima_fs"][0].get<double>()).epsilon(1e-12));
  CHECK(j["omega_per_fs"].get<double>() ==
        doctest::Approx(5.0 * lvl.gamma() / kHbar).epsilon(1e-9));
}

TEST_CASE("validate mode reports horizon-aware oracle errors") {
  const fs::path dir = fresh_dir("validate");
  ScenarioConfig c = default_config(RunMode::Validate);
  c.box_min_nm = -400.0;
  c.box_max_nm = 250.0;
  c.box_dx_nm = 0.1;
  c.box_dt_fs = 0.25;
  c.compare_beyond_nm = 135.0;
  c.t_list_fs = {100.0, 200.0};
  c.out_dir = dir.string();
  const RunOutput out = run_scenario(c);

  REQUIRE(out.files.size() == 5);
  const json r = json::parse(slurp(dir / "validation.json"));

  const double k = wavenumber_from_energy(74.97, c2m_from_mass(0.067));
  const double v = speed_nm_fs(k, c2m_from_mass(0.067));
  // right wall is the binding side: (250 - 150) nm of clearance
  CHECK(r["validity_horizon_fs"].get<double>() == doctest::Approx(100.0 / v).epsilon(1e-9));

  REQUIRE(r["samples"].size() == 2);
  CHECK(r["samples"][0]["within_horizon"] == true);
  CHECK(r["samples"][1]["within_horizon"] == false);
  // coarse box, so just a sanity bound on the agreement
  CHECK(r["samples"][0]["rel_l2_combined"].get<double>() < 0.06);
  CHECK(r["samples"][0]["rel_l2_internal"].get<double>() < 0.06);

  const auto oracle = lines(slurp(dir / "oracle_t100fs.csv"));
  const auto analytic = lines(slurp(dir / "analytic_t100fs.csv"));
  REQUIRE(oracle.size() == analytic.size());
  CHECK(oracle[0] == analytic[0]);
  // the window covers [0, 150] on a 0.1 nm grid whose nodes are set by the
  // snapped left wall, so the endpoints need not land on nodes
  CHECK(oracle.size() >= 1500);
  CHECK(oracle.size() <= 1502);
}

TEST_CASE("command line: exit codes and artifacts") {
  const fs::path dir = fresh_dir("cli");
  auto run = [&](const std::string& args) {
    const int rc = std::system((std::string(QSRUN_BIN) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };

  CHECK(run("") == 2); // a subcommand is required
  CHECK(run("--help") == 0);

  CHECK(run("poles --out " + (dir / "p").string() + " --poles 2") == 0);
  CHECK(fs::exists(dir / "p" / "poles.csv"));
  CHECK(fs::exists(dir / "p" / "manifest.json"));
  CHECK(lines(slurp(dir / "p" / "poles.csv")).size() == 3);

  // the energy window keeps only the ground level
  CHECK(run("poles --out " + (dir / "w").string() + " --seed-scan 60:100:meV") == 0);
  CHECK(lines(slurp(dir / "w" / "poles.csv")).size() == 2);

  write_file(dir / "bad.cfg", "nope = 1\n");
  CHECK(run("snapshot --config " + (dir / "bad.cfg").string()) == 2);
  CHECK(run("poles --seed-scan 100:50") == 2);

  // a window with no level in it cannot anchor a detuning
  CHECK(run("timescales --out " + (dir / "t").string() + " --seed-scan 1:20:meV") == 3);
}
