#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "modloc/experiment.hpp"

using namespace modloc;
namespace fs = std::filesystem;

// ---- helpers ----------------------------------------------------------------

static std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

static fs::path fresh_dir(const std::string& leaf) {
  const fs::path d = fs::temp_directory_path() / ("modloc-test-" + leaf);
  fs::remove_all(d);
  return d;
}

template <typename Fn>
static void expect_config_invalid(Fn&& fn) {
  try {
    fn();
    FAIL_CHECK("expected a configuration error");
  } catch (const error& e) {
    CHECK(e.code() == errc::config_invalid);
  }
}

// Names in the manifest must appear in catalogue order, each exactly once.
static void check_against_catalogue(const run_manifest_t& m, bool expect_full) {
  const auto catalogue = list_checks(m.experiment);
  std::vector<std::string> order;
  for (const auto& [name, desc] : catalogue) {
    CHECK(!desc.empty());
    order.push_back(name);
  }
  std::set<std::string> seen;
  std::size_t cursor = 0;
  for (const auto& c : m.checks) {
    CHECK(seen.insert(c.name).second);
    const auto it = std::find(order.begin() + static_cast<std::ptrdiff_t>(cursor), order.end(),
                              c.name);
    REQUIRE(it != order.end());
    cursor = static_cast<std::size_t>(it - order.begin()) + 1;
  }
  if (expect_full) CHECK(m.checks.size() == catalogue.size());
}

static const run_manifest_t& small_lattice_manifest() {
  static const run_manifest_t m = [] {
    experiment_config_t c;
    c.experiment = "lattice-verify";
    c.seed = 11;
    c.dim = 3;
    c.families = 4;
    return run_experiment(c);
  }();
  return m;
}

// ---- catalogue and config plumbing -------------------------------------------

TEST_CASE("experiment catalogue is complete and collision free") {
  const auto names = experiment_names();
  CHECK(names.size() == 7);
  std::set<std::string> all_checks;
  for (const auto& n : names) {
    const auto cat = list_checks(n);
    CHECK(!cat.empty());
    for (const auto& [check, desc] : cat) {
      CAPTURE(check);
      CHECK(all_checks.insert(check).second);  // unique across experiments
      CHECK(!desc.empty());
    }
  }
  expect_config_invalid([] { list_checks("no-such-experiment"); });
}

TEST_CASE("config json round trip") {
  experiment_config_t c;
  c.experiment = "localize";
  c.seed = 99;
  c.grid = 16;
  c.wedges = 4;
  c.kappas = {0.0, 2.5};
  c.tol = 1e-6;
  c.out_dir = "/tmp/somewhere";
  const experiment_config_t back = experiment_config_t::from_json(c.to_json());
  CHECK(back.experiment == c.experiment);
  CHECK(back.seed == c.seed);
  CHECK(back.grid == c.grid);
  CHECK(back.wedges == c.wedges);
  CHECK(back.kappas == c.kappas);
  CHECK(back.tol == c.tol);
  CHECK(back.out_dir == c.out_dir);
}

TEST_CASE("config parsing rejects malformed input") {
  expect_config_invalid([] { experiment_config_t::from_json("not json at all"); });
  expect_config_invalid([] { experiment_config_t::from_json("[1,2,3]"); });
  expect_config_invalid(
      [] { experiment_config_t::from_json(R"({"experiment":"huygens","turbo":true})"); });
  expect_config_invalid(
      [] { experiment_config_t::from_json(R"({"experiment":"huygens","grid":"big"})"); });
  expect_config_invalid(
      [] { experiment_config_t::from_json(R"({"experiment":"huygens","kappas":[1,"x"]})"); });
}

TEST_CASE("config resolution validates semantics") {
  experiment_config_t c;
  c.experiment = "lattice-verify";
  const experiment_config_t r = resolve_config(c);
  CHECK(r.dim > 0);
  CHECK(r.families > 0);

  expect_config_invalid([] {
    experiment_config_t bad;
    bad.experiment = "warp-drive";
    resolve_config(bad);
  });
  expect_config_invalid([] {
    experiment_config_t bad;
    bad.experiment = "localize";
    bad.kappas = {};  // the radius sweep must be explicit
    resolve_config(bad);
  });
  expect_config_invalid([] {
    experiment_config_t bad;
    bad.experiment = "localize";
    bad.kappas = {-1.0};
    resolve_config(bad);
  });
  expect_config_invalid([] {
    experiment_config_t bad;
    bad.experiment = "localize";
    bad.kappas = {1.0};
    bad.grid = 10;
    bad.wedges = 3;  // rotations by 2 pi/3 are not grid rotations on 10
    resolve_config(bad);
  });
  expect_config_invalid([] {
    experiment_config_t bad;
    bad.experiment = "huygens";
    bad.grid = 20;  // refinement trends need the asymptotic regime
    resolve_config(bad);
  });
  expect_config_invalid([] {
    experiment_config_t bad;
    bad.experiment = "fock-verify";
    bad.tol = -1.0;
    resolve_config(bad);
  });
}

TEST_CASE("config hash tracks knobs but not the output directory") {
  experiment_config_t a;
  a.experiment = "fock-verify";
  const experiment_config_t ra = resolve_config(a);

  experiment_config_t b = ra;
  b.out_dir = "/tmp/elsewhere";
  CHECK(config_hash(ra) == config_hash(resolve_config(b)));

  experiment_config_t c = ra;
  c.seed = ra.seed + 1;
  CHECK(config_hash(ra) != config_hash(resolve_config(c)));
}

// ---- runs ---------------------------------------------------------------------

TEST_CASE("subspace lattice run passes and writes faithful artifacts") {
  const fs::path dir = fresh_dir("lattice");
  experiment_config_t c;
  c.experiment = "lattice-verify";
  c.seed = 7;
  c.dim = 4;
  c.families = 12;
  c.out_dir = dir.string();

  const run_manifest_t m = run_experiment(c);
  CHECK(m.all_pass());
  CHECK(m.version == artifact_version);
  CHECK(m.experiment == "lattice-verify");
  CHECK(m.config_hash == config_hash(m.config));
  check_against_catalogue(m, /*expect_full=*/true);
  for (const auto& ck : m.checks) {
    CAPTURE(ck.name);
    CHECK(ck.pass == (ck.deviation < ck.bound));
    CHECK(ck.runtime_s >= 0.0);
  }

  // files: manifest mirrors the returned object bit for bit
  CHECK(slurp(dir / "manifest.json") == m.to_json());
  const std::string checks_csv = slurp(dir / "checks.csv");
  CHECK(static_cast<std::size_t>(std::count(checks_csv.begin(), checks_csv.end(), '\n')) ==
        m.checks.size() + 1);
  const std::string families_csv = slurp(dir / "families.csv");
  CHECK(std::count(families_csv.begin(), families_csv.end(), '\n') == 12 + 1);

  // manifest text survives a parse/serialize cycle unchanged
  CHECK(run_manifest_t::from_json(m.to_json()).to_json() == m.to_json());
  fs::remove_all(dir);
}

TEST_CASE("little group run passes") {
  experiment_config_t c;
  c.experiment = "little-group";
  const run_manifest_t m = run_experiment(c);
  CHECK(m.all_pass());
  check_against_catalogue(m, true);
}

TEST_CASE("induced representation run passes at a modest grid") {
  experiment_config_t c;
  c.experiment = "induce";
  c.grid = 16;
  const run_manifest_t m = run_experiment(c);
  CHECK(m.all_pass());
  check_against_catalogue(m, true);
}

TEST_CASE("wedge localization run passes with a single radius") {
  experiment_config_t c;
  c.experiment = "localize";
  c.grid = 32;
  c.kappas = {0.0};
  const fs::path dir = fresh_dir("localize1");
  c.out_dir = dir.string();
  const run_manifest_t m = run_experiment(c);
  CHECK(m.all_pass());
  check_against_catalogue(m, /*expect_full=*/false);  // trend checks need >= 2 radii
  const std::string scores = slurp(dir / "scores.csv");
  CHECK(std::count(scores.begin(), scores.end(), '\n') == 1 + 1);
  fs::remove_all(dir);
}

TEST_CASE("wedge localization sweep reports the radius ladder in config order") {
  experiment_config_t c;
  c.experiment = "localize";
  c.grid = 16;
  c.kappas = {0.0, 25.0};
  const fs::path dir = fresh_dir("localize2");
  c.out_dir = dir.string();
  const run_manifest_t m = run_experiment(c);
  check_against_catalogue(m, /*expect_full=*/true);

  std::set<std::string> names;
  for (const auto& ck : m.checks) names.insert(ck.name);
  CHECK(names.count("scores-strictly-decreasing") == 1);
  CHECK(names.count("large-radius-score-collapses") == 1);
  CHECK(names.count("zero-radius-score-near-one") == 1);

  // rows come back in the order the radii were configured
  std::istringstream scores(slurp(dir / "scores.csv"));
  std::string line;
  std::getline(scores, line);  // header
  std::getline(scores, line);
  CHECK(line.substr(0, 2) == "0,");
  std::getline(scores, line);
  CHECK(line.substr(0, 3) == "25,");
  fs::remove_all(dir);
}

TEST_CASE("support law run passes") {
  experiment_config_t c;
  c.experiment = "huygens";
  c.grid = 32;
  const run_manifest_t m = run_experiment(c);
  CHECK(m.all_pass());
  check_against_catalogue(m, true);
}

TEST_CASE("fermionic second quantization run passes") {
  experiment_config_t c;
  c.experiment = "fock-verify";
  const run_manifest_t m = run_experiment(c);
  CHECK(m.all_pass());
  check_against_catalogue(m, true);
}

TEST_CASE("modular rotation counterexample run passes") {
  experiment_config_t c;
  c.experiment = "counterexample";
  const run_manifest_t m = run_experiment(c);
  CHECK(m.all_pass());
  check_against_catalogue(m, true);
}

TEST_CASE("tolerance override tightens absolute checks") {
  experiment_config_t c;
  c.experiment = "lattice-verify";
  c.dim = 3;
  c.families = 4;
  c.tol = 1e-30;  // far below attainable round-off
  const run_manifest_t m = run_experiment(c);
  CHECK(!m.all_pass());
  for (const auto& ck : m.checks) {
    CAPTURE(ck.name);
    CHECK(ck.bound == 1e-30);
  }
}

// ---- manifest validation ------------------------------------------------------

TEST_CASE("manifest parsing rejects foreign and duplicated content") {
  const std::string good = small_lattice_manifest().to_json();
  using nlohmann::json;

  json extra = json::parse(good);
  extra["note"] = "hello";
  expect_config_invalid([&] { run_manifest_t::from_json(extra.dump()); });

  json bad_check = json::parse(good);
  bad_check["checks"][0]["comment"] = "hm";
  expect_config_invalid([&] { run_manifest_t::from_json(bad_check.dump()); });

  json dup = json::parse(good);
  dup["checks"].push_back(dup["checks"][0]);
  expect_config_invalid([&] { run_manifest_t::from_json(dup.dump()); });

  expect_config_invalid([] { run_manifest_t::from_json("{}"); });
}

// ---- replay ---------------------------------------------------------------------

TEST_CASE("replay reproduces deviations bit for bit") {
  const run_manifest_t& m = small_lattice_manifest();
  const replay_report_t rep = replay_manifest(m.to_json());
  CHECK(rep.version_match);
  CHECK(rep.identical);
  CHECK(rep.comparison.empty());
  CHECK(rep.fresh.hash() == m.hash());
}

TEST_CASE("replay flags a tampered manifest") {
  using nlohmann::json;
  json j = json::parse(small_lattice_manifest().to_json());
  j["config"]["seed"] = 12;  // stored deviations no longer match this config
  try {
    replay_manifest(j.dump());
    FAIL_CHECK("expected a replay mismatch");
  } catch (const error& e) {
    CHECK(e.code() == errc::replay_mismatch);
    CHECK(std::string(e.what()).find("MOVED") != std::string::npos);
  }
}

TEST_CASE("replay across artifact versions reports instead of throwing") {
  using nlohmann::json;
  json j = json::parse(small_lattice_manifest().to_json());
  j["version"] = "0.0.1";
  const replay_report_t rep = replay_manifest(j.dump());
  CHECK(!rep.version_match);
  CHECK(!rep.identical);  // the reproducible hash covers the version stamp
  CHECK(rep.comparison.find("version") != std::string::npos);
}

// ---- parallel fan-out ----------------------------------------------------------

TEST_CASE("worker count respects the environment cap") {
  setenv("MODLOC_THREADS", "3", 1);
  CHECK(worker_count(10) == 3);
  CHECK(worker_count(2) == 2);
  setenv("MODLOC_THREADS", "0", 1);
  CHECK(worker_count(10) >= 1);
  unsetenv("MODLOC_THREADS");
  CHECK(worker_count(1) == 1);
  CHECK(worker_count(4) >= 1);
}

// ---- command line interface -----------------------------------------------------

static int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(MODLOC_CLI_PATH) + " " + args + " > " +
                          log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

TEST_CASE("command line drives runs, listings, and replay") {
  const fs::path dir = fresh_dir("cli");
  fs::create_directories(dir);
  const fs::path log = dir / "out.txt";

  SUBCASE("a passing run exits zero and writes the manifest") {
    const fs::path out = dir / "run";
    CHECK(run_cli("lattice-verify --seed 7 --dim 3 --families 5 --out " + out.string(), log) == 0);
    CHECK(slurp(log).find("PASS") != std::string::npos);
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(run_cli("replay " + (out / "manifest.json").string(), log) == 0);
  }

  SUBCASE("listing enumerates experiments and their checks") {
    CHECK(run_cli("--list", log) == 0);
    const std::string text = slurp(log);
    for (const auto& name : experiment_names())
      CHECK(text.find(name) != std::string::npos);
    CHECK(text.find("scores-strictly-decreasing") != std::string::npos);
  }

  SUBCASE("configuration errors exit with the dedicated code") {
    CHECK(run_cli("localize --grid 10 --wedges 3 --kappa 1", log) == 2);
    CHECK(run_cli("huygens --grid 20", log) == 2);
  }

  SUBCASE("unknown subcommands fail") {
    CHECK(run_cli("warp-drive", log) != 0);
  }

  fs::remove_all(dir);
}
