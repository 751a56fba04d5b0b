// Config/IO unit tests plus end-to-end runs of the installed binary
// (subprocess; path injected as MLS_CLI_PATH). The contract under test:
// exit codes 0/2/3, canonical round-trips, atomic artifact writes with a
// checksummed manifest written last, and byte-identical reruns.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "mls/config.hpp"
#include "mls/grid.hpp"
#include "mls/io.hpp"
#include "mls/spectral_ops.hpp"

using namespace mls;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  const std::string cmd = env_prefix + std::string(MLS_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult r;
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch_dir(const std::string& tag) {
  const fs::path p = fs::path("cli_scratch") / tag;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  const fs::path p = dir / "config.in";
  std::ofstream(p) << body;
  return p;
}

const char* kSmallSim =
    "[grid]\nN = 8\nL = 8\n[experiment]\nv = 0.2 0 0\neps = 1e-2\nT = 0.5\nseed = 5\n"
    "resolutions = 8\n";

}  // namespace

// --- config ---------------------------------------------------------------

TEST_CASE("minimal config: one key, everything else defaulted") {
  const RunConfig cfg = parse_config_text("v = 0.3 0 0\n");
  RunConfig expect;
  expect.v = Vec3{0.3, 0.0, 0.0};
  CHECK(cfg == expect);
  CHECK(cfg.N == 64);
  CHECK(cfg.L == 16.0);
  CHECK(cfg.m == 1.0);
  CHECK(cfg.I == 1.0);
  CHECK(cfg.radius == 1.0);
}

TEST_CASE("canonical emission round-trips, including non-defaults") {
  RunConfig cfg;
  cfg.v = Vec3{0.25, 0.0, 0.0};
  cfg.omega = Vec3{0.125, 0.0, 0.0};
  cfg.N = 32;
  cfg.K = 3.5;
  cfg.eps = 7.25e-3;
  cfg.seed = 123456789012345ull;
  cfg.resolutions = {8, 16};
  cfg.sweep_parameter = "eps";
  cfg.sweep_values = {1e-3, 2e-3};
  const RunConfig back = parse_config_text(emit_canonical(cfg));
  CHECK(back == cfg);
  // emission is canonical: re-emitting the parse is byte-identical
  CHECK(emit_canonical(back) == emit_canonical(cfg));

  CHECK(parse_config_text(emit_canonical(RunConfig{})) == RunConfig{});
}

TEST_CASE("config rejections carry lines and name the invariant") {
  // parse errors
  try {
    parse_config_text("radius = 1\nbogus = 3\n");
    CHECK(false);
  } catch (const ConfigParseError& e) {
    CHECK(e.line == 2);
    CHECK(std::string(e.what()).find("unknown key 'bogus'") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("N = 16\nN = 32\n"), ConfigParseError);  // duplicate
  CHECK_THROWS_AS(parse_config_text("v = 0.1 0.2\n"), ConfigParseError);     // arity
  CHECK_THROWS_AS(parse_config_text("[bogus]\nN = 16\n"), ConfigParseError);
  CHECK_THROWS_AS(parse_config_text("seed = -4\n"), ConfigParseError);

  // comments and sections are accepted
  CHECK(parse_config_text("# comment\n[grid]\nN = 32 # trailing\n").N == 32);

  // validation errors
  auto expect_validation = [](const std::string& text, const std::string& needle) {
    try {
      parse_config_text(text);
      CHECK(false);
    } catch (const ConfigValidationError& e) {
      INFO("message: " << e.what());
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_validation("v = 1.2 0 0\n", "superluminal");
  expect_validation("m = 0\n", "m");
  expect_validation("I = -1\n", "I");
  expect_validation("radius = 20\n", "support");
  expect_validation("v = 0.3 0 0\nomega = 0.5 0.5 0\n", "admissible");
  expect_validation("N = 7\n", "even");
  expect_validation("dt = 100\n", "CFL");
  expect_validation("sweep_parameter = foo\n", "sweep_parameter");
  expect_validation("sweep_parameter = v\nsweep_values = 0.5 1.5\n", "sweep");
}

// --- io --------------------------------------------------------------------

TEST_CASE("io primitives: lossless doubles, CSV shape, CRC32, atomic write") {
  CHECK(std::stod(io::format_double(0.1)) == 0.1);
  CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);

  const std::string csv = io::csv_table({"a", "b"}, {{1.0, 2.0}, {0.5, -1.0}});
  CHECK(csv.substr(0, 4) == "a,b\n");
  CHECK(csv.find("0.5,-1") != std::string::npos);
  CHECK_THROWS_AS(io::csv_table({"a", "b"}, {{1.0}}), std::invalid_argument);

  CHECK(io::crc32_hex("123456789") == "cbf43926");  // CRC-32 check value

  const fs::path dir = scratch_dir("atomic");
  io::atomic_write(dir / "x.txt", "payload");
  CHECK(slurp(dir / "x.txt") == "payload");
  CHECK_FALSE(fs::exists(dir / "x.txt.tmp"));
}

TEST_CASE("snapshot encoding round-trips bit-exactly") {
  Grid g(8, 8.0);
  SpectralField F = random_divfree(g, 3, 1.0);
  const std::string bytes = io::encode_snapshot(g, F);
  int N = 0;
  double L = 0.0;
  SpectralField G = io::decode_snapshot(bytes, N, L);
  CHECK(N == 8);
  CHECK(L == 8.0);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < g.modes(); ++i) CHECK(F.comp(c)[i] == G.comp(c)[i]);
  CHECK_THROWS_AS(io::decode_snapshot("garbage", N, L), std::runtime_error);
}

// --- binary end-to-end ------------------------------------------------------

TEST_CASE("soliton run: artifacts, verified checksums, manifest written last") {
  const fs::path dir = scratch_dir("soliton");
  const fs::path cfgp = write_config(
      dir, "[grid]\nN = 8\nL = 8\n[experiment]\nv = 0.3 0 0\nresolutions = 8\n");
  const CliResult r = run_cli("soliton --config " + cfgp.string() + " --out " +
                              (dir / "out").string() + " --emit-fields");
  INFO(r.output);
  CHECK(r.code == 0);

  const json manifest = json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(manifest["status"] == "ok");
  CHECK(manifest["config_hash"].get<std::string>().substr(0, 6) == "crc32:");
  bool saw_soliton = false, saw_snapshot = false;
  for (const auto& f : manifest["files"]) {
    const std::string name = f["name"];
    const std::string bytes = slurp(dir / "out" / name);
    CHECK(bytes.size() == f["bytes"].get<std::uint64_t>());
    CHECK(io::crc32_hex(bytes) == f["crc32"].get<std::string>());
    saw_soliton |= name == "soliton.json";
    saw_snapshot |= name == "soliton_A.mlsf";
  }
  CHECK(saw_soliton);
  CHECK(saw_snapshot);

  // the emitted config is canonical and re-parses to the run's settings
  const RunConfig cfg = parse_config_text(slurp(dir / "out" / "config.txt"));
  CHECK(cfg.N == 8);
  CHECK(cfg.v.x == 0.3);

  // report content: the effective moment of inertia must exceed the bare one
  const json rep = json::parse(slurp(dir / "out" / "soliton.json"));
  CHECK(rep["I_eff"].get<double>() > rep["I"].get<double>());
  CHECK(rep["I_eff_exceeds_I"].get<bool>());

  // the snapshot decodes to the advertised grid
  int N = 0;
  double L = 0.0;
  (void)io::decode_snapshot(slurp(dir / "out" / "soliton_A.mlsf"), N, L);
  CHECK(N == 8);
  CHECK(L == 8.0);
}

TEST_CASE("simulate reruns are byte-identical; seed override changes them") {
  const fs::path dir = scratch_dir("determinism");
  const fs::path cfgp = write_config(dir, kSmallSim);
  const std::string base = "simulate --config " + cfgp.string() + " --out ";
  CHECK(run_cli(base + (dir / "a").string()).code == 0);
  CHECK(run_cli(base + (dir / "b").string()).code == 0);
  CHECK(slurp(dir / "a" / "trajectory.csv") == slurp(dir / "b" / "trajectory.csv"));
  CHECK(slurp(dir / "a" / "simulate.json") == slurp(dir / "b" / "simulate.json"));

  CHECK(run_cli(base + (dir / "c").string() + " --seed 99").code == 0);
  CHECK(slurp(dir / "a" / "trajectory.csv") != slurp(dir / "c" / "trajectory.csv"));
  const RunConfig seeded = parse_config_text(slurp(dir / "c" / "config.txt"));
  CHECK(seeded.seed == 99);
}

TEST_CASE("sweep: worker count never changes the merged CSV") {
  const fs::path dir = scratch_dir("sweep");
  const fs::path cfgp = write_config(
      dir,
      "[grid]\nN = 8\nL = 8\n[experiment]\nv = 0.2 0 0\nT = 0.5\nseed = 3\n"
      "sweep_parameter = eps\nsweep_values = 1e-3 2e-3 5e-3\nresolutions = 8\n");
  const std::string base = "sweep --config " + cfgp.string() + " --out ";
  CHECK(run_cli(base + (dir / "w1").string() + " --workers 1").code == 0);
  CHECK(run_cli(base + (dir / "w3").string() + " --workers 3").code == 0);
  CHECK(slurp(dir / "w1" / "sweep.csv") == slurp(dir / "w3" / "sweep.csv"));
  const json rep = json::parse(slurp(dir / "w1" / "sweep.json"));
  CHECK(rep["parameter"] == "eps");
  CHECK(rep["rows"] == 3);
}

TEST_CASE("exit code 2: config errors, before and after dispatch") {
  const fs::path dir = scratch_dir("config_errors");

  // file-level parse error: no run directory is created at all
  const fs::path bad = write_config(dir, "v = 1.5 0 0\n");
  const CliResult r1 =
      run_cli("soliton --config " + bad.string() + " --out " + (dir / "out1").string());
  CHECK(r1.code == 2);
  CHECK(r1.output.find("superluminal") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out1" / "manifest.json"));

  const fs::path unknown = write_config(dir, "radius = 1\nbogus = 3\n");
  const CliResult r2 =
      run_cli("soliton --config " + unknown.string() + " --out " + (dir / "out2").string());
  CHECK(r2.code == 2);
  CHECK(r2.output.find("config line 2") != std::string::npos);

  // dispatch-level rejection (linearize demands v = 0): manifest records it
  const fs::path moving = write_config(dir, kSmallSim);
  const CliResult r3 =
      run_cli("linearize --config " + moving.string() + " --out " + (dir / "out3").string());
  CHECK(r3.code == 2);
  const json manifest = json::parse(slurp(dir / "out3" / "manifest.json"));
  CHECK(manifest["status"] == "error");
  CHECK(manifest["error"].get<std::string>().find("linearize") != std::string::npos);

  // CLI-level misuse
  CHECK(run_cli("").code == 2);         // missing subcommand
  CHECK(run_cli("frobnicate").code == 2);
  CHECK(run_cli("soliton --no-such-flag").code == 2);
}

TEST_CASE("exit code 3: numerical failure is captured in the manifest") {
  const fs::path dir = scratch_dir("blowup");
  const fs::path cfgp = write_config(
      dir, "[grid]\nN = 8\nL = 8\n[experiment]\nv = 0.2 0 0\neps = 1000\nT = 2\nseed = 1\n"
           "resolutions = 8\n");
  const CliResult r =
      run_cli("simulate --config " + cfgp.string() + " --out " + (dir / "out").string());
  INFO(r.output);
  CHECK(r.code == 3);
  CHECK(r.output.find("numerical failure") != std::string::npos);
  const json manifest = json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(manifest["status"] == "error");
  CHECK_FALSE(manifest["error"].get<std::string>().empty());
}

TEST_CASE("output directory resolution: MLSL_OUT_DIR fallback") {
  const fs::path dir = scratch_dir("envdir");
  const fs::path cfgp = write_config(
      dir, "[grid]\nN = 8\nL = 8\n[experiment]\nv = 0.2 0 0\nresolutions = 8\n");
  const fs::path envout = dir / "from_env";
  const CliResult r = run_cli("soliton --config " + cfgp.string(),
                              "MLSL_OUT_DIR=" + envout.string() + " ");
  INFO(r.output);
  CHECK(r.code == 0);
  CHECK(fs::exists(envout / "manifest.json"));
  CHECK(fs::exists(envout / "soliton.json"));
}
