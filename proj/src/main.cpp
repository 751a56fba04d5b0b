// Command-line front end: parses a config, dispatches one experiment, and
// writes CSV/JSON artifacts plus a checksummed manifest (always written last).
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mls/charge_profile.hpp"
#include "mls/config.hpp"
#include "mls/grid.hpp"
#include "mls/io.hpp"
#include "mls/linearized.hpp"
#include "mls/reduced_dynamics.hpp"
#include "mls/soliton.hpp"
#include "mls/spectral_analysis.hpp"
#include "mls/spectral_ops.hpp"
#include "mls/vec3.hpp"

namespace {

using nlohmann::json;
using namespace mls;

struct CliArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
  bool emit_fields = false;
};

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

std::filesystem::path resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("MLSL_OUT_DIR"); env && *env) return env;
  return "mls-out";
}

// Index-ordered fan-out: results land in caller-owned slots, so the merge is
// deterministic no matter how the pool schedules the work.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&] {
    std::size_t i;
    while ((i = next.fetch_add(1)) < count) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// --- subcommands -----------------------------------------------------------

void run_soliton(const RunConfig& cfg, const CliArgs& args, io::ArtifactWriter& out) {
  ChargeProfile profile(cfg.radius, cfg.amplitude);
  json stationarity = json::array();
  double prev = 0.0;
  bool monotone = true;
  bool first = true;
  for (int n : cfg.resolutions) {
    Grid g(n, cfg.L);
    const Soliton s = build_soliton(g, profile, cfg.v, cfg.omega, cfg.m, cfg.I);
    ProfileTables tables(g, profile);
    const double r = stationarity_residual(g, tables, s, cfg.m, cfg.I);
    stationarity.push_back({{"N", n}, {"L", cfg.L}, {"residual", r}});
    if (!first && !(r <= prev || r <= 1e-12)) monotone = false;
    prev = r;
    first = false;
  }

  Grid g(cfg.N, cfg.L);
  const Soliton s = build_soliton(g, profile, cfg.v, cfg.omega, cfg.m, cfg.I);
  ProfileTables tables(g, profile);
  json rep;
  rep["v"] = vec_json(cfg.v);
  rep["omega"] = vec_json(cfg.omega);
  rep["orientation_class"] = sigma_class_name(s.params.cls);
  rep["m"] = cfg.m;
  rep["I"] = cfg.I;
  rep["I_eff"] = s.I_eff;
  rep["I_eff_exceeds_I"] = s.I_eff > cfg.I;
  rep["P"] = vec_json(s.P);
  rep["pi"] = vec_json(s.pi);
  rep["energy"] = s.energy;
  rep["residual"] = stationarity_residual(g, tables, s, cfg.m, cfg.I);
  rep["stationarity"] = stationarity;
  rep["residual_monotone"] = monotone;
  out.write_json("soliton.json", rep);
  if (args.emit_fields) {
    out.write_snapshot("soliton_A.mlsf", g, s.A);
    out.write_snapshot("soliton_Pi.mlsf", g, s.Pi);
  }
}

void run_inertia(const RunConfig& cfg, const CliArgs&, io::ArtifactWriter& out) {
  ChargeProfile profile(cfg.radius, cfg.amplitude);
  const double c_rho = profile.radial_inertia_constant();
  const double limit = (4.0 * M_PI / 3.0) * c_rho;
  std::vector<std::vector<double>> rows;
  double gap_par = 0.0, gap_perp = 0.0;
  for (double speed : cfg.sweep_values) {
    const auto [a1q, a2q] = alphas_quadrature(profile, speed);
    double a1c = limit, a2c = limit;
    try {
      const auto [c1, c2] = closed_form_alphas(c_rho, speed);
      a1c = c1;
      a2c = c2;
    } catch (const UseLimitError&) {
    }
    const double par_q = 2.0 * a2q, par_c = 2.0 * a2c;
    const double perp_q = a1q + a2q, perp_c = a1c + a2c;
    rows.push_back({speed, a1q, a2q, par_q, par_c, perp_q, perp_c});
    gap_par = std::max(gap_par, std::abs(par_q - par_c) / std::abs(par_c));
    gap_perp = std::max(gap_perp, std::abs(perp_q - perp_c) / std::abs(perp_c));
  }
  out.write_text("inertia.csv",
                 io::csv_table({"v", "alpha1", "alpha2", "delta_I_par_quadrature",
                                "delta_I_par_closed", "delta_I_perp_quadrature",
                                "delta_I_perp_closed"},
                               rows));
  json rep;
  rep["c_rho"] = c_rho;
  rep["delta_I_limit_v0"] = 2.0 * limit;
  rep["max_rel_gap_par"] = gap_par;
  rep["max_rel_gap_perp"] = gap_perp;
  rep["series_alpha_difference_at_half"] = alpha_difference_series(c_rho, 0.5);
  if (norm(cfg.omega) > 0.0) {
    const PiMismatch mm = pi_mismatch(profile, cfg.v, cfg.omega, cfg.I);
    json j;
    j["pi"] = vec_json(mm.pi);
    j["q"] = vec_json(mm.q);
    j["parallel"] = mm.parallel;
    const double den = norm(mm.pi) * norm(cfg.omega);
    j["misalignment_ratio"] = den > 0.0 ? norm(cross(mm.pi, cfg.omega)) / den : 0.0;
    rep["pi_mismatch"] = j;
  }
  out.write_json("inertia.json", rep);
}

std::vector<std::vector<double>> trajectory_rows(const TrajectoryRecord& rec) {
  std::vector<std::vector<double>> rows;
  rows.reserve(rec.samples.size());
  for (const auto& s : rec.samples) rows.push_back({s.t, s.H, s.casimir, s.J, s.v, s.omega, s.d});
  return rows;
}

void run_simulate(const RunConfig& cfg, const CliArgs& args, io::ArtifactWriter& out) {
  ChargeProfile profile(cfg.radius, cfg.amplitude);
  Grid g(cfg.N, cfg.L);
  const OrbitalReport rep = orbital_stability_experiment(
      g, profile, cfg.v, cfg.eps, cfg.T, cfg.seed, cfg.m, cfg.I, 2.0, cfg.record_every, cfg.dt);
  out.write_text("trajectory.csv",
                 io::csv_table({"t", "H", "C", "J", "v", "omega", "d"},
                               trajectory_rows(rep.record)));
  json j;
  j["eps"] = rep.eps;
  j["seed"] = cfg.seed;
  j["P"] = vec_json(rep.P);
  j["v_star"] = vec_json(rep.v_star);
  j["sup_d"] = rep.sup_distance;
  j["ratio"] = rep.ratio;
  j["H_drift"] = rep.H_drift;
  j["casimir_drift"] = rep.record.casimir_drift;
  j["energy_gap_min"] = rep.energy_gap_min;
  j["energy_gap_max"] = rep.energy_gap_max;
  out.write_json("simulate.json", j);
  if (args.emit_fields) {
    out.write_snapshot("final_A.mlsf", g, rep.record.final_state.A);
    out.write_snapshot("final_Pi.mlsf", g, rep.record.final_state.Pi);
  }
}

void run_linearize(const RunConfig& cfg, const CliArgs& args, io::ArtifactWriter& out) {
  if (norm(cfg.v) > 0.0)
    throw ConfigValidationError("invalid config: linearize requires v = 0 (rotating soliton)");
  ChargeProfile profile(cfg.radius, cfg.amplitude);
  Grid g(cfg.N, cfg.L);
  const Soliton s = build_soliton(g, profile, Vec3{}, cfg.omega, cfg.m, cfg.I);
  TangentFrame frame(g, profile, s, cfg.m, cfg.I);
  const double eps = cfg.eps > 0.0 ? cfg.eps : 1.0;
  TangentVector xi0 = project_tangent(frame, random_perturbation(g, cfg.seed, eps));
  const double dt = cfg.dt > 0.0 ? cfg.dt : std::min(0.02, 0.5 * g.h());
  const LinearRecord rec = integrate_linear(frame, std::move(xi0), cfg.T, dt, cfg.record_every);
  std::vector<std::vector<double>> rows;
  rows.reserve(rec.samples.size());
  for (const auto& r : rec.samples) rows.push_back({r.t, r.L, r.znorm, r.defect});
  out.write_text("linearize.csv", io::csv_table({"t", "L_omega", "znorm", "defect"}, rows));
  json j;
  j["omega"] = vec_json(cfg.omega);
  j["seed"] = cfg.seed;
  j["dt"] = dt;
  j["C_measured"] = rec.sup_norm_ratio;
  j["L_drift"] = rec.L_drift;
  j["H_quad_drift"] = rec.H_quad_drift;
  j["gamma2_drift"] = rec.gamma2_drift;
  j["max_defect"] = rec.max_defect;
  j["I_eff_lattice"] = frame.I_eff_lattice();
  j["nu_eff"] = frame.nu_eff();
  out.write_json("linearize.json", j);
  if (args.emit_fields) {
    out.write_snapshot("final_alpha.mlsf", g, rec.final_state.A);
    out.write_snapshot("final_beta.mlsf", g, rec.final_state.Pi);
  }
}

json report_json(const SpectralReport& r) {
  json j;
  j["N"] = r.N;
  j["L"] = r.L;
  j["K"] = r.K;
  j["eigenvalues"] = r.eigenvalues;
  j["top_eigenvalue"] = r.top_eigenvalue;
  j["kernel_dim"] = r.kernel_dim;
  j["gap"] = r.gap;
  j["kappa"] = r.kappa;
  j["min_kernel_alignment"] = r.min_kernel_alignment;
  j["delta_I"] = r.delta_I;
  j["nu_eff"] = r.nu_eff;
  j["delta"] = r.delta;
  return j;
}

void run_coercivity(const RunConfig& cfg, const CliArgs&, io::ArtifactWriter& out) {
  // Dense symmetric eigensolves: cap the basis dimension so a misconfigured
  // resolution cannot ask for a hundred-gigabyte matrix.
  constexpr std::size_t kDimCap = 12000;
  ChargeProfile profile(cfg.radius, cfg.amplitude);
  const Vec3 omega = norm(cfg.omega) > 0.0 ? cfg.omega : Vec3{0.0, 0.0, 1.0};
  json reports = json::array();
  json skipped = json::array();
  std::vector<SpectralReport> done;
  for (int n : cfg.resolutions) {
    // fixed grid spacing: the box grows with N, refining the low-k lattice
    const double Ln = cfg.L * n / static_cast<double>(cfg.N);
    const OperatorBasis basis = make_basis(profile, n, Ln, cfg.K);
    if (basis.M() == 0 || basis.dim_B() > kDimCap) {
      skipped.push_back({{"N", n},
                         {"L", Ln},
                         {"dim", basis.dim_B()},
                         {"reason", basis.M() == 0 ? "no modes under the cutoff"
                                                   : "dense-solver budget exceeded"}});
      continue;
    }
    done.push_back(spectral_stability_report(profile, omega, cfg.I, n, Ln, cfg.K));
    reports.push_back(report_json(done.back()));
  }
  if (done.empty())
    throw ConfigValidationError(
        "invalid config: no coercivity resolution fits the dense-solver budget (basis dim <= " +
        std::to_string(kDimCap) + ")");
  const SpectralReport& fin = done.back();
  json j = report_json(fin);
  j["omega"] = vec_json(omega);
  j["resolutions"] = reports;
  if (!skipped.empty()) j["skipped"] = skipped;
  if (done.size() >= 2) {
    const double a = done[done.size() - 2].kappa, b = fin.kappa;
    j["kappa_drift"] = std::abs(a - b) / std::max(std::abs(a), std::abs(b));
  }
  out.write_json("coercivity.json", j);
}

void run_sweep(const RunConfig& cfg, const CliArgs& args, io::ArtifactWriter& out) {
  ChargeProfile profile(cfg.radius, cfg.amplitude);
  const std::vector<double>& values = cfg.sweep_values;
  std::vector<std::vector<double>> rows(values.size());
  std::vector<std::string> header;
  json j;
  j["parameter"] = cfg.sweep_parameter;
  j["values"] = values;

  if (cfg.sweep_parameter == "v") {
    header = {"v", "m_eff", "delta_I_par", "delta_I_perp", "I_eff_par", "I_eff_perp"};
    Grid g(cfg.N, cfg.L);  // shared: lattice reductions only, no transforms
    const double wmag = norm(cfg.omega);
    parallel_for(values.size(), args.workers, [&](std::size_t i) {
      const double s = values[i];
      const double me = effective_mass(g, profile, s, wmag, cfg.m);
      const auto [a1, a2] = alphas_quadrature(profile, s);
      rows[i] = {s, me, 2.0 * a2, a1 + a2, cfg.I + 2.0 * a2, cfg.I + a1 + a2};
    });
    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (values[i] > values[i - 1] && rows[i][1] <= rows[i - 1][1]) monotone = false;
    j["monotone_m_eff"] = monotone;
  } else if (cfg.sweep_parameter == "omega") {
    header = {"omega", "pi_norm", "misalignment_ratio", "parallel"};
    const Vec3 dir = norm(cfg.omega) > 0.0 ? cfg.omega / norm(cfg.omega) : Vec3{0.0, 0.0, 1.0};
    parallel_for(values.size(), args.workers, [&](std::size_t i) {
      const Vec3 w = values[i] * dir;
      const PiMismatch mm = pi_mismatch(profile, cfg.v, w, cfg.I);
      const double den = norm(mm.pi) * norm(w);
      rows[i] = {values[i], norm(mm.pi), den > 0.0 ? norm(cross(mm.pi, w)) / den : 0.0,
                 mm.parallel ? 1.0 : 0.0};
    });
  } else {  // eps
    header = {"eps", "sup_d", "ratio", "H_drift"};
    parallel_for(values.size(), args.workers, [&](std::size_t i) {
      Grid g(cfg.N, cfg.L);  // transforms share scratch: one grid per task
      const OrbitalReport rep = orbital_stability_experiment(
          g, profile, cfg.v, values[i], cfg.T, cfg.seed, cfg.m, cfg.I, 2.0, cfg.record_every,
          cfg.dt);
      rows[i] = {values[i], rep.sup_distance, rep.ratio, rep.H_drift};
    });
  }

  out.write_text("sweep.csv", io::csv_table(header, rows));
  j["rows"] = rows.size();
  out.write_json("sweep.json", j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral toolkit for the reduced Maxwell-Lorentz system with a spinning "
               "extended charge"};
  app.require_subcommand(1);
  CliArgs args;
  app.add_option("--config", args.config_path, "Path to a key = value config file");
  app.add_option("--out", args.out_dir, "Output directory ($MLSL_OUT_DIR, then ./mls-out)");
  auto* seed_opt = app.add_option("--seed", args.seed, "Override the config seed");
  app.add_option("--workers", args.workers, "Worker threads for sweep (0 = hardware)");
  app.add_flag("--emit-fields", args.emit_fields, "Also write binary spectral snapshots");

  const std::pair<const char*, const char*> subs[] = {
      {"soliton", "Build a travelling-spinning wave and report its invariants"},
      {"inertia", "Effective-inertia quadratures vs closed forms over a speed grid"},
      {"simulate", "Perturbed nonlinear run with orbital-distance tracking"},
      {"linearize", "Linearized flow at a rotating soliton (v = 0)"},
      {"coercivity", "Spectral report: eigenvalues, kernel, coercivity constant"},
      {"sweep", "Fan a parameter grid (v, omega, or eps) over a worker pool"},
  };
  for (const auto& [name, desc] : subs) app.add_subcommand(name, desc)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  args.seed_set = seed_opt->count() > 0;
  const std::string cmd = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  try {
    if (!args.config_path.empty())
      cfg = parse_config(args.config_path);
    else
      validate_config(cfg);
    if (args.seed_set) cfg.seed = args.seed;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  const std::string canonical = emit_canonical(cfg);
  const std::string hash = "crc32:" + io::crc32_hex(canonical);
  io::ArtifactWriter writer(resolve_out_dir(args.out_dir));
  writer.write_text("config.txt", canonical);
  try {
    if (cmd == "soliton") run_soliton(cfg, args, writer);
    else if (cmd == "inertia") run_inertia(cfg, args, writer);
    else if (cmd == "simulate") run_simulate(cfg, args, writer);
    else if (cmd == "linearize") run_linearize(cfg, args, writer);
    else if (cmd == "coercivity") run_coercivity(cfg, args, writer);
    else run_sweep(cfg, args, writer);
    writer.finalize(hash, "ok");
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    writer.finalize(hash, "error", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    writer.finalize(hash, "error", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    writer.finalize(hash, "error", e.what());
    return 3;
  }
}
