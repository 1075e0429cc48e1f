// Command-line driver: forward runs, adjoints, gradient checks, optimization
// and the sharp-interface experiments.

#include "lensopt/adjoint.hpp"
#include "lensopt/gamma.hpp"
#include "lensopt/gradient.hpp"
#include "lensopt/io.hpp"
#include "lensopt/optimizer.hpp"
#include "lensopt/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

namespace fs = std::filesystem;
using namespace lensopt;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Flags {
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
  int resolution_scale = 1;
  int jobs = 1;
  std::string phi;  // optional phase-field snapshot
};

struct Run {
  Scenario sc;
  fs::path out;
  json manifest;
};

Run open_run(const Flags& f, const std::string& command, bool config_required = true) {
  Run run;
  if (!f.config.empty()) {
    run.sc = load_scenario(f.config);
  } else if (config_required) {
    throw ConfigError("--config is required for " + command);
  }
  if (f.resolution_scale != 1) run.sc = refined(run.sc, f.resolution_scale);
  if (f.jobs < 1) throw ConfigError("--jobs must be >= 1");
  run.out = f.out.empty() ? fs::path(run.sc.output.directory) : fs::path(f.out);
  fs::create_directories(run.out);

  const Scenario& sc = run.sc;
  run.manifest = {
      {"program", "lensopt"},
      {"version", kVersion},
      {"command", command},
      {"config_hash", fnv1a_hex(scenario_json(sc))},
      {"seed", f.seed},
      {"resolution_scale", f.resolution_scale},
      {"grid", {{"nx", sc.nx}, {"ny", sc.ny}, {"lx", sc.lx}, {"ly", sc.ly}}},
      {"time", {{"final_time", sc.final_time}, {"time_step", sc.time_step}, {"steps", sc.steps()}}},
      {"tolerances",
       {{"picard_tol", sc.solver.picard_tol},
        {"picard_max", sc.solver.picard_max},
        {"cg_tolerance", sc.solver.linear.tolerance},
        {"stationarity_tol", sc.optimizer.stationarity_tol},
        {"armijo", sc.optimizer.armijo},
        {"max_backtracks", sc.optimizer.max_backtracks},
        {"profile_settle", 1e-13},
        {"smoothing_cg", 1e-13}}},
      {"outputs", json::array()}};
  std::ofstream cfg(run.out / "config.json");
  cfg << scenario_json(sc) << '\n';
  return run;
}

void record(Run& run, const fs::path& file) {
  run.manifest["outputs"].push_back(fs::relative(file, run.out).generic_string());
}

void finish(Run& run) {
  std::ofstream out(run.out / "manifest.json");
  out << run.manifest.dump(2) << '\n';
  if (!out) throw IoError("cannot write manifest in " + run.out.string());
}

Vector load_phase(const Flags& f, const Run& run, const Grid& grid) {
  if (f.phi.empty()) return rasterize(grid, run.sc.initial_phase);
  FieldFile file = read_field(f.phi);
  if (file.nx != grid.nx() || file.ny != grid.ny()) throw ConfigError("--phi: grid mismatch");
  if (!is_feasible(file.values)) throw ConfigError("--phi: values outside [0, 1]");
  return file.values;
}

/// Runs body(i) for i in [0, count) on up to `jobs` threads.
template <typename Body>
void parallel_for(int count, int jobs, Body body) {
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_lock;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(error_lock);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::min(jobs, count); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

int cmd_solve(const Flags& f) {
  Run run = open_run(f, "solve");
  Problem pb = build_problem(run.sc);
  const Vector phi = load_phase(f, run, pb.grid);
  auto [state, report] =
      solve_state(pb.grid, phi, pb.medium, pb.alpha, pb.source, pb.time, pb.solver);

  for (const auto& p : write_trajectory(run.out, pb.grid, "u", state.u, run.sc.output.snapshot_stride)) {
    record(run, p);
  }
  write_field(run.out / "phi.vtk", pb.grid, "phi", phi);
  record(run, run.out / "phi.vtk");

  const auto residual = energy_identity_residual(pb.grid, state, interpolate_coefficients(phi, pb.medium),
                                                 pb.alpha, pb.source, Reaction::quadratic());
  Table energy{{"step", "time", "residual"}, {}};
  Scalar worst = 0;
  for (std::size_t n = 0; n < residual.size(); ++n) {
    energy.rows.push_back({Scalar(n + 1), pb.time.time(int(n) + 1), residual[n]});
    worst = std::max(worst, std::abs(residual[n]));
  }
  write_table(run.out / "energy_identity.csv", energy);
  record(run, run.out / "energy_identity.csv");

  Table picard{{"sweep", "update", "ratio"}, {}};
  for (std::size_t m = 0; m < report.updates.size(); ++m) {
    const Scalar ratio = m == 0 ? std::nan("") : report.ratios[m - 1];
    picard.rows.push_back({Scalar(m + 1), report.updates[m], ratio});
  }
  write_table(run.out / "picard.csv", picard);
  record(run, run.out / "picard.csv");

  run.manifest["picard_sweeps"] = report.sweeps;
  run.manifest["energy_residual_max"] = worst;
  run.manifest["tracking"] = tracking_term(pb, state);
  finish(run);
  std::printf("solve: %d Picard sweeps, max energy residual %.3e, tracking %.6e\n", report.sweeps,
              worst, tracking_term(pb, state));
  return 0;
}

int cmd_adjoint(const Flags& f) {
  Run run = open_run(f, "adjoint");
  Problem pb = build_problem(run.sc);
  const Vector phi = load_phase(f, run, pb.grid);
  const Evaluation ev = evaluate(pb, phi);
  const AdjointTrajectory adj = solve_problem_adjoint(pb, phi, ev.state);
  for (const auto& p : write_trajectory(run.out, pb.grid, "p", adj.p, run.sc.output.snapshot_stride)) {
    record(run, p);
  }
  const GradientField g = reduced_gradient(pb, phi, ev.state, adj);
  write_field(run.out / "gradient.vtk", pb.grid, "gradient", g.total);
  record(run, run.out / "gradient.vtk");
  run.manifest["tracking"] = ev.objective.tracking;
  finish(run);
  std::printf("adjoint: max |p| %.6e\n", adj.p.cwiseAbs().maxCoeff());
  return 0;
}

/// Smooth random direction that vanishes where phi touches the box.
Vector probe_direction(const Grid& grid, const Vector& phi, std::uint64_t seed, int probe) {
  std::mt19937_64 rng(seed * 1000003ull + static_cast<std::uint64_t>(probe));
  std::uniform_real_distribution<Scalar> unit(0.0, 1.0);
  Vector h = Vector::Zero(grid.node_count());
  for (int b = 0; b < 3; ++b) {
    const Scalar cx = grid.lx() * (0.2 + 0.6 * unit(rng));
    const Scalar cy = grid.ly() * (0.2 + 0.6 * unit(rng));
    const Scalar sign = unit(rng) < 0.5 ? -1.0 : 1.0;
    const Scalar width = 0.15 * std::min(grid.lx(), grid.ly());
    h += grid.interpolate([&](Scalar x, Scalar y) {
      const Scalar r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      return sign * std::exp(-r2 / (width * width));
    });
  }
  return h.cwiseProduct((4 * phi.array() * (1 - phi.array())).matrix());
}

int cmd_grad_check(const Flags& f) {
  Run run = open_run(f, "grad-check");
  Problem pb = build_problem(run.sc);
  const Vector phi = load_phase(f, run, pb.grid);
  Evaluation ev;
  const GradientField g = compute_gradient(pb, phi, &ev);

  const int probes = run.sc.grad_check.probes;
  std::vector<std::array<Scalar, 3>> values(probes);
  parallel_for(probes, f.jobs, [&](int i) {
    const Vector h = probe_direction(pb.grid, phi, f.seed, i);
    if (h.cwiseAbs().maxCoeff() == 0) {
      throw ConfigError("grad-check needs a phase field with interior values");
    }
    const WaveTrajectory sens = solve_sensitivity(pb, phi, h, ev.state);
    const Scalar gl_part = g.gl.dot(h);
    values[i] = {g.total.dot(h), tracking_derivative(pb, ev.state, sens) + gl_part,
                 fd_plateau(pb, phi, h, run.sc.grad_check.deltas).plateau};
  });

  auto rel = [](Scalar a, Scalar b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); };
  Table t{{"probe", "adjoint", "sensitivity", "finite_difference", "gap_adjoint_sensitivity",
           "gap_adjoint_fd", "gap_sensitivity_fd"},
          {}};
  Scalar worst = 0;
  for (int i = 0; i < probes; ++i) {
    const auto& v = values[i];
    const Scalar g1 = rel(v[0], v[1]), g2 = rel(v[0], v[2]), g3 = rel(v[1], v[2]);
    worst = std::max({worst, g1, g2, g3});
    t.rows.push_back({Scalar(i), v[0], v[1], v[2], g1, g2, g3});
    std::printf("probe %d: adjoint %.10e  sensitivity %.10e  fd %.10e\n", i, v[0], v[1], v[2]);
  }
  write_table(run.out / "grad_check.csv", t);
  record(run, run.out / "grad_check.csv");
  run.manifest["max_relative_gap"] = worst;
  finish(run);
  std::printf("grad-check: max pairwise relative gap %.3e\n", worst);
  return 0;
}

int cmd_optimize(const Flags& f) {
  Run run = open_run(f, "optimize");
  Problem pb = build_problem(run.sc);
  const Vector phi0 = load_phase(f, run, pb.grid);
  const OptimizeResult res = optimize(phi0, pb, run.sc.optimizer);

  Table hist{{"iteration", "tracking", "gl", "total", "stationarity", "step", "picard_sweeps"}, {}};
  for (const auto& r : res.history) {
    hist.rows.push_back({Scalar(r.iteration), r.objective.tracking, r.objective.gl, r.objective.total,
                         r.stationarity, r.step, Scalar(r.picard_sweeps)});
  }
  write_table(run.out / "history.csv", hist);
  write_field(run.out / "phi_final.vtk", pb.grid, "phi", res.phi);
  write_field(run.out / "phi_threshold.vtk", pb.grid, "phi", threshold(res.phi));
  for (const char* name : {"history.csv", "phi_final.vtk", "phi_threshold.vtk"}) record(run, run.out / name);
  run.manifest["status"] = to_string(res.status);
  run.manifest["iterations"] = res.history.back().iteration;
  run.manifest["first_stationarity"] = res.first_stationarity;
  run.manifest["final_stationarity"] = res.final_stationarity;
  finish(run);
  std::printf("optimize: %s after %d iterations, objective %.6e -> %.6e\n", to_string(res.status).c_str(),
              res.history.back().iteration, res.history.front().objective.total,
              res.history.back().objective.total);
  return 0;
}

int cmd_gamma_sweep(const Flags& f) {
  Run run = open_run(f, "gamma-sweep");
  Problem pb = build_problem(run.sc);
  const Vector phi0 = load_phase(f, run, pb.grid);
  const auto& eps = run.sc.sweep.eps;
  std::vector<SweepRow> rows;
  if (run.sc.sweep.warm_start || f.jobs == 1) {
    rows = eps_sweep(pb, phi0, eps, run.sc.optimizer, run.sc.sweep.warm_start);
  } else {
    rows.resize(eps.size());
    parallel_for(int(eps.size()), f.jobs, [&](int i) {
      rows[i] = eps_sweep(pb, phi0, {eps[i]}, run.sc.optimizer, false).front();
    });
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].phi.size() && rows[i - 1].phi.size()) {
        rows[i].l1_to_previous = l1_distance(pb.grid, rows[i].phi, rows[i - 1].phi);
      }
    }
  }
  Table t{{"eps", "j_eps", "gl_energy", "sharp_energy", "j0", "relative_gap", "l1_to_previous", "ok"}, {}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SweepRow& r = rows[i];
    const bool ok = r.phi.size() != 0;
    const Scalar gap = ok && r.sharp_energy > 0 ? std::abs(r.gl_energy - r.sharp_energy) / r.sharp_energy
                                                 : std::nan("");
    t.rows.push_back({r.eps, r.j_eps, r.gl_energy, r.sharp_energy, r.j0, gap, r.l1_to_previous, ok ? 1.0 : 0.0});
    run.manifest["sweep_status"].push_back(r.status);
    if (ok) {
      const std::string name = "phi_eps_" + std::to_string(i) + ".vtk";
      write_field(run.out / name, pb.grid, "phi", r.phi);
      record(run, run.out / name);
    }
    std::printf("eps %.4g: %s, E %.6e, C0 P %.6e\n", r.eps, r.status.c_str(), r.gl_energy, r.sharp_energy);
  }
  write_table(run.out / "gamma_sweep.csv", t);
  record(run, run.out / "gamma_sweep.csv");
  finish(run);
  return 0;
}

int cmd_profile(const Flags& f) {
  Run run = open_run(f, "profile", false);
  const ProfileSpec& spec = run.sc.profile;
  Table t{{"eps", "nodes", "energy", "relative_error", "sweeps"}, {}};
  for (Scalar eps : spec.eps) {
    const ProfileResult r = optimal_profile(eps, spec.nodes, spec.length);
    const Scalar err = std::abs(r.energy - kProfileConstant) / kProfileConstant;
    t.rows.push_back({eps, Scalar(spec.nodes), r.energy, err, Scalar(r.sweeps)});
    std::printf("eps %.4g: energy %.8f (pi/8 = %.8f, relative error %.2e)\n", eps, r.energy,
                kProfileConstant, err);
  }
  write_table(run.out / "profile.csv", t);
  record(run, run.out / "profile.csv");
  finish(run);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-field acoustic lens optimization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Flags flags;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", flags.config, "Scenario file (JSON)");
    if (config_required) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "Output directory (default: output.directory)");
    sub->add_option("--seed", flags.seed, "Seed for randomized checks");
    sub->add_option("--resolution-scale", flags.resolution_scale, "Uniform refinement factor")
        ->check(CLI::PositiveNumber);
    sub->add_option("--jobs", flags.jobs, "Worker threads for independent probes or cold-start sweeps")
        ->check(CLI::PositiveNumber);
  };

  struct Entry {
    const char* name;
    const char* help;
    int (*fn)(const Flags&);
    bool needs_config;
    bool takes_phi;
  };
  const Entry entries[] = {
      {"solve", "Forward run with energy-identity diagnostics", cmd_solve, true, true},
      {"adjoint", "Adjoint state and gradient at a phase field", cmd_adjoint, true, true},
      {"grad-check", "Adjoint vs sensitivity vs finite-difference gradients", cmd_grad_check, true, true},
      {"optimize", "Projected-gradient optimization", cmd_optimize, true, true},
      {"gamma-sweep", "Interface-width sweep against the sharp objective", cmd_gamma_sweep, true, true},
      {"profile", "1D optimal transition profile energy", cmd_profile, false, false},
  };
  std::vector<std::pair<CLI::App*, const Entry*>> subs;
  for (const Entry& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_common(sub, e.needs_config);
    if (e.takes_phi) sub->add_option("--phi", flags.phi, "Phase field snapshot (.vtk) to use instead of initial_phase")
                         ->check(CLI::ExistingFile);
    subs.emplace_back(sub, &e);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const auto& [sub, entry] : subs) {
      if (sub->parsed()) return entry->fn(flags);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 2;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "solver divergence: %s\n", e.what());
    return 3;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver divergence: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
