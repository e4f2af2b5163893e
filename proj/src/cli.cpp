#include "clothtrack/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "clothtrack/bench.hpp"
#include "clothtrack/config.hpp"
#include "clothtrack/evaluate.hpp"
#include "clothtrack/io.hpp"

#ifndef CLOTHTRACK_VERSION
#define CLOTHTRACK_VERSION "dev"
#endif

namespace clothtrack {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_file;
  std::vector<std::string> overrides;
};

Settings load_settings(const Common& c, const std::string& base_text = {}) {
  Settings s;
  if (!base_text.empty()) apply_config(s, parse_flat_config(base_text));
  if (!c.config_file.empty()) apply_config(s, parse_flat_config(io::read_text(c.config_file)));
  for (const std::string& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects KEY=VALUE, got '" + kv + "'");
    apply_setting(s, kv.substr(0, eq), kv.substr(eq + 1));
  }
  s.validate();
  return s;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_file, "flat key = value configuration file");
  cmd->add_option("--set", c.overrides, "override one config key (KEY=VALUE), repeatable");
}

json params_json(const SimParams& p) {
  return {{"stiffness", p.stiffness},
          {"dynamic_friction", p.dynamic_friction},
          {"particle_friction", p.particle_friction}};
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return kExitIo;
    case ErrorKind::kConfig: return kExitConfig;
    default: return kExitRuntime;
  }
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message,
                 int code) {
  err << json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump()
      << '\n';
}

// ---- gen ----------------------------------------------------------------

struct GenArgs {
  Common common;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> trajectories;
  std::optional<int> segments;
  std::optional<std::string> policy;
};

int run_gen(const GenArgs& a, std::ostream& out) {
  Settings s = load_settings(a.common);
  if (a.seed) s.scenario.rng_seed = *a.seed;
  if (a.trajectories) s.scenario.num_trajectories = *a.trajectories;
  if (a.segments) s.scenario.segments_per_trajectory = *a.segments;
  if (a.policy) s.scenario.policy = pick_policy_from_string(*a.policy);
  s.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto trajectories = generate_synthetic_trajectories(s.scenario);
  io::write_trajectory_dir(a.out, trajectories);
  io::write_text(fs::path(a.out) / "config.cfg", format_config(s));
  out << json{{"command", "gen"},
              {"out", a.out},
              {"trajectories", trajectories.size()},
              {"segments_per_trajectory", s.scenario.segments_per_trajectory},
              {"wall_time_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                  .count()}}
             .dump()
      << '\n';
  return kExitOk;
}

// Settings stored next to generated trajectories, if any.
std::string data_config_text(const std::string& data_dir) {
  const fs::path p = fs::path(data_dir) / "config.cfg";
  return fs::is_regular_file(p) ? io::read_text(p) : std::string();
}

// ---- calibrate ----------------------------------------------------------

struct CalibrateArgs {
  Common common;
  std::string data;
  std::optional<int> trajectory;
  int segment = 0;
  bool grid_125 = false;
  std::string out;
};

int run_calibrate(const CalibrateArgs& a, std::ostream& out) {
  Settings s = load_settings(a.common, data_config_text(a.data));
  if (a.grid_125) s.tracker.grid = CalibrationGrid::grid_125();
  const auto trajectories = io::read_trajectory_dir(a.data);
  const Trajectory* traj = &trajectories.front();
  if (a.trajectory) {
    const auto it = std::find_if(trajectories.begin(), trajectories.end(),
                                 [&](const Trajectory& t) { return t.id == *a.trajectory; });
    if (it == trajectories.end())
      throw Error(ErrorKind::kInvalidArgument, "no trajectory with id " + std::to_string(*a.trajectory));
    traj = &*it;
  }
  if (a.segment < 0 || a.segment >= static_cast<int>(traj->segments.size()))
    throw Error(ErrorKind::kInvalidArgument, "segment index out of range");
  const Segment& seg = traj->segments[a.segment];
  const ClothState* start = &traj->initial_state;
  if (a.segment > 0) {
    const Segment& prev = traj->segments[a.segment - 1];
    if (prev.ground_truth.empty())
      throw Error(ErrorKind::kInvalidArgument,
                  "calibrating a later segment needs the ground-truth start state");
    start = &prev.ground_truth.back();
  }

  const auto t0 = std::chrono::steady_clock::now();
  const CalibrationResult r = calibrate_grid(
      traj->mesh(), *start, seg.actions, seg.observations.back(), s.tracker.grid,
      s.tracker.base_params, s.scenario.camera, s.tracker.explosion_threshold);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!a.out.empty()) io::write_text(a.out, format_sim_params(r.params));
  json top = json::array();
  for (std::size_t k = 0; k < std::min<std::size_t>(5, r.ranking.size()); ++k)
    top.push_back({{"index", r.ranking[k]}, {"objective", finite_or_null(r.objectives[r.ranking[k]])}});
  out << json{{"command", "calibrate"},
              {"trajectory", traj->id},
              {"segment", a.segment},
              {"combinations", s.tracker.grid.size()},
              {"index", r.index},
              {"objective", finite_or_null(r.objective)},
              {"all_exploded", r.all_exploded},
              {"params", params_json(r.params)},
              {"top", top},
              {"wall_time_s", wall}}
             .dump()
      << '\n';
  return kExitOk;
}

// ---- track --------------------------------------------------------------

struct TrackArgs {
  Common common;
  std::string data;
  std::string out;
  std::optional<std::string> ablate;
  std::optional<std::string> calibration;
  bool grid_125 = false;
  std::optional<double> alpha, beta, lr;
  std::optional<int> iters;
  std::string dump_frames;
  std::string diagnostics;
};

int run_track(const TrackArgs& a, std::ostream& out) {
  Settings s = load_settings(a.common, data_config_text(a.data));
  TrackerConfig& tc = s.tracker;
  if (a.ablate) tc.ablation = AblationFlags::from_label(*a.ablate);
  if (a.calibration) apply_setting(s, "tracker.calibration", *a.calibration);
  if (a.grid_125) tc.grid = CalibrationGrid::grid_125();
  for (TtoConfig* t : {&tc.tto1, &tc.tto2}) {
    if (a.alpha) t->alpha = *a.alpha;
    if (a.beta) t->beta = *a.beta;
    if (a.lr) t->learning_rate = *a.lr;
    if (a.iters) t->iterations = *a.iters;
  }
  s.validate();

  const auto trajectories = io::read_trajectory_dir(a.data);
  std::ofstream diag;
  if (!a.diagnostics.empty()) {
    if (fs::path(a.diagnostics).has_parent_path())
      fs::create_directories(fs::path(a.diagnostics).parent_path());
    diag.open(a.diagnostics, std::ios::trunc);
    if (!diag) throw Error(ErrorKind::kIo, "cannot open '" + a.diagnostics + "'");
  }
  if (!a.dump_frames.empty()) fs::create_directories(a.dump_frames);

  const auto observer = [&](const Trajectory& traj, std::size_t segment, const TrackResult& r) {
    if (diag.is_open()) {
      for (const StepDiagnostics& d : r.steps)
        diag << json{{"trajectory", traj.id},
                     {"segment", segment + 1},
                     {"step", d.step},
                     {"visible_chamfer", finite_or_null(d.visible_chamfer)},
                     {"retries", d.retries},
                     {"scale", d.scale},
                     {"tto_initial_loss", d.tto_initial_loss},
                     {"tto_best_loss", d.tto_best_loss},
                     {"num_visible", d.num_visible}}
                    .dump()
             << '\n';
      diag << json{{"trajectory", traj.id},
                   {"segment", segment + 1},
                   {"event", "segment_done"},
                   {"pre_tto2_chamfer", finite_or_null(r.pre_tto2_chamfer)},
                   {"final_chamfer", finite_or_null(r.final_chamfer)},
                   {"retries", r.total_retries()},
                   {"params", params_json(r.params)},
                   {"wall_time_s", r.wall_time_seconds}}
                  .dump()
           << '\n';
      diag.flush();
    }
    if (!a.dump_frames.empty()) {
      const ClothMesh mesh = traj.mesh();
      char name[64];
      for (std::size_t k = 0; k < r.states.size(); ++k) {
        std::snprintf(name, sizeof name, "t%05d_s%03zu_f%03zu.obj", traj.id, segment + 1, k + 1);
        io::write_obj(fs::path(a.dump_frames) / name, mesh, r.states[k]);
      }
      std::snprintf(name, sizeof name, "t%05d_s%03zu_final.obj", traj.id, segment + 1);
      io::write_obj(fs::path(a.dump_frames) / name, mesh, r.final_state);
    }
  };

  CalibrationCache cache;
  const auto t0 = std::chrono::steady_clock::now();
  PseudoLabelDataset ds =
      generate_pseudo_dataset(trajectories, tc, s.scenario.camera, &cache, observer);
  ds.provenance = format_config(s);
  const std::string hash = io::write_dataset(a.out, ds, s.scenario.camera);
  std::size_t partial = 0;
  for (const DatasetRecord& r : ds.records) partial += r.partial;
  out << json{{"command", "track"},
              {"method", ds.method},
              {"records", ds.records.size()},
              {"partial", partial},
              {"manifest_hash", hash},
              {"wall_time_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                  .count()}}
             .dump()
      << '\n';
  return kExitOk;
}

// ---- eval ---------------------------------------------------------------

struct EvalArgs {
  Common common;
  std::string dataset;
  std::string data;
  bool unsquared = false;
  bool include_initial = false;
  std::string out;
};

int run_eval(const EvalArgs& a, std::ostream& out) {
  const PseudoLabelDataset ds = io::read_dataset(a.dataset);
  Settings s = load_settings(a.common, ds.provenance);
  std::vector<Trajectory> trajectories;
  if (!a.data.empty()) trajectories = io::read_trajectory_dir(a.data);
  EvaluateOptions eo;
  eo.metric = a.unsquared ? ChamferMetric::kUnsquared : ChamferMetric::kSquared;
  eo.collision_threshold = s.tracker.collision_threshold;
  eo.include_initial = a.include_initial;
  const MetricsReport report = evaluate(ds, trajectories, s.scenario.camera, eo);
  if (!a.out.empty()) io::write_text(a.out, report_csv(report));

  const double unit = 1e-4;
  out << "method: " << report.method << "  records: " << report.visible_chamfer.count << '\n';
  out << "visible chamfer, pre-TTO2 (1e-4): " << format_table_cell(report.visible_chamfer, unit)
      << "  median " << report.visible_chamfer.median / unit << '\n';
  out << "visible chamfer, final    (1e-4): "
      << format_table_cell(report.final_visible_chamfer, unit) << "  median "
      << report.final_visible_chamfer.median / unit << '\n';
  if (report.mesh_error)
    out << "mesh error (1e-4 m): " << format_table_cell(*report.mesh_error, unit) << "  median "
        << report.mesh_error->median / unit << '\n';
  else
    out << "mesh error: n/a (no ground truth)\n";
  out << "collisions per mesh: " << format_table_cell(report.collisions, 1.0) << '\n';
  return kExitOk;
}

// ---- bench --------------------------------------------------------------

struct BenchArgs {
  Common common;
  int seeds = 0;
  std::vector<std::uint64_t> seed_list;
  bool robustness = false;
  bool collision_ablation = false;
  std::string out;
};

int run_bench_cmd(const BenchArgs& a, std::ostream& out) {
  BenchOptions opt;
  opt.settings = load_settings(a.common);
  if (!a.seed_list.empty()) {
    opt.seeds = a.seed_list;
  } else {
    if (a.seeds < 1) throw UsageError("bench needs --seeds N or --seed-list");
    for (int i = 1; i <= a.seeds; ++i) opt.seeds.push_back(static_cast<std::uint64_t>(i));
  }
  if (a.robustness)
    for (auto& v : robustness_variants()) opt.variants.push_back(v);
  if (a.collision_ablation)
    for (auto& v : collision_variants()) opt.variants.push_back(v);
  const std::string csv = bench_csv(run_bench(opt));
  if (a.out.empty()) {
    out << csv;
  } else {
    io::write_text(a.out, csv);
  }
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pseudo-ground-truth cloth tracking from partial point clouds", "clothtrack"};
  app.set_version_flag("--version", CLOTHTRACK_VERSION);
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* c_gen = app.add_subcommand("gen", "generate synthetic trajectories");
  add_common(c_gen, gen.common);
  c_gen->add_option("--out", gen.out, "output directory")->required();
  c_gen->add_option("--seed", gen.seed, "random seed");
  c_gen->add_option("--trajectories", gen.trajectories, "number of trajectories");
  c_gen->add_option("--segments", gen.segments, "pick-and-place actions per trajectory");
  c_gen->add_option("--policy", gen.policy, "random-edge-pick, fold-in-half, drag or scripted");

  CalibrateArgs cal;
  CLI::App* c_cal = app.add_subcommand("calibrate", "grid-search the dynamics parameters");
  add_common(c_cal, cal.common);
  c_cal->add_option("--data", cal.data, "trajectory directory")->required();
  c_cal->add_option("--trajectory", cal.trajectory, "trajectory id (default: first)");
  c_cal->add_option("--segment", cal.segment, "0-based pick-and-place index");
  c_cal->add_flag("--grid-125", cal.grid_125, "use the 5 x 5 x 5 grid");
  c_cal->add_option("--out", cal.out, "write the winning parameters as sim.* config");

  TrackArgs tr;
  CLI::App* c_track = app.add_subcommand("track", "generate pseudo labels");
  add_common(c_track, tr.common);
  c_track->add_option("--data", tr.data, "trajectory directory")->required();
  c_track->add_option("--out", tr.out, "dataset output directory")->required();
  c_track->add_option("--ablate", tr.ablate,
                      "no-pseudo-act, no-dyn-init, no-act-cond or no-tto2");
  c_track->add_option("--calibration", tr.calibration, "online or offline");
  c_track->add_flag("--grid-125", tr.grid_125, "use the 5 x 5 x 5 grid");
  c_track->add_option("--tto-alpha", tr.alpha, "Chamfer weight");
  c_track->add_option("--tto-beta", tr.beta, "rigidity weight");
  c_track->add_option("--tto-iters", tr.iters, "optimisation iterations");
  c_track->add_option("--tto-lr", tr.lr, "Adam learning rate (m)");
  c_track->add_option("--dump-frames", tr.dump_frames, "write per-step OBJ meshes here");
  c_track->add_option("--diagnostics", tr.diagnostics, "per-step diagnostics (JSON lines)");

  EvalArgs ev;
  CLI::App* c_eval = app.add_subcommand("eval", "metrics of a pseudo-label dataset");
  add_common(c_eval, ev.common);
  c_eval->add_option("--dataset", ev.dataset, "dataset directory")->required();
  c_eval->add_option("--data", ev.data, "trajectory directory with ground truth");
  c_eval->add_flag("--unsquared", ev.unsquared, "unsquared Chamfer distances");
  c_eval->add_flag("--include-initial", ev.include_initial, "aggregate initial-state records");
  c_eval->add_option("--out", ev.out, "per-record CSV report");

  BenchArgs be;
  CLI::App* c_bench = app.add_subcommand("bench", "ablation matrix over seeds");
  add_common(c_bench, be.common);
  c_bench->add_option("--seeds", be.seeds, "use seeds 1..N");
  c_bench->add_option("--seed-list", be.seed_list, "explicit seeds")->delimiter(',');
  c_bench->add_flag("--robustness", be.robustness, "add median-calibration variants");
  c_bench->add_flag("--collision-ablation", be.collision_ablation, "add the beta = 0 variant");
  c_bench->add_option("--out", be.out, "CSV output (default: stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << CLOTHTRACK_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what(), kExitUsage);
    return kExitUsage;
  }

  try {
    if (c_gen->parsed()) return run_gen(gen, out);
    if (c_cal->parsed()) return run_calibrate(cal, out);
    if (c_track->parsed()) return run_track(tr, out);
    if (c_eval->parsed()) return run_eval(ev, out);
    if (c_bench->parsed()) return run_bench_cmd(be, out);
    print_error(err, "usage", "no subcommand", kExitUsage);
    return kExitUsage;
  } catch (const UsageError& e) {
    print_error(err, "usage", e.what(), kExitUsage);
    return kExitUsage;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    print_error(err, to_string(e.kind()), e.what(), code);
    return code;
  } catch (const fs::filesystem_error& e) {
    print_error(err, "io", e.what(), kExitIo);
    return kExitIo;
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what(), kExitRuntime);
    return kExitRuntime;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace clothtrack
