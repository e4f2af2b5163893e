#include "clothtrack/bench.hpp"

#include <chrono>
#include <memory>
#include <sstream>

#include "clothtrack/evaluate.hpp"
#include "clothtrack/parallel.hpp"

namespace clothtrack {

std::vector<BenchVariant> standard_variants() {
  std::vector<BenchVariant> out;
  for (const char* label : {"ours", "no_pseudo_action", "no_dyn_init", "no_act_cond", "no_tto2"})
    out.push_back({label, AblationFlags::from_label(label)});
  return out;
}

std::vector<BenchVariant> robustness_variants() {
  BenchVariant ours{"ours@median", {}, true};
  BenchVariant no_tto2{"no_tto2@median", AblationFlags::from_label("no_tto2"), true};
  return {ours, no_tto2};
}

std::vector<BenchVariant> collision_variants() {
  BenchVariant v{"ours@beta0", {}};
  v.beta = 0.0;
  return {v};
}

namespace {

struct SeedData {
  ScenarioConfig scenario;
  std::vector<Trajectory> trajectories;
  CalibrationCache cache;
};

double median_of(std::vector<double> v) { return summarize(v).median; }

BenchRow run_cell(SeedData& data, const Settings& settings, const BenchVariant& variant) {
  const auto t0 = std::chrono::steady_clock::now();
  TrackerConfig config = settings.tracker;
  config.ablation = variant.ablation;
  if (variant.median_calibration) config.calibration_rank = config.grid.size() / 2;
  if (variant.beta >= 0.0) {
    config.tto1.beta = variant.beta;
    config.tto2.beta = variant.beta;
  }
  const PseudoLabelDataset ds =
      generate_pseudo_dataset(data.trajectories, config, data.scenario.camera, &data.cache);

  EvaluateOptions eo;
  eo.collision_threshold = config.collision_threshold;
  const MetricsReport report = evaluate(ds, data.trajectories, data.scenario.camera, eo);

  BenchRow row;
  row.seed = data.scenario.rng_seed;
  row.variant = variant.name;
  std::vector<double> pre, fin, err;
  std::ostringstream calib;
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const RecordMetrics& m = report.records[i];
    if (m.segment_index < 1) continue;
    ++row.num_records;
    if (m.partial) ++row.num_partial;
    pre.push_back(m.visible_chamfer);
    fin.push_back(m.final_visible_chamfer);
    if (m.mesh_error) err.push_back(*m.mesh_error);
    row.collisions += m.collisions;
    row.retries += m.retries;
    if (ds.records[i].calibration_index) {
      if (!calib.str().empty()) calib << ';';
      calib << *ds.records[i].calibration_index;
    }
  }
  const Summary pre_summary = summarize(pre);
  const Summary fin_summary = summarize(fin);
  row.pre_tto2_chamfer = pre_summary.median;
  row.final_chamfer = fin_summary.median;
  row.mean_pre_tto2_chamfer = pre_summary.mean;
  row.mean_final_chamfer = fin_summary.mean;
  row.mesh_error = median_of(err);
  row.calibration = calib.str();
  row.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchOptions& options) {
  options.settings.validate();
  require(!options.seeds.empty(), ErrorKind::kInvalidArgument, "bench needs at least one seed");
  require(!options.variants.empty(), ErrorKind::kInvalidArgument, "bench needs a variant");

  std::vector<std::unique_ptr<SeedData>> seeds;
  for (std::uint64_t seed : options.seeds) {
    auto d = std::make_unique<SeedData>();
    d->scenario = options.settings.scenario;
    d->scenario.rng_seed = seed;
    seeds.push_back(std::move(d));
  }
  parallel_for(seeds.size(), [&](std::size_t i) {
    seeds[i]->trajectories = generate_synthetic_trajectories(seeds[i]->scenario);
  });

  const std::size_t nv = options.variants.size();
  std::vector<BenchRow> rows(seeds.size() * nv);
  parallel_for(rows.size(), [&](std::size_t cell) {
    rows[cell] = run_cell(*seeds[cell / nv], options.settings, options.variants[cell % nv]);
  });
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os.precision(10);
  os << "seed,method,records,partial,pre_tto2_chamfer,final_chamfer,mesh_error,collisions,"
        "retries,calibration,wall_time_s,mean_pre_tto2_chamfer,mean_final_chamfer\n";
  for (const BenchRow& r : rows)
    os << r.seed << ',' << r.variant << ',' << r.num_records << ',' << r.num_partial << ','
       << r.pre_tto2_chamfer << ',' << r.final_chamfer << ',' << r.mesh_error << ','
       << r.collisions << ',' << r.retries << ',' << r.calibration << ','
       << r.wall_time_seconds << ',' << r.mean_pre_tto2_chamfer << ','
       << r.mean_final_chamfer << '\n';
  return os.str();
}

}  // namespace clothtrack
