#pragma once

// Ablation matrix over a list of seeds: every (seed, variant) cell generates
// the seed's synthetic trajectories, tracks them and reduces the records to
// one row.

#include <cstdint>
#include <string>
#include <vector>

#include "clothtrack/config.hpp"

namespace clothtrack {

struct BenchVariant {
  std::string name;  // row label
  AblationFlags ablation;
  // Use the median-ranked grid combination instead of the calibration winner.
  bool median_calibration = false;
  // Overrides the rigidity weight of both optimisations when >= 0.
  double beta = -1.0;
};

// ours plus the four single ablations.
std::vector<BenchVariant> standard_variants();
// ours and no_tto2 under the median-ranked calibration.
std::vector<BenchVariant> robustness_variants();
// ours with the rigidity weight set to zero.
std::vector<BenchVariant> collision_variants();

struct BenchRow {
  std::uint64_t seed = 0;
  std::string variant;
  std::size_t num_records = 0;  // tracked records (segment >= 1)
  std::size_t num_partial = 0;
  // Medians over the tracked records.
  double pre_tto2_chamfer = 0.0;
  double final_chamfer = 0.0;
  double mesh_error = 0.0;
  // Means over the tracked records.
  double mean_pre_tto2_chamfer = 0.0;
  double mean_final_chamfer = 0.0;
  std::size_t collisions = 0;  // summed over final meshes
  int retries = 0;
  std::string calibration;  // calibration grid indices, ';'-separated
  double wall_time_seconds = 0.0;
};

struct BenchOptions {
  Settings settings;  // scenario.seed is replaced by each seed
  std::vector<std::uint64_t> seeds;
  std::vector<BenchVariant> variants = standard_variants();
};

// Rows ordered by seed, then by variant order.
std::vector<BenchRow> run_bench(const BenchOptions& options);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace clothtrack
