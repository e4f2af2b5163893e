#pragma once

// Per-record and aggregate quality metrics of a pseudo-label dataset.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clothtrack/mesh.hpp"
#include "clothtrack/sensing.hpp"
#include "clothtrack/tracker.hpp"

namespace clothtrack {

struct RecordMetrics {
  int trajectory_id = 0;
  int segment_index = 0;
  // Bidirectional visible-Chamfer against the record's observation, on the
  // mesh before the final optimisation (the final mesh if there is none).
  double visible_chamfer = 0.0;
  double final_visible_chamfer = 0.0;
  // Mean per-vertex distance to the ground truth; absent without it.
  std::optional<double> mesh_error;
  std::size_t collisions = 0;
  int retries = 0;
  bool partial = false;
  double wall_time_seconds = 0.0;
};

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
  double median = 0.0;
};

// Empty input gives count 0 and zeros. Non-finite values are skipped.
Summary summarize(std::span<const double> values);

struct MetricsReport {
  std::string method;
  std::vector<RecordMetrics> records;
  Summary visible_chamfer;
  Summary final_visible_chamfer;
  std::optional<Summary> mesh_error;
  Summary collisions;
};

struct EvaluateOptions {
  ChamferMetric metric = ChamferMetric::kSquared;
  double collision_threshold = 0.005;
  // Aggregates cover tracked records only (segment index >= 1).
  bool include_initial = false;
};

// `trajectories` supplies ground truth and may be empty; records without a
// matching ground-truth state get no mesh error.
MetricsReport evaluate(const PseudoLabelDataset& dataset,
                       std::span<const Trajectory> trajectories, const CameraModel& camera,
                       const EvaluateOptions& options = {});

// "mean ± std" in units of 1e-4, two decimals.
std::string format_table_cell(const Summary& s, double unit = 1e-4);

std::string report_csv(const MetricsReport& report);

}  // namespace clothtrack
