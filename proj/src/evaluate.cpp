#include "clothtrack/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace clothtrack {

Summary summarize(std::span<const double> values) {
  std::vector<double> v;
  v.reserve(values.size());
  for (double x : values)
    if (std::isfinite(x)) v.push_back(x);
  Summary s;
  s.count = v.size();
  if (v.empty()) return s;
  // Sorting first makes every statistic independent of input order.
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / v.size();
  double var = 0.0;
  for (double x : v) var += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(var / v.size());
  const std::size_t mid = v.size() / 2;
  s.median = v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  return s;
}

namespace {

const ClothState* ground_truth_for(const std::map<int, const Trajectory*>& by_id,
                                   const DatasetRecord& r) {
  const auto it = by_id.find(r.trajectory_id);
  if (it == by_id.end()) return nullptr;
  const Trajectory& t = *it->second;
  if (r.segment_index == 0) return &t.initial_state;
  const std::size_t s = static_cast<std::size_t>(r.segment_index - 1);
  if (s >= t.segments.size() || t.segments[s].ground_truth.empty()) return nullptr;
  return &t.segments[s].ground_truth.back();
}

}  // namespace

MetricsReport evaluate(const PseudoLabelDataset& dataset,
                       std::span<const Trajectory> trajectories, const CameraModel& camera,
                       const EvaluateOptions& options) {
  const ClothMesh mesh = build_grid_cloth(dataset.num_x, dataset.num_y, dataset.spacing);
  std::map<int, const Trajectory*> by_id;
  for (const Trajectory& t : trajectories) {
    require(t.num_x == dataset.num_x && t.num_y == dataset.num_y, ErrorKind::kDimensionMismatch,
            "trajectory grid differs from the dataset grid");
    by_id.emplace(t.id, &t);
  }

  MetricsReport report;
  report.method = dataset.method;
  std::vector<double> chamfer, final_chamfer, mesh_error, collisions;
  for (const DatasetRecord& r : dataset.records) {
    r.pseudo_mesh.validate(mesh);
    RecordMetrics m;
    m.trajectory_id = r.trajectory_id;
    m.segment_index = r.segment_index;
    m.partial = r.partial;
    m.wall_time_seconds = r.wall_time_seconds;
    for (const StepDiagnostics& d : r.diagnostics) m.retries += d.retries;
    const ClothState& pre = r.pre_tto2 ? *r.pre_tto2 : r.pseudo_mesh;
    m.visible_chamfer = visible_chamfer(mesh, pre, r.observation, camera, options.metric);
    m.final_visible_chamfer =
        visible_chamfer(mesh, r.pseudo_mesh, r.observation, camera, options.metric);
    m.collisions = collision_count(mesh, r.pseudo_mesh, options.collision_threshold);
    if (const ClothState* gt = ground_truth_for(by_id, r)) {
      double sum = 0.0;
      for (std::size_t i = 0; i < gt->positions.size(); ++i)
        sum += std::sqrt(squared_distance(gt->positions[i], r.pseudo_mesh.positions[i]));
      m.mesh_error = sum / static_cast<double>(gt->positions.size());
    }

    if (options.include_initial || r.segment_index >= 1) {
      chamfer.push_back(m.visible_chamfer);
      final_chamfer.push_back(m.final_visible_chamfer);
      collisions.push_back(static_cast<double>(m.collisions));
      if (m.mesh_error) mesh_error.push_back(*m.mesh_error);
    }
    report.records.push_back(m);
  }
  report.visible_chamfer = summarize(chamfer);
  report.final_visible_chamfer = summarize(final_chamfer);
  report.collisions = summarize(collisions);
  if (!mesh_error.empty()) report.mesh_error = summarize(mesh_error);
  return report;
}

std::string format_table_cell(const Summary& s, double unit) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f ± %.2f", s.mean / unit, s.stddev / unit);
  return buf;
}

std::string report_csv(const MetricsReport& report) {
  std::ostringstream os;
  os.precision(10);
  os << "method,trajectory,segment,visible_chamfer,final_visible_chamfer,mesh_error,collisions,"
        "retries,partial,wall_time_s\n";
  for (const RecordMetrics& m : report.records) {
    os << report.method << ',' << m.trajectory_id << ',' << m.segment_index << ','
       << m.visible_chamfer << ',' << m.final_visible_chamfer << ',';
    if (m.mesh_error) os << *m.mesh_error;
    os << ',' << m.collisions << ',' << m.retries << ',' << (m.partial ? 1 : 0) << ','
       << m.wall_time_seconds << '\n';
  }
  return os.str();
}

}  // namespace clothtrack
