#pragma once

// Action-conditioned cloth tracking: grid-search calibration of the dynamics,
// per-substep dynamics prediction + test-time optimisation + pseudo-action
// rollout with line search, a final per-segment optimisation, and the
// pseudo-label generation loop that chains segments together.

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clothtrack/dynamics.hpp"
#include "clothtrack/mesh.hpp"
#include "clothtrack/optimize.hpp"
#include "clothtrack/sensing.hpp"

namespace clothtrack {

struct CalibrationGrid {
  std::vector<double> stiffness{0.2, 0.55, 0.9, 1.25, 1.6};
  std::vector<double> dynamic_friction{0.5, 1.4, 2.3, 3.2, 4.1, 5.0};
  std::vector<double> particle_friction{0.5, 1.4, 2.3, 3.2, 4.1, 5.0};

  // 5 x 6 x 6 combinations.
  static CalibrationGrid table_default() { return {}; }
  // Frictions trimmed to their first five values: 5 x 5 x 5 = 125.
  static CalibrationGrid grid_125();

  std::size_t size() const;
  // Stiffness-major ordering: index = (s * |df| + d) * |pf| + p.
  SimParams at(std::size_t index, const SimParams& base) const;
  std::size_t midpoint_index() const;
  void validate() const;
};

enum class CalibrationMode { kOnline, kOffline };

struct AblationFlags {
  bool no_pseudo_action = false;
  bool no_dyn_init = false;
  bool no_act_cond = false;
  bool no_tto2 = false;

  // "ours", "no_pseudo_action", "no_dyn_init", "no_act_cond" or "no_tto2".
  std::string label() const;
  static AblationFlags from_label(const std::string& label);
  int count() const;
};

struct TrackerConfig {
  double gamma = 0.7;
  int max_line_search_retries = 10;
  double explosion_threshold = 2.5;
  TtoConfig tto1;
  TtoConfig tto2;
  CalibrationMode calibration_mode = CalibrationMode::kOnline;
  AblationFlags ablation;
  CalibrationGrid grid;
  SimParams base_params;
  // Rank of the calibration winner to use: 0 is the argmin. Used to study
  // robustness against worse dynamics parameters.
  std::size_t calibration_rank = 0;
  double collision_threshold = 0.005;

  void validate() const;
};

struct CalibrationResult {
  SimParams params;
  std::size_t index = 0;
  double objective = 0.0;
  std::vector<double> objectives;    // per grid index, +inf when the rollout exploded
  std::vector<std::size_t> ranking;  // grid indices sorted by objective, ties by index
  bool all_exploded = false;
};

// Plain rollout under every grid combination; objective is the one-way Chamfer
// from the final observation to the visible vertices of the final simulated state.
CalibrationResult calibrate_grid(const ClothMesh& mesh, const ClothState& state,
                                 std::span<const LowLevelAction> actions,
                                 const PointCloud& final_observation,
                                 const CalibrationGrid& grid, const SimParams& base,
                                 const CameraModel& camera, double explosion_threshold);

SimParams calibrate(const ClothMesh& mesh, const ClothState& state,
                    std::span<const LowLevelAction> actions, const PointCloud& final_observation,
                    const CalibrationGrid& grid, const CameraModel& camera,
                    const SimParams& base = {}, double explosion_threshold = 2.5);

// Pseudo-action split into the part that is never scaled (dynamics motion)
// and the correction the line search shrinks.
struct PseudoActionProposal {
  std::vector<Vec3> dynamics_motion;
  std::vector<Vec3> correction;
  std::vector<std::uint8_t> affected;
  // Substep shape of the dynamics prediction; may be empty.
  std::vector<std::vector<Vec3>> path_offsets;

  PseudoAction at_scale(double scale) const;
};

struct LineSearchOutcome {
  ClothState state;
  int retries = 0;
  double scale = 1.0;
};

// Throws Error(kUnstable) if even the step without pseudo-action explodes.
LineSearchOutcome line_search_step(const ClothMesh& mesh, const ClothState& state,
                                   const SimParams& params, const LowLevelAction& action,
                                   const PseudoActionProposal& proposal,
                                   const TrackerConfig& config);

struct StepDiagnostics {
  int step = 0;
  double visible_chamfer = 0.0;  // bidirectional, tracked mesh vs observation
  int retries = 0;
  double scale = 1.0;
  double tto_initial_loss = 0.0;
  double tto_best_loss = 0.0;
  std::size_t num_visible = 0;
};

struct TrackResult {
  std::vector<ClothState> states;
  ClothState pre_tto2;
  ClothState final_state;
  std::vector<StepDiagnostics> steps;
  double pre_tto2_chamfer = 0.0;
  double final_chamfer = 0.0;
  SimParams params;
  double wall_time_seconds = 0.0;

  int total_retries() const;
};

TrackResult track_segment(const ClothMesh& mesh, const ClothState& initial,
                          std::span<const LowLevelAction> actions,
                          std::span<const PointCloud> observations, const SimParams& params,
                          const TrackerConfig& config, const CameraModel& camera);

// Bidirectional Chamfer between the visible vertices of `state` and `cloud`;
// +inf if either side is empty.
double visible_chamfer(const ClothMesh& mesh, const ClothState& state, const PointCloud& cloud,
                       const CameraModel& camera,
                       ChamferMetric metric = ChamferMetric::kSquared);

// Non-adjacent vertex pairs closer than `threshold`.
std::size_t collision_count(const ClothMesh& mesh, const ClothState& state, double threshold);

struct DatasetRecord {
  int trajectory_id = 0;
  int segment_index = 0;  // 0 is the initial state, k is after pick-and-place k
  PointCloud observation;
  ClothState pseudo_mesh;
  std::optional<ClothState> pre_tto2;
  std::optional<SimParams> params;
  std::optional<std::size_t> calibration_index;
  std::vector<StepDiagnostics> diagnostics;
  double wall_time_seconds = 0.0;
  bool partial = false;
};

struct PseudoLabelDataset {
  std::string method = "ours";
  int num_x = 0;
  int num_y = 0;
  double spacing = 0.0;
  std::string provenance;  // flat key = value snapshot of the generating config
  std::string code_version;
  std::vector<DatasetRecord> records;
};

// Memoises grid-search results keyed on the start state, actions and final
// observation. Thread-safe.
class CalibrationCache {
 public:
  std::optional<CalibrationResult> find(std::uint64_t key) const;
  void insert(std::uint64_t key, const CalibrationResult& result);

 private:
  mutable std::mutex mutex_;
  std::map<std::uint64_t, CalibrationResult> entries_;
};

std::uint64_t calibration_key(const ClothState& state, std::span<const LowLevelAction> actions,
                              const PointCloud& final_observation, const TrackerConfig& config,
                              const CameraModel& camera);

// Called after each tracked segment with the trajectory, the 0-based segment
// index and the full tracking result.
using SegmentObserver =
    std::function<void(const Trajectory&, std::size_t, const TrackResult&)>;

PseudoLabelDataset generate_pseudo_dataset(std::span<const Trajectory> trajectories,
                                           const TrackerConfig& config,
                                           const CameraModel& camera,
                                           CalibrationCache* cache = nullptr,
                                           const SegmentObserver& observer = {});

}  // namespace clothtrack
