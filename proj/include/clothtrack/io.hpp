#pragma once

// File formats: OBJ meshes (vertices plus edge "l" elements), ASCII PLY point
// clouds, a small binary depth container with a JSON sidecar, CBOR-encoded
// trajectories and a JSON-manifest dataset directory.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "clothtrack/mesh.hpp"
#include "clothtrack/sensing.hpp"
#include "clothtrack/tracker.hpp"

namespace clothtrack::io {

namespace fs = std::filesystem;

struct MeshFile {
  ClothMesh mesh;
  ClothState state;  // velocities are zero; OBJ stores positions only
};

void write_obj(const fs::path& path, const ClothMesh& mesh, const ClothState& state);
// The grid header must be present and the edge list must match the grid.
MeshFile read_obj(const fs::path& path);

void write_ply(const fs::path& path, const PointCloud& cloud);
PointCloud read_ply(const fs::path& path);

// `<path>` holds the raw image, `<path>.json` the camera bounds.
void write_depth(const fs::path& path, const DepthImage& image);
DepthImage read_depth(const fs::path& path);

std::vector<std::uint8_t> encode_trajectory(const Trajectory& trajectory);
Trajectory decode_trajectory(const std::vector<std::uint8_t>& bytes);
void write_trajectory(const fs::path& path, const Trajectory& trajectory);
Trajectory read_trajectory(const fs::path& path);

// Every `*.traj.cbor` file in `dir`, in file-name order.
std::vector<Trajectory> read_trajectory_dir(const fs::path& dir);
void write_trajectory_dir(const fs::path& dir, const std::vector<Trajectory>& trajectories);

void write_diagnostics(const fs::path& path, const std::vector<StepDiagnostics>& steps);
std::vector<StepDiagnostics> read_diagnostics(const fs::path& path);

// Writes `dir/manifest.json` and one set of files per record under
// `dir/records/`. Returns the manifest hash.
std::string write_dataset(const fs::path& dir, const PseudoLabelDataset& dataset,
                          const CameraModel& camera);
// Checks that every file reference resolves, that the manifest hash matches
// and that every mesh passes the mesh invariants.
PseudoLabelDataset read_dataset(const fs::path& dir);
std::string manifest_hash(const fs::path& dir);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace clothtrack::io
