#include "clothtrack/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace clothtrack::io {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "depth container is written in host order and assumes little endian");

namespace {

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::kIo, "write to '" + path.string() + "' failed");
}

[[noreturn]] void parse_error(const fs::path& path, std::size_t line, const std::string& msg) {
  throw Error(ErrorKind::kIo, path.string() + ":" + std::to_string(line) + ": " + msg);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json vec_array(std::span<const Vec3> points) {
  json a = json::array();
  for (const Vec3& p : points) {
    a.push_back(p.x());
    a.push_back(p.y());
    a.push_back(p.z());
  }
  return a;
}

std::vector<Vec3> vec_list(const json& a) {
  require(a.is_array() && a.size() % 3 == 0, ErrorKind::kIo, "coordinate array length not a multiple of 3");
  std::vector<Vec3> out(a.size() / 3);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = Vec3(a[3 * i].get<double>(), a[3 * i + 1].get<double>(), a[3 * i + 2].get<double>());
  return out;
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
Vec3 json_vec(const json& j) {
  require(j.is_array() && j.size() == 3, ErrorKind::kIo, "expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json state_json(const ClothState& s) {
  return {{"positions", vec_array(s.positions)},
          {"velocities", vec_array(s.velocities)},
          {"time_index", s.time_index}};
}

ClothState json_state(const json& j) {
  ClothState s;
  s.positions = vec_list(j.at("positions"));
  s.velocities = vec_list(j.at("velocities"));
  s.time_index = j.at("time_index").get<int>();
  return s;
}

json params_json(const SimParams& p) {
  return {{"stiffness", p.stiffness},       {"dynamic_friction", p.dynamic_friction},
          {"particle_friction", p.particle_friction}, {"gravity", p.gravity},
          {"dt", p.dt},                     {"substeps", p.substeps},
          {"solver_iterations", p.solver_iterations}, {"particle_radius", p.particle_radius},
          {"damping", p.damping}};
}

SimParams json_params(const json& j) {
  SimParams p;
  p.stiffness = j.at("stiffness").get<double>();
  p.dynamic_friction = j.at("dynamic_friction").get<double>();
  p.particle_friction = j.at("particle_friction").get<double>();
  p.gravity = j.at("gravity").get<double>();
  p.dt = j.at("dt").get<double>();
  p.substeps = j.at("substeps").get<int>();
  p.solver_iterations = j.at("solver_iterations").get<int>();
  p.particle_radius = j.at("particle_radius").get<double>();
  p.damping = j.at("damping").get<double>();
  return p;
}

// JSON has no infinity; store it as null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double null_as_inf(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

std::string read_text(const fs::path& path) {
  std::ifstream in = open_in(path, std::ios::in | std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out = open_out(path, std::ios::out | std::ios::binary);
  out << text;
  finish(out, path);
}

void write_obj(const fs::path& path, const ClothMesh& mesh, const ClothState& state) {
  state.validate(mesh);
  std::ofstream out = open_out(path);
  out << "# grid " << mesh.num_x() << ' ' << mesh.num_y() << ' ' << fmt(mesh.spacing()) << '\n';
  for (const Vec3& p : state.positions)
    out << "v " << fmt(p.x()) << ' ' << fmt(p.y()) << ' ' << fmt(p.z()) << '\n';
  for (const Edge& e : mesh.edges()) out << "l " << e.a + 1 << ' ' << e.b + 1 << '\n';
  finish(out, path);
}

MeshFile read_obj(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  int nx = 0, ny = 0;
  double spacing = 0.0;
  bool have_grid = false;
  std::vector<Vec3> positions;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "#") {
      std::string word;
      if (ls >> word && word == "grid") {
        if (!(ls >> nx >> ny >> spacing)) parse_error(path, lineno, "malformed grid header");
        have_grid = true;
      }
    } else if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) parse_error(path, lineno, "malformed vertex");
      positions.emplace_back(x, y, z);
    } else if (tag == "l") {
      long long a, b;
      if (!(ls >> a >> b) || a < 1 || b < 1) parse_error(path, lineno, "malformed line element");
      edges.push_back({static_cast<VertexIndex>(a - 1), static_cast<VertexIndex>(b - 1)});
    }
  }
  if (!have_grid) throw Error(ErrorKind::kIo, path.string() + ": missing '# grid' header");
  MeshFile out;
  try {
    out.mesh = build_grid_cloth(nx, ny, spacing);
  } catch (const Error& e) {
    throw Error(ErrorKind::kIo, path.string() + ": " + e.what());
  }
  const auto& expected = out.mesh.edges();
  bool same = edges.size() == expected.size();
  for (std::size_t i = 0; same && i < edges.size(); ++i)
    same = edges[i].a == expected[i].a && edges[i].b == expected[i].b;
  if (!same) throw Error(ErrorKind::kIo, path.string() + ": edge list does not match the grid");
  out.state.positions = std::move(positions);
  out.state.velocities.assign(out.state.positions.size(), Vec3::Zero());
  try {
    out.state.validate(out.mesh);
  } catch (const Error& e) {
    throw Error(ErrorKind::kIo, path.string() + ": " + e.what());
  }
  return out;
}

void write_ply(const fs::path& path, const PointCloud& cloud) {
  std::ofstream out = open_out(path);
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
      << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  for (const Vec3& p : cloud.points)
    out << fmt(p.x()) << ' ' << fmt(p.y()) << ' ' << fmt(p.z()) << '\n';
  finish(out, path);
}

PointCloud read_ply(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  std::size_t count = 0;
  bool have_count = false;
  int properties = 0;
  auto next = [&]() {
    if (!std::getline(in, line)) parse_error(path, lineno, "unexpected end of file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };
  next();
  if (line != "ply") parse_error(path, lineno, "not a PLY file");
  for (;;) {
    next();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string kind;
      ls >> kind;
      if (kind != "ascii") parse_error(path, lineno, "only ASCII PLY is supported");
    } else if (word == "element") {
      std::string name;
      ls >> name;
      if (name == "vertex") {
        if (!(ls >> count)) parse_error(path, lineno, "malformed vertex count");
        have_count = true;
      }
    } else if (word == "property") {
      ++properties;
    } else if (word == "end_header") {
      break;
    }
  }
  if (!have_count) parse_error(path, lineno, "missing vertex element");
  if (properties < 3) parse_error(path, lineno, "expected x, y, z properties");
  PointCloud cloud;
  cloud.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    next();
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x >> y >> z)) parse_error(path, lineno, "malformed point");
    cloud.points.emplace_back(x, y, z);
  }
  require(all_finite(cloud.points), ErrorKind::kIo, path.string() + ": non-finite point");
  return cloud;
}

namespace {
constexpr char kDepthMagic[8] = {'C', 'T', 'D', 'E', 'P', 'T', 'H', '1'};
}

void write_depth(const fs::path& path, const DepthImage& image) {
  require(image.width > 0 && image.height > 0 &&
              image.depth.size() == static_cast<std::size_t>(image.width) * image.height,
          ErrorKind::kInvalidArgument, "depth image dimensions do not match its data");
  std::ofstream out = open_out(path, std::ios::out | std::ios::binary);
  out.write(kDepthMagic, sizeof kDepthMagic);
  const std::uint32_t dims[2] = {static_cast<std::uint32_t>(image.width),
                                 static_cast<std::uint32_t>(image.height)};
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  out.write(reinterpret_cast<const char*>(image.depth.data()),
            static_cast<std::streamsize>(image.depth.size() * sizeof(float)));
  finish(out, path);

  const json sidecar = {{"width", image.width},   {"height", image.height},
                        {"x_min", image.x_min},   {"x_max", image.x_max},
                        {"y_min", image.y_min},   {"y_max", image.y_max},
                        {"camera_height", image.camera_height},
                        {"units", "meters"},      {"background", 0.0}};
  write_text(fs::path(path.string() + ".json"), sidecar.dump(2) + "\n");
}

DepthImage read_depth(const fs::path& path) {
  std::ifstream in = open_in(path, std::ios::in | std::ios::binary);
  char magic[8];
  std::uint32_t dims[2];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kDepthMagic, sizeof magic) != 0)
    throw Error(ErrorKind::kIo, path.string() + ": not a depth image");
  if (!in.read(reinterpret_cast<char*>(dims), sizeof dims) || dims[0] == 0 || dims[1] == 0 ||
      dims[0] > 1u << 15 || dims[1] > 1u << 15)
    throw Error(ErrorKind::kIo, path.string() + ": bad depth image header");
  DepthImage image;
  image.width = static_cast<int>(dims[0]);
  image.height = static_cast<int>(dims[1]);
  image.depth.resize(static_cast<std::size_t>(dims[0]) * dims[1]);
  if (!in.read(reinterpret_cast<char*>(image.depth.data()),
               static_cast<std::streamsize>(image.depth.size() * sizeof(float))))
    throw Error(ErrorKind::kIo, path.string() + ": truncated depth image");

  const fs::path side(path.string() + ".json");
  try {
    const json j = json::parse(read_text(side));
    require(j.at("width").get<int>() == image.width && j.at("height").get<int>() == image.height,
            ErrorKind::kIo, "sidecar dimensions differ from the image");
    image.x_min = j.at("x_min").get<double>();
    image.x_max = j.at("x_max").get<double>();
    image.y_min = j.at("y_min").get<double>();
    image.y_max = j.at("y_max").get<double>();
    image.camera_height = j.at("camera_height").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kIo, side.string() + ": " + e.what());
  }
  return image;
}

namespace {

json trajectory_json(const Trajectory& t) {
  json segs = json::array();
  for (const Segment& s : t.segments) {
    json actions = json::array();
    for (const LowLevelAction& a : s.actions)
      actions.push_back({{"vertex", a.picked_vertex == kNoVertex
                                        ? json(-1)
                                        : json(static_cast<std::int64_t>(a.picked_vertex))},
                         {"delta", vec_json(a.picker_delta)},
                         {"grasp", a.grasp_active}});
    json obs = json::array();
    for (const PointCloud& c : s.observations) obs.push_back(vec_array(c.points));
    json gt = json::array();
    for (const ClothState& g : s.ground_truth) gt.push_back(state_json(g));
    segs.push_back({{"pick_point", vec_json(s.pick_place.pick_point)},
                    {"place_point", vec_json(s.pick_place.place_point)},
                    {"lift_height", s.pick_place.lift_height},
                    {"num_substeps", s.pick_place.num_substeps},
                    {"actions", std::move(actions)},
                    {"observations", std::move(obs)},
                    {"ground_truth", std::move(gt)}});
  }
  return {{"format", "clothtrack-trajectory"},
          {"version", 1},
          {"id", t.id},
          {"num_x", t.num_x},
          {"num_y", t.num_y},
          {"spacing", t.spacing},
          {"initial_state", state_json(t.initial_state)},
          {"initial_observation", vec_array(t.initial_observation.points)},
          {"segments", std::move(segs)}};
}

Trajectory json_trajectory(const json& j) {
  require(j.value("format", "") == "clothtrack-trajectory", ErrorKind::kIo,
          "not a trajectory document");
  Trajectory t;
  t.id = j.at("id").get<int>();
  t.num_x = j.at("num_x").get<int>();
  t.num_y = j.at("num_y").get<int>();
  t.spacing = j.at("spacing").get<double>();
  t.initial_state = json_state(j.at("initial_state"));
  t.initial_observation.points = vec_list(j.at("initial_observation"));
  for (const json& js : j.at("segments")) {
    Segment s;
    s.pick_place.pick_point = json_vec(js.at("pick_point"));
    s.pick_place.place_point = json_vec(js.at("place_point"));
    s.pick_place.lift_height = js.at("lift_height").get<double>();
    s.pick_place.num_substeps = js.at("num_substeps").get<int>();
    for (const json& ja : js.at("actions")) {
      LowLevelAction a;
      const std::int64_t v = ja.at("vertex").get<std::int64_t>();
      a.picked_vertex = v < 0 ? kNoVertex : static_cast<VertexIndex>(v);
      a.picker_delta = json_vec(ja.at("delta"));
      a.grasp_active = ja.at("grasp").get<bool>();
      s.actions.push_back(a);
    }
    for (const json& jo : js.at("observations")) s.observations.push_back({vec_list(jo)});
    for (const json& jg : js.at("ground_truth")) s.ground_truth.push_back(json_state(jg));
    t.segments.push_back(std::move(s));
  }
  return t;
}

}  // namespace

std::vector<std::uint8_t> encode_trajectory(const Trajectory& trajectory) {
  trajectory.validate();
  return json::to_cbor(trajectory_json(trajectory));
}

Trajectory decode_trajectory(const std::vector<std::uint8_t>& bytes) {
  Trajectory t;
  try {
    t = json_trajectory(json::from_cbor(bytes));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kIo, std::string("malformed trajectory: ") + e.what());
  }
  try {
    t.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kIo, std::string("invalid trajectory: ") + e.what());
  }
  return t;
}

void write_trajectory(const fs::path& path, const Trajectory& trajectory) {
  const auto bytes = encode_trajectory(trajectory);
  std::ofstream out = open_out(path, std::ios::out | std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  finish(out, path);
}

Trajectory read_trajectory(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return decode_trajectory(std::vector<std::uint8_t>(text.begin(), text.end()));
  } catch (const Error& e) {
    throw Error(ErrorKind::kIo, path.string() + ": " + e.what());
  }
}

std::vector<Trajectory> read_trajectory_dir(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw Error(ErrorKind::kIo, "'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.ends_with(".traj.cbor")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorKind::kIo, "no trajectories in '" + dir.string() + "'");
  std::vector<Trajectory> out;
  out.reserve(files.size());
  for (const fs::path& f : files) out.push_back(read_trajectory(f));
  return out;
}

void write_trajectory_dir(const fs::path& dir, const std::vector<Trajectory>& trajectories) {
  fs::create_directories(dir);
  for (const Trajectory& t : trajectories) {
    char name[32];
    std::snprintf(name, sizeof name, "%05d.traj.cbor", t.id);
    write_trajectory(dir / name, t);
  }
}

void write_diagnostics(const fs::path& path, const std::vector<StepDiagnostics>& steps) {
  std::ofstream out = open_out(path);
  for (const StepDiagnostics& s : steps) {
    const json j = {{"step", s.step},
                    {"visible_chamfer", finite_or_null(s.visible_chamfer)},
                    {"retries", s.retries},
                    {"scale", s.scale},
                    {"tto_initial_loss", finite_or_null(s.tto_initial_loss)},
                    {"tto_best_loss", finite_or_null(s.tto_best_loss)},
                    {"num_visible", s.num_visible}};
    out << j.dump() << '\n';
  }
  finish(out, path);
}

std::vector<StepDiagnostics> read_diagnostics(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::vector<StepDiagnostics> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      StepDiagnostics s;
      s.step = j.at("step").get<int>();
      s.visible_chamfer = null_as_inf(j.at("visible_chamfer"));
      s.retries = j.at("retries").get<int>();
      s.scale = j.at("scale").get<double>();
      s.tto_initial_loss = null_as_inf(j.at("tto_initial_loss"));
      s.tto_best_loss = null_as_inf(j.at("tto_best_loss"));
      s.num_visible = j.at("num_visible").get<std::size_t>();
      out.push_back(s);
    } catch (const json::exception& e) {
      parse_error(path, lineno, e.what());
    }
  }
  return out;
}

namespace {

std::string record_stem(const DatasetRecord& r) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "t%05d_s%03d", r.trajectory_id, r.segment_index);
  return buf;
}

std::string records_hash(const json& records) { return hex64(fnv1a(records.dump())); }

}  // namespace

std::string write_dataset(const fs::path& dir, const PseudoLabelDataset& dataset,
                          const CameraModel& camera) {
  const ClothMesh mesh = build_grid_cloth(dataset.num_x, dataset.num_y, dataset.spacing);
  const fs::path rec_dir = dir / "records";
  fs::create_directories(rec_dir);

  json records = json::array();
  for (const DatasetRecord& r : dataset.records) {
    const std::string stem = record_stem(r);
    json jr = {{"trajectory_id", r.trajectory_id},
               {"segment_index", r.segment_index},
               {"partial", r.partial},
               {"wall_time_seconds", r.wall_time_seconds}};
    const std::string cloud_ref = "records/" + stem + "_observation.ply";
    const std::string depth_ref = "records/" + stem + "_depth.bin";
    const std::string mesh_ref = "records/" + stem + "_mesh.obj";
    write_ply(dir / cloud_ref, r.observation);
    write_depth(dir / depth_ref, depth_from_point_cloud(r.observation, camera));
    write_obj(dir / mesh_ref, mesh, r.pseudo_mesh);
    jr["observation"] = cloud_ref;
    jr["depth"] = depth_ref;
    jr["mesh"] = mesh_ref;
    if (r.pre_tto2) {
      const std::string ref = "records/" + stem + "_pre_tto2.obj";
      write_obj(dir / ref, mesh, *r.pre_tto2);
      jr["pre_tto2_mesh"] = ref;
    }
    if (!r.diagnostics.empty()) {
      const std::string ref = "records/" + stem + "_diagnostics.jsonl";
      write_diagnostics(dir / ref, r.diagnostics);
      jr["diagnostics"] = ref;
    }
    if (r.params) jr["params"] = params_json(*r.params);
    if (r.calibration_index) jr["calibration_index"] = *r.calibration_index;
    records.push_back(std::move(jr));
  }

  const std::string hash = records_hash(records);
  const json manifest = {{"format", "clothtrack-dataset"},
                         {"version", 1},
                         {"method", dataset.method},
                         {"num_x", dataset.num_x},
                         {"num_y", dataset.num_y},
                         {"spacing", dataset.spacing},
                         {"code_version", dataset.code_version},
                         {"provenance", dataset.provenance},
                         {"hash", hash},
                         {"records", std::move(records)}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return hash;
}

std::string manifest_hash(const fs::path& dir) {
  try {
    return json::parse(read_text(dir / "manifest.json")).at("hash").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kIo, (dir / "manifest.json").string() + ": " + e.what());
  }
}

PseudoLabelDataset read_dataset(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  json m;
  try {
    m = json::parse(read_text(manifest_path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kIo, manifest_path.string() + ": " + e.what());
  }

  PseudoLabelDataset ds;
  try {
    require(m.value("format", "") == "clothtrack-dataset", ErrorKind::kIo,
            "not a dataset manifest");
    ds.method = m.at("method").get<std::string>();
    ds.num_x = m.at("num_x").get<int>();
    ds.num_y = m.at("num_y").get<int>();
    ds.spacing = m.at("spacing").get<double>();
    ds.code_version = m.at("code_version").get<std::string>();
    ds.provenance = m.at("provenance").get<std::string>();
    const json& records = m.at("records");
    if (records_hash(records) != m.at("hash").get<std::string>())
      throw Error(ErrorKind::kIo, "manifest hash mismatch");

    const ClothMesh mesh = build_grid_cloth(ds.num_x, ds.num_y, ds.spacing);
    auto resolve = [&](const json& jr, const char* key) {
      const fs::path p = dir / jr.at(key).get<std::string>();
      if (!fs::is_regular_file(p))
        throw Error(ErrorKind::kIo, "dangling file reference '" + p.string() + "'");
      return p;
    };
    auto load_mesh = [&](const fs::path& p) {
      MeshFile f = read_obj(p);
      if (f.mesh.num_x() != mesh.num_x() || f.mesh.num_y() != mesh.num_y() ||
          f.mesh.spacing() != mesh.spacing())
        throw Error(ErrorKind::kIo, p.string() + ": grid differs from the manifest");
      return f.state;
    };

    for (const json& jr : records) {
      DatasetRecord r;
      r.trajectory_id = jr.at("trajectory_id").get<int>();
      r.segment_index = jr.at("segment_index").get<int>();
      r.partial = jr.at("partial").get<bool>();
      r.wall_time_seconds = jr.at("wall_time_seconds").get<double>();
      r.observation = read_ply(resolve(jr, "observation"));
      read_depth(resolve(jr, "depth"));
      r.pseudo_mesh = load_mesh(resolve(jr, "mesh"));
      if (jr.contains("pre_tto2_mesh")) r.pre_tto2 = load_mesh(resolve(jr, "pre_tto2_mesh"));
      if (jr.contains("diagnostics")) r.diagnostics = read_diagnostics(resolve(jr, "diagnostics"));
      if (jr.contains("params")) r.params = json_params(jr.at("params"));
      if (jr.contains("calibration_index"))
        r.calibration_index = jr.at("calibration_index").get<std::size_t>();
      ds.records.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kIo, manifest_path.string() + ": " + e.what());
  }
  return ds;
}

}  // namespace clothtrack::io
