#include "latefuse/pde/dataset.hpp"

#include <cmath>
#include <random>

#include "json.hpp"

#include "latefuse/common/binary_io.hpp"
#include "latefuse/common/error.hpp"
#include "latefuse/common/parallel.hpp"

namespace latefuse::pde {

namespace {

using json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

double to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

void validate_ranges(EquationFamily family, const std::vector<ParameterRange>& ranges) {
  const auto names = parameter_names(family);
  if (ranges.size() != names.size()) {
    throw ConfigError("dataset: " + to_string(family) + " needs " + std::to_string(names.size()) +
                      " parameter ranges");
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (ranges[i].name != names[i]) {
      throw ConfigError("dataset: range " + std::to_string(i) + " is '" + ranges[i].name + "', expected '" +
                        names[i] + "'");
    }
    if (!(ranges[i].hi > ranges[i].lo) || !std::isfinite(ranges[i].lo) || !std::isfinite(ranges[i].hi)) {
      throw ConfigError("dataset: empty or inverted range for " + names[i]);
    }
  }
}

// Uniform on the open interval, representable in float32.
double sample_open(std::mt19937_64& rng, const ParameterRange& r) {
  std::uniform_real_distribution<double> dist(r.lo, r.hi);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double v = to_f32(dist(rng));
    if (v > r.lo && v < r.hi) return v;
  }
  throw ConfigError("dataset: range for " + r.name + " is too narrow for float32");
}

Trajectory generate_one(const GenerateOptions& opts, const std::vector<ParameterRange>& ranges,
                        std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(opts.seed & 0xffffffffu), static_cast<std::uint32_t>(opts.seed >> 32),
                    static_cast<std::uint32_t>(opts.split), static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  std::vector<double> params;
  params.reserve(ranges.size());
  for (const auto& r : ranges) params.push_back(sample_open(rng, r));

  InitialConditionSpec ic = opts.initial_condition;
  ic.seed = rng();
  InitialState initial = sample_family_initial_condition(opts.family, ic, opts.grid);
  for (auto& v : initial.field.data()) v = to_f32(v);

  const EquationSpec eq = make_equation(opts.family, params);
  GridSpec solver_grid = opts.grid;
  solver_grid.internal_substeps =
      std::max(opts.grid.internal_substeps, stable_substeps(eq, opts.grid, initial.field));
  Trajectory traj = solve_trajectory(eq, solver_grid, initial);
  traj.grid = opts.grid;
  for (auto& v : traj.states.data()) v = to_f32(v);
  return traj;
}

json grid_to_json(const GridSpec& g) {
  json bounds = json::array();
  for (const auto& [a, b] : g.bounds) bounds.push_back({a, b});
  return json{{"spatial_dims", g.spatial_dims}, {"points", g.points},         {"bounds", bounds},
              {"snapshot_dt", g.snapshot_dt},   {"horizon", g.horizon},       {"internal_substeps", g.internal_substeps}};
}

GridSpec grid_from_json(const json& j) {
  GridSpec g;
  g.spatial_dims = j.at("spatial_dims").get<std::size_t>();
  g.points = j.at("points").get<std::vector<std::size_t>>();
  g.bounds.clear();
  for (const auto& b : j.at("bounds")) g.bounds.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
  g.snapshot_dt = j.at("snapshot_dt").get<double>();
  g.horizon = j.at("horizon").get<double>();
  g.internal_substeps = j.at("internal_substeps").get<std::size_t>();
  return g;
}

json manifest_to_json(const DatasetManifest& m, const std::string& params_crc, const std::string& states_crc) {
  json ranges = json::array();
  for (const auto& r : m.ranges) ranges.push_back({{"name", r.name}, {"lo", r.lo}, {"hi", r.hi}});
  const auto& ic = m.initial_condition;
  json j;
  j["schema_version"] = m.schema_version;
  j["family"] = to_string(m.family);
  j["boundary"] = to_string(m.boundary);
  j["split"] = to_string(m.split);
  j["grid"] = grid_to_json(m.grid);
  j["ranges"] = ranges;
  j["count"] = m.count;
  j["seed"] = m.seed;
  j["initial_condition"] = {{"kind", initial_condition_kind(m.family)},
                            {"num_waves", ic.num_waves},
                            {"max_wavenumber", ic.max_wavenumber},
                            {"amplitude", {ic.amplitude_lo, ic.amplitude_hi}},
                            {"phase", {ic.phase_lo, ic.phase_hi}}};
  j["dtype"] = m.dtype;
  j["parameter_names"] = parameter_names(m.family);
  j["arrays"] = {{"params.bin", {{"shape", m.params_shape()}, {"crc32", params_crc}}},
                 {"states.bin", {{"shape", m.states_shape()}, {"crc32", states_crc}}}};
  return j;
}

DatasetManifest manifest_from_json(const json& j) {
  DatasetManifest m;
  m.schema_version = j.at("schema_version").get<int>();
  if (m.schema_version != kSchemaVersion) {
    throw FormatError("dataset: unsupported schema_version " + std::to_string(m.schema_version));
  }
  m.family = parse_family(j.at("family").get<std::string>());
  m.boundary = parse_boundary(j.at("boundary").get<std::string>());
  m.split = parse_split(j.at("split").get<std::string>());
  m.grid = grid_from_json(j.at("grid"));
  for (const auto& r : j.at("ranges")) {
    m.ranges.push_back({r.at("name").get<std::string>(), r.at("lo").get<double>(), r.at("hi").get<double>()});
  }
  m.count = j.at("count").get<std::size_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
  const auto& ic = j.at("initial_condition");
  m.initial_condition.num_waves = ic.at("num_waves").get<int>();
  m.initial_condition.max_wavenumber = ic.at("max_wavenumber").get<int>();
  m.initial_condition.amplitude_lo = ic.at("amplitude").at(0).get<double>();
  m.initial_condition.amplitude_hi = ic.at("amplitude").at(1).get<double>();
  m.initial_condition.phase_lo = ic.at("phase").at(0).get<double>();
  m.initial_condition.phase_hi = ic.at("phase").at(1).get<double>();
  m.dtype = j.at("dtype").get<std::string>();
  if (m.dtype != "float32") throw FormatError("dataset: unsupported dtype " + m.dtype);
  return m;
}

std::vector<double> checked_array(const std::filesystem::path& path, const json& entry, const ad::Shape& expected) {
  const auto bytes = io::read_file(path);
  if (io::crc32_hex(bytes) != entry.at("crc32").get<std::string>()) {
    throw ChecksumError("dataset: checksum mismatch in " + path.string());
  }
  if (entry.at("shape").get<ad::Shape>() != expected) {
    throw FormatError("dataset: " + path.filename().string() + " shape disagrees with the manifest grid");
  }
  if (bytes.size() != ad::shape_numel(expected) * sizeof(float)) {
    throw FormatError("dataset: " + path.filename().string() + " has the wrong byte length");
  }
  return io::decode_f32(bytes);
}

}  // namespace

std::string initial_condition_kind(EquationFamily family) {
  switch (family) {
    case EquationFamily::kAdvection:
    case EquationFamily::kBurgers: return "sinusoid_sum";
    case EquationFamily::kReactionDiffusion1D: return "sinusoid_sum_minmax_unit";
    case EquationFamily::kReactionDiffusion2D: return "standard_normal_noise";
  }
  return "unknown";
}

ad::Shape DatasetManifest::params_shape() const { return {count, parameter_names(family).size()}; }

ad::Shape DatasetManifest::states_shape() const {
  ad::Shape s{count, grid.num_snapshots(), state_variables(family)};
  s.insert(s.end(), grid.points.begin(), grid.points.end());
  return s;
}

Dataset generate_dataset(const GenerateOptions& opts) {
  opts.grid.validate();
  opts.initial_condition.validate();
  if (opts.grid.spatial_dims != spatial_dims(opts.family)) {
    throw ConfigError("dataset: grid dimensionality does not match " + to_string(opts.family));
  }
  const auto ranges = opts.ranges.empty() ? default_ranges(opts.family, opts.split) : opts.ranges;
  validate_ranges(opts.family, ranges);

  Dataset ds;
  auto& m = ds.manifest;
  m.family = opts.family;
  m.boundary = default_boundary(opts.family);
  m.split = opts.split;
  m.grid = opts.grid;
  m.ranges = ranges;
  m.count = opts.count;
  m.seed = opts.seed;
  m.initial_condition = opts.initial_condition;
  m.initial_condition.seed = 0;

  ds.trajectories.resize(opts.count);
  parallel_for(opts.count, [&](std::size_t i) { ds.trajectories[i] = generate_one(opts, ranges, i); });
  return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  const auto& m = ds.manifest;
  if (ds.trajectories.size() != m.count) throw ShapeError("dataset: trajectory count disagrees with manifest");
  const auto ps = m.params_shape();
  const auto ss = m.states_shape();
  const std::size_t per_traj = ad::shape_numel(ss) / std::max<std::size_t>(1, m.count);
  std::vector<double> params, states;
  params.reserve(ad::shape_numel(ps));
  states.reserve(ad::shape_numel(ss));
  for (const auto& t : ds.trajectories) {
    if (t.params.size() != ps[1] || t.states.numel() != per_traj) {
      throw ShapeError("dataset: trajectory shape disagrees with manifest");
    }
    params.insert(params.end(), t.params.begin(), t.params.end());
    states.insert(states.end(), t.states.data().begin(), t.states.data().end());
  }
  const auto params_bytes = io::encode_f32(params);
  const auto states_bytes = io::encode_f32(states);
  std::filesystem::create_directories(dir);
  io::write_file(dir / "params.bin", params_bytes);
  io::write_file(dir / "states.bin", states_bytes);
  io::write_text(dir / "manifest.json",
                 manifest_to_json(m, io::crc32_hex(params_bytes), io::crc32_hex(states_bytes)).dump(2) + "\n");
}

Dataset read_dataset(const std::filesystem::path& dir) {
  json j;
  try {
    j = json::parse(io::read_text(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw FormatError("dataset: malformed manifest.json: " + std::string(e.what()));
  }
  Dataset ds;
  try {
    ds.manifest = manifest_from_json(j);
  } catch (const json::exception& e) {
    throw FormatError("dataset: incomplete manifest.json: " + std::string(e.what()));
  }
  const auto& m = ds.manifest;
  m.grid.validate();
  const auto& arrays = j.at("arrays");
  const auto params = checked_array(dir / "params.bin", arrays.at("params.bin"), m.params_shape());
  const auto states = checked_array(dir / "states.bin", arrays.at("states.bin"), m.states_shape());

  const ad::Shape all_shape = m.states_shape();
  const ad::Shape traj_shape(all_shape.begin() + 1, all_shape.end());
  const std::size_t per_traj = ad::shape_numel(traj_shape);
  const std::size_t p = m.params_shape()[1];
  ds.trajectories.resize(m.count);
  for (std::size_t i = 0; i < m.count; ++i) {
    auto& t = ds.trajectories[i];
    t.params.assign(params.begin() + i * p, params.begin() + (i + 1) * p);
    t.states = Tensor(traj_shape, std::vector<double>(states.begin() + i * per_traj, states.begin() + (i + 1) * per_traj));
    t.equation = make_equation(m.family, t.params);
    t.grid = m.grid;
  }
  return ds;
}

}  // namespace latefuse::pde
