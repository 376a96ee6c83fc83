#include "latefuse/evaluation/interpret.hpp"

#include <cmath>

#include "latefuse/common/binary_io.hpp"
#include "latefuse/common/error.hpp"

namespace latefuse::eval {

using json = nlohmann::ordered_json;
using ad::Variable;

namespace {

// Wraps (periodic) or mirrors (cell-centred no-flow) an out-of-range index.
std::size_t ghost(std::ptrdiff_t i, std::size_t n, pde::Boundary boundary) {
  const auto sn = static_cast<std::ptrdiff_t>(n);
  if (boundary == pde::Boundary::kPeriodic) return static_cast<std::size_t>(((i % sn) + sn) % sn);
  while (i < 0 || i >= sn) i = i < 0 ? -1 - i : 2 * sn - 1 - i;
  return static_cast<std::size_t>(i);
}

Tensor drop_batch(const Tensor& t) {
  ad::Shape s(t.shape().begin() + 1, t.shape().end());
  return t.reshaped(s);
}

}  // namespace

Tensor central_difference(const Tensor& f, std::size_t axis, int order, double spacing, pde::Boundary boundary) {
  if (f.rank() < 2 || axis + 1 >= f.rank()) throw ShapeError("central_difference: axis out of range");
  if (order != 1 && order != 2) throw ConfigError("central_difference: order must be 1 or 2");
  const std::size_t n = f.dim(axis + 1);
  std::size_t inner = 1;
  for (std::size_t d = axis + 2; d < f.rank(); ++d) inner *= f.dim(d);
  const std::size_t outer = f.numel() / (n * inner);
  const bool fourth = boundary == pde::Boundary::kPeriodic;
  if (n < (fourth ? 5u : 3u)) throw ShapeError("central_difference: too few points");

  Tensor out(f.shape());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t k = 0; k < inner; ++k) {
      auto at = [&](std::ptrdiff_t i) { return f[(o * n + ghost(i, n, boundary)) * inner + k]; };
      for (std::size_t j = 0; j < n; ++j) {
        const auto i = static_cast<std::ptrdiff_t>(j);
        double v;
        if (fourth && order == 1) {
          v = (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * spacing);
        } else if (fourth) {
          v = (-at(i + 2) + 16.0 * at(i + 1) - 30.0 * at(i) + 16.0 * at(i - 1) - at(i - 2)) /
              (12.0 * spacing * spacing);
        } else if (order == 1) {
          v = (at(i + 1) - at(i - 1)) / (2.0 * spacing);
        } else {
          v = (at(i + 1) - 2.0 * at(i) + at(i - 1)) / (spacing * spacing);
        }
        out[(o * n + j) * inner + k] = v;
      }
    }
  }
  return out;
}

std::vector<NamedField> reference_derivatives(const Tensor& u, const pde::GridSpec& grid, pde::Boundary boundary) {
  if (u.rank() != grid.spatial_dims + 1) throw ShapeError("reference_derivatives: state rank does not match grid");
  if (grid.spatial_dims == 1) {
    return {{"dx", central_difference(u, 0, 1, grid.spacing(0), boundary)},
            {"dxx", central_difference(u, 0, 2, grid.spacing(0), boundary)}};
  }
  Tensor lap = central_difference(u, 0, 2, grid.spacing(0), boundary);
  const Tensor dyy = central_difference(u, 1, 2, grid.spacing(1), boundary);
  for (std::size_t i = 0; i < lap.numel(); ++i) lap[i] += dyy[i];
  return {{"dx", central_difference(u, 0, 1, grid.spacing(0), boundary)},
          {"dy", central_difference(u, 1, 1, grid.spacing(1), boundary)},
          {"laplacian", std::move(lap)}};
}

InterpretDump interpret(const fusion::LateFusionModel& model, const Tensor& u0, std::span<const double> beta,
                        const pde::GridSpec& grid, pde::Boundary boundary) {
  ad::NoGradGuard no_grad;
  ad::Shape batched{1};
  batched.insert(batched.end(), u0.shape().begin(), u0.shape().end());
  const Tensor b({1, beta.size()}, std::vector<double>(beta.begin(), beta.end()));
  const auto f = model.forward(Variable(u0.reshaped(batched)), b);

  InterpretDump d;
  d.u0 = u0;
  d.beta.assign(beta.begin(), beta.end());
  d.hidden = drop_batch(f.hidden.value());
  d.theta = drop_batch(f.theta.value());
  d.xi = model.xi().value();
  d.param_dependent = drop_batch(f.parts.param_dependent.value());
  d.param_free = drop_batch(f.parts.param_free.value());
  // Parts with no terms come back as scalar zeros; expand them to fields.
  if (d.param_dependent.shape() != u0.shape()) d.param_dependent = Tensor(u0.shape());
  if (d.param_free.shape() != u0.shape()) d.param_free = Tensor(u0.shape());
  d.references = reference_derivatives(u0, grid, boundary);
  d.library = fusion::to_string(model.library());
  return d;
}

void write_interpret_dump(const std::filesystem::path& dir, const InterpretDump& dump) {
  std::filesystem::create_directories(dir);
  json arrays = json::array();
  auto put = [&](const std::string& name, const Tensor& t) {
    const auto bytes = io::encode_f64(t.data());
    const std::string file = name + ".f64";
    io::write_file(dir / file, bytes);
    arrays.push_back({{"name", name}, {"file", file}, {"shape", t.shape()}, {"crc32", io::crc32_hex(bytes)}});
  };
  put("u0", dump.u0);
  put("hidden", dump.hidden);
  put("theta", dump.theta);
  put("xi", dump.xi);
  put("param_dependent", dump.param_dependent);
  put("param_free", dump.param_free);
  for (const auto& r : dump.references) put("reference_" + r.name, r.field);
  json index{{"format", "latefuse-interpret"},
             {"version", 1},
             {"dtype", "float64"},
             {"byte_order", "little"},
             {"library", dump.library},
             {"beta", dump.beta},
             {"arrays", arrays}};
  io::write_text(dir / "index.json", index.dump(2) + "\n");
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw ShapeError("pearson: size mismatch");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

json InterpretabilitySummary::to_json() const {
  return json{{"mean_abs_pearson", mean_abs_pearson}, {"rms_ratio", rms_ratio}, {"states", states}};
}

InterpretabilitySummary advection_interpretability(const fusion::LateFusionModel& model, const pde::Dataset& ds) {
  const auto& grid = ds.manifest.grid;
  if (grid.spatial_dims != 1) throw ConfigError("interpretability: needs a 1D dataset");
  ad::NoGradGuard no_grad;
  InterpretabilitySummary s;
  double corr_sum = 0.0, free_sq = 0.0, dep_sq = 0.0;
  for (const auto& traj : ds.trajectories) {
    const Tensor& states = traj.states;  // [T+1, V, X]
    if (states.dim(1) != 1) throw ConfigError("interpretability: needs a single state variable");
    const std::size_t steps = states.dim(0) - 1, x = states.dim(2);
    if (steps == 0) continue;
    const Tensor inputs({steps, 1, x}, std::vector<double>(states.data().begin(), states.data().begin() + steps * x));
    Tensor beta({steps, traj.params.size()});
    for (std::size_t t = 0; t < steps; ++t) {
      std::copy(traj.params.begin(), traj.params.end(), beta.data().begin() + t * traj.params.size());
    }
    const auto f = model.forward(Variable(inputs), beta);
    const Tensor dep = f.parts.param_dependent.value();
    const Tensor fre = f.parts.param_free.value();
    const bool dep_field = dep.numel() == inputs.numel(), free_field = fre.numel() == inputs.numel();
    for (std::size_t t = 0; t < steps; ++t) {
      const Tensor u = Tensor({1, x}, std::vector<double>(inputs.data().begin() + t * x, inputs.data().begin() + (t + 1) * x));
      Tensor minus_dx = central_difference(u, 0, 1, grid.spacing(0), ds.manifest.boundary);
      for (auto& v : minus_dx.data()) v = -v;
      std::vector<double> d(x, 0.0), r(x, 0.0);
      if (dep_field) std::copy_n(dep.data().begin() + t * x, x, d.begin());
      if (free_field) std::copy_n(fre.data().begin() + t * x, x, r.begin());
      for (std::size_t i = 0; i < x; ++i) {
        dep_sq += d[i] * d[i];
        free_sq += r[i] * r[i];
      }
      const double c = pearson(d, minus_dx.data());
      if (c != 0.0) {
        corr_sum += std::abs(c);
        ++s.states;
      }
    }
  }
  s.mean_abs_pearson = s.states ? corr_sum / static_cast<double>(s.states) : 0.0;
  s.rms_ratio = dep_sq > 0.0 ? std::sqrt(free_sq / dep_sq) : (free_sq > 0.0 ? INFINITY : 0.0);
  return s;
}

}  // namespace latefuse::eval
