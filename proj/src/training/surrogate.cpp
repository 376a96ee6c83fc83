#include "latefuse/training/surrogate.hpp"

#include "latefuse/common/binary_io.hpp"
#include "latefuse/common/error.hpp"
#include "latefuse/operator/weights_io.hpp"

namespace latefuse::train {

using json = nlohmann::ordered_json;

std::string to_string(ModelKind k) { return k == ModelKind::kLateFusion ? "late_fusion" : "baseline"; }

ModelKind parse_model_kind(const std::string& s) {
  if (s == "late_fusion") return ModelKind::kLateFusion;
  if (s == "baseline") return ModelKind::kBaseline;
  throw ConfigError("unknown model kind '" + s + "' (expected late_fusion or baseline)");
}

std::string default_library(pde::EquationFamily family) {
  switch (family) {
    case pde::EquationFamily::kAdvection: return "h0*beta, h1";
    case pde::EquationFamily::kBurgers: return "h0*nu, h1";
    case pde::EquationFamily::kReactionDiffusion1D:
      return "1, h0, h1, h0^2, h1^2, h0*h1, rho*h0^2, rho*h1^2, rho*h0*h1, nu*h0^2, nu*h1^2, nu*h0*h1";
    case pde::EquationFamily::kReactionDiffusion2D: return "1, h0, h1, h2, k, k*h0, k*h1, k*h2";
  }
  return "";
}

std::vector<std::string> ablation_libraries() {
  return {
      "1, h0, h1, beta, beta*h0, beta*h1",
      "1, h0, h1, beta, beta*h0, beta*h1, beta^2, beta^2*h0, beta^2*h1",
      "1, h0, h1, h0^2, h1^2, h0*h1, beta, beta*h0, beta*h1, beta*h0^2, beta*h1^2, beta*h0*h1",
      "1, h0, h1, h0^2, h1^2, h0*h1, beta, beta*h0, beta*h1, beta*h0^2, beta*h1^2, beta*h0*h1, "
      "beta^2, beta^2*h0, beta^2*h1, beta^2*h0^2, beta^2*h1^2, beta^2*h0*h1",
  };
}

Surrogate::Surrogate(const ModelSpec& spec) : spec_(spec) {
  const std::size_t v = pde::state_variables(spec.family);
  const auto names = pde::parameter_names(spec.family);
  op::BackboneConfig cfg;
  cfg.width = spec.width;
  cfg.modes = spec.modes;
  cfg.spatial_dims = pde::spatial_dims(spec.family);
  if (spec.kind == ModelKind::kLateFusion) {
    if (spec_.library.empty()) spec_.library = default_library(spec.family);
    auto library = fusion::parse_library_spec(spec_.library, names);
    spec_.library = fusion::to_string(library);
    cfg.in_channels = v;
    cfg.out_channels = library.hidden_arity;
    model_ = fusion::LateFusionModel(cfg, std::move(library), v, spec.seed);
  } else {
    spec_.library.clear();
    cfg.in_channels = v + names.size();
    cfg.out_channels = v;
    model_ = op::BaselineFno(cfg, v, names.size(), spec.seed);
  }
}

Variable Surrogate::step(const Variable& u, const Tensor& beta) const {
  return std::visit([&](const auto& m) { return m.step(u, beta); }, model_);
}

std::vector<op::NamedParameter> Surrogate::parameters() const {
  return std::visit([](const auto& m) { return m.parameters(); }, model_);
}

Variable Surrogate::xi() const {
  if (const auto* lf = late_fusion()) return lf->xi();
  return {};
}

std::vector<Tensor> Surrogate::snapshot() const {
  std::vector<Tensor> out;
  for (const auto& p : parameters()) out.push_back(p.value.value());
  return out;
}

void Surrogate::restore(const std::vector<Tensor>& values) const {
  const auto params = parameters();
  if (values.size() != params.size()) throw ShapeError("restore: parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Variable v = params[i].value;
    v.set_value(values[i]);
  }
}

json Surrogate::describe() const {
  const auto& backbone = late_fusion() ? late_fusion()->backbone() : baseline()->backbone();
  json j{{"kind", to_string(spec_.kind)},
         {"family", pde::to_string(spec_.family)},
         {"parameter_names", pde::parameter_names(spec_.family)},
         {"state_vars", pde::state_variables(spec_.family)},
         {"width", spec_.width},
         {"modes", spec_.modes},
         {"seed", spec_.seed},
         {"backbone", op::to_json(backbone.config())}};
  if (const auto* lf = late_fusion()) {
    j["library"] = spec_.library;
    j["library_terms"] = lf->library().size();
    j["xi_init"] = "zeros";
  }
  return j;
}

void save_checkpoint(const std::filesystem::path& dir, const Surrogate& model, const json& extra) {
  std::filesystem::create_directories(dir);
  json j{{"format", "latefuse-model"}, {"version", 1}, {"model", model.describe()}};
  for (const auto& [key, value] : extra.items()) j[key] = value;
  j["weights"] = op::write_weights(dir / "weights.bin", model.parameters());
  io::write_text(dir / "model.json", j.dump(2) + "\n");
}

Surrogate load_checkpoint(const std::filesystem::path& dir) {
  json j;
  try {
    j = json::parse(io::read_text(dir / "model.json"));
  } catch (const json::exception& e) {
    throw FormatError("checkpoint: malformed model.json: " + std::string(e.what()));
  }
  try {
    if (j.at("format") != "latefuse-model" || j.at("version") != 1) {
      throw FormatError("checkpoint: unsupported model.json format");
    }
    const auto& m = j.at("model");
    ModelSpec spec;
    spec.kind = parse_model_kind(m.at("kind").get<std::string>());
    spec.family = pde::parse_family(m.at("family").get<std::string>());
    spec.width = m.at("width").get<std::size_t>();
    spec.modes = m.at("modes").get<std::size_t>();
    spec.seed = m.at("seed").get<std::uint64_t>();
    if (spec.kind == ModelKind::kLateFusion) spec.library = m.at("library").get<std::string>();
    Surrogate model(spec);
    op::read_weights(dir / "weights.bin", j.at("weights"), model.parameters());
    return model;
  } catch (const json::exception& e) {
    throw FormatError("checkpoint: incomplete model.json: " + std::string(e.what()));
  }
}

}  // namespace latefuse::train
