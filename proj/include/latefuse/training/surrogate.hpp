#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "json.hpp"
#include "latefuse/fusion/model.hpp"
#include "latefuse/operator/baseline.hpp"
#include "latefuse/pde/equation.hpp"

namespace latefuse::train {

using ad::Tensor;
using ad::Variable;

enum class ModelKind { kLateFusion, kBaseline };
std::string to_string(ModelKind k);
ModelKind parse_model_kind(const std::string& s);

/// Everything needed to build an untrained model.
struct ModelSpec {
  ModelKind kind = ModelKind::kLateFusion;
  pde::EquationFamily family = pde::EquationFamily::kAdvection;
  std::size_t width = 16;
  std::size_t modes = 8;
  std::string library;  // late fusion only; empty = default_library(family)
  std::uint64_t seed = 0;
};

/// Libraries from the benchmark table.
std::string default_library(pde::EquationFamily family);
/// The four advection libraries of increasing complexity (6, 9, 12, 18 terms).
std::vector<std::string> ablation_libraries();

/// A trained or untrained single-step surrogate of either kind.
class Surrogate {
 public:
  Surrogate() = default;
  explicit Surrogate(const ModelSpec& spec);

  const ModelSpec& spec() const { return spec_; }
  ModelKind kind() const { return spec_.kind; }

  /// u [B, V, S...], beta [B, P] -> u_next [B, V, S...].
  Variable step(const Variable& u, const Tensor& beta) const;

  std::vector<op::NamedParameter> parameters() const;
  /// xi for late fusion, undefined for the baseline.
  Variable xi() const;

  const fusion::LateFusionModel* late_fusion() const { return std::get_if<fusion::LateFusionModel>(&model_); }
  const op::BaselineFno* baseline() const { return std::get_if<op::BaselineFno>(&model_); }

  /// Deep copy of the current parameter values (order of parameters()).
  std::vector<Tensor> snapshot() const;
  void restore(const std::vector<Tensor>& values) const;

  /// Architecture description written into model.json.
  nlohmann::ordered_json describe() const;

 private:
  ModelSpec spec_;
  std::variant<fusion::LateFusionModel, op::BaselineFno> model_;
};

/// model.json (architecture, `extra` such as the training config, weight
/// index) + weights.bin.
void save_checkpoint(const std::filesystem::path& dir, const Surrogate& model, const nlohmann::ordered_json& extra);
Surrogate load_checkpoint(const std::filesystem::path& dir);

}  // namespace latefuse::train
