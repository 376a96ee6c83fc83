#pragma once

#include <optional>
#include <string>
#include <vector>

#include "latefuse/autodiff/variable.hpp"

namespace latefuse::fusion {

using ad::Shape;
using ad::Tensor;
using ad::Variable;

enum class Unary { kIdentity, kSin };

struct HiddenFactor {
  std::size_t index = 0;
  int exponent = 1;
  Unary unary = Unary::kIdentity;
  friend bool operator==(const HiddenFactor&, const HiddenFactor&) = default;
};

struct ParamFactor {
  std::size_t index = 0;
  int exponent = 1;
  friend bool operator==(const ParamFactor&, const ParamFactor&) = default;
};

/// Product of hidden and parameter factors; no factors means the constant 1.
/// Factors are kept merged and sorted, so equal products compare equal.
struct LibraryTerm {
  std::vector<HiddenFactor> hidden;
  std::vector<ParamFactor> params;

  bool param_dependent() const { return !params.empty(); }
  int param_degree() const;
  friend bool operator==(const LibraryTerm&, const LibraryTerm&) = default;
};

struct LibrarySpec {
  std::vector<LibraryTerm> terms;
  std::size_t hidden_arity = 0;
  std::vector<std::string> param_names;

  std::size_t size() const { return terms.size(); }
  std::size_t param_arity() const { return param_names.size(); }
  void validate() const;
  friend bool operator==(const LibrarySpec&, const LibrarySpec&) = default;
};

/// Parses the term DSL, e.g. "1, h0, rho*h0^2, sin(h1)". Parameter names
/// come from the equation family. When `hidden_arity` is not given it is
/// one past the largest hidden index used. Throws ConfigError on unknown
/// symbols, out-of-range indices, zero exponents and duplicate terms.
LibrarySpec parse_library_spec(const std::string& text, const std::vector<std::string>& param_names,
                               std::optional<std::size_t> hidden_arity = std::nullopt);

/// Canonical text; parse_library_spec(to_string(s), ...) == s.
std::string to_string(const LibrarySpec& spec);
std::string to_string(const LibraryTerm& term, const std::vector<std::string>& param_names);

/// Theta [B, |terms|, S...] from hidden fields h [B, H, S...] and beta [B, P].
/// Differentiable in h; beta enters as data.
Variable evaluate_library(const LibrarySpec& spec, const Variable& h, const Tensor& beta);

/// Contraction of Theta with xi [|terms|, V] restricted to the
/// parameter-dependent and the parameter-free terms. Their sum is the
/// state increment used by the model, bit for bit.
struct ResidualParts {
  Variable param_dependent;  // [B, V, S...]
  Variable param_free;       // [B, V, S...]
};
ResidualParts residual_parts(const LibrarySpec& spec, const Variable& theta, const Variable& xi);

}  // namespace latefuse::fusion
