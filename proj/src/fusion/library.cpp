#include "latefuse/fusion/library.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <tuple>

#include "latefuse/autodiff/ops.hpp"
#include "latefuse/common/error.hpp"

namespace latefuse::fusion {

namespace {

std::string strip(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::size_t parse_uint(const std::string& s, const std::string& context) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw ConfigError("library: expected a non-negative integer in '" + context + "'");
  }
  if (s.size() > 6) throw ConfigError("library: integer too large in '" + context + "'");
  return static_cast<std::size_t>(std::stoul(s));
}

void canonicalize(LibraryTerm& term) {
  std::map<std::pair<int, std::size_t>, int> hidden;
  for (const auto& f : term.hidden) hidden[{static_cast<int>(f.unary), f.index}] += f.exponent;
  std::map<std::size_t, int> params;
  for (const auto& f : term.params) params[f.index] += f.exponent;
  term.hidden.clear();
  for (const auto& [key, p] : hidden) term.hidden.push_back({key.second, p, static_cast<Unary>(key.first)});
  term.params.clear();
  for (const auto& [k, q] : params) term.params.push_back({k, q});
}

LibraryTerm parse_term(const std::string& text, const std::vector<std::string>& param_names) {
  LibraryTerm term;
  if (text == "1") return term;
  if (text.empty()) throw ConfigError("library: empty term");
  for (const auto& factor : split(text, '*')) {
    if (factor.empty()) throw ConfigError("library: empty factor in '" + text + "'");
    if (factor == "1") throw ConfigError("library: the constant 1 must stand alone, got '" + text + "'");
    std::string base = factor;
    int exponent = 1;
    if (const auto caret = factor.find('^'); caret != std::string::npos) {
      base = factor.substr(0, caret);
      exponent = static_cast<int>(parse_uint(factor.substr(caret + 1), factor));
      if (exponent < 1) throw ConfigError("library: exponent must be >= 1 in '" + factor + "'");
    }
    if (base.rfind("sin(", 0) == 0) {
      if (exponent != 1) throw ConfigError("library: write sin(h<i>)*sin(h<i>) instead of a power in '" + factor + "'");
      if (base.size() < 6 || base.back() != ')' || base[4] != 'h') {
        throw ConfigError("library: sin takes a hidden state, got '" + factor + "'");
      }
      term.hidden.push_back({parse_uint(base.substr(5, base.size() - 6), factor), 1, Unary::kSin});
    } else if (base.size() > 1 && base[0] == 'h' && std::isdigit(static_cast<unsigned char>(base[1]))) {
      term.hidden.push_back({parse_uint(base.substr(1), factor), exponent, Unary::kIdentity});
    } else {
      const auto it = std::find(param_names.begin(), param_names.end(), base);
      if (it == param_names.end()) throw ConfigError("library: unknown symbol '" + base + "'");
      term.params.push_back({static_cast<std::size_t>(it - param_names.begin()), exponent});
    }
  }
  canonicalize(term);
  return term;
}

}  // namespace

int LibraryTerm::param_degree() const {
  int d = 0;
  for (const auto& f : params) d += f.exponent;
  return d;
}

void LibrarySpec::validate() const {
  if (terms.empty()) throw ConfigError("library: at least one term is required");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    for (const auto& f : terms[i].hidden) {
      if (f.index >= hidden_arity) {
        throw ConfigError("library: h" + std::to_string(f.index) + " out of range for " + std::to_string(hidden_arity) +
                          " hidden states");
      }
      if (f.exponent < 1) throw ConfigError("library: exponent must be >= 1");
    }
    for (const auto& f : terms[i].params) {
      if (f.index >= param_names.size()) throw ConfigError("library: parameter index out of range");
      if (f.exponent < 1) throw ConfigError("library: exponent must be >= 1");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (terms[i] == terms[j]) throw ConfigError("library: duplicate term " + to_string(terms[i], param_names));
    }
  }
}

LibrarySpec parse_library_spec(const std::string& text, const std::vector<std::string>& param_names,
                               std::optional<std::size_t> hidden_arity) {
  LibrarySpec spec;
  spec.param_names = param_names;
  const std::string compact = strip(text);
  if (compact.empty()) throw ConfigError("library: empty specification");
  std::size_t max_hidden = 0;
  for (const auto& part : split(compact, ',')) {
    spec.terms.push_back(parse_term(part, param_names));
    for (const auto& f : spec.terms.back().hidden) max_hidden = std::max(max_hidden, f.index + 1);
  }
  spec.hidden_arity = hidden_arity.value_or(std::max<std::size_t>(max_hidden, 1));
  spec.validate();
  return spec;
}

std::string to_string(const LibraryTerm& term, const std::vector<std::string>& param_names) {
  if (term.hidden.empty() && term.params.empty()) return "1";
  std::vector<std::string> factors;
  for (const auto& f : term.params) {
    factors.push_back(param_names.at(f.index) + (f.exponent > 1 ? "^" + std::to_string(f.exponent) : ""));
  }
  for (const auto& f : term.hidden) {
    const std::string h = "h" + std::to_string(f.index);
    if (f.unary == Unary::kSin) {
      for (int i = 0; i < f.exponent; ++i) factors.push_back("sin(" + h + ")");
    } else {
      factors.push_back(h + (f.exponent > 1 ? "^" + std::to_string(f.exponent) : ""));
    }
  }
  std::string out;
  for (std::size_t i = 0; i < factors.size(); ++i) out += (i ? "*" : "") + factors[i];
  return out;
}

std::string to_string(const LibrarySpec& spec) {
  std::string out;
  for (std::size_t i = 0; i < spec.terms.size(); ++i) out += (i ? ", " : "") + to_string(spec.terms[i], spec.param_names);
  return out;
}

Variable evaluate_library(const LibrarySpec& spec, const Variable& h, const Tensor& beta) {
  const Shape& hs = h.shape();
  if (hs.size() < 3 || hs[1] != spec.hidden_arity) {
    throw ShapeError("library: hidden fields " + ad::shape_str(hs) + " do not carry " +
                     std::to_string(spec.hidden_arity) + " states");
  }
  if (beta.rank() != 2 || beta.dim(0) != hs[0] || beta.dim(1) != spec.param_arity()) {
    throw ShapeError("library: beta " + ad::shape_str(beta.shape()) + " does not match batch and parameter arity");
  }
  if (!h.value().all_finite()) throw NonFiniteError("library: non-finite hidden state");
  const std::size_t batch = hs[0];
  Shape one_shape = hs;
  one_shape[1] = 1;

  std::map<std::tuple<int, std::size_t, int>, Variable> cache;
  auto factor_value = [&](const HiddenFactor& f) -> Variable {
    const auto key = std::make_tuple(static_cast<int>(f.unary), f.index, f.exponent);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    Variable v = ad::slice(h, 1, f.index, 1);
    if (f.unary == Unary::kSin) v = ad::sin(v);
    if (f.exponent > 1) v = ad::pow(v, f.exponent);
    cache.emplace(key, v);
    return v;
  };

  std::vector<Variable> columns;
  columns.reserve(spec.terms.size());
  for (const auto& term : spec.terms) {
    Variable col;
    for (const auto& f : term.hidden) col = col.defined() ? ad::mul(col, factor_value(f)) : factor_value(f);
    if (!col.defined()) col = Variable(Tensor(one_shape, 1.0));
    if (term.param_dependent()) {
      Tensor s({batch}, 1.0);
      for (std::size_t b = 0; b < batch; ++b)
        for (const auto& f : term.params) {
          double p = 1.0;
          for (int q = 0; q < f.exponent; ++q) p *= beta[b * spec.param_arity() + f.index];
          s[b] *= p;
        }
      col = ad::scale_per_sample(col, Variable(std::move(s)));
    }
    columns.push_back(col);
  }
  return ad::concat(columns, 1);
}

namespace {

Variable gather_rows(const Variable& t, std::size_t axis, const std::vector<std::size_t>& rows) {
  std::vector<Variable> parts;
  parts.reserve(rows.size());
  for (std::size_t r : rows) parts.push_back(ad::slice(t, axis, r, 1));
  return parts.size() == 1 ? parts[0] : ad::concat(parts, axis);
}

}  // namespace

ResidualParts residual_parts(const LibrarySpec& spec, const Variable& theta, const Variable& xi) {
  const Shape& ts = theta.shape();
  if (ts.size() < 3 || ts[1] != spec.size() || xi.shape().size() != 2 || xi.shape()[0] != spec.size()) {
    throw ShapeError("residual: theta " + ad::shape_str(ts) + " and xi " + ad::shape_str(xi.shape()) +
                     " do not match a " + std::to_string(spec.size()) + "-term library");
  }
  std::vector<std::size_t> dependent, free;
  for (std::size_t t = 0; t < spec.size(); ++t) (spec.terms[t].param_dependent() ? dependent : free).push_back(t);

  Shape out_shape = ts;
  out_shape[1] = xi.shape()[1];
  auto contract = [&](const std::vector<std::size_t>& rows) {
    if (rows.empty()) return Variable(Tensor(out_shape));
    return ad::channel_linear(gather_rows(theta, 1, rows), gather_rows(xi, 0, rows));
  };
  return {contract(dependent), contract(free)};
}

}  // namespace latefuse::fusion
