#include "latefuse/cli/config.hpp"

#include <algorithm>
#include <set>

#include "latefuse/common/error.hpp"

namespace latefuse::cli {

using json = nlohmann::ordered_json;

namespace {

const std::vector<pde::Split> kSplits{pde::Split::kTrain, pde::Split::kInDomainTest, pde::Split::kOutDomainTest};

void reject_unknown(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(where + ": unknown key \"" + key + "\"");
    }
  }
}

template <typename T>
T get(const json& j, const std::string& key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config: bad value for \"" + key + "\": " + e.what());
  }
}

template <typename T, typename Parse>
T get_enum(const json& j, const std::string& key, T fallback, Parse parse) {
  if (!j.contains(key)) return fallback;
  return parse(get<std::string>(j, key, ""));
}

std::vector<pde::ParameterRange> parse_ranges(const json& j, pde::EquationFamily family, const std::string& where) {
  const auto names = pde::parameter_names(family);
  reject_unknown(j, names, where);
  std::vector<pde::ParameterRange> out;
  for (const auto& name : names) {
    if (!j.contains(name)) throw ConfigError(where + ": missing range for \"" + name + "\"");
    const auto pair = get<std::vector<double>>(j, name, {});
    if (pair.size() != 2 || !(pair[0] < pair[1])) throw ConfigError(where + "." + name + ": expected [lo, hi] with lo < hi");
    out.push_back({name, pair[0], pair[1]});
  }
  return out;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{"command", "equation", "preset",    "counts",     "ranges",
                                             "model",   "library",  "width",     "modes",      "train",
                                             "seeds",   "lambdas",  "libraries", "data",       "checkpoint",
                                             "pred",    "split",    "trajectory"};
  return keys;
}

RunConfig parse_config(const json& j, const std::string& command) {
  reject_unknown(j, config_keys(), "config");
  RunConfig c;
  c.command = get<std::string>(j, "command", command);
  if (c.command != command) throw ConfigError("config: recorded for \"" + c.command + "\", not \"" + command + "\"");
  c.equation = get_enum(j, "equation", c.equation, pde::parse_family);
  c.preset = get_enum(j, "preset", c.preset, pde::parse_preset);
  const bool desk = c.preset == pde::Preset::kDesk;
  const bool two_d = pde::spatial_dims(c.equation) == 2;

  c.counts = pde::default_counts(c.preset);
  if (j.contains("counts")) {
    const auto& cj = j.at("counts");
    reject_unknown(cj, {"train", "in_domain_test", "out_domain_test"}, "counts");
    c.counts.train = get(cj, "train", c.counts.train);
    c.counts.in_domain_test = get(cj, "in_domain_test", c.counts.in_domain_test);
    c.counts.out_domain_test = get(cj, "out_domain_test", c.counts.out_domain_test);
  }
  for (auto s : kSplits) c.ranges[s] = pde::default_ranges(c.equation, s);
  if (j.contains("ranges")) {
    const auto& rj = j.at("ranges");
    reject_unknown(rj, {"train", "in_domain_test", "out_domain_test"}, "ranges");
    for (auto s : kSplits) {
      const auto key = pde::to_string(s);
      if (rj.contains(key)) c.ranges[s] = parse_ranges(rj.at(key), c.equation, "ranges." + key);
    }
  }

  c.model = get_enum(j, "model", c.model, train::parse_model_kind);
  c.library = get<std::string>(j, "library", train::default_library(c.equation));
  c.width = get<std::size_t>(j, "width", desk ? 16 : (two_d ? 32 : 64));
  c.modes = get<std::size_t>(j, "modes", desk ? 8 : (two_d ? 12 : 16));
  if (c.width == 0 || c.modes == 0) throw ConfigError("config: width and modes must be positive");

  // Desk runs are 50 epochs; both presets halve the rate halfway.
  c.train.epochs = desk ? 50 : 100;
  if (j.contains("train")) {
    const auto& tj = j.at("train");
    reject_unknown(tj,
                   {"epochs", "initial_lr", "lr_halving_epoch", "batch_size", "lambda_sparse", "validation_fraction"},
                   "train");
    c.train.epochs = get(tj, "epochs", c.train.epochs);
    c.train.lr_halving_epoch = get(tj, "lr_halving_epoch", c.train.epochs / 2);
    c.train.initial_lr = get(tj, "initial_lr", c.train.initial_lr);
    c.train.batch_size = get(tj, "batch_size", c.train.batch_size);
    c.train.lambda_sparse = get(tj, "lambda_sparse", c.train.lambda_sparse);
    c.train.validation_fraction = get(tj, "validation_fraction", c.train.validation_fraction);
  } else {
    c.train.lr_halving_epoch = c.train.epochs / 2;
  }
  c.train.validate();

  const bool ablate = command == "ablate";
  c.seeds = get<std::vector<std::uint64_t>>(j, "seeds", ablate ? std::vector<std::uint64_t>{0, 1, 2}
                                                                : std::vector<std::uint64_t>{0});
  if (c.seeds.empty()) throw ConfigError("config: seeds must not be empty");
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size()) {
    throw ConfigError("config: duplicate seeds");
  }
  c.lambdas = get<std::vector<double>>(j, "lambdas", ablate ? std::vector<double>{1e-2, 1e-3, 1e-4}
                                                             : std::vector<double>{});
  for (double l : c.lambdas) {
    if (!(l >= 0.0)) throw ConfigError("config: lambdas must be >= 0");
  }
  if (ablate && c.lambdas.empty()) throw ConfigError("config: ablate needs at least one lambda");
  c.libraries = get<std::vector<std::string>>(j, "libraries", ablate ? train::ablation_libraries()
                                                                     : std::vector<std::string>{});
  c.data = get<std::string>(j, "data", "");
  c.checkpoint = get<std::string>(j, "checkpoint", "");
  c.pred = get<std::string>(j, "pred", "");
  c.split = get_enum(j, "split", c.split, pde::parse_split);
  c.trajectory = get<std::size_t>(j, "trajectory", 0);

  // Surface DSL errors before any work starts.
  const auto params = pde::parameter_names(c.equation);
  if (c.model == train::ModelKind::kLateFusion) fusion::parse_library_spec(c.library, params);
  for (const auto& lib : c.libraries) fusion::parse_library_spec(lib, params);
  return c;
}

json to_json(const RunConfig& c) {
  json ranges = json::object();
  for (auto s : kSplits) {
    json r = json::object();
    for (const auto& p : c.ranges.at(s)) r[p.name] = {p.lo, p.hi};
    ranges[pde::to_string(s)] = r;
  }
  return json{{"command", c.command},
              {"equation", pde::to_string(c.equation)},
              {"preset", pde::to_string(c.preset)},
              {"counts",
               {{"train", c.counts.train},
                {"in_domain_test", c.counts.in_domain_test},
                {"out_domain_test", c.counts.out_domain_test}}},
              {"ranges", ranges},
              {"model", train::to_string(c.model)},
              {"library", c.library},
              {"width", c.width},
              {"modes", c.modes},
              {"train",
               {{"epochs", c.train.epochs},
                {"initial_lr", c.train.initial_lr},
                {"lr_halving_epoch", c.train.lr_halving_epoch},
                {"batch_size", c.train.batch_size},
                {"lambda_sparse", c.train.lambda_sparse},
                {"validation_fraction", c.train.validation_fraction}}},
              {"seeds", c.seeds},
              {"lambdas", c.lambdas},
              {"libraries", c.libraries},
              {"data", c.data},
              {"checkpoint", c.checkpoint},
              {"pred", c.pred},
              {"split", pde::to_string(c.split)},
              {"trajectory", c.trajectory}};
}

train::ModelSpec RunConfig::model_spec(std::uint64_t seed) const {
  train::ModelSpec s;
  s.kind = model;
  s.family = equation;
  s.width = width;
  s.modes = modes;
  s.library = library;
  s.seed = seed;
  return s;
}

train::TrainConfig RunConfig::train_config(std::uint64_t seed) const {
  train::TrainConfig t = train;
  t.seed = seed;
  return t;
}

}  // namespace latefuse::cli
