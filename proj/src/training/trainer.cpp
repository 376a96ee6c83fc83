#include "latefuse/training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "latefuse/autodiff/ops.hpp"
#include "latefuse/common/parallel.hpp"

namespace latefuse::train {

using json = nlohmann::ordered_json;

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (!(initial_lr > 0.0)) throw ConfigError("train: initial_lr must be > 0");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(lambda_sparse >= 0.0) || !std::isfinite(lambda_sparse)) throw ConfigError("train: lambda_sparse must be >= 0");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("train: validation_fraction must lie in [0, 1)");
  }
}

json to_json(const TrainConfig& c) {
  return json{{"epochs", c.epochs},
              {"initial_lr", c.initial_lr},
              {"lr_halving_epoch", c.lr_halving_epoch},
              {"batch_size", c.batch_size},
              {"lambda_sparse", c.lambda_sparse},
              {"validation_fraction", c.validation_fraction},
              {"validation_split", "by_trajectory"},
              {"best_epoch_selection", "validation_data_loss"},
              {"seed", c.seed},
              {"optimizer", {{"name", "adam"}, {"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"epsilon", c.adam.epsilon}}}};
}

double scheduled_learning_rate(const TrainConfig& c, std::size_t epoch) {
  return epoch < c.lr_halving_epoch ? c.initial_lr : 0.5 * c.initial_lr;
}

LossTerms compute_loss(const Variable& pred, const Tensor& truth, const Variable& xi, double lambda_sparse) {
  if (pred.shape() != truth.shape()) {
    throw ShapeError("loss: prediction " + ad::shape_str(pred.shape()) + " vs target " + ad::shape_str(truth.shape()));
  }
  if (!pred.value().all_finite() || !truth.all_finite()) throw NonFiniteError("loss: non-finite prediction or target");
  LossTerms out;
  out.data = ad::mean(ad::pow(ad::sub(pred, Variable(truth)), 2));
  if (xi.defined()) {
    if (!xi.value().all_finite()) throw NonFiniteError("loss: non-finite xi");
    out.sparse = ad::sum_abs(xi);
    out.total = ad::add(out.data, ad::scale(out.sparse, lambda_sparse));
  } else {
    out.sparse = Variable(Tensor::scalar(0.0));
    out.total = out.data;
  }
  return out;
}

std::vector<TransitionPair> make_transition_pairs(const pde::Dataset& ds, std::span<const std::size_t> trajectories) {
  if (ds.trajectories.empty()) throw ConfigError("transition pairs: dataset is empty");
  std::vector<std::size_t> all;
  if (trajectories.empty()) {
    all.resize(ds.trajectories.size());
    std::iota(all.begin(), all.end(), 0);
    trajectories = all;
  }
  std::vector<TransitionPair> pairs;
  for (std::size_t i : trajectories) {
    if (i >= ds.trajectories.size()) throw ConfigError("transition pairs: trajectory index out of range");
    const std::size_t snapshots = ds.trajectories[i].states.dim(0);
    if (snapshots < 2) throw ConfigError("transition pairs: trajectory " + std::to_string(i) + " has < 2 snapshots");
    for (std::size_t t = 0; t + 1 < snapshots; ++t) pairs.push_back({i, t});
  }
  return pairs;
}

Batch gather_batch(const pde::Dataset& ds, std::span<const TransitionPair> pairs) {
  if (pairs.empty()) throw ShapeError("batch: no pairs");
  const auto& first = ds.trajectories.at(pairs[0].trajectory).states;
  const ad::Shape frame(first.shape().begin() + 1, first.shape().end());
  const std::size_t frame_size = ad::shape_numel(frame);
  const std::size_t p = ds.trajectories[pairs[0].trajectory].params.size();
  ad::Shape shape{pairs.size()};
  shape.insert(shape.end(), frame.begin(), frame.end());
  Batch b{Tensor(shape), Tensor(shape), Tensor({pairs.size(), p})};
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& traj = ds.trajectories.at(pairs[i].trajectory);
    const auto src = traj.states.data();
    std::copy_n(src.begin() + pairs[i].step * frame_size, frame_size, b.u.data().begin() + i * frame_size);
    std::copy_n(src.begin() + (pairs[i].step + 1) * frame_size, frame_size, b.target.data().begin() + i * frame_size);
    std::copy(traj.params.begin(), traj.params.end(), b.beta.data().begin() + i * p);
  }
  return b;
}

std::vector<std::size_t> validation_trajectories(std::size_t count, double fraction, std::uint64_t seed) {
  const auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(count)));
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed ^ 0x5bd1e995u);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(n_val, count));
  std::sort(order.begin(), order.end());
  return order;
}

double validation_data_loss(const Surrogate& model, const pde::Dataset& ds, std::span<const TransitionPair> pairs,
                            std::size_t batch_size) {
  ad::NoGradGuard guard;
  double sum = 0.0;
  std::size_t entries = 0;
  for (std::size_t start = 0; start < pairs.size(); start += batch_size) {
    const auto chunk = pairs.subspan(start, std::min(batch_size, pairs.size() - start));
    const Batch b = gather_batch(ds, chunk);
    const Tensor pred = model.step(Variable(b.u), b.beta).value();
    for (std::size_t i = 0; i < pred.numel(); ++i) {
      const double d = pred[i] - b.target[i];
      sum += d * d;
    }
    entries += pred.numel();
  }
  return entries ? sum / static_cast<double>(entries) : 0.0;
}

json TrainReport::to_json() const {
  json epochs_json = json::array();
  for (const auto& e : epochs) {
    json row{{"epoch", e.epoch},
             {"learning_rate", e.learning_rate},
             {"train_loss", e.train_loss},
             {"train_data_loss", e.train_data_loss}};
    row["val_data_loss"] = e.val_data_loss ? json(*e.val_data_loss) : json(nullptr);
    epochs_json.push_back(row);
  }
  json j{{"model_kind", train::to_string(model.kind)},
         {"family", pde::to_string(model.family)},
         {"seed", config.seed},
         {"config", train::to_json(config)},
         {"train_pairs", train_pairs},
         {"validation_pairs", validation_pairs},
         {"validation_trajectories", validation_trajectories},
         {"best_epoch", best_epoch},
         {"best_val_data_loss", best_val_data_loss},
         {"epochs", epochs_json}};
  if (!final_xi.empty()) {
    j["final_xi"] = {{"shape", final_xi.shape()}, {"values", final_xi.storage()}};
  }
  return j;
}

TrainResult train(const ModelSpec& spec, const pde::Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  if (spec.family != ds.manifest.family) {
    throw ConfigError("train: model family " + pde::to_string(spec.family) + " vs dataset " +
                      pde::to_string(ds.manifest.family));
  }
  if (ds.trajectories.empty()) throw ConfigError("train: dataset is empty");
  const auto started = std::chrono::steady_clock::now();

  TrainResult result{Surrogate(spec), {}};
  TrainReport& report = result.report;
  report.model = result.model.spec();
  report.config = cfg;

  report.validation_trajectories = validation_trajectories(ds.trajectories.size(), cfg.validation_fraction, cfg.seed);
  std::vector<std::size_t> train_ids;
  for (std::size_t i = 0; i < ds.trajectories.size(); ++i) {
    if (!std::binary_search(report.validation_trajectories.begin(), report.validation_trajectories.end(), i)) {
      train_ids.push_back(i);
    }
  }
  if (train_ids.empty()) throw ConfigError("train: validation split leaves no training trajectories");
  auto pairs = make_transition_pairs(ds, train_ids);
  const auto val_pairs = report.validation_trajectories.empty()
                             ? std::vector<TransitionPair>{}
                             : make_transition_pairs(ds, report.validation_trajectories);
  report.train_pairs = pairs.size();
  report.validation_pairs = val_pairs.size();

  const Surrogate& model = result.model;
  std::vector<Variable> params;
  for (const auto& p : model.parameters()) params.push_back(p.value);
  ad::Adam adam(params, cfg.adam);
  const Variable xi = model.xi();
  std::mt19937_64 rng(cfg.seed);

  std::vector<Tensor> best = model.snapshot();
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = scheduled_learning_rate(cfg, epoch);
    adam.set_learning_rate(rec.learning_rate);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    double total_sum = 0.0, data_sum = 0.0;
    for (std::size_t start = 0; start < pairs.size(); start += cfg.batch_size) {
      const auto chunk = std::span<const TransitionPair>(pairs).subspan(start, std::min(cfg.batch_size, pairs.size() - start));
      const Batch b = gather_batch(ds, chunk);
      try {
        const Variable pred = model.step(Variable(b.u), b.beta);
        const LossTerms loss = compute_loss(pred, b.target, xi, cfg.lambda_sparse);
        const double total = loss.total.value()[0];
        if (!std::isfinite(total)) throw NonFiniteError("non-finite loss");
        adam.zero_grad();
        ad::backward(loss.total);
        adam.step();
        total_sum += total * static_cast<double>(chunk.size());
        data_sum += loss.data.value()[0] * static_cast<double>(chunk.size());
      } catch (const NonFiniteError& e) {
        report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        throw TrainingDiverged("train: diverged in epoch " + std::to_string(epoch) + ": " + e.what(), report);
      }
    }
    rec.train_loss = total_sum / static_cast<double>(pairs.size());
    rec.train_data_loss = data_sum / static_cast<double>(pairs.size());
    const bool has_val = !val_pairs.empty();
    const double score = has_val ? validation_data_loss(model, ds, val_pairs, cfg.batch_size) : rec.train_data_loss;
    if (has_val) rec.val_data_loss = score;
    if (!std::isfinite(score)) {
      throw TrainingDiverged("train: non-finite validation loss in epoch " + std::to_string(epoch), report);
    }
    // Without validation data the last epoch is kept.
    if (!has_val || score < best_val) {
      best_val = score;
      report.best_epoch = epoch;
      best = model.snapshot();
    }
    report.epochs.push_back(rec);
  }
  model.restore(best);
  report.best_val_data_loss = best_val;
  if (xi.defined()) report.final_xi = xi.value();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

SweepResult hyperparameter_sweep(const ModelSpec& spec, const pde::Dataset& ds, const TrainConfig& cfg,
                                 const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw ConfigError("sweep: lambda grid is empty");
  SweepResult sweep;
  sweep.rows.resize(lambdas.size());
  sweep.results.resize(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) {
    SweepRow& row = sweep.rows[i];
    row.lambda = lambdas[i];
    TrainConfig cell = cfg;
    cell.lambda_sparse = lambdas[i];
    try {
      sweep.results[i] = train(spec, ds, cell);
      row.val_loss = sweep.results[i].report.best_val_data_loss;
    } catch (const Error& e) {
      row.error = e.what();
    }
  });
  for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
    const auto& row = sweep.rows[i];
    if (!row.val_loss) continue;
    if (!sweep.selected) {
      sweep.selected = i;
      continue;
    }
    const auto& cur = sweep.rows[*sweep.selected];
    if (*row.val_loss < *cur.val_loss || (*row.val_loss == *cur.val_loss && row.lambda > cur.lambda)) {
      sweep.selected = i;
    }
  }
  if (sweep.selected) sweep.rows[*sweep.selected].selected = true;
  return sweep;
}

std::string sweep_csv(const SweepResult& sweep) {
  std::string out = "lambda,val_loss,selected\n";
  char buf[64];
  for (const auto& row : sweep.rows) {
    std::snprintf(buf, sizeof buf, "%.17g", row.lambda);
    out += buf;
    out += ',';
    if (row.val_loss) {
      std::snprintf(buf, sizeof buf, "%.17g", *row.val_loss);
      out += buf;
    } else {
      out += "failed";
    }
    out += row.selected ? ",1\n" : ",0\n";
  }
  return out;
}

}  // namespace latefuse::train
