#include <algorithm>
#include <chrono>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <sstream>

#include "latefuse/cli/cli.hpp"
#include "latefuse/common/binary_io.hpp"
#include "latefuse/common/error.hpp"
#include "latefuse/common/parallel.hpp"
#include "latefuse/evaluation/interpret.hpp"
#include "latefuse/evaluation/report.hpp"

namespace latefuse::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const std::vector<pde::Split> kTestSplits{pde::Split::kInDomainTest, pde::Split::kOutDomainTest};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path require_data(const RunConfig& c) {
  if (c.data.empty()) throw ConfigError(c.command + ": \"data\" (dataset root) is required");
  return c.data;
}

pde::Dataset load_split(const RunConfig& c, pde::Split split) {
  const auto dir = require_data(c) / pde::to_string(split);
  if (!fs::exists(dir / "manifest.json")) throw ConfigError(c.command + ": no dataset at " + dir.string());
  auto ds = pde::read_dataset(dir);
  if (ds.manifest.family != c.equation) {
    throw ConfigError(c.command + ": dataset " + dir.string() + " holds " + pde::to_string(ds.manifest.family) +
                      ", config says " + pde::to_string(c.equation));
  }
  return ds;
}

void write_json(const fs::path& path, const json& j) { io::write_text(path, j.dump(2) + "\n"); }

std::string seed_dir(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

json metrics_json(const eval::SplitEvaluation& e) {
  json j = e.metrics.to_json();
  j["blowups"] = e.blowups;
  return j;
}

}  // namespace

std::vector<fs::path> model_dirs(const fs::path& checkpoint) {
  if (checkpoint.empty()) throw ConfigError("\"checkpoint\" is required");
  if (fs::exists(checkpoint / "model.json")) return {checkpoint};
  std::vector<fs::path> dirs;
  if (fs::is_directory(checkpoint)) {
    for (const auto& entry : fs::directory_iterator(checkpoint)) {
      if (entry.is_directory() && fs::exists(entry.path() / "model.json")) dirs.push_back(entry.path());
    }
  }
  if (dirs.empty()) throw ConfigError("no model.json under " + checkpoint.string());
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

void cmd_gen(const RunConfig& c, const fs::path& out, std::ostream& log) {
  for (auto split : {pde::Split::kTrain, pde::Split::kInDomainTest, pde::Split::kOutDomainTest}) {
    const auto t0 = std::chrono::steady_clock::now();
    pde::GenerateOptions o;
    o.family = c.equation;
    o.split = split;
    o.ranges = c.ranges.at(split);
    o.count = c.counts.of(split);
    o.seed = c.seeds.front();
    o.grid = pde::default_grid(c.equation, c.preset);
    const auto ds = pde::generate_dataset(o);
    pde::write_dataset(ds, out / pde::to_string(split));
    log << "gen " << pde::to_string(split) << ": " << ds.trajectories.size() << " trajectories ("
        << seconds_since(t0) << " s)\n";
  }
}

void cmd_train(const RunConfig& c, const fs::path& out, std::ostream& log) {
  const auto ds = load_split(c, pde::Split::kTrain);
  std::mutex log_mutex;
  parallel_for(c.seeds.size(), [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t seed = c.seeds[i];
    const fs::path dir = out / seed_dir(seed);
    fs::create_directories(dir);
    auto cfg = c.train_config(seed);
    train::TrainResult result;
    json extra;
    if (c.lambdas.size() > 1) {
      auto sweep = train::hyperparameter_sweep(c.model_spec(seed), ds, cfg, c.lambdas);
      io::write_text(dir / "sweep.csv", train::sweep_csv(sweep));
      if (!sweep.selected) throw NonFiniteError("train: every sweep cell failed for seed " + std::to_string(seed));
      result = std::move(sweep.results[*sweep.selected]);
      extra["selected_lambda"] = sweep.rows[*sweep.selected].lambda;
    } else {
      if (!c.lambdas.empty()) cfg.lambda_sparse = c.lambdas.front();
      try {
        result = train::train(c.model_spec(seed), ds, cfg);
      } catch (const train::TrainingDiverged& e) {
        write_json(dir / "train_report.json", e.report().to_json());
        throw;
      }
    }
    extra["train_report"] = result.report.to_json();
    train::save_checkpoint(dir, result.model, extra);
    write_json(dir / "train_report.json", result.report.to_json());
    std::lock_guard lock(log_mutex);
    log << "train seed " << seed << ": best epoch " << result.report.best_epoch << ", validation L_data "
        << result.report.best_val_data_loss << " (" << seconds_since(t0) << " s)\n";
  });
}

void cmd_eval(const RunConfig& c, const fs::path& out, std::ostream& log) {
  const auto names = pde::parameter_names(c.equation);
  std::vector<eval::ParameterRow> rows;
  json metrics = json::object();
  if (!c.pred.empty()) {
    // Self-evaluation: compare two datasets directly, no model involved.
    RunConfig pred_cfg = c;
    pred_cfg.data = c.pred;
    for (auto split : kTestSplits) {
      const auto truth = load_split(c, split), pred = load_split(pred_cfg, split);
      if (truth.trajectories.size() != pred.trajectories.size()) throw ShapeError("eval: trajectory counts differ");
      std::vector<eval::RolloutResult> rollouts;
      for (const auto& t : pred.trajectories) rollouts.push_back({t.states, std::nullopt});
      const auto e = eval::evaluate_rollouts(rollouts, truth);
      metrics["pred"][pde::to_string(split)] = metrics_json(e);
      auto r = eval::parameter_rows(pde::to_string(c.equation), "pred", 0, pde::to_string(split), truth, e);
      rows.insert(rows.end(), r.begin(), r.end());
      log << "eval pred " << pde::to_string(split) << ": rmse " << e.metrics.rmse << "\n";
    }
  } else {
    std::vector<pde::Dataset> splits;
    for (auto split : kTestSplits) splits.push_back(load_split(c, split));
    for (const auto& dir : model_dirs(c.checkpoint)) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto model = train::load_checkpoint(dir);
      if (model.spec().family != c.equation) throw ConfigError("eval: checkpoint family does not match config");
      const std::string kind = train::to_string(model.kind());
      for (std::size_t s = 0; s < kTestSplits.size(); ++s) {
        const auto split = pde::to_string(kTestSplits[s]);
        const auto e = eval::evaluate_split(model, splits[s]);
        metrics[dir.filename().string()][split] = metrics_json(e);
        auto r = eval::parameter_rows(pde::to_string(c.equation), kind, model.spec().seed, split, splits[s], e);
        rows.insert(rows.end(), r.begin(), r.end());
        log << "eval " << dir.filename().string() << " " << split << ": rmse " << e.metrics.rmse << "\n";
      }
      log << "  (" << seconds_since(t0) << " s)\n";
    }
  }
  write_json(out / "metrics.json", metrics);
  io::write_text(out / "per_parameter.csv", eval::parameter_csv(rows, names));
  io::write_text(out / "summary.csv", eval::summary_csv(eval::summarize(rows)));
}

void cmd_ablate(const RunConfig& c, const fs::path& out, std::ostream& log) {
  if (c.libraries.empty()) throw ConfigError("ablate: no libraries");
  const auto train_ds = load_split(c, pde::Split::kTrain);
  std::vector<pde::Dataset> tests;
  for (auto split : kTestSplits) tests.push_back(load_split(c, split));
  const auto params = pde::parameter_names(c.equation);

  struct Cell {
    std::size_t library = 0, lambda = 0, seed = 0;
    std::vector<double> rmse;  // per test split
    std::string error;
  };
  std::vector<Cell> cells;
  for (std::size_t l = 0; l < c.libraries.size(); ++l)
    for (std::size_t k = 0; k < c.lambdas.size(); ++k)
      for (std::size_t s = 0; s < c.seeds.size(); ++s) cells.push_back({l, k, s, {}, {}});

  std::mutex log_mutex;
  const auto t0 = std::chrono::steady_clock::now();
  parallel_for(cells.size(), [&](std::size_t i) {
    Cell& cell = cells[i];
    RunConfig cc = c;
    cc.model = train::ModelKind::kLateFusion;
    cc.library = c.libraries[cell.library];
    auto cfg = cc.train_config(c.seeds[cell.seed]);
    cfg.lambda_sparse = c.lambdas[cell.lambda];
    try {
      const auto result = train::train(cc.model_spec(c.seeds[cell.seed]), train_ds, cfg);
      for (const auto& ds : tests) cell.rmse.push_back(eval::evaluate_split(result.model, ds).metrics.rmse);
    } catch (const Error& e) {
      cell.rmse.clear();
      cell.error = e.what();
    }
    std::lock_guard lock(log_mutex);
    log << "ablate library " << cell.library << " lambda " << c.lambdas[cell.lambda] << " seed "
        << c.seeds[cell.seed] << (cell.error.empty() ? "" : " FAILED: " + cell.error) << "\n";
  });

  std::ostringstream csv;
  csv << "library,terms,lambda,seed,split,rmse,status\n";
  for (const auto& cell : cells) {
    const auto& lib = c.libraries[cell.library];
    const auto terms = fusion::parse_library_spec(lib, params).size();
    for (std::size_t s = 0; s < kTestSplits.size(); ++s) {
      csv << '"' << lib << "\"," << terms << ',' << fmt(c.lambdas[cell.lambda]) << ',' << c.seeds[cell.seed] << ','
          << pde::to_string(kTestSplits[s]) << ',' << (cell.error.empty() ? fmt(cell.rmse[s]) : "") << ','
          << (cell.error.empty() ? "ok" : "failed") << '\n';
    }
  }
  io::write_text(out / "ablation.csv", csv.str());

  // Median, mean and sample std over seeds per (library, lambda, split).
  std::ostringstream summary;
  summary << "library,terms,lambda,split,seeds_ok,rmse_median,rmse_mean,rmse_std\n";
  for (std::size_t l = 0; l < c.libraries.size(); ++l) {
    const auto terms = fusion::parse_library_spec(c.libraries[l], params).size();
    for (std::size_t k = 0; k < c.lambdas.size(); ++k) {
      for (std::size_t s = 0; s < kTestSplits.size(); ++s) {
        std::vector<double> v;
        for (const auto& cell : cells) {
          if (cell.library == l && cell.lambda == k && cell.error.empty()) v.push_back(cell.rmse[s]);
        }
        summary << '"' << c.libraries[l] << "\"," << terms << ',' << fmt(c.lambdas[k]) << ','
                << pde::to_string(kTestSplits[s]) << ',' << v.size() << ',';
        if (v.empty()) {
          summary << ",,\n";
          continue;
        }
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        summary << fmt(eval::median(v)) << ',' << fmt(mean) << ',';
        if (v.size() > 1) {
          double ss = 0.0;
          for (double x : v) ss += (x - mean) * (x - mean);
          summary << fmt(std::sqrt(ss / static_cast<double>(v.size() - 1)));
        }
        summary << '\n';
      }
    }
  }
  io::write_text(out / "ablation_summary.csv", summary.str());
  log << "ablate: " << cells.size() << " cells (" << seconds_since(t0) << " s)\n";
}

void cmd_inspect(const RunConfig& c, const fs::path& out, std::ostream& log) {
  const auto dir = model_dirs(c.checkpoint).front();
  const auto model = train::load_checkpoint(dir);
  const auto* lf = model.late_fusion();
  if (!lf) throw ConfigError("inspect: needs a late-fusion checkpoint");
  if (model.spec().family != c.equation) throw ConfigError("inspect: checkpoint family does not match config");
  const auto ds = load_split(c, c.split);
  if (c.trajectory >= ds.trajectories.size()) throw ConfigError("inspect: trajectory index out of range");
  const auto& traj = ds.trajectories[c.trajectory];
  ad::Shape frame(traj.states.shape().begin() + 1, traj.states.shape().end());
  const auto n = ad::shape_numel(frame);
  const ad::Tensor u0(frame, std::vector<double>(traj.states.data().begin(), traj.states.data().begin() + n));
  const auto dump = eval::interpret(*lf, u0, traj.params, ds.manifest.grid, ds.manifest.boundary);
  eval::write_interpret_dump(out / "dump", dump);
  log << "inspect: wrote " << (out / "dump").string() << "\n";
  if (c.equation == pde::EquationFamily::kAdvection) {
    const auto s = eval::advection_interpretability(*lf, ds);
    json j = s.to_json();
    j["split"] = pde::to_string(c.split);
    j["reference"] = "-dx u, 4th-order central difference";
    write_json(out / "interpretability.json", j);
    log << "inspect: mean |pearson| " << s.mean_abs_pearson << ", rms ratio " << s.rms_ratio << "\n";
  }
}

}  // namespace latefuse::cli
