#include "latefuse/evaluation/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <tuple>

#include "latefuse/common/error.hpp"

namespace latefuse::eval {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<ParameterRow> parameter_rows(const std::string& equation, const std::string& model, std::uint64_t seed,
                                         const std::string& split, const pde::Dataset& ds,
                                         const SplitEvaluation& evaluation) {
  if (evaluation.per_trajectory.size() != ds.trajectories.size()) {
    throw ShapeError("parameter_rows: evaluation does not match dataset");
  }
  std::vector<ParameterRow> rows;
  rows.reserve(ds.trajectories.size());
  for (std::size_t i = 0; i < ds.trajectories.size(); ++i) {
    rows.push_back({equation, model, seed, split, i, ds.trajectories[i].params, evaluation.per_trajectory[i].rmse});
  }
  return rows;
}

std::string parameter_csv(const std::vector<ParameterRow>& rows, const std::vector<std::string>& param_names) {
  std::ostringstream out;
  out << "equation,model,seed,split,trajectory";
  for (const auto& n : param_names) out << ',' << n;
  out << ",rmse\n";
  for (const auto& r : rows) {
    if (r.beta.size() != param_names.size()) throw ShapeError("parameter_csv: parameter count mismatch");
    out << r.equation << ',' << r.model << ',' << r.seed << ',' << r.split << ',' << r.trajectory;
    for (double b : r.beta) out << ',' << fmt(b);
    out << ',' << fmt(r.rmse) << '\n';
  }
  return out.str();
}

std::vector<SummaryRow> summarize(const std::vector<ParameterRow>& rows) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::vector<Key> groups;
  for (const auto& r : rows) {
    Key k{r.equation, r.model, r.split};
    if (std::find(groups.begin(), groups.end(), k) == groups.end()) groups.push_back(k);
  }
  std::vector<SummaryRow> out;
  for (const auto& [eq, model, split] : groups) {
    SummaryRow s{eq, model, split, {}, {}, 0.0, std::nullopt};
    std::vector<double> sum_sq;
    std::vector<std::size_t> counts;
    for (const auto& r : rows) {
      if (r.equation != eq || r.model != model || r.split != split) continue;
      auto it = std::find(s.seeds.begin(), s.seeds.end(), r.seed);
      std::size_t idx = static_cast<std::size_t>(it - s.seeds.begin());
      if (it == s.seeds.end()) {
        s.seeds.push_back(r.seed);
        sum_sq.push_back(0.0);
        counts.push_back(0);
      }
      sum_sq[idx] += r.rmse * r.rmse;
      ++counts[idx];
    }
    for (std::size_t i = 0; i < s.seeds.size(); ++i) {
      s.per_seed_rmse.push_back(std::sqrt(sum_sq[i] / static_cast<double>(counts[i])));
    }
    const double n = static_cast<double>(s.per_seed_rmse.size());
    s.mean = std::accumulate(s.per_seed_rmse.begin(), s.per_seed_rmse.end(), 0.0) / n;
    if (s.per_seed_rmse.size() > 1) {
      double ss = 0.0;
      for (double v : s.per_seed_rmse) ss += (v - s.mean) * (v - s.mean);
      s.std = std::sqrt(ss / (n - 1.0));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "equation,model,split,seeds,rmse_mean,rmse_std\n";
  for (const auto& r : rows) {
    out << r.equation << ',' << r.model << ',' << r.split << ',' << r.seeds.size() << ',' << fmt(r.mean) << ','
        << (r.std ? fmt(*r.std) : std::string()) << '\n';
  }
  return out.str();
}

double median(std::vector<double> values) {
  if (values.empty()) throw ShapeError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace latefuse::eval
