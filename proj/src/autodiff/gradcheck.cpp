#include "latefuse/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "latefuse/common/error.hpp"

namespace latefuse::ad {

double finite_diff_check(const ScalarFunction& f, const std::vector<Tensor>& point, double h) {
  if (!(h > 0.0)) throw ConfigError("finite_diff_check: step h must be positive");
  std::vector<Variable> vars;
  for (const auto& t : point) vars.emplace_back(t, true);
  backward(f(vars));

  auto evaluate = [&](const std::vector<Tensor>& at) {
    NoGradGuard guard;
    std::vector<Variable> consts;
    for (const auto& t : at) consts.emplace_back(t, false);
    return f(consts).value()[0];
  };

  double worst = 0.0;
  std::vector<Tensor> probe = point;
  for (std::size_t p = 0; p < point.size(); ++p) {
    const Tensor analytic = vars[p].grad();
    for (std::size_t i = 0; i < point[p].numel(); ++i) {
      const double x0 = point[p][i];
      probe[p][i] = x0 + h;
      const double up = evaluate(probe);
      probe[p][i] = x0 - h;
      const double down = evaluate(probe);
      probe[p][i] = x0;
      const double numeric = (up - down) / (2.0 * h);
      const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace latefuse::ad
