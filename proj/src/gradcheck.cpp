#include "agreeloss/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "agreeloss/rng.hpp"
#include "loss_terms.hpp"

namespace agreeloss {

bool GradcheckReport::passed() const noexcept {
  return std::all_of(kinds.begin(), kinds.end(), [](const KindResult& k) { return k.passed(); });
}

RandomBatch random_batch(Rng& rng, std::size_t max_batch) {
  static constexpr double kAgreements[] = {0.5, 0.6, 2.0 / 3.0, 0.8, 1.0};
  static constexpr int kVotes[] = {1, 3, 5};
  RandomBatch b;
  const std::size_t m = 1 + rng.below(std::max<std::size_t>(max_batch, 1));
  for (std::size_t i = 0; i < m; ++i) {
    b.target.y_true.push_back(static_cast<int>(rng.below(2)));
    b.target.r.push_back(kAgreements[rng.below(5)]);
    b.target.n.push_back(kVotes[rng.below(3)]);
    b.y_pred.push_back(rng.uniform(0.01, 0.99));
  }
  return b;
}

double numeric_derivative(LossKind kind, std::span<const double> y_pred, const BatchTarget& target,
                          std::size_t i, double step) {
  std::vector<long double> p(y_pred.begin(), y_pred.end());
  const long double h = step;
  const long double centre = p.at(i);
  p[i] = centre + h;
  const long double up = detail::loss<long double>(kind, p, target);
  p[i] = centre - h;
  const long double down = detail::loss<long double>(kind, p, target);
  return static_cast<double>((up - down) / (2 * h));
}

GradcheckReport run_gradcheck(const GradcheckOptions& options, const GradientFn& gradient) {
  GradcheckReport report;
  for (const auto kind : kAllLossKinds) {
    KindResult result;
    result.kind = kind;
    report.kinds.push_back(std::move(result));
  }

  Rng rng(options.seed);
  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    const auto batch = random_batch(rng, options.max_batch);
    for (auto& result : report.kinds) {
      const auto analytic = gradient(result.kind, batch.y_pred, batch.target);
      for (std::size_t i = 0; i < batch.y_pred.size(); ++i) {
        const double a = i < analytic.size() ? analytic[i] : 0.0;
        const double d = numeric_derivative(result.kind, batch.y_pred, batch.target, i,
                                            options.step);
        const double scale = std::max(std::abs(a), std::abs(d));
        if (std::isfinite(a) && !(scale > options.gradient_floor)) continue;
        const double rel = std::isfinite(a) ? std::abs(a - d) / scale : HUGE_VAL;
        ++result.checked;
        result.max_rel_error = std::max(result.max_rel_error, rel);
        if (!(rel <= options.tolerance)) {
          result.failures.push_back({result.kind, trial, i, a, d, rel});
        }
      }
    }
  }
  return report;
}

}  // namespace agreeloss
