#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "agreeloss/losses.hpp"

namespace agreeloss {

class Rng;

struct GradcheckOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 42;
  std::size_t max_batch = 8;
  double step = 1e-6;
  double tolerance = 1e-5;
  /// Components with max(|analytic|, |numeric|) at or below this are skipped.
  double gradient_floor = 1e-8;
};

struct GradcheckFailure {
  LossKind kind;
  std::size_t trial;
  std::size_t index;
  double analytic;
  double numeric;
  double rel_error;
};

struct KindResult {
  LossKind kind;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::vector<GradcheckFailure> failures;
  bool passed() const noexcept { return failures.empty(); }
};

struct GradcheckReport {
  std::vector<KindResult> kinds;
  bool passed() const noexcept;
};

using GradientFn =
    std::function<std::vector<double>(LossKind, std::span<const double>, const BatchTarget&)>;

/// One random instance: M in [1, max_batch], labels uniform, r drawn from
/// {0.5, 0.6, 2/3, 0.8, 1}, n from {1, 3, 5}, predictions uniform in
/// [0.01, 0.99].
struct RandomBatch {
  BatchTarget target;
  std::vector<double> y_pred;
};
RandomBatch random_batch(Rng& rng, std::size_t max_batch);

/// Central-difference derivative of the batch loss along coordinate i,
/// evaluated in extended precision.
double numeric_derivative(LossKind kind, std::span<const double> y_pred, const BatchTarget& target,
                          std::size_t i, double step);

/// Compare `gradient` (the library's analytic gradient by default) against
/// central differences for every loss kind on `trials` random batches.
/// Relative error is |a - d| / max(|a|, |d|).
GradcheckReport run_gradcheck(const GradcheckOptions& options,
                              const GradientFn& gradient = grad_wrt_pred);

}  // namespace agreeloss
