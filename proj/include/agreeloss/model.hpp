#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "agreeloss/data.hpp"
#include "agreeloss/features.hpp"
#include "agreeloss/losses.hpp"

namespace agreeloss {

/// Sparse linear layer followed by a sigmoid: p = σ(w·x + b).
struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;

  LinearModel() = default;
  explicit LinearModel(std::uint32_t dim) : weights(dim, 0.0) {}

  std::uint32_t dim() const noexcept { return static_cast<std::uint32_t>(weights.size()); }
  bool all_finite() const noexcept;
  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

double sigmoid(double z) noexcept;

/// w·x + b. Throws DimMismatch if x.dim differs from the model.
double logit(const LinearModel& model, const SparseVector& x);
double forward(const LinearModel& model, const SparseVector& x);

struct TrainConfig {
  int epochs = 10;
  double lr = 5e-5;
  std::uint64_t seed = 42;
  std::size_t batch_size = 32;
  LossKind loss = LossKind::Vanilla;
  bool shuffle = true;

  /// Throws InvalidParameter unless epochs >= 1, lr > 0 and batch_size >= 1.
  void validate() const;
};

/// dL/dz_i for z_i the logit of sentence i: grad_wrt_pred times the sigmoid
/// derivative p(1-p), both taken at the clamped probability.
std::vector<double> logit_gradients(LossKind kind, std::span<const double> y_pred,
                                    const BatchTarget& target);

struct ParameterGradient {
  double loss = 0.0;
  std::vector<double> weights;  // dense, length dim
  double bias = 0.0;
};

/// Batch loss and its gradient with respect to every model parameter.
ParameterGradient parameter_gradient(LossKind kind, const LinearModel& model,
                                     std::span<const SparseVector> features,
                                     const BatchTarget& target);

double batch_loss(LossKind kind, const LinearModel& model, std::span<const SparseVector> features,
                  const BatchTarget& target);

struct TrainResult {
  LinearModel model;
  /// Mean batch loss per epoch, measured before each batch's update.
  std::vector<double> epoch_loss;
};

/// Called after every epoch with the 1-based epoch number.
using EpochObserver = std::function<void(int epoch, double mean_loss, const LinearModel& model)>;

/// Mini-batch SGD from a zero model. Examples are visited in a seeded
/// shuffled order (or file order when shuffle is off); each batch takes one
/// step of -lr times the batch-loss gradient. Updates are applied in batch
/// order on a single thread, so results are bit-reproducible.
///
/// Throws EmptyDataset, InvalidParameter, or NonFiniteLoss.
TrainResult train(const Dataset& ds, const FeaturizerConfig& fcfg, const TrainConfig& tcfg,
                  const EpochObserver& observer = {});

std::vector<double> predict_proba(const LinearModel& model, const Dataset& ds,
                                  const FeaturizerConfig& fcfg);

/// Label 1 iff probability >= threshold (so p = 0.5 at threshold 0.5 is 1).
std::vector<int> predict(const LinearModel& model, const Dataset& ds, const FeaturizerConfig& fcfg,
                         double threshold = 0.5);

}  // namespace agreeloss
