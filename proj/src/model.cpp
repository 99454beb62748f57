#include "agreeloss/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "agreeloss/error.hpp"
#include "agreeloss/rng.hpp"

namespace agreeloss {

bool LinearModel::all_finite() const noexcept {
  return std::isfinite(bias) &&
         std::all_of(weights.begin(), weights.end(), [](double w) { return std::isfinite(w); });
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(const LinearModel& model, const SparseVector& x) {
  if (x.dim != model.dim()) throw DimMismatch(model.dim(), x.dim);
  double z = model.bias;
  for (std::size_t k = 0; k < x.indices.size(); ++k) z += model.weights[x.indices[k]] * x.values[k];
  return z;
}

double forward(const LinearModel& model, const SparseVector& x) { return sigmoid(logit(model, x)); }

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidParameter(fmt::format("epochs must be >= 1, got {}", epochs));
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw InvalidParameter(fmt::format("learning rate must be positive, got {}", lr));
  }
  if (batch_size < 1) throw InvalidParameter("batch size must be >= 1");
}

std::vector<double> logit_gradients(LossKind kind, std::span<const double> y_pred,
                                    const BatchTarget& target) {
  auto grad = grad_wrt_pred(kind, y_pred, target);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double p = clamp_probability(y_pred[i]);
    grad[i] *= p * (1.0 - p);
  }
  return grad;
}

double batch_loss(LossKind kind, const LinearModel& model, std::span<const SparseVector> features,
                  const BatchTarget& target) {
  std::vector<double> probs;
  probs.reserve(features.size());
  for (const auto& x : features) probs.push_back(forward(model, x));
  return loss_value(kind, probs, target);
}

ParameterGradient parameter_gradient(LossKind kind, const LinearModel& model,
                                     std::span<const SparseVector> features,
                                     const BatchTarget& target) {
  std::vector<double> probs;
  probs.reserve(features.size());
  for (const auto& x : features) probs.push_back(forward(model, x));

  ParameterGradient g;
  g.loss = loss_value(kind, probs, target);
  g.weights.assign(model.dim(), 0.0);
  const auto dz = logit_gradients(kind, probs, target);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& x = features[i];
    for (std::size_t k = 0; k < x.indices.size(); ++k) g.weights[x.indices[k]] += dz[i] * x.values[k];
    g.bias += dz[i];
  }
  return g;
}

TrainResult train(const Dataset& ds, const FeaturizerConfig& fcfg, const TrainConfig& tcfg,
                  const EpochObserver& observer) {
  if (ds.empty()) throw EmptyDataset();
  fcfg.validate();
  tcfg.validate();

  std::vector<SparseVector> features;
  features.reserve(ds.size());
  for (const auto& ex : ds) features.push_back(featurize(ex.text, fcfg));
  const auto all_targets = BatchTarget::from_examples(ds.examples());

  TrainResult result{LinearModel(fcfg.dim), {}};
  LinearModel& model = result.model;

  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(tcfg.seed);

  BatchTarget target;
  std::vector<double> probs;
  for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    if (tcfg.shuffle) rng.shuffle(std::span(order));

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + tcfg.batch_size);
      ++batches;

      target.y_true.clear();
      target.n.clear();
      target.r.clear();
      probs.clear();
      for (std::size_t j = start; j < stop; ++j) {
        const std::size_t i = order[j];
        target.y_true.push_back(all_targets.y_true[i]);
        target.n.push_back(all_targets.n[i]);
        target.r.push_back(all_targets.r[i]);
        probs.push_back(forward(model, features[i]));
      }

      const double loss = loss_value(tcfg.loss, probs, target);
      const auto dz = logit_gradients(tcfg.loss, probs, target);
      const bool finite =
          std::isfinite(loss) && std::all_of(dz.begin(), dz.end(), [](double g) { return std::isfinite(g); });
      if (!finite) throw NonFiniteLoss(static_cast<std::size_t>(epoch), batches);
      loss_sum += loss;

      double bias_grad = 0.0;
      bool step_finite = true;
      for (std::size_t j = start; j < stop; ++j) {
        const double g = dz[j - start];
        const auto& x = features[order[j]];
        for (std::size_t k = 0; k < x.indices.size(); ++k) {
          double& w = model.weights[x.indices[k]];
          w -= tcfg.lr * g * x.values[k];
          step_finite = step_finite && std::isfinite(w);
        }
        bias_grad += g;
      }
      model.bias -= tcfg.lr * bias_grad;
      if (!step_finite || !std::isfinite(model.bias)) {
        throw NonFiniteLoss(static_cast<std::size_t>(epoch), batches);
      }
    }

    const double mean_loss = loss_sum / static_cast<double>(batches);
    result.epoch_loss.push_back(mean_loss);
    spdlog::debug("epoch {}/{}: {} loss {:.9g}", epoch, tcfg.epochs, to_string(tcfg.loss), mean_loss);
    if (observer) observer(epoch, mean_loss, model);
  }
  return result;
}

std::vector<double> predict_proba(const LinearModel& model, const Dataset& ds,
                                  const FeaturizerConfig& fcfg) {
  if (fcfg.dim != model.dim()) throw DimMismatch(model.dim(), fcfg.dim);
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto& ex : ds) out.push_back(forward(model, featurize(ex.text, fcfg)));
  return out;
}

std::vector<int> predict(const LinearModel& model, const Dataset& ds, const FeaturizerConfig& fcfg,
                         double threshold) {
  const auto probs = predict_proba(model, ds, fcfg);
  std::vector<int> labels;
  labels.reserve(probs.size());
  for (const double p : probs) labels.push_back(p >= threshold ? 1 : 0);
  return labels;
}

}  // namespace agreeloss
