#include "agreeloss/losses.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "agreeloss/data.hpp"
#include "agreeloss/error.hpp"
#include "loss_terms.hpp"

namespace agreeloss {

std::string_view to_string(LossKind kind) noexcept {
  switch (kind) {
    case LossKind::Vanilla: return "vanilla";
    case LossKind::Noisy: return "noisy";
    case LossKind::Refined: return "refined";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  for (const auto kind : kAllLossKinds) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidParameter(fmt::format("unknown loss '{}' (expected vanilla, noisy or refined)", name));
}

double clamp_probability(double p) noexcept { return detail::clamp_p(p); }

void BatchTarget::validate() const {
  if (n.size() != y_true.size()) throw LengthMismatch(y_true.size(), n.size());
  if (r.size() != y_true.size()) throw LengthMismatch(y_true.size(), r.size());
  if (y_true.empty()) throw InvalidParameter("batch must contain at least one sentence");
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] != 0 && y_true[i] != 1) {
      throw InvalidParameter(fmt::format("batch item {}: label {} is not binary", i, y_true[i]));
    }
    if (n[i] < 1) throw InvalidParameter(fmt::format("batch item {}: n = {} < 1", i, n[i]));
    if (!(r[i] >= 0.0 && r[i] <= 1.0)) {
      throw InvalidParameter(fmt::format("batch item {}: r = {} outside [0, 1]", i, r[i]));
    }
  }
}

BatchTarget BatchTarget::from_examples(std::span<const AnnotatedExample> examples) {
  BatchTarget t;
  t.y_true.reserve(examples.size());
  t.n.reserve(examples.size());
  t.r.reserve(examples.size());
  for (const auto& ex : examples) {
    t.y_true.push_back(ex.label);
    t.n.push_back(ex.num_votes);
    t.r.push_back(ex.agreement);
  }
  return t;
}

double vanilla_ce(std::span<const double> y_pred, const BatchTarget& target) {
  return detail::vanilla(y_pred, target);
}

double noisy_ce(std::span<const double> y_pred, const BatchTarget& target) {
  return detail::noisy(y_pred, target);
}

double refined_ce(std::span<const double> y_pred, const BatchTarget& target) {
  return detail::refined(y_pred, target);
}

double loss_value(LossKind kind, std::span<const double> y_pred, const BatchTarget& target) {
  return detail::loss(kind, y_pred, target);
}

std::vector<double> grad_wrt_pred(LossKind kind, std::span<const double> y_pred,
                                  const BatchTarget& t) {
  detail::check_lengths(y_pred, t);
  const std::size_t m = t.size();

  // Each kind is Σ w_i·CE(q_i, p_i) / Σ w_i, and dCE/dp = (p - q) / (p(1-p)).
  std::vector<double> weight(m);
  std::vector<double> target(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double y = t.y_true[i];
    switch (kind) {
      case LossKind::Vanilla:
        weight[i] = 1.0;
        target[i] = y;
        break;
      case LossKind::Noisy:
        weight[i] = t.n[i];
        target[i] = t.y_true[i] == 1 ? t.r[i] : 1.0 - t.r[i];
        break;
      case LossKind::Refined:
        weight[i] = t.n[i] * t.r[i];
        target[i] = y;
        break;
    }
  }
  double total = 0.0;
  for (const double w : weight) total += w;
  if (!(total > 0.0)) {
    throw InvalidParameter("refined loss needs at least one agreeing vote in the batch");
  }

  std::vector<double> grad(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double p = clamp_probability(y_pred[i]);
    grad[i] = (weight[i] / total) * ((p - target[i]) / (p * (1.0 - p)));
  }
  return grad;
}

std::vector<ProfilePoint> loss_profile(LossKind kind, int y_true, int n,
                                       std::span<const double> r_values, int grid) {
  if (grid < 3) throw InvalidParameter(fmt::format("grid must be >= 3, got {}", grid));
  if (y_true != 0 && y_true != 1) throw InvalidParameter("profile label must be 0 or 1");
  if (n < 1) throw InvalidParameter("profile num_votes must be >= 1");

  const double step = (1.0 - 2.0 * kProbEps) / (grid - 1);
  std::vector<ProfilePoint> rows;
  rows.reserve(r_values.size() * static_cast<std::size_t>(grid));
  for (const double r : r_values) {
    const BatchTarget target{{y_true}, {n}, {r}};
    for (int k = 0; k < grid; ++k) {
      const double p = k == grid - 1 ? 1.0 - kProbEps : kProbEps + k * step;
      const double pred[] = {p};
      rows.push_back({r, p, loss_value(kind, pred, target)});
    }
  }
  return rows;
}

std::vector<std::size_t> profile_argmins(std::span<const ProfilePoint> profile, int grid) {
  if (grid < 1 || profile.size() % static_cast<std::size_t>(grid) != 0) {
    throw InvalidParameter("profile size is not a multiple of the grid");
  }
  std::vector<std::size_t> out;
  for (std::size_t start = 0; start < profile.size(); start += grid) {
    const auto curve = profile.subspan(start, grid);
    const auto best = std::min_element(curve.begin(), curve.end(),
                                       [](const auto& a, const auto& b) { return a.loss < b.loss; });
    out.push_back(static_cast<std::size_t>(best - curve.begin()));
  }
  return out;
}

void write_profile_csv(std::span<const ProfilePoint> profile, std::ostream& out) {
  out << "r,y_pred,loss\n";
  for (const auto& row : profile) {
    out << fmt::format("{:.9g},{:.9g},{:.9g}\n", row.r, row.y_pred, row.loss);
  }
}

}  // namespace agreeloss
