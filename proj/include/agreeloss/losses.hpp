#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace agreeloss {

struct AnnotatedExample;

/// Binary cross-entropy variants that use annotation metadata.
///
/// Write CE(q, p) = -q·log p - (1-q)·log(1-p). Over a batch of M sentences:
///
///   Vanilla:  (1/M)       Σ CE(y_i, p_i)
///   Noisy:    (1/Σn_i)    Σ n_i·[r_i·CE(y_i, p_i) + (1-r_i)·CE(1-y_i, p_i)]
///   Refined:  (1/Σn_i·r_i) Σ n_i·r_i·CE(y_i, p_i)
///
/// The noisy form is cross-entropy against the soft target
/// q_i = y_i ? r_i : 1-r_i (label smoothing by the annotator split), so a
/// single sentence is minimised at p = q. Normalisers are computed per batch,
/// which makes one sentence's gradient depend on the rest of its batch.
enum class LossKind { Vanilla, Noisy, Refined };

inline constexpr std::array<LossKind, 3> kAllLossKinds = {LossKind::Vanilla, LossKind::Noisy,
                                                          LossKind::Refined};

std::string_view to_string(LossKind kind) noexcept;
/// Accepts "vanilla", "noisy", "refined". Throws InvalidParameter otherwise.
LossKind parse_loss_kind(std::string_view name);

/// Probabilities are clamped to [eps, 1-eps] before any logarithm.
inline constexpr double kProbEps = 1e-12;

double clamp_probability(double p) noexcept;

/// Per-sentence labels and annotation metadata for one batch.
struct BatchTarget {
  std::vector<int> y_true;
  std::vector<int> n;
  std::vector<double> r;

  std::size_t size() const noexcept { return y_true.size(); }

  /// Throws LengthMismatch if the three lists differ in length and
  /// InvalidParameter on an empty batch, non-binary label, n < 1 or r outside
  /// [0, 1].
  void validate() const;

  static BatchTarget from_examples(std::span<const AnnotatedExample> examples);
};

double vanilla_ce(std::span<const double> y_pred, const BatchTarget& target);
double noisy_ce(std::span<const double> y_pred, const BatchTarget& target);
double refined_ce(std::span<const double> y_pred, const BatchTarget& target);
double loss_value(LossKind kind, std::span<const double> y_pred, const BatchTarget& target);

/// dL/dp_i of the selected batch loss, normaliser included, evaluated at the
/// clamped probabilities. For every kind this is
///   (w_i / Σw) · (p_i - q_i) / (p_i·(1-p_i))
/// with (w, q) = (1, y), (n, soft target) and (n·r, y) respectively.
std::vector<double> grad_wrt_pred(LossKind kind, std::span<const double> y_pred,
                                  const BatchTarget& target);

struct ProfilePoint {
  double r = 0.0;
  double y_pred = 0.0;
  double loss = 0.0;
};

/// Single-sentence loss over a uniform grid on [eps, 1-eps], one curve per r.
/// Throws InvalidParameter if grid < 3.
std::vector<ProfilePoint> loss_profile(LossKind kind, int y_true, int n,
                                       std::span<const double> r_values, int grid);

/// Index within each r-curve of its minimum (first one on ties).
std::vector<std::size_t> profile_argmins(std::span<const ProfilePoint> profile, int grid);

/// CSV `r,y_pred,loss` with 9 significant digits.
void write_profile_csv(std::span<const ProfilePoint> profile, std::ostream& out);

}  // namespace agreeloss
