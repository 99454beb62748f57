#pragma once

// Loss values templated on the scalar type. The library instantiates them
// with double; the finite-difference checker uses long double so that the
// central difference is not swamped by rounding.

#include <algorithm>
#include <cmath>
#include <span>

#include "agreeloss/error.hpp"
#include "agreeloss/losses.hpp"

namespace agreeloss::detail {

template <typename T>
T clamp_p(T p) {
  return std::clamp(p, static_cast<T>(kProbEps), static_cast<T>(1) - static_cast<T>(kProbEps));
}

template <typename T>
void check_lengths(std::span<const T> y_pred, const BatchTarget& t) {
  t.validate();
  if (y_pred.size() != t.size()) throw LengthMismatch(t.size(), y_pred.size());
}

template <typename T>
T vanilla(std::span<const T> y_pred, const BatchTarget& t) {
  check_lengths(y_pred, t);
  T sum = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const T p = clamp_p(y_pred[i]);
    const T y = t.y_true[i];
    sum += -y * std::log(p) - (1 - y) * std::log(1 - p);
  }
  return sum / static_cast<T>(t.size());
}

template <typename T>
T noisy(std::span<const T> y_pred, const BatchTarget& t) {
  check_lengths(y_pred, t);
  T sum = 0;
  T total_votes = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const T p = clamp_p(y_pred[i]);
    const T y = t.y_true[i];
    const T n = t.n[i];
    const T r = t.r[i];
    sum += -y * n * (r * std::log(p) + (1 - r) * std::log(1 - p)) -
           (1 - y) * n * (r * std::log(1 - p) + (1 - r) * std::log(p));
    total_votes += n;
  }
  return sum / total_votes;
}

template <typename T>
T refined(std::span<const T> y_pred, const BatchTarget& t) {
  check_lengths(y_pred, t);
  T sum = 0;
  T total_agreeing = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const T p = clamp_p(y_pred[i]);
    const T y = t.y_true[i];
    const T weight = static_cast<T>(t.n[i]) * static_cast<T>(t.r[i]);
    sum += -y * weight * std::log(p) - (1 - y) * weight * std::log(1 - p);
    total_agreeing += weight;
  }
  if (!(total_agreeing > 0)) {
    throw InvalidParameter("refined loss needs at least one agreeing vote in the batch");
  }
  return sum / total_agreeing;
}

template <typename T>
T loss(LossKind kind, std::span<const T> y_pred, const BatchTarget& t) {
  switch (kind) {
    case LossKind::Vanilla: return vanilla(y_pred, t);
    case LossKind::Noisy: return noisy(y_pred, t);
    case LossKind::Refined: return refined(y_pred, t);
  }
  throw InvalidParameter("unknown loss kind");
}

}  // namespace agreeloss::detail
