#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "agreeloss/losses.hpp"

namespace agreeloss {

/// Binary confusion counts with label 1 (causal) as the positive class.
/// Metrics use the zero-division-is-zero convention. All rates are on a 0-1
/// scale.
struct EvalReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Report from raw counts.
EvalReport make_report(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) noexcept;

/// Throws EmptyInput, LengthMismatch, or InvalidParameter on a non-binary label.
EvalReport evaluate(std::span<const int> pred, std::span<const int> gold);

nlohmann::json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

/// 2x2 matrix, rows gold, columns predicted:
///   ,pred_0,pred_1 / gold_0,tn,fp / gold_1,fn,tp
std::string confusion_csv(const EvalReport& report);

struct CompareRow {
  LossKind kind;
  EvalReport report;
  /// tp minus the vanilla run's tp; empty if there is no vanilla report.
  std::optional<long long> tp_delta;
};

/// Rows sorted by F1 descending; equal F1 keeps enum order (vanilla, noisy,
/// refined). Reports only, asserts nothing. Throws InvalidParameter with
/// fewer than two reports.
std::vector<CompareRow> compare_runs(const std::map<LossKind, EvalReport>& reports);

std::string format_compare_table(std::span<const CompareRow> rows);

}  // namespace agreeloss
