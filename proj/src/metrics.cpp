#include "agreeloss/metrics.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "agreeloss/error.hpp"

namespace agreeloss {

namespace {

double ratio(std::size_t num, std::size_t den) noexcept {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

EvalReport make_report(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) noexcept {
  EvalReport r{tp, fp, tn, fn};
  r.precision = ratio(tp, tp + fp);
  r.recall = ratio(tp, tp + fn);
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                                      : 0.0;
  r.accuracy = ratio(tp + tn, r.total());
  return r;
}

EvalReport evaluate(std::span<const int> pred, std::span<const int> gold) {
  if (pred.size() != gold.size()) throw LengthMismatch(gold.size(), pred.size());
  if (pred.empty()) throw EmptyInput();
  std::size_t counts[2][2] = {};  // [gold][pred]
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if ((pred[i] != 0 && pred[i] != 1) || (gold[i] != 0 && gold[i] != 1)) {
      throw InvalidParameter(fmt::format("non-binary label at position {}", i));
    }
    ++counts[gold[i]][pred[i]];
  }
  return make_report(counts[1][1], counts[0][1], counts[0][0], counts[1][0]);
}

nlohmann::json to_json(const EvalReport& r) {
  return {{"tp", r.tp},
          {"fp", r.fp},
          {"tn", r.tn},
          {"fn", r.fn},
          {"precision", r.precision},
          {"recall", r.recall},
          {"f1", r.f1},
          {"accuracy", r.accuracy}};
}

EvalReport report_from_json(const nlohmann::json& j) {
  try {
    return make_report(j.at("tp").get<std::size_t>(), j.at("fp").get<std::size_t>(),
                       j.at("tn").get<std::size_t>(), j.at("fn").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed metrics report: ") + e.what());
  }
}

std::string confusion_csv(const EvalReport& r) {
  return fmt::format(",pred_0,pred_1\ngold_0,{},{}\ngold_1,{},{}\n", r.tn, r.fp, r.fn, r.tp);
}

std::vector<CompareRow> compare_runs(const std::map<LossKind, EvalReport>& reports) {
  if (reports.size() < 2) throw InvalidParameter("compare needs at least two reports");
  const auto vanilla = reports.find(LossKind::Vanilla);

  std::vector<CompareRow> rows;
  for (const auto& [kind, report] : reports) {  // std::map iterates in enum order
    std::optional<long long> delta;
    if (vanilla != reports.end()) {
      delta = static_cast<long long>(report.tp) - static_cast<long long>(vanilla->second.tp);
    }
    rows.push_back({kind, report, delta});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const CompareRow& a, const CompareRow& b) { return a.report.f1 > b.report.f1; });
  return rows;
}

std::string format_compare_table(std::span<const CompareRow> rows) {
  std::string out = fmt::format("{:<4} {:<8} {:>10} {:>10} {:>10} {:>10} {:>6} {:>8}\n", "rank",
                                "loss", "f1", "precision", "recall", "accuracy", "tp", "tp_delta");
  int rank = 1;
  for (const auto& row : rows) {
    const auto& r = row.report;
    out += fmt::format("{:<4} {:<8} {:>10.4f} {:>10.4f} {:>10.4f} {:>10.4f} {:>6} {:>8}\n", rank++,
                       to_string(row.kind), r.f1, r.precision, r.recall, r.accuracy, r.tp,
                       row.tp_delta ? fmt::format("{:+d}", *row.tp_delta) : std::string("-"));
  }
  return out;
}

}  // namespace agreeloss
