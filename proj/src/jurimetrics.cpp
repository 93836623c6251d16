#include "pdvar/jurimetrics.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pdvar/error.hpp"
#include "pdvar/numeric.hpp"

namespace pdvar {

Money country_mean(const FineCorpus& corpus, const Country& country) {
  std::vector<Money> fines;
  for (const auto& r : corpus.records()) {
    if (r.country == country) fines.push_back(r.fine);
  }
  if (fines.empty()) throw EmptySampleError(fmt::format("no fines recorded for country {}", country.code()));
  return mean(fines);
}

HistoricalVaR historical_var(const FineCorpus& corpus, const CorpusQuery& query, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("VaR level must lie strictly between 0 and 1");
  const FineCorpus selected = filter(corpus, query);
  if (selected.empty()) throw EmptySampleError("historical VaR over an empty selection");
  Eigen::VectorXd amounts(static_cast<Eigen::Index>(selected.size()));
  for (std::size_t i = 0; i < selected.size(); ++i) amounts(static_cast<Eigen::Index>(i)) = selected.records()[i].fine.to_double();
  return HistoricalVaR{level, quantile(amounts, level), selected.size(), query};
}

DeltaReport seriousness_delta(std::span<const FinePair> pairs) {
  if (pairs.empty()) throw EmptySampleError("seriousness delta needs at least one pair");
  std::vector<Money> actual, counterfactual;
  for (const auto& p : pairs) {
    actual.push_back(p.actual);
    counterfactual.push_back(p.counterfactual);
  }
  DeltaReport report;
  report.mean_actual = mean(actual);
  report.mean_counterfactual = mean(counterfactual);
  report.delta = report.mean_counterfactual - report.mean_actual;
  report.n = pairs.size();
  return report;
}

nlohmann::json to_json(const HistoricalVaR& var) {
  return {{"level", var.quantile_level}, {"value", var.value}, {"n", var.corpus_size}, {"query", to_json(var.query)}};
}

nlohmann::json to_json(const DeltaReport& r) {
  return {{"mean_counterfactual", r.mean_counterfactual.to_double()},
          {"mean_actual", r.mean_actual.to_double()},
          {"delta", r.delta.to_double()},
          {"n", r.n}};
}

}  // namespace pdvar
