#pragma once

#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pdvar/corpus.hpp"
#include "pdvar/money.hpp"

namespace pdvar {

struct HistoricalVaR {
  double quantile_level = 0.0;
  double value = 0.0;
  std::size_t corpus_size = 0;
  CorpusQuery query;
};

struct FinePair {
  Money actual;
  Money counterfactual;
};

struct DeltaReport {
  Money mean_counterfactual;
  Money mean_actual;
  Money delta;  // mean_counterfactual - mean_actual
  std::size_t n = 0;
};

// Mean fine for one country. Throws EmptySampleError if the country has no records.
Money country_mean(const FineCorpus& corpus, const Country& country);

// Empirical quantile of the fines selected by `query` (linear interpolation
// between closest ranks). Requires 0 < level < 1 and a non-empty selection.
HistoricalVaR historical_var(const FineCorpus& corpus, const CorpusQuery& query, double level);

// Mean reduction between counterfactual (e.g. pre-mitigation) and actual fines.
DeltaReport seriousness_delta(std::span<const FinePair> pairs);

nlohmann::json to_json(const HistoricalVaR& var);
nlohmann::json to_json(const DeltaReport& report);

}  // namespace pdvar
