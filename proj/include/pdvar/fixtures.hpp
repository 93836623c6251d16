#pragma once

#include <string_view>
#include <vector>

#include "pdvar/corpus.hpp"
#include "pdvar/jurimetrics.hpp"

namespace pdvar::fixtures {

// Eleven fines for undertakings with annual turnover between EUR 10M and 100M
// (France, UK, Spain, Ireland). Turnover itself was not disclosed, so the
// turnover column is empty.
std::string_view turnover_band_csv();
FineCorpus turnover_band_corpus();

// UK fines before and after the COVID reduction (Marriott, British Airways,
// Ticketmaster). Amounts are in GBP, not EUR.
inline constexpr std::string_view kCovidCurrency = "GBP";
std::vector<FinePair> covid_reduction_pairs();

// Article 83(2)(a) weights (1-5) assigned to ten sanctioned cases.
std::vector<double> seriousness_weights();

}  // namespace pdvar::fixtures
