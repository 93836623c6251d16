#include "pdvar/fixtures.hpp"

namespace pdvar::fixtures {

namespace {
constexpr std::string_view kTurnoverBand =
    "id,date,year,country,controller,fine_eur,turnover_eur,article,security_principle,records_affected,cause\n"
    "1,2019-05,2019,FR,Sergic_SAS,400000.00,,,,,\n"
    "2,2019-11,2019,FR,Futura_International,500000.00,,,,,\n"
    "27,2021-01,2021,UK,Rancom Security Limited,1279000.00,,,,,\n"
    "47,2021-07,2021,FR,AG2R_La_Mondiale,1750000.00,,,,,\n"
    "52,2021-12,2021,ES,NBQ_technology,24000.00,,,,,\n"
    "55,2022-04,2022,FR,Dedalus Biologie,1500000.00,,,,,\n"
    "61,2023-05,2023,FR,Doctissimo,380000.00,,,,,\n"
    "71,2022-10,2022,UK,EasyLife ltd,1567000.00,,,,,\n"
    "95,2022-12,2022,IE,Virtue integrated Elder Care,100000.00,,,,,\n"
    "96,2022-12,2022,IE,A&G couriers,15000.00,,,,,\n"
    "106,2021-03,2021,IE,Irish Credit Bureau,90000.00,,,,,\n";
}  // namespace

std::string_view turnover_band_csv() { return kTurnoverBand; }

FineCorpus turnover_band_corpus() { return parse_corpus(kTurnoverBand, "fixture:turnover-band-10M-100M"); }

std::vector<FinePair> covid_reduction_pairs() {
  return {
      {Money::from_units(18'400'000), Money::from_units(24'000'000)},  // Marriott
      {Money::from_units(20'000'000), Money::from_units(24'000'000)},  // British Airways
      {Money::from_units(1'250'000), Money::from_units(1'500'000)},    // Ticketmaster
  };
}

std::vector<double> seriousness_weights() { return {5, 5, 3, 3, 2, 4, 1, 2, 4, 5}; }

}  // namespace pdvar::fixtures
