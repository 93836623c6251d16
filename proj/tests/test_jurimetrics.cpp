#include <doctest.h>

#include <random>

#include "oracles/oracles.hpp"
#include "pdvar/error.hpp"
#include "pdvar/fixtures.hpp"
#include "pdvar/jurimetrics.hpp"
#include "pdvar/numeric.hpp"

using namespace pdvar;

namespace {
CorpusQuery only(const char* code) {
  CorpusQuery q;
  q.countries = std::set<Country>{Country(code)};
  return q;
}

FineCorpus corpus_of(const std::vector<double>& fines) {
  std::vector<FineRecord> rs;
  for (std::size_t i = 0; i < fines.size(); ++i) {
    FineRecord r;
    r.id = std::to_string(i);
    r.date = {2020, 1};
    r.year = 2020;
    r.fine = Money::from_double(fines[i]);
    rs.push_back(r);
  }
  return FineCorpus(rs, "test");
}
}  // namespace

TEST_CASE("country means on the turnover-band fixture") {
  const FineCorpus c = fixtures::turnover_band_corpus();
  CHECK(country_mean(c, Country::france()).to_string() == "906000.00");
  CHECK(country_mean(c, Country::united_kingdom()).to_string() == "1423000.00");
  CHECK(country_mean(c, Country::spain()).to_string() == "24000.00");
  CHECK(std::abs(country_mean(c, Country::ireland()).to_double() - 68333.33333333333) <= 0.01);
  CHECK_THROWS_AS(country_mean(c, Country("DE")), EmptySampleError);
  CHECK(country_mean(corpus_of({1234.56}), Country::france()).to_string() == "1234.56");
}

TEST_CASE("historical VaR on the French fines") {
  const FineCorpus c = fixtures::turnover_band_corpus();
  // hand oracle: sorted 380000 400000 500000 1500000 1750000
  CHECK(historical_var(c, only("FR"), 0.90).value == doctest::Approx(1650000.0).epsilon(1e-15));  // h = 3.6
  CHECK(historical_var(c, only("FR"), 0.20).value == doctest::Approx(396000.0).epsilon(1e-15));   // h = 0.8
  const auto v = historical_var(c, only("FR"), 0.5);
  CHECK(v.corpus_size == 5);
  CHECK(v.query == only("FR"));
  CHECK(historical_var(corpus_of({42.0}), {}, 0.37).value == 42.0);
  CHECK_THROWS_AS(historical_var(c, only("DE"), 0.5), EmptySampleError);
  CHECK_THROWS_AS(historical_var(c, {}, 0.0), ValidationError);
  CHECK_THROWS_AS(historical_var(c, {}, 1.0), ValidationError);
}

TEST_CASE("historical VaR matches the sort-and-interpolate oracle and is monotone") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(1, 12);
  std::uniform_int_distribution<long> cents(0, 300'000'000);
  std::uniform_real_distribution<double> level(1e-6, 1.0 - 1e-6);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> xs(static_cast<std::size_t>(size(rng)));
    for (auto& x : xs) x = static_cast<double>(cents(rng)) / 100.0;
    const FineCorpus c = corpus_of(xs);
    double l1 = level(rng), l2 = level(rng);
    if (l1 > l2) std::swap(l1, l2);
    const auto v1 = historical_var(c, {}, l1);
    const auto v2 = historical_var(c, {}, l2);
    CHECK(std::abs(v1.value - oracle::quantile(xs, l1)) <= 1e-9 * std::max(1.0, std::abs(v1.value)));
    CHECK(v1.value <= v2.value);
    CHECK(v1.value >= *std::min_element(xs.begin(), xs.end()));
    CHECK(v2.value <= *std::max_element(xs.begin(), xs.end()));
  }
}

TEST_CASE("seriousness delta on the COVID reduction pairs") {
  const auto pairs = fixtures::covid_reduction_pairs();
  const DeltaReport r = seriousness_delta(pairs);
  CHECK(r.mean_counterfactual.to_string() == "16500000.00");
  CHECK(r.mean_actual.to_string() == "13216666.67");
  CHECK(r.delta.to_string() == "3283333.33");
  CHECK(std::abs(r.delta.to_double() - 3283334.0) <= 1.0);
  CHECK(r.delta == r.mean_counterfactual - r.mean_actual);
  CHECK(r.n == 3);
}

TEST_CASE("seriousness delta edge cases") {
  const std::vector<FinePair> same = {{Money::from_units(5), Money::from_units(5)}, {Money::from_units(7), Money::from_units(7)}};
  CHECK(seriousness_delta(same).delta == Money{});
  const std::vector<FinePair> single = {{Money::from_units(0), Money::from_units(100)}};
  CHECK(seriousness_delta(single).delta == Money::from_units(100));
  CHECK_THROWS_AS(seriousness_delta(std::vector<FinePair>{}), EmptySampleError);
}
