#pragma once

#include <span>

#include <nlohmann/json_fwd.hpp>

namespace pdvar {

// A value in [0, 1]. Out-of-range input is rejected, never clamped.
class Probability {
 public:
  constexpr Probability() = default;
  Probability(double p);  // NOLINT(google-explicit-constructor): probabilities read naturally as literals
  constexpr double value() const { return p_; }
  constexpr operator double() const { return p_; }  // NOLINT
  constexpr double complement() const { return 1.0 - p_; }

 private:
  double p_ = 0.0;
};

struct PoissonModel {
  double lambda = 1.0;  // expected events per timeframe
  double timeframe_years = 1.0;
};

struct NormalModel {
  double mu = 0.0;
  double sigma = 0.0;
};

// lambda = mean of per-year event counts. Empty or all-zero input is rejected.
PoissonModel fit_poisson(std::span<const long> counts_per_year);
// e^-lambda lambda^k / k!, evaluated in log space.
double poisson_pmf(const PoissonModel& model, long k);

// Sample mean and n-1 standard deviation; n >= 2.
NormalModel fit_normal(std::span<const double> amounts);

// Conditional inputs of the fixed dpia -> ext -> db network.
struct BreachNetworkParams {
  Probability p_dpia;
  Probability p_ext_given_dpia;
  Probability p_ext_given_not_dpia;
  Probability p_db_given_ext;
  Probability p_db_given_not_ext;
};

struct BreachNetworkDerived {
  double p_ext = 0.0;
  double p_db = 0.0;
  double p_ext_given_db = 0.0;
  double p_ext_given_not_db = 0.0;
  double p_db_given_dpia = 0.0;
  double p_db_given_not_dpia = 0.0;
};

// P(~ext) and P(~db) are taken as complements of the derived marginals.
// Throws DegenerateDenominatorError when P(db) is 0 or 1.
BreachNetworkDerived solve_breach_network(const BreachNetworkParams& params);

// Shares of confidentiality / integrity / availability incidents; must sum to 1.
struct IncidentMix {
  IncidentMix(Probability c, Probability i, Probability a);
  Probability p_c, p_i, p_a;
};

struct FineGivenPrinciple {
  Probability p_d_given_c, p_d_given_i, p_d_given_a;
};

struct Attribution {
  double p_d = 0.0;
  double posterior_c = 0.0;
  double posterior_i = 0.0;
  double posterior_a = 0.0;
};

Attribution total_probability_attribution(const IncidentMix& mix, const FineGivenPrinciple& fine_given);

BreachNetworkParams breach_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BreachNetworkParams& p);
nlohmann::json to_json(const BreachNetworkDerived& d);
IncidentMix incident_mix_from_json(const nlohmann::json& j);
FineGivenPrinciple fine_given_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Attribution& a);

}  // namespace pdvar
