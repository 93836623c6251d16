#include "pdvar/probability.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pdvar/error.hpp"
#include "pdvar/numeric.hpp"

namespace pdvar {

Probability::Probability(double p) : p_(p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(fmt::format("probability {} outside [0, 1]", p));
}

PoissonModel fit_poisson(std::span<const long> counts) {
  if (counts.empty()) throw EmptySampleError("Poisson fit needs at least one yearly count");
  long total = 0;
  for (long c : counts) {
    if (c < 0) throw ValidationError("event counts must be non-negative");
    total += c;
  }
  if (total == 0) throw ValidationError("Poisson fit needs a positive mean count");
  return PoissonModel{static_cast<double>(total) / static_cast<double>(counts.size()), 1.0};
}

double poisson_pmf(const PoissonModel& model, long k) {
  if (k < 0) throw ValidationError("Poisson support starts at 0");
  if (!(model.lambda > 0.0)) throw ValidationError("Poisson lambda must be positive");
  const double kd = static_cast<double>(k);
  return std::exp(-model.lambda + kd * std::log(model.lambda) - std::lgamma(kd + 1.0));
}

NormalModel fit_normal(std::span<const double> amounts) {
  if (amounts.size() < 2) throw ValidationError("normal fit needs at least two observations");
  const Eigen::Map<const Eigen::VectorXd> v(amounts.data(), static_cast<Eigen::Index>(amounts.size()));
  const auto ms = mean_and_stddev(v);
  return NormalModel{ms.mean, ms.stddev};
}

BreachNetworkDerived solve_breach_network(const BreachNetworkParams& in) {
  BreachNetworkDerived d;
  d.p_ext = in.p_dpia * in.p_ext_given_dpia + in.p_dpia.complement() * in.p_ext_given_not_dpia;
  d.p_db = d.p_ext * in.p_db_given_ext + (1.0 - d.p_ext) * in.p_db_given_not_ext;
  if (d.p_db <= 0.0) throw DegenerateDenominatorError("P(db)", "P(db) is 0, so P(ext|db) is undefined");
  if (d.p_db >= 1.0) throw DegenerateDenominatorError("P(~db)", "P(~db) is 0, so P(ext|~db) is undefined");
  d.p_ext_given_db = in.p_db_given_ext * d.p_ext / d.p_db;
  d.p_ext_given_not_db = in.p_db_given_ext.complement() * d.p_ext / (1.0 - d.p_db);
  d.p_db_given_dpia = in.p_ext_given_dpia * in.p_db_given_ext + in.p_ext_given_dpia.complement() * in.p_db_given_not_ext;
  d.p_db_given_not_dpia =
      in.p_ext_given_not_dpia * in.p_db_given_ext + in.p_ext_given_not_dpia.complement() * in.p_db_given_not_ext;
  return d;
}

IncidentMix::IncidentMix(Probability c, Probability i, Probability a) : p_c(c), p_i(i), p_a(a) {
  if (std::abs(c + i + a - 1.0) > 1e-9) {
    throw ValidationError(fmt::format("incident mix must sum to 1, got {}", c + i + a));
  }
}

Attribution total_probability_attribution(const IncidentMix& mix, const FineGivenPrinciple& g) {
  const double jc = mix.p_c * g.p_d_given_c;
  const double ji = mix.p_i * g.p_d_given_i;
  const double ja = mix.p_a * g.p_d_given_a;
  Attribution out;
  out.p_d = jc + ji + ja;
  if (out.p_d <= 0.0) throw DegenerateDenominatorError("P(D)", "P(D) is 0, so posteriors are undefined");
  out.posterior_c = jc / out.p_d;
  out.posterior_i = ji / out.p_d;
  out.posterior_a = ja / out.p_d;
  return out;
}

namespace {
Probability prob_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(fmt::format("missing field '{}'", key));
  if (!j[key].is_number()) throw ValidationError(fmt::format("field '{}' must be a number", key));
  return Probability(j[key].get<double>());
}
}  // namespace

BreachNetworkParams breach_params_from_json(const nlohmann::json& j) {
  return {prob_field(j, "p_dpia"), prob_field(j, "p_ext_given_dpia"), prob_field(j, "p_ext_given_not_dpia"),
          prob_field(j, "p_db_given_ext"), prob_field(j, "p_db_given_not_ext")};
}

nlohmann::json to_json(const BreachNetworkParams& p) {
  return {{"p_dpia", p.p_dpia.value()},
          {"p_ext_given_dpia", p.p_ext_given_dpia.value()},
          {"p_ext_given_not_dpia", p.p_ext_given_not_dpia.value()},
          {"p_db_given_ext", p.p_db_given_ext.value()},
          {"p_db_given_not_ext", p.p_db_given_not_ext.value()}};
}

nlohmann::json to_json(const BreachNetworkDerived& d) {
  return {{"p_ext", d.p_ext},
          {"p_db", d.p_db},
          {"p_ext_given_db", d.p_ext_given_db},
          {"p_ext_given_not_db", d.p_ext_given_not_db},
          {"p_db_given_dpia", d.p_db_given_dpia},
          {"p_db_given_not_dpia", d.p_db_given_not_dpia}};
}

IncidentMix incident_mix_from_json(const nlohmann::json& j) {
  return IncidentMix(prob_field(j, "p_c"), prob_field(j, "p_i"), prob_field(j, "p_a"));
}

FineGivenPrinciple fine_given_from_json(const nlohmann::json& j) {
  return {prob_field(j, "p_d_given_c"), prob_field(j, "p_d_given_i"), prob_field(j, "p_d_given_a")};
}

nlohmann::json to_json(const Attribution& a) {
  return {{"p_d", a.p_d}, {"posterior_c", a.posterior_c}, {"posterior_i", a.posterior_i}, {"posterior_a", a.posterior_a}};
}

}  // namespace pdvar
