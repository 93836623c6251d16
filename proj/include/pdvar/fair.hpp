#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "pdvar/conformal.hpp"
#include "pdvar/jurimetrics.hpp"
#include "pdvar/rng.hpp"

namespace pdvar {

// Three-point estimate with PERT shape weight.
struct PertParams {
  double min = 0.0;
  double mode = 0.0;
  double max = 0.0;
  double lambda = 4.0;

  void validate() const;
  bool degenerate() const { return min == max; }
  double mean() const { return (min + lambda * mode + max) / (lambda + 2.0); }
  double alpha() const;  // Beta shape parameters
  double beta() const;
};

double draw_pert(const PertParams& params, Engine& rng);
Eigen::VectorXd sample_pert(const PertParams& params, std::size_t n, std::uint64_t seed);

// Monte Carlo P(tcap > rs) over n paired draws.
double vulnerability(const PertParams& tcap, const PertParams& rs, std::size_t n, std::uint64_t seed);

enum class FineRole { secondary_loss, primary_loss };
std::string_view to_string(FineRole role);

struct RiskScenario {
  PertParams tef;  // threat events per year
  PertParams tcap;  // 0-100
  PertParams rs;    // 0-100
  PertParams primary_magnitude;
  double slef = 0.0;
  PertParams secondary_magnitude;
  FineRole fine_role = FineRole::secondary_loss;

  void validate() const;
};

RiskScenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RiskScenario& s);

struct RangeSummary {
  double min = 0.0;
  double avg = 0.0;
  double max = 0.0;
};

struct LossSummary {
  RangeSummary loss_events_per_year;  // across iterations
  RangeSummary loss_magnitude;        // across individual loss events (zeros when none occurred)
  std::size_t total_events = 0;
};

struct SimulationResult {
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd annualized_losses;
  Eigen::VectorXd primary_losses;
  Eigen::VectorXd secondary_losses;
  Eigen::VectorXi primary_events;
  Eigen::VectorXi secondary_events;
  LossSummary primary_summary;
  LossSummary secondary_summary;
  std::optional<std::string> jurimetrical_source;
  std::vector<std::string> warnings;
};

struct SimulationOptions {
  std::size_t workers = 1;
};

// One substream per iteration: TEF draw (stochastically rounded to an event
// count), per-event P(tcap > rs) thinning, primary magnitudes, Binomial(k, slef)
// secondary events and magnitudes.
SimulationResult run_scenario(const RiskScenario& scenario, std::size_t iterations, std::uint64_t seed,
                              const SimulationOptions& options = {});

struct LossExceedanceCurve {
  std::vector<std::pair<double, double>> points;  // (threshold, P(loss >= threshold))
};

inline constexpr std::size_t kDefaultLecPoints = 50;

// Thresholds are sorted and de-duplicated; by default 50 evenly spaced quantiles of the losses.
LossExceedanceCurve loss_exceedance(const SimulationResult& result,
                                    std::optional<std::span<const double>> thresholds = std::nullopt);

struct PdVaRStatement {
  double confidence = 0.9;
  double lower = 0.0;
  double upper = 0.0;
  std::string timeframe = "next year";
  std::string rendered;
};

// Central interval of the positive losses. Throws ValidationError("no loss events simulated")
// when every iteration lost nothing.
PdVaRStatement pdvar_from_losses(const SimulationResult& result, double confidence,
                                 const std::string& timeframe = "next year");

// Magnitude envelope taken from the jurimetrical analysis.
struct JurimetricalEnvelope {
  double lower = 0.0;
  double upper = 0.0;
  std::string source;
};

JurimetricalEnvelope envelope_from(const HistoricalVaR& lower, const HistoricalVaR& upper);
JurimetricalEnvelope envelope_from(const ConformalInterval& interval);

using JurimetricalInput = std::variant<std::pair<HistoricalVaR, HistoricalVaR>, ConformalInterval>;
JurimetricalEnvelope envelope_from(const JurimetricalInput& input);

// Scenario with primary_magnitude replaced by PERT(lower, midpoint, upper) when the
// fine is the primary loss; unchanged otherwise.
RiskScenario calibrated_scenario(const RiskScenario& scenario, const JurimetricalEnvelope& envelope);

SimulationResult compose_calibrated_pdvar(const JurimetricalInput& jurimetrical, const RiskScenario& scenario,
                                          std::size_t iterations, std::uint64_t seed,
                                          const SimulationOptions& options = {});

nlohmann::json summary_json(const SimulationResult& result);
nlohmann::json to_json(const LossExceedanceCurve& curve);
nlohmann::json to_json(const PdVaRStatement& statement);

}  // namespace pdvar
