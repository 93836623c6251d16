#pragma once

#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

namespace pdvar {

struct ExpertEstimate {
  std::string expert_id;
  int round = 1;
  std::string factor;  // art. 83(2) letter a-k or a free tag
  std::string scenario_id;
  double weight = 0.0;
};

struct WeightScale {
  double min = 1.0;
  double max = 5.0;
};

// CSV `expert_id,round,factor,scenario_id,weight`, validated against `scale`.
std::vector<ExpertEstimate> parse_estimates(std::istream& in, WeightScale scale = {});

struct Consensus {
  double mean = 0.0;
  double median = 0.0;
  std::size_t n = 0;
};

struct DelphiRound {
  int round = 1;
  std::map<std::string, Consensus> per_scenario;
  Consensus pooled;  // over every estimate in the round
};

struct DelphiResult {
  std::vector<DelphiRound> rounds;
  double last_shift = 0.0;  // max |mean_r - mean_{r-1}| over scenarios, final pair of rounds
  bool converged = true;
};

struct DelphiOptions {
  double epsilon = 0.25;  // a quarter step on the 1-5 scale
  WeightScale scale{};
};

// Per-round consensus. Rounds must run 1..k without gaps and never exceed `rounds`.
// Converged when the last inter-round mean shift of every scenario is below epsilon;
// a single round is trivially converged.
DelphiResult delphi_aggregate(std::span<const ExpertEstimate> estimates, int rounds, const DelphiOptions& options = {});

struct LensModel {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  Eigen::VectorXd residuals;
  double r_squared = 0.0;
  std::vector<std::string> factor_names;
};

// Ordinary least squares with an intercept, targets ~ observations.
// Rank deficiency (including a constant column) is reported with the offending columns.
LensModel lens_fit(const Eigen::MatrixXd& observations, const Eigen::VectorXd& targets,
                   std::vector<std::string> factor_names = {});

// Lens design built from estimates: one row per (expert, scenario) of the
// highest round, `target_factor` as target and every other factor as a column.
struct LensDesign {
  Eigen::MatrixXd observations;
  Eigen::VectorXd targets;
  std::vector<std::string> factor_names;
};
LensDesign lens_design(std::span<const ExpertEstimate> estimates, const std::string& target_factor);

struct NoiseReport {
  std::map<std::string, double> dispersion;  // scenario -> sample stddev across experts
  double noise_index = 0.0;                  // mean dispersion / mean weight
};

// Uses the highest round of each scenario; scenarios with fewer than two experts are skipped.
NoiseReport noise_report(std::span<const ExpertEstimate> estimates);

nlohmann::json to_json(const DelphiResult& r);
nlohmann::json to_json(const LensModel& m);
nlohmann::json to_json(const NoiseReport& r);

}  // namespace pdvar
