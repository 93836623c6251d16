#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

namespace pdvar {

enum class ConformalMethod { transductive, inductive };
std::string_view to_string(ConformalMethod m);

struct ConformalInterval {
  double lower = 0.0;
  double upper = 0.0;
  double nominal_confidence = 0.0;
  ConformalMethod method = ConformalMethod::transductive;
  std::vector<std::size_t> retained;  // sample indices inside the set
  std::vector<std::size_t> excluded;
};

// |x_i - mean of the other n-1 points| for every i.
Eigen::VectorXd leave_one_out_scores(const Eigen::Ref<const Eigen::VectorXd>& amounts);

// Full (transductive) conformal set over a featureless sample. The
// floor(alpha (n + 1)) highest-scoring points are excluded, except that a tie
// straddling the cut keeps every tied point. Interval = [min, max] of the rest.
ConformalInterval transductive_interval(const Eigen::Ref<const Eigen::VectorXd>& amounts, double alpha);

struct SplitConfig {
  double train_fraction = 0.5;
  double calibration_fraction = 0.25;  // test gets the remainder
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train, calibration, test;
};

// Seeded random partition of [0, n).
SplitIndices split_indices(std::size_t n, const SplitConfig& config);

struct LabeledSet {
  Eigen::MatrixXd features;  // one row per point
  Eigen::VectorXd amounts;
};

// Point predictor already fitted on the training split. Returns one prediction per feature row.
using Predictor = std::function<Eigen::VectorXd(const Eigen::MatrixXd& features)>;

Predictor fit_mean_predictor(const LabeledSet& train);
// Least squares on the first feature column.
Predictor fit_linear_predictor(const LabeledSet& train);

// Smallest calibration size for which ceil((m + 1)(1 - alpha)) <= m.
std::size_t min_calibration_size(double alpha);

// Inductive conformal intervals yhat +/- q, q the ceil((m + 1)(1 - alpha))-th smallest
// calibration residual. `retained`/`excluded` refer to calibration indices.
std::vector<ConformalInterval> split_conformal(const LabeledSet& calibration, const Eigen::MatrixXd& predict_points,
                                               double alpha, const Predictor& predictor);

// Fraction of truths inside their interval, bounds inclusive.
double empirical_coverage(std::span<const ConformalInterval> intervals, std::span<const double> truths);

// Synthetic exchangeable experiment: x ~ U(0, 10), y = x + N(0, noise_sd).
struct CoverageExperiment {
  std::size_t train = 100;
  std::size_t calibration = 50;
  std::size_t test = 100;
  double alpha = 0.1;
  double noise_sd = 1.0;
};

struct CoverageSummary {
  std::vector<double> per_run;
  double mean_coverage = 0.0;
};

// Each resimulation draws from its own substream; the summary is identical for any worker count.
CoverageSummary simulate_split_coverage(const CoverageExperiment& experiment, std::size_t resimulations,
                                        std::uint64_t seed, std::size_t workers = 1);

nlohmann::json to_json(const ConformalInterval& interval);

}  // namespace pdvar
