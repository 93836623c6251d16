#include "pdvar/expert.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include "pdvar/corpus.hpp"
#include "pdvar/error.hpp"
#include "pdvar/numeric.hpp"

namespace pdvar {

namespace {

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Consensus consensus_of(const std::vector<double>& weights) {
  const Eigen::VectorXd v = to_vector(weights);
  return Consensus{v.mean(), median(v), weights.size()};
}

}  // namespace

std::vector<ExpertEstimate> parse_estimates(std::istream& in, WeightScale scale) {
  const auto rows = read_csv(in);
  if (rows.empty()) throw ParseError(1, "*", "missing header row");
  const std::vector<std::string> header = {"expert_id", "round", "factor", "scenario_id", "weight"};
  if (rows[0] != header) throw ParseError(1, "*", "header must be 'expert_id,round,factor,scenario_id,weight'");
  std::vector<ExpertEstimate> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    const std::size_t row = i + 1;
    if (f.size() != 5) throw ParseError(row, "*", fmt::format("expected 5 fields, found {}", f.size()));
    ExpertEstimate e;
    e.expert_id = f[0];
    if (e.expert_id.empty()) throw ParseError(row, "expert_id", "must not be empty");
    const auto [p, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), e.round);
    if (ec != std::errc{} || p != f[1].data() + f[1].size() || e.round < 1) {
      throw ParseError(row, "round", "must be a positive integer");
    }
    e.factor = f[2];
    e.scenario_id = f[3];
    if (e.scenario_id.empty()) throw ParseError(row, "scenario_id", "must not be empty");
    try {
      std::size_t used = 0;
      e.weight = std::stod(f[4], &used);
      if (used != f[4].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(row, "weight", fmt::format("not a number: '{}'", f[4]));
    }
    if (e.weight < scale.min || e.weight > scale.max) {
      throw ParseError(row, "weight", fmt::format("{} outside scale [{}, {}]", e.weight, scale.min, scale.max));
    }
    out.push_back(std::move(e));
  }
  return out;
}

DelphiResult delphi_aggregate(std::span<const ExpertEstimate> estimates, int rounds, const DelphiOptions& options) {
  if (estimates.empty()) throw EmptySampleError("Delphi aggregation needs at least one estimate");
  if (rounds < 1) throw ValidationError("round count must be positive");
  std::map<int, std::map<std::string, std::vector<double>>> by_round;
  std::map<int, std::vector<double>> pooled;
  for (const auto& e : estimates) {
    if (e.round < 1 || e.round > rounds) {
      throw ValidationError(fmt::format("estimate from expert {} references round {} outside 1..{}", e.expert_id,
                                        e.round, rounds));
    }
    if (e.weight < options.scale.min || e.weight > options.scale.max) {
      throw ValidationError(fmt::format("weight {} outside scale [{}, {}]", e.weight, options.scale.min,
                                        options.scale.max));
    }
    by_round[e.round][e.scenario_id].push_back(e.weight);
    pooled[e.round].push_back(e.weight);
  }
  int expected = 1;
  for (const auto& [r, _] : by_round) {
    if (r != expected) throw ValidationError(fmt::format("round {} present but round {} is missing", r, expected));
    ++expected;
  }

  DelphiResult result;
  for (const auto& [r, scenarios] : by_round) {
    DelphiRound dr;
    dr.round = r;
    for (const auto& [sid, weights] : scenarios) dr.per_scenario[sid] = consensus_of(weights);
    dr.pooled = consensus_of(pooled[r]);
    result.rounds.push_back(std::move(dr));
  }
  if (result.rounds.size() >= 2) {
    const auto& prev = result.rounds[result.rounds.size() - 2];
    const auto& last = result.rounds.back();
    double shift = 0.0;
    for (const auto& [sid, c] : last.per_scenario) {
      const auto it = prev.per_scenario.find(sid);
      if (it == prev.per_scenario.end()) continue;
      shift = std::max(shift, std::abs(c.mean - it->second.mean));
    }
    result.last_shift = shift;
    result.converged = shift < options.epsilon;
  }
  return result;
}

LensModel lens_fit(const Eigen::MatrixXd& observations, const Eigen::VectorXd& targets,
                   std::vector<std::string> factor_names) {
  const Eigen::Index n = observations.rows();
  const Eigen::Index p = observations.cols();
  if (targets.size() != n) throw ValidationError("targets and observations differ in row count");
  if (n < p + 1) {
    throw ValidationError(fmt::format("{} observations cannot identify {} factors plus an intercept", n, p));
  }
  if (factor_names.empty()) {
    for (Eigen::Index j = 0; j < p; ++j) factor_names.push_back(fmt::format("x{}", j));
  }
  if (static_cast<Eigen::Index>(factor_names.size()) != p) throw ValidationError("one name per factor column required");

  Eigen::MatrixXd design(n, p + 1);
  design.col(0).setOnes();
  design.rightCols(p) = observations;

  constexpr double kRankThreshold = 1e-10;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(kRankThreshold);
  if (qr.rank() < p + 1) {
    // Walk the columns left to right; a column that adds no rank is collinear with its predecessors.
    std::vector<std::string> collinear;
    std::vector<Eigen::Index> basis;
    for (Eigen::Index j = 0; j <= p; ++j) {
      Eigen::MatrixXd trial(n, static_cast<Eigen::Index>(basis.size()) + 1);
      for (std::size_t b = 0; b < basis.size(); ++b) trial.col(static_cast<Eigen::Index>(b)) = design.col(basis[b]);
      trial.rightCols(1) = design.col(j);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> sub(trial);
      sub.setThreshold(kRankThreshold);
      if (sub.rank() == trial.cols()) {
        basis.push_back(j);
      } else {
        collinear.push_back(j == 0 ? "intercept" : factor_names[static_cast<std::size_t>(j - 1)]);
      }
    }
    throw ValidationError(fmt::format("rank-deficient design matrix; collinear columns: {}", fmt::join(collinear, ", ")));
  }

  LensModel model;
  model.factor_names = std::move(factor_names);
  const double y_mean = targets.mean();
  const double sst = (targets.array() - y_mean).square().sum();
  if (sst == 0.0) {
    model.coefficients = Eigen::VectorXd::Zero(p);
    model.intercept = y_mean;
    model.residuals = Eigen::VectorXd::Zero(n);
    model.r_squared = 0.0;
    return model;
  }
  const Eigen::VectorXd beta = qr.solve(targets);
  model.intercept = beta(0);
  model.coefficients = beta.tail(p);
  model.residuals = targets - design * beta;
  model.r_squared = std::clamp(1.0 - model.residuals.squaredNorm() / sst, 0.0, 1.0);
  return model;
}

LensDesign lens_design(std::span<const ExpertEstimate> estimates, const std::string& target_factor) {
  if (estimates.empty()) throw EmptySampleError("Lens design needs estimates");
  int last_round = 0;
  for (const auto& e : estimates) last_round = std::max(last_round, e.round);
  std::set<std::string> factors;
  std::map<std::pair<std::string, std::string>, std::map<std::string, double>> rows;
  for (const auto& e : estimates) {
    if (e.round != last_round) continue;
    if (e.factor != target_factor) factors.insert(e.factor);
    rows[{e.expert_id, e.scenario_id}][e.factor] = e.weight;
  }
  if (factors.empty()) throw ValidationError("Lens design needs at least one non-target factor");
  LensDesign d;
  d.factor_names.assign(factors.begin(), factors.end());
  d.observations.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(factors.size()));
  d.targets.resize(static_cast<Eigen::Index>(rows.size()));
  Eigen::Index i = 0;
  for (const auto& [key, values] : rows) {
    const auto t = values.find(target_factor);
    if (t == values.end()) {
      throw ValidationError(fmt::format("expert {} gave no '{}' score for scenario {}", key.first, target_factor,
                                        key.second));
    }
    d.targets(i) = t->second;
    Eigen::Index j = 0;
    for (const auto& f : d.factor_names) {
      const auto v = values.find(f);
      if (v == values.end()) {
        throw ValidationError(fmt::format("expert {} gave no '{}' weight for scenario {}", key.first, f, key.second));
      }
      d.observations(i, j++) = v->second;
    }
    ++i;
  }
  return d;
}

NoiseReport noise_report(std::span<const ExpertEstimate> estimates) {
  std::map<std::string, int> last_round;
  for (const auto& e : estimates) last_round[e.scenario_id] = std::max(last_round[e.scenario_id], e.round);
  std::map<std::string, std::vector<double>> weights;
  std::map<std::string, std::set<std::string>> experts;
  for (const auto& e : estimates) {
    if (e.round != last_round[e.scenario_id]) continue;
    weights[e.scenario_id].push_back(e.weight);
    experts[e.scenario_id].insert(e.expert_id);
  }
  NoiseReport report;
  double dispersion_sum = 0.0;
  double weight_sum = 0.0;
  std::size_t weight_count = 0;
  for (const auto& [sid, w] : weights) {
    if (experts[sid].size() < 2) continue;
    const auto ms = mean_and_stddev(to_vector(w));
    report.dispersion[sid] = ms.stddev;
    dispersion_sum += ms.stddev;
    weight_sum += ms.mean * static_cast<double>(w.size());
    weight_count += w.size();
  }
  if (report.dispersion.empty()) throw ValidationError("noise report needs a scenario rated by at least two experts");
  const double mean_dispersion = dispersion_sum / static_cast<double>(report.dispersion.size());
  const double mean_weight = weight_sum / static_cast<double>(weight_count);
  if (mean_weight == 0.0) {
    if (mean_dispersion != 0.0) throw DegenerateDenominatorError("mean weight", "mean weight is 0; noise index undefined");
    report.noise_index = 0.0;
  } else {
    report.noise_index = mean_dispersion / std::abs(mean_weight);
  }
  return report;
}

nlohmann::json to_json(const DelphiResult& r) {
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& dr : r.rounds) {
    nlohmann::json scen = nlohmann::json::object();
    for (const auto& [sid, c] : dr.per_scenario) scen[sid] = {{"mean", c.mean}, {"median", c.median}, {"n", c.n}};
    rounds.push_back({{"round", dr.round},
                      {"scenarios", scen},
                      {"pooled", {{"mean", dr.pooled.mean}, {"median", dr.pooled.median}, {"n", dr.pooled.n}}}});
  }
  return {{"rounds", rounds}, {"last_shift", r.last_shift}, {"converged", r.converged}};
}

nlohmann::json to_json(const LensModel& m) {
  nlohmann::json coef = nlohmann::json::object();
  for (std::size_t j = 0; j < m.factor_names.size(); ++j) coef[m.factor_names[j]] = m.coefficients(static_cast<Eigen::Index>(j));
  return {{"coefficients", coef},
          {"intercept", m.intercept},
          {"r_squared", m.r_squared},
          {"residuals", std::vector<double>(m.residuals.data(), m.residuals.data() + m.residuals.size())}};
}

nlohmann::json to_json(const NoiseReport& r) {
  return {{"dispersion", r.dispersion}, {"noise_index", r.noise_index}};
}

}  // namespace pdvar
