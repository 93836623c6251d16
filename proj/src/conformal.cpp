#include "pdvar/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pdvar/error.hpp"
#include "pdvar/expert.hpp"
#include "pdvar/rng.hpp"

namespace pdvar {

namespace {

// Absorbs representation error in products like 0.29 * 100 before floor/ceil.
constexpr double kIndexSlack = 1e-9;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie strictly between 0 and 1");
}

std::size_t calibration_rank(std::size_t m, double alpha) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(m + 1) * (1.0 - alpha) - kIndexSlack));
}

}  // namespace

std::string_view to_string(ConformalMethod m) {
  return m == ConformalMethod::transductive ? "transductive" : "inductive";
}

Eigen::VectorXd leave_one_out_scores(const Eigen::Ref<const Eigen::VectorXd>& amounts) {
  const Eigen::Index n = amounts.size();
  if (n < 2) throw ValidationError("leave-one-out scores need at least two points");
  const double total = amounts.sum();
  const double others = static_cast<double>(n - 1);
  return (amounts.array() - (total - amounts.array()) / others).abs().matrix();
}

ConformalInterval transductive_interval(const Eigen::Ref<const Eigen::VectorXd>& amounts, double alpha) {
  check_alpha(alpha);
  const auto n = static_cast<std::size_t>(amounts.size());
  if (n < 2) throw ValidationError("transductive conformal prediction needs at least two points");
  const Eigen::VectorXd scores = leave_one_out_scores(amounts);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });

  auto to_exclude = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n + 1) + kIndexSlack));
  to_exclude = std::min(to_exclude, n - 1);  // at least one point stays in the set

  ConformalInterval out;
  out.method = ConformalMethod::transductive;
  out.nominal_confidence = 1.0 - alpha;
  std::vector<bool> excluded(n, false);
  if (to_exclude > 0) {
    const double cut = scores(static_cast<Eigen::Index>(order[to_exclude]));
    for (std::size_t r = 0; r < to_exclude; ++r) {
      if (scores(static_cast<Eigen::Index>(order[r])) > cut) excluded[order[r]] = true;
    }
  }
  out.lower = std::numeric_limits<double>::infinity();
  out.upper = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (excluded[i]) {
      out.excluded.push_back(i);
    } else {
      out.retained.push_back(i);
      out.lower = std::min(out.lower, amounts(static_cast<Eigen::Index>(i)));
      out.upper = std::max(out.upper, amounts(static_cast<Eigen::Index>(i)));
    }
  }
  return out;
}

SplitIndices split_indices(std::size_t n, const SplitConfig& config) {
  const double tf = config.train_fraction;
  const double cf = config.calibration_fraction;
  if (!(tf > 0.0 && tf < 1.0 && cf > 0.0 && cf < 1.0) || tf + cf > 1.0 + kIndexSlack) {
    throw ValidationError("split fractions must lie in (0, 1) and sum to at most 1");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Engine rng = substream(config.seed, 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::floor(tf * static_cast<double>(n) + kIndexSlack));
  const auto n_cal = std::min(n - n_train, static_cast<std::size_t>(std::floor(cf * static_cast<double>(n) + kIndexSlack)));
  SplitIndices out;
  out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.calibration.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                         perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_cal));
  out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_cal), perm.end());
  return out;
}

Predictor fit_mean_predictor(const LabeledSet& train) {
  if (train.amounts.size() == 0) throw EmptySampleError("mean predictor needs training data");
  const double m = train.amounts.mean();
  return [m](const Eigen::MatrixXd& features) { return Eigen::VectorXd::Constant(features.rows(), m); };
}

Predictor fit_linear_predictor(const LabeledSet& train) {
  if (train.features.cols() < 1) throw ValidationError("linear predictor needs one feature column");
  const LensModel fit = lens_fit(train.features.leftCols(1), train.amounts, {"x"});
  const double slope = fit.coefficients(0);
  const double intercept = fit.intercept;
  return [slope, intercept](const Eigen::MatrixXd& features) {
    return (intercept + slope * features.col(0).array()).matrix().eval();
  };
}

std::size_t min_calibration_size(double alpha) {
  check_alpha(alpha);
  std::size_t m = 1;
  while (calibration_rank(m, alpha) > m) ++m;
  return m;
}

std::vector<ConformalInterval> split_conformal(const LabeledSet& calibration, const Eigen::MatrixXd& predict_points,
                                               double alpha, const Predictor& predictor) {
  check_alpha(alpha);
  const auto m = static_cast<std::size_t>(calibration.amounts.size());
  if (m == 0) throw EmptySampleError("split conformal needs a non-empty calibration set");
  if (calibration.features.rows() != calibration.amounts.size()) {
    throw ValidationError("calibration features and amounts differ in length");
  }
  const std::size_t k = calibration_rank(m, alpha);
  if (k > m) {
    throw ValidationError(fmt::format("calibration set of {} is too small for alpha {}; need at least {}", m, alpha,
                                      min_calibration_size(alpha)));
  }
  const Eigen::VectorXd scores = (calibration.amounts - predictor(calibration.features)).cwiseAbs();
  Eigen::VectorXd sorted = scores;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  const double q = sorted(static_cast<Eigen::Index>(k - 1));

  std::vector<std::size_t> retained, excluded;
  for (std::size_t i = 0; i < m; ++i) (scores(static_cast<Eigen::Index>(i)) <= q ? retained : excluded).push_back(i);

  const Eigen::VectorXd yhat = predictor(predict_points);
  std::vector<ConformalInterval> out;
  out.reserve(static_cast<std::size_t>(yhat.size()));
  for (Eigen::Index i = 0; i < yhat.size(); ++i) {
    out.push_back({yhat(i) - q, yhat(i) + q, 1.0 - alpha, ConformalMethod::inductive, retained, excluded});
  }
  return out;
}

double empirical_coverage(std::span<const ConformalInterval> intervals, std::span<const double> truths) {
  if (intervals.size() != truths.size()) throw ValidationError("intervals and truths differ in length");
  if (intervals.empty()) throw EmptySampleError("coverage of an empty set");
  std::size_t inside = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (truths[i] >= intervals[i].lower && truths[i] <= intervals[i].upper) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(truths.size());
}

CoverageSummary simulate_split_coverage(const CoverageExperiment& ex, std::size_t resimulations, std::uint64_t seed,
                                        std::size_t workers) {
  if (resimulations == 0) throw ValidationError("at least one resimulation required");
  CoverageSummary summary;
  summary.per_run.assign(resimulations, 0.0);
  parallel_for(resimulations, workers, [&](std::size_t r) {
    Engine rng = substream(seed, r);
    std::uniform_real_distribution<double> x_dist(0.0, 10.0);
    std::normal_distribution<double> noise(0.0, ex.noise_sd);
    auto draw = [&](std::size_t count) {
      LabeledSet s{Eigen::MatrixXd(static_cast<Eigen::Index>(count), 1), Eigen::VectorXd(static_cast<Eigen::Index>(count))};
      for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(count); ++i) {
        s.features(i, 0) = x_dist(rng);
        s.amounts(i) = s.features(i, 0) + noise(rng);
      }
      return s;
    };
    const LabeledSet train = draw(ex.train);
    const LabeledSet cal = draw(ex.calibration);
    const LabeledSet test = draw(ex.test);
    const auto intervals = split_conformal(cal, test.features, ex.alpha, fit_linear_predictor(train));
    summary.per_run[r] = empirical_coverage(intervals, std::span<const double>(test.amounts.data(), ex.test));
  });
  double total = 0.0;
  for (double c : summary.per_run) total += c;
  summary.mean_coverage = total / static_cast<double>(resimulations);
  return summary;
}

nlohmann::json to_json(const ConformalInterval& c) {
  return {{"lower", c.lower},
          {"upper", c.upper},
          {"confidence", c.nominal_confidence},
          {"method", std::string(to_string(c.method))},
          {"excluded_ids", c.excluded}};
}

}  // namespace pdvar
