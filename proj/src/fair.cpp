#include "pdvar/fair.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pdvar/error.hpp"
#include "pdvar/numeric.hpp"
#include "pdvar/report.hpp"

namespace pdvar {

void PertParams::validate() const {
  if (!std::isfinite(min) || !std::isfinite(mode) || !std::isfinite(max)) {
    throw ValidationError("PERT parameters must be finite");
  }
  if (!(min <= mode && mode <= max)) {
    throw ValidationError(fmt::format("PERT requires min <= mode <= max, got ({}, {}, {})", min, mode, max));
  }
  if (!(lambda > 0.0)) throw ValidationError("PERT shape weight must be positive");
}

double PertParams::alpha() const { return degenerate() ? 1.0 : 1.0 + lambda * (mode - min) / (max - min); }
double PertParams::beta() const { return degenerate() ? 1.0 : 1.0 + lambda * (max - mode) / (max - min); }

double draw_pert(const PertParams& p, Engine& rng) {
  if (p.degenerate()) return p.min;
  std::gamma_distribution<double> ga(p.alpha(), 1.0);
  std::gamma_distribution<double> gb(p.beta(), 1.0);
  const double a = ga(rng);
  const double b = gb(rng);
  const double x = a + b > 0.0 ? a / (a + b) : 0.5;
  return std::clamp(p.min + x * (p.max - p.min), p.min, p.max);
}

Eigen::VectorXd sample_pert(const PertParams& params, std::size_t n, std::uint64_t seed) {
  params.validate();
  if (n == 0) throw ValidationError("sample count must be positive");
  Engine rng = substream(seed, 0);
  Eigen::VectorXd out(static_cast<Eigen::Index>(n));
  for (auto& v : out) v = draw_pert(params, rng);
  return out;
}

double vulnerability(const PertParams& tcap, const PertParams& rs, std::size_t n, std::uint64_t seed) {
  tcap.validate();
  rs.validate();
  if (n == 0) throw ValidationError("sample count must be positive");
  Engine rng = substream(seed, 0);
  std::size_t wins = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double capability = draw_pert(tcap, rng);
    const double resistance = draw_pert(rs, rng);
    if (capability > resistance) ++wins;
  }
  return static_cast<double>(wins) / static_cast<double>(n);
}

std::string_view to_string(FineRole role) {
  return role == FineRole::primary_loss ? "primary_loss" : "secondary_loss";
}

void RiskScenario::validate() const {
  tef.validate();
  if (tef.min < 0.0) throw ValidationError("threat event frequency must be non-negative");
  tcap.validate();
  rs.validate();
  primary_magnitude.validate();
  secondary_magnitude.validate();
  if (!(slef >= 0.0 && slef <= 1.0)) throw ValidationError("slef must lie in [0, 1]");
}

namespace {

PertParams pert_from_json(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(fmt::format("scenario is missing '{}'", key));
  const auto& o = j.at(key);
  try {
    PertParams p{o.at("min").get<double>(), o.at("mode").get<double>(), o.at("max").get<double>(),
                 o.value("lambda", 4.0)};
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(fmt::format("scenario field '{}': {}", key, e.what()));
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("scenario field '{}': {}", key, e.what()));
  }
}

nlohmann::json pert_json(const PertParams& p) {
  return {{"min", p.min}, {"mode", p.mode}, {"max", p.max}, {"lambda", p.lambda}};
}

struct IterationOutcome {
  double primary = 0.0;
  double secondary = 0.0;
  int primary_events = 0;
  int secondary_events = 0;
  double primary_min = std::numeric_limits<double>::infinity();
  double primary_max = -std::numeric_limits<double>::infinity();
  double secondary_min = std::numeric_limits<double>::infinity();
  double secondary_max = -std::numeric_limits<double>::infinity();
};

IterationOutcome simulate_iteration(const RiskScenario& s, Engine& rng) {
  IterationOutcome out;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double tef = draw_pert(s.tef, rng);
  const double whole = std::floor(tef);
  const int threat_events = static_cast<int>(whole) + (unit(rng) < tef - whole ? 1 : 0);
  for (int e = 0; e < threat_events; ++e) {
    const double capability = draw_pert(s.tcap, rng);
    const double resistance = draw_pert(s.rs, rng);
    if (capability > resistance) ++out.primary_events;
  }
  for (int e = 0; e < out.primary_events; ++e) {
    const double m = draw_pert(s.primary_magnitude, rng);
    out.primary += m;
    out.primary_min = std::min(out.primary_min, m);
    out.primary_max = std::max(out.primary_max, m);
  }
  if (s.slef >= 1.0) {
    out.secondary_events = out.primary_events;
  } else if (s.slef > 0.0 && out.primary_events > 0) {
    out.secondary_events = std::binomial_distribution<int>(out.primary_events, s.slef)(rng);
  }
  for (int e = 0; e < out.secondary_events; ++e) {
    const double m = draw_pert(s.secondary_magnitude, rng);
    out.secondary += m;
    out.secondary_min = std::min(out.secondary_min, m);
    out.secondary_max = std::max(out.secondary_max, m);
  }
  return out;
}

LossSummary summarize(const Eigen::VectorXi& events, const Eigen::VectorXd& losses, const std::vector<double>& mins,
                      const std::vector<double>& maxs) {
  LossSummary s;
  s.loss_events_per_year = {static_cast<double>(events.minCoeff()), events.cast<double>().mean(),
                            static_cast<double>(events.maxCoeff())};
  s.total_events = static_cast<std::size_t>(events.sum());
  if (s.total_events > 0) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < mins.size(); ++i) {
      lo = std::min(lo, mins[i]);
      hi = std::max(hi, maxs[i]);
    }
    // The average can drift outside [lo, hi] by an ulp when every event has the same size.
    const double avg = std::clamp(losses.sum() / static_cast<double>(s.total_events), lo, hi);
    s.loss_magnitude = {lo, avg, hi};
  }
  return s;
}

}  // namespace

RiskScenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("scenario must be a JSON object");
  RiskScenario s;
  s.tef = pert_from_json(j, "tef");
  s.tcap = pert_from_json(j, "tcap");
  s.rs = pert_from_json(j, "rs");
  s.primary_magnitude = pert_from_json(j, "primary_magnitude");
  if (!j.contains("slef") || !j["slef"].is_number()) throw ValidationError("scenario 'slef' must be a number");
  s.slef = j["slef"].get<double>();
  s.secondary_magnitude = j.contains("secondary_magnitude") ? pert_from_json(j, "secondary_magnitude") : PertParams{};
  if (!j.contains("secondary_magnitude") && s.slef > 0.0) {
    throw ValidationError("scenario with slef > 0 needs 'secondary_magnitude'");
  }
  const std::string role = j.value("fine_role", "secondary_loss");
  if (role == "secondary_loss") {
    s.fine_role = FineRole::secondary_loss;
  } else if (role == "primary_loss") {
    s.fine_role = FineRole::primary_loss;
  } else {
    throw ValidationError(fmt::format("unknown fine_role '{}'", role));
  }
  s.validate();
  return s;
}

nlohmann::json to_json(const RiskScenario& s) {
  return {{"tef", pert_json(s.tef)},
          {"tcap", pert_json(s.tcap)},
          {"rs", pert_json(s.rs)},
          {"primary_magnitude", pert_json(s.primary_magnitude)},
          {"slef", s.slef},
          {"secondary_magnitude", pert_json(s.secondary_magnitude)},
          {"fine_role", std::string(to_string(s.fine_role))}};
}

SimulationResult run_scenario(const RiskScenario& scenario, std::size_t iterations, std::uint64_t seed,
                              const SimulationOptions& options) {
  scenario.validate();
  if (iterations == 0) throw ValidationError("iterations must be at least 1");
  std::vector<IterationOutcome> outcomes(iterations);
  parallel_for(iterations, options.workers, [&](std::size_t i) {
    Engine rng = substream(seed, i);
    outcomes[i] = simulate_iteration(scenario, rng);
  });

  SimulationResult r;
  r.iterations = iterations;
  r.seed = seed;
  const auto n = static_cast<Eigen::Index>(iterations);
  r.annualized_losses.resize(n);
  r.primary_losses.resize(n);
  r.secondary_losses.resize(n);
  r.primary_events.resize(n);
  r.secondary_events.resize(n);
  std::vector<double> pmin(iterations), pmax(iterations), smin(iterations), smax(iterations);
  for (std::size_t i = 0; i < iterations; ++i) {
    const auto& o = outcomes[i];
    const auto k = static_cast<Eigen::Index>(i);
    r.primary_losses(k) = o.primary;
    r.secondary_losses(k) = o.secondary;
    r.annualized_losses(k) = o.primary + o.secondary;
    r.primary_events(k) = o.primary_events;
    r.secondary_events(k) = o.secondary_events;
    pmin[i] = o.primary_min;
    pmax[i] = o.primary_max;
    smin[i] = o.secondary_min;
    smax[i] = o.secondary_max;
  }
  r.primary_summary = summarize(r.primary_events, r.primary_losses, pmin, pmax);
  r.secondary_summary = summarize(r.secondary_events, r.secondary_losses, smin, smax);
  return r;
}

LossExceedanceCurve loss_exceedance(const SimulationResult& result, std::optional<std::span<const double>> thresholds) {
  if (result.annualized_losses.size() == 0) throw EmptySampleError("loss exceedance of an empty simulation");
  const Eigen::VectorXd sorted = sorted_copy(result.annualized_losses);
  std::vector<double> xs;
  if (thresholds) {
    xs.assign(thresholds->begin(), thresholds->end());
  } else {
    for (std::size_t i = 0; i < kDefaultLecPoints; ++i) {
      xs.push_back(sorted_quantile(sorted, static_cast<double>(i) / static_cast<double>(kDefaultLecPoints - 1)));
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  const double n = static_cast<double>(sorted.size());
  LossExceedanceCurve curve;
  for (double x : xs) {
    const auto* first_at_least = std::lower_bound(sorted.data(), sorted.data() + sorted.size(), x);
    const auto at_least = static_cast<double>(sorted.data() + sorted.size() - first_at_least);
    curve.points.emplace_back(x, at_least / n);
  }
  return curve;
}

PdVaRStatement pdvar_from_losses(const SimulationResult& result, double confidence, const std::string& timeframe) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw ValidationError("confidence must lie strictly between 0 and 1");
  std::vector<double> positive;
  for (double loss : result.annualized_losses) {
    if (loss > 0.0) positive.push_back(loss);
  }
  if (positive.empty()) throw ValidationError("no loss events simulated");
  std::sort(positive.begin(), positive.end());
  const Eigen::Map<const Eigen::VectorXd> sorted(positive.data(), static_cast<Eigen::Index>(positive.size()));
  const double tail = (1.0 - confidence) / 2.0;
  PdVaRStatement s;
  s.confidence = confidence;
  s.lower = sorted_quantile(sorted, tail);
  s.upper = sorted_quantile(sorted, 1.0 - tail);
  s.timeframe = timeframe;
  s.rendered = render_statement(s, true);
  return s;
}

JurimetricalEnvelope envelope_from(const HistoricalVaR& lower, const HistoricalVaR& upper) {
  if (lower.value > upper.value) throw ValidationError("lower historical VaR exceeds the upper one");
  return {lower.value, upper.value,
          fmt::format("historical VaR q{:g} / q{:g} over {} fines", lower.quantile_level, upper.quantile_level,
                      upper.corpus_size)};
}

JurimetricalEnvelope envelope_from(const ConformalInterval& interval) {
  return {interval.lower, interval.upper,
          fmt::format("{} conformal interval at {} confidence", to_string(interval.method),
                      interval.nominal_confidence)};
}

JurimetricalEnvelope envelope_from(const JurimetricalInput& input) {
  return std::visit(
      [](const auto& v) -> JurimetricalEnvelope {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, ConformalInterval>) {
          return envelope_from(v);
        } else {
          return envelope_from(v.first, v.second);
        }
      },
      input);
}

RiskScenario calibrated_scenario(const RiskScenario& scenario, const JurimetricalEnvelope& envelope) {
  if (envelope.lower == 0.0 && envelope.upper == 0.0) {
    throw ValidationError("jurimetrical interval [0, 0] carries no magnitude information");
  }
  if (envelope.lower > envelope.upper) throw ValidationError("jurimetrical interval has lower > upper");
  if (envelope.lower < 0.0) throw ValidationError("jurimetrical interval must be non-negative");
  RiskScenario out = scenario;
  if (scenario.fine_role == FineRole::primary_loss) {
    out.primary_magnitude = PertParams{envelope.lower, envelope.lower + (envelope.upper - envelope.lower) / 2.0,
                                       envelope.upper, scenario.primary_magnitude.lambda};
  }
  return out;
}

SimulationResult compose_calibrated_pdvar(const JurimetricalInput& jurimetrical, const RiskScenario& scenario,
                                          std::size_t iterations, std::uint64_t seed,
                                          const SimulationOptions& options) {
  const JurimetricalEnvelope envelope = envelope_from(jurimetrical);
  SimulationResult r = run_scenario(calibrated_scenario(scenario, envelope), iterations, seed, options);
  r.jurimetrical_source = envelope.source;
  if (scenario.fine_role == FineRole::secondary_loss) {
    r.warnings.push_back("fine_role is secondary_loss; jurimetrical interval ignored and magnitudes left unchanged");
  }
  return r;
}

nlohmann::json summary_json(const SimulationResult& r) {
  auto range = [](const RangeSummary& s) { return nlohmann::json{{"min", s.min}, {"avg", s.avg}, {"max", s.max}}; };
  auto loss = [&](const LossSummary& s) {
    return nlohmann::json{{"loss_events_per_year", range(s.loss_events_per_year)},
                          {"loss_magnitude", range(s.loss_magnitude)},
                          {"total_events", s.total_events}};
  };
  const Eigen::VectorXd& a = r.annualized_losses;
  nlohmann::json j = {{"iterations", r.iterations},
                      {"seed", r.seed},
                      {"primary", loss(r.primary_summary)},
                      {"secondary", loss(r.secondary_summary)},
                      {"annualized_loss", {{"min", a.minCoeff()}, {"avg", a.mean()}, {"max", a.maxCoeff()}}}};
  if (r.jurimetrical_source) j["jurimetrical_source"] = *r.jurimetrical_source;
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  return j;
}

nlohmann::json to_json(const LossExceedanceCurve& curve) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [x, p] : curve.points) arr.push_back({{"threshold", x}, {"probability", p}});
  return arr;
}

nlohmann::json to_json(const PdVaRStatement& s) {
  return {{"confidence", s.confidence},
          {"lower", s.lower},
          {"upper", s.upper},
          {"timeframe", s.timeframe},
          {"rendered", s.rendered}};
}

}  // namespace pdvar
