#include "pdvar/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pdvar/conformal.hpp"
#include "pdvar/corpus.hpp"
#include "pdvar/error.hpp"
#include "pdvar/expert.hpp"
#include "pdvar/fair.hpp"
#include "pdvar/fixtures.hpp"
#include "pdvar/jurimetrics.hpp"
#include "pdvar/probability.hpp"
#include "pdvar/report.hpp"

namespace pdvar {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string corpus;
  std::string scenario;
  std::string input;
  std::string estimates;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::size_t iterations = 10'000;
  std::size_t workers = 1;
  double alpha = 0.1;
  double level = 0.9;
  std::optional<double> level_low;
  std::string country;
  std::string method = "tcp";
  std::string predictor = "mean";
  double train_fraction = 0.5;
  double calibration_fraction = 0.25;
  double confidence = 0.9;
  std::string timeframe = "next year";
  std::string target;
  int rounds = 0;
  double epsilon = 0.25;
  std::size_t bins = 50;
  bool svg = false;
  bool no_grouping = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError(fmt::format("cannot write '{}'", path.string()));
  f << content;
  if (!f) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(fmt::format("'{}' is not valid JSON: {}", path, e.what()));
  }
}

FineCorpus load_corpus(const Options& o) {
  if (o.corpus.empty()) return fixtures::turnover_band_corpus();
  std::istringstream in(read_file(o.corpus));
  return parse_corpus(in, o.corpus);
}

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("PDVAR_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ValidationError(fmt::format("PDVAR_SEED '{}' is not an unsigned integer", env));
    }
  }
  return 0;
}

CorpusQuery country_query(const Options& o) {
  CorpusQuery q;
  if (!o.country.empty()) q.countries = std::set<Country>{Country(o.country)};
  return q;
}

class Emitter {
 public:
  Emitter(std::string subcommand, const Options& o, std::ostream& out) : o_(o), out_(out) {
    manifest_.subcommand = std::move(subcommand);
    manifest_.engine_version = engine_version();
    for (const auto* p : {&o.corpus, &o.scenario, &o.input, &o.estimates}) {
      if (!p->empty()) manifest_.input_paths.push_back(*p);
    }
  }

  void param(const std::string& key, const std::string& value) { manifest_.parameters[key] = value; }
  void param(const std::string& key, double value) { manifest_.parameters[key] = fmt::format("{}", value); }
  void seed(std::uint64_t s) {
    manifest_.seed = s;
    param("seed", std::to_string(s));
  }

  // Single document: --out file plus a sidecar manifest, or stdout.
  void emit(const std::string& document) {
    if (o_.out.empty()) {
      out_ << document;
      return;
    }
    const fs::path path(o_.out);
    write_file(path, document);
    write_manifest(fs::path(path.string() + ".manifest.json"));
  }

  // Several named files into the --out directory.
  void emit_bundle(const std::vector<std::pair<std::string, std::string>>& files, const std::string& stdout_doc) {
    if (o_.out.empty()) {
      out_ << stdout_doc;
      return;
    }
    const fs::path dir(o_.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
    for (const auto& [name, content] : files) write_file(dir / name, content);
    write_manifest(dir / "manifest.json");
  }

 private:
  void write_manifest(const fs::path& path) {
    manifest_.timestamp = iso8601_now();
    write_file(path, to_json(manifest_).dump(2) + "\n");
  }

  const Options& o_;
  std::ostream& out_;
  RunManifest manifest_;
};

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void run_ingest(const Options& o, Emitter& em) {
  if (o.corpus.empty()) throw ValidationError("ingest requires --corpus");
  em.emit(dump(to_json(load_corpus(o))));
}

void run_stats(const Options& o, Emitter& em) {
  const FineCorpus corpus = load_corpus(o);
  auto entry = [&](const Country& c) {
    const Money m = country_mean(corpus, c);
    CorpusQuery q;
    q.countries = std::set<Country>{c};
    return nlohmann::json{{"country", c.code()}, {"mean", m.to_double()}, {"n", filter(corpus, q).size()}};
  };
  if (!o.country.empty()) {
    em.param("country", o.country);
    em.emit(dump(entry(Country(o.country))));
    return;
  }
  std::set<Country> countries;
  for (const auto& r : corpus.records()) countries.insert(r.country);
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : countries) arr.push_back(entry(c));
  em.emit(dump({{"countries", arr}}));
}

void run_var(const Options& o, Emitter& em) {
  em.param("level", o.level);
  if (!o.country.empty()) em.param("country", o.country);
  em.emit(dump(to_json(historical_var(load_corpus(o), country_query(o), o.level))));
}

void run_bayes(const Options& o, Emitter& em) {
  const BreachNetworkParams params = o.input.empty() ? BreachNetworkParams{0.70, 0.10, 0.90, 0.80, 0.20}
                                                     : breach_params_from_json(read_json(o.input));
  em.emit(dump({{"params", to_json(params)}, {"derived", to_json(solve_breach_network(params))}}));
}

void run_attribute(const Options& o, Emitter& em) {
  nlohmann::json in = o.input.empty() ? nlohmann::json{{"p_c", 0.76}, {"p_i", 0.165}, {"p_a", 0.075},
                                                       {"p_d_given_c", 0.2}, {"p_d_given_i", 0.08},
                                                       {"p_d_given_a", 0.05}}
                                      : read_json(o.input);
  const IncidentMix mix = incident_mix_from_json(in);
  const FineGivenPrinciple given = fine_given_from_json(in);
  em.emit(dump(to_json(total_probability_attribution(mix, given))));
}

void run_calibrate(const Options& o, Emitter& em, std::ostream& err) {
  if (o.estimates.empty()) throw ValidationError("calibrate requires --estimates");
  std::istringstream in(read_file(o.estimates));
  const auto estimates = parse_estimates(in);
  int rounds = o.rounds;
  if (rounds == 0) {
    for (const auto& e : estimates) rounds = std::max(rounds, e.round);
  }
  em.param("rounds", std::to_string(rounds));
  em.param("epsilon", o.epsilon);
  nlohmann::json doc;
  doc["delphi"] = to_json(delphi_aggregate(estimates, rounds, DelphiOptions{o.epsilon, {}}));
  try {
    doc["noise"] = to_json(noise_report(estimates));
  } catch (const ValidationError& e) {
    err << "noise report skipped: " << e.what() << "\n";
    doc["noise"] = nullptr;
  }
  if (!o.target.empty()) {
    em.param("target", o.target);
    const LensDesign d = lens_design(estimates, o.target);
    doc["lens"] = to_json(lens_fit(d.observations, d.targets, d.factor_names));
  }
  em.emit(dump(doc));
}

void run_conformal(const Options& o, Emitter& em) {
  const FineCorpus corpus = filter(load_corpus(o), country_query(o));
  em.param("method", o.method);
  em.param("alpha", o.alpha);
  if (!o.country.empty()) em.param("country", o.country);
  const auto n = static_cast<Eigen::Index>(corpus.size());
  Eigen::VectorXd amounts(n);
  for (Eigen::Index i = 0; i < n; ++i) amounts(i) = corpus.records()[static_cast<std::size_t>(i)].fine.to_double();

  auto ids_of = [&](const std::vector<std::size_t>& idx, const std::vector<std::size_t>& map) {
    nlohmann::json ids = nlohmann::json::array();
    for (auto i : idx) ids.push_back(corpus.records()[map[i]].id);
    return ids;
  };

  if (o.method == "tcp") {
    const ConformalInterval ci = transductive_interval(amounts, o.alpha);
    std::vector<std::size_t> identity(corpus.size());
    std::iota(identity.begin(), identity.end(), std::size_t{0});
    nlohmann::json j = to_json(ci);
    j["excluded_ids"] = ids_of(ci.excluded, identity);
    j["n"] = corpus.size();
    em.emit(dump(j));
    return;
  }
  if (o.method != "icp") throw ValidationError(fmt::format("unknown conformal method '{}'", o.method));

  const std::uint64_t seed = resolve_seed(o);
  em.seed(seed);
  em.param("predictor", o.predictor);
  em.param("train_fraction", o.train_fraction);
  em.param("calibration_fraction", o.calibration_fraction);
  const SplitIndices split = split_indices(corpus.size(), {o.train_fraction, o.calibration_fraction, seed});
  auto subset = [&](const std::vector<std::size_t>& idx) {
    LabeledSet s{Eigen::MatrixXd(static_cast<Eigen::Index>(idx.size()), 1),
                 Eigen::VectorXd(static_cast<Eigen::Index>(idx.size()))};
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto& r = corpus.records()[idx[k]];
      if (o.predictor == "linear" && !r.turnover) {
        throw ValidationError(fmt::format("record {} has no turnover; the linear predictor needs one", r.id));
      }
      s.features(static_cast<Eigen::Index>(k), 0) = r.turnover ? r.turnover->to_double() : 0.0;
      s.amounts(static_cast<Eigen::Index>(k)) = r.fine.to_double();
    }
    return s;
  };
  const LabeledSet train = subset(split.train);
  const LabeledSet cal = subset(split.calibration);
  const LabeledSet test = subset(split.test);
  Predictor predictor;
  if (o.predictor == "mean") {
    predictor = fit_mean_predictor(train);
  } else if (o.predictor == "linear") {
    predictor = fit_linear_predictor(train);
  } else {
    throw ValidationError(fmt::format("unknown predictor '{}'", o.predictor));
  }
  const auto intervals = split_conformal(cal, test.features, o.alpha, predictor);
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t k = 0; k < intervals.size(); ++k) {
    nlohmann::json j = to_json(intervals[k]);
    j["excluded_ids"] = ids_of(intervals[k].excluded, split.calibration);
    j["id"] = corpus.records()[split.test[k]].id;
    j["truth"] = test.amounts(static_cast<Eigen::Index>(k));
    arr.push_back(std::move(j));
  }
  nlohmann::json doc = {{"intervals", arr}, {"calibration_size", split.calibration.size()}};
  if (!intervals.empty()) {
    doc["empirical_coverage"] =
        empirical_coverage(intervals, std::span<const double>(test.amounts.data(), intervals.size()));
  }
  em.emit(dump(doc));
}

RiskScenario load_scenario(const Options& o) {
  if (o.scenario.empty()) throw ValidationError("--scenario is required");
  return scenario_from_json(read_json(o.scenario));
}

void simulation_params(const Options& o, Emitter& em, std::uint64_t seed) {
  em.seed(seed);
  em.param("iterations", std::to_string(o.iterations));
}

void run_simulate(const Options& o, Emitter& em) {
  const RiskScenario scenario = load_scenario(o);
  const std::uint64_t seed = resolve_seed(o);
  simulation_params(o, em, seed);
  em.param("bins", std::to_string(o.bins));
  const SimulationResult r = run_scenario(scenario, o.iterations, seed, {o.workers});
  const LossExceedanceCurve lec = loss_exceedance(r);
  const auto bins = histogram(r.annualized_losses, o.bins);
  const std::string summary = dump(summary_json(r));
  std::vector<std::pair<std::string, std::string>> files = {{"summary.json", summary},
                                                            {"losses.csv", losses_csv(r.annualized_losses)},
                                                            {"lec.csv", lec_csv(lec)},
                                                            {"histogram.csv", histogram_csv(bins)}};
  if (o.svg) {
    files.emplace_back("lec.svg", lec_svg(lec, "Loss exceedance curve"));
    files.emplace_back("histogram.svg", histogram_svg(bins, "Annualized loss"));
  }
  em.emit_bundle(files, summary);
}

void run_lec(const Options& o, Emitter& em) {
  const RiskScenario scenario = load_scenario(o);
  const std::uint64_t seed = resolve_seed(o);
  simulation_params(o, em, seed);
  const LossExceedanceCurve lec = loss_exceedance(run_scenario(scenario, o.iterations, seed, {o.workers}));
  if (o.svg) {
    em.emit_bundle({{"lec.csv", lec_csv(lec)}, {"lec.svg", lec_svg(lec, "Loss exceedance curve")}}, lec_csv(lec));
  } else {
    em.emit(lec_csv(lec));
  }
}

void run_report(const Options& o, Emitter& em) {
  const RiskScenario scenario = load_scenario(o);
  const std::uint64_t seed = resolve_seed(o);
  simulation_params(o, em, seed);
  em.param("confidence", o.confidence);
  em.param("timeframe", o.timeframe);

  SimulationResult r;
  nlohmann::json jurimetrical = nullptr;
  if (!o.corpus.empty() || !o.country.empty()) {
    const FineCorpus corpus = load_corpus(o);
    const CorpusQuery q = country_query(o);
    JurimetricalInput input;
    if (o.method == "tcp") {
      em.param("alpha", o.alpha);
      const FineCorpus selected = filter(corpus, q);
      Eigen::VectorXd amounts(static_cast<Eigen::Index>(selected.size()));
      for (std::size_t i = 0; i < selected.size(); ++i) {
        amounts(static_cast<Eigen::Index>(i)) = selected.records()[i].fine.to_double();
      }
      input = transductive_interval(amounts, o.alpha);
    } else if (o.method == "var") {
      const double lo = o.level_low.value_or(1.0 - o.level);
      em.param("level_low", lo);
      em.param("level", o.level);
      input = std::make_pair(historical_var(corpus, q, lo), historical_var(corpus, q, o.level));
    } else {
      throw ValidationError(fmt::format("report --method must be 'tcp' or 'var', got '{}'", o.method));
    }
    const JurimetricalEnvelope env = envelope_from(input);
    jurimetrical = {{"lower", env.lower}, {"upper", env.upper}, {"source", env.source}};
    r = compose_calibrated_pdvar(input, scenario, o.iterations, seed, {o.workers});
  } else {
    r = run_scenario(scenario, o.iterations, seed, {o.workers});
  }
  PdVaRStatement st = pdvar_from_losses(r, o.confidence, o.timeframe);
  if (o.no_grouping) st.rendered = render_statement(st, false);
  em.emit(dump({{"statement", to_json(st)}, {"summary", summary_json(r)}, {"jurimetrical", jurimetrical}}));
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Personal data value-at-risk engine", "pdvar"};
  app.require_subcommand(1);
  Options o;

  auto add_out = [&](CLI::App* sc) { sc->add_option("--out", o.out, "Output path"); };
  auto add_corpus = [&](CLI::App* sc) {
    sc->add_option("--corpus", o.corpus, "Fine corpus CSV (defaults to the bundled turnover-band fixture)");
  };
  auto add_country = [&](CLI::App* sc) { sc->add_option("--country", o.country, "Two-letter country code"); };
  auto add_seed = [&](CLI::App* sc) {
    sc->add_option("--seed", o.seed, "RNG seed (falls back to PDVAR_SEED, then 0)");
  };
  auto add_sim = [&](CLI::App* sc) {
    sc->add_option("--scenario", o.scenario, "Scenario JSON")->required();
    sc->add_option("--iterations", o.iterations, "Monte Carlo iterations")->check(CLI::PositiveNumber);
    sc->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
    add_seed(sc);
  };

  auto* ingest = app.add_subcommand("ingest", "Validate a corpus CSV and export it as JSON");
  add_corpus(ingest);
  add_out(ingest);

  auto* stats = app.add_subcommand("stats", "Mean fine per country");
  add_corpus(stats);
  add_country(stats);
  add_out(stats);

  auto* var = app.add_subcommand("var", "Historical VaR quantile of fines");
  add_corpus(var);
  add_country(var);
  var->add_option("--level", o.level, "Quantile level in (0,1)");
  add_out(var);

  auto* bayes = app.add_subcommand("bayes", "Solve the DPIA -> attack -> breach network");
  bayes->add_option("--input", o.input, "Network parameters JSON");
  add_out(bayes);

  auto* attribute = app.add_subcommand("attribute", "Total-probability fine attribution");
  attribute->add_option("--input", o.input, "Incident mix and fine conditionals JSON");
  add_out(attribute);

  auto* calibrate = app.add_subcommand("calibrate", "Delphi consensus, noise and Lens fit over expert weights");
  calibrate->add_option("--estimates", o.estimates, "Estimates CSV")->required();
  calibrate->add_option("--rounds", o.rounds, "Rounds to aggregate (default: highest present)");
  calibrate->add_option("--epsilon", o.epsilon, "Convergence threshold on the mean shift");
  calibrate->add_option("--target", o.target, "Factor used as Lens target");
  add_out(calibrate);

  auto* conformal = app.add_subcommand("conformal", "Conformal interval over fine amounts");
  add_corpus(conformal);
  add_country(conformal);
  conformal->add_option("--method", o.method, "tcp or icp")->check(CLI::IsMember({"tcp", "icp"}));
  conformal->add_option("--alpha", o.alpha, "Miscoverage level");
  conformal->add_option("--predictor", o.predictor, "mean or linear (icp)")->check(CLI::IsMember({"mean", "linear"}));
  conformal->add_option("--train-fraction", o.train_fraction);
  conformal->add_option("--calibration-fraction", o.calibration_fraction);
  add_seed(conformal);
  add_out(conformal);

  auto* simulate = app.add_subcommand("simulate", "Run a FAIR scenario");
  add_sim(simulate);
  simulate->add_option("--bins", o.bins, "Histogram bins")->check(CLI::PositiveNumber);
  simulate->add_flag("--svg", o.svg, "Also write SVG charts");
  simulate->add_option("--out", o.out, "Output directory");

  auto* lec = app.add_subcommand("lec", "Loss exceedance curve of a FAIR scenario");
  add_sim(lec);
  lec->add_flag("--svg", o.svg, "Write lec.csv and lec.svg into --out");
  add_out(lec);

  auto* report = app.add_subcommand("report", "Pd-VaR statement, optionally calibrated with a fine corpus");
  add_sim(report);
  add_corpus(report);
  add_country(report);
  report->add_option("--method", o.method, "Jurimetrical envelope: tcp or var")->check(CLI::IsMember({"tcp", "var"}));
  report->add_option("--alpha", o.alpha);
  report->add_option("--level", o.level, "Upper VaR level (var method)");
  report->add_option("--level-low", o.level_low, "Lower VaR level (var method, default 1 - level)");
  report->add_option("--confidence", o.confidence);
  report->add_option("--timeframe", o.timeframe);
  report->add_flag("--no-grouping", o.no_grouping, "Print amounts without thousands separators");
  add_out(report);

  std::vector<const char*> argv{"pdvar"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  CLI::App* sc = app.get_subcommands().front();
  try {
    Emitter em(sc->get_name(), o, out);
    const std::string name = sc->get_name();
    if (name == "ingest") run_ingest(o, em);
    else if (name == "stats") run_stats(o, em);
    else if (name == "var") run_var(o, em);
    else if (name == "bayes") run_bayes(o, em);
    else if (name == "attribute") run_attribute(o, em);
    else if (name == "calibrate") run_calibrate(o, em, err);
    else if (name == "conformal") run_conformal(o, em);
    else if (name == "simulate") run_simulate(o, em);
    else if (name == "lec") run_lec(o, em);
    else if (name == "report") run_report(o, em);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace pdvar
