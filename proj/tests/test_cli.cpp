#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pdvar/cli.hpp"

namespace fs = std::filesystem;
using pdvar::cli_dispatch;

namespace {

const std::string kData = PDVAR_DATA_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("pdvar-" + tag + "-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("stats and var on the turnover-band corpus") {
  const auto s = run({"stats", "--corpus", kData + "/fines_turnover_band.csv", "--country", "FR"});
  REQUIRE(s.code == 0);
  const auto j = nlohmann::json::parse(s.out);
  CHECK(j["country"] == "FR");
  CHECK(j["mean"].get<double>() == 906000.0);
  CHECK(j["n"] == 5);

  const auto all = nlohmann::json::parse(run({"stats"}).out);
  CHECK(all["countries"].size() == 4);

  const auto v = run({"var", "--corpus", kData + "/fines_turnover_band.csv", "--country", "FR", "--level", "0.9"});
  REQUIRE(v.code == 0);
  CHECK(nlohmann::json::parse(v.out)["value"].get<double>() == doctest::Approx(1650000.0).epsilon(1e-12));
}

TEST_CASE("ingest exports every record") {
  const auto r = run({"ingest", "--corpus", kData + "/fines_turnover_band.csv"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out).size() == 11);
}

TEST_CASE("bayes and attribute read parameter files") {
  const auto b = nlohmann::json::parse(run({"bayes", "--input", kData + "/bayes.json"}).out);
  CHECK(b["derived"]["p_db"].get<double>() == doctest::Approx(0.404));
  const auto a = nlohmann::json::parse(run({"attribute", "--input", kData + "/attribute.json"}).out);
  CHECK(a["p_d"].get<double>() == doctest::Approx(0.16895));
}

TEST_CASE("calibrate summarizes expert weights") {
  const auto r = run({"calibrate", "--estimates", kData + "/expert_weights.csv", "--target", "seriousness"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.contains("delphi"));
  CHECK(j.contains("noise"));
  CHECK(j.contains("lens"));
}

TEST_CASE("conformal subcommand") {
  const auto t = run({"conformal", "--method", "tcp", "--alpha", "0.1"});
  REQUIRE(t.code == 0);
  const auto j = nlohmann::json::parse(t.out);
  CHECK(j["method"] == "transductive");
  CHECK(j["excluded_ids"].size() == 1);
  CHECK(j["lower"].get<double>() <= j["upper"].get<double>());

  const auto i = run({"conformal", "--method", "icp", "--alpha", "0.5", "--seed", "3"});
  REQUIRE(i.code == 0);
  CHECK(nlohmann::json::parse(i.out).contains("intervals"));
  CHECK(run({"conformal", "--method", "icp", "--alpha", "0.01"}).code == 1);
}

TEST_CASE("simulate is byte-identical for a fixed seed") {
  const std::vector<std::string> args = {"simulate", "--scenario", kData + "/scenario_example.json", "--iterations",
                                         "1", "--seed", "42"};
  const auto a = run(args);
  const auto b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);

  TempDir d1("sim1"), d2("sim2");
  auto with_out = [&](const fs::path& dir, const std::string& workers) {
    return run({"simulate", "--scenario", kData + "/scenario_example.json", "--iterations", "2000", "--seed", "7",
                "--workers", workers, "--svg", "--out", dir.string()});
  };
  REQUIRE(with_out(d1.path, "1").code == 0);
  REQUIRE(with_out(d2.path, "3").code == 0);
  for (const char* f : {"summary.json", "losses.csv", "lec.csv", "histogram.csv", "lec.svg", "histogram.svg"}) {
    CHECK(fs::exists(d1.path / f));
    CHECK(slurp(d1.path / f) == slurp(d2.path / f));
  }
  const auto manifest = nlohmann::json::parse(slurp(d1.path / "manifest.json"));
  CHECK(manifest["subcommand"] == "simulate");
  CHECK(manifest["seed"] == 7);
  CHECK(manifest["parameters"]["iterations"] == "2000");
}

TEST_CASE("manifest parameters reproduce the output") {
  TempDir d("replay");
  const auto out = (d.path / "lec.csv").string();
  REQUIRE(run({"lec", "--scenario", kData + "/scenario_example.json", "--iterations", "500", "--seed", "9", "--out",
               out})
              .code == 0);
  const auto m = nlohmann::json::parse(slurp(out + ".manifest.json"));
  const std::string first = slurp(out);
  REQUIRE(run({"lec", "--scenario", m["input_paths"][0], "--iterations", m["parameters"]["iterations"], "--seed",
               m["parameters"]["seed"], "--out", out})
              .code == 0);
  CHECK(slurp(out) == first);
}

TEST_CASE("report renders the statement") {
  const auto r = run({"report", "--scenario", kData + "/scenario_trivial.json", "--iterations", "100"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["statement"]["rendered"] ==
        "If an administrative fine (if controlled) happens next year, there is a 90% chance that the sanctioning "
        "amount will be exactly €3 000 000");

  const auto calibrated = run({"report", "--scenario", kData + "/scenario_primary.json", "--country", "FR",
                               "--method", "var", "--level", "0.9", "--iterations", "2000", "--no-grouping"});
  REQUIRE(calibrated.code == 0);
  const auto c = nlohmann::json::parse(calibrated.out);
  CHECK(c["jurimetrical"]["upper"].get<double>() == doctest::Approx(1650000.0));
  CHECK(c["summary"].contains("jurimetrical_source"));
}

TEST_CASE("seed falls back to PDVAR_SEED") {
  const std::vector<std::string> base = {"simulate", "--scenario", kData + "/scenario_example.json", "--iterations",
                                         "300"};
  auto explicit_args = base;
  explicit_args.insert(explicit_args.end(), {"--seed", "123"});
  const auto expected = run(explicit_args).out;
  ::setenv("PDVAR_SEED", "123", 1);
  const auto from_env = run(base).out;
  ::setenv("PDVAR_SEED", "oops", 1);
  CHECK(run(base).code == 1);
  ::unsetenv("PDVAR_SEED");
  CHECK(from_env == expected);
  CHECK(nlohmann::json::parse(run(base).out)["seed"] == 0);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"stats", "--bogus"}).code == 1);
  CHECK(run({"stats", "--help"}).code == 0);
  const auto missing = run({"stats", "--corpus", "/nonexistent/fines.csv"});
  CHECK(missing.code == 2);
  CHECK(!missing.err.empty());
  CHECK(missing.out.empty());

  TempDir d("bad");
  const auto bad = d.path / "bad.csv";
  std::ofstream(bad) << "id,date,year,country,controller,fine_eur,turnover_eur,article,security_principle,"
                        "records_affected,cause\n1,2020-01,2020,FR,X,-5.00,,,,,\n";
  const auto r = run({"stats", "--corpus", bad.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("row 2") != std::string::npos);
  CHECK(run({"simulate"}).code == 1);
}

TEST_CASE("subcommands leave their inputs untouched") {
  TempDir d("inputs");
  const auto corpus = d.path / "fines.csv";
  const auto scenario = d.path / "s.json";
  fs::copy_file(kData + "/fines_turnover_band.csv", corpus);
  fs::copy_file(kData + "/scenario_primary.json", scenario);
  const auto before_c = slurp(corpus);
  const auto before_s = slurp(scenario);
  const auto t_c = fs::last_write_time(corpus);
  run({"ingest", "--corpus", corpus.string(), "--out", (d.path / "c.json").string()});
  run({"report", "--scenario", scenario.string(), "--corpus", corpus.string(), "--iterations", "200"});
  run({"simulate", "--scenario", scenario.string(), "--iterations", "50", "--out", (d.path / "sim").string()});
  CHECK(slurp(corpus) == before_c);
  CHECK(slurp(scenario) == before_s);
  CHECK(fs::last_write_time(corpus) == t_c);
}

TEST_CASE("the installed binary maps errors to exit codes") {
  const std::string cli = PDVAR_CLI_PATH;
  auto status = [&](const std::string& args) {
    const int raw = std::system((cli + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(raw);
  };
  CHECK(status("stats --country FR") == 0);
  CHECK(status("nope") == 1);
  CHECK(status("stats --corpus /nonexistent.csv") == 2);
}
