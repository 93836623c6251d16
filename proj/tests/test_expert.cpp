#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles/oracles.hpp"
#include "pdvar/error.hpp"
#include "pdvar/expert.hpp"
#include "pdvar/fixtures.hpp"

using namespace pdvar;

namespace {

std::vector<ExpertEstimate> one_round_one_scenario(const std::vector<double>& weights) {
  std::vector<ExpertEstimate> out;
  for (std::size_t i = 0; i < weights.size(); ++i) out.push_back({"e" + std::to_string(i), 1, "a", "s1", weights[i]});
  return out;
}

}  // namespace

TEST_CASE("Delphi pooled consensus over the art. 83(2)(a) weights") {
  const auto weights = fixtures::seriousness_weights();
  std::vector<ExpertEstimate> est;
  for (std::size_t i = 0; i < weights.size(); ++i) est.push_back({"expert", 1, "a", "case" + std::to_string(i), weights[i]});
  const DelphiResult r = delphi_aggregate(est, 1);
  REQUIRE(r.rounds.size() == 1);
  CHECK(r.rounds[0].pooled.mean == doctest::Approx(34.0 / 10.0));
  CHECK(r.rounds[0].pooled.median == doctest::Approx(3.5));
  CHECK(r.rounds[0].per_scenario.size() == 10);
  CHECK(r.converged);
}

TEST_CASE("Delphi identity, fixed point and round gaps") {
  const std::vector<ExpertEstimate> single = {{"e1", 1, "a", "s", 4.0}};
  const auto r = delphi_aggregate(single, 1);
  CHECK(r.rounds[0].per_scenario.at("s").mean == 4.0);
  CHECK(r.rounds[0].per_scenario.at("s").median == 4.0);
  CHECK(r.converged);

  std::vector<ExpertEstimate> two = one_round_one_scenario({1, 3, 5});
  for (auto e : one_round_one_scenario({1, 3, 5})) {
    e.round = 2;
    two.push_back(e);
  }
  const auto fixed = delphi_aggregate(two, 2);
  CHECK(fixed.last_shift == 0.0);
  CHECK(fixed.converged);

  std::vector<ExpertEstimate> moved = one_round_one_scenario({1, 1, 1});
  moved.push_back({"e0", 2, "a", "s1", 5.0});
  CHECK_FALSE(delphi_aggregate(moved, 2).converged);

  std::vector<ExpertEstimate> gap = one_round_one_scenario({2, 3});
  gap.push_back({"e9", 3, "a", "s1", 4.0});
  CHECK_THROWS_AS(delphi_aggregate(gap, 3), ValidationError);
  CHECK_THROWS_AS(delphi_aggregate(gap, 2), ValidationError);
  CHECK_THROWS_AS(delphi_aggregate(one_round_one_scenario({6}), 1), ValidationError);
}

TEST_CASE("Delphi mean is translation-equivariant") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> w(1.0, 5.0);
  DelphiOptions wide{0.25, {-100.0, 100.0}};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ExpertEstimate> est;
    for (int r = 1; r <= 2; ++r)
      for (int e = 0; e < 6; ++e)
        for (int s = 0; s < 3; ++s) est.push_back({"e" + std::to_string(e), r, "a", "s" + std::to_string(s), w(rng)});
    const double c = w(rng) * 3 - 7;
    auto shifted = est;
    for (auto& e : shifted) e.weight += c;
    const auto a = delphi_aggregate(est, 2, wide);
    const auto b = delphi_aggregate(shifted, 2, wide);
    for (std::size_t r = 0; r < 2; ++r) {
      for (const auto& [sid, cons] : a.rounds[r].per_scenario) {
        CHECK(b.rounds[r].per_scenario.at(sid).mean == doctest::Approx(cons.mean + c));
        CHECK(b.rounds[r].per_scenario.at(sid).median == doctest::Approx(cons.median + c));
      }
    }
    CHECK(a.last_shift == doctest::Approx(b.last_shift).epsilon(1e-9));
  }
}

TEST_CASE("Lens fit recovers exact linear data") {
  Eigen::MatrixXd x(6, 1);
  x << 1, 2, 3, 4, 5, 7;
  const Eigen::VectorXd y = (2.0 * x.col(0).array() + 1.0).matrix();
  const LensModel m = lens_fit(x, y);
  CHECK(std::abs(m.coefficients(0) - 2.0) < 1e-9);
  CHECK(std::abs(m.intercept - 1.0) < 1e-9);
  CHECK(m.r_squared == doctest::Approx(1.0));
}

TEST_CASE("Lens fit with constant targets") {
  Eigen::MatrixXd x(4, 2);
  x << 1, 0, 2, 1, 3, 5, 4, 2;
  const LensModel m = lens_fit(x, Eigen::VectorXd::Constant(4, 3.5));
  CHECK(m.coefficients.isZero(0.0));
  CHECK(m.intercept == 3.5);
  CHECK(m.r_squared == 0.0);
}

TEST_CASE("Lens fit names collinear columns") {
  Eigen::MatrixXd x(5, 3);
  x << 1, 2, 7, 2, 4, 7, 3, 6, 7, 4, 8, 7, 5, 1, 7;
  // column b is not a multiple of a (last row), c is constant -> collinear with intercept
  try {
    lens_fit(x, Eigen::VectorXd::LinSpaced(5, 0, 4), {"a", "b", "c"});
    FAIL("expected rank error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("columns: c") != std::string::npos);
    CHECK(msg.find("collinear") != std::string::npos);
  }
  Eigen::MatrixXd dup(5, 2);
  dup << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10;
  try {
    lens_fit(dup, Eigen::VectorXd::LinSpaced(5, 0, 4), {"a", "twice_a"});
    FAIL("expected rank error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("twice_a") != std::string::npos);
  }
  CHECK_THROWS_AS(lens_fit(Eigen::MatrixXd::Ones(2, 2), Eigen::VectorXd::Ones(2)), ValidationError);
}

TEST_CASE("Lens fit matches the normal-equations oracle and leaves orthogonal residuals") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> w(1.0, 5.0);
  std::normal_distribution<double> noise(0.0, 0.3);
  const double truth[] = {0.5, 1.5, -0.75, 0.25};
  for (int trial = 0; trial < 50; ++trial) {
    // eight experts rating five scenarios on three factors
    const int rows = 40;
    Eigen::MatrixXd x(rows, 3);
    Eigen::VectorXd y(rows);
    std::vector<std::vector<double>> oracle_rows;
    std::vector<double> oracle_y;
    for (int r = 0; r < rows; ++r) {
      std::vector<double> row;
      double target = truth[0];
      for (int c = 0; c < 3; ++c) {
        x(r, c) = w(rng);
        row.push_back(x(r, c));
        target += truth[c + 1] * x(r, c);
      }
      y(r) = target + noise(rng);
      oracle_rows.push_back(row);
      oracle_y.push_back(y(r));
    }
    const LensModel m = lens_fit(x, y);
    const auto beta = oracle::normal_equations(oracle_rows, oracle_y);
    CHECK(std::abs(m.intercept - beta[0]) < 1e-9);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(m.coefficients(c) - beta[static_cast<std::size_t>(c) + 1]) < 1e-9);
    CHECK(m.residuals.size() == rows);
    CHECK(m.r_squared >= 0.0);
    CHECK(m.r_squared <= 1.0);
    for (int c = 0; c < 3; ++c) {
      const double dot = m.residuals.dot(x.col(c)) / (m.residuals.norm() * x.col(c).norm());
      CHECK(std::abs(dot) < 1e-8);
    }
    CHECK(std::abs(m.residuals.sum() / m.residuals.norm()) < 1e-8);
  }
}

TEST_CASE("noise report") {
  const auto agree = noise_report(one_round_one_scenario({3, 3, 3}));
  CHECK(agree.dispersion.at("s1") == 0.0);
  CHECK(agree.noise_index == 0.0);

  const auto pair = noise_report(one_round_one_scenario({1, 5}));
  CHECK(std::abs(pair.dispersion.at("s1") - std::sqrt(8.0)) < 1e-6);
  CHECK(pair.noise_index == doctest::Approx(std::sqrt(8.0) / 3.0));

  const auto weights = fixtures::seriousness_weights();
  const auto ten = noise_report(one_round_one_scenario(weights));
  CHECK(std::abs(ten.dispersion.at("s1") - oracle::two_pass_sample_sd(weights)) < 1e-12);

  CHECK_THROWS_AS(noise_report(std::vector<ExpertEstimate>{{"only", 1, "a", "s", 2.0}}), ValidationError);
}

TEST_CASE("noise index is scale-invariant") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> w(1.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ExpertEstimate> est;
    for (int e = 0; e < 8; ++e)
      for (int s = 0; s < 4; ++s) est.push_back({"e" + std::to_string(e), 1, "a", "s" + std::to_string(s), w(rng)});
    const double k = 0.1 + w(rng);
    auto scaled = est;
    for (auto& e : scaled) e.weight *= k;
    CHECK(noise_report(scaled).noise_index == doctest::Approx(noise_report(est).noise_index).epsilon(1e-12));
  }
}

TEST_CASE("estimates CSV and Lens design") {
  std::istringstream in(
      "expert_id,round,factor,scenario_id,weight\n"
      "e1,1,a,s1,4\ne1,1,b,s1,2\ne1,1,score,s1,3\n"
      "e2,1,a,s1,5\ne2,1,b,s1,1\ne2,1,score,s1,4\n"
      "e1,1,a,s2,2\ne1,1,b,s2,4\ne1,1,score,s2,3\n");
  const auto est = parse_estimates(in);
  CHECK(est.size() == 9);
  const LensDesign d = lens_design(est, "score");
  CHECK(d.factor_names == std::vector<std::string>{"a", "b"});
  CHECK(d.observations.rows() == 3);
  CHECK(d.targets(0) == 3.0);

  std::istringstream bad("expert_id,round,factor,scenario_id,weight\ne1,0,a,s1,4\n");
  CHECK_THROWS_AS(parse_estimates(bad), ParseError);
  std::istringstream out_of_scale("expert_id,round,factor,scenario_id,weight\ne1,1,a,s1,9\n");
  CHECK_THROWS_AS(parse_estimates(out_of_scale), ParseError);
}
