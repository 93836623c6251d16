#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

namespace pdvar {

struct PdVaRStatement;
struct LossExceedanceCurve;

// Fills the Pd-VaR sentence. With grouping, thousands are separated by a space ("300 000").
// Equal bounds produce the "will be exactly" form.
std::string render_statement(const PdVaRStatement& statement, bool locale_grouping);

// "300000", "300 000", "5.95" ... whole amounts print without decimals.
std::string format_amount(double amount, bool grouping);

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
};

// Equal-width bins over [min, max]; the last bin is closed. A constant sample
// produces a single bin [c, c].
std::vector<HistogramBin> histogram(const Eigen::Ref<const Eigen::VectorXd>& sample, std::size_t bins);

std::string histogram_csv(const std::vector<HistogramBin>& bins);
std::string lec_csv(const LossExceedanceCurve& curve);
std::string losses_csv(const Eigen::Ref<const Eigen::VectorXd>& losses);

// Bare-bones polyline charts.
std::string histogram_svg(const std::vector<HistogramBin>& bins, const std::string& title);
std::string lec_svg(const LossExceedanceCurve& curve, const std::string& title);

struct RunManifest {
  std::string subcommand;
  std::vector<std::string> input_paths;
  std::map<std::string, std::string> parameters;
  std::uint64_t seed = 0;
  std::string engine_version;
  std::string timestamp;  // ISO-8601 UTC
};

std::string engine_version();
std::string iso8601_now();
nlohmann::json to_json(const RunManifest& m);

}  // namespace pdvar
