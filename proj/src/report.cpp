#include "pdvar/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pdvar/error.hpp"
#include "pdvar/fair.hpp"

#ifndef PDVAR_VERSION
#define PDVAR_VERSION "0.0.0"
#endif

namespace pdvar {

namespace {

std::string group_thousands(const std::string& digits) {
  std::string out;
  const std::size_t n = digits.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && (n - i) % 3 == 0) out.push_back(' ');
    out.push_back(digits[i]);
  }
  return out;
}

std::string format_percent(double confidence) {
  // 0.9 -> "90", 0.975 -> "97.5"
  std::string s = fmt::format("{:.6f}", confidence * 100.0);
  s.erase(s.find_last_not_of('0') + 1);
  if (s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

std::string format_amount(double amount, bool grouping) {
  const auto cents = static_cast<long long>(std::llround(amount * 100.0));
  const long long mag = cents < 0 ? -cents : cents;
  std::string whole = std::to_string(mag / 100);
  if (grouping) whole = group_thousands(whole);
  std::string out = (cents < 0 ? "-" : "") + whole;
  if (mag % 100 != 0) out += fmt::format(".{:02d}", mag % 100);
  return out;
}

std::string render_statement(const PdVaRStatement& s, bool locale_grouping) {
  const std::string head = fmt::format("If an administrative fine (if controlled) happens {}, there is a {}% chance that "
                                       "the sanctioning amount will be ",
                                       s.timeframe, format_percent(s.confidence));
  const std::string lo = format_amount(s.lower, locale_grouping);
  const std::string hi = format_amount(s.upper, locale_grouping);
  if (lo == hi) return head + "exactly €" + lo;
  return head + "between €" + lo + " and €" + hi;
}

std::vector<HistogramBin> histogram(const Eigen::Ref<const Eigen::VectorXd>& sample, std::size_t bins) {
  if (sample.size() == 0) throw EmptySampleError("histogram of an empty sample");
  if (bins == 0) throw ValidationError("histogram needs at least one bin");
  const double lo = sample.minCoeff();
  const double hi = sample.maxCoeff();
  if (lo == hi) return {{lo, hi, static_cast<std::size_t>(sample.size())}};
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lower = lo + width * static_cast<double>(b);
    out[b].upper = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (double x : sample) {
    auto b = static_cast<std::size_t>((x - lo) / width);
    b = std::min(b, bins - 1);
    ++out[b].count;
  }
  return out;
}

std::string histogram_csv(const std::vector<HistogramBin>& bins) {
  std::string out = "bin_lower,bin_upper,count\n";
  for (const auto& b : bins) out += fmt::format("{},{},{}\n", b.lower, b.upper, b.count);
  return out;
}

std::string lec_csv(const LossExceedanceCurve& curve) {
  std::string out = "threshold,probability\n";
  for (const auto& [x, p] : curve.points) out += fmt::format("{},{}\n", x, p);
  return out;
}

std::string losses_csv(const Eigen::Ref<const Eigen::VectorXd>& losses) {
  std::string out = "iteration,annualized_loss\n";
  for (Eigen::Index i = 0; i < losses.size(); ++i) out += fmt::format("{},{}\n", i, losses(i));
  return out;
}

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 40.0;

std::string svg_document(const std::string& title, const std::string& body) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
      "<title>{2}</title>\n"
      "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
      "<line x1=\"{3}\" y1=\"{4}\" x2=\"{5}\" y2=\"{4}\" stroke=\"black\"/>\n"
      "<line x1=\"{3}\" y1=\"{3}\" x2=\"{3}\" y2=\"{4}\" stroke=\"black\"/>\n"
      "{6}</svg>\n",
      kWidth, kHeight, title, kMargin, kHeight - kMargin, kWidth - kMargin, body);
}

std::string polyline(const std::vector<std::pair<double, double>>& pts) {
  if (pts.empty()) return "";
  double xmin = pts.front().first, xmax = pts.front().first, ymax = 0.0;
  for (const auto& [x, y] : pts) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymax = std::max(ymax, y);
  }
  const double xspan = xmax > xmin ? xmax - xmin : 1.0;
  const double yspan = ymax > 0.0 ? ymax : 1.0;
  std::string coords;
  for (const auto& [x, y] : pts) {
    const double px = kMargin + (x - xmin) / xspan * (kWidth - 2 * kMargin);
    const double py = kHeight - kMargin - y / yspan * (kHeight - 2 * kMargin);
    coords += fmt::format("{:.2f},{:.2f} ", px, py);
  }
  coords.pop_back();
  return fmt::format("<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"{}\"/>\n", coords);
}

}  // namespace

std::string histogram_svg(const std::vector<HistogramBin>& bins, const std::string& title) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& b : bins) {
    pts.emplace_back(b.lower, static_cast<double>(b.count));
    pts.emplace_back(b.upper, static_cast<double>(b.count));
  }
  return svg_document(title, polyline(pts));
}

std::string lec_svg(const LossExceedanceCurve& curve, const std::string& title) {
  return svg_document(title, polyline(curve.points));
}

std::string engine_version() { return PDVAR_VERSION; }

std::string iso8601_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json to_json(const RunManifest& m) {
  return {{"subcommand", m.subcommand},
          {"input_paths", m.input_paths},
          {"parameters", m.parameters},
          {"seed", m.seed},
          {"engine_version", m.engine_version},
          {"timestamp", m.timestamp}};
}

}  // namespace pdvar
