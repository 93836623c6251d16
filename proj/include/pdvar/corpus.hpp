#pragma once

#include <compare>
#include <cstdint>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pdvar/money.hpp"

namespace pdvar {

// ISO-style two-letter country code. FR, UK, ES and IE are the jurisdictions
// the bundled fixtures use; any other uppercase pair is accepted as-is.
class Country {
 public:
  explicit Country(std::string_view code);
  static Country france() { return Country("FR"); }
  static Country united_kingdom() { return Country("UK"); }
  static Country spain() { return Country("ES"); }
  static Country ireland() { return Country("IE"); }

  const std::string& code() const { return code_; }
  bool is_known() const;
  auto operator<=>(const Country&) const = default;

 private:
  std::string code_;
};

struct YearMonth {
  int year = 0;
  int month = 1;
  // Parses "YYYY-MM".
  static YearMonth parse(std::string_view text);
  std::string to_string() const;
  auto operator<=>(const YearMonth&) const = default;
};

enum class SecurityPrinciple { confidentiality, integrity, availability, none };

std::string_view to_string(SecurityPrinciple p);
SecurityPrinciple parse_security_principle(std::string_view text);

struct FineRecord {
  std::string id;
  YearMonth date;
  int year = 0;
  Country country = Country::france();
  std::string controller;
  Money fine;
  std::optional<Money> turnover;
  std::optional<std::string> article;
  std::optional<SecurityPrinciple> security_principle;
  std::optional<std::int64_t> records_affected;
  std::optional<std::string> cause;

  // Throws ValidationError when fine < 0, year != date.year, or turnover <= 0.
  void validate() const;
  bool operator==(const FineRecord&) const = default;
};

class FineCorpus {
 public:
  FineCorpus() = default;
  // Validates every record and id uniqueness.
  FineCorpus(std::vector<FineRecord> records, std::string provenance);

  const std::vector<FineRecord>& records() const { return records_; }
  const std::string& provenance() const { return provenance_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::vector<Money> fines() const;

  bool operator==(const FineCorpus&) const = default;

 private:
  std::vector<FineRecord> records_;
  std::string provenance_;
};

// Closed interval [min, max]; construction rejects min > max.
template <typename T>
class Range {
 public:
  Range(T min, T max);
  const T& min() const { return min_; }
  const T& max() const { return max_; }
  bool contains(const T& v) const { return !(v < min_) && !(max_ < v); }
  bool operator==(const Range&) const = default;

 private:
  T min_;
  T max_;
};

struct CorpusQuery {
  std::optional<std::set<Country>> countries;
  std::optional<Range<Money>> turnover_range;
  std::optional<std::set<std::string>> articles;
  std::optional<Range<int>> year_range;
  std::optional<std::set<SecurityPrinciple>> security_principles;

  bool matches(const FineRecord& record) const;
  bool operator==(const CorpusQuery&) const = default;
};

// Every present predicate must hold; absent predicates match everything.
// Records lacking the field a predicate inspects do not match it.
FineCorpus filter(const FineCorpus& corpus, const CorpusQuery& query);

// Canonical CSV header.
inline constexpr std::string_view kCorpusHeader =
    "id,date,year,country,controller,fine_eur,turnover_eur,article,security_principle,"
    "records_affected,cause";

FineCorpus parse_corpus(std::istream& in, std::string provenance = "stream");
FineCorpus parse_corpus(std::string_view csv, std::string provenance = "inline");
std::string serialize_corpus(const FineCorpus& corpus);

nlohmann::json to_json(const FineRecord& record);
nlohmann::json to_json(const FineCorpus& corpus);
nlohmann::json to_json(const CorpusQuery& query);
FineCorpus corpus_from_json(const nlohmann::json& j, std::string provenance = "json");

// Minimal RFC 4180 reader shared by the corpus and expert-estimate loaders.
// Returns records as vectors of unquoted fields.
std::vector<std::vector<std::string>> read_csv(std::istream& in);
std::string csv_escape(std::string_view field);

}  // namespace pdvar
