#include "pdvar/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pdvar/error.hpp"

namespace pdvar {

namespace {

bool is_upper_alpha(char c) { return c >= 'A' && c <= 'Z'; }

template <typename Int>
Int parse_int(std::string_view text, const char* what) {
  Int value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) throw ValidationError(fmt::format("invalid {} '{}'", what, text));
  return value;
}

enum Column : std::size_t {
  kId,
  kDate,
  kYear,
  kCountry,
  kController,
  kFine,
  kTurnover,
  kArticle,
  kSecurity,
  kRecords,
  kCause,
  kColumnCount
};

constexpr std::string_view kColumnNames[kColumnCount] = {
    "id",           "date", "year",    "country",
    "controller",   "fine_eur", "turnover_eur", "article",
    "security_principle", "records_affected", "cause"};

FineRecord record_from_fields(const std::vector<std::string>& f, std::size_t row) {
  if (f.size() != kColumnCount) {
    throw ParseError(row, "*", fmt::format("expected {} fields, found {}", std::size_t{kColumnCount}, f.size()));
  }
  auto field = [&](Column c, auto&& parse) {
    try {
      return parse(std::string_view(f[c]));
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(row, std::string(kColumnNames[c]), e.what());
    }
  };
  auto optional_field = [&](Column c, auto&& parse) {
    using T = decltype(parse(std::string_view{}));
    if (f[c].empty()) return std::optional<T>{};
    return std::optional<T>{field(c, parse)};
  };

  FineRecord r;
  r.id = field(kId, [](std::string_view s) {
    if (s.empty()) throw ValidationError("id must not be empty");
    return std::string(s);
  });
  r.date = field(kDate, [](std::string_view s) { return YearMonth::parse(s); });
  r.year = field(kYear, [](std::string_view s) { return parse_int<int>(s, "year"); });
  if (r.year != r.date.year) {
    throw ParseError(row, "year", fmt::format("year {} does not match date {}", r.year, r.date.to_string()));
  }
  r.country = field(kCountry, [](std::string_view s) { return Country(s); });
  r.controller = f[kController];
  r.fine = field(kFine, [](std::string_view s) {
    const Money m = Money::parse(s);
    if (m < Money{}) throw ValidationError("fine must be non-negative");
    return m;
  });
  r.turnover = optional_field(kTurnover, [](std::string_view s) {
    const Money m = Money::parse(s);
    if (m <= Money{}) throw ValidationError("turnover must be positive");
    return m;
  });
  r.article = optional_field(kArticle, [](std::string_view s) { return std::string(s); });
  r.security_principle = optional_field(kSecurity, [](std::string_view s) { return parse_security_principle(s); });
  r.records_affected = optional_field(kRecords, [](std::string_view s) {
    const auto v = parse_int<std::int64_t>(s, "records_affected");
    if (v < 0) throw ValidationError("records_affected must be non-negative");
    return v;
  });
  r.cause = optional_field(kCause, [](std::string_view s) { return std::string(s); });
  return r;
}

}  // namespace

Country::Country(std::string_view code) : code_(code) {
  if (code.size() != 2 || !is_upper_alpha(code[0]) || !is_upper_alpha(code[1])) {
    throw ValidationError(fmt::format("country code must be two uppercase letters, got '{}'", code));
  }
}

bool Country::is_known() const { return code_ == "FR" || code_ == "UK" || code_ == "ES" || code_ == "IE"; }

YearMonth YearMonth::parse(std::string_view text) {
  if (text.size() != 7 || text[4] != '-') throw ValidationError(fmt::format("date must be YYYY-MM, got '{}'", text));
  YearMonth ym;
  ym.year = parse_int<int>(text.substr(0, 4), "date year");
  ym.month = parse_int<int>(text.substr(5, 2), "date month");
  if (ym.month < 1 || ym.month > 12) throw ValidationError(fmt::format("month out of range in '{}'", text));
  return ym;
}

std::string YearMonth::to_string() const { return fmt::format("{:04d}-{:02d}", year, month); }

std::string_view to_string(SecurityPrinciple p) {
  switch (p) {
    case SecurityPrinciple::confidentiality: return "confidentiality";
    case SecurityPrinciple::integrity: return "integrity";
    case SecurityPrinciple::availability: return "availability";
    case SecurityPrinciple::none: return "none";
  }
  return "none";
}

SecurityPrinciple parse_security_principle(std::string_view text) {
  for (auto p : {SecurityPrinciple::confidentiality, SecurityPrinciple::integrity, SecurityPrinciple::availability,
                 SecurityPrinciple::none}) {
    if (text == to_string(p)) return p;
  }
  throw ValidationError(fmt::format("unknown security principle '{}'", text));
}

void FineRecord::validate() const {
  if (id.empty()) throw ValidationError("fine record id must not be empty");
  if (fine < Money{}) throw ValidationError(fmt::format("record {}: fine must be non-negative", id));
  if (year != date.year) throw ValidationError(fmt::format("record {}: year does not match date", id));
  if (turnover && *turnover <= Money{}) throw ValidationError(fmt::format("record {}: turnover must be positive", id));
  if (records_affected && *records_affected < 0) {
    throw ValidationError(fmt::format("record {}: records_affected must be non-negative", id));
  }
}

FineCorpus::FineCorpus(std::vector<FineRecord> records, std::string provenance)
    : records_(std::move(records)), provenance_(std::move(provenance)) {
  std::unordered_set<std::string> seen;
  for (const auto& r : records_) {
    r.validate();
    if (!seen.insert(r.id).second) throw ValidationError(fmt::format("duplicate record id '{}'", r.id));
  }
}

std::vector<Money> FineCorpus::fines() const {
  std::vector<Money> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.fine);
  return out;
}

template <typename T>
Range<T>::Range(T min, T max) : min_(std::move(min)), max_(std::move(max)) {
  if (max_ < min_) throw ValidationError("range minimum exceeds maximum");
}

template class Range<Money>;
template class Range<int>;

bool CorpusQuery::matches(const FineRecord& r) const {
  if (countries && !countries->contains(r.country)) return false;
  if (turnover_range && (!r.turnover || !turnover_range->contains(*r.turnover))) return false;
  if (articles && (!r.article || !articles->contains(*r.article))) return false;
  if (year_range && !year_range->contains(r.year)) return false;
  if (security_principles && (!r.security_principle || !security_principles->contains(*r.security_principle))) {
    return false;
  }
  return true;
}

FineCorpus filter(const FineCorpus& corpus, const CorpusQuery& query) {
  std::vector<FineRecord> kept;
  std::copy_if(corpus.records().begin(), corpus.records().end(), std::back_inserter(kept),
               [&](const FineRecord& r) { return query.matches(r); });
  return FineCorpus(std::move(kept), corpus.provenance());
}

std::vector<std::vector<std::string>> read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool any = false;
  char c;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
    any = false;
  };
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started) {
          in_quotes = true;
          field_started = true;
          any = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        end_field();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any || !field.empty() || !row.empty()) end_row();
        break;
      default:
        field.push_back(c);
        field_started = true;
        any = true;
    }
  }
  if (in_quotes) throw ValidationError("unterminated quoted field at end of input");
  if (any || !field.empty() || !row.empty()) end_row();
  return rows;
}

std::string csv_escape(std::string_view field) {
  const bool needs_quotes = field.find_first_of(",\"\n\r") != std::string_view::npos ||
                            (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

FineCorpus parse_corpus(std::istream& in, std::string provenance) {
  std::vector<std::vector<std::string>> rows;
  try {
    rows = read_csv(in);
  } catch (const ValidationError& e) {
    throw ParseError(0, "*", e.what());
  }
  if (rows.empty()) throw ParseError(1, "*", "missing header row");
  std::string header;
  for (std::size_t i = 0; i < rows[0].size(); ++i) header += (i ? "," : "") + rows[0][i];
  if (!header.empty() && static_cast<unsigned char>(header[0]) == 0xEF && header.rfind("\xEF\xBB\xBF", 0) == 0) {
    header.erase(0, 3);
  }
  if (header != kCorpusHeader) {
    throw ParseError(1, "*", fmt::format("header must be '{}'", kCorpusHeader));
  }
  std::vector<FineRecord> records;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::size_t row = i + 1;
    FineRecord r = record_from_fields(rows[i], row);
    if (!seen.insert(r.id).second) throw ParseError(row, "id", fmt::format("duplicate id '{}'", r.id));
    records.push_back(std::move(r));
  }
  return FineCorpus(std::move(records), std::move(provenance));
}

FineCorpus parse_corpus(std::string_view csv, std::string provenance) {
  std::istringstream in{std::string(csv)};
  return parse_corpus(in, std::move(provenance));
}

std::string serialize_corpus(const FineCorpus& corpus) {
  std::string out(kCorpusHeader);
  out.push_back('\n');
  for (const auto& r : corpus.records()) {
    const std::string fields[kColumnCount] = {
        r.id,
        r.date.to_string(),
        std::to_string(r.year),
        r.country.code(),
        r.controller,
        r.fine.to_string(),
        r.turnover ? r.turnover->to_string() : "",
        r.article.value_or(""),
        r.security_principle ? std::string(to_string(*r.security_principle)) : "",
        r.records_affected ? std::to_string(*r.records_affected) : "",
        r.cause.value_or(""),
    };
    for (std::size_t c = 0; c < kColumnCount; ++c) {
      if (c) out.push_back(',');
      out += csv_escape(fields[c]);
    }
    out.push_back('\n');
  }
  return out;
}

nlohmann::json to_json(const FineRecord& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["date"] = r.date.to_string();
  j["year"] = r.year;
  j["country"] = r.country.code();
  j["controller"] = r.controller;
  j["fine_eur"] = r.fine.to_double();
  j["turnover_eur"] = r.turnover ? nlohmann::json(r.turnover->to_double()) : nlohmann::json(nullptr);
  j["article"] = r.article ? nlohmann::json(*r.article) : nlohmann::json(nullptr);
  j["security_principle"] =
      r.security_principle ? nlohmann::json(std::string(to_string(*r.security_principle))) : nlohmann::json(nullptr);
  j["records_affected"] = r.records_affected ? nlohmann::json(*r.records_affected) : nlohmann::json(nullptr);
  j["cause"] = r.cause ? nlohmann::json(*r.cause) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const FineCorpus& corpus) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : corpus.records()) arr.push_back(to_json(r));
  return arr;
}

nlohmann::json to_json(const CorpusQuery& q) {
  nlohmann::json j = nlohmann::json::object();
  if (q.countries) {
    auto& a = j["countries"] = nlohmann::json::array();
    for (const auto& c : *q.countries) a.push_back(c.code());
  }
  if (q.turnover_range) j["turnover_range"] = {q.turnover_range->min().to_double(), q.turnover_range->max().to_double()};
  if (q.articles) j["articles"] = *q.articles;
  if (q.year_range) j["year_range"] = {q.year_range->min(), q.year_range->max()};
  if (q.security_principles) {
    auto& a = j["security_principles"] = nlohmann::json::array();
    for (auto p : *q.security_principles) a.push_back(std::string(to_string(p)));
  }
  return j;
}

FineCorpus corpus_from_json(const nlohmann::json& j, std::string provenance) {
  if (!j.is_array()) throw ValidationError("corpus JSON must be an array of records");
  std::vector<FineRecord> records;
  for (const auto& o : j) {
    try {
      FineRecord r;
      r.id = o.at("id").get<std::string>();
      r.date = YearMonth::parse(o.at("date").get<std::string>());
      r.year = o.at("year").get<int>();
      r.country = Country(o.at("country").get<std::string>());
      r.controller = o.value("controller", "");
      r.fine = Money::from_double(o.at("fine_eur").get<double>());
      auto opt = [&](const char* key) { return o.contains(key) && !o[key].is_null(); };
      if (opt("turnover_eur")) r.turnover = Money::from_double(o["turnover_eur"].get<double>());
      if (opt("article")) r.article = o["article"].get<std::string>();
      if (opt("security_principle")) r.security_principle = parse_security_principle(o["security_principle"].get<std::string>());
      if (opt("records_affected")) r.records_affected = o["records_affected"].get<std::int64_t>();
      if (opt("cause")) r.cause = o["cause"].get<std::string>();
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(fmt::format("malformed corpus record {}: {}", records.size(), e.what()));
    }
  }
  return FineCorpus(std::move(records), std::move(provenance));
}

}  // namespace pdvar
