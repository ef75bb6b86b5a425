#include "cryptolab/data/ohlcv.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "cryptolab/core/errors.hpp"

namespace cryptolab {

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

// Splits one CSV line honoring double-quoted fields (quotes may wrap fields
// containing commas, e.g. "19,497.40").
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '"') {
      if (in_quotes && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else {
        in_quotes = !in_quotes;
      }
    } else if (c == ',' && !in_quotes) {
      fields.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(current);
  return fields;
}

double parse_number(const std::string& raw, int line_no, const std::string& column) {
  std::string cleaned;
  cleaned.reserve(raw.size());
  for (char c : raw) {
    if (c == ',' || c == '$' || c == ' ' || c == '"' || c == '\r') continue;
    cleaned += c;
  }
  if (cleaned.empty()) {
    throw DataError("line " + std::to_string(line_no) + ": empty " + column + " field");
  }
  try {
    std::size_t consumed = 0;
    const double value = std::stod(cleaned, &consumed);
    if (consumed != cleaned.size() || !std::isfinite(value)) {
      throw std::invalid_argument(cleaned);
    }
    return value;
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line_no) + ": cannot parse " + column +
                    " value '" + trim(raw) + "'");
  }
}

const std::array<std::string, 12> kMonthNames = {"jan", "feb", "mar", "apr",
                                                 "may", "jun", "jul", "aug",
                                                 "sep", "oct", "nov", "dec"};

bool valid_date(int y, int m, int d) {
  if (m < 1 || m > 12 || d < 1) return false;
  static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int dim = days[m - 1];
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  if (m == 2 && leap) dim = 29;
  return d <= dim;
}

}  // namespace

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

Date Date::parse(const std::string& text) {
  const std::string s = trim(text);
  Date d;
  // ISO-8601: YYYY-MM-DD.
  if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
    d.year = std::stoi(s.substr(0, 4));
    d.month = std::stoi(s.substr(5, 2));
    d.day = std::stoi(s.substr(8, 2));
    if (!valid_date(d.year, d.month, d.day)) {
      throw DataError("invalid calendar date: " + s);
    }
    return d;
  }
  // Fallback: "Apr 01, 2017".
  std::istringstream in(s);
  std::string mon, day_str, year_str;
  if (in >> mon >> day_str >> year_str) {
    const std::string m3 = lower(mon).substr(0, 3);
    for (std::size_t i = 0; i < kMonthNames.size(); ++i) {
      if (kMonthNames[i] == m3) {
        d.month = static_cast<int>(i) + 1;
        if (!day_str.empty() && day_str.back() == ',') day_str.pop_back();
        try {
          d.day = std::stoi(day_str);
          d.year = std::stoi(year_str);
        } catch (const std::exception&) {
          throw DataError("cannot parse date: " + s);
        }
        if (!valid_date(d.year, d.month, d.day)) {
          throw DataError("invalid calendar date: " + s);
        }
        return d;
      }
    }
  }
  throw DataError("cannot parse date: " + s);
}

std::vector<double> RawSeries::closes() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.close);
  return out;
}

std::vector<double> RawSeries::volumes() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.volume);
  return out;
}

std::vector<double> RawSeries::feature_column(const std::string& feature) const {
  const std::string f = lower(trim(feature));
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (f == "open") out.push_back(r.open);
    else if (f == "high") out.push_back(r.high);
    else if (f == "low") out.push_back(r.low);
    else if (f == "close") out.push_back(r.close);
    else if (f == "volume") out.push_back(r.volume);
    else throw ParameterError("unknown feature: " + feature);
  }
  return out;
}

RawSeries parse_csv(std::istream& in, const std::string& asset) {
  std::string header_line;
  if (!std::getline(in, header_line)) throw SchemaError("empty CSV input");

  std::map<std::string, std::size_t> columns;
  const std::vector<std::string> header = split_csv_line(header_line);
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string key = lower(trim(header[i]));
    // Normalize "market cap" / "market_cap" / "marketcap".
    std::string squashed;
    for (char c : key) {
      if (c != ' ' && c != '_') squashed += c;
    }
    columns[squashed] = i;
  }

  const char* required[] = {"date", "open", "high", "low", "close", "volume"};
  for (const char* col : required) {
    if (!columns.count(col)) {
      throw SchemaError(std::string("missing required column: ") + col);
    }
  }
  const bool has_market_cap = columns.count("marketcap") > 0;

  RawSeries series;
  series.asset = asset;

  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    auto field = [&](const char* name) -> const std::string& {
      const std::size_t idx = columns.at(name);
      if (idx >= fields.size()) {
        throw DataError("line " + std::to_string(line_no) + ": too few fields");
      }
      return fields[idx];
    };

    OhlcvRecord rec;
    try {
      rec.date = Date::parse(field("date"));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
    rec.open = parse_number(field("open"), line_no, "open");
    rec.high = parse_number(field("high"), line_no, "high");
    rec.low = parse_number(field("low"), line_no, "low");
    rec.close = parse_number(field("close"), line_no, "close");
    rec.volume = parse_number(field("volume"), line_no, "volume");
    if (has_market_cap) {
      const std::size_t idx = columns.at("marketcap");
      if (idx < fields.size() && !trim(fields[idx]).empty()) {
        rec.market_cap = parse_number(fields[idx], line_no, "market cap");
      }
    }

    if (rec.close <= 0.0) {
      throw DataError("line " + std::to_string(line_no) +
                      ": non-positive close rejected (close=" +
                      std::to_string(rec.close) + ")");
    }
    if (rec.volume < 0.0) {
      throw DataError("line " + std::to_string(line_no) + ": negative volume");
    }
    const double body_low = std::min(rec.open, rec.close);
    const double body_high = std::max(rec.open, rec.close);
    if (rec.low > body_low || rec.high < body_high) {
      throw DataError("line " + std::to_string(line_no) +
                      ": OHLC bounds violated (low <= open/close <= high required)");
    }
    series.records.push_back(rec);
  }

  std::stable_sort(series.records.begin(), series.records.end(),
                   [](const OhlcvRecord& a, const OhlcvRecord& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < series.records.size(); ++i) {
    if (series.records[i].date == series.records[i - 1].date) {
      throw DataError("duplicate date: " + series.records[i].date.to_string());
    }
  }
  return series;
}

RawSeries parse_csv_file(const std::string& path, const std::string& asset) {
  std::ifstream in(path);
  if (!in.is_open()) throw FileError("cannot open CSV file: " + path);
  return parse_csv(in, asset);
}

SplitSeries split(const RawSeries& series, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ParameterError("split: train_fraction must lie in (0, 1), got " +
                         std::to_string(train_fraction));
  }
  const auto n = static_cast<double>(series.size());
  const auto cut = static_cast<std::size_t>(std::floor(n * train_fraction));

  SplitSeries out;
  out.train.asset = series.asset;
  out.test.asset = series.asset;
  out.train.records.assign(series.records.begin(), series.records.begin() + cut);
  out.test.records.assign(series.records.begin() + cut, series.records.end());
  return out;
}

}  // namespace cryptolab
