// Daily OHLCV ingestion: CSV parsing, validation, and the chronological
// train/test split.
//
// Accepted CSV: UTF-8, comma separated, header row with case-insensitive
// columns Date, Open, High, Low, Close, Volume and optionally Market Cap;
// extra columns are ignored. Numeric fields may carry currency symbols,
// thousands separators and double quotes. Dates are ISO-8601 (2017-04-01)
// with "Apr 01, 2017" accepted as a fallback.
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cryptolab {

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  std::string to_string() const;  // ISO-8601
  static Date parse(const std::string& text);
};

struct OhlcvRecord {
  Date date;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  double volume = 0.0;
  std::optional<double> market_cap;
};

struct RawSeries {
  std::string asset;
  std::vector<OhlcvRecord> records;

  std::size_t size() const { return records.size(); }
  std::vector<double> closes() const;
  std::vector<double> volumes() const;
  std::vector<double> feature_column(const std::string& feature) const;
};

// Parses and validates a CSV stream into a date-sorted series. Rows with a
// non-positive close, inconsistent OHLC bounds, negative volume, duplicate
// or unparseable dates all raise errors naming the offending line.
RawSeries parse_csv(std::istream& in, const std::string& asset);

RawSeries parse_csv_file(const std::string& path, const std::string& asset);

// Chronological split at floor(len * train_fraction); no shuffling.
struct SplitSeries {
  RawSeries train;
  RawSeries test;
};
SplitSeries split(const RawSeries& series, double train_fraction);

}  // namespace cryptolab
