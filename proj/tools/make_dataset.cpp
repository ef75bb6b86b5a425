// Generates the committed daily OHLCV fixtures: geometric random walks with
// piecewise drift/volatility regimes shaped like large-cap crypto majors over
// 2017-2020 (multi-year bull/bear/recovery cycles, ~3-4% typical daily moves,
// volume loosely tracking volatility). Deterministic for a fixed seed, so the
// files can be regenerated bit-for-bit.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cryptolab/core/rng.hpp"
#include "cryptolab/data/ohlcv.hpp"

namespace {

using cryptolab::Date;
using cryptolab::SeededRng;

bool is_leap(int year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
  static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2 && is_leap(year)) return 29;
  return days[month - 1];
}

Date next_day(Date d) {
  if (++d.day > days_in_month(d.year, d.month)) {
    d.day = 1;
    if (++d.month > 12) {
      d.month = 1;
      ++d.year;
    }
  }
  return d;
}

// Drift/volatility of daily log returns from the given date onward.
struct Regime {
  Date from;
  double mu;
  double sigma;
};

struct AssetPlan {
  std::string name;
  double start_close;
  double start_supply;  // circulating units, grows linearly
  double end_supply;
  double volume_scale;  // volume ~ scale * close * supply fraction
  std::vector<Regime> regimes;
};

const Regime& regime_at(const AssetPlan& plan, const Date& date) {
  const Regime* current = &plan.regimes.front();
  for (const Regime& r : plan.regimes) {
    if (!(date < r.from)) current = &r;
  }
  return *current;
}

void write_asset(const AssetPlan& plan, const Date& first, const Date& last,
                 std::uint64_t seed, const std::string& out_dir) {
  SeededRng rng(seed);
  const std::string path = (std::filesystem::path(out_dir) / (plan.name + ".csv")).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot open " << path << " for writing\n";
    std::exit(1);
  }
  out << "Date,Open,High,Low,Close,Volume,Market Cap\n";

  // Count days for the linear supply schedule.
  int total_days = 0;
  for (Date d = first; !(last < d); d = next_day(d)) ++total_days;

  // The close follows the deterministic regime path times a mean-reverting
  // log deviation: daily moves keep the regime's volatility, but the
  // cumulative noise stays bounded, so every seed realizes the same
  // bull/bear shape instead of wandering an arbitrary factor away from it.
  const double reversion = 0.03;
  double median = plan.start_close;
  double deviation = 0.0;
  double close = plan.start_close;
  double prev_close = close / (1.0 + 0.01 * rng.gaussian(0.0, 1.0));
  int day_index = 0;
  char line[256];
  for (Date d = first; !(last < d); d = next_day(d), ++day_index) {
    const Regime& regime = regime_at(plan, d);
    median = median * std::exp(regime.mu);
    deviation = deviation * (1.0 - reversion) + rng.gaussian(0.0, regime.sigma);
    const double prev = close;
    close = median * std::exp(deviation);
    const double ret = std::log(close / prev);

    const double open = prev_close;
    const double hi_pad = std::abs(rng.gaussian(0.0, regime.sigma / 3.0));
    const double lo_pad = std::abs(rng.gaussian(0.0, regime.sigma / 3.0));
    const double high = std::max(open, close) * std::exp(hi_pad);
    const double low = std::min(open, close) * std::exp(-lo_pad);

    const double frac = static_cast<double>(day_index) / std::max(1, total_days - 1);
    const double supply = plan.start_supply + frac * (plan.end_supply - plan.start_supply);
    const double volume = plan.volume_scale * close *
                          std::exp(0.35 * rng.gaussian(0.0, 1.0) + 6.0 * std::abs(ret));
    const double market_cap = close * supply;

    std::snprintf(line, sizeof(line), "%s,%.2f,%.2f,%.2f,%.2f,%.0f,%.0f\n",
                  d.to_string().c_str(), open, high, low, close, volume, market_cap);
    out << line;
    prev_close = close;
  }
  std::cout << path << ": " << total_days << " rows\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the daily OHLCV fixture files"};
  std::string out_dir = "data";
  std::uint64_t seed = 20170401;
  app.add_option("--out", out_dir, "Output directory (default: data)");
  app.add_option("--seed", seed, "Base seed");
  CLI11_PARSE(app, argc, argv);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "cannot create " << out_dir << ": " << ec.message() << "\n";
    return 1;
  }

  const Date first{2017, 4, 1};
  const Date last{2020, 12, 31};

  AssetPlan bitcoin;
  bitcoin.name = "bitcoin";
  bitcoin.start_close = 1080.0;
  bitcoin.start_supply = 16.25e6;
  bitcoin.end_supply = 18.6e6;
  bitcoin.volume_scale = 120000.0;
  bitcoin.regimes = {
      {{2017, 4, 1}, 0.0090, 0.035},   // run-up year
      {{2018, 1, 1}, -0.0045, 0.040},  // drawdown year
      {{2019, 1, 1}, 0.0060, 0.035},   // first recovery
      {{2019, 7, 1}, -0.0025, 0.030},  // slow bleed into the crash
      {{2020, 4, 1}, 0.0075, 0.033},   // final bull leg
  };

  AssetPlan ethereum;
  ethereum.name = "ethereum";
  ethereum.start_close = 48.0;
  ethereum.start_supply = 90.0e6;
  ethereum.end_supply = 114.0e6;
  ethereum.volume_scale = 220000.0;
  ethereum.regimes = {
      {{2017, 4, 1}, 0.0120, 0.055},    // parabolic run
      {{2018, 1, 14}, -0.0080, 0.050},  // long unwind
      {{2018, 12, 16}, 0.0040, 0.045},  // partial recovery
      {{2019, 7, 1}, -0.0020, 0.040},   // fade
      {{2020, 4, 1}, 0.0060, 0.045},    // final bull leg
  };

  write_asset(bitcoin, first, last, SeededRng(seed).derive(1).seed(), out_dir);
  write_asset(ethereum, first, last, SeededRng(seed).derive(2).seed(), out_dir);
  return 0;
}
