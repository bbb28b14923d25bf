#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mshedge/pricer.hpp"

namespace mshedge {

/// One line of a quote file: date,s,c. Holidays may appear with empty s/c.
struct MarketCsvRow {
  std::chrono::year_month_day date;
  double s = 0.0;
  double c = 0.0;
  bool trading = true;  // false for weekends and rows without prices
};

struct IngestOptions {
  bool truncate = false;  // keep the last 31 trading rows of a longer file
  bool force = false;     // accept gaps longer than one missing weekday
};

/// Parses date,s,c rows (ISO-8601 dates, strictly increasing). Weekend dates
/// and rows with empty prices are marked non-trading. Throws ParseError with
/// the offending line number.
std::vector<MarketCsvRow> parse_market_csv(std::string_view text, const std::string& source_name);

/// Builds a 31-day real MarketSeries from the trading rows. A gap of more
/// than one missing weekday between consecutive trading rows is rejected
/// unless opts.force is set.
MarketSeries ingest_market_rows(const std::vector<MarketCsvRow>& rows, const CallSpec& spec, const IngestOptions& opts,
                                const std::string& source_name = "market csv");
MarketSeries ingest_real_csv(const std::filesystem::path& path, const CallSpec& spec, const IngestOptions& opts = {});

/// Writes a series as date,s,c on consecutive weekdays starting at `start`.
std::string export_market_csv(const MarketSeries& series, std::chrono::year_month_day start);

std::string format_date(std::chrono::year_month_day d);

}  // namespace mshedge
