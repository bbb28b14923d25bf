#include "mshedge/market_csv.hpp"

#include <charconv>

#include "mshedge/errors.hpp"
#include "mshedge/text_io.hpp"

namespace mshedge {

namespace {

using std::chrono::sys_days;
using std::chrono::weekday;
using std::chrono::year_month_day;

bool is_weekend(year_month_day d) {
  const weekday wd{sys_days{d}};
  return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

year_month_day parse_date(std::string_view text) {
  // YYYY-MM-DD
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw InputError("bad date '" + std::string(text) + "'");
  int y = 0;
  unsigned m = 0, d = 0;
  auto ok = [&](std::string_view part, auto& out) {
    auto r = std::from_chars(part.data(), part.data() + part.size(), out);
    return r.ec == std::errc{} && r.ptr == part.data() + part.size();
  };
  if (!ok(text.substr(0, 4), y) || !ok(text.substr(5, 2), m) || !ok(text.substr(8, 2), d)) {
    throw InputError("bad date '" + std::string(text) + "'");
  }
  year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw InputError("invalid calendar date '" + std::string(text) + "'");
  return ymd;
}

int weekdays_strictly_between(year_month_day a, year_month_day b) {
  int count = 0;
  for (sys_days d = sys_days{a} + std::chrono::days{1}; d < sys_days{b}; d += std::chrono::days{1}) {
    if (!is_weekend(year_month_day{d})) ++count;
  }
  return count;
}

}  // namespace

std::string format_date(year_month_day d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

std::vector<MarketCsvRow> parse_market_csv(std::string_view text, const std::string& source_name) {
  CsvTable table = parse_csv(text, source_name);
  const auto ci_date = table.column("date");
  const auto ci_s = table.column("s");
  const auto ci_c = table.column("c");
  std::vector<MarketCsvRow> rows;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& raw = table.rows[i];
    const std::size_t line = table.row_lines[i];
    MarketCsvRow row;
    try {
      row.date = parse_date(raw[ci_date]);
      if (raw[ci_s].empty() || raw[ci_c].empty()) {
        row.trading = false;
      } else {
        row.s = parse_double(raw[ci_s]);
        row.c = parse_double(raw[ci_c]);
        if (!(row.s > 0.0) || !(row.c >= 0.0)) throw InputError("prices must be positive");
      }
    } catch (const InputError& e) {
      throw ParseError(source_name, line, e.what());
    }
    if (!rows.empty() && sys_days{row.date} <= sys_days{rows.back().date}) {
      throw ParseError(source_name, line, "dates must be strictly increasing");
    }
    if (is_weekend(row.date)) row.trading = false;
    rows.push_back(row);
  }
  return rows;
}

MarketSeries ingest_market_rows(const std::vector<MarketCsvRow>& rows, const CallSpec& spec, const IngestOptions& opts,
                                const std::string& source_name) {
  spec.validate();
  const std::size_t needed = static_cast<std::size_t>(spec.maturity_day) + 1;
  std::vector<const MarketCsvRow*> trading;
  for (const auto& r : rows) {
    if (r.trading) trading.push_back(&r);
  }
  for (std::size_t i = 1; i < trading.size() && !opts.force; ++i) {
    const int missing = weekdays_strictly_between(trading[i - 1]->date, trading[i]->date);
    if (missing > 1) {
      throw InputError(source_name + ": " + std::to_string(missing) + " weekdays missing between " +
                       format_date(trading[i - 1]->date) + " and " + format_date(trading[i]->date) +
                       " (set force to accept)");
    }
  }
  if (trading.size() < needed) {
    throw InputError(source_name + ": " + std::to_string(trading.size()) + " trading rows, need " +
                     std::to_string(needed));
  }
  if (trading.size() > needed && !opts.truncate) {
    throw InputError(source_name + ": " + std::to_string(trading.size()) + " trading rows, expected " +
                     std::to_string(needed) + " (set truncate to keep the last " + std::to_string(needed) + ")");
  }
  MarketSeries series;
  series.spec = spec;
  series.source = SeriesSource::kReal;
  for (std::size_t i = trading.size() - needed; i < trading.size(); ++i) {
    series.s.push_back(trading[i]->s);
    series.c.push_back(trading[i]->c);
  }
  series.validate();
  return series;
}

MarketSeries ingest_real_csv(const std::filesystem::path& path, const CallSpec& spec, const IngestOptions& opts) {
  return ingest_market_rows(parse_market_csv(read_file(path), path.string()), spec, opts, path.string());
}

std::string export_market_csv(const MarketSeries& series, year_month_day start) {
  std::string out = "date,s,c\n";
  sys_days d{start};
  for (std::size_t t = 0; t < series.size(); ++t) {
    while (is_weekend(year_month_day{d})) d += std::chrono::days{1};
    out += format_date(year_month_day{d}) + ',' + format_double(series.s[t]) + ',' + format_double(series.c[t]) + '\n';
    d += std::chrono::days{1};
  }
  return out;
}

}  // namespace mshedge
