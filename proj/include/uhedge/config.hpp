#pragma once

// Run configuration: a flat `key = value` text file. Blank lines and lines
// starting with '#' are ignored. Relative paths resolve against the directory
// of the file they appear in.

#include "uhedge/backtest.hpp"
#include "uhedge/date.hpp"
#include "uhedge/error.hpp"
#include "uhedge/hedge.hpp"
#include "uhedge/market_data.hpp"

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace uhedge {

struct RunConfig {
    std::filesystem::path spot_file;
    std::filesystem::path futures_file;
    std::filesystem::path index_file;
    ColumnSpec spot_columns{};
    ColumnSpec futures_columns{};
    ColumnSpec index_columns{};
    Frequency frequency = Frequency::FiveDay;
    std::size_t window_length = 0;
    std::size_t crra_window = 0;
    std::optional<Date> in_sample_end;
    std::optional<Date> out_of_sample_end;
    std::vector<Utility> utilities{kAllUtilities.begin(), kAllUtilities.end()};
    std::vector<Side> sides{kAllSides.begin(), kAllSides.end()};
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "out";
    std::filesystem::path hedge_paths_file;  ///< input of `report`; empty means output_dir/hedge_paths.csv
    std::size_t refit_every = 1;
    unsigned threads = 0;
    double min_hedge_lambda = 0.5;
    std::string asset = "asset";
    bool raw_units = false;

    [[nodiscard]] std::vector<HedgeSpec> specs() const {
        std::vector<HedgeSpec> out;
        for (auto u : utilities)
            for (auto s : sides) out.emplace_back(u, s);
        return out;
    }

    [[nodiscard]] std::filesystem::path paths_input() const {
        return hedge_paths_file.empty() ? output_dir / "hedge_paths.csv" : hedge_paths_file;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_unsigned(std::string_view key, std::string_view v) {
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw Error("config", std::string(key) + ": expected a non-negative integer, got '" + std::string(v) + "'");
    return out;
}

inline bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error("config", std::string(key) + ": expected true or false, got '" + std::string(v) + "'");
}

inline std::vector<std::string_view> split_list(std::string_view v) {
    std::vector<std::string_view> out;
    while (!v.empty()) {
        const auto comma = v.find(',');
        const auto item = trim(v.substr(0, comma));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string_view::npos) break;
        v.remove_prefix(comma + 1);
    }
    return out;
}

}  // namespace detail

/// Parses a configuration stream. `base_dir` anchors relative paths.
inline RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
    RunConfig c;
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string, std::less<>> seen;
    std::optional<std::string> date_column, price_column, date_format;
    std::optional<std::string> spot_price, futures_price, index_price;

    const auto path_of = [&](std::string_view v) {
        std::filesystem::path p{std::string(v)};
        return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    };

    while (std::getline(in, line)) {
        ++line_no;
        const auto text = detail::trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto eq = text.find('=');
        const auto where = "line " + std::to_string(line_no);
        if (eq == std::string_view::npos) throw Error("config", where + ": expected key = value");
        const auto key = detail::trim(text.substr(0, eq));
        const auto value = detail::trim(text.substr(eq + 1));
        if (!seen.emplace(key).second) throw Error("config", where + ": duplicate key '" + std::string(key) + "'");

        try {
            if (key == "spot_file") c.spot_file = path_of(value);
            else if (key == "futures_file") c.futures_file = path_of(value);
            else if (key == "index_file") c.index_file = path_of(value);
            else if (key == "hedge_paths_file") c.hedge_paths_file = path_of(value);
            else if (key == "output_dir") c.output_dir = path_of(value);
            else if (key == "date_column") date_column = std::string(value);
            else if (key == "price_column") price_column = std::string(value);
            else if (key == "date_format") date_format = std::string(value);
            else if (key == "spot_price_column") spot_price = std::string(value);
            else if (key == "futures_price_column") futures_price = std::string(value);
            else if (key == "index_price_column") index_price = std::string(value);
            else if (key == "frequency") c.frequency = frequency_from_string(value);
            else if (key == "window_length") c.window_length = detail::parse_unsigned<std::size_t>(key, value);
            else if (key == "crra_window") c.crra_window = detail::parse_unsigned<std::size_t>(key, value);
            else if (key == "refit_every") c.refit_every = detail::parse_unsigned<std::size_t>(key, value);
            else if (key == "threads") c.threads = detail::parse_unsigned<unsigned>(key, value);
            else if (key == "seed") c.seed = detail::parse_unsigned<std::uint64_t>(key, value);
            else if (key == "asset") c.asset = std::string(value);
            else if (key == "raw_units") c.raw_units = detail::parse_bool(key, value);
            else if (key == "min_hedge_lambda") {
                double v = 0.0;
                if (!uhedge::detail::parse_double(value, v) || !(v > 0.0))
                    throw Error("config", "min_hedge_lambda: expected a positive number");
                c.min_hedge_lambda = v;
            } else if (key == "in_sample_end" || key == "out_of_sample_end") {
                const auto d = parse_date(value);
                if (!d) throw Error("config", std::string(key) + ": malformed date '" + std::string(value) + "'");
                (key == "in_sample_end" ? c.in_sample_end : c.out_of_sample_end) = *d;
            } else if (key == "utilities") {
                c.utilities.clear();
                for (auto u : detail::split_list(value)) c.utilities.push_back(utility_from_string(u));
                if (c.utilities.empty()) throw Error("config", "utilities: empty list");
            } else if (key == "sides") {
                c.sides.clear();
                for (auto s : detail::split_list(value)) c.sides.push_back(side_from_string(s));
                if (c.sides.empty()) throw Error("config", "sides: empty list");
            } else {
                throw Error("config", "unknown key '" + std::string(key) + "'");
            }
        } catch (const Error& e) {
            throw Error("config", where + ": " + e.what());
        }
    }

    for (auto* cols : {&c.spot_columns, &c.futures_columns, &c.index_columns}) {
        if (date_column) cols->date_column = *date_column;
        if (price_column) cols->price_column = *price_column;
        if (date_format) cols->date_format = *date_format;
    }
    if (spot_price) c.spot_columns.price_column = *spot_price;
    if (futures_price) c.futures_columns.price_column = *futures_price;
    if (index_price) c.index_columns.price_column = *index_price;
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("config", "cannot open config file '" + path.string() + "'");
    try {
        return parse_config(in, path.parent_path());
    } catch (const Error& e) {
        throw Error("config", path.string() + ": " + e.what());
    }
}

/// Returns aligned to the common calendar of every configured price file.
struct MarketData {
    ReturnSeries spot;
    ReturnSeries futures;
    std::optional<ReturnSeries> index;
    std::size_t dropped_dates = 0;  ///< price dates missing from at least one file
};

inline PriceSeries load_price_file(const std::filesystem::path& path, const ColumnSpec& columns,
                                   std::string_view role) {
    if (path.empty()) throw Error("config", std::string(role) + "_file is not set");
    std::ifstream in(path);
    if (!in) throw Error("market_data", "cannot open " + std::string(role) + " file '" + path.string() + "'");
    try {
        return load_prices(in, columns);
    } catch (const Error& e) {
        throw Error("market_data", path.string() + ": " + e.what());
    }
}

inline MarketData load_market(const RunConfig& c, bool need_index) {
    std::vector<PriceSeries> prices;
    prices.push_back(load_price_file(c.spot_file, c.spot_columns, "spot"));
    prices.push_back(load_price_file(c.futures_file, c.futures_columns, "futures"));
    const bool with_index = need_index || !c.index_file.empty();
    if (with_index) prices.push_back(load_price_file(c.index_file, c.index_columns, "index"));
    MarketData m;
    const auto aligned = align(prices, &m.dropped_dates);
    m.spot = to_returns(aligned[0], c.frequency);
    m.futures = to_returns(aligned[1], c.frequency);
    if (with_index) m.index = to_returns(aligned[2], c.frequency);
    return m;
}

/// Backtest settings from a run configuration, checking that both sample
/// boundaries fall inside the span of the return data.
inline BacktestConfig backtest_config(const RunConfig& c, const ReturnSeries& returns) {
    if (c.window_length == 0) throw Error("config", "window_length is not set");
    if (!c.in_sample_end) throw Error("config", "in_sample_end is not set");
    if (!c.out_of_sample_end) throw Error("config", "out_of_sample_end is not set");
    const Date first = returns.dates().front();
    const Date last = returns.dates().back();
    for (const auto& [name, d] : {std::pair{"in_sample_end", *c.in_sample_end},
                                  std::pair{"out_of_sample_end", *c.out_of_sample_end}})
        if (d < first || last < d)
            throw Error("config", std::string(name) + " " + d.iso() + " lies outside the data span " + first.iso() +
                                      " .. " + last.iso());
    BacktestConfig b;
    b.window_length = c.window_length;
    b.crra_window = c.crra_window;
    b.frequency = c.frequency;
    b.in_sample_end = *c.in_sample_end;
    b.out_of_sample_end = *c.out_of_sample_end;
    b.specs = c.specs();
    b.seed = c.seed;
    b.refit_every = c.refit_every;
    b.min_hedge_lambda = c.min_hedge_lambda;
    b.threads = c.threads;
    b.validate();
    return b;
}

}  // namespace uhedge
