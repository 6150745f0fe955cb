#pragma once

// Price ingestion, return construction and the descriptive diagnostics
// reported for each series (moments, Bera-Jarque, ARCH-LM, ADF).

#include "uhedge/date.hpp"
#include "uhedge/error.hpp"
#include "uhedge/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace uhedge {

enum class Frequency { FiveDay, TwentyDay };

/// Number of trading observations spanned by one return.
constexpr std::size_t stride(Frequency f) { return f == Frequency::FiveDay ? 5 : 20; }

inline std::string_view to_string(Frequency f) {
    return f == Frequency::FiveDay ? "weekly" : "monthly";
}

inline Frequency frequency_from_string(std::string_view s) {
    if (s == "weekly" || s == "5" || s == "five_day") return Frequency::FiveDay;
    if (s == "monthly" || s == "20" || s == "twenty_day") return Frequency::TwentyDay;
    throw Error("market_data", "unknown frequency '" + std::string(s) + "'");
}

/// Strictly date-ordered, strictly positive price levels.
class PriceSeries {
public:
    PriceSeries() = default;
    PriceSeries(std::vector<Date> dates, std::vector<double> prices)
        : dates_(std::move(dates)), prices_(std::move(prices)) {
        if (dates_.size() != prices_.size())
            throw Error("market_data", "date and price columns differ in length");
        for (std::size_t i = 0; i < prices_.size(); ++i) {
            if (!(std::isfinite(prices_[i]) && prices_[i] > 0.0))
                throw Error("market_data", "non-positive price at observation " + std::to_string(i));
            if (i > 0 && !(dates_[i - 1] < dates_[i]))
                throw Error("market_data", "non-increasing date at observation " + std::to_string(i));
        }
    }

    [[nodiscard]] std::size_t size() const { return prices_.size(); }
    [[nodiscard]] std::span<const Date> dates() const { return dates_; }
    [[nodiscard]] std::span<const double> prices() const { return prices_; }

private:
    std::vector<Date> dates_;
    std::vector<double> prices_;
};

/// Date-indexed log returns at a declared frequency.
class ReturnSeries {
public:
    ReturnSeries() = default;
    ReturnSeries(Frequency freq, std::vector<Date> dates, std::vector<double> values)
        : freq_(freq), dates_(std::move(dates)), values_(std::move(values)) {
        if (dates_.size() != values_.size())
            throw Error("market_data", "date and return columns differ in length");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i]))
                throw Error("market_data", "non-finite return at observation " + std::to_string(i));
            if (i > 0 && !(dates_[i - 1] < dates_[i]))
                throw Error("market_data", "non-increasing date at observation " + std::to_string(i));
        }
    }

    [[nodiscard]] Frequency frequency() const { return freq_; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }
    [[nodiscard]] bool empty() const { return values_.empty(); }
    [[nodiscard]] std::span<const Date> dates() const { return dates_; }
    [[nodiscard]] std::span<const double> values() const { return values_; }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }

    /// Observations [first, first + count).
    [[nodiscard]] ReturnSeries slice(std::size_t first, std::size_t count) const {
        return ReturnSeries(freq_, {dates_.begin() + first, dates_.begin() + first + count},
                            {values_.begin() + first, values_.begin() + first + count});
    }

    /// Observations dated on or before `last`.
    [[nodiscard]] ReturnSeries through(Date last) const {
        const auto it = std::upper_bound(dates_.begin(), dates_.end(), last);
        return slice(0, static_cast<std::size_t>(it - dates_.begin()));
    }

private:
    Frequency freq_ = Frequency::FiveDay;
    std::vector<Date> dates_;
    std::vector<double> values_;
};

struct ColumnSpec {
    std::string date_column = "date";
    std::string price_column = "price";
    std::string date_format = "%Y-%m-%d";
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '"')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '"' || field.back() == '\r'))
            field.remove_suffix(1);
        fields.push_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

inline bool parse_double(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace detail

/// Reads a headered CSV price file. Errors name the 1-based file line.
inline PriceSeries load_prices(std::istream& in, const ColumnSpec& spec = {}) {
    std::string line;
    if (!std::getline(in, line)) throw Error("market_data", "empty input, expected a header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    const auto header = detail::split_csv_line(line);
    const auto find_col = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw Error("market_data", "missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t date_col = find_col(spec.date_column);
    const std::size_t price_col = find_col(spec.price_column);

    std::vector<Date> dates;
    std::vector<double> prices;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_csv_line(line);
        const auto where = "row " + std::to_string(line_no) + ": ";
        if (fields.size() <= std::max(date_col, price_col))
            throw Error("market_data", where + "malformed row, too few fields");
        const auto date = parse_date(fields[date_col], spec.date_format);
        if (!date) throw Error("market_data", where + "malformed date '" + std::string(fields[date_col]) + "'");
        double price = 0.0;
        if (!detail::parse_double(fields[price_col], price))
            throw Error("market_data", where + "malformed price '" + std::string(fields[price_col]) + "'");
        if (!(std::isfinite(price) && price > 0.0))
            throw Error("market_data", where + "non-positive price " + std::string(fields[price_col]));
        if (!dates.empty() && !(dates.back() < *date))
            throw Error("market_data", where + "non-increasing date " + date->iso());
        dates.push_back(*date);
        prices.push_back(price);
    }
    return PriceSeries(std::move(dates), std::move(prices));
}

/// Inner join of several price series on their dates. `dropped` receives the
/// total number of observations discarded across all inputs.
inline std::vector<PriceSeries> align(std::span<const PriceSeries> series, std::size_t* dropped = nullptr) {
    std::vector<Date> common(series.front().dates().begin(), series.front().dates().end());
    for (std::size_t s = 1; s < series.size(); ++s) {
        std::vector<Date> next;
        std::set_intersection(common.begin(), common.end(), series[s].dates().begin(),
                              series[s].dates().end(), std::back_inserter(next));
        common = std::move(next);
    }
    std::vector<PriceSeries> out;
    std::size_t total_dropped = 0;
    for (const auto& ps : series) {
        std::vector<double> prices;
        prices.reserve(common.size());
        std::size_t j = 0;
        for (std::size_t i = 0; i < ps.size() && j < common.size(); ++i) {
            if (ps.dates()[i] == common[j]) {
                prices.push_back(ps.prices()[i]);
                ++j;
            }
        }
        total_dropped += ps.size() - common.size();
        out.emplace_back(common, std::move(prices));
    }
    if (dropped) *dropped = total_dropped;
    return out;
}

/// Non-overlapping log returns anchored at the first observation. Return k
/// covers observations (k-1)*stride .. k*stride and is dated at the latter.
inline ReturnSeries to_returns(const PriceSeries& prices, Frequency freq) {
    const std::size_t step = stride(freq);
    if (prices.size() < step + 1)
        throw Error("market_data", "series too short for one full " + std::string(to_string(freq)) + " return");
    const std::size_t count = (prices.size() - 1) / step;
    std::vector<Date> dates(count);
    std::vector<double> values(count);
    const auto p = prices.prices();
    for (std::size_t k = 1; k <= count; ++k) {
        dates[k - 1] = prices.dates()[k * step];
        values[k - 1] = std::log(p[k * step] / p[(k - 1) * step]);
    }
    return ReturnSeries(freq, std::move(dates), std::move(values));
}

/// Engle's LM test for ARCH effects: n_eff * R^2 from regressing squared
/// demeaned values on a constant and `lags` of themselves. Chi-square(lags).
inline double arch_lm_test(std::span<const double> x, std::size_t lags = 4) {
    if (x.size() < lags + 8) throw Error("market_data", "ARCH-LM needs at least lags + 8 observations");
    const double m = stats::mean(x);
    std::vector<double> e2(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) e2[i] = (x[i] - m) * (x[i] - m);
    if (*std::max_element(e2.begin(), e2.end()) == 0.0)
        throw Error("market_data", "ARCH-LM on zero-variance input");

    const auto n_eff = static_cast<Eigen::Index>(x.size() - lags);
    Eigen::MatrixXd X(n_eff, static_cast<Eigen::Index>(lags + 1));
    Eigen::VectorXd y(n_eff);
    for (Eigen::Index t = 0; t < n_eff; ++t) {
        const auto row = static_cast<std::size_t>(t) + lags;
        y(t) = e2[row];
        X(t, 0) = 1.0;
        for (std::size_t j = 1; j <= lags; ++j) X(t, static_cast<Eigen::Index>(j)) = e2[row - j];
    }
    const auto fit = stats::ols(X, y);
    return static_cast<double>(n_eff) * fit.r_squared;
}

/// Augmented Dickey-Fuller t statistic on the lagged level, regression with
/// a constant and no trend.
inline double adf_test(std::span<const double> x, std::size_t lags = 4) {
    if (x.size() < lags + 10) throw Error("market_data", "ADF needs at least lags + 10 observations");
    std::vector<double> dx(x.size() - 1);
    for (std::size_t i = 1; i < x.size(); ++i) dx[i - 1] = x[i] - x[i - 1];

    // dx[t-1] = x[t] - x[t-1]; regress for t = lags+1 .. n-1
    const auto n_eff = static_cast<Eigen::Index>(x.size() - 1 - lags);
    Eigen::MatrixXd X(n_eff, static_cast<Eigen::Index>(lags + 2));
    Eigen::VectorXd y(n_eff);
    for (Eigen::Index r = 0; r < n_eff; ++r) {
        const auto t = static_cast<std::size_t>(r) + lags + 1;
        y(r) = dx[t - 1];
        X(r, 0) = 1.0;
        X(r, 1) = x[t - 1];
        for (std::size_t i = 1; i <= lags; ++i) X(r, static_cast<Eigen::Index>(i + 1)) = dx[t - 1 - i];
    }
    if (y.cwiseAbs().maxCoeff() == 0.0) throw Error("market_data", "degenerate ADF regression");
    stats::OlsFit fit;
    try {
        fit = stats::ols(X, y);
    } catch (const Error&) {
        throw Error("market_data", "degenerate ADF regression");
    }
    if (!(fit.std_err(1) > 0.0)) throw Error("market_data", "degenerate ADF regression");
    return fit.coef(1) / fit.std_err(1);
}

inline double arch_lm_test(const ReturnSeries& r, std::size_t lags = 4) { return arch_lm_test(r.values(), lags); }
inline double adf_test(const ReturnSeries& r, std::size_t lags = 4) { return adf_test(r.values(), lags); }

struct DescriptiveStats {
    std::size_t n = 0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double std_dev = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double bera_jarque = 0.0;
    double arch_lm = 0.0;
    double adf = 0.0;
};

/// Sample skewness m3/m2^1.5 and excess kurtosis m4/m2^2 - 3 (1/n moments).
struct Shape {
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

inline Shape shape(std::span<const double> x) {
    if (x.size() < 2) throw Error("market_data", "moments need at least 2 observations");
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*lo == *hi) throw Error("market_data", "zero variance, moments undefined");
    const auto m = stats::central_moments(x);
    if (!(m.m2 > 0.0)) throw Error("market_data", "zero variance, moments undefined");
    return {m.m3 / std::pow(m.m2, 1.5), m.m4 / (m.m2 * m.m2) - 3.0};
}

/// Summary row for one series. Skewness and kurtosis use 1/n central
/// moments; std_dev is the usual 1/(n-1) estimate.
inline DescriptiveStats describe(std::span<const double> x) {
    if (x.size() < 8) throw Error("market_data", "describe needs at least 8 observations");
    DescriptiveStats d;
    d.n = x.size();
    d.mean = stats::mean(x);
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    d.min = *lo;
    d.max = *hi;
    const auto sh = shape(x);
    d.std_dev = std::sqrt(stats::sample_variance(x));
    d.skewness = sh.skewness;
    d.excess_kurtosis = sh.excess_kurtosis;
    const auto n = static_cast<double>(d.n);
    d.bera_jarque = n * (d.skewness * d.skewness / 6.0 + d.excess_kurtosis * d.excess_kurtosis / 24.0);
    d.arch_lm = arch_lm_test(x, 4);
    d.adf = adf_test(x, 4);
    return d;
}

inline DescriptiveStats describe(const ReturnSeries& r) { return describe(r.values()); }

}  // namespace uhedge
