#pragma once

// CSV and text serialization of every artifact the CLI emits. Numbers are
// written in shortest round-trip form, so re-reading a file reproduces the
// in-memory values bit for bit.

#include "uhedge/backtest.hpp"
#include "uhedge/error.hpp"
#include "uhedge/market_data.hpp"
#include "uhedge/performance.hpp"
#include "uhedge/risk_aversion.hpp"
#include "uhedge/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace uhedge::io {

inline std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

namespace detail {

inline std::vector<std::vector<std::string>> read_rows(std::istream& in, std::string_view expected_header,
                                                       const char* what) {
    std::string line;
    if (!std::getline(in, line)) throw Error("io", std::string(what) + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected_header)
        throw Error("io", std::string(what) + ": unexpected header '" + line + "', expected '" +
                              std::string(expected_header) + "'");
    const auto columns = uhedge::detail::split_csv_line(expected_header).size();
    std::vector<std::vector<std::string>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = uhedge::detail::split_csv_line(line);
        if (fields.size() != columns)
            throw Error("io", std::string(what) + ": row " + std::to_string(line_no) + " has " +
                                  std::to_string(fields.size()) + " fields, expected " + std::to_string(columns));
        rows.emplace_back(fields.begin(), fields.end());
    }
    return rows;
}

inline double to_double(const std::string& s, const char* what) {
    double v = 0.0;
    if (!uhedge::detail::parse_double(s, v)) throw Error("io", std::string(what) + ": malformed number '" + s + "'");
    return v;
}

inline Date to_date(const std::string& s, const char* what) {
    const auto d = parse_date(s);
    if (!d) throw Error("io", std::string(what) + ": malformed date '" + s + "'");
    return *d;
}

}  // namespace detail

// ---------------------------------------------------------------- stats

inline constexpr std::string_view kStatsHeader =
    "series,frequency,mean,min,max,std_dev,skewness,excess_kurtosis,bera_jarque,arch_lm,adf";

struct StatsRow {
    std::string series;
    Frequency frequency = Frequency::FiveDay;
    DescriptiveStats stats;
};

inline void write_stats(std::ostream& out, const std::vector<StatsRow>& rows) {
    out << kStatsHeader << '\n';
    for (const auto& r : rows) {
        const auto& s = r.stats;
        out << r.series << ',' << to_string(r.frequency) << ',' << format_double(s.mean) << ','
            << format_double(s.min) << ',' << format_double(s.max) << ',' << format_double(s.std_dev) << ','
            << format_double(s.skewness) << ',' << format_double(s.excess_kurtosis) << ','
            << format_double(s.bera_jarque) << ',' << format_double(s.arch_lm) << ',' << format_double(s.adf)
            << '\n';
    }
}

inline std::vector<StatsRow> read_stats(std::istream& in) {
    std::vector<StatsRow> out;
    for (const auto& f : detail::read_rows(in, kStatsHeader, "stats")) {
        StatsRow r;
        r.series = f[0];
        r.frequency = frequency_from_string(f[1]);
        double* fields[] = {&r.stats.mean,     &r.stats.min,           &r.stats.max,
                            &r.stats.std_dev,  &r.stats.skewness,      &r.stats.excess_kurtosis,
                            &r.stats.bera_jarque, &r.stats.arch_lm,    &r.stats.adf};
        for (std::size_t i = 0; i < 9; ++i) *fields[i] = detail::to_double(f[i + 2], "stats");
        out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------- crra

inline constexpr std::string_view kCrraHeader = "date,lambda";

inline void write_crra(std::ostream& out, const CrraPath& path) {
    out << kCrraHeader << '\n';
    for (std::size_t i = 0; i < path.size(); ++i)
        out << path.dates()[i].iso() << ',' << format_double(path.lambdas()[i]) << '\n';
}

inline CrraPath read_crra(std::istream& in, Frequency freq) {
    std::vector<Date> dates;
    std::vector<double> lambdas;
    for (const auto& f : detail::read_rows(in, kCrraHeader, "crra")) {
        dates.push_back(detail::to_date(f[0], "crra"));
        lambdas.push_back(detail::to_double(f[1], "crra"));
    }
    return CrraPath(freq, std::move(dates), std::move(lambdas));
}

inline constexpr std::string_view kCrraSummaryHeader = "frequency,n,mean,std_dev,min,max";

/// One-line distribution summary of a risk-aversion path.
inline void write_crra_summary(std::ostream& out, const CrraPath& path) {
    out << kCrraSummaryHeader << '\n';
    const auto x = path.lambdas();
    if (x.empty()) return;
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    out << to_string(path.frequency()) << ',' << x.size() << ',' << format_double(stats::mean(x)) << ','
        << (x.size() > 1 ? format_double(std::sqrt(stats::sample_variance(x))) : "") << ',' << format_double(*lo)
        << ',' << format_double(*hi) << '\n';
}

// ---------------------------------------------------------------- hedge paths

inline constexpr std::string_view kHedgePathHeader = "date,utility,side,segment,beta,portfolio_return";

inline void write_hedge_paths(std::ostream& out, const std::vector<HedgePath>& paths) {
    out << kHedgePathHeader << '\n';
    for (const auto& p : paths)
        for (const auto& o : p.observations)
            out << o.date.iso() << ',' << to_string(p.spec.utility) << ',' << to_string(p.spec.side) << ','
                << to_string(p.segment) << ',' << format_double(o.beta) << ',' << format_double(o.portfolio_return)
                << '\n';
}

/// Groups rows back into paths, in order of first appearance.
inline std::vector<HedgePath> read_hedge_paths(std::istream& in) {
    std::vector<HedgePath> paths;
    std::map<std::tuple<Utility, Side, Segment>, std::size_t> slot;
    for (const auto& f : detail::read_rows(in, kHedgePathHeader, "hedge paths")) {
        const auto key = std::tuple{utility_from_string(f[1]), side_from_string(f[2]), segment_from_string(f[3])};
        auto it = slot.find(key);
        if (it == slot.end()) {
            it = slot.emplace(key, paths.size()).first;
            paths.push_back({HedgeSpec(std::get<0>(key), std::get<1>(key)), std::get<2>(key), {}});
        }
        auto& obs = paths[it->second].observations;
        const Date d = detail::to_date(f[0], "hedge paths");
        if (!obs.empty() && !(obs.back().date < d))
            throw Error("io", "hedge paths: non-increasing date " + d.iso() + " within a path");
        obs.push_back({d, detail::to_double(f[4], "hedge paths"), detail::to_double(f[5], "hedge paths"), false});
    }
    return paths;
}

inline constexpr std::string_view kOhrSummaryHeader = "segment,side,utility,n,mean,std_dev,min,max,t_vs_mvhr";

/// Distribution of hedge ratios per path, with the Welch statistic for the
/// difference in mean against the MVHR path of the same segment and side.
inline void write_ohr_summary(std::ostream& out, const std::vector<HedgePath>& paths) {
    out << kOhrSummaryHeader << '\n';
    const auto betas_of = [](const HedgePath& p) {
        std::vector<double> b;
        for (const auto& o : p.observations) b.push_back(o.beta);
        return b;
    };
    for (const auto& p : paths) {
        const auto b = betas_of(p);
        if (b.empty()) continue;
        const auto [lo, hi] = std::minmax_element(b.begin(), b.end());
        std::string t;
        if (p.spec.utility != Utility::MinVariance && b.size() > 1) {
            for (const auto& q : paths) {
                if (q.spec.utility != Utility::MinVariance || q.spec.side != p.spec.side || q.segment != p.segment)
                    continue;
                const auto m = betas_of(q);
                try {
                    if (m.size() > 1) t = format_double(welch_t(b, m));
                } catch (const Error&) {
                    // identical constant samples: no statistic
                }
                break;
            }
        }
        out << to_string(p.segment) << ',' << to_string(p.spec.side) << ',' << to_string(p.spec.utility) << ','
            << b.size() << ',' << format_double(stats::mean(b)) << ','
            << (b.size() > 1 ? format_double(std::sqrt(stats::sample_variance(b))) : "") << ','
            << format_double(*lo) << ',' << format_double(*hi) << ',' << t << '\n';
    }
}

// ---------------------------------------------------------------- report

inline constexpr std::string_view kReportHeader =
    "asset,frequency,segment,side,strategy,n,mean,variance,var_1pct,he1,he2,units";

inline double mean_variance_scale(const PerformanceReport& r) { return r.raw_units ? 1.0 : 100.0; }

inline void write_report_csv(std::ostream& out, const PerformanceReport& report) {
    const double k = mean_variance_scale(report);
    out << kReportHeader << '\n';
    for (const auto& r : report.rows) {
        out << r.asset << ',' << to_string(r.frequency) << ',' << to_string(r.segment) << ',' << to_string(r.side)
            << ',' << to_string(r.strategy) << ',' << r.n << ',' << format_double(r.mean * k) << ','
            << format_double(r.variance * k) << ',' << (r.var_1pct ? format_double(*r.var_1pct * k) : "") << ','
            << format_double(r.he1) << ',' << (r.he2 ? format_double(*r.he2) : "") << ','
            << (report.raw_units ? "raw" : "x1e-2") << '\n';
    }
}

/// Fixed-width panels: strategies across, MEAN / VARIANCE / VaR 1% / HE1 /
/// HE2 down, one panel per (segment, side).
inline void write_report_text(std::ostream& out, const PerformanceReport& report) {
    const double k = mean_variance_scale(report);
    const char* labels[] = {"QUAD", "LOG", "EXP", "OLS", "NO HEDGE"};
    const auto cell = [](const std::string& s) {
        std::string c(12 > s.size() ? 12 - s.size() : 0, ' ');
        return c + s;
    };
    bool first = true;
    for (auto seg : {Segment::InSample, Segment::OutOfSample}) {
        for (auto side : kAllSides) {
            if (!report.find(seg, side, Strategy::NoHedge)) continue;
            if (!first) out << '\n';
            first = false;
            const auto* any = report.find(seg, side, Strategy::NoHedge);
            out << any->asset << " " << to_string(any->frequency) << " " << to_string(seg) << " " << to_string(side)
                << " hedgers (n = " << any->n << ")"
                << (report.raw_units ? "" : "   mean, variance x10^-2; VaR in percent") << '\n';
            out << std::string(12, ' ');
            for (const char* l : labels) out << cell(l);
            out << '\n';
            const auto line = [&](const char* name, auto value_of) {
                out << name << std::string(12 - std::string_view(name).size(), ' ');
                for (auto s : kReportStrategies) {
                    const auto* r = report.find(seg, side, s);
                    out << cell(r ? value_of(*r) : std::string("-"));
                }
                out << '\n';
            };
            line("MEAN", [&](const ReportRow& r) { return format_fixed(r.mean * k, 4); });
            line("VARIANCE", [&](const ReportRow& r) { return format_fixed(r.variance * k, 4); });
            line("VaR 1%", [&](const ReportRow& r) {
                return r.var_1pct ? format_fixed(*r.var_1pct * k, 2) : std::string("n/a");
            });
            line("HE1", [&](const ReportRow& r) { return format_fixed(r.he1, 2); });
            line("HE2", [&](const ReportRow& r) { return r.he2 ? format_fixed(*r.he2, 2) : std::string(""); });
        }
    }
}

}  // namespace uhedge::io
