#pragma once

// Hedging effectiveness: variance reduction (HE1), empirical 1% VaR and VaR
// reduction (HE2), per strategy, side and sample segment.

#include "uhedge/backtest.hpp"
#include "uhedge/error.hpp"
#include "uhedge/hedge.hpp"
#include "uhedge/market_data.hpp"
#include "uhedge/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace uhedge {

/// Empirical alpha-quantile, linear interpolation between ascending order
/// statistics at rank h = (n - 1) alpha + 1. Losses come out negative.
inline double empirical_var(std::span<const double> returns, double alpha = 0.01) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("performance", "VaR level must lie in (0, 1)");
    const auto min_n = static_cast<std::size_t>(std::ceil(1.0 / alpha - 1e-9));
    if (returns.size() < min_n)
        throw Error("performance", "sample too short for VaR: " + std::to_string(returns.size()) + " < " +
                                       std::to_string(min_n));
    std::vector<double> sorted(returns.begin(), returns.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = static_cast<double>(sorted.size() - 1) * alpha + 1.0;
    const auto lo = static_cast<std::size_t>(std::floor(h));  // 1-based
    const double frac = h - static_cast<double>(lo);
    if (lo >= sorted.size()) return sorted.back();
    return sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]);
}

/// HE1 in percent: 100 (1 - hedged / unhedged).
inline double he_variance(double hedged_variance, double unhedged_variance) {
    if (!(unhedged_variance > 0.0)) throw Error("performance", "unhedged variance must be > 0");
    return 100.0 * (1.0 - hedged_variance / unhedged_variance);
}

/// HE2 in percent from signed loss quantiles: 100 (1 - |hedged| / |unhedged|).
inline double he_var(double hedged_var1pct, double unhedged_var1pct) {
    if (!(unhedged_var1pct < 0.0)) throw Error("performance", "unhedged VaR has no loss tail (quantile >= 0)");
    if (!(hedged_var1pct < 0.0)) throw Error("performance", "hedged VaR has no loss tail (quantile >= 0)");
    return 100.0 * (1.0 - std::abs(hedged_var1pct) / std::abs(unhedged_var1pct));
}

enum class Strategy { Quadratic, Log, Exponential, MVHR, NoHedge };

inline constexpr std::array kReportStrategies{Strategy::Quadratic, Strategy::Log, Strategy::Exponential,
                                              Strategy::MVHR, Strategy::NoHedge};

inline std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Quadratic: return "quadratic";
        case Strategy::Log: return "log";
        case Strategy::Exponential: return "exponential";
        case Strategy::MVHR: return "mvhr";
        case Strategy::NoHedge: return "no_hedge";
    }
    return "?";
}

inline Strategy strategy_from_string(std::string_view s) {
    if (s == "no_hedge") return Strategy::NoHedge;
    switch (utility_from_string(s)) {
        case Utility::Quadratic: return Strategy::Quadratic;
        case Utility::Log: return Strategy::Log;
        case Utility::Exponential: return Strategy::Exponential;
        case Utility::MinVariance: return Strategy::MVHR;
    }
    return Strategy::NoHedge;
}

inline Strategy strategy_of(Utility u) {
    switch (u) {
        case Utility::Quadratic: return Strategy::Quadratic;
        case Utility::Log: return Strategy::Log;
        case Utility::Exponential: return Strategy::Exponential;
        case Utility::MinVariance: return Strategy::MVHR;
    }
    return Strategy::NoHedge;
}

inline constexpr std::size_t kMinVarObservations = 100;

/// Statistics of one strategy's realized returns. Values are raw (unscaled);
/// var_1pct and he2 are absent when the segment is too short for a stable
/// 1% quantile or when there is no loss tail to compare against.
struct ReportRow {
    std::string asset;
    Frequency frequency = Frequency::FiveDay;
    Segment segment = Segment::InSample;
    Side side = Side::Short;
    Strategy strategy = Strategy::NoHedge;
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;
    std::optional<double> var_1pct;
    double he1 = 0.0;
    std::optional<double> he2;
};

struct PerformanceReport {
    std::vector<ReportRow> rows;
    bool raw_units = false;  ///< otherwise mean and variance are shown x100 (units of 10^-2), VaR in percent

    [[nodiscard]] const ReportRow* find(Segment seg, Side side, Strategy strategy) const {
        for (const auto& r : rows)
            if (r.segment == seg && r.side == side && r.strategy == strategy) return &r;
        return nullptr;
    }
};

struct ReportLabels {
    std::string asset = "asset";
    bool raw_units = false;
};

namespace detail {

inline ReportRow score(std::span<const double> returns) {
    ReportRow row;
    row.n = returns.size();
    row.mean = stats::mean(returns);
    row.variance = returns.size() > 1 ? stats::sample_variance(returns) : 0.0;
    if (returns.size() >= kMinVarObservations) row.var_1pct = empirical_var(returns, 0.01);
    return row;
}

}  // namespace detail

/// One row per (segment, side, strategy) present in `paths`, plus the
/// side-matched unhedged benchmark (+r_s for short hedgers, -r_s for long)
/// over the same dates. HE1 and HE2 are measured against that benchmark.
inline PerformanceReport build_report(const std::vector<HedgePath>& paths, const ReturnSeries& spot,
                                      const ReportLabels& labels = {}) {
    PerformanceReport report;
    report.raw_units = labels.raw_units;
    const auto sdates = spot.dates();
    const auto spot_at = [&](Date d) {
        const auto it = std::lower_bound(sdates.begin(), sdates.end(), d);
        if (it == sdates.end() || *it != d) throw Error("performance", "path date " + d.iso() + " not in spot series");
        return spot[static_cast<std::size_t>(it - sdates.begin())];
    };

    for (auto seg : {Segment::InSample, Segment::OutOfSample}) {
        for (auto side : kAllSides) {
            std::vector<const HedgePath*> group;
            for (const auto& p : paths)
                if (p.segment == seg && p.spec.side == side) group.push_back(&p);
            if (group.empty()) continue;

            const auto& reference = group.front()->observations;
            if (reference.empty()) throw Error("performance", "empty hedge path");
            std::vector<double> unhedged;
            unhedged.reserve(reference.size());
            for (const auto& o : reference) unhedged.push_back(side_sign(side) * spot_at(o.date));
            ReportRow bench = detail::score(unhedged);

            std::vector<ReportRow> rows;
            for (auto strategy : kReportStrategies) {
                if (strategy == Strategy::NoHedge) continue;
                for (const auto* p : group) {
                    if (strategy_of(p->spec.utility) != strategy) continue;
                    if (p->observations.size() != reference.size())
                        throw Error("performance", "paths of one segment and side cover different dates");
                    std::vector<double> r;
                    r.reserve(p->observations.size());
                    for (std::size_t i = 0; i < p->observations.size(); ++i) {
                        if (p->observations[i].date != reference[i].date)
                            throw Error("performance", "paths of one segment and side cover different dates");
                        spot_at(p->observations[i].date);
                        r.push_back(p->observations[i].portfolio_return);
                    }
                    ReportRow row = detail::score(r);
                    row.strategy = strategy;
                    rows.push_back(row);
                    break;
                }
            }
            bench.strategy = Strategy::NoHedge;
            rows.push_back(bench);

            for (auto& row : rows) {
                row.asset = labels.asset;
                row.frequency = spot.frequency();
                row.segment = seg;
                row.side = side;
                row.he1 = row.strategy == Strategy::NoHedge ? 0.0 : he_variance(row.variance, bench.variance);
                if (row.var_1pct && bench.var_1pct && *row.var_1pct < 0.0 && *bench.var_1pct < 0.0)
                    row.he2 = row.strategy == Strategy::NoHedge ? 0.0 : he_var(*row.var_1pct, *bench.var_1pct);
                report.rows.push_back(row);
            }
        }
    }
    return report;
}

}  // namespace uhedge
