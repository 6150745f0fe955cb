#pragma once

// Time-varying relative risk aversion from rolling GARCH-M fits on an index,
// AR(1) forecasters for it, and the Welch mean-comparison statistic.

#include "uhedge/estimation.hpp"
#include "uhedge/market_data.hpp"
#include "uhedge/parallel.hpp"
#include "uhedge/stats.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace uhedge {

/// Risk-aversion coefficients dated at the end of their estimation window.
class CrraPath {
public:
    CrraPath() = default;
    CrraPath(Frequency freq, std::vector<Date> dates, std::vector<double> lambdas)
        : freq_(freq), dates_(std::move(dates)), lambdas_(std::move(lambdas)) {
        if (dates_.size() != lambdas_.size()) throw Error("risk_aversion", "date and lambda columns differ in length");
        for (std::size_t i = 0; i < lambdas_.size(); ++i) {
            if (!std::isfinite(lambdas_[i])) throw Error("risk_aversion", "non-finite lambda at " + dates_[i].iso());
            if (i > 0 && !(dates_[i - 1] < dates_[i]))
                throw Error("risk_aversion", "non-increasing date " + dates_[i].iso());
        }
    }

    [[nodiscard]] Frequency frequency() const { return freq_; }
    [[nodiscard]] std::size_t size() const { return lambdas_.size(); }
    [[nodiscard]] std::span<const Date> dates() const { return dates_; }
    [[nodiscard]] std::span<const double> lambdas() const { return lambdas_; }

private:
    Frequency freq_ = Frequency::FiveDay;
    std::vector<Date> dates_;
    std::vector<double> lambdas_;
};

/// Optimizer seed for the window ending on `end`, derived from a base seed.
/// Keyed by date so that truncating data never changes an earlier window's fit.
inline std::uint64_t window_seed(std::uint64_t base, Date end, std::uint64_t salt) {
    const auto mix = [](std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    };
    return mix(base ^ mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(end.serial())) * 4 + salt));
}

inline constexpr std::uint64_t kGarchMSeedSalt = 2;

struct CrraOptions {
    std::size_t step = 1;
    FitOptions fit{};  ///< optimizer.seed is the base for per-window seeds
    unsigned threads = 0;
};

/// Lambda from one GARCH-M fit on observations [end + 1 - window, end].
inline double crra_at(std::span<const double> index, std::size_t end, std::size_t window, const FitOptions& fit = {}) {
    return fit_garch_m(index.subspan(end + 1 - window, window), fit).lambda;
}

inline CrraPath rolling_crra(const ReturnSeries& index, std::size_t window_length, const CrraOptions& opt = {}) {
    if (window_length < opt.fit.min_observations)
        throw Error("risk_aversion", "window of " + std::to_string(window_length) + " is below the minimum of " +
                                         std::to_string(opt.fit.min_observations));
    if (window_length > index.size())
        throw Error("risk_aversion", "window longer than data (" + std::to_string(window_length) + " > " +
                                         std::to_string(index.size()) + ")");
    if (opt.step == 0) throw Error("risk_aversion", "step must be positive");
    const std::size_t count = (index.size() - window_length) / opt.step + 1;
    std::vector<Date> dates(count);
    std::vector<double> lambdas(count);
    parallel_for(
        count,
        [&](std::size_t k) {
            const std::size_t end = window_length - 1 + k * opt.step;
            dates[k] = index.dates()[end];
            FitOptions fit = opt.fit;
            fit.optimizer.seed = window_seed(opt.fit.optimizer.seed, dates[k], kGarchMSeedSalt);
            lambdas[k] = crra_at(index.values(), end, window_length, fit);
        },
        opt.threads);
    return CrraPath(index.frequency(), std::move(dates), std::move(lambdas));
}

inline CrraPath rolling_crra(const ReturnSeries& index, std::size_t window_length, std::size_t step) {
    CrraOptions opt;
    opt.step = step;
    return rolling_crra(index, window_length, opt);
}

/// x_t = intercept + phi * x_{t-1} + e_t.
struct Ar1Params {
    double intercept = 0.0;
    double phi = 0.0;
    double innovation_std = 0.0;

    [[nodiscard]] bool stationary() const { return std::abs(phi) < 1.0; }
};

/// Least-squares AR(1) fit. innovation_std uses n_eff - 2 degrees of freedom.
inline Ar1Params fit_ar1(std::span<const double> x) {
    if (x.size() < 10) throw Error("risk_aversion", "AR(1) needs at least 10 observations");
    const std::size_t n = x.size() - 1;
    double mx = 0.0, my = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        mx += x[t];
        my += x[t + 1];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        sxx += (x[t] - mx) * (x[t] - mx);
        sxy += (x[t] - mx) * (x[t + 1] - my);
    }
    if (!(sxx > 0.0)) throw Error("risk_aversion", "degenerate AR(1) regression: constant series");
    Ar1Params p;
    p.phi = sxy / sxx;
    p.intercept = my - p.phi * mx;
    double rss = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double e = x[t + 1] - p.intercept - p.phi * x[t];
        rss += e * e;
    }
    p.innovation_std = std::sqrt(rss / static_cast<double>(n - 2));
    return p;
}

inline double ar1_forecast(const Ar1Params& p, double last_value) { return p.intercept + p.phi * last_value; }

/// Welch two-sample t statistic, (mean_a - mean_b) / sqrt(var_a/n_a + var_b/n_b).
inline double welch_t(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw Error("risk_aversion", "welch_t needs at least 2 observations per sample");
    const double va = stats::sample_variance(a);
    const double vb = stats::sample_variance(b);
    if (!(std::isfinite(va) && std::isfinite(vb))) throw Error("risk_aversion", "welch_t on non-finite sample");
    const double diff = stats::mean(a) - stats::mean(b);
    const double se2 = va / static_cast<double>(a.size()) + vb / static_cast<double>(b.size());
    if (se2 == 0.0) {
        if (diff == 0.0) throw Error("risk_aversion", "welch_t undefined: both samples constant and equal");
        return std::copysign(std::numeric_limits<double>::infinity(), diff);
    }
    return diff / std::sqrt(se2);
}

}  // namespace uhedge
