#pragma once

// Seeded data generators: GARCH-family sample paths for recovery tests and
// the calibrated synthetic market behind the bundled fixtures.

#include "uhedge/date.hpp"
#include "uhedge/estimation.hpp"
#include "uhedge/market_data.hpp"
#include "uhedge/rng.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace uhedge::sim {

inline constexpr std::size_t kBurnIn = 500;

inline std::vector<double> normal_draws(std::size_t n, std::uint64_t seed, double mean = 0.0, double sd = 1.0) {
    Rng rng(seed);
    std::vector<double> x(n);
    for (double& v : x) v = rng.normal(mean, sd);
    return x;
}

inline std::vector<double> garch11(const Garch11Params& p, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out;
    out.reserve(n);
    double h = p.omega / (1.0 - p.alpha - p.beta);
    double e = 0.0;
    for (std::size_t t = 0; t < n + kBurnIn; ++t) {
        h = p.omega + p.alpha * e * e + p.beta * h;
        e = std::sqrt(h) * rng.normal();
        if (t >= kBurnIn) out.push_back(p.mu + e);
    }
    return out;
}

inline std::vector<double> garch_m(const GarchMParams& p, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out;
    out.reserve(n);
    double h = p.omega / (1.0 - p.alpha - p.beta);
    double e = 0.0;
    for (std::size_t t = 0; t < n + kBurnIn; ++t) {
        h = p.omega + p.alpha * e * e + p.beta * h;
        e = std::sqrt(h) * rng.normal();
        if (t >= kBurnIn) out.push_back(p.lambda * h + e);
    }
    return out;
}

struct Pair {
    std::vector<double> spot;
    std::vector<double> futures;
};

/// Bivariate draws from a diagonal VECH process with Gaussian innovations.
inline Pair dvech(const DvechParams& p, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Pair out;
    out.spot.reserve(n);
    out.futures.reserve(n);
    CovarianceState s{p.omega1 / (1.0 - p.alpha_s - p.beta_s), p.omega2 / (1.0 - p.alpha_f - p.beta_f),
                      p.omega3 / (1.0 - p.alpha_sf - p.beta_sf), false};
    s = repair_psd(s);
    double es = 0.0, ef = 0.0;
    for (std::size_t t = 0; t < n + kBurnIn; ++t) {
        s = dvech_step(p, s, es, ef);
        const double sd_s = std::sqrt(s.var_s);
        const double rho = s.cov_sf / (sd_s * std::sqrt(s.var_f));
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        es = sd_s * z1;
        ef = std::sqrt(s.var_f) * (rho * z1 + std::sqrt(1.0 - rho * rho) * z2);
        if (t >= kBurnIn) {
            out.spot.push_back(p.mu_s + es);
            out.futures.push_back(p.mu_f + ef);
        }
    }
    return out;
}

/// i.i.d. bivariate normal pair with the given moments.
inline Pair bivariate_normal(std::size_t n, std::uint64_t seed, double sd_s, double sd_f, double rho,
                             double mu_s = 0.0, double mu_f = 0.0) {
    Rng rng(seed);
    Pair out;
    out.spot.resize(n);
    out.futures.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        out.spot[t] = mu_s + sd_s * z1;
        out.futures[t] = mu_f + sd_f * (rho * z1 + std::sqrt(1.0 - rho * rho) * z2);
    }
    return out;
}

/// `count` consecutive weekdays starting on (or after) `first`.
inline std::vector<Date> business_days(Date first, std::size_t count) {
    std::vector<Date> out;
    out.reserve(count);
    Date d = first;
    while (out.size() < count) {
        if (d.iso_weekday() <= 5) out.push_back(d);
        d = d.plus_days(1);
    }
    return out;
}

/// Prices from log returns, starting at `p0` on dates[0].
inline PriceSeries prices_from_returns(const std::vector<Date>& dates, std::span<const double> log_returns, double p0) {
    std::vector<double> prices(dates.size());
    prices[0] = p0;
    double level = std::log(p0);
    for (std::size_t i = 1; i < dates.size(); ++i) {
        level += log_returns[i - 1];
        prices[i] = std::exp(level);
    }
    return PriceSeries(dates, std::move(prices));
}

/// Calibration of one synthetic energy contract at daily granularity.
struct MarketSpec {
    double weekly_sd_spot = 0.104;
    double weekly_sd_futures = 0.082;
    double correlation = 0.80;       ///< daily spot/futures innovation correlation
    double weekly_drift = 0.0015;
    double garch_alpha = 0.06;       ///< daily volatility clustering, shared by both legs
    double garch_beta = 0.92;
    double jump_probability = 0.01;  ///< daily probability of an upward spike
    double jump_scale = 2.5;         ///< spike size in daily standard deviations
    double student_dof = 6.0;
    double spot_price0 = 2.0;
    double futures_price0 = 2.05;
};

/// Energy-style calibrations. Weekly natural gas is the volatile,
/// positively skewed series; weekly oil is calmer and more tightly hedged.
inline MarketSpec natural_gas() { return {}; }

inline MarketSpec crude_oil() {
    MarketSpec m;
    m.weekly_sd_spot = 0.054;
    m.weekly_sd_futures = 0.049;
    m.correlation = 0.93;
    m.weekly_drift = 0.0018;
    m.jump_probability = 0.004;
    m.jump_scale = 1.5;
    m.spot_price0 = 18.0;
    m.futures_price0 = 18.2;
    return m;
}

/// Daily spot and futures price paths. Shocks are Student-t with a common
/// GARCH(1,1) volatility multiplier plus rare upward spikes on the spot leg
/// (half transmitted to futures), which gives the heavy tails and positive
/// skew typical of energy returns.
inline std::pair<PriceSeries, PriceSeries> energy_market(const MarketSpec& m, const std::vector<Date>& dates,
                                                         std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t n = dates.size() - 1;
    const double daily_sd_s = m.weekly_sd_spot / std::sqrt(5.0);
    const double daily_sd_f = m.weekly_sd_futures / std::sqrt(5.0);
    const double jump_var = m.jump_probability * m.jump_scale * m.jump_scale;
    const double diffusion_scale = 1.0 / std::sqrt(1.0 + jump_var);
    const double omega = 1.0 - m.garch_alpha - m.garch_beta;  // unit long-run variance multiplier
    double h = 1.0;
    double z_prev = 0.0;
    std::vector<double> rs(n), rf(n);
    for (std::size_t t = 0; t < n + kBurnIn; ++t) {
        h = omega + m.garch_alpha * z_prev * z_prev + m.garch_beta * h;
        const double sd = std::sqrt(h);
        const double z1 = rng.student_t_unit(m.student_dof);
        const double z2 = rng.student_t_unit(m.student_dof);
        const double zf = m.correlation * z1 + std::sqrt(1.0 - m.correlation * m.correlation) * z2;
        double jump = 0.0;
        if (rng.uniform() < m.jump_probability) jump = m.jump_scale * (0.5 + rng.uniform());
        z_prev = z1;
        if (t < kBurnIn) continue;
        const std::size_t i = t - kBurnIn;
        const double drift = m.weekly_drift / 5.0;
        rs[i] = drift + daily_sd_s * diffusion_scale * (sd * z1 + jump);
        rf[i] = drift + daily_sd_f * diffusion_scale * (sd * zf + 0.5 * jump);
    }
    return {prices_from_returns(dates, rs, m.spot_price0), prices_from_returns(dates, rf, m.futures_price0)};
}

/// Daily index levels whose weekly returns follow a GARCH-M process with
/// risk aversion `lambda`. Weekly shocks are spread evenly over five days so
/// five-day returns reproduce the weekly process exactly.
inline PriceSeries energy_index(const std::vector<Date>& dates, std::uint64_t seed, double lambda = 2.5,
                                double weekly_sd = 0.035) {
    const double alpha = 0.08;
    const double beta = 0.88;
    const GarchMParams p(lambda, weekly_sd * weekly_sd * (1.0 - alpha - beta), alpha, beta);
    const std::size_t days = dates.size() - 1;
    const auto weekly = garch_m(p, days / 5 + 1, seed);
    std::vector<double> daily(days);
    for (std::size_t i = 0; i < days; ++i) daily[i] = weekly[i / 5] / 5.0;
    return prices_from_returns(dates, daily, 250.0);
}

}  // namespace uhedge::sim
