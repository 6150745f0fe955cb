#pragma once

// Optimal futures hedge ratios under quadratic, log and exponential utility,
// and the minimum-variance ratio, for short and long hedgers.
//
// Short hedger (long the spot):  R_p = r_s - beta * r_f
// Long hedger  (short the spot): R_p = -r_s + beta * r_f

#include "uhedge/error.hpp"
#include "uhedge/estimation.hpp"
#include "uhedge/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace uhedge {

enum class Utility { Quadratic, Log, Exponential, MinVariance };
enum class Side { Short, Long };

inline constexpr std::array kAllUtilities{Utility::Quadratic, Utility::Log, Utility::Exponential,
                                          Utility::MinVariance};
inline constexpr std::array kAllSides{Side::Short, Side::Long};

inline std::string_view to_string(Utility u) {
    switch (u) {
        case Utility::Quadratic: return "quadratic";
        case Utility::Log: return "log";
        case Utility::Exponential: return "exponential";
        case Utility::MinVariance: return "mvhr";
    }
    return "?";
}

inline std::string_view to_string(Side s) { return s == Side::Short ? "short" : "long"; }

inline Utility utility_from_string(std::string_view s) {
    if (s == "quadratic" || s == "quad") return Utility::Quadratic;
    if (s == "log") return Utility::Log;
    if (s == "exponential" || s == "exp") return Utility::Exponential;
    if (s == "mvhr" || s == "minvariance" || s == "min_variance" || s == "ols") return Utility::MinVariance;
    throw Error("hedge_optimizer", "unknown utility '" + std::string(s) + "'");
}

inline Side side_from_string(std::string_view s) {
    if (s == "short") return Side::Short;
    if (s == "long") return Side::Long;
    throw Error("hedge_optimizer", "unknown hedger side '" + std::string(s) + "'");
}

/// Utility kind and hedger side. A fixed `lambda` overrides the estimated
/// risk-aversion path; it is ignored by Log (which fixes lambda = 1) and
/// MinVariance.
struct HedgeSpec {
    Utility utility = Utility::MinVariance;
    Side side = Side::Short;
    std::optional<double> lambda{};

    HedgeSpec() = default;
    HedgeSpec(Utility u, Side s, std::optional<double> fixed_lambda = std::nullopt)
        : utility(u), side(s), lambda(fixed_lambda) {
        if (lambda && (utility == Utility::Quadratic || utility == Utility::Exponential) &&
            !(std::isfinite(*lambda) && *lambda > 0.0))
            throw Error("hedge_optimizer", "risk aversion must be > 0 for quadratic and exponential utility");
    }

    friend bool operator==(const HedgeSpec&, const HedgeSpec&) = default;
};

inline double side_sign(Side s) { return s == Side::Short ? 1.0 : -1.0; }

inline double hedged_return(double beta, Side side, double r_s, double r_f) {
    const double short_return = r_s - beta * r_f;
    return side == Side::Short ? short_return : -short_return;
}

namespace detail {

inline void require_futures_variance(const CovarianceState& s) {
    if (!(s.var_f > 0.0)) throw Error("hedge_optimizer", "futures variance must be > 0");
}

}  // namespace detail

/// cov_sf / var_f, the same for both sides.
inline double mvhr(const CovarianceState& state) {
    detail::require_futures_variance(state);
    return state.cov_sf / state.var_f;
}

/// Maximizer of E[R_p] - lambda Var[R_p]: a speculative term
/// -+ E(r_f) / (2 lambda var_f) (minus for short hedgers) plus the MVHR.
inline double quadratic_ohr(double e_rf, double lambda, const CovarianceState& state, Side side) {
    detail::require_futures_variance(state);
    if (!(lambda > 0.0)) throw Error("hedge_optimizer", "risk aversion must be > 0");
    const double speculative = e_rf / (2.0 * lambda * state.var_f);
    const double hedging = state.cov_sf / state.var_f;
    return side == Side::Short ? hedging - speculative : hedging + speculative;
}

/// Quadratic OHR at unit relative risk aversion.
inline double log_ohr(double e_rf, const CovarianceState& state, Side side) {
    return quadratic_ohr(e_rf, 1.0, state, side);
}

struct PortfolioMoments {
    double mean = 0.0;
    double variance = 0.0;
    double std_cubed = 0.0;
    double std_fourth = 0.0;
    double skewness = 0.0;
    double kurtosis = 3.0;  ///< raw; 3 under normality
};

inline constexpr double kVarianceFloor = 1e-12;
inline constexpr std::size_t kMinMomentWindow = 30;

/// Mean and variance come from the conditional model; skewness and raw
/// kurtosis are the empirical shape of the window's hedged returns at `beta`.
/// A window whose hedged returns are constant has no shape and is treated as
/// normal (skewness 0, kurtosis 3).
inline PortfolioMoments portfolio_moments(double beta, Side side, std::span<const double> window_spot,
                                          std::span<const double> window_futures, const CovarianceState& state,
                                          double mu_s, double mu_f) {
    if (window_spot.size() != window_futures.size())
        throw Error("hedge_optimizer", "spot and futures windows differ in length");
    if (window_spot.size() < kMinMomentWindow)
        throw Error("hedge_optimizer", "moment window too short (" + std::to_string(window_spot.size()) + " < " +
                                           std::to_string(kMinMomentWindow) + ")");
    detail::require_futures_variance(state);

    PortfolioMoments m;
    m.mean = side_sign(side) * (mu_s - beta * mu_f);
    m.variance = std::max(state.var_s + beta * beta * state.var_f - 2.0 * beta * state.cov_sf, kVarianceFloor);
    const double sd = std::sqrt(m.variance);
    m.std_cubed = m.variance * sd;
    m.std_fourth = m.variance * m.variance;

    const std::size_t n = window_spot.size();
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += hedged_return(beta, side, window_spot[i], window_futures[i]);
    mean /= static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0, spot_m2 = 0.0;
    const double spot_mean = stats::mean(window_spot);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = hedged_return(beta, side, window_spot[i], window_futures[i]) - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        spot_m2 += (window_spot[i] - spot_mean) * (window_spot[i] - spot_mean);
    }
    if (m2 > 1e-14 * spot_m2 && m2 > 0.0) {
        const auto nn = static_cast<double>(n);
        m2 /= nn;
        m3 /= nn;
        m4 /= nn;
        m.skewness = m3 / (m2 * std::sqrt(m2));
        m.kurtosis = m4 / (m2 * m2);
    }
    return m;
}

/// Fourth-order expansion of expected exponential utility in certainty
/// equivalent form: mu - lambda s^2 / 2 + tau lambda^2 s^3 / 6 - (kappa - 3) lambda^3 s^4 / 24.
inline double exp_objective(const PortfolioMoments& m, double lambda) {
    if (!(lambda > 0.0)) throw Error("hedge_optimizer", "risk aversion must be > 0");
    const double l2 = lambda * lambda;
    return m.mean - 0.5 * lambda * m.variance + (m.skewness / 6.0) * l2 * m.std_cubed -
           ((m.kurtosis - 3.0) / 24.0) * l2 * lambda * m.std_fourth;
}

inline constexpr double kBetaLower = -2.0;
inline constexpr double kBetaUpper = 3.5;
inline constexpr std::size_t kCoarseGridPoints = 56;

struct ExponentialHedge {
    double beta = 0.0;
    bool at_boundary = false;  ///< optimum sits on the edge of the search bracket
};

/// Argmax of the exponential-utility objective over [-2, 3.5]: a 56-point
/// grid picks the bracketing cell pair, golden-section search refines to 1e-6.
inline ExponentialHedge exponential_ohr(double lambda, Side side, std::span<const double> window_spot,
                                        std::span<const double> window_futures, const CovarianceState& state,
                                        double mu_s, double mu_f) {
    if (!(lambda > 0.0)) throw Error("hedge_optimizer", "risk aversion must be > 0");
    // validates the window once; the search below reuses it
    (void)portfolio_moments(0.0, side, window_spot, window_futures, state, mu_s, mu_f);

    const auto value = [&](double beta) {
        const double v =
            exp_objective(portfolio_moments(beta, side, window_spot, window_futures, state, mu_s, mu_f), lambda);
        return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
    };
    const double spacing = (kBetaUpper - kBetaLower) / static_cast<double>(kCoarseGridPoints - 1);
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kCoarseGridPoints; ++i) {
        const double v = value(kBetaLower + spacing * static_cast<double>(i));
        if (v > best_value) {
            best_value = v;
            best = i;
        }
    }
    if (!std::isfinite(best_value))
        throw Error("hedge_optimizer", "exponential objective is not finite anywhere on the search bracket");

    const double lo = kBetaLower + spacing * static_cast<double>(best == 0 ? 0 : best - 1);
    const double hi = kBetaLower + spacing * static_cast<double>(std::min(best + 1, kCoarseGridPoints - 1));
    double beta = golden_section_maximize(value, lo, hi, 1e-6);
    const double grid_beta = kBetaLower + spacing * static_cast<double>(best);
    if (value(grid_beta) > value(beta)) beta = grid_beta;
    const bool at_boundary = beta - kBetaLower < 1e-5 || kBetaUpper - beta < 1e-5;
    return {beta, at_boundary};
}

}  // namespace uhedge
