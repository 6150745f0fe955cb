#pragma once

// Gaussian (quasi) maximum likelihood for GARCH(1,1), GARCH-in-mean and the
// bivariate diagonal VECH GARCH(1,1), together with the variance filters
// they are built on.
//
// Conventions shared by every model in this file:
//   * the pre-sample variance (or covariance matrix) is the 1/n sample moment
//     of the estimation window and the pre-sample residual is zero, so the
//     first in-window variance is omega + beta * sample_moment;
//   * estimation runs over unconstrained coordinates: log for the variance
//     intercepts, a logistic map of the persistence alpha + beta onto
//     (0, 0.9999) and a logistic split of that persistence into alpha and beta.

#include "uhedge/error.hpp"
#include "uhedge/market_data.hpp"
#include "uhedge/optimize.hpp"
#include "uhedge/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace uhedge {

inline constexpr double kMaxPersistence = 0.9999;
inline constexpr double kRepairCorrelation = 0.999;

namespace detail {

inline void check_garch_terms(const char* what, double omega, double alpha, double beta) {
    if (!(std::isfinite(omega) && omega > 0.0)) throw Error("estimation", std::string(what) + ": omega must be > 0");
    if (!(std::isfinite(alpha) && alpha >= 0.0)) throw Error("estimation", std::string(what) + ": alpha must be >= 0");
    if (!(std::isfinite(beta) && beta >= 0.0)) throw Error("estimation", std::string(what) + ": beta must be >= 0");
    if (alpha + beta > kMaxPersistence + 1e-12)
        throw Error("estimation", std::string(what) + ": alpha + beta exceeds " + std::to_string(kMaxPersistence));
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace detail

/// Univariate GARCH(1,1) with a constant mean.
struct Garch11Params {
    double mu = 0.0;
    double omega = 0.0;
    double alpha = 0.0;
    double beta = 0.0;

    Garch11Params() = default;
    Garch11Params(double mu_, double omega_, double alpha_, double beta_)
        : mu(mu_), omega(omega_), alpha(alpha_), beta(beta_) {
        if (!std::isfinite(mu)) throw Error("estimation", "garch11: mu must be finite");
        detail::check_garch_terms("garch11", omega, alpha, beta);
    }
};

/// GARCH-in-mean: r_t = lambda * h_t + e_t, no intercept in the mean.
struct GarchMParams {
    double lambda = 0.0;
    double omega = 0.0;
    double alpha = 0.0;
    double beta = 0.0;

    GarchMParams() = default;
    GarchMParams(double lambda_, double omega_, double alpha_, double beta_)
        : lambda(lambda_), omega(omega_), alpha(alpha_), beta(beta_) {
        if (!std::isfinite(lambda)) throw Error("estimation", "garch_m: lambda must be finite");
        detail::check_garch_terms("garch_m", omega, alpha, beta);
    }
};

/// Diagonal VECH GARCH(1,1) for a (spot, futures) pair: constant means plus
/// nine variance-covariance parameters.
struct DvechParams {
    double mu_s = 0.0, mu_f = 0.0;
    double omega1 = 0.0, omega2 = 0.0, omega3 = 0.0;
    double alpha_s = 0.0, alpha_f = 0.0, alpha_sf = 0.0;
    double beta_s = 0.0, beta_f = 0.0, beta_sf = 0.0;

    DvechParams() = default;
    DvechParams(double mu_s_, double mu_f_, double omega1_, double omega2_, double omega3_, double alpha_s_,
                double alpha_f_, double alpha_sf_, double beta_s_, double beta_f_, double beta_sf_)
        : mu_s(mu_s_), mu_f(mu_f_), omega1(omega1_), omega2(omega2_), omega3(omega3_), alpha_s(alpha_s_),
          alpha_f(alpha_f_), alpha_sf(alpha_sf_), beta_s(beta_s_), beta_f(beta_f_), beta_sf(beta_sf_) {
        for (double v : {mu_s, mu_f, omega3, alpha_sf, beta_sf})
            if (!std::isfinite(v)) throw Error("estimation", "dvech: parameters must be finite");
        detail::check_garch_terms("dvech spot", omega1, alpha_s, beta_s);
        detail::check_garch_terms("dvech futures", omega2, alpha_f, beta_f);
    }
};

/// Conditional (var_s, var_f, cov_sf) for one period.
struct CovarianceState {
    double var_s = 0.0;
    double var_f = 0.0;
    double cov_sf = 0.0;
    bool repaired = false;

    [[nodiscard]] double determinant() const { return var_s * var_f - cov_sf * cov_sf; }
    [[nodiscard]] double correlation() const { return cov_sf / std::sqrt(var_s * var_f); }
};

struct FitOptions {
    std::size_t min_observations = 250;
    MaximizeOptions optimizer{};
};

// --------------------------------------------------------------------------
// Univariate filters and likelihoods
// --------------------------------------------------------------------------

/// Conditional variances h_t of a GARCH(1,1) driven by `residuals`.
inline std::vector<double> garch_variances(double omega, double alpha, double beta,
                                           std::span<const double> residuals, double presample_variance) {
    std::vector<double> h(residuals.size());
    double h_prev = presample_variance;
    double e_prev = 0.0;
    for (std::size_t t = 0; t < residuals.size(); ++t) {
        h[t] = omega + alpha * e_prev * e_prev + beta * h_prev;
        h_prev = h[t];
        e_prev = residuals[t];
    }
    return h;
}

inline double presample_variance(std::span<const double> x) { return stats::covariance_n(x, x); }

inline std::vector<double> garch11_variances(const Garch11Params& p, std::span<const double> returns) {
    std::vector<double> e(returns.begin(), returns.end());
    for (double& v : e) v -= p.mu;
    return garch_variances(p.omega, p.alpha, p.beta, e, presample_variance(returns));
}

inline double garch11_loglik(const Garch11Params& p, std::span<const double> r) {
    constexpr double log2pi = 1.8378770664093453;
    double h = presample_variance(r);
    double e_prev = 0.0;
    double ll = 0.0;
    for (double x : r) {
        h = p.omega + p.alpha * e_prev * e_prev + p.beta * h;
        const double e = x - p.mu;
        ll -= 0.5 * (log2pi + std::log(h) + e * e / h);
        e_prev = e;
    }
    return ll;
}

/// Conditional variances of a GARCH-M model; residuals are r_t - lambda h_t.
inline std::vector<double> garch_m_variances(const GarchMParams& p, std::span<const double> r) {
    std::vector<double> out(r.size());
    double h = presample_variance(r);
    double e_prev = 0.0;
    for (std::size_t t = 0; t < r.size(); ++t) {
        h = p.omega + p.alpha * e_prev * e_prev + p.beta * h;
        out[t] = h;
        e_prev = r[t] - p.lambda * h;
    }
    return out;
}

inline double garch_m_loglik(const GarchMParams& p, std::span<const double> r) {
    constexpr double log2pi = 1.8378770664093453;
    double h = presample_variance(r);
    double e_prev = 0.0;
    double ll = 0.0;
    for (double x : r) {
        h = p.omega + p.alpha * e_prev * e_prev + p.beta * h;
        const double e = x - p.lambda * h;
        ll -= 0.5 * (log2pi + std::log(h) + e * e / h);
        e_prev = e;
    }
    return ll;
}

namespace detail {

struct GarchTerms {
    double omega, alpha, beta;
};

inline GarchTerms garch_from_coords(double log_omega, double persistence_coord, double share_coord) {
    const double persistence = kMaxPersistence * logistic(persistence_coord);
    const double alpha = persistence * logistic(share_coord);
    return {std::exp(log_omega), alpha, persistence - alpha};
}

inline std::array<double, 3> garch_to_coords(double omega, double alpha, double beta) {
    const double persistence = alpha + beta;
    return {std::log(omega), logit(persistence / kMaxPersistence), logit(alpha / persistence)};
}

inline constexpr double kStartAlpha = 0.05;
inline constexpr double kStartBeta = 0.85;

inline void require_length(std::size_t n, const FitOptions& opt) {
    if (n < opt.min_observations)
        throw Error("estimation", "insufficient data: " + std::to_string(n) + " observations, need " +
                                      std::to_string(opt.min_observations));
}

}  // namespace detail

/// Documented starting point of fit_garch11: sample mean, alpha 0.05,
/// beta 0.85, omega by variance targeting.
inline Garch11Params garch11_start(std::span<const double> r) {
    const double var = presample_variance(r);
    return {stats::mean(r), var * (1.0 - detail::kStartAlpha - detail::kStartBeta), detail::kStartAlpha,
            detail::kStartBeta};
}

inline Garch11Params fit_garch11(std::span<const double> r, const FitOptions& opt = {}) {
    detail::require_length(r.size(), opt);
    const Garch11Params start = garch11_start(r);
    if (!(start.omega > 0.0)) throw Error("estimation", "zero-variance input");
    const double scale = std::sqrt(presample_variance(r));
    const auto g = detail::garch_to_coords(start.omega, start.alpha, start.beta);
    const auto decode = [&](std::span<const double> x) {
        const auto t = detail::garch_from_coords(x[1], x[2], x[3]);
        return Garch11Params{start.mu + scale * x[0], t.omega, t.alpha, t.beta};
    };
    const auto objective = [&](std::span<const double> x) {
        const auto t = detail::garch_from_coords(x[1], x[2], x[3]);
        if (!(t.omega > 0.0 && std::isfinite(t.omega))) return -std::numeric_limits<double>::infinity();
        Garch11Params p;
        p.mu = start.mu + scale * x[0];
        p.omega = t.omega;
        p.alpha = t.alpha;
        p.beta = t.beta;
        return garch11_loglik(p, r);
    };
    const auto best = maximize(objective, {0.0, g[0], g[1], g[2]}, opt.optimizer);
    return decode(best.argmax);
}

inline Garch11Params fit_garch11(const ReturnSeries& r, const FitOptions& opt = {}) {
    return fit_garch11(r.values(), opt);
}

/// Documented starting point of fit_garch_m: lambda 2, alpha 0.05, beta 0.85,
/// omega by variance targeting.
inline GarchMParams garch_m_start(std::span<const double> r) {
    const double var = presample_variance(r);
    return {2.0, var * (1.0 - detail::kStartAlpha - detail::kStartBeta), detail::kStartAlpha, detail::kStartBeta};
}

inline GarchMParams fit_garch_m(std::span<const double> r, const FitOptions& opt = {}) {
    detail::require_length(r.size(), opt);
    const GarchMParams start = garch_m_start(r);
    if (!(start.omega > 0.0)) throw Error("estimation", "zero-variance input");
    const auto g = detail::garch_to_coords(start.omega, start.alpha, start.beta);
    const auto decode = [](std::span<const double> x) {
        const auto t = detail::garch_from_coords(x[1], x[2], x[3]);
        GarchMParams p;
        p.lambda = x[0];
        p.omega = t.omega;
        p.alpha = t.alpha;
        p.beta = t.beta;
        return p;
    };
    const auto objective = [&](std::span<const double> x) {
        const auto p = decode(x);
        if (!(p.omega > 0.0 && std::isfinite(p.omega))) return -std::numeric_limits<double>::infinity();
        return garch_m_loglik(p, r);
    };
    const auto best = maximize(objective, {start.lambda, g[0], g[1], g[2]}, opt.optimizer);
    const auto p = decode(best.argmax);
    return {p.lambda, p.omega, p.alpha, p.beta};
}

inline GarchMParams fit_garch_m(const ReturnSeries& r, const FitOptions& opt = {}) {
    return fit_garch_m(r.values(), opt);
}

// --------------------------------------------------------------------------
// Diagonal VECH
// --------------------------------------------------------------------------

/// Clamps the covariance so the implied correlation is +-0.999 whenever the
/// state is not positive semidefinite.
inline CovarianceState repair_psd(CovarianceState s) {
    if (s.determinant() < 0.0) {
        const double bound = kRepairCorrelation * std::sqrt(std::max(s.var_s, 0.0) * std::max(s.var_f, 0.0));
        s.cov_sf = std::copysign(bound, s.cov_sf);
        s.repaired = true;
    }
    return s;
}

/// One application of the three diagonal recursions, followed by PSD repair.
inline CovarianceState dvech_step(const DvechParams& p, const CovarianceState& prev, double eps_s, double eps_f) {
    CovarianceState next;
    next.var_s = p.omega1 + p.alpha_s * eps_s * eps_s + p.beta_s * prev.var_s;
    next.var_f = p.omega2 + p.alpha_f * eps_f * eps_f + p.beta_f * prev.var_f;
    next.cov_sf = p.omega3 + p.alpha_sf * eps_s * eps_f + p.beta_sf * prev.cov_sf;
    return repair_psd(next);
}

/// Sample (1/n) covariance matrix of the window, used as the pre-sample state.
inline CovarianceState presample_state(std::span<const double> spot, std::span<const double> futures) {
    return {stats::covariance_n(spot, spot), stats::covariance_n(futures, futures),
            stats::covariance_n(spot, futures), false};
}

namespace detail {

inline void check_pair(std::span<const double> spot, std::span<const double> futures) {
    if (spot.size() != futures.size())
        throw Error("estimation", "spot and futures series differ in length (" + std::to_string(spot.size()) +
                                      " vs " + std::to_string(futures.size()) + ")");
}

inline void check_pair(const ReturnSeries& spot, const ReturnSeries& futures) {
    check_pair(spot.values(), futures.values());
    for (std::size_t i = 0; i < spot.size(); ++i)
        if (spot.dates()[i] != futures.dates()[i])
            throw Error("estimation", "spot and futures dates are misaligned at " + spot.dates()[i].iso());
}

}  // namespace detail

/// Conditional covariance states for every observation. State t is the
/// covariance for period t given information through t-1.
inline std::vector<CovarianceState> dvech_filter(const DvechParams& p, std::span<const double> spot,
                                                 std::span<const double> futures) {
    detail::check_pair(spot, futures);
    std::vector<CovarianceState> states;
    states.reserve(spot.size());
    if (spot.empty()) return states;
    CovarianceState prev = presample_state(spot, futures);
    double es = 0.0, ef = 0.0;
    for (std::size_t t = 0; t < spot.size(); ++t) {
        prev = dvech_step(p, prev, es, ef);
        states.push_back(prev);
        es = spot[t] - p.mu_s;
        ef = futures[t] - p.mu_f;
    }
    return states;
}

inline std::vector<CovarianceState> dvech_filter(const DvechParams& p, const ReturnSeries& spot,
                                                 const ReturnSeries& futures) {
    detail::check_pair(spot, futures);
    return dvech_filter(p, spot.values(), futures.values());
}

/// One-step-ahead covariance from the time-t state and time-t residuals.
inline CovarianceState dvech_forecast(const DvechParams& p, const CovarianceState& last_state,
                                      std::pair<double, double> last_residuals) {
    if (!(std::isfinite(last_state.var_s) && std::isfinite(last_state.var_f) && std::isfinite(last_state.cov_sf) &&
          std::isfinite(last_residuals.first) && std::isfinite(last_residuals.second)))
        throw Error("estimation", "non-finite input to dvech_forecast");
    return dvech_step(p, last_state, last_residuals.first, last_residuals.second);
}

inline double dvech_loglik(const DvechParams& p, std::span<const double> spot, std::span<const double> futures) {
    constexpr double log2pi = 1.8378770664093453;
    CovarianceState s = presample_state(spot, futures);
    double es = 0.0, ef = 0.0;
    double ll = 0.0;
    for (std::size_t t = 0; t < spot.size(); ++t) {
        s = dvech_step(p, s, es, ef);
        const double det = s.determinant();
        if (!(det > 0.0)) return -std::numeric_limits<double>::infinity();
        es = spot[t] - p.mu_s;
        ef = futures[t] - p.mu_f;
        const double quad = (s.var_f * es * es - 2.0 * s.cov_sf * es * ef + s.var_s * ef * ef) / det;
        ll -= 0.5 * (2.0 * log2pi + std::log(det) + quad);
    }
    return ll;
}

namespace detail {

inline constexpr double kStartCrossRatio = 0.95;

/// Maps 11 unconstrained coordinates to DVECH parameters. The cross terms are
/// bounded by the geometric mean of the matching own terms, which keeps every
/// fitted parameter matrix positive semidefinite.
struct DvechCoords {
    double mean_s, mean_f, scale_s, scale_f;

    [[nodiscard]] DvechParams decode(std::span<const double> x) const {
        DvechParams p;
        p.mu_s = mean_s + scale_s * x[0];
        p.mu_f = mean_f + scale_f * x[1];
        p.omega1 = std::exp(x[2]);
        p.omega2 = std::exp(x[3]);
        p.omega3 = std::sqrt(p.omega1 * p.omega2) * std::tanh(x[4]);
        const auto s = garch_from_coords(x[2], x[5], x[6]);
        const auto f = garch_from_coords(x[3], x[7], x[8]);
        p.alpha_s = s.alpha;
        p.beta_s = s.beta;
        p.alpha_f = f.alpha;
        p.beta_f = f.beta;
        p.alpha_sf = std::sqrt(p.alpha_s * p.alpha_f) * std::tanh(x[9]);
        p.beta_sf = std::sqrt(p.beta_s * p.beta_f) * std::tanh(x[10]);
        return p;
    }
};

}  // namespace detail

/// Documented starting point of fit_dvech: sample means, alpha 0.05 and beta
/// 0.85 on the own terms, cross terms at 0.95 (signed by the sample
/// correlation) of their bounds, intercepts by covariance targeting.
inline DvechParams dvech_start(std::span<const double> spot, std::span<const double> futures) {
    const auto s0 = presample_state(spot, futures);
    const double sign = s0.cov_sf < 0.0 ? -1.0 : 1.0;
    const double a = detail::kStartAlpha;
    const double b = detail::kStartBeta;
    const double a_sf = sign * detail::kStartCrossRatio * a;
    const double b_sf = sign * detail::kStartCrossRatio * b;
    const double omega1 = s0.var_s * (1.0 - a - b);
    const double omega2 = s0.var_f * (1.0 - a - b);
    const double bound = std::sqrt(omega1 * omega2);
    const double omega3 = std::clamp(s0.cov_sf * (1.0 - a_sf - b_sf), -detail::kStartCrossRatio * bound,
                                     detail::kStartCrossRatio * bound);
    DvechParams p;
    p.mu_s = stats::mean(spot);
    p.mu_f = stats::mean(futures);
    p.omega1 = omega1;
    p.omega2 = omega2;
    p.omega3 = omega3;
    p.alpha_s = p.alpha_f = a;
    p.beta_s = p.beta_f = b;
    p.alpha_sf = a_sf;
    p.beta_sf = b_sf;
    return p;
}

inline DvechParams fit_dvech(std::span<const double> spot, std::span<const double> futures,
                             const FitOptions& opt = {}) {
    detail::check_pair(spot, futures);
    detail::require_length(spot.size(), opt);
    const auto s0 = presample_state(spot, futures);
    if (!(s0.var_s > 0.0 && s0.var_f > 0.0)) throw Error("estimation", "zero-variance input");
    if (std::abs(s0.correlation()) > 1.0 - 1e-10)
        throw Error("estimation", "degenerate likelihood: spot and futures are perfectly collinear");

    const DvechParams start = dvech_start(spot, futures);
    const detail::DvechCoords coords{start.mu_s, start.mu_f, std::sqrt(s0.var_s), std::sqrt(s0.var_f)};
    const auto gs = detail::garch_to_coords(start.omega1, start.alpha_s, start.beta_s);
    const auto gf = detail::garch_to_coords(start.omega2, start.alpha_f, start.beta_f);
    const double bound = std::sqrt(start.omega1 * start.omega2);
    const double sign = start.alpha_sf < 0.0 ? -1.0 : 1.0;
    const std::vector<double> x0{0.0,   0.0,   gs[0], gf[0], std::atanh(start.omega3 / bound),
                                 gs[1], gs[2], gf[1], gf[2], sign * std::atanh(detail::kStartCrossRatio),
                                 sign * std::atanh(detail::kStartCrossRatio)};

    const auto objective = [&](std::span<const double> x) {
        const auto p = coords.decode(x);
        if (!(p.omega1 > 0.0 && p.omega2 > 0.0 && std::isfinite(p.omega1) && std::isfinite(p.omega2)))
            return -std::numeric_limits<double>::infinity();
        return dvech_loglik(p, spot, futures);
    };
    const auto best = maximize(objective, x0, opt.optimizer);
    const auto p = coords.decode(best.argmax);
    return {p.mu_s,    p.mu_f,    p.omega1, p.omega2, p.omega3, p.alpha_s,
            p.alpha_f, p.alpha_sf, p.beta_s, p.beta_f, p.beta_sf};
}

inline DvechParams fit_dvech(const ReturnSeries& spot, const ReturnSeries& futures, const FitOptions& opt = {}) {
    detail::check_pair(spot, futures);
    return fit_dvech(spot.values(), futures.values(), opt);
}

// --------------------------------------------------------------------------
// Flat JSON documents
// --------------------------------------------------------------------------

namespace detail {

template <std::size_t N>
void expect_keys(const nlohmann::json& j, const std::array<const char*, N>& keys, const char* what) {
    if (!j.is_object()) throw Error("estimation", std::string(what) + ": expected a JSON object");
    if (j.size() != N) throw Error("estimation", std::string(what) + ": expected exactly " + std::to_string(N) + " keys");
    for (const char* k : keys)
        if (!j.contains(k) || !j.at(k).is_number())
            throw Error("estimation", std::string(what) + ": missing numeric key '" + k + "'");
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const Garch11Params& p) {
    return {{"mu", p.mu}, {"omega", p.omega}, {"alpha", p.alpha}, {"beta", p.beta}};
}

inline nlohmann::ordered_json to_json(const GarchMParams& p) {
    return {{"lambda", p.lambda}, {"omega", p.omega}, {"alpha", p.alpha}, {"beta", p.beta}};
}

inline nlohmann::ordered_json to_json(const DvechParams& p) {
    return {{"mu_s", p.mu_s},         {"mu_f", p.mu_f},       {"omega1", p.omega1},   {"omega2", p.omega2},
            {"omega3", p.omega3},     {"alpha_s", p.alpha_s}, {"alpha_f", p.alpha_f}, {"alpha_sf", p.alpha_sf},
            {"beta_s", p.beta_s},     {"beta_f", p.beta_f},   {"beta_sf", p.beta_sf}};
}

inline Garch11Params garch11_from_json(const nlohmann::json& j) {
    detail::expect_keys(j, std::array{"mu", "omega", "alpha", "beta"}, "garch11");
    return {j.at("mu").get<double>(), j.at("omega").get<double>(), j.at("alpha").get<double>(),
            j.at("beta").get<double>()};
}

inline GarchMParams garch_m_from_json(const nlohmann::json& j) {
    detail::expect_keys(j, std::array{"lambda", "omega", "alpha", "beta"}, "garch_m");
    return {j.at("lambda").get<double>(), j.at("omega").get<double>(), j.at("alpha").get<double>(),
            j.at("beta").get<double>()};
}

inline DvechParams dvech_from_json(const nlohmann::json& j) {
    detail::expect_keys(j,
                        std::array{"mu_s", "mu_f", "omega1", "omega2", "omega3", "alpha_s", "alpha_f", "alpha_sf",
                                   "beta_s", "beta_f", "beta_sf"},
                        "dvech");
    const auto g = [&](const char* k) { return j.at(k).get<double>(); };
    return {g("mu_s"),    g("mu_f"),    g("omega1"), g("omega2"), g("omega3"), g("alpha_s"),
            g("alpha_f"), g("alpha_sf"), g("beta_s"), g("beta_f"), g("beta_sf")};
}

}  // namespace uhedge
