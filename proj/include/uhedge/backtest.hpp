#pragma once

// Rolling-window hedging backtest.
//
// Positions index the common return calendar of spot, futures and the risk
// aversion index. A "window ending at p" holds observations
// [p + 1 - window_length, p]. In-sample hedges are formed at every window end
// up to in_sample_end from contemporaneous estimates; out-of-sample hedges for
// date q are formed from data through q - 1 only: the covariance comes from a
// one-step DVECH forecast, risk aversion and expected futures return from
// AR(1) forecasts refit on everything observed so far.

#include "uhedge/error.hpp"
#include "uhedge/estimation.hpp"
#include "uhedge/hedge.hpp"
#include "uhedge/market_data.hpp"
#include "uhedge/parallel.hpp"
#include "uhedge/risk_aversion.hpp"
#include "uhedge/stats.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace uhedge {

enum class Segment { InSample, OutOfSample };

inline constexpr std::uint64_t kDvechSeedSalt = 1;

inline std::string_view to_string(Segment s) { return s == Segment::InSample ? "in_sample" : "out_of_sample"; }

inline Segment segment_from_string(std::string_view s) {
    if (s == "in_sample") return Segment::InSample;
    if (s == "out_of_sample") return Segment::OutOfSample;
    throw Error("backtest", "unknown segment '" + std::string(s) + "'");
}

/// Every utility for both hedger sides, risk aversion taken from the index.
inline std::vector<HedgeSpec> default_hedge_specs() {
    std::vector<HedgeSpec> specs;
    for (auto u : kAllUtilities)
        for (auto s : kAllSides) specs.emplace_back(u, s);
    return specs;
}

struct BacktestConfig {
    std::size_t window_length = 500;
    std::size_t crra_window = 0;  ///< GARCH-M window on the index; 0 means window_length
    Frequency frequency = Frequency::FiveDay;
    Date in_sample_end{};
    Date out_of_sample_end{};
    std::vector<HedgeSpec> specs = default_hedge_specs();
    std::uint64_t seed = 0;
    std::size_t refit_every = 1;     ///< refit parameters every k positions, re-filter in between
    double min_hedge_lambda = 0.5;   ///< floor on estimated risk aversion when forming hedges
    unsigned threads = 0;            ///< 0 = hardware concurrency
    double optimizer_tolerance = 1e-6;

    [[nodiscard]] std::size_t min_window() const { return frequency == Frequency::FiveDay ? 250 : 60; }
    [[nodiscard]] std::size_t effective_crra_window() const { return crra_window == 0 ? window_length : crra_window; }

    void validate() const {
        if (window_length < min_window())
            throw Error("backtest", "window_length " + std::to_string(window_length) + " is below the " +
                                        std::string(to_string(frequency)) + " minimum of " +
                                        std::to_string(min_window()));
        if (effective_crra_window() < min_window())
            throw Error("backtest", "crra_window is below the minimum of " + std::to_string(min_window()));
        if (!(in_sample_end < out_of_sample_end))
            throw Error("backtest", "in_sample_end must precede out_of_sample_end");
        if (refit_every == 0) throw Error("backtest", "refit_every must be positive");
        if (specs.empty()) throw Error("backtest", "no hedge specifications configured");
        if (!(min_hedge_lambda > 0.0)) throw Error("backtest", "min_hedge_lambda must be > 0");
    }
};

struct HedgeObservation {
    Date date{};
    double beta = 0.0;
    double portfolio_return = 0.0;
    bool at_boundary = false;
};

struct HedgePath {
    HedgeSpec spec{};
    Segment segment = Segment::InSample;
    std::vector<HedgeObservation> observations;
};

/// Parameters estimated at one refit position.
struct RefitRecord {
    Date date{};
    DvechParams dvech{};
    std::optional<GarchMParams> garch_m{};
};

namespace detail {

/// One-step forecast of the next value of `x`; a constant history forecasts
/// itself (an AR(1) with zero slope).
inline double forecast_next(std::span<const double> x) {
    const bool constant = std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
    if (constant) return x.front();
    return ar1_forecast(fit_ar1(x), x.back());
}

}  // namespace detail

/// Rolling estimation and hedge construction over aligned return series.
/// Parameter fits are cached per refit position, so in-sample and
/// out-of-sample runs on one instance share work.
class Backtest {
public:
    Backtest(BacktestConfig config, ReturnSeries spot, ReturnSeries futures, ReturnSeries index)
        : config_(std::move(config)), spot_(std::move(spot)), futures_(std::move(futures)),
          index_(std::move(index)) {
        init();
        if (index_.size() != spot_.size() ||
            !std::equal(index_.dates().begin(), index_.dates().end(), spot_.dates().begin()))
            throw Error("backtest", "risk-aversion index and hedge dates fail to align");
    }

    /// Uses a precomputed risk-aversion path instead of fitting the index.
    Backtest(BacktestConfig config, ReturnSeries spot, ReturnSeries futures, CrraPath lambdas)
        : config_(std::move(config)), spot_(std::move(spot)), futures_(std::move(futures)),
          supplied_(std::move(lambdas)) {
        init();
    }

    [[nodiscard]] const BacktestConfig& config() const { return config_; }
    [[nodiscard]] std::size_t first_position() const { return first_; }
    [[nodiscard]] std::size_t last_in_sample() const { return is_last_; }

    /// One path per spec over window ends first_position() .. in_sample_end.
    std::vector<HedgePath> run_insample() {
        const std::size_t count = is_last_ - first_ + 1;
        prepare(first_, is_last_);
        std::vector<std::vector<HedgeObservation>> rows(count);
        parallel_for(
            count,
            [&](std::size_t k) {
                const std::size_t p = first_ + k;
                const auto hedges = insample_hedges(p);
                for (std::size_t s = 0; s < hedges.size(); ++s) {
                    const auto& spec = config_.specs[s];
                    rows[k].push_back({spot_.dates()[p], hedges[s].beta,
                                       hedged_return(hedges[s].beta, spec.side, spot_[p], futures_[p]),
                                       hedges[s].at_boundary});
                }
            },
            config_.threads);
        return assemble(rows, Segment::InSample);
    }

    /// One path per spec over dates in (in_sample_end, out_of_sample_end].
    std::vector<HedgePath> run_outofsample() {
        if (oos_last_ <= is_last_) throw Error("backtest", "empty out-of-sample segment");
        const std::size_t count = oos_last_ - is_last_;
        prepare(is_last_, oos_last_ - 1, first_);
        std::vector<std::vector<HedgeObservation>> rows(count);
        parallel_for(
            count,
            [&](std::size_t k) {
                const std::size_t q = is_last_ + 1 + k;
                const auto hedges = forecast_hedges(q - 1);
                for (std::size_t s = 0; s < hedges.size(); ++s) {
                    const auto& spec = config_.specs[s];
                    rows[k].push_back({spot_.dates()[q], hedges[s].beta,
                                       hedged_return(hedges[s].beta, spec.side, spot_[q], futures_[q]),
                                       hedges[s].at_boundary});
                }
            },
            config_.threads);
        return assemble(rows, Segment::OutOfSample);
    }

    /// In-sample hedge ratios (one per spec) at the last observation.
    std::vector<double> betas_at_last() {
        const std::size_t p = spot_.size() - 1;
        if (p < first_) throw Error("backtest", "insufficient pre-sample data");
        prepare(p, p);
        return betas(insample_hedges(p));
    }

    /// Hedge ratios (one per spec) for the period after the last observation.
    std::vector<double> betas_for_next_period() {
        const std::size_t p = spot_.size() - 1;
        if (p < first_) throw Error("backtest", "insufficient pre-sample data");
        prepare(p, p, first_);
        return betas(forecast_hedges(p));
    }

    /// Risk-aversion estimates at window ends first_position() .. last computed.
    [[nodiscard]] CrraPath crra_path() const {
        std::vector<Date> dates;
        std::vector<double> values;
        for (const auto& [p, lambda] : lambda_)
            if (p >= first_) {
                dates.push_back(spot_.dates()[p]);
                values.push_back(lambda);
            }
        return CrraPath(config_.frequency, std::move(dates), std::move(values));
    }

    /// Parameter sets at every refit position computed so far, in date order.
    [[nodiscard]] std::vector<RefitRecord> refits() const {
        std::vector<RefitRecord> out;
        for (const auto& [p, params] : dvech_) {
            RefitRecord r{spot_.dates()[p], params, std::nullopt};
            if (const auto it = garch_m_.find(p); it != garch_m_.end()) r.garch_m = it->second;
            out.push_back(r);
        }
        return out;
    }

    /// Number of hedges formed with risk aversion raised to min_hedge_lambda.
    [[nodiscard]] std::size_t floored_lambda_count() const { return floored_; }

private:
    void init() {
        config_.validate();
        if (spot_.size() != futures_.size() ||
            !std::equal(spot_.dates().begin(), spot_.dates().end(), futures_.dates().begin()))
            throw Error("backtest", "spot and futures series are not aligned");
        if (spot_.frequency() != config_.frequency)
            throw Error("backtest", "return frequency does not match the configuration");
        window_ = config_.window_length;
        crra_window_ = config_.effective_crra_window();
        first_ = std::max(window_, supplied_ ? window_ : crra_window_) - 1;
        const auto dates = spot_.dates();
        const auto count_through = [&](Date d) {
            return static_cast<std::size_t>(std::upper_bound(dates.begin(), dates.end(), d) - dates.begin());
        };
        const std::size_t n_is = count_through(config_.in_sample_end);
        if (n_is == 0 || n_is - 1 < first_)
            throw Error("backtest", "insufficient pre-sample data: the first window ends after in_sample_end");
        is_last_ = n_is - 1;
        oos_last_ = count_through(config_.out_of_sample_end) - 1;
        fit_options_.min_observations = config_.min_window();
        fit_options_.optimizer.tolerance = config_.optimizer_tolerance;
    }

    [[nodiscard]] std::size_t refit_position(std::size_t p) const {
        return first_ + (p - first_) / config_.refit_every * config_.refit_every;
    }

    [[nodiscard]] FitOptions fit_options_for(std::size_t p, std::uint64_t salt) const {
        FitOptions opt = fit_options_;
        opt.optimizer.seed = window_seed(config_.seed, spot_.dates()[p], salt);
        return opt;
    }

    /// Computes (in parallel) the covariance fits for positions lo..hi and the
    /// risk-aversion fits for lambda_lo..hi; forecasts need the whole lambda
    /// history but only the current covariance fit.
    void prepare(std::size_t lo, std::size_t hi) { prepare(lo, hi, lo); }

    void prepare(std::size_t lo, std::size_t hi, std::size_t lambda_lo) {
        std::vector<std::size_t> dvech_todo, lambda_todo;
        {
            std::lock_guard lock(cache_mutex_);
            for (std::size_t p = lo; p <= hi; ++p) {
                const std::size_t r = refit_position(p);
                if (!dvech_.contains(r) && (dvech_todo.empty() || dvech_todo.back() != r)) dvech_todo.push_back(r);
            }
            for (std::size_t p = lambda_lo; p <= hi && !supplied_; ++p) {
                const std::size_t r = refit_position(p);
                if (!garch_m_.contains(r) && (lambda_todo.empty() || lambda_todo.back() != r)) lambda_todo.push_back(r);
            }
        }
        std::vector<DvechParams> dvech(dvech_todo.size());
        std::vector<GarchMParams> garch(lambda_todo.size());
        const std::size_t jobs = dvech_todo.size() + lambda_todo.size();
        parallel_for(
            jobs,
            [&](std::size_t j) {
                if (j < dvech_todo.size()) {
                    const std::size_t r = dvech_todo[j];
                    dvech[j] = fit_dvech(spot_.values().subspan(r + 1 - window_, window_),
                                         futures_.values().subspan(r + 1 - window_, window_), fit_options_for(r, kDvechSeedSalt));
                } else {
                    const std::size_t r = lambda_todo[j - dvech_todo.size()];
                    garch[j - dvech_todo.size()] =
                        fit_garch_m(index_.values().subspan(r + 1 - crra_window_, crra_window_), fit_options_for(r, kGarchMSeedSalt));
                }
            },
            config_.threads);
        std::lock_guard lock(cache_mutex_);
        for (std::size_t j = 0; j < dvech_todo.size(); ++j) dvech_.emplace(dvech_todo[j], dvech[j]);
        for (std::size_t j = 0; j < lambda_todo.size(); ++j) garch_m_.emplace(lambda_todo[j], garch[j]);
        for (std::size_t p = lambda_lo; p <= hi; ++p) lambda_.emplace(p, estimated_lambda(p));
    }

    [[nodiscard]] double estimated_lambda(std::size_t p) const {
        if (supplied_) {
            const auto d = supplied_->dates();
            const auto it = std::lower_bound(d.begin(), d.end(), spot_.dates()[p]);
            if (it == d.end() || *it != spot_.dates()[p])
                throw Error("backtest", "risk-aversion path has no value at " + spot_.dates()[p].iso());
            return supplied_->lambdas()[static_cast<std::size_t>(it - d.begin())];
        }
        return garch_m_.at(refit_position(p)).lambda;
    }

    struct WindowState {
        DvechParams params;
        CovarianceState state;  // conditional covariance for period p
        double resid_s = 0.0;
        double resid_f = 0.0;
        std::span<const double> spot;
        std::span<const double> futures;
        double mean_s = 0.0;
        double mean_f = 0.0;
    };

    [[nodiscard]] WindowState window_state(std::size_t p) const {
        WindowState w;
        {
            std::lock_guard lock(cache_mutex_);
            w.params = dvech_.at(refit_position(p));
        }
        w.spot = spot_.values().subspan(p + 1 - window_, window_);
        w.futures = futures_.values().subspan(p + 1 - window_, window_);
        w.state = dvech_filter(w.params, w.spot, w.futures).back();
        w.resid_s = spot_[p] - w.params.mu_s;
        w.resid_f = futures_[p] - w.params.mu_f;
        w.mean_s = stats::mean(w.spot);
        w.mean_f = stats::mean(w.futures);
        return w;
    }

    [[nodiscard]] double lambda_at(std::size_t p) const {
        std::lock_guard lock(cache_mutex_);
        return lambda_.at(p);
    }

    ExponentialHedge hedge(const HedgeSpec& spec, double estimated_lambda, double e_rf, const CovarianceState& state,
                           const WindowState& w) {
        double lambda = spec.lambda.value_or(estimated_lambda);
        if (!spec.lambda && lambda < config_.min_hedge_lambda &&
            (spec.utility == Utility::Quadratic || spec.utility == Utility::Exponential)) {
            lambda = config_.min_hedge_lambda;
            std::lock_guard lock(cache_mutex_);
            ++floored_;
        }
        switch (spec.utility) {
            case Utility::Quadratic: return {quadratic_ohr(e_rf, lambda, state, spec.side), false};
            case Utility::Log: return {log_ohr(e_rf, state, spec.side), false};
            case Utility::MinVariance: return {mvhr(state), false};
            case Utility::Exponential:
                return exponential_ohr(lambda, spec.side, w.spot, w.futures, state, w.mean_s, e_rf);
        }
        throw Error("backtest", "unhandled utility");
    }

    std::vector<ExponentialHedge> insample_hedges(std::size_t p) {
        const auto w = window_state(p);
        const double lambda = lambda_at(p);
        std::vector<ExponentialHedge> out;
        for (const auto& spec : config_.specs) out.push_back(hedge(spec, lambda, w.mean_f, w.state, w));
        return out;
    }

    /// Hedges for period p + 1 from information through p.
    std::vector<ExponentialHedge> forecast_hedges(std::size_t p) {
        const auto w = window_state(p);
        const auto state = dvech_forecast(w.params, w.state, {w.resid_s, w.resid_f});
        std::vector<double> lambdas;
        lambdas.reserve(p - first_ + 1);
        for (std::size_t i = first_; i <= p; ++i) lambdas.push_back(lambda_at(i));
        const double lambda = detail::forecast_next(lambdas);
        const double e_rf = detail::forecast_next(futures_.values().subspan(0, p + 1));
        std::vector<ExponentialHedge> out;
        for (const auto& spec : config_.specs) out.push_back(hedge(spec, lambda, e_rf, state, w));
        return out;
    }

    static std::vector<double> betas(const std::vector<ExponentialHedge>& hedges) {
        std::vector<double> out;
        for (const auto& h : hedges) out.push_back(h.beta);
        return out;
    }

    std::vector<HedgePath> assemble(const std::vector<std::vector<HedgeObservation>>& rows, Segment segment) const {
        std::vector<HedgePath> paths;
        for (std::size_t s = 0; s < config_.specs.size(); ++s) {
            HedgePath path{config_.specs[s], segment, {}};
            path.observations.reserve(rows.size());
            for (const auto& row : rows) path.observations.push_back(row[s]);
            paths.push_back(std::move(path));
        }
        return paths;
    }

    BacktestConfig config_;
    ReturnSeries spot_;
    ReturnSeries futures_;
    ReturnSeries index_;
    std::optional<CrraPath> supplied_;
    FitOptions fit_options_{};
    std::size_t window_ = 0;
    std::size_t crra_window_ = 0;
    std::size_t first_ = 0;
    std::size_t is_last_ = 0;
    std::size_t oos_last_ = 0;

    mutable std::mutex cache_mutex_;
    std::map<std::size_t, DvechParams> dvech_;
    std::map<std::size_t, GarchMParams> garch_m_;
    std::map<std::size_t, double> lambda_;
    std::size_t floored_ = 0;
};

inline std::vector<HedgePath> run_insample(const BacktestConfig& config, const ReturnSeries& spot,
                                           const ReturnSeries& futures, const ReturnSeries& index) {
    return Backtest(config, spot, futures, index).run_insample();
}

inline std::vector<HedgePath> run_outofsample(const BacktestConfig& config, const ReturnSeries& spot,
                                              const ReturnSeries& futures, const ReturnSeries& index) {
    return Backtest(config, spot, futures, index).run_outofsample();
}

/// Recomputes the recorded hedge ratio for `spec` at `date` from data that
/// would have been available when it was formed: observations through `date`
/// for in-sample hedges, strictly before `date` for out-of-sample ones.
inline double recompute_beta(const BacktestConfig& config, const ReturnSeries& spot, const ReturnSeries& futures,
                             const ReturnSeries& index, Date date, Segment segment, const HedgeSpec& spec) {
    const auto spec_it = std::find(config.specs.begin(), config.specs.end(), spec);
    if (spec_it == config.specs.end()) throw Error("backtest", "hedge specification not in the configuration");
    const auto s = static_cast<std::size_t>(spec_it - config.specs.begin());

    Date cutoff = date;
    if (segment == Segment::OutOfSample) {
        const auto d = spot.dates();
        const auto it = std::lower_bound(d.begin(), d.end(), date);
        if (it == d.begin() || it == d.end() || *it != date)
            throw Error("backtest", "no observation at " + date.iso());
        cutoff = *(it - 1);
    }
    BacktestConfig truncated = config;
    if (truncated.in_sample_end > cutoff) truncated.in_sample_end = cutoff;
    if (!(truncated.in_sample_end < truncated.out_of_sample_end)) truncated.out_of_sample_end = cutoff.plus_days(1);
    Backtest bt(truncated, spot.through(cutoff), futures.through(cutoff), index.through(cutoff));
    const auto betas = segment == Segment::InSample ? bt.betas_at_last() : bt.betas_for_next_period();
    return betas[s];
}

}  // namespace uhedge
