#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace uhedge;

namespace {

const CovarianceState kOil{0.0030, 0.0024, 0.0024192, false};

/// Brute-force argmax of f over [lo, hi] on a uniform grid of the given step.
template <class F>
double grid_argmax(F f, double lo, double hi, double step) {
    double best = lo, best_v = f(lo);
    const auto n = static_cast<long>(std::llround((hi - lo) / step));
    for (long i = 1; i <= n; ++i) {
        const double x = lo + step * static_cast<double>(i);
        const double v = f(x);
        if (v > best_v) {
            best_v = v;
            best = x;
        }
    }
    return best;
}

/// Skewed 30-point window: futures with a right tail, spot loading on them.
std::pair<std::vector<double>, std::vector<double>> skewed_window() {
    const std::vector<double> f{0.012,  -0.008, 0.003,  0.095, -0.011, 0.004,  -0.006, 0.002,  0.071,  -0.013,
                                0.001,  -0.004, 0.007,  -0.009, 0.118, -0.012, 0.005,  -0.002, -0.007, 0.010,
                                -0.015, 0.003,  0.062,  -0.005, 0.000, -0.010, 0.008,  -0.003, 0.006,  -0.014};
    const std::vector<double> e{0.004,  -0.006, 0.002,  -0.003, 0.005,  -0.001, 0.003,  -0.004, 0.006, 0.001,
                                -0.002, 0.004,  -0.005, 0.002,  -0.003, 0.001,  0.005,  -0.006, 0.002, -0.001,
                                0.003,  -0.004, 0.001,  0.006,  -0.002, 0.000,  -0.005, 0.004,  -0.001, 0.002};
    std::vector<double> s(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) s[i] = 0.9 * f[i] + e[i];
    return {s, f};
}

struct Approx {
    double v;
    friend bool operator==(double x, Approx a) { return std::abs(x - a.v) < 1e-5; }
};

CovarianceState sample_state(std::span<const double> s, std::span<const double> f) {
    return {stats::covariance_n(s, s), stats::covariance_n(f, f), stats::covariance_n(s, f), false};
}

}  // namespace

TEST(HedgedReturn, Examples) {
    EXPECT_DOUBLE_EQ(hedged_return(1.0, Side::Short, 0.02, 0.03), -0.01);
    EXPECT_DOUBLE_EQ(hedged_return(1.0, Side::Long, 0.02, 0.03), 0.01);
    EXPECT_EQ(hedged_return(0.0, Side::Short, 0.0375, 123.0), 0.0375);
    for (double b : {-1.3, 0.0, 0.7, 2.2})
        EXPECT_EQ(hedged_return(b, Side::Long, 0.013, -0.021), -hedged_return(b, Side::Short, 0.013, -0.021));
}

TEST(Mvhr, Examples) {
    EXPECT_EQ(mvhr({0.004, 0.0064, 0.0064, false}), 1.0);
    EXPECT_DOUBLE_EQ(mvhr({0.004, 0.0064, 0.0050, false}), 0.78125);
    EXPECT_THROW(mvhr({0.004, 0.0, 0.0, false}), Error);
}

TEST(Mvhr, EqualsOlsSlope) {
    const auto pair = sim::bivariate_normal(20, 31, 0.03, 0.025, 0.8);
    Eigen::MatrixXd X(20, 2);
    Eigen::VectorXd y(20);
    for (int i = 0; i < 20; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = pair.futures[static_cast<std::size_t>(i)];
        y(i) = pair.spot[static_cast<std::size_t>(i)];
    }
    const auto fit = stats::ols(X, y);
    EXPECT_NEAR(mvhr(sample_state(pair.spot, pair.futures)), fit.coef(1), 1e-10);
}

TEST(Mvhr, ScaleInvariant) {
    const CovarianceState s{0.003, 0.002, 0.0017, false};
    const CovarianceState t{0.003 * 7, 0.002 * 7, 0.0017 * 7, false};
    EXPECT_NEAR(mvhr(s), mvhr(t), 1e-15);
    // speculative term scales inversely with var_f
    const double spec_s = mvhr(s) - quadratic_ohr(0.001, 3.0, s, Side::Short);
    const double spec_t = mvhr(t) - quadratic_ohr(0.001, 3.0, t, Side::Short);
    EXPECT_NEAR(spec_s / spec_t, 7.0, 1e-9);
}

TEST(QuadraticOhr, HandValues) {
    EXPECT_NEAR(quadratic_ohr(0.0018, 2.78, kOil, Side::Short), 0.8731, 5e-5);
    EXPECT_NEAR(quadratic_ohr(0.0018, 2.78, kOil, Side::Long), 1.1429, 5e-5);
    const double mid = (quadratic_ohr(0.0018, 2.78, kOil, Side::Short) + quadratic_ohr(0.0018, 2.78, kOil, Side::Long)) / 2;
    EXPECT_NEAR(mid, 1.008, 1e-12);
}

TEST(QuadraticOhr, ZeroExpectedReturnIsMvhr) {
    for (auto side : kAllSides) EXPECT_EQ(quadratic_ohr(0.0, 4.0, kOil, side), mvhr(kOil));
}

TEST(QuadraticOhr, RejectsNonPositiveLambda) {
    EXPECT_THROW(quadratic_ohr(0.001, 0.0, kOil, Side::Short), Error);
    EXPECT_THROW(quadratic_ohr(0.001, -1.0, kOil, Side::Long), Error);
    EXPECT_THROW(HedgeSpec(Utility::Quadratic, Side::Short, 0.0), Error);
    EXPECT_NO_THROW(HedgeSpec(Utility::MinVariance, Side::Short, std::nullopt));
}

TEST(QuadraticOhr, MatchesGridArgmaxOnRandomPanel) {
    Rng rng(2024);
    for (int c = 0; c < 200; ++c) {
        const double sd_s = 0.01 + 0.09 * rng.uniform();
        const double sd_f = 0.01 + 0.09 * rng.uniform();
        const double rho = -0.2 + 1.15 * rng.uniform();
        const CovarianceState st{sd_s * sd_s, sd_f * sd_f, rho * sd_s * sd_f, false};
        const double e_rf = 0.004 * (2 * rng.uniform() - 1);
        const double lambda = 1.0 + 9.0 * rng.uniform();
        const double mu_s = 0.003 * (2 * rng.uniform() - 1);
        for (auto side : kAllSides) {
            const double beta = quadratic_ohr(e_rf, lambda, st, side);
            const auto objective = [&](double b) {
                const double mean = side_sign(side) * (mu_s - b * e_rf);
                const double var = st.var_s + b * b * st.var_f - 2 * b * st.cov_sf;
                return mean - lambda * var;
            };
            const double g = grid_argmax(objective, beta - 1.0, beta + 1.0, 1e-4);
            EXPECT_NEAR(beta, g, 2e-4) << "case " << c;
        }
    }
}

TEST(LogOhr, IsQuadraticAtUnitLambda) {
    EXPECT_NEAR(log_ohr(0.0018, kOil, Side::Short), 0.633, 5e-4);
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        const CovarianceState st{0.001 + rng.uniform() * 0.01, 0.001 + rng.uniform() * 0.01, rng.uniform() * 0.002,
                                 false};
        const double e = 0.01 * (rng.uniform() - 0.5);
        for (auto side : kAllSides) EXPECT_EQ(log_ohr(e, st, side), quadratic_ohr(e, 1.0, st, side));
    }
    EXPECT_EQ(log_ohr(0.0, kOil, Side::Long), mvhr(kOil));
}

TEST(SideSymmetry, MidpointIsMvhr) {
    Rng rng(6);
    for (int i = 0; i < 100; ++i) {
        const CovarianceState st{0.001 + rng.uniform() * 0.01, 0.001 + rng.uniform() * 0.01,
                                 0.004 * (rng.uniform() - 0.3), false};
        const double e = 0.01 * (rng.uniform() - 0.5);
        const double lambda = 0.5 + 10 * rng.uniform();
        const double q = (quadratic_ohr(e, lambda, st, Side::Short) + quadratic_ohr(e, lambda, st, Side::Long)) / 2;
        const double l = (log_ohr(e, st, Side::Short) + log_ohr(e, st, Side::Long)) / 2;
        EXPECT_NEAR(q, mvhr(st), 1e-12);
        EXPECT_NEAR(l, mvhr(st), 1e-12);
    }
}

TEST(PortfolioMoments, UnhedgedShortIsSpot) {
    const auto [s, f] = skewed_window();
    const auto st = sample_state(s, f);
    const auto m = portfolio_moments(0.0, Side::Short, s, f, st, 0.0021, 0.004);
    EXPECT_EQ(m.mean, 0.0021);
    EXPECT_EQ(m.variance, st.var_s);
    const auto sh = shape(s);
    EXPECT_NEAR(m.skewness, sh.skewness, 1e-12);
    EXPECT_NEAR(m.kurtosis, sh.excess_kurtosis + 3.0, 1e-12);
}

TEST(PortfolioMoments, PerfectHedgeHitsFloor) {
    const auto [s, f] = skewed_window();
    const CovarianceState st{4e-4, 1e-4, 2e-4, false};  // correlation 1
    const auto m = portfolio_moments(2.0, Side::Short, s, f, st, 0.0, 0.0);
    EXPECT_EQ(m.variance, kVarianceFloor);
    EXPECT_NEAR(m.std_cubed, std::pow(kVarianceFloor, 1.5), 1e-28);
    EXPECT_EQ(m.std_fourth, kVarianceFloor * kVarianceFloor);
}

TEST(PortfolioMoments, HandComputedShape) {
    // 30 points: ten hand-picked pairs repeated three times
    const std::vector<double> s10{0.02, -0.01, 0.035, -0.025, 0.005, 0.012, -0.04, 0.018, 0.0, -0.008};
    const std::vector<double> f10{0.015, -0.012, 0.02, -0.018, 0.01, 0.004, -0.03, 0.025, -0.004, -0.002};
    std::vector<double> s, f;
    for (int r = 0; r < 3; ++r) {
        s.insert(s.end(), s10.begin(), s10.end());
        f.insert(f.end(), f10.begin(), f10.end());
    }
    // hedged returns at beta = 0.5, short: s - 0.5 f
    const double h[10] = {0.0125, -0.004, 0.025, -0.016, 0.0, 0.010, -0.025, 0.0055, 0.002, -0.007};
    double mean = 0;
    for (double v : h) mean += v / 10;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : h) {
        m2 += std::pow(v - mean, 2) / 10;
        m3 += std::pow(v - mean, 3) / 10;
        m4 += std::pow(v - mean, 4) / 10;
    }
    const auto m = portfolio_moments(0.5, Side::Short, s, f, sample_state(s, f), 0.0, 0.0);
    EXPECT_NEAR(m.skewness, m3 / std::pow(m2, 1.5), 1e-10);
    EXPECT_NEAR(m.kurtosis, m4 / (m2 * m2), 1e-10);
    const auto l = portfolio_moments(0.5, Side::Long, s, f, sample_state(s, f), 0.0, 0.0);
    EXPECT_NEAR(l.skewness, -m.skewness, 1e-12);
    EXPECT_NEAR(l.kurtosis, m.kurtosis, 1e-12);
}

TEST(PortfolioMoments, PearsonBoundAndConsistency) {
    Rng rng(8);
    for (int i = 0; i < 30; ++i) {
        const auto pair = sim::bivariate_normal(60, 100 + i, 0.03, 0.02, 0.6);
        const double beta = 3 * rng.uniform() - 1;
        const auto m = portfolio_moments(beta, Side::Long, pair.spot, pair.futures,
                                         sample_state(pair.spot, pair.futures), 0.0, 0.0);
        EXPECT_GE(m.variance, 0.0);
        EXPECT_NEAR(m.std_cubed, std::pow(m.variance, 1.5), 1e-10);
        EXPECT_NEAR(m.std_fourth, m.variance * m.variance, 1e-10);
        EXPECT_GE(m.kurtosis, m.skewness * m.skewness + 1.0 - 1e-12);
    }
}

TEST(PortfolioMoments, RejectsShortOrMismatchedWindows) {
    const std::vector<double> a(29, 0.01), b(29, 0.01), c(30, 0.01);
    EXPECT_THROW(portfolio_moments(0.5, Side::Short, a, b, kOil, 0, 0), Error);
    EXPECT_THROW(portfolio_moments(0.5, Side::Short, a, c, kOil, 0, 0), Error);
}

TEST(ExpObjective, HandValue) {
    PortfolioMoments m;
    m.mean = 0.01;
    m.variance = 0.04;
    m.std_cubed = 0.008;
    m.std_fourth = 0.0016;
    m.skewness = -0.5;
    m.kurtosis = 4.0;
    EXPECT_NEAR(exp_objective(m, 2.0), -0.0332, 1e-6);
    EXPECT_NEAR(exp_objective(m, 2.0), 0.01 - 0.04 - 0.5 / 6 * 4 * 0.008 - 1.0 / 24 * 8 * 0.0016, 1e-15);
}

TEST(ExpObjective, NormalShapeCollapses) {
    PortfolioMoments m;
    m.mean = 0.003;
    m.variance = 0.0025;
    m.std_cubed = 0.000125;
    m.std_fourth = 0.0025 * 0.0025;
    EXPECT_EQ(exp_objective(m, 3.0), 0.003 - 0.5 * 3.0 * 0.0025);
    double prev = exp_objective(m, 3.0);
    for (double k : {3.5, 5.0, 9.0}) {
        m.kurtosis = k;
        const double v = exp_objective(m, 3.0);
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(ExponentialOhr, CollapsesToQuadraticUnderNormality) {
    for (int i = 0; i < 20; ++i) {
        const auto pair = sim::bivariate_normal(250, 700 + i, 0.04, 0.035, 0.85);
        const auto st = sample_state(pair.spot, pair.futures);
        for (auto side : kAllSides) {
            const auto e = exponential_ohr(2.5, side, pair.spot, pair.futures, st, 0.0, 0.0);
            EXPECT_LT(std::abs(e.beta - quadratic_ohr(0.0, 2.5, st, side)), 0.02) << "window " << i;
            EXPECT_FALSE(e.at_boundary);
        }
    }
}

TEST(ExponentialOhr, HighRiskAversionApproachesMvhr) {
    // The higher-order terms scale with (lambda sigma_p)^2 and ^3 relative to
    // the variance term, so the limit only holds while lambda sigma_p stays small.
    for (int i = 0; i < 20; ++i) {
        const auto pair = sim::bivariate_normal(250, 700 + i, 0.004, 0.0035, 0.85);
        const auto st = sample_state(pair.spot, pair.futures);
        for (auto side : kAllSides) {
            const auto e = exponential_ohr(100.0, side, pair.spot, pair.futures, st, 0.0, 0.0);
            EXPECT_LT(std::abs(e.beta - mvhr(st)), 0.02) << "window " << i;
        }
    }
}

TEST(ExponentialOhr, ExpansionBreaksDownForLargeLambdaSigma) {
    // lambda sigma_p near 2: a platykurtic sample makes the quartic term
    // reward risk and the optimum runs to the bracket edge, where it is flagged.
    int flagged = 0;
    for (int i = 0; i < 20; ++i) {
        const auto pair = sim::bivariate_normal(250, 700 + i, 0.04, 0.035, 0.85);
        const auto st = sample_state(pair.spot, pair.futures);
        const auto e = exponential_ohr(100.0, Side::Short, pair.spot, pair.futures, st, 0.0, 0.0);
        if (e.at_boundary) {
            ++flagged;
            EXPECT_TRUE(e.beta == Approx{kBetaLower} || e.beta == Approx{kBetaUpper});
        }
    }
    EXPECT_GT(flagged, 0);
}

TEST(ExponentialOhr, MatchesExhaustiveGridOnSkewedWindow) {
    const auto [s, f] = skewed_window();
    const auto st = sample_state(s, f);
    for (auto side : kAllSides) {
        for (double lambda : {1.0, 4.0, 12.0}) {
            const double mu_f = stats::mean(f);
            const auto e = exponential_ohr(lambda, side, s, f, st, stats::mean(s), mu_f);
            const auto objective = [&](double b) {
                return exp_objective(portfolio_moments(b, side, s, f, st, stats::mean(s), mu_f), lambda);
            };
            EXPECT_NEAR(e.beta, grid_argmax(objective, kBetaLower, kBetaUpper, 1e-4), 2e-4)
                << to_string(side) << " lambda " << lambda;
        }
    }
}

TEST(ExponentialOhr, FlagsBoundarySolutions) {
    const auto [s, f] = skewed_window();
    const auto st = sample_state(s, f);
    // a huge expected futures return pushes the long hedger to the upper edge
    const auto e = exponential_ohr(0.5, Side::Long, s, f, st, 0.0, 0.5);
    EXPECT_TRUE(e.at_boundary);
    EXPECT_NEAR(e.beta, kBetaUpper, 1e-5);
}

TEST(Strings, UtilityAndSideRoundTrip) {
    for (auto u : kAllUtilities) EXPECT_EQ(utility_from_string(to_string(u)), u);
    for (auto s : kAllSides) EXPECT_EQ(side_from_string(to_string(s)), s);
    EXPECT_THROW(utility_from_string("cara"), Error);
    EXPECT_THROW(side_from_string("flat"), Error);
}
