#pragma once

#include "uhedge/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace uhedge::stats {

inline double mean(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Unbiased (1/(n-1)) sample variance.
inline double sample_variance(std::span<const double> x) {
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

/// 1/n sample covariance.
inline double covariance_n(std::span<const double> x, std::span<const double> y) {
    const double mx = mean(x);
    const double my = mean(y);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
    return s / static_cast<double>(x.size());
}

/// Central moments m2, m3, m4 with 1/n normalization.
struct CentralMoments {
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
};

inline CentralMoments central_moments(std::span<const double> x) {
    const double m = mean(x);
    CentralMoments c;
    for (double v : x) {
        const double d = v - m;
        const double d2 = d * d;
        c.m2 += d2;
        c.m3 += d2 * d;
        c.m4 += d2 * d2;
    }
    const auto n = static_cast<double>(x.size());
    c.m2 /= n;
    c.m3 /= n;
    c.m4 /= n;
    return c;
}

/// Ordinary least squares fit of y on the columns of X.
struct OlsFit {
    Eigen::VectorXd coef;
    Eigen::VectorXd std_err;
    Eigen::VectorXd residuals;
    double r_squared = 0.0;
    double sigma2 = 0.0;  ///< residual variance, 1/(n-k)
};

/// Solves via QR with column pivoting; throws when X is rank deficient.
inline OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const auto n = X.rows();
    const auto k = X.cols();
    if (n <= k) throw Error("stats", "regression has no residual degrees of freedom");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-12);
    if (qr.rank() < k) throw Error("stats", "singular regressor matrix");

    OlsFit fit;
    fit.coef = qr.solve(y);
    fit.residuals = y - X * fit.coef;
    const double rss = fit.residuals.squaredNorm();
    const double ybar = y.mean();
    const double tss = (y.array() - ybar).square().sum();
    fit.r_squared = tss > 0.0 ? 1.0 - rss / tss : 0.0;
    fit.sigma2 = rss / static_cast<double>(n - k);

    const Eigen::MatrixXd xtx_inv =
        (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
    fit.std_err = (fit.sigma2 * xtx_inv.diagonal().array()).sqrt();
    return fit;
}

}  // namespace uhedge::stats
