#include "latreg/fit.hpp"

#include <cmath>
#include <functional>

namespace latreg {

Eigen::VectorXd residuals(const LatticeDesign& design, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& beta) {
    if (y.size() != design.X.rows() || beta.size() != design.X.cols())
        throw parameter_error("residuals: inconsistent shapes");
    return y - design.X * beta;
}

double empirical_cov(const Eigen::VectorXd& resid, int N, long h1, long h2) {
    if (resid.size() != static_cast<long>(N) * N)
        throw parameter_error("empirical_cov: residual length != N^2");
    if (std::labs(h1) >= N || std::labs(h2) >= N)
        throw parameter_error("empirical_cov: |h| must be < N");
    if (h1 < 0) {  // gamma(h) = gamma(-h); canonicalize by point reflection
        h1 = -h1;
        h2 = -h2;
    }
    const Eigen::VectorXd centered = resid.array() - resid.mean();
    const long lo2 = std::max(0L, -h2);
    const long len = N - std::labs(h2);
    double acc = 0.0;
    for (long t1 = 0; t1 + h1 < N; ++t1)
        acc += centered.segment((t1 + h1) * N + h2 + lo2, len)
                   .dot(centered.segment(t1 * N + lo2, len));
    const double count = static_cast<double>(N - h1) * static_cast<double>(len);
    return acc / count;
}

namespace {

Eigen::VectorXd ar1_from_rho(double rho1) {
    if (!(std::abs(rho1) < 1.0))
        throw fit_error("fit: AR(1) moment estimate is non-stationary");
    Eigen::VectorXd phi(1);
    phi(0) = rho1;
    return phi;
}

Eigen::VectorXd ar2_from_rho(double rho1, double rho2) {
    // (a, b)' = [[rho(0), rho(-1)], [rho(1), rho(0)]]^{-1} (rho(1), rho(2))'
    Eigen::Matrix2d R;
    R << 1.0, rho1, rho1, 1.0;
    if (std::abs(R.determinant()) < 1e-14)
        throw fit_error("fit: AR(2) Yule-Walker system is singular");
    Eigen::Vector2d ab = R.inverse() * Eigen::Vector2d(rho1, rho2);
    if (ab(1) == 0.0) throw degenerate_root_error("fit: AR(2) collapsed to order 1");
    auto [xi1, xi2] = ar_roots_from_coeffs(ab(0), ab(1));
    if (!(std::abs(xi1) > 1.0) || !(std::abs(xi2) > 1.0))
        throw fit_error("fit: AR(2) moment estimate has a root inside the unit disk");
    Eigen::VectorXd phi(2);
    phi << ab(0), ab(1);
    return phi;
}

/// Shared moment-matching core; gamma(h1, h2) supplies either the empirical
/// or the exact autocovariances.
SeparableARModel fit_from_moments(const std::function<double(long, long)>& gamma,
                                  std::pair<int, int> orders) {
    if ((orders.first != 1 && orders.first != 2) || (orders.second != 1 && orders.second != 2))
        throw parameter_error("fit: orders must lie in {1,2}");
    const double g00 = gamma(0, 0);
    if (!(g00 > 0.0)) throw fit_error("fit: lag-0 covariance not positive");
    SeparableARModel m;
    m.phi1 = orders.first == 1 ? ar1_from_rho(gamma(1, 0) / g00)
                               : ar2_from_rho(gamma(1, 0) / g00, gamma(2, 0) / g00);
    m.phi2 = orders.second == 1 ? ar1_from_rho(gamma(0, 1) / g00)
                                : ar2_from_rho(gamma(0, 1) / g00, gamma(0, 2) / g00);
    double c0 = ar_autocovariances(m.phi1, 1.0, 1)(0) * ar_autocovariances(m.phi2, 1.0, 1)(0);
    m.sigma12 = g00 / c0;
    m.validate();
    return m;
}

}  // namespace

SeparableARModel fit_separable(const Eigen::VectorXd& resid, int N, std::pair<int, int> orders) {
    return fit_from_moments(
        [&](long h1, long h2) { return empirical_cov(resid, N, h1, h2); }, orders);
}

SeparableARModel fit_separable_population(const CovarianceModel& model,
                                          std::pair<int, int> orders) {
    return fit_from_moments([&](long h1, long h2) { return model.gamma(h1, h2); }, orders);
}

}  // namespace latreg
