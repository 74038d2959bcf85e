#include "latreg/estimators.hpp"

#include <cmath>

namespace latreg {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_causal(const Eigen::VectorXd& phi, const char* what) {
    if (phi.size() < 1 || phi.size() > 2)
        throw parameter_error(std::string(what) + ": AR order must be 1 or 2");
    if (!(ar_max_inverse_root(phi) < 1.0))
        throw nonstationary_error(std::string(what) + ": AR coefficients are not causal");
}

}  // namespace

double ar_max_inverse_root(const Eigen::VectorXd& phi) {
    if (phi.size() == 1) return std::abs(phi(0));
    if (phi.size() == 2) {
        if (phi(1) == 0.0) return std::abs(phi(0));
        auto [xi1, xi2] = ar_roots_from_coeffs(phi(0), phi(1));
        return std::max(1.0 / std::abs(xi1), 1.0 / std::abs(xi2));
    }
    throw parameter_error("ar_max_inverse_root: order must be 1 or 2");
}

Eigen::VectorXd ar_autocovariances(const Eigen::VectorXd& phi, double sigma2, int n) {
    check_causal(phi, "ar_autocovariances");
    if (!(sigma2 > 0.0)) throw parameter_error("ar_autocovariances: sigma2 must be positive");
    if (n < 1) throw parameter_error("ar_autocovariances: n must be >= 1");
    const int P = static_cast<int>(phi.size());
    // Yule-Walker: gamma(0) = sum_j phi_j gamma(j) + sigma2,
    //              gamma(k) = sum_j phi_j gamma(|k-j|), 1 <= k <= P.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(P + 1, P + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(P + 1);
    A(0, 0) = 1.0;
    for (int j = 1; j <= P; ++j) A(0, j) -= phi(j - 1);
    rhs(0) = sigma2;
    for (int k = 1; k <= P; ++k) {
        A(k, k) += 1.0;
        for (int j = 1; j <= P; ++j) A(k, std::abs(k - j)) -= phi(j - 1);
    }
    Eigen::VectorXd head = A.fullPivLu().solve(rhs);
    Eigen::VectorXd gamma(n);
    for (int h = 0; h < n; ++h) {
        if (h <= P) {
            gamma(h) = head(h);
        } else {
            double acc = 0.0;
            for (int j = 1; j <= P; ++j) acc += phi(j - 1) * gamma(h - j);
            gamma(h) = acc;
        }
    }
    return gamma;
}

// ---------------------------------------------------------------------------
// ArPrecisionFactor
// ---------------------------------------------------------------------------

ArPrecisionFactor ArPrecisionFactor::build(const Eigen::VectorXd& phi, double sigma2, int N) {
    check_causal(phi, "precision factor");
    const int P = static_cast<int>(phi.size());
    if (N <= P) throw parameter_error("precision factor: need N > P");
    ArPrecisionFactor f;
    f.order = P;
    f.N = N;
    f.phi = phi;
    f.sigma2 = sigma2;
    Eigen::VectorXd gamma = ar_autocovariances(phi, sigma2, P);
    Eigen::MatrixXd sigma_p(P, P);
    for (int i = 0; i < P; ++i)
        for (int j = 0; j < P; ++j) sigma_p(i, j) = gamma(std::abs(i - j));
    Eigen::LLT<Eigen::MatrixXd> llt(sigma_p);
    if (llt.info() != Eigen::Success)
        throw numeric_error("precision factor: head covariance not positive definite");
    // B11 = sigma L^{-1} whitens the first P values: Var(B11 x_{1:P}) = sigma2 I.
    Eigen::MatrixXd L = llt.matrixL();
    f.head = std::sqrt(sigma2) *
             L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(P, P));
    return f;
}

void ArPrecisionFactor::apply_B_rows(Eigen::MatrixXd& M) const {
    const int P = order;
    for (int t = N - 1; t >= P; --t)
        for (int j = 1; j <= P; ++j) M.row(t) -= phi(j - 1) * M.row(t - j);
    Eigen::MatrixXd tmp(P, M.cols());
    for (int t = P - 1; t >= 0; --t) {
        tmp.row(t) = head(t, t) * M.row(t);
        for (int k = 0; k < t; ++k) tmp.row(t) += head(t, k) * M.row(k);
    }
    M.topRows(P) = tmp;
}

void ArPrecisionFactor::apply_Bt_rows(Eigen::MatrixXd& M) const {
    const int P = order;
    for (int t = 0; t < N; ++t) {
        if (t < P) {
            Eigen::RowVectorXd acc = head(t, t) * M.row(t);
            for (int i = t + 1; i < P; ++i) acc += head(i, t) * M.row(i);
            for (int j = 1; j <= P; ++j)
                if (t + j >= P && t + j < N) acc -= phi(j - 1) * M.row(t + j);
            M.row(t) = acc;
        } else {
            for (int j = 1; j <= P; ++j)
                if (t + j < N) M.row(t) -= phi(j - 1) * M.row(t + j);
        }
    }
}

void ArPrecisionFactor::apply_B_cols(Eigen::MatrixXd& M) const {
    const int P = order;
    for (int t = N - 1; t >= P; --t)
        for (int j = 1; j <= P; ++j) M.col(t) -= phi(j - 1) * M.col(t - j);
    Eigen::MatrixXd tmp(M.rows(), P);
    for (int t = P - 1; t >= 0; --t) {
        tmp.col(t) = head(t, t) * M.col(t);
        for (int k = 0; k < t; ++k) tmp.col(t) += head(t, k) * M.col(k);
    }
    M.leftCols(P) = tmp;
}

void ArPrecisionFactor::apply_Bt_cols(Eigen::MatrixXd& M) const {
    const int P = order;
    for (int t = 0; t < N; ++t) {
        if (t < P) {
            Eigen::VectorXd acc = head(t, t) * M.col(t);
            for (int i = t + 1; i < P; ++i) acc += head(i, t) * M.col(i);
            for (int j = 1; j <= P; ++j)
                if (t + j >= P && t + j < N) acc -= phi(j - 1) * M.col(t + j);
            M.col(t) = acc;
        } else {
            for (int j = 1; j <= P; ++j)
                if (t + j < N) M.col(t) -= phi(j - 1) * M.col(t + j);
        }
    }
}

Eigen::MatrixXd ArPrecisionFactor::dense_B() const {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(N, N);
    B.topLeftCorner(order, order) = head;
    for (int t = order; t < N; ++t) {
        B(t, t) = 1.0;
        for (int j = 1; j <= order; ++j) B(t, t - j) = -phi(j - 1);
    }
    return B;
}

Eigen::MatrixXd ArPrecisionFactor::dense_precision() const {
    Eigen::MatrixXd B = dense_B();
    return B.transpose() * B / sigma2;
}

// ---------------------------------------------------------------------------
// SeparableARModel
// ---------------------------------------------------------------------------

void SeparableARModel::validate() const {
    check_causal(phi1, "separable model axis 1");
    check_causal(phi2, "separable model axis 2");
    if (!(sigma12 > 0.0)) throw parameter_error("separable model: sigma12 must be positive");
}

double SeparableARModel::gamma(long h1, long h2) const {
    int n1 = static_cast<int>(std::labs(h1)) + 1;
    int n2 = static_cast<int>(std::labs(h2)) + 1;
    Eigen::VectorXd c1 = ar_autocovariances(phi1, 1.0, n1);
    Eigen::VectorXd c2 = ar_autocovariances(phi2, 1.0, n2);
    return sigma12 * c1(n1 - 1) * c2(n2 - 1);
}

double SeparableARModel::g(double lambda1, double lambda2) const {
    std::vector<double> p1(phi1.data(), phi1.data() + phi1.size());
    std::vector<double> p2(phi2.data(), phi2.data() + phi2.size());
    return sigma12 * ar_spectral_density(lambda1, p1, 1.0) *
           ar_spectral_density(lambda2, p2, 1.0);
}

double SeparableARModel::max_inverse_root() const {
    return std::max(ar_max_inverse_root(phi1), ar_max_inverse_root(phi2));
}

Eigen::MatrixXd SeparableARModel::axis_sigma(int axis, int N) const {
    const Eigen::VectorXd& phi = axis == 1 ? phi1 : phi2;
    Eigen::VectorXd c = ar_autocovariances(phi, 1.0, N);
    Eigen::MatrixXd S(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) S(i, j) = c(std::abs(i - j));
    return S;
}

Eigen::MatrixXd SeparableARModel::dense_sigma(int N) const {
    Eigen::MatrixXd s1 = axis_sigma(1, N);
    Eigen::MatrixXd s2 = axis_sigma(2, N);
    const long n2 = static_cast<long>(N) * N;
    Eigen::MatrixXd out(n2, n2);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            out.block(static_cast<long>(i) * N, static_cast<long>(j) * N, N, N) =
                sigma12 * s1(i, j) * s2;
    return out;
}

// ---------------------------------------------------------------------------
// LSE / GLSE
// ---------------------------------------------------------------------------

Eigen::VectorXd lse(const LatticeDesign& design, const Eigen::VectorXd& y) {
    Eigen::MatrixXd gram = design.X.transpose() * design.X;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) throw singular_error("lse: design has deficient rank");
    return llt.solve(design.X.transpose() * y);
}

void GlseSolver::finish(const LatticeDesign& design, const Eigen::MatrixXd& w) {
    w_ = w;
    normal_.compute(design.X.transpose() * w_);
    if (normal_.info() != Eigen::Success)
        throw singular_error("glse: normal matrix not positive definite");
}

GlseSolver::GlseSolver(const LatticeDesign& design, const Eigen::MatrixXd& sigma) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw numeric_error("glse: covariance factorization failed");
    finish(design, llt.solve(design.X));
}

GlseSolver::GlseSolver(const LatticeDesign& design, const Eigen::LLT<Eigen::MatrixXd>& llt) {
    if (llt.info() != Eigen::Success)
        throw numeric_error("glse: covariance factorization failed");
    finish(design, llt.solve(design.X));
}

Eigen::VectorXd GlseSolver::solve(const Eigen::VectorXd& y) const {
    return normal_.solve(w_.transpose() * y);
}

Eigen::VectorXd glse(const LatticeDesign& design, const Eigen::VectorXd& y,
                     const Eigen::MatrixXd& sigma) {
    return GlseSolver(design, sigma).solve(y);
}

// ---------------------------------------------------------------------------
// PBE
// ---------------------------------------------------------------------------

PbeSolver::PbeSolver(const LatticeDesign& design, const SeparableARModel& sep) : N_(design.N) {
    sep.validate();
    warn_ = sep.max_inverse_root() > 0.999;
    // Unit innovation variances: the estimator is invariant to the overall
    // scale of S~, and sigma12 only matters for the spectral density g.
    f1_ = ArPrecisionFactor::build(sep.phi1, 1.0, N_);
    f2_ = ArPrecisionFactor::build(sep.phi2, 1.0, N_);
    xt_.resize(design.X.rows(), design.X.cols());
    for (int c = 0; c < design.X.cols(); ++c) xt_.col(c) = half_transform(design.X.col(c));
    normal_.compute(xt_.transpose() * xt_);
    if (normal_.info() != Eigen::Success)
        throw singular_error("pbe: normal matrix not positive definite");
}

Eigen::MatrixXd PbeSolver::half_transform(const Eigen::VectorXd& v) const {
    // v reshaped column-major: rows = axis 2 (fast), cols = axis 1 (slow);
    // (B1 (x) B2) v = vec(B2 V B1').
    Eigen::MatrixXd V = Eigen::Map<const Eigen::MatrixXd>(v.data(), N_, N_);
    f2_.apply_B_rows(V);
    f1_.apply_B_cols(V);
    return Eigen::Map<Eigen::MatrixXd>(V.data(), static_cast<long>(N_) * N_, 1);
}

Eigen::VectorXd PbeSolver::solve(const Eigen::VectorXd& y) const {
    if (y.size() != xt_.rows()) throw parameter_error("pbe: y has the wrong length");
    Eigen::MatrixXd yt = half_transform(y);
    return normal_.solve(xt_.transpose() * yt);
}

Eigen::VectorXd PbeSolver::apply_precision(const Eigen::VectorXd& v) const {
    Eigen::MatrixXd V = Eigen::Map<const Eigen::MatrixXd>(v.data(), N_, N_);
    f2_.apply_B_rows(V);
    f2_.apply_Bt_rows(V);
    f1_.apply_B_cols(V);
    f1_.apply_Bt_cols(V);
    return Eigen::Map<Eigen::VectorXd>(V.data(), static_cast<long>(N_) * N_);
}

Eigen::VectorXd pbe(const LatticeDesign& design, const Eigen::VectorXd& y,
                    const SeparableARModel& sep, bool* conditioning_warning) {
    PbeSolver solver(design, sep);
    if (conditioning_warning) *conditioning_warning = solver.conditioning_warning();
    return solver.solve(y);
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd scaled_empirical_covariance(const std::vector<Eigen::VectorXd>& estimates,
                                            const LatticeDesign& design) {
    if (estimates.size() < 2)
        throw parameter_error("scaled_empirical_covariance: need at least 2 estimates");
    const int p = static_cast<int>(estimates.front().size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
    for (const auto& b : estimates) mean += b;
    mean /= static_cast<double>(estimates.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
    for (const auto& b : estimates) {
        Eigen::VectorXd d = b - mean;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(estimates.size() - 1);
    Eigen::MatrixXd D = design.norms.head(p).asDiagonal();
    return D * cov * D;
}

}  // namespace latreg
