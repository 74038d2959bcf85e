#include "latreg/sampler.hpp"

#include <cmath>

#include "latreg/rng.hpp"

namespace latreg {

namespace {

Eigen::MatrixXd axis_toeplitz(const Kernel1d& k, int N) {
    Eigen::VectorXd c(N);
    for (int h = 0; h < N; ++h) c(h) = kernel1d_autocov(k, h);
    Eigen::MatrixXd S(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) S(i, j) = c(std::abs(i - j));
    return S;
}

Eigen::MatrixXd lower_cholesky(const Eigen::MatrixXd& S, const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success)
        throw numeric_error(std::string(what) + ": covariance not positive definite");
    return llt.matrixL();
}

}  // namespace

Eigen::MatrixXd assemble_sigma(const CovarianceModel& model, int N, int dense_cap) {
    if (N < 1) throw parameter_error("assemble_sigma: N must be >= 1");
    if (N > dense_cap)
        throw size_error("assemble_sigma: N exceeds the dense cap, use the Kronecker path");
    // gamma depends on the lag only; tabulate once and fill by lookup.
    Eigen::MatrixXd lag(2 * N - 1, 2 * N - 1);
    for (long h1 = -(N - 1); h1 <= N - 1; ++h1)
        for (long h2 = -(N - 1); h2 <= N - 1; ++h2)
            lag(h1 + N - 1, h2 + N - 1) = model.gamma(h1, h2);
    const long n2 = static_cast<long>(N) * N;
    Eigen::MatrixXd sigma(n2, n2);
    for (long s1 = 0; s1 < N; ++s1)
        for (long s2 = 0; s2 < N; ++s2) {
            const long r = s1 * N + s2;
            for (long t1 = 0; t1 < N; ++t1) {
                const long base = t1 * N;
                const long i1 = s1 - t1 + N - 1;
                for (long t2 = 0; t2 < N; ++t2)
                    sigma(r, base + t2) = lag(i1, s2 - t2 + N - 1);
            }
        }
    return sigma;
}

FieldSampler::FieldSampler(const CovarianceModel& model, int N, int dense_cap)
    : N_(N), kron_(model.separable()) {
    if (N < 1) throw parameter_error("sampler: N must be >= 1");
    if (kron_) {
        L1_ = lower_cholesky(axis_toeplitz(model.product().axis1, N), "sampler axis 1");
        L2_ = lower_cholesky(axis_toeplitz(model.product().axis2, N), "sampler axis 2");
    } else {
        sigma_ = assemble_sigma(model, N, dense_cap);
        llt_.compute(sigma_);
        if (llt_.info() != Eigen::Success)
            throw numeric_error("sampler: covariance not positive definite");
    }
}

const Eigen::MatrixXd& FieldSampler::dense_sigma() const {
    if (kron_) throw error("sampler: dense covariance not kept on the Kronecker path");
    return sigma_;
}

const Eigen::LLT<Eigen::MatrixXd>& FieldSampler::dense_llt() const {
    if (kron_) throw error("sampler: dense factorization not kept on the Kronecker path");
    return llt_;
}

FieldSample FieldSampler::sample(std::uint64_t seed) const {
    const long n2 = static_cast<long>(N_) * N_;
    Eigen::VectorXd z(n2);
    NormalStream ns(seed);
    ns.fill(z);
    FieldSample out;
    out.N = N_;
    out.seed = seed;
    if (kron_) {
        // (L1 (x) L2) z = vec(L2 Z L1') with z reshaped column-major,
        // rows = axis 2 (fast index), columns = axis 1.
        Eigen::Map<const Eigen::MatrixXd> Z(z.data(), N_, N_);
        Eigen::MatrixXd E = L2_.triangularView<Eigen::Lower>() * Z;
        E = E * L1_.triangularView<Eigen::Lower>().transpose();
        out.eps = Eigen::Map<Eigen::VectorXd>(E.data(), n2);
    } else {
        out.eps = llt_.matrixL() * z;
    }
    return out;
}

Eigen::MatrixXd FieldSampler::sample_block(std::uint64_t seed0, int count) const {
    const long n2 = static_cast<long>(N_) * N_;
    Eigen::MatrixXd Z(n2, count);
    for (int r = 0; r < count; ++r) {
        NormalStream ns(seed0 + static_cast<std::uint64_t>(r));
        auto col = Z.col(r);
        ns.fill(col);
    }
    if (kron_) {
        Eigen::MatrixXd out(n2, count);
        for (int r = 0; r < count; ++r) {
            Eigen::Map<const Eigen::MatrixXd> Zr(Z.col(r).data(), N_, N_);
            Eigen::MatrixXd E = L2_.triangularView<Eigen::Lower>() * Zr;
            E = E * L1_.triangularView<Eigen::Lower>().transpose();
            out.col(r) = Eigen::Map<Eigen::VectorXd>(E.data(), n2);
        }
        return out;
    }
    return llt_.matrixL() * Z;
}

FieldSample sample_field(const CovarianceModel& model, int N, std::uint64_t seed) {
    return FieldSampler(model, N).sample(seed);
}

}  // namespace latreg
