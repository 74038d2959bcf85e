#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "latreg/covariance.hpp"

namespace latreg {

struct FieldSample {
    int N = 0;
    Eigen::VectorXd eps;  // length N^2, design row ordering
    std::uint64_t seed = 0;
};

/// Dense N^2 x N^2 covariance with Sigma[(s),(t)] = gamma(s1-t1, s2-t2) under
/// the t1-major row ordering. Guarded by a size cap; separable models at
/// larger N go through the Kronecker path in FieldSampler.
Eigen::MatrixXd assemble_sigma(const CovarianceModel& model, int N, int dense_cap = 128);

/// Draws eps = L z with L L' = Sigma and z i.i.d. standard normal from the
/// seeded stream. Separable models use L = chol(Sigma1) (x) chol(Sigma2)
/// applied by reshape, which consumes the identical z sequence as the dense
/// factor would, so the two paths agree to rounding.
class FieldSampler {
  public:
    FieldSampler(const CovarianceModel& model, int N, int dense_cap = 128);

    FieldSample sample(std::uint64_t seed) const;

    /// Samples `count` replicates with seeds seed0, seed0+1, ...; column r
    /// carries the same normal draws as sample(seed0 + r) and agrees with it
    /// to rounding (the dense path batches the triangular product across
    /// columns). Repeated calls are bit-identical.
    Eigen::MatrixXd sample_block(std::uint64_t seed0, int count) const;

    bool kronecker() const { return kron_; }
    int size() const { return N_; }
    /// Dense covariance and its Cholesky factorization (dense path only);
    /// shared with the GLS solver so the matrix is factored once.
    const Eigen::MatrixXd& dense_sigma() const;
    const Eigen::LLT<Eigen::MatrixXd>& dense_llt() const;

  private:
    int N_;
    bool kron_;
    Eigen::MatrixXd L1_, L2_;       // Kronecker path, N x N lower factors
    Eigen::MatrixXd sigma_;         // dense path
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// One-shot convenience wrapper.
FieldSample sample_field(const CovarianceModel& model, int N, std::uint64_t seed);

}  // namespace latreg
