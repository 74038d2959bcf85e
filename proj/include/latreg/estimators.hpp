#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "latreg/covariance.hpp"
#include "latreg/design.hpp"

namespace latreg {

/// Stationary autocovariances gamma(0..n-1) of a causal AR(P) with
/// coefficients phi and innovation variance sigma2, from the Yule-Walker
/// linear system plus the defining recursion. Independent of the closed-form
/// kernels in covariance.hpp, so the two act as cross-checks.
Eigen::VectorXd ar_autocovariances(const Eigen::VectorXd& phi, double sigma2, int n);

/// Reciprocal characteristic roots have modulus < 1 for a causal AR; this is
/// max_j |1/xi_j|, used for conditioning diagnostics.
double ar_max_inverse_root(const Eigen::VectorXd& phi);

/// Banded factor B with Sigma_AR^{-1} = B' B / sigma2. Rows P+1..N carry the
/// AR filter (-phi_P, ..., -phi_1, 1) ending on the diagonal; the leading
/// P x P block is sigma * L^{-1} with L the lower Cholesky factor of the
/// order-P stationary autocovariance matrix.
struct ArPrecisionFactor {
    int order = 0;
    int N = 0;
    Eigen::VectorXd phi;
    double sigma2 = 1.0;
    Eigen::MatrixXd head;  // order x order, lower triangular

    static ArPrecisionFactor build(const Eigen::VectorXd& phi, double sigma2, int N);

    // In-place banded products on an N x k (rows) or k x N (cols) array.
    void apply_B_rows(Eigen::MatrixXd& M) const;   // M <- B M
    void apply_Bt_rows(Eigen::MatrixXd& M) const;  // M <- B' M
    void apply_B_cols(Eigen::MatrixXd& M) const;   // M <- M B'
    void apply_Bt_cols(Eigen::MatrixXd& M) const;  // M <- M B

    Eigen::MatrixXd dense_B() const;
    Eigen::MatrixXd dense_precision() const;  // B'B / sigma2
};

/// Separable AR approximation: gamma(h1,h2) = sigma12 * c1(h1) c2(h2) with
/// c_i the unit-innovation AR autocovariances, and spectral density
/// g = g1 g2 carrying the product innovation scale sigma12.
struct SeparableARModel {
    Eigen::VectorXd phi1, phi2;  // per-axis causal AR coefficients, orders in {1,2}
    double sigma12 = 1.0;

    void validate() const;
    int order1() const { return static_cast<int>(phi1.size()); }
    int order2() const { return static_cast<int>(phi2.size()); }

    double gamma(long h1, long h2) const;
    double g(double lambda1, double lambda2) const;
    double max_inverse_root() const;

    /// Dense N^2 x N^2 covariance (tests and the reference GLSE oracle).
    Eigen::MatrixXd dense_sigma(int N) const;
    Eigen::MatrixXd axis_sigma(int axis, int N) const;
};

Eigen::VectorXd lse(const LatticeDesign& design, const Eigen::VectorXd& y);
Eigen::VectorXd glse(const LatticeDesign& design, const Eigen::VectorXd& y,
                     const Eigen::MatrixXd& sigma);

/// GLS with a cached factorization; per-sample work is two small products.
class GlseSolver {
  public:
    GlseSolver(const LatticeDesign& design, const Eigen::MatrixXd& sigma);
    GlseSolver(const LatticeDesign& design, const Eigen::LLT<Eigen::MatrixXd>& llt);
    Eigen::VectorXd solve(const Eigen::VectorXd& y) const;

  private:
    void finish(const LatticeDesign& design, const Eigen::MatrixXd& w);
    Eigen::MatrixXd w_;  // Sigma^{-1} X
    Eigen::LLT<Eigen::MatrixXd> normal_;
};

/// Pseudo best estimator (X' S~^{-1} X)^{-1} X' S~^{-1} y without ever
/// materializing S~ = S1 (x) S2: every application reshapes the vector to an
/// N x N array and runs the banded two-sided products from the precision
/// factors. X is transformed once at construction.
class PbeSolver {
  public:
    PbeSolver(const LatticeDesign& design, const SeparableARModel& sep);

    Eigen::VectorXd solve(const Eigen::VectorXd& y) const;

    /// S~^{-1} v under the unit-innovation scaling (estimates are invariant
    /// to the overall scale of S~).
    Eigen::VectorXd apply_precision(const Eigen::VectorXd& v) const;

    /// True when a fitted axis is close to a unit root (max |1/xi| > 0.999)
    /// and the solve may be ill-conditioned.
    bool conditioning_warning() const { return warn_; }

  private:
    Eigen::MatrixXd half_transform(const Eigen::VectorXd& v) const;  // (B1 (x) B2) v reshaped
    int N_;
    ArPrecisionFactor f1_, f2_;
    Eigen::MatrixXd xt_;  // half-transformed design columns
    Eigen::LLT<Eigen::MatrixXd> normal_;
    bool warn_ = false;
};

Eigen::VectorXd pbe(const LatticeDesign& design, const Eigen::VectorXd& y,
                    const SeparableARModel& sep, bool* conditioning_warning = nullptr);

/// D_{N^2} SampleCov(estimates) D_{N^2}: the scaling under which estimator
/// covariances converge to the Theorem limits.
Eigen::MatrixXd scaled_empirical_covariance(const std::vector<Eigen::VectorXd>& estimates,
                                            const LatticeDesign& design);

}  // namespace latreg
