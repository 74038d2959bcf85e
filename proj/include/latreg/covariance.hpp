#pragma once

#include <Eigen/Core>

#include <complex>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "latreg/errors.hpp"

namespace latreg {

// ---------------------------------------------------------------------------
// Kernel parameter types
// ---------------------------------------------------------------------------

/// Matern kernel c(x) = sigma2 / (2^(nu-1) Gamma(nu)) (2 sqrt(nu) |x| / rho)^nu
///                              * K_nu(2 sqrt(nu) |x| / rho).
struct MaternParams {
    double nu;      ///< smoothness, > 0
    double rho;     ///< range in lattice units, > 0
    double sigma2;  ///< variance, > 0; equals c(0)
    void validate() const;
};

/// Causal AR(1): autocovariance sigma2 / (1 - phi^2) * phi^|h|.
struct Ar1Params {
    double phi;
    double sigma2;
    void validate() const;
    /// sigma2 chosen so the lag-0 autocovariance is 1.
    static Ar1Params normalized(double phi);
};

/// Causal AR(2) identified by the reciprocal-root pair of phi(z) = 1 - a z - b z^2.
/// Both roots must lie strictly outside the unit disk and the pair must be
/// closed under conjugation (or both real).
struct Ar2Params {
    std::complex<double> xi1, xi2;
    double sigma2;
    void validate() const;
    double a() const;  ///< phi(z) = 1 - a z - b z^2
    double b() const;
    static Ar2Params from_coeffs(double a, double b, double sigma2);
    /// sigma2 chosen so the lag-0 autocovariance is 1.
    static Ar2Params normalized(std::complex<double> xi1, std::complex<double> xi2);
};

struct Matern1d {
    MaternParams p;
};

using Kernel1d = std::variant<Matern1d, Ar1Params, Ar2Params>;

struct IsotropicMatern {
    MaternParams p;
};

struct ProductKernel {
    Kernel1d axis1, axis2;
};

/// Stationary lattice covariance gamma(h1, h2): either an isotropic Matern in
/// the Euclidean lag distance or a product of one-dimensional kernels.
struct CovarianceModel {
    std::variant<IsotropicMatern, ProductKernel> kind;

    double gamma(long h1, long h2) const;
    bool separable() const { return std::holds_alternative<ProductKernel>(kind); }
    const ProductKernel& product() const { return std::get<ProductKernel>(kind); }
};

// ---------------------------------------------------------------------------
// Kernel evaluation
// ---------------------------------------------------------------------------

double matern_cov(double x, const MaternParams& p);
double ar1_autocov(long h, const Ar1Params& p);
double ar2_autocov(long h, const Ar2Params& p);
double kernel1d_autocov(const Kernel1d& k, long h);

/// (a, b) of phi(z) = 1 - a z - b z^2 from the root pair, and back. Round
/// trips are identities to ~1e-12. b = 0 raises degenerate_root_error.
std::pair<double, double> ar_coeffs_from_roots(std::complex<double> xi1,
                                               std::complex<double> xi2);
std::pair<std::complex<double>, std::complex<double>> ar_roots_from_coeffs(double a, double b);

/// One-dimensional AR(P) spectral density sigma2 / (2 pi) |phi(e^{-i lambda})|^{-2}.
double ar_spectral_density(double lambda, const std::vector<double>& phi, double sigma2);

// ---------------------------------------------------------------------------
// Aliased lattice spectral density
// ---------------------------------------------------------------------------

/// Folded spectral density of the lattice-sampled process,
///   f(l1, l2) = (2 pi)^-2 sum_{|h1|,|h2| <= H} gamma(h1, h2) e^{-i(h1 l1 + h2 l2)},
/// real by evenness of gamma. A non-positive value signals that H was too
/// small for this model.
double lattice_spectral_density(double lambda1, double lambda2, const CovarianceModel& m,
                                int truncation);

/// Smallest H whose covariance tail is dead: |gamma(h,0)| + |gamma(0,h)| stays
/// below tol on a short trailing window (the window guards against zeros of
/// oscillating AR(2) tails). Throws truncation_error beyond the cap.
int adaptive_truncation(const CovarianceModel& m, double tol = 1e-12, int cap = 512);

/// Precomputed evaluator for the folded density; product models factor into
/// two one-dimensional cosine series, isotropic models keep the full table.
class FoldedSpectrum {
  public:
    FoldedSpectrum(const CovarianceModel& m, int truncation);
    static FoldedSpectrum adaptive(const CovarianceModel& m);

    double operator()(double lambda1, double lambda2) const;
    int truncation() const { return trunc_; }

  private:
    int trunc_;
    bool product_;
    std::vector<double> c1_, c2_;  // axis autocovariances at lags 0..H
    Eigen::MatrixXd table_;        // gamma(h1, h2), h >= 0 quadrant
};

// ---------------------------------------------------------------------------
// Benchmark model catalog (all normalized to gamma(0,0) = 1)
// ---------------------------------------------------------------------------

enum class ModelId {
    Matern2,          // isotropic Matern nu=2, rho=3
    Matern1,          // isotropic Matern nu=1, rho=3
    Matern2xMatern1,  // product of 1-D Materns nu=2 and nu=1
    Matern1xAr2,      // 1-D Matern nu=1 times AR(2)
    Ar1xAr2,          // AR(1) phi=0.5 times AR(2)
    Ar1xAr1,          // AR(1) phi=0.9 on both axes
};

CovarianceModel reference_model(ModelId id);
/// The benchmark AR(2) root pair (2/3)(1 ± sqrt(3) i).
std::pair<std::complex<double>, std::complex<double>> reference_ar2_roots();

const std::vector<ModelId>& all_model_ids();
std::string to_string(ModelId id);
ModelId model_id_from_string(const std::string& name);

}  // namespace latreg
