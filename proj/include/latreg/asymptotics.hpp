#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "latreg/design.hpp"

namespace latreg {

using SpectralFn = std::function<double(double, double)>;

/// Limit of the D-scaled estimator covariances over an atomic regression
/// spectral measure. All integrals reduce to sums over the atoms.
///
///   GLSE: (2 pi)^2 (sum_k m_k / f_k)^{-1}
///   LSE : (2 pi)^2 R00^{-1} (sum_k m_k f_k) R00^{-1}
///   PBE : (2 pi)^2 A^{-1} C A^{-1},  A = sum_k m_k / g_k,  C = sum_k m_k f_k / g_k^2
Eigen::MatrixXd asym_cov_glse(const SpectralFn& f, const JumpMeasure& jumps);
Eigen::MatrixXd asym_cov_lse(const SpectralFn& f, const JumpMeasure& jumps,
                             const Eigen::MatrixXd& R00);
Eigen::MatrixXd asym_cov_pbe(const SpectralFn& f, const SpectralFn& g, const JumpMeasure& jumps);

struct TheoreticalRatios {
    double lse_ratio;
    double pbe_ratio;
};

/// Scalar (p = 1) asymptotic-variance ratios LSE/GLSE and PBE/GLSE.
TheoreticalRatios theoretical_ratios(const SpectralFn& f, const SpectralFn& g,
                                     const JumpMeasure& jumps, const Eigen::MatrixXd& R00);

/// Diagnostic form of the efficiency condition for p = 1: the measure
/// increases at no more than one point of [0, pi]^2 (counting the symmetric
/// images of an atom as one). Annotates reports only; never asserted.
bool lse_efficiency_condition(const JumpMeasure& jumps);

struct AsymptoticResult {
    std::string estimator;
    Eigen::MatrixXd cov;
    std::vector<double> f_at_atoms;
    std::vector<double> g_at_atoms;
};

/// All three limits with the spectral values they consumed at each atom.
std::vector<AsymptoticResult> evaluate_asymptotics(const SpectralFn& f, const SpectralFn& g,
                                                   const JumpMeasure& jumps,
                                                   const Eigen::MatrixXd& R00);

}  // namespace latreg
