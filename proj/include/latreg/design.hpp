#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "latreg/errors.hpp"

namespace latreg {

enum class RegressorKind { Polynomial, Harmonic, PolyPlusHarmonic };

std::string to_string(RegressorKind k);
RegressorKind regressor_from_string(const std::string& name);

/// Deterministic regressor value at lattice point (t1, t2), 1-based.
/// Polynomial: t1 t2. Harmonic: cos(pi t1 / 2) cos(pi t2 / 2), evaluated
/// exactly through the mod-4 cycle {1, 0, -1, 0}. PolyPlusHarmonic: 1 + the
/// harmonic value.
double regressor_value(RegressorKind kind, long t1, long t2);

/// Design matrix on the N x N lattice. Row ordering is t1-major with t2
/// fastest: (1,1),(1,2),...,(1,N),(2,1),...,(N,N); all Kronecker identities
/// downstream rely on this single convention.
struct LatticeDesign {
    RegressorKind kind;
    int N = 0;
    int p = 0;
    Eigen::MatrixXd X;      // N^2 x p
    Eigen::VectorXd norms;  // column norms, the diagonal of D_{N^2}

    static LatticeDesign build(RegressorKind kind, int N);
    long row(long t1, long t2) const { return (t1 - 1) * N + (t2 - 1); }
};

/// Lagged design cross-product a_ij^{(N,N)}(h1, h2): the four-quadrant sum of
/// x_{(t+h),i} x_{t,j} over the (N-|h1|)(N-|h2|) in-lattice pairs.
double grenander_coeff(const LatticeDesign& d, int i, int j, long h1, long h2);

/// a_ij(h) / sqrt(a_ii(0) a_jj(0)).
double grenander_correlation(const LatticeDesign& d, int i, int j, long h1, long h2);

/// Grenander correlation with the (1-|h1|/N)(1-|h2|/N) edge factor divided
/// out, i.e. per-pair means; same N -> infinity limit, O(1/N^2) closer at
/// finite N, which is what the characteristic-function checks need.
double grenander_correlation_compensated(const LatticeDesign& d, int i, int j, long h1, long h2);

/// Atomic regression spectral measure: finitely many (frequency, mass) pairs.
/// Masses also carry an exact rational representation for p = 1.
struct JumpMeasure {
    struct Atom {
        double lambda1, lambda2;
        Eigen::MatrixXd mass;  // p x p, positive semidefinite
        long num = 0, den = 1;
    };
    std::vector<Atom> atoms;
    int p = 1;

    /// Characteristic function sum_k mass_k e^{i(h1 l1 + h2 l2)}; real for the
    /// symmetric atom sets used here.
    Eigen::MatrixXd char_fn(long h1, long h2) const;
    double char_fn_scalar(long h1, long h2) const;
};

/// Analytic jump sets of the three regressors (p = 1):
///   Polynomial:       mass 1 at (0,0)
///   Harmonic:         mass 1/4 at each of (+-pi/2, +-pi/2)
///   PolyPlusHarmonic: mass 4/5 at (0,0), 1/20 at each of (+-pi/2, +-pi/2)
JumpMeasure jump_measure(RegressorKind kind);

}  // namespace latreg
