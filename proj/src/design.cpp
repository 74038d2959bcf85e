#include "latreg/design.hpp"

#include <cmath>
#include <cstdlib>

namespace latreg {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// cos(pi t / 2) at integer t, exact.
double quarter_cos(long t) {
    switch (((t % 4) + 4) % 4) {
        case 0: return 1.0;
        case 2: return -1.0;
        default: return 0.0;
    }
}

}  // namespace

std::string to_string(RegressorKind k) {
    switch (k) {
        case RegressorKind::Polynomial: return "poly";
        case RegressorKind::Harmonic: return "harmonic";
        case RegressorKind::PolyPlusHarmonic: return "poly+harmonic";
    }
    return "unknown";
}

RegressorKind regressor_from_string(const std::string& name) {
    if (name == "poly" || name == "polynomial") return RegressorKind::Polynomial;
    if (name == "harmonic") return RegressorKind::Harmonic;
    if (name == "poly+harmonic" || name == "polyharmonic" || name == "poly_plus_harmonic")
        return RegressorKind::PolyPlusHarmonic;
    throw config_error("unknown regressor kind: " + name);
}

double regressor_value(RegressorKind kind, long t1, long t2) {
    switch (kind) {
        case RegressorKind::Polynomial:
            return static_cast<double>(t1) * static_cast<double>(t2);
        case RegressorKind::Harmonic:
            return quarter_cos(t1) * quarter_cos(t2);
        case RegressorKind::PolyPlusHarmonic:
            return 1.0 + quarter_cos(t1) * quarter_cos(t2);
    }
    return 0.0;
}

LatticeDesign LatticeDesign::build(RegressorKind kind, int N) {
    if (N < 2) throw parameter_error("design: N must be >= 2");
    LatticeDesign d;
    d.kind = kind;
    d.N = N;
    d.p = 1;
    d.X.resize(static_cast<long>(N) * N, 1);
    for (long t1 = 1; t1 <= N; ++t1)
        for (long t2 = 1; t2 <= N; ++t2) d.X(d.row(t1, t2), 0) = regressor_value(kind, t1, t2);
    d.norms = d.X.colwise().norm();
    for (int i = 0; i < d.p; ++i)
        if (!(d.norms(i) > 0.0)) throw singular_error("design: zero column norm");
    return d;
}

double grenander_coeff(const LatticeDesign& d, int i, int j, long h1, long h2) {
    const long N = d.N;
    if (std::labs(h1) >= N || std::labs(h2) >= N)
        throw parameter_error("grenander: |h| must be < N");
    const long lo1 = std::max(1L, 1L - h1), hi1 = std::min(N, N - h1);
    const long lo2 = std::max(1L, 1L - h2), hi2 = std::min(N, N - h2);
    double acc = 0.0;
    for (long t1 = lo1; t1 <= hi1; ++t1)
        for (long t2 = lo2; t2 <= hi2; ++t2)
            acc += d.X(d.row(t1 + h1, t2 + h2), i) * d.X(d.row(t1, t2), j);
    return acc;
}

double grenander_correlation(const LatticeDesign& d, int i, int j, long h1, long h2) {
    double a00i = grenander_coeff(d, i, i, 0, 0);
    double a00j = grenander_coeff(d, j, j, 0, 0);
    return grenander_coeff(d, i, j, h1, h2) / std::sqrt(a00i * a00j);
}

double grenander_correlation_compensated(const LatticeDesign& d, int i, int j, long h1,
                                         long h2) {
    const double N = d.N;
    double pairs = (N - std::labs(h1)) * (N - std::labs(h2));
    return grenander_correlation(d, i, j, h1, h2) * (N * N) / pairs;
}

Eigen::MatrixXd JumpMeasure::char_fn(long h1, long h2) const {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(p, p);
    for (const auto& atom : atoms)
        acc += atom.mass * std::cos(h1 * atom.lambda1 + h2 * atom.lambda2);
    return acc;
}

double JumpMeasure::char_fn_scalar(long h1, long h2) const { return char_fn(h1, h2)(0, 0); }

JumpMeasure jump_measure(RegressorKind kind) {
    auto scalar = [](double v) { return Eigen::MatrixXd::Constant(1, 1, v); };
    const double half_pi = kPi / 2.0;
    JumpMeasure m;
    m.p = 1;
    auto corner_atoms = [&](long num, long den) {
        for (double s1 : {1.0, -1.0})
            for (double s2 : {1.0, -1.0})
                m.atoms.push_back({s1 * half_pi, s2 * half_pi,
                                   scalar(static_cast<double>(num) / den), num, den});
    };
    switch (kind) {
        case RegressorKind::Polynomial:
            m.atoms.push_back({0.0, 0.0, scalar(1.0), 1, 1});
            break;
        case RegressorKind::Harmonic:
            corner_atoms(1, 4);
            break;
        case RegressorKind::PolyPlusHarmonic:
            m.atoms.push_back({0.0, 0.0, scalar(4.0 / 5.0), 4, 5});
            corner_atoms(1, 20);
            break;
    }
    return m;
}

}  // namespace latreg
