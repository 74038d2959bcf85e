#include "latreg/asymptotics.hpp"

#include <cmath>

namespace latreg {

namespace {

constexpr double kTwoPiSq = 4.0 * 3.14159265358979323846 * 3.14159265358979323846;

double positive_at_atom(const SpectralFn& fn, const JumpMeasure::Atom& atom, const char* name) {
    double v = fn(atom.lambda1, atom.lambda2);
    if (!(v > 0.0))
        throw singular_error(std::string(name) + ": spectral density not positive at an atom");
    return v;
}

Eigen::MatrixXd invert_spd(const Eigen::MatrixXd& A, const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
        throw singular_error(std::string(what) + ": atom sum is not positive definite");
    return llt.solve(Eigen::MatrixXd::Identity(A.rows(), A.cols()));
}

}  // namespace

Eigen::MatrixXd asym_cov_glse(const SpectralFn& f, const JumpMeasure& jumps) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(jumps.p, jumps.p);
    for (const auto& atom : jumps.atoms) acc += atom.mass / positive_at_atom(f, atom, "glse");
    return kTwoPiSq * invert_spd(acc, "glse");
}

Eigen::MatrixXd asym_cov_lse(const SpectralFn& f, const JumpMeasure& jumps,
                             const Eigen::MatrixXd& R00) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(jumps.p, jumps.p);
    for (const auto& atom : jumps.atoms) acc += atom.mass * positive_at_atom(f, atom, "lse");
    Eigen::MatrixXd R00inv = invert_spd(R00, "lse R(0,0)");
    return kTwoPiSq * R00inv * acc * R00inv;
}

Eigen::MatrixXd asym_cov_pbe(const SpectralFn& f, const SpectralFn& g,
                             const JumpMeasure& jumps) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(jumps.p, jumps.p);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(jumps.p, jumps.p);
    for (const auto& atom : jumps.atoms) {
        double fv = positive_at_atom(f, atom, "pbe");
        double gv = positive_at_atom(g, atom, "pbe");
        a += atom.mass / gv;
        c += atom.mass * (fv / (gv * gv));
    }
    Eigen::MatrixXd ainv = invert_spd(a, "pbe");
    return kTwoPiSq * ainv * c * ainv;
}

TheoreticalRatios theoretical_ratios(const SpectralFn& f, const SpectralFn& g,
                                     const JumpMeasure& jumps, const Eigen::MatrixXd& R00) {
    if (jumps.p != 1) throw parameter_error("theoretical_ratios: defined for p = 1");
    double glse = asym_cov_glse(f, jumps)(0, 0);
    double lse = asym_cov_lse(f, jumps, R00)(0, 0);
    double pbev = asym_cov_pbe(f, g, jumps)(0, 0);
    return {lse / glse, pbev / glse};
}

std::vector<AsymptoticResult> evaluate_asymptotics(const SpectralFn& f, const SpectralFn& g,
                                                   const JumpMeasure& jumps,
                                                   const Eigen::MatrixXd& R00) {
    std::vector<double> fv, gv;
    for (const auto& atom : jumps.atoms) {
        fv.push_back(f(atom.lambda1, atom.lambda2));
        gv.push_back(g(atom.lambda1, atom.lambda2));
    }
    return {{"glse", asym_cov_glse(f, jumps), fv, {}},
            {"lse", asym_cov_lse(f, jumps, R00), fv, {}},
            {"pbe", asym_cov_pbe(f, g, jumps), fv, gv}};
}

bool lse_efficiency_condition(const JumpMeasure& jumps) {
    if (jumps.p != 1) return false;
    // Count atoms folded into [0, pi]^2; the four symmetric images of a
    // corner atom fold onto one point.
    std::vector<std::pair<double, double>> folded;
    for (const auto& atom : jumps.atoms) {
        double l1 = std::abs(atom.lambda1), l2 = std::abs(atom.lambda2);
        bool seen = false;
        for (auto& q : folded)
            if (std::abs(q.first - l1) < 1e-12 && std::abs(q.second - l2) < 1e-12) seen = true;
        if (!seen) folded.emplace_back(l1, l2);
    }
    return folded.size() <= 1;
}

}  // namespace latreg
