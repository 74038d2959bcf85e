#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "latreg/design.hpp"

using namespace latreg;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("regressor values at lattice points") {
    CHECK(regressor_value(RegressorKind::Polynomial, 3, 4) == 12.0);
    CHECK(regressor_value(RegressorKind::Harmonic, 2, 2) == 1.0);  // cos(pi)^2
    CHECK(regressor_value(RegressorKind::Harmonic, 1, 2) == 0.0);
    CHECK(regressor_value(RegressorKind::Harmonic, 4, 4) == 1.0);
    CHECK(regressor_value(RegressorKind::PolyPlusHarmonic, 1, 1) == 1.0);
    CHECK(regressor_value(RegressorKind::PolyPlusHarmonic, 2, 2) == 2.0);
}

TEST_CASE("design matrix layout and norms") {
    LatticeDesign d = LatticeDesign::build(RegressorKind::Polynomial, 4);
    CHECK(d.p == 1);
    CHECK(d.X.rows() == 16);
    // row of (t1, t2) is (t1-1) N + t2 - 1: t2 is the fast index
    CHECK(d.X(d.row(1, 2), 0) == 2.0);
    CHECK(d.X(d.row(2, 1), 0) == 2.0);
    CHECK(d.X(d.row(3, 4), 0) == 12.0);
    double sq = 0.0;
    for (long t1 = 1; t1 <= 4; ++t1)
        for (long t2 = 1; t2 <= 4; ++t2) sq += double(t1 * t2) * double(t1 * t2);
    CHECK(d.norms(0) == doctest::Approx(std::sqrt(sq)).epsilon(1e-14));
}

TEST_CASE("grenander coefficient at lag zero is the squared norm") {
    for (auto kind : {RegressorKind::Polynomial, RegressorKind::Harmonic,
                      RegressorKind::PolyPlusHarmonic}) {
        LatticeDesign d = LatticeDesign::build(kind, 12);
        CHECK(grenander_coeff(d, 0, 0, 0, 0) ==
              doctest::Approx(d.norms(0) * d.norms(0)).epsilon(1e-13));
    }
}

TEST_CASE("grenander coefficient counts lattice pairs") {
    // a constant regressor turns the lag sum into a pair count
    LatticeDesign d = LatticeDesign::build(RegressorKind::PolyPlusHarmonic, 4);
    d.X.setOnes();
    d.norms = d.X.colwise().norm();
    CHECK(grenander_coeff(d, 0, 0, 1, 1) == doctest::Approx(9.0).epsilon(1e-13));
    CHECK(grenander_coeff(d, 0, 0, -2, 3) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK_THROWS_AS(grenander_coeff(d, 0, 0, 4, 0), parameter_error);
}

TEST_CASE("four-quadrant symmetry of the lag sum") {
    LatticeDesign d = LatticeDesign::build(RegressorKind::PolyPlusHarmonic, 9);
    for (long h1 : {-3L, 0L, 2L})
        for (long h2 : {-2L, 1L})
            CHECK(grenander_coeff(d, 0, 0, h1, h2) ==
                  doctest::Approx(grenander_coeff(d, 0, 0, -h1, -h2)).epsilon(1e-13));
}

TEST_CASE("harmonic lag-(2,0) correlation approaches cos(pi) = -1") {
    LatticeDesign d = LatticeDesign::build(RegressorKind::Harmonic, 60);
    CHECK(grenander_correlation_compensated(d, 0, 0, 2, 0) ==
          doctest::Approx(-1.0).epsilon(1e-12));
    // raw version carries the (1 - 2/N) edge factor
    CHECK(grenander_correlation(d, 0, 0, 2, 0) ==
          doctest::Approx(-1.0 * (1.0 - 2.0 / 60.0)).epsilon(1e-12));
}

TEST_CASE("jump measures: masses, symmetry, exact total") {
    auto total_rational = [](const JumpMeasure& m) {
        long num = 0, den = 1;
        for (const auto& a : m.atoms) {
            num = num * a.den + a.num * den;
            den *= a.den;
        }
        return std::pair<long, long>(num, den);
    };
    JumpMeasure poly = jump_measure(RegressorKind::Polynomial);
    CHECK(poly.atoms.size() == 1);
    CHECK(poly.atoms[0].mass(0, 0) == 1.0);
    CHECK(poly.atoms[0].lambda1 == 0.0);

    JumpMeasure harm = jump_measure(RegressorKind::Harmonic);
    CHECK(harm.atoms.size() == 4);
    for (const auto& a : harm.atoms) {
        CHECK(a.mass(0, 0) == doctest::Approx(0.25));
        CHECK(std::abs(a.lambda1) == doctest::Approx(kPi / 2));
        CHECK(std::abs(a.lambda2) == doctest::Approx(kPi / 2));
    }

    JumpMeasure mix = jump_measure(RegressorKind::PolyPlusHarmonic);
    CHECK(mix.atoms.size() == 5);
    CHECK(mix.atoms[0].mass(0, 0) == doctest::Approx(0.8));
    CHECK(mix.atoms[1].mass(0, 0) == doctest::Approx(0.05));

    for (const auto& m : {poly, harm, mix}) {
        auto [num, den] = total_rational(m);
        CHECK(num == den);  // total mass is exactly 1 in rational arithmetic
        for (const auto& a : m.atoms) CHECK(a.mass(0, 0) >= 0.0);
    }
}

TEST_CASE("characteristic function consistency at N=200") {
    // the compensated estimate divides out the (1-|h1|/N)(1-|h2|/N) edge
    // factor, which alone would exceed the tolerance at the largest lags
    for (auto kind : {RegressorKind::Polynomial, RegressorKind::Harmonic,
                      RegressorKind::PolyPlusHarmonic}) {
        LatticeDesign d = LatticeDesign::build(kind, 200);
        JumpMeasure m = jump_measure(kind);
        for (long h1 = -4; h1 <= 4; ++h1) {
            for (long h2 = -4; h2 <= 4; ++h2) {
                if (h1 * h1 + h2 * h2 > 16) continue;  // lag ball |h| <= 4
                double limit = m.char_fn_scalar(h1, h2);
                double emp = grenander_correlation_compensated(d, 0, 0, h1, h2);
                CHECK(emp == doctest::Approx(limit).epsilon(0.02).scale(0.02));
            }
        }
    }
}

TEST_CASE("growth condition: a(0,0) ratio between successive N tends to 1") {
    for (auto kind : {RegressorKind::Polynomial, RegressorKind::Harmonic,
                      RegressorKind::PolyPlusHarmonic}) {
        LatticeDesign d100 = LatticeDesign::build(kind, 100);
        LatticeDesign d101 = LatticeDesign::build(kind, 101);
        double ratio = grenander_coeff(d101, 0, 0, 0, 0) / grenander_coeff(d100, 0, 0, 0, 0);
        CHECK(ratio == doctest::Approx(1.0).epsilon(0.10));
        CHECK(ratio >= 1.0);
    }
}
