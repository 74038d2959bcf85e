#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>

namespace latreg {

/// Deterministic stream of standard normals. The engine is the fully
/// specified std::mt19937_64 and the normal transform is an explicit
/// Box-Muller, so a given seed yields the same stream on every standard
/// library implementation. Replicate r of an experiment uses seed
/// base_seed + r, which keeps replicates independent and parallelizable.
class NormalStream {
  public:
    explicit NormalStream(std::uint64_t seed) : eng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0,1]: avoids log(0).
        double u1 = (static_cast<double>(eng_()) + 1.0) * inv64_;
        double u2 = static_cast<double>(eng_()) * inv64_;
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    template <typename Derived>
    void fill(Eigen::DenseBase<Derived>& out) {
        for (Eigen::Index j = 0; j < out.cols(); ++j)
            for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = next();
    }

  private:
    static constexpr double inv64_ = 1.0 / 18446744073709551616.0;  // 2^-64
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Uniform helpers for tests and random-instance generators.
class UniformStream {
  public:
    explicit UniformStream(std::uint64_t seed) : eng_(seed) {}
    /// Uniform on [a, b).
    double next(double a, double b) {
        double u = static_cast<double>(eng_()) * inv64_;
        return a + (b - a) * u;
    }

  private:
    static constexpr double inv64_ = 1.0 / 18446744073709551616.0;
    std::mt19937_64 eng_;
};

}  // namespace latreg
