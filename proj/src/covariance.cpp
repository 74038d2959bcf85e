#include "latreg/covariance.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>

namespace latreg {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool roots_outside_unit_disk(std::complex<double> xi1, std::complex<double> xi2) {
    return std::abs(xi1) > 1.0 && std::abs(xi2) > 1.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Parameter validation
// ---------------------------------------------------------------------------

void MaternParams::validate() const {
    if (!(nu > 0.0) || !(rho > 0.0) || !(sigma2 > 0.0))
        throw parameter_error("matern: nu, rho, sigma2 must be positive");
}

void Ar1Params::validate() const {
    if (!(sigma2 > 0.0)) throw parameter_error("ar1: sigma2 must be positive");
    if (!(std::abs(phi) < 1.0)) throw nonstationary_error("ar1: |phi| must be < 1");
}

Ar1Params Ar1Params::normalized(double phi) {
    Ar1Params p{phi, 1.0 - phi * phi};
    p.validate();
    return p;
}

void Ar2Params::validate() const {
    if (!(sigma2 > 0.0)) throw parameter_error("ar2: sigma2 must be positive");
    if (!roots_outside_unit_disk(xi1, xi2))
        throw nonstationary_error("ar2: roots must lie outside the unit disk");
    double scale = std::abs(xi1) + std::abs(xi2);
    if (std::abs(xi1 - xi2) < 1e-12 * scale)
        throw degenerate_root_error("ar2: repeated root, autocovariance formula is singular");
    bool both_real = std::abs(xi1.imag()) < 1e-14 * scale && std::abs(xi2.imag()) < 1e-14 * scale;
    if (!both_real && std::abs(xi1 - std::conj(xi2)) > 1e-10 * scale)
        throw parameter_error("ar2: complex roots must form a conjugate pair");
}

double Ar2Params::a() const { return ((xi1 + xi2) / (xi1 * xi2)).real(); }
double Ar2Params::b() const { return (-1.0 / (xi1 * xi2)).real(); }

Ar2Params Ar2Params::from_coeffs(double a, double b, double sigma2) {
    auto [xi1, xi2] = ar_roots_from_coeffs(a, b);
    Ar2Params p{xi1, xi2, sigma2};
    p.validate();
    return p;
}

Ar2Params Ar2Params::normalized(std::complex<double> xi1, std::complex<double> xi2) {
    Ar2Params unit{xi1, xi2, 1.0};
    unit.validate();
    double c0 = ar2_autocov(0, unit);
    if (!(c0 > 0.0)) throw numeric_error("ar2: lag-0 autocovariance not positive");
    return Ar2Params{xi1, xi2, 1.0 / c0};
}

// ---------------------------------------------------------------------------
// Kernel evaluation
// ---------------------------------------------------------------------------

double matern_cov(double x, const MaternParams& p) {
    p.validate();
    if (x < 0.0) throw parameter_error("matern: distance must be >= 0");
    // (alpha x)^nu K_nu(alpha x) -> 2^(nu-1) Gamma(nu) as x -> 0, so the
    // limit is sigma2; K_nu itself diverges there and must not be evaluated.
    if (x == 0.0) return p.sigma2;
    double z = 2.0 * std::sqrt(p.nu) * x / p.rho;
    double knu = boost::math::cyl_bessel_k(p.nu, z);
    if (knu == 0.0) return 0.0;  // tail underflow
    return p.sigma2 / (std::pow(2.0, p.nu - 1.0) * std::tgamma(p.nu)) * std::pow(z, p.nu) * knu;
}

double ar1_autocov(long h, const Ar1Params& p) {
    p.validate();
    return p.sigma2 / (1.0 - p.phi * p.phi) * std::pow(p.phi, static_cast<double>(std::labs(h)));
}

double ar2_autocov(long h, const Ar2Params& p) {
    p.validate();
    const std::complex<double> xi1 = p.xi1, xi2 = p.xi2;
    const double ah = static_cast<double>(std::labs(h));
    std::complex<double> pref =
        p.sigma2 * xi1 * xi1 * xi2 * xi2 / ((xi1 * xi2 - 1.0) * (xi2 - xi1));
    std::complex<double> val = pref * (std::pow(xi1, 1.0 - ah) / (xi1 * xi1 - 1.0) -
                                       std::pow(xi2, 1.0 - ah) / (xi2 * xi2 - 1.0));
    // The projection to the reals must be a formality: anything above
    // tolerance means the root pair was inconsistent.
    if (std::abs(val.imag()) > 1e-12 * std::max(1.0, std::abs(val.real())))
        throw numeric_error("ar2: autocovariance has non-negligible imaginary part");
    return val.real();
}

double kernel1d_autocov(const Kernel1d& k, long h) {
    return std::visit(
        [h](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Matern1d>)
                return matern_cov(static_cast<double>(std::labs(h)), p.p);
            else if constexpr (std::is_same_v<T, Ar1Params>)
                return ar1_autocov(h, p);
            else
                return ar2_autocov(h, p);
        },
        k);
}

double CovarianceModel::gamma(long h1, long h2) const {
    if (const auto* iso = std::get_if<IsotropicMatern>(&kind)) {
        double d = std::hypot(static_cast<double>(h1), static_cast<double>(h2));
        return matern_cov(d, iso->p);
    }
    const auto& prod = std::get<ProductKernel>(kind);
    return kernel1d_autocov(prod.axis1, h1) * kernel1d_autocov(prod.axis2, h2);
}

// ---------------------------------------------------------------------------
// Root <-> coefficient conversions
// ---------------------------------------------------------------------------

std::pair<double, double> ar_coeffs_from_roots(std::complex<double> xi1,
                                               std::complex<double> xi2) {
    std::complex<double> prod = xi1 * xi2;
    if (std::abs(prod) == 0.0) throw parameter_error("ar2: zero root");
    std::complex<double> a = (xi1 + xi2) / prod;
    std::complex<double> b = -1.0 / prod;
    double scale = std::max(1.0, std::abs(a) + std::abs(b));
    if (std::abs(a.imag()) > 1e-10 * scale || std::abs(b.imag()) > 1e-10 * scale)
        throw parameter_error("ar2: root pair does not yield real coefficients");
    return {a.real(), b.real()};
}

std::pair<std::complex<double>, std::complex<double>> ar_roots_from_coeffs(double a, double b) {
    if (b == 0.0)
        throw degenerate_root_error("ar2: b = 0 collapses the order to AR(1)");
    double disc = a * a + 4.0 * b;
    std::complex<double> sq =
        disc >= 0.0 ? std::complex<double>(std::sqrt(disc), 0.0)
                    : std::complex<double>(0.0, std::sqrt(-disc));
    std::complex<double> xi1 = (a + sq) / (-2.0 * b);
    std::complex<double> xi2 = (a - sq) / (-2.0 * b);
    return {xi1, xi2};
}

// ---------------------------------------------------------------------------
// Spectral densities
// ---------------------------------------------------------------------------

double ar_spectral_density(double lambda, const std::vector<double>& phi, double sigma2) {
    if (!(sigma2 > 0.0)) throw parameter_error("ar spectral density: sigma2 must be positive");
    std::complex<double> z = std::polar(1.0, -lambda);
    std::complex<double> poly(1.0, 0.0);
    std::complex<double> zp = z;
    for (double c : phi) {
        poly -= c * zp;
        zp *= z;
    }
    return sigma2 / (2.0 * kPi) / std::norm(poly);
}

namespace {

std::vector<double> axis_autocov_table(const Kernel1d& k, int H) {
    std::vector<double> c(static_cast<std::size_t>(H) + 1);
    for (int h = 0; h <= H; ++h) c[static_cast<std::size_t>(h)] = kernel1d_autocov(k, h);
    return c;
}

double cosine_series(const std::vector<double>& c, double lambda) {
    double s = c[0];
    for (std::size_t h = 1; h < c.size(); ++h)
        s += 2.0 * c[h] * std::cos(static_cast<double>(h) * lambda);
    return s;
}

}  // namespace

FoldedSpectrum::FoldedSpectrum(const CovarianceModel& m, int truncation)
    : trunc_(truncation), product_(m.separable()) {
    if (truncation < 1) throw parameter_error("folded spectrum: truncation must be >= 1");
    if (product_) {
        c1_ = axis_autocov_table(m.product().axis1, trunc_);
        c2_ = axis_autocov_table(m.product().axis2, trunc_);
    } else {
        table_.resize(trunc_ + 1, trunc_ + 1);
        for (int h1 = 0; h1 <= trunc_; ++h1)
            for (int h2 = 0; h2 <= trunc_; ++h2) table_(h1, h2) = m.gamma(h1, h2);
    }
}

FoldedSpectrum FoldedSpectrum::adaptive(const CovarianceModel& m) {
    return FoldedSpectrum(m, adaptive_truncation(m));
}

double FoldedSpectrum::operator()(double lambda1, double lambda2) const {
    double val;
    if (product_) {
        double s1 = cosine_series(c1_, lambda1);
        double s2 = cosine_series(c2_, lambda2);
        // each axis series is itself a spectral density and must be positive
        if (!(s1 > 0.0) || !(s2 > 0.0))
            throw truncation_error("folded spectrum: non-positive value, raise the truncation");
        val = s1 * s2;
    } else {
        const int H = trunc_;
        Eigen::VectorXd cos1(H + 1), cos2(H + 1);
        for (int h = 0; h <= H; ++h) {
            cos1(h) = std::cos(h * lambda1);
            cos2(h) = std::cos(h * lambda2);
        }
        // evenness of gamma collapses the four quadrants onto h >= 0
        double s = table_(0, 0);
        for (int h = 1; h <= H; ++h)
            s += 2.0 * (table_(h, 0) * cos1(h) + table_(0, h) * cos2(h));
        double cross = 0.0;
        for (int h1 = 1; h1 <= H; ++h1) {
            double inner = 0.0;
            for (int h2 = 1; h2 <= H; ++h2) inner += table_(h1, h2) * cos2(h2);
            cross += cos1(h1) * inner;
        }
        val = s + 4.0 * cross;
    }
    val /= (2.0 * kPi) * (2.0 * kPi);
    if (!(val > 0.0))
        throw truncation_error("folded spectrum: non-positive value, raise the truncation");
    return val;
}

double lattice_spectral_density(double lambda1, double lambda2, const CovarianceModel& m,
                                int truncation) {
    return FoldedSpectrum(m, truncation)(lambda1, lambda2);
}

int adaptive_truncation(const CovarianceModel& m, double tol, int cap) {
    const int window = 3;
    int dead = 0;
    for (int h = 1; h <= cap; ++h) {
        double tail = std::abs(m.gamma(h, 0)) + std::abs(m.gamma(0, h));
        dead = tail < tol ? dead + 1 : 0;
        if (dead >= window) return h;
    }
    throw truncation_error("adaptive truncation: covariance tail not below tolerance at cap");
}

// ---------------------------------------------------------------------------
// Benchmark catalog
// ---------------------------------------------------------------------------

std::pair<std::complex<double>, std::complex<double>> reference_ar2_roots() {
    const double re = 2.0 / 3.0;
    const double im = 2.0 / 3.0 * std::sqrt(3.0);
    return {{re, im}, {re, -im}};
}

CovarianceModel reference_model(ModelId id) {
    const MaternParams m2{2.0, 3.0, 1.0};
    const MaternParams m1{1.0, 3.0, 1.0};
    auto [xi1, xi2] = reference_ar2_roots();
    switch (id) {
        case ModelId::Matern2:
            return {IsotropicMatern{m2}};
        case ModelId::Matern1:
            return {IsotropicMatern{m1}};
        case ModelId::Matern2xMatern1:
            return {ProductKernel{Matern1d{m2}, Matern1d{m1}}};
        case ModelId::Matern1xAr2:
            return {ProductKernel{Matern1d{m1}, Ar2Params::normalized(xi1, xi2)}};
        case ModelId::Ar1xAr2:
            return {ProductKernel{Ar1Params::normalized(0.5), Ar2Params::normalized(xi1, xi2)}};
        case ModelId::Ar1xAr1:
            return {ProductKernel{Ar1Params::normalized(0.9), Ar1Params::normalized(0.9)}};
    }
    throw parameter_error("unknown model id");
}

const std::vector<ModelId>& all_model_ids() {
    static const std::vector<ModelId> ids{ModelId::Matern2,     ModelId::Matern1,
                                          ModelId::Matern2xMatern1, ModelId::Matern1xAr2,
                                          ModelId::Ar1xAr2,     ModelId::Ar1xAr1};
    return ids;
}

std::string to_string(ModelId id) {
    switch (id) {
        case ModelId::Matern2: return "matern2";
        case ModelId::Matern1: return "matern1";
        case ModelId::Matern2xMatern1: return "matern2xmatern1";
        case ModelId::Matern1xAr2: return "matern1xar2";
        case ModelId::Ar1xAr2: return "ar1xar2";
        case ModelId::Ar1xAr1: return "ar1xar1";
    }
    return "unknown";
}

ModelId model_id_from_string(const std::string& name) {
    for (ModelId id : all_model_ids())
        if (to_string(id) == name) return id;
    throw config_error("unknown model id: " + name);
}

}  // namespace latreg
