#pragma once

#include <stdexcept>
#include <string>

namespace latreg {

/// Base class for all library errors.
struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A parameter lies outside its admissible domain (nu <= 0, sigma2 <= 0, ...).
struct parameter_error : error {
    using error::error;
};

/// AR parameters violate causality (a root on or inside the unit circle).
struct nonstationary_error : parameter_error {
    using parameter_error::parameter_error;
};

/// AR(2) root pair is degenerate: repeated root, or b = 0 so the order collapses.
struct degenerate_root_error : parameter_error {
    using parameter_error::parameter_error;
};

/// Lattice spectral sum did not converge at the requested or capped truncation.
struct truncation_error : error {
    using error::error;
};

/// Dense path requested beyond the configured size cap.
struct size_error : error {
    using error::error;
};

/// Singular design or covariance where an inverse is required.
struct singular_error : error {
    using error::error;
};

/// Numerical failure (factorization breakdown, indefinite matrix, ...).
struct numeric_error : error {
    using error::error;
};

/// A moment fit produced an inadmissible model; the replicate is excluded.
struct fit_error : error {
    using error::error;
};

struct config_error : error {
    using error::error;
};

struct io_error : error {
    using error::error;
};

}  // namespace latreg
