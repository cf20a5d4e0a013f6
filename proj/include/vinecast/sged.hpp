#pragma once

#include "vinecast/rng.hpp"

namespace vinecast {

/// Skewed generalized error distribution with location mu, scale sigma > 0,
/// shape nu > 0 and skewness xi in (-1, 1). The density is unimodal with mode
/// mu - delta * sigma and standard deviation sigma.
struct SgedParams {
    double mu = 0.0;
    double sigma = 1.0;
    double nu = 2.0;
    double xi = 0.0;

    /// Throws InvalidArgument when a parameter is out of range.
    void validate() const;

    /// Zero-mean, unit-variance member with the given shape and skewness.
    [[nodiscard]] static SgedParams standardized(double nu, double xi);
};

struct SgedConstants {
    double a;      ///< Gamma(2/nu) Gamma(1/nu)^(-1/2) Gamma(3/nu)^(-1/2)
    double s;      ///< sqrt(1 + 3 xi^2 - 4 A^2 xi^2)
    double theta;  ///< Gamma(1/nu)^(1/2) Gamma(3/nu)^(-1/2) / S
    double delta;  ///< 2 xi A / S
    double c;      ///< nu / (2 theta Gamma(1/nu))
};

[[nodiscard]] SgedConstants sged_constants(double nu, double xi);

[[nodiscard]] double sged_pdf(double x, const SgedParams& p);
[[nodiscard]] double sged_log_pdf(double x, const SgedParams& p);

/// Distribution function by adaptive Gauss-Kronrod quadrature of the density.
[[nodiscard]] double sged_cdf(double x, const SgedParams& p);
/// Inverse of sged_cdf by bracketed root finding.
[[nodiscard]] double sged_quantile(double u, const SgedParams& p);

/// Distribution function and quantile through the regularized incomplete gamma
/// function; same distribution, used on hot paths.
[[nodiscard]] double sged_cdf_closed(double x, const SgedParams& p);
[[nodiscard]] double sged_quantile_closed(double u, const SgedParams& p);

/// Inverse-cdf draw.
[[nodiscard]] double sged_sample(const SgedParams& p, Rng& rng);

}  // namespace vinecast
