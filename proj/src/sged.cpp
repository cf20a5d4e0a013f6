#include "vinecast/sged.hpp"

#include "vinecast/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace vinecast {

void SgedParams::validate() const {
    if (!std::isfinite(mu) || !(sigma > 0.0) || !std::isfinite(sigma) || !(nu > 0.0) || !std::isfinite(nu) ||
        !(xi > -1.0 && xi < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "SGED parameters out of range");
    }
}

SgedConstants sged_constants(double nu, double xi) {
    const double g1 = std::tgamma(1.0 / nu);
    const double g2 = std::tgamma(2.0 / nu);
    const double g3 = std::tgamma(3.0 / nu);
    SgedConstants k{};
    k.a = g2 / std::sqrt(g1 * g3);
    k.s = std::sqrt(1.0 + 3.0 * xi * xi - 4.0 * k.a * k.a * xi * xi);
    k.theta = std::sqrt(g1 / g3) / k.s;
    k.delta = 2.0 * xi * k.a / k.s;
    k.c = nu / (2.0 * k.theta * g1);
    return k;
}

SgedParams SgedParams::standardized(double nu, double xi) {
    const auto k = sged_constants(nu, xi);
    return {2.0 * k.delta, 1.0, nu, xi};
}

double sged_log_pdf(double x, const SgedParams& p) {
    p.validate();
    const auto k = sged_constants(p.nu, p.xi);
    const double z = x - p.mu + k.delta * p.sigma;
    const double sign = z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0);
    const double scale = (1.0 - sign * p.xi) * k.theta * p.sigma;
    return std::log(k.c / p.sigma) - std::pow(std::abs(z) / scale, p.nu);
}

double sged_pdf(double x, const SgedParams& p) { return std::exp(sged_log_pdf(x, p)); }

namespace {

double mode_of(const SgedParams& p) { return p.mu - sged_constants(p.nu, p.xi).delta * p.sigma; }

}  // namespace

double sged_cdf(double x, const SgedParams& p) {
    p.validate();
    if (x == std::numeric_limits<double>::infinity()) return 1.0;
    if (x == -std::numeric_limits<double>::infinity()) return 0.0;
    using boost::math::quadrature::gauss_kronrod;
    const double m = mode_of(p);
    auto f = [&](double t) { return sged_pdf(t, p); };
    constexpr unsigned depth = 15;
    constexpr double tol = 1e-13;
    const double inf = std::numeric_limits<double>::infinity();
    if (x <= m) return gauss_kronrod<double, 61>::integrate(f, -inf, x, depth, tol);
    return std::clamp(1.0 - gauss_kronrod<double, 61>::integrate(f, x, inf, depth, tol), 0.0, 1.0);
}

double sged_cdf_closed(double x, const SgedParams& p) {
    p.validate();
    const auto k = sged_constants(p.nu, p.xi);
    const double z = x - p.mu + k.delta * p.sigma;
    const double shape = 1.0 / p.nu;
    if (z < 0.0) {
        const double t = std::pow(-z / ((1.0 + p.xi) * k.theta * p.sigma), p.nu);
        return 0.5 * (1.0 + p.xi) * boost::math::gamma_q(shape, t);
    }
    const double t = std::pow(z / ((1.0 - p.xi) * k.theta * p.sigma), p.nu);
    return 0.5 * (1.0 + p.xi) + 0.5 * (1.0 - p.xi) * boost::math::gamma_p(shape, t);
}

double sged_quantile_closed(double u, const SgedParams& p) {
    p.validate();
    if (!(u > 0.0 && u < 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile level must lie in (0, 1)");
    const auto k = sged_constants(p.nu, p.xi);
    const double shape = 1.0 / p.nu;
    const double left_mass = 0.5 * (1.0 + p.xi);
    double z = 0.0;
    if (u < left_mass) {
        const double t = boost::math::gamma_q_inv(shape, u / left_mass);
        z = -(1.0 + p.xi) * k.theta * p.sigma * std::pow(t, 1.0 / p.nu);
    } else {
        const double q = (u - left_mass) / (1.0 - left_mass);
        const double t = q <= 0.0 ? 0.0 : boost::math::gamma_p_inv(shape, q);
        z = (1.0 - p.xi) * k.theta * p.sigma * std::pow(t, 1.0 / p.nu);
    }
    return z + p.mu - k.delta * p.sigma;
}

double sged_quantile(double u, const SgedParams& p) {
    p.validate();
    if (!(u > 0.0 && u < 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile level must lie in (0, 1)");
    const double m = mode_of(p);
    auto g = [&](double x) { return sged_cdf(x, p) - u; };
    // Expand a bracket around the mode in steps of sigma.
    double lo = m - p.sigma;
    double hi = m + p.sigma;
    while (g(lo) > 0.0) lo = m - 2.0 * (m - lo);
    while (g(hi) < 0.0) hi = m + 2.0 * (hi - m);
    std::uintmax_t iterations = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        g, lo, hi, boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 3), iterations);
    return 0.5 * (a + b);
}

double sged_sample(const SgedParams& p, Rng& rng) { return sged_quantile_closed(rng.uniform(), p); }

}  // namespace vinecast
