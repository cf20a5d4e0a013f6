#include "vinecast/bicop.hpp"

#include "vinecast/error.hpp"
#include "vinecast/optimize.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/owens_t.hpp>
#include <boost/math/tools/roots.hpp>
#include <gsl/gsl_sf_debye.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace vinecast {

std::string to_string(Family family) {
    switch (family) {
        case Family::Independence: return "independence";
        case Family::Gaussian: return "gaussian";
        case Family::Clayton: return "clayton";
        case Family::Gumbel: return "gumbel";
        case Family::Frank: return "frank";
    }
    return "unknown";
}

Family family_from_string(const std::string& name) {
    for (Family f : {Family::Independence, Family::Gaussian, Family::Clayton, Family::Gumbel, Family::Frank}) {
        if (to_string(f) == name) return f;
    }
    throw Error(ErrorCode::ConfigError, "unknown copula family '" + name + "'");
}

void PairCopula::validate() const {
    const bool rotatable = family == Family::Clayton || family == Family::Gumbel;
    if (rotation != 0 && !(rotatable && (rotation == 90 || rotation == 180 || rotation == 270))) {
        throw Error(ErrorCode::InvalidArgument, "rotation " + std::to_string(rotation) + " not allowed for " +
                                                    to_string(family));
    }
    bool ok = std::isfinite(param);
    switch (family) {
        case Family::Independence: break;
        case Family::Gaussian: ok = ok && std::abs(param) < 1.0; break;
        case Family::Clayton: ok = ok && param > 0.0; break;
        case Family::Gumbel: ok = ok && param >= 1.0; break;
        case Family::Frank: ok = ok && param != 0.0; break;
    }
    if (!ok) throw Error(ErrorCode::InvalidArgument, "invalid " + to_string(family) + " parameter");
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double normal_quantile(double u) { return boost::math::quantile(boost::math::normal_distribution<double>(), u); }

double clip_h(double h) { return std::clamp(h, kHClip, 1.0 - kHClip); }

// 1 - x kept strictly inside (0, 1) so rotated families never see an endpoint.
double reflect(double x) { return std::clamp(1.0 - x, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0)); }

void check_unit(double u) {
    if (!(u > 0.0 && u < 1.0)) throw Error(ErrorCode::InvalidArgument, "copula argument outside (0, 1)");
}

// ln(e^a + e^b - 1) for a, b >= 0.
double log_sum_exp_minus_one(double a, double b) {
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m) - std::exp(-m));
}

// ---- unrotated families; h(u | v) = dC/dv

double base_cdf(Family f, double t, double u, double v) {
    switch (f) {
        case Family::Independence: return u * v;
        case Family::Gaussian: {
            double x = normal_quantile(u);
            double y = normal_quantile(v);
            if (x == 0.0) x = 1e-12;
            if (y == 0.0) y = 1e-12;
            const double r = std::sqrt(1.0 - t * t);
            const double beta = (x * y > 0.0) ? 0.0 : 0.5;
            return 0.5 * (normal_cdf(x) + normal_cdf(y)) - boost::math::owens_t(x, (y - t * x) / (x * r)) -
                   boost::math::owens_t(y, (x - t * y) / (y * r)) - beta;
        }
        case Family::Clayton: {
            const double ls = log_sum_exp_minus_one(-t * std::log(u), -t * std::log(v));
            return std::exp(-ls / t);
        }
        case Family::Gumbel: {
            const double s = std::pow(-std::log(u), t) + std::pow(-std::log(v), t);
            return std::exp(-std::pow(s, 1.0 / t));
        }
        case Family::Frank: {
            return -std::log1p(std::expm1(-t * u) * std::expm1(-t * v) / std::expm1(-t)) / t;
        }
    }
    return 0.0;
}

double base_log_pdf(Family f, double t, double u, double v) {
    switch (f) {
        case Family::Independence: return 0.0;
        case Family::Gaussian: {
            const double x = normal_quantile(u);
            const double y = normal_quantile(v);
            const double r2 = 1.0 - t * t;
            return -0.5 * std::log(r2) - (t * t * (x * x + y * y) - 2.0 * t * x * y) / (2.0 * r2);
        }
        case Family::Clayton: {
            const double lu = std::log(u);
            const double lv = std::log(v);
            const double ls = log_sum_exp_minus_one(-t * lu, -t * lv);
            return std::log1p(t) - (t + 1.0) * (lu + lv) - (2.0 + 1.0 / t) * ls;
        }
        case Family::Gumbel: {
            const double x = -std::log(u);
            const double y = -std::log(v);
            const double ls = std::log(std::pow(x, t) + std::pow(y, t));
            const double a = std::exp(ls / t);
            return -a + x + y + (t - 1.0) * (std::log(x) + std::log(y)) + (1.0 / t - 2.0) * ls +
                   std::log(a + t - 1.0);
        }
        case Family::Frank: {
            const double b = std::expm1(-t);
            const double denom = b + std::expm1(-t * u) * std::expm1(-t * v);
            return std::log(-t * b) - t * (u + v) - 2.0 * std::log(std::abs(denom));
        }
    }
    return 0.0;
}

double base_h(Family f, double t, double u, double v) {
    switch (f) {
        case Family::Independence: return u;
        case Family::Gaussian:
            return normal_cdf((normal_quantile(u) - t * normal_quantile(v)) / std::sqrt(1.0 - t * t));
        case Family::Clayton: {
            const double lv = std::log(v);
            const double ls = log_sum_exp_minus_one(-t * std::log(u), -t * lv);
            return std::exp(-(t + 1.0) * lv - (1.0 / t + 1.0) * ls);
        }
        case Family::Gumbel: {
            const double x = -std::log(u);
            const double y = -std::log(v);
            const double ls = std::log(std::pow(x, t) + std::pow(y, t));
            return std::exp(-std::exp(ls / t) + (1.0 / t - 1.0) * ls + (t - 1.0) * std::log(y) + y);
        }
        case Family::Frank: {
            const double a = std::expm1(-t * u);
            return std::exp(-t * v) * a / (std::expm1(-t) + a * std::expm1(-t * v));
        }
    }
    return 0.0;
}

double base_hinv(Family f, double t, double w, double v) {
    switch (f) {
        case Family::Independence: return w;
        case Family::Gaussian:
            return normal_cdf(normal_quantile(w) * std::sqrt(1.0 - t * t) + t * normal_quantile(v));
        case Family::Clayton: {
            const double b = -t * std::log(v);
            const double gap = -t / (t + 1.0) * std::log(w);
            const double ln_t = b + std::log(std::expm1(gap) + std::exp(-b));
            return std::exp(-ln_t / t);
        }
        case Family::Gumbel: {
            auto g = [&](double u) { return base_h(f, t, u, v) - w; };
            double lo = 1e-300;
            double hi = 1.0 - 1e-16;
            if (g(lo) >= 0.0) return lo;
            if (g(hi) <= 0.0) return hi;
            std::uintmax_t iterations = 200;
            const auto [a, b] = boost::math::tools::toms748_solve(
                g, lo, hi, boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 4),
                iterations);
            return 0.5 * (a + b);
        }
        case Family::Frank: {
            const double e = std::exp(-t * v);
            const double a = w * std::expm1(-t) / (e - w * std::expm1(-t * v));
            return -std::log1p(a) / t;
        }
    }
    return 0.0;
}

int swapped(int rotation) { return rotation == 90 ? 270 : (rotation == 270 ? 90 : rotation); }

double rotated_h1(const PairCopula& pc, int rotation, double u, double v) {
    const Family f = pc.family;
    const double t = pc.param;
    switch (rotation) {
        case 90: return 1.0 - base_h(f, t, reflect(u), v);
        case 180: return 1.0 - base_h(f, t, reflect(u), reflect(v));
        case 270: return base_h(f, t, u, reflect(v));
        default: return base_h(f, t, u, v);
    }
}

double rotated_hinv1(const PairCopula& pc, int rotation, double w, double v) {
    const Family f = pc.family;
    const double t = pc.param;
    switch (rotation) {
        case 90: return 1.0 - base_hinv(f, t, reflect(w), v);
        case 180: return 1.0 - base_hinv(f, t, reflect(w), reflect(v));
        case 270: return base_hinv(f, t, w, reflect(v));
        default: return base_hinv(f, t, w, v);
    }
}

}  // namespace

double bicop_cdf(const PairCopula& pc, double u, double v) {
    check_unit(u);
    check_unit(v);
    const Family f = pc.family;
    const double t = pc.param;
    switch (pc.rotation) {
        case 90: return v - base_cdf(f, t, reflect(u), v);
        case 180: return u + v - 1.0 + base_cdf(f, t, reflect(u), reflect(v));
        case 270: return u - base_cdf(f, t, u, reflect(v));
        default: return base_cdf(f, t, u, v);
    }
}

double bicop_pdf(const PairCopula& pc, double u, double v) {
    check_unit(u);
    check_unit(v);
    const Family f = pc.family;
    const double t = pc.param;
    switch (pc.rotation) {
        case 90: return std::exp(base_log_pdf(f, t, reflect(u), v));
        case 180: return std::exp(base_log_pdf(f, t, reflect(u), reflect(v)));
        case 270: return std::exp(base_log_pdf(f, t, u, reflect(v)));
        default: return std::exp(base_log_pdf(f, t, u, v));
    }
}

double bicop_h1(const PairCopula& pc, double u, double v) {
    check_unit(u);
    check_unit(v);
    return clip_h(rotated_h1(pc, pc.rotation, u, v));
}

double bicop_h2(const PairCopula& pc, double u, double v) {
    check_unit(u);
    check_unit(v);
    return clip_h(rotated_h1(pc, swapped(pc.rotation), v, u));
}

double bicop_hinv1(const PairCopula& pc, double w, double v) {
    check_unit(w);
    check_unit(v);
    return clip_h(rotated_hinv1(pc, pc.rotation, w, v));
}

double bicop_hinv2(const PairCopula& pc, double u, double w) {
    check_unit(u);
    check_unit(w);
    return clip_h(rotated_hinv1(pc, swapped(pc.rotation), w, u));
}

double bicop_loglik(const PairCopula& pc, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    if (pc.family == Family::Independence) return 0.0;
    double ll = 0.0;
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        double a = u(k);
        double b = v(k);
        if (pc.rotation == 90 || pc.rotation == 180) a = reflect(a);
        if (pc.rotation == 180 || pc.rotation == 270) b = reflect(b);
        ll += base_log_pdf(pc.family, pc.param, a, b);
    }
    return ll;
}

namespace {

// Number of pairs (i < j) with a[i] > a[j], counted by merge sort.
std::uint64_t count_inversions(std::vector<double>& a) {
    std::vector<double> buffer(a.size());
    std::uint64_t swaps = 0;
    for (std::size_t width = 1; width < a.size(); width *= 2) {
        for (std::size_t lo = 0; lo < a.size(); lo += 2 * width) {
            const std::size_t mid = std::min(lo + width, a.size());
            const std::size_t hi = std::min(lo + 2 * width, a.size());
            std::size_t i = lo;
            std::size_t j = mid;
            std::size_t k = lo;
            while (i < mid && j < hi) {
                if (a[j] < a[i]) {
                    swaps += mid - i;
                    buffer[k++] = a[j++];
                } else {
                    buffer[k++] = a[i++];
                }
            }
            while (i < mid) buffer[k++] = a[i++];
            while (j < hi) buffer[k++] = a[j++];
        }
        std::swap(a, buffer);
    }
    return swaps;
}

template <class Key>
std::uint64_t tied_pairs(const std::vector<std::size_t>& order, Key key) {
    std::uint64_t ties = 0;
    std::uint64_t run = 1;
    for (std::size_t k = 1; k <= order.size(); ++k) {
        if (k < order.size() && key(order[k]) == key(order[k - 1])) {
            ++run;
        } else {
            ties += run * (run - 1) / 2;
            run = 1;
        }
    }
    return ties;
}

}  // namespace

double kendall_tau(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const auto n = static_cast<std::size_t>(x.size());
    if (y.size() != x.size() || n < 2) throw Error(ErrorCode::InvalidArgument, "Kendall tau needs two equal samples");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x(a) < x(b) || (x(a) == x(b) && y(a) < y(b));
    });
    const std::uint64_t x_ties = tied_pairs(order, [&](std::size_t k) { return x(k); });
    const std::uint64_t joint_ties =
        tied_pairs(order, [&](std::size_t k) { return std::pair<double, double>(x(k), y(k)); });
    std::vector<double> ys(n);
    for (std::size_t k = 0; k < n; ++k) ys[k] = y(order[k]);
    const std::uint64_t swaps = count_inversions(ys);
    std::vector<std::size_t> sorted_y(n);
    std::iota(sorted_y.begin(), sorted_y.end(), 0);
    const std::uint64_t y_ties = tied_pairs(sorted_y, [&](std::size_t k) { return ys[k]; });

    const double total = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    const double concordant_minus_discordant = total - static_cast<double>(x_ties) - static_cast<double>(y_ties) +
                                               static_cast<double>(joint_ties) - 2.0 * static_cast<double>(swaps);
    const double denom = std::sqrt((total - static_cast<double>(x_ties)) * (total - static_cast<double>(y_ties)));
    return denom > 0.0 ? concordant_minus_discordant / denom : 0.0;
}

namespace {

double frank_tau(double theta) {
    const double a = std::abs(theta);
    const double tau = 1.0 - 4.0 / a + 4.0 * gsl_sf_debye_1(a) / a;
    return theta < 0.0 ? -tau : tau;
}

double unrotated_tau(Family f, double t) {
    switch (f) {
        case Family::Independence: return 0.0;
        case Family::Gaussian: return 2.0 / std::numbers::pi * std::asin(t);
        case Family::Clayton: return t / (t + 2.0);
        case Family::Gumbel: return 1.0 - 1.0 / t;
        case Family::Frank: return frank_tau(t);
    }
    return 0.0;
}

constexpr double kGaussBound = 0.995;
constexpr double kClaytonMax = 28.0;
constexpr double kGumbelMax = 17.0;
constexpr double kFrankMax = 35.0;

}  // namespace

double copula_tau(const PairCopula& pc) {
    const double tau = unrotated_tau(pc.family, pc.param);
    return (pc.rotation == 90 || pc.rotation == 270) ? -tau : tau;
}

double param_from_tau(Family family, double tau) {
    switch (family) {
        case Family::Independence: return 0.0;
        case Family::Gaussian: return std::sin(std::numbers::pi * tau / 2.0);
        case Family::Clayton: return 2.0 * tau / (1.0 - tau);
        case Family::Gumbel: return 1.0 / (1.0 - tau);
        case Family::Frank: {
            if (tau == 0.0) throw Error(ErrorCode::InvalidArgument, "Frank needs nonzero tau");
            const double target = std::abs(tau);
            if (target >= frank_tau(kFrankMax)) return std::copysign(kFrankMax, tau);
            auto g = [&](double t) { return frank_tau(t) - target; };
            std::uintmax_t iterations = 200;
            const auto [a, b] = boost::math::tools::toms748_solve(
                g, 1e-6, kFrankMax, boost::math::tools::eps_tolerance<double>(40), iterations);
            return std::copysign(0.5 * (a + b), tau);
        }
    }
    return 0.0;
}

PairCopula bicop_fit(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const BicopFitOptions& options) {
    const auto n = u.size();
    if (n < 10 || v.size() != n) throw Error(ErrorCode::DegenerateSample, "pair-copula fit needs 10 paired points");
    for (Eigen::Index k = 0; k < n; ++k) {
        if (!(u(k) > 0.0 && u(k) < 1.0 && v(k) > 0.0 && v(k) < 1.0)) {
            throw Error(ErrorCode::DegenerateSample, "copula data outside (0, 1)");
        }
    }
    const double tau = kendall_tau(u, v);
    if (options.independence_test) {
        const double nn = static_cast<double>(n);
        const double z = 3.0 * tau * std::sqrt(nn * (nn - 1.0)) / std::sqrt(2.0 * (2.0 * nn + 5.0));
        const double critical = normal_quantile(1.0 - options.test_level / 2.0);
        if (std::abs(z) <= critical) return PairCopula{};
    }

    struct Candidate {
        Family family;
        int rotation;
        double lo;
        double hi;
    };
    std::vector<Candidate> candidates{{Family::Gaussian, 0, -kGaussBound, kGaussBound}};
    if (options.families == FamilySet::Mixed) {
        const bool positive = tau >= 0.0;
        const int r1 = positive ? 0 : 90;
        const int r2 = positive ? 180 : 270;
        candidates.push_back({Family::Clayton, r1, 1e-4, kClaytonMax});
        candidates.push_back({Family::Clayton, r2, 1e-4, kClaytonMax});
        candidates.push_back({Family::Gumbel, r1, 1.0 + 1e-6, kGumbelMax});
        candidates.push_back({Family::Gumbel, r2, 1.0 + 1e-6, kGumbelMax});
        if (positive) {
            candidates.push_back({Family::Frank, 0, 1e-4, kFrankMax});
        } else {
            candidates.push_back({Family::Frank, 0, -kFrankMax, -1e-4});
        }
    }

    PairCopula best;
    double best_aic = 0.0;  // independence: zero parameters, zero log-likelihood
    for (const auto& c : candidates) {
        PairCopula pc{c.family, c.rotation, 0.0};
        auto nll = [&](double t) {
            pc.param = t;
            return -bicop_loglik(pc, u, v);
        };
        const double abs_tau = std::clamp(std::abs(tau), 1e-4, 0.95);
        double start = c.family == Family::Gaussian ? param_from_tau(c.family, tau) : param_from_tau(c.family, abs_tau);
        if (c.family == Family::Frank && tau < 0.0) start = -std::abs(start);
        start = std::clamp(start, c.lo, c.hi);
        double param = start;
        double value = nll(start);
        const OptimResult r = minimize_scalar(nll, c.lo, c.hi);
        if (r.value < value || !std::isfinite(value)) {
            param = r.x(0);
            value = r.value;
        }
        if (!std::isfinite(value)) continue;
        const double aic = 2.0 + 2.0 * value;
        if (aic < best_aic) {
            best_aic = aic;
            best = PairCopula{c.family, c.rotation, param};
        }
    }
    return best;
}

}  // namespace vinecast
