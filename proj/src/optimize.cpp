#include "vinecast/optimize.hpp"

#include "vinecast/error.hpp"

#include <boost/math/tools/minima.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>

namespace vinecast {

namespace {

constexpr double kHuge = 1e300;

struct BoxMap {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    [[nodiscard]] double to_box(int k, double y) const {
        const bool lo = std::isfinite(lower(k));
        const bool hi = std::isfinite(upper(k));
        double x = y;
        if (lo && hi) {
            x = lower(k) + (upper(k) - lower(k)) / (1.0 + std::exp(-y));
        } else if (lo) {
            x = lower(k) + std::exp(y);
        } else if (hi) {
            x = upper(k) - std::exp(-y);
        }
        // Rounding can land exactly on a bound; keep the point strictly inside.
        if (lo) x = std::max(x, std::nextafter(lower(k), kHuge));
        if (hi) x = std::min(x, std::nextafter(upper(k), -kHuge));
        return x;
    }

    [[nodiscard]] double to_free(int k, double x) const {
        const bool lo = std::isfinite(lower(k));
        const bool hi = std::isfinite(upper(k));
        if (lo && hi) {
            const double p = (x - lower(k)) / (upper(k) - lower(k));
            return std::log(p / (1.0 - p));
        }
        if (lo) return std::log(x - lower(k));
        if (hi) return -std::log(upper(k) - x);
        return x;
    }

    [[nodiscard]] Eigen::VectorXd box(const gsl_vector* y) const {
        Eigen::VectorXd x(lower.size());
        for (int k = 0; k < x.size(); ++k) x(k) = to_box(k, gsl_vector_get(y, static_cast<std::size_t>(k)));
        return x;
    }
};

struct Problem {
    const Objective* f;
    BoxMap map;
};

double evaluate(const gsl_vector* y, void* params) {
    const auto* problem = static_cast<const Problem*>(params);
    const double value = (*problem->f)(problem->map.box(y));
    return std::isfinite(value) ? value : kHuge;
}

struct MinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* s) const { gsl_multimin_fminimizer_free(s); }
};
struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

// Pull a start point strictly inside the box so the logit map is finite.
double interior(double x, double lo, double hi) {
    const bool flo = std::isfinite(lo);
    const bool fhi = std::isfinite(hi);
    const double width = (flo && fhi) ? hi - lo : 1.0;
    const double margin = 1e-6 * width;
    if (flo && x <= lo + margin) x = lo + margin;
    if (fhi && x >= hi - margin) x = hi - margin;
    return x;
}

}  // namespace

OptimResult minimize_bounded(const Objective& f, const Eigen::VectorXd& start, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper, const SimplexOptions& options) {
    const auto n = static_cast<std::size_t>(start.size());
    if (lower.size() != start.size() || upper.size() != start.size() || n == 0) {
        throw Error(ErrorCode::InvalidArgument, "optimizer bounds do not match the start point");
    }
    gsl_set_error_handler_off();
    Problem problem{&f, BoxMap{lower, upper}};

    std::unique_ptr<gsl_vector, VectorDeleter> y0(gsl_vector_alloc(n));
    std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(n));
    for (std::size_t k = 0; k < n; ++k) {
        const int i = static_cast<int>(k);
        gsl_vector_set(y0.get(), k, problem.map.to_free(i, interior(start(i), lower(i), upper(i))));
        gsl_vector_set(step.get(), k, options.initial_step);
    }
    gsl_multimin_function fn{&evaluate, n, &problem};
    std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> solver(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
    gsl_multimin_fminimizer_set(solver.get(), &fn, y0.get(), step.get());

    OptimResult result;
    const int stall_period = 20 * static_cast<int>(n) + 20;
    double reference = solver->fval;
    int reference_iter = 0;
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        result.iterations = iter;
        if (gsl_multimin_fminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
        const double size = gsl_multimin_fminimizer_size(solver.get());
        if (size < options.x_tolerance) {
            result.converged = true;
            break;
        }
        if (iter - reference_iter >= stall_period) {
            const double fval = solver->fval;
            if (std::abs(reference - fval) <= options.f_tolerance * (1.0 + std::abs(fval))) {
                result.converged = true;
                break;
            }
            reference = fval;
            reference_iter = iter;
        }
    }
    result.x = problem.map.box(solver->x);
    result.value = solver->fval;
    if (!(result.value < kHuge)) throw Error(ErrorCode::OptimizerDiverged, "objective is not finite anywhere visited");
    return result;
}

OptimResult minimize_multistart(const Objective& f, const std::vector<Eigen::VectorXd>& starts,
                                const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                const SimplexOptions& options) {
    std::optional<OptimResult> best;
    for (const auto& s : starts) {
        try {
            OptimResult r = minimize_bounded(f, s, lower, upper, options);
            if (!best || r.value < best->value) best = std::move(r);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::OptimizerDiverged) throw;
        }
    }
    if (!best) throw Error(ErrorCode::OptimizerDiverged, "every start point diverged");
    return *best;
}

OptimResult minimize_scalar(const std::function<double(double)>& f, double lower, double upper) {
    auto safe = [&](double x) {
        const double v = f(x);
        return std::isfinite(v) ? v : kHuge;
    };
    std::uintmax_t iterations = 200;
    const auto [x, value] =
        boost::math::tools::brent_find_minima(safe, lower, upper, std::numeric_limits<double>::digits / 2, iterations);
    OptimResult r;
    r.x = Eigen::VectorXd::Constant(1, x);
    r.value = value;
    r.iterations = static_cast<int>(iterations);
    r.converged = iterations < 200;
    return r;
}

}  // namespace vinecast
