#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace vinecast {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct SimplexOptions {
    double f_tolerance = 1e-8;   ///< relative spread of the best value over a stall period
    double x_tolerance = 1e-10;  ///< simplex size in the unconstrained space
    int max_iterations = 4000;
    double initial_step = 0.5;   ///< in the unconstrained space
};

struct OptimResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Nelder-Mead on the box [lower, upper] (entries may be infinite). Finite
/// bounds are enforced through a smooth reparametrization, so the optimizer
/// never evaluates outside the open box. Non-finite objective values are
/// treated as +infinity.
[[nodiscard]] OptimResult minimize_bounded(const Objective& f, const Eigen::VectorXd& start,
                                           const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                           const SimplexOptions& options = {});

/// Best of minimize_bounded over several starting points.
[[nodiscard]] OptimResult minimize_multistart(const Objective& f, const std::vector<Eigen::VectorXd>& starts,
                                              const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                              const SimplexOptions& options = {});

/// One-dimensional bounded minimization (Brent).
[[nodiscard]] OptimResult minimize_scalar(const std::function<double(double)>& f, double lower, double upper);

}  // namespace vinecast
