#pragma once

#include "vinecast/matrix_core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace vinecast {

inline constexpr double kTradingDays = 252.0;

/// Per-day squared Frobenius distance between forecast and realized matrices.
[[nodiscard]] Eigen::VectorXd frobenius_losses(const std::vector<Eigen::MatrixXd>& forecasts,
                                               const std::vector<Eigen::MatrixXd>& actuals);
[[nodiscard]] double rmse_frobenius(const std::vector<Eigen::MatrixXd>& forecasts,
                                    const std::vector<Eigen::MatrixXd>& actuals);
[[nodiscard]] double rmse_frobenius(const std::vector<CovMatrix>& forecasts, const std::vector<CovMatrix>& actuals);
/// Column-wise RMSE of two equally shaped (days x components) panels.
[[nodiscard]] Eigen::VectorXd rmse_component(const Eigen::MatrixXd& forecasts, const Eigen::MatrixXd& actuals);

struct LossPanel {
    std::vector<std::string> models;
    Eigen::MatrixXd losses;  ///< days x models

    void validate() const;
};

struct McsOptions {
    double alpha = 0.10;
    int block_length = 22;
    int n_boot = 2000;
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct McsResult {
    std::vector<int> superior;     ///< model indices, ascending
    std::vector<int> eliminated;   ///< in elimination order
    std::vector<double> p_values;  ///< MCS p-value per model
};

/// Model confidence set by sequential elimination with the range statistic and
/// stationary-bootstrap p-values.
[[nodiscard]] McsResult mcs(const LossPanel& panel, const McsOptions& options = {});

/// Row indices of one stationary-bootstrap resample of length n.
[[nodiscard]] std::vector<int> stationary_bootstrap_indices(int n, double mean_block, std::uint64_t seed);

/// Minimum-variance weights with w'1 = 1 and w'mu = target; short sales allowed.
[[nodiscard]] Eigen::VectorXd min_variance_weights(const CovMatrix& sigma, const Eigen::VectorXd& mu, double target);
/// Expected return of the global minimum-variance portfolio.
[[nodiscard]] double gmv_return(const CovMatrix& sigma, const Eigen::VectorXd& mu);

struct FrontierPoint {
    double target_return = 0.0;  ///< daily
    double expected_sd = 0.0;    ///< daily, averaged over the horizon
};

/// Per target, the horizon average of sqrt(w_t' Y_t w_t) at the optimal weights.
[[nodiscard]] std::vector<FrontierPoint> efficient_frontier(const std::vector<CovMatrix>& forecasts,
                                                            const std::vector<Eigen::VectorXd>& mu,
                                                            const std::vector<double>& targets);

struct ExPost {
    Eigen::VectorXd returns;  ///< w_t' r_t per day
    Eigen::VectorXd sd;       ///< sqrt(w_t' Y_t w_t) per day
    double avg_return_annual = 0.0;
    double avg_sd_annual = 0.0;
};

[[nodiscard]] ExPost expost_frontier(const std::vector<Eigen::VectorXd>& weights, const Eigen::MatrixXd& returns,
                                     const std::vector<CovMatrix>& realized);

/// Sample mean of rows [begin, end) of a (days x assets) return panel.
[[nodiscard]] Eigen::VectorXd expected_returns(const Eigen::MatrixXd& returns, int begin, int end);

}  // namespace vinecast
