#include "vinecast/evaluation.hpp"

#include "vinecast/error.hpp"
#include "vinecast/parallel.hpp"
#include "vinecast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace vinecast {

Eigen::VectorXd frobenius_losses(const std::vector<Eigen::MatrixXd>& forecasts,
                                 const std::vector<Eigen::MatrixXd>& actuals) {
    if (forecasts.size() != actuals.size() || forecasts.empty()) {
        throw Error(ErrorCode::InvalidArgument, "forecast and realized series must be aligned and non-empty");
    }
    Eigen::VectorXd loss(static_cast<Eigen::Index>(forecasts.size()));
    for (std::size_t t = 0; t < forecasts.size(); ++t) {
        if (forecasts[t].rows() != actuals[t].rows() || forecasts[t].cols() != actuals[t].cols()) {
            throw Error(ErrorCode::InvalidArgument, "matrix shapes differ");
        }
        loss(static_cast<Eigen::Index>(t)) = (forecasts[t] - actuals[t]).squaredNorm();
    }
    return loss;
}

double rmse_frobenius(const std::vector<Eigen::MatrixXd>& forecasts, const std::vector<Eigen::MatrixXd>& actuals) {
    return std::sqrt(frobenius_losses(forecasts, actuals).mean());
}

double rmse_frobenius(const std::vector<CovMatrix>& forecasts, const std::vector<CovMatrix>& actuals) {
    std::vector<Eigen::MatrixXd> f;
    std::vector<Eigen::MatrixXd> a;
    for (const auto& y : forecasts) f.push_back(y.values());
    for (const auto& y : actuals) a.push_back(y.values());
    return rmse_frobenius(f, a);
}

Eigen::VectorXd rmse_component(const Eigen::MatrixXd& forecasts, const Eigen::MatrixXd& actuals) {
    if (forecasts.rows() != actuals.rows() || forecasts.cols() != actuals.cols() || forecasts.rows() == 0) {
        throw Error(ErrorCode::InvalidArgument, "panels must have equal non-empty shapes");
    }
    return ((forecasts - actuals).array().square().colwise().mean()).sqrt().transpose();
}

void LossPanel::validate() const {
    if (static_cast<Eigen::Index>(models.size()) != losses.cols() || losses.rows() < 2) {
        throw Error(ErrorCode::InvalidArgument, "loss panel needs one column per model and at least two days");
    }
    if (!losses.allFinite()) throw Error(ErrorCode::InvalidArgument, "loss panel has non-finite entries");
}

std::vector<int> stationary_bootstrap_indices(int n, double mean_block, std::uint64_t seed) {
    Rng rng(seed);
    const double restart = 1.0 / std::max(mean_block, 1.0);
    std::vector<int> idx(static_cast<std::size_t>(n));
    int current = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    for (int t = 0; t < n; ++t) {
        if (t > 0) {
            current = rng.uniform() < restart ? static_cast<int>(rng.below(static_cast<std::uint64_t>(n)))
                                              : (current + 1) % n;
        }
        idx[static_cast<std::size_t>(t)] = current;
    }
    return idx;
}

McsResult mcs(const LossPanel& panel, const McsOptions& options) {
    panel.validate();
    const int n = static_cast<int>(panel.losses.rows());
    const int m = static_cast<int>(panel.losses.cols());
    const Eigen::RowVectorXd mean_loss = panel.losses.colwise().mean();

    // Bootstrap means of every model's loss, one row per resample.
    Eigen::MatrixXd boot(options.n_boot, m);
    parallel_for(static_cast<std::size_t>(options.n_boot), options.jobs, [&](std::size_t b) {
        const auto idx = stationary_bootstrap_indices(n, options.block_length,
                                                      derive_seed(options.seed, static_cast<std::uint64_t>(b)));
        Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(m);
        for (int t : idx) sum += panel.losses.row(t);
        boot.row(static_cast<Eigen::Index>(b)) = sum / static_cast<double>(n);
    });

    McsResult result;
    result.p_values.assign(static_cast<std::size_t>(m), 1.0);
    std::vector<int> alive(static_cast<std::size_t>(m));
    std::iota(alive.begin(), alive.end(), 0);
    double running_p = 0.0;

    while (alive.size() > 1) {
        const int k = static_cast<int>(alive.size());
        // t statistics of all pairs and the bootstrap range statistic.
        Eigen::MatrixXd t_stat = Eigen::MatrixXd::Zero(k, k);
        Eigen::VectorXd boot_range = Eigen::VectorXd::Zero(options.n_boot);
        for (int a = 0; a < k; ++a) {
            for (int b = a + 1; b < k; ++b) {
                const double diff = mean_loss(alive[a]) - mean_loss(alive[b]);
                const Eigen::ArrayXd centered =
                    (boot.col(alive[a]) - boot.col(alive[b])).array() - diff;
                const double var = centered.square().mean();
                double t = 0.0;
                if (var > 0.0) {
                    t = diff / std::sqrt(var);
                    boot_range = boot_range.cwiseMax((centered.abs() / std::sqrt(var)).matrix());
                } else if (diff != 0.0) {
                    t = diff > 0.0 ? std::numeric_limits<double>::infinity()
                                   : -std::numeric_limits<double>::infinity();
                }
                t_stat(a, b) = t;
                t_stat(b, a) = -t;
            }
        }
        const double range = t_stat.cwiseAbs().maxCoeff();
        const double p = range == 0.0 ? 1.0
                                      : static_cast<double>((boot_range.array() >= range).count()) /
                                            static_cast<double>(options.n_boot);
        running_p = std::max(running_p, p);
        if (running_p >= options.alpha) break;

        // Eliminate the model that is worst against its best competitor; the
        // minimum-loss model always has a non-positive row maximum.
        int worst = 0;
        double worst_value = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < k; ++a) {
            const double v = t_stat.row(a).maxCoeff();
            if (v > worst_value) {
                worst_value = v;
                worst = a;
            }
        }
        result.p_values[static_cast<std::size_t>(alive[worst])] = running_p;
        result.eliminated.push_back(alive[worst]);
        alive.erase(alive.begin() + worst);
    }
    const double survivor_p = alive.size() == 1 ? 1.0 : running_p;
    for (int a : alive) result.p_values[static_cast<std::size_t>(a)] = survivor_p;
    result.superior = alive;
    return result;
}

namespace {

struct FrontierTerms {
    Eigen::VectorXd inv_one;
    Eigen::VectorXd inv_mu;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

FrontierTerms frontier_terms(const CovMatrix& sigma, const Eigen::VectorXd& mu) {
    if (mu.size() != sigma.dim()) throw Error(ErrorCode::InvalidArgument, "return vector does not match covariance");
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma.values());
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotPositiveDefinite, "covariance is not PD");
    FrontierTerms f;
    f.inv_one = llt.solve(Eigen::VectorXd::Ones(mu.size()));
    f.inv_mu = llt.solve(mu);
    f.a = f.inv_one.sum();
    f.b = f.inv_mu.sum();
    f.c = mu.dot(f.inv_mu);
    return f;
}

}  // namespace

Eigen::VectorXd min_variance_weights(const CovMatrix& sigma, const Eigen::VectorXd& mu, double target) {
    const FrontierTerms f = frontier_terms(sigma, mu);
    const double spread = mu.maxCoeff() - mu.minCoeff();
    const double scale = std::max(mu.cwiseAbs().maxCoeff(), std::abs(target));
    if (spread <= 1e-14 * std::max(scale, 1e-300)) {
        if (std::abs(target - mu(0)) > 1e-12 * std::max(scale, 1.0)) {
            throw Error(ErrorCode::InfeasibleTarget, "all expected returns are equal and differ from the target");
        }
        return f.inv_one / f.a;
    }
    const double det = f.a * f.c - f.b * f.b;
    const double lambda = (f.c - target * f.b) / det;
    const double gamma = (target * f.a - f.b) / det;
    return lambda * f.inv_one + gamma * f.inv_mu;
}

double gmv_return(const CovMatrix& sigma, const Eigen::VectorXd& mu) {
    const FrontierTerms f = frontier_terms(sigma, mu);
    return f.b / f.a;
}

std::vector<FrontierPoint> efficient_frontier(const std::vector<CovMatrix>& forecasts,
                                              const std::vector<Eigen::VectorXd>& mu,
                                              const std::vector<double>& targets) {
    if (forecasts.size() != mu.size() || forecasts.empty()) {
        throw Error(ErrorCode::InvalidArgument, "one expected-return vector per forecast required");
    }
    std::vector<FrontierPoint> curve;
    for (double target : targets) {
        double sum = 0.0;
        for (std::size_t t = 0; t < forecasts.size(); ++t) {
            const Eigen::VectorXd w = min_variance_weights(forecasts[t], mu[t], target);
            sum += std::sqrt(w.dot(forecasts[t].values() * w));
        }
        curve.push_back({target, sum / static_cast<double>(forecasts.size())});
    }
    return curve;
}

ExPost expost_frontier(const std::vector<Eigen::VectorXd>& weights, const Eigen::MatrixXd& returns,
                       const std::vector<CovMatrix>& realized) {
    const auto n = static_cast<Eigen::Index>(weights.size());
    if (n == 0 || returns.rows() != n || static_cast<Eigen::Index>(realized.size()) != n) {
        throw Error(ErrorCode::InvalidArgument, "weights, returns and realized matrices must be aligned");
    }
    ExPost out{Eigen::VectorXd(n), Eigen::VectorXd(n), 0.0, 0.0};
    for (Eigen::Index t = 0; t < n; ++t) {
        const auto& w = weights[static_cast<std::size_t>(t)];
        out.returns(t) = returns.row(t).dot(w);
        out.sd(t) = std::sqrt(w.dot(realized[static_cast<std::size_t>(t)].values() * w));
    }
    out.avg_return_annual = kTradingDays * out.returns.mean();
    out.avg_sd_annual = std::sqrt(kTradingDays) * out.sd.mean();
    return out;
}

Eigen::VectorXd expected_returns(const Eigen::MatrixXd& returns, int begin, int end) {
    if (begin < 0 || end <= begin || end > returns.rows()) throw Error(ErrorCode::InvalidArgument, "bad return window");
    return returns.middleRows(begin, end - begin).colwise().mean().transpose();
}

}  // namespace vinecast
