#pragma once

// Hand-rolled generators shared by the unit, property and acceptance tests.

#include "vinecast/matrix_core.hpp"
#include "vinecast/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <vector>

namespace testgen {

using vinecast::CorrMatrix;
using vinecast::CovMatrix;
using vinecast::Rng;

inline Eigen::MatrixXd gaussian_matrix(int rows, int cols, Rng& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
    }
    return m;
}

/// Random PD matrix A A' / k + ridge * I with a spread of scales.
inline Eigen::MatrixXd random_pd(int d, Rng& rng, double ridge = 0.05) {
    const int k = d + 2 + static_cast<int>(rng.below(4));
    const Eigen::MatrixXd a = gaussian_matrix(d, k, rng);
    Eigen::MatrixXd s = a * a.transpose() / k + ridge * Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd scale(d);
    for (int i = 0; i < d; ++i) scale(i) = std::exp(rng.normal());
    s = scale.asDiagonal() * s * scale.asDiagonal();
    return 0.5 * (s + s.transpose());
}

inline Eigen::MatrixXd random_corr_values(int d, Rng& rng, double ridge = 0.05) {
    const Eigen::MatrixXd s = random_pd(d, rng, ridge);
    const Eigen::VectorXd inv_sd = s.diagonal().array().rsqrt();
    Eigen::MatrixXd r = inv_sd.asDiagonal() * s * inv_sd.asDiagonal();
    r = 0.5 * (r + r.transpose()).eval();
    r.diagonal().setOnes();
    return r;
}

inline CorrMatrix random_corr(int d, Rng& rng, double ridge = 0.05) { return CorrMatrix(random_corr_values(d, rng, ridge)); }

/// Realized-covariance style observation: mean of `df` outer products of
/// N(0, sigma) draws, i.e. a Wishart(df, sigma / df) matrix.
inline Eigen::MatrixXd wishart_observation(const Eigen::MatrixXd& sigma, int df, Rng& rng) {
    const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL();
    const int d = static_cast<int>(sigma.rows());
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
    for (int k = 0; k < df; ++k) {
        Eigen::VectorXd z(d);
        for (int i = 0; i < d; ++i) z(i) = rng.normal();
        const Eigen::VectorXd x = l * z;
        sum += x * x.transpose();
    }
    sum /= df;
    return 0.5 * (sum + sum.transpose());
}

/// Noisy proxies of a latent covariance with AR(1) log-variances and a slowly
/// moving equicorrelation-plus-perturbation correlation matrix.
inline std::vector<CovMatrix> synthetic_series(int d, int days, std::uint64_t seed, int df = 78) {
    Rng rng(seed);
    const Eigen::MatrixXd base = random_corr_values(d, rng, 0.3);
    Eigen::VectorXd h = Eigen::VectorXd::Zero(d);
    double mix = 0.0;
    std::vector<CovMatrix> out;
    for (int t = 0; t < days; ++t) {
        for (int i = 0; i < d; ++i) h(i) = 0.95 * h(i) + 0.3 * rng.normal();
        mix = 0.97 * mix + 0.05 * rng.normal();
        const double w = 0.5 + 0.4 * std::tanh(mix);
        Eigen::MatrixXd r = w * base + (1.0 - w) * Eigen::MatrixXd::Identity(d, d);
        const Eigen::VectorXd sd = (0.5 * h.array()).exp();
        const Eigen::MatrixXd sigma = sd.asDiagonal() * r * sd.asDiagonal();
        out.emplace_back(wishart_observation(sigma, df, rng), t + 1);
    }
    return out;
}

/// Constant latent covariance observed with Wishart noise.
inline std::vector<CovMatrix> constant_dgp_series(const Eigen::MatrixXd& sigma, int days, int df, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<CovMatrix> out;
    for (int t = 0; t < days; ++t) out.emplace_back(wishart_observation(sigma, df, rng), t + 1);
    return out;
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace testgen
