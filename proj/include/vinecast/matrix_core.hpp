#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace vinecast {

/// Smallest eigenvalue a matrix must exceed to count as positive definite.
inline constexpr double kPdEpsilon = 1e-10;
/// Correlations with |rho| > 1 - kCorrClamp are treated as degenerate.
inline constexpr double kCorrClamp = 1e-7;
/// Relative asymmetry tolerated (and removed) before validation.
inline constexpr double kSymmetryTolerance = 1e-12;

/// Symmetrizes `m` in place when its relative asymmetry is within tolerance;
/// throws InvalidArgument otherwise.
void symmetrize_or_throw(Eigen::MatrixXd& m);

[[nodiscard]] double smallest_eigenvalue(const Eigen::MatrixXd& m);

/// Realized (co)variance matrix of one day. Symmetric, positive definite,
/// strictly positive diagonal.
class CovMatrix {
public:
    explicit CovMatrix(Eigen::MatrixXd values, std::optional<long> day = std::nullopt);

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(values_.rows()); }
    [[nodiscard]] const Eigen::MatrixXd& values() const noexcept { return values_; }
    [[nodiscard]] double operator()(int i, int j) const { return values_(i, j); }
    [[nodiscard]] std::optional<long> day() const noexcept { return day_; }
    void set_day(std::optional<long> day) noexcept { day_ = day; }

private:
    Eigen::MatrixXd values_;
    std::optional<long> day_;
};

/// Correlation matrix: symmetric, exact unit diagonal, off-diagonals in (-1, 1),
/// positive definite.
class CorrMatrix {
public:
    explicit CorrMatrix(Eigen::MatrixXd values);

    /// For matrices that are PD by construction (vine back-transform, convex
    /// averages). Only requires a successful Cholesky factorization rather than
    /// the kPdEpsilon eigenvalue margin, since products of many (1 - rho^2)
    /// factors can legitimately push the smallest eigenvalue below it.
    [[nodiscard]] static CorrMatrix from_construction(Eigen::MatrixXd values);

    [[nodiscard]] static CorrMatrix identity(int dim);

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(values_.rows()); }
    [[nodiscard]] const Eigen::MatrixXd& values() const noexcept { return values_; }
    [[nodiscard]] double operator()(int i, int j) const { return values_(i, j); }

private:
    struct Unchecked {};
    CorrMatrix(Eigen::MatrixXd values, Unchecked) : values_(std::move(values)) {}
    Eigen::MatrixXd values_;
};

class VarianceVector {
public:
    explicit VarianceVector(Eigen::VectorXd values);

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(values_.size()); }
    [[nodiscard]] const Eigen::VectorXd& values() const noexcept { return values_; }
    [[nodiscard]] double operator[](int i) const { return values_(i); }

private:
    Eigen::VectorXd values_;
};

/// Upper-triangular Cholesky factor C with Y = C'C.
class UpperTriangular {
public:
    explicit UpperTriangular(Eigen::MatrixXd values);

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(values_.rows()); }
    [[nodiscard]] const Eigen::MatrixXd& values() const noexcept { return values_; }
    [[nodiscard]] double operator()(int i, int j) const { return values_(i, j); }

private:
    Eigen::MatrixXd values_;
};

/// Intraday log-returns: one (periods x assets) block per day. Days may be
/// empty (no observations), which ingestion skips.
class IntradayPanel {
public:
    IntradayPanel(int assets, std::vector<Eigen::MatrixXd> days);

    [[nodiscard]] int assets() const noexcept { return assets_; }
    [[nodiscard]] std::size_t days() const noexcept { return days_.size(); }
    [[nodiscard]] const Eigen::MatrixXd& day(std::size_t t) const { return days_.at(t); }
    [[nodiscard]] int periods(std::size_t t) const { return static_cast<int>(days_.at(t).rows()); }

private:
    int assets_;
    std::vector<Eigen::MatrixXd> days_;
};

[[nodiscard]] CovMatrix realized_cov(const IntradayPanel& panel, std::size_t day);

/// Average of `n_shifts` realized covariances, the k-th computed on the coarse
/// grid of `grid_stride` fine periods shifted by k fine periods. With
/// `drop_partial_intervals` only complete coarse intervals enter each grid;
/// otherwise the leading and trailing partial intervals are kept as returns.
[[nodiscard]] CovMatrix realized_cov_subsampled(const IntradayPanel& panel_fine, int grid_stride,
                                                int n_shifts, std::size_t day,
                                                bool drop_partial_intervals = true);

/// Coarse returns of one shifted grid (exposed for the ingestion tests).
[[nodiscard]] Eigen::MatrixXd coarse_returns(const Eigen::MatrixXd& fine, int grid_stride, int shift,
                                             bool drop_partial_intervals);

[[nodiscard]] std::pair<VarianceVector, CorrMatrix> split_cov(const CovMatrix& y);
[[nodiscard]] CovMatrix assemble_cov(const VarianceVector& variances, const CorrMatrix& r);

[[nodiscard]] UpperTriangular cholesky_decompose(const CovMatrix& y);
[[nodiscard]] CovMatrix cholesky_rebuild(const UpperTriangular& c);

[[nodiscard]] double fisher_z(double rho);
[[nodiscard]] double fisher_z_inv(double z);

}  // namespace vinecast
