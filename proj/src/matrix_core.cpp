#include "vinecast/matrix_core.hpp"

#include "vinecast/error.hpp"

#include <cmath>
#include <string>

namespace vinecast {

void symmetrize_or_throw(Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw Error(ErrorCode::InvalidArgument, "matrix must be square and non-empty");
    }
    if (!m.allFinite()) throw Error(ErrorCode::InvalidArgument, "matrix has non-finite entries");
    const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTolerance * scale) {
        throw Error(ErrorCode::InvalidArgument,
                    "matrix asymmetry " + std::to_string(asym / scale) + " exceeds tolerance");
    }
    m = 0.5 * (m + m.transpose()).eval();
}

double smallest_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

CovMatrix::CovMatrix(Eigen::MatrixXd values, std::optional<long> day)
    : values_(std::move(values)), day_(day) {
    symmetrize_or_throw(values_);
    if ((values_.diagonal().array() <= 0.0).any()) {
        throw Error(ErrorCode::NotPositiveDefinite, "covariance has a non-positive variance");
    }
    const double lambda_min = smallest_eigenvalue(values_);
    if (!(lambda_min > kPdEpsilon)) {
        throw Error(ErrorCode::NotPositiveDefinite,
                    "covariance smallest eigenvalue " + std::to_string(lambda_min));
    }
}

namespace {

void check_correlation_shape(Eigen::MatrixXd& values) {
    symmetrize_or_throw(values);
    const auto d = values.rows();
    for (Eigen::Index i = 0; i < d; ++i) {
        if (std::abs(values(i, i) - 1.0) > kSymmetryTolerance) {
            throw Error(ErrorCode::InvalidArgument, "correlation matrix needs a unit diagonal");
        }
        values(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < d; ++j) {
            if (!(std::abs(values(i, j)) < 1.0)) {
                throw Error(ErrorCode::CorrelationAtBoundary, "off-diagonal correlation outside (-1, 1)");
            }
        }
    }
}

}  // namespace

CorrMatrix::CorrMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    check_correlation_shape(values_);
    const double lambda_min = smallest_eigenvalue(values_);
    if (!(lambda_min > kPdEpsilon)) {
        throw Error(ErrorCode::NotPositiveDefinite,
                    "correlation smallest eigenvalue " + std::to_string(lambda_min));
    }
}

CorrMatrix CorrMatrix::from_construction(Eigen::MatrixXd values) {
    check_correlation_shape(values);
    Eigen::LLT<Eigen::MatrixXd> llt(values);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::NotPositiveDefinite, "constructed correlation matrix is not PD");
    }
    return CorrMatrix(std::move(values), Unchecked{});
}

CorrMatrix CorrMatrix::identity(int dim) {
    return CorrMatrix(Eigen::MatrixXd::Identity(dim, dim), Unchecked{});
}

VarianceVector::VarianceVector(Eigen::VectorXd values) : values_(std::move(values)) {
    if (values_.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty variance vector");
    if (!values_.allFinite() || (values_.array() <= 0.0).any()) {
        throw Error(ErrorCode::InvalidArgument, "variances must be finite and strictly positive");
    }
}

UpperTriangular::UpperTriangular(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() != values_.cols() || values_.rows() == 0) {
        throw Error(ErrorCode::InvalidArgument, "Cholesky factor must be square");
    }
    if (!values_.allFinite()) throw Error(ErrorCode::InvalidArgument, "Cholesky factor not finite");
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            if (values_(i, j) != 0.0) {
                throw Error(ErrorCode::InvalidArgument, "Cholesky factor must be upper triangular");
            }
        }
    }
}

IntradayPanel::IntradayPanel(int assets, std::vector<Eigen::MatrixXd> days)
    : assets_(assets), days_(std::move(days)) {
    if (assets_ < 1) throw Error(ErrorCode::InvalidArgument, "panel needs at least one asset");
    for (const auto& block : days_) {
        if (block.rows() > 0 && block.cols() != assets_) {
            throw Error(ErrorCode::InvalidArgument, "intraday block has the wrong asset count");
        }
        if (!block.allFinite()) throw Error(ErrorCode::InvalidArgument, "intraday returns must be finite");
    }
}

namespace {

CovMatrix validated_realized(Eigen::MatrixXd y, std::size_t day) {
    y = 0.5 * (y + y.transpose()).eval();
    const double lambda_min = smallest_eigenvalue(y);
    if (!(lambda_min > kPdEpsilon) || (y.diagonal().array() <= 0.0).any()) {
        throw Error(ErrorCode::SingularRealizedCov,
                    "day " + std::to_string(day) + ": smallest eigenvalue " + std::to_string(lambda_min));
    }
    return CovMatrix(std::move(y), static_cast<long>(day));
}

}  // namespace

CovMatrix realized_cov(const IntradayPanel& panel, std::size_t day) {
    if (day >= panel.days()) throw Error(ErrorCode::InvalidArgument, "day out of range");
    const Eigen::MatrixXd& r = panel.day(day);
    if (r.rows() == 0) throw Error(ErrorCode::SingularRealizedCov, "day has no intraday returns");
    return validated_realized(r.transpose() * r, day);
}

Eigen::MatrixXd coarse_returns(const Eigen::MatrixXd& fine, int grid_stride, int shift,
                               bool drop_partial_intervals) {
    const int m = static_cast<int>(fine.rows());
    std::vector<std::pair<int, int>> intervals;
    if (!drop_partial_intervals && shift > 0) intervals.emplace_back(0, std::min(shift, m));
    int start = shift;
    for (; start + grid_stride <= m; start += grid_stride) intervals.emplace_back(start, start + grid_stride);
    if (!drop_partial_intervals && start < m) intervals.emplace_back(start, m);

    Eigen::MatrixXd coarse(static_cast<Eigen::Index>(intervals.size()), fine.cols());
    for (std::size_t k = 0; k < intervals.size(); ++k) {
        const auto [a, b] = intervals[k];
        coarse.row(static_cast<Eigen::Index>(k)) = fine.middleRows(a, b - a).colwise().sum();
    }
    return coarse;
}

CovMatrix realized_cov_subsampled(const IntradayPanel& panel_fine, int grid_stride, int n_shifts,
                                  std::size_t day, bool drop_partial_intervals) {
    if (day >= panel_fine.days()) throw Error(ErrorCode::InvalidArgument, "day out of range");
    if (grid_stride < 1 || n_shifts < 1 || n_shifts > grid_stride) {
        throw Error(ErrorCode::InvalidArgument, "need 1 <= n_shifts <= grid_stride");
    }
    const Eigen::MatrixXd& fine = panel_fine.day(day);
    if (fine.rows() == 0) throw Error(ErrorCode::SingularRealizedCov, "day has no intraday returns");
    const auto d = fine.cols();
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
    for (int k = 0; k < n_shifts; ++k) {
        const Eigen::MatrixXd r = coarse_returns(fine, grid_stride, k, drop_partial_intervals);
        sum += r.transpose() * r;
    }
    return validated_realized(sum / static_cast<double>(n_shifts), day);
}

std::pair<VarianceVector, CorrMatrix> split_cov(const CovMatrix& y) {
    const Eigen::VectorXd vars = y.values().diagonal();
    const Eigen::VectorXd inv_sd = vars.array().sqrt().inverse();
    Eigen::MatrixXd r = inv_sd.asDiagonal() * y.values() * inv_sd.asDiagonal();
    r.diagonal().setOnes();
    return {VarianceVector(vars), CorrMatrix::from_construction(std::move(r))};
}

CovMatrix assemble_cov(const VarianceVector& variances, const CorrMatrix& r) {
    if (variances.dim() != r.dim()) throw Error(ErrorCode::InvalidArgument, "dimension mismatch");
    const Eigen::VectorXd sd = variances.values().array().sqrt();
    Eigen::MatrixXd y = sd.asDiagonal() * r.values() * sd.asDiagonal();
    y.diagonal() = variances.values();
    return CovMatrix(std::move(y));
}

UpperTriangular cholesky_decompose(const CovMatrix& y) {
    const int d = y.dim();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        double pivot = y(i, i);
        for (int k = 0; k < i; ++k) pivot -= c(k, i) * c(k, i);
        if (!(pivot > 0.0)) {
            throw Error(ErrorCode::NotPositiveDefinite, "non-positive Cholesky pivot at row " + std::to_string(i));
        }
        c(i, i) = std::sqrt(pivot);
        for (int j = i + 1; j < d; ++j) {
            double s = y(i, j);
            for (int k = 0; k < i; ++k) s -= c(k, i) * c(k, j);
            c(i, j) = s / c(i, i);
        }
    }
    return UpperTriangular(std::move(c));
}

CovMatrix cholesky_rebuild(const UpperTriangular& c) {
    const int d = c.dim();
    Eigen::MatrixXd y(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            double s = 0.0;
            for (int k = 0; k <= i; ++k) s += c(k, i) * c(k, j);
            y(i, j) = s;
            y(j, i) = s;
        }
    }
    return CovMatrix(std::move(y));
}

double fisher_z(double rho) {
    if (!(std::abs(rho) <= 1.0 - kCorrClamp)) {
        throw Error(ErrorCode::CorrelationAtBoundary, "correlation " + std::to_string(rho) + " at the boundary");
    }
    return std::atanh(rho);
}

double fisher_z_inv(double z) { return std::tanh(z); }

}  // namespace vinecast
