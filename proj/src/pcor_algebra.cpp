#include "vinecast/pcor_algebra.hpp"

#include "vinecast/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vinecast {

namespace {

void check_range(double rho, const char* what) {
    if (!(std::abs(rho) < 1.0 - kCorrClamp)) {
        throw Error(ErrorCode::CorrelationAtBoundary, std::string(what) + " " + std::to_string(rho) + " at the boundary");
    }
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& r, const std::vector<int>& rows, const std::vector<int>& cols) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = 0; b < cols.size(); ++b) out(a, b) = r(rows[a], cols[b]);
    }
    return out;
}

Eigen::LLT<Eigen::MatrixXd> factor_or_throw(const Eigen::MatrixXd& m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularMatrix, "conditioning block is not PD");
    return llt;
}

// Q = R[{i,j},D] R[D,D]^{-1} R[D,{i,j}].
Eigen::Matrix2d conditional_block(const Eigen::MatrixXd& r, int i, int j, const std::vector<int>& conditioning) {
    const Eigen::MatrixXd cross = submatrix(r, {i, j}, conditioning);
    const auto llt = factor_or_throw(submatrix(r, conditioning, conditioning));
    return cross * llt.solve(cross.transpose());
}

}  // namespace

PcorVector::PcorVector(RVineStructure structure, Eigen::VectorXd values)
    : structure_(std::move(structure)), values_(std::move(values)) {
    if (values_.size() != structure_.edge_count()) {
        throw Error(ErrorCode::InvalidArgument, "partial-correlation vector has the wrong length");
    }
    for (Eigen::Index k = 0; k < values_.size(); ++k) {
        if (!(std::abs(values_(k)) < 1.0)) {
            throw Error(ErrorCode::CorrelationAtBoundary, "partial correlation outside (-1, 1)");
        }
    }
    int offset = 0;
    for (int level = 1; level <= structure_.levels(); ++level) {
        level_offset_.push_back(offset);
        offset += structure_.dim() - level;
    }
}

double PcorVector::value(int level, int edge) const { return values_(level_offset_.at(level - 1) + edge); }

int flat_edge_index(const RVineStructure& structure, int level, int edge) {
    int offset = 0;
    for (int l = 1; l < level; ++l) offset += structure.dim() - l;
    return offset + edge;
}

double pcor_recursion(double rho_ij, double rho_ik, double rho_jk) {
    const double a = 1.0 - rho_ik * rho_ik;
    const double b = 1.0 - rho_jk * rho_jk;
    if (!(a > kCorrClamp) || !(b > kCorrClamp)) {
        throw Error(ErrorCode::DegenerateConditioner, "conditioning correlation at the boundary");
    }
    return (rho_ij - rho_ik * rho_jk) / std::sqrt(a * b);
}

Eigen::MatrixXd pcor_all_from_corr(const Eigen::MatrixXd& omega) {
    const auto n = omega.rows();
    Eigen::LLT<Eigen::MatrixXd> llt(omega);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularMatrix, "matrix is not PD");
    const Eigen::MatrixXd precision = llt.solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index l = 0; l < n; ++l) {
            out(k, l) = k == l ? 1.0 : -precision(k, l) / std::sqrt(precision(k, k) * precision(l, l));
        }
    }
    return out;
}

double pcor_single_block(const Eigen::MatrixXd& r, int i, int j, const std::vector<int>& conditioning) {
    for (int k : conditioning) {
        if (k == i || k == j) throw Error(ErrorCode::InvalidArgument, "conditioning set overlaps the pair");
    }
    if (conditioning.empty()) return r(i, j);
    const Eigen::Matrix2d q = conditional_block(r, i, j, conditioning);
    const double s11 = r(i, i) - q(0, 0);
    const double s22 = r(j, j) - q(1, 1);
    const double s12 = r(i, j) - q(0, 1);
    if (!(s11 > 0.0) || !(s22 > 0.0)) throw Error(ErrorCode::SingularMatrix, "degenerate Schur complement");
    return s12 / std::sqrt(s11 * s22);
}

double pcor_single_block(const CorrMatrix& r, int i, int j, const std::vector<int>& conditioning) {
    return pcor_single_block(r.values(), i, j, conditioning);
}

PcorVector corr_to_pcv(const CorrMatrix& r, const RVineStructure& structure) {
    if (r.dim() != structure.dim()) throw Error(ErrorCode::InvalidArgument, "dimension mismatch");
    const auto& m = r.values();
    Eigen::VectorXd values(structure.edge_count());
    int k = 0;
    for (int level = 1; level <= structure.levels(); ++level) {
        for (const auto& c : structure.constraints()[level - 1]) {
            double rho = 0.0;
            if (level == 1) {
                rho = m(c.i, c.j);
            } else if (level == 2) {
                const int h = c.conditioning.front();
                rho = pcor_recursion(m(c.i, c.j), m(c.i, h), m(c.j, h));
            } else {
                rho = pcor_single_block(m, c.i, c.j, c.conditioning);
            }
            check_range(rho, "partial correlation");
            values(k++) = rho;
        }
    }
    return PcorVector(structure, std::move(values));
}

CorrMatrix pcv_to_corr(const PcorVector& p) {
    const auto& structure = p.structure();
    const int d = structure.dim();
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(d, d);
    for (int level = 1; level <= structure.levels(); ++level) {
        const auto& cons = structure.constraints()[level - 1];
        for (int e = 0; e < static_cast<int>(cons.size()); ++e) {
            const auto& c = cons[e];
            const double partial = p.value(level, e);
            double rho = 0.0;
            if (level == 1) {
                rho = partial;
            } else if (level == 2) {
                const int h = c.conditioning.front();
                const double ra = r(c.i, h);
                const double rb = r(c.j, h);
                rho = partial * std::sqrt(std::max((1.0 - ra * ra) * (1.0 - rb * rb), 0.0)) + ra * rb;
            } else {
                const Eigen::Matrix2d q = conditional_block(r, c.i, c.j, c.conditioning);
                rho = partial * std::sqrt(std::max((1.0 - q(0, 0)) * (1.0 - q(1, 1)), 0.0)) + q(0, 1);
            }
            r(c.i, c.j) = rho;
            r(c.j, c.i) = rho;
        }
    }
    return CorrMatrix::from_construction(std::move(r));
}

}  // namespace vinecast
