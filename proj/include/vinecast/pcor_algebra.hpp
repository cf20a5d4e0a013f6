#pragma once

#include "vinecast/matrix_core.hpp"
#include "vinecast/vine_structure.hpp"

#include <Eigen/Dense>

#include <vector>

namespace vinecast {

/// One (partial) correlation per vine edge, stored in tree order (tree 1
/// first, edges in canonical order within each tree).
class PcorVector {
public:
    PcorVector(RVineStructure structure, Eigen::VectorXd values);

    [[nodiscard]] const RVineStructure& structure() const noexcept { return structure_; }
    [[nodiscard]] const Eigen::VectorXd& values() const noexcept { return values_; }
    [[nodiscard]] double value(int level, int edge) const;
    [[nodiscard]] int size() const noexcept { return static_cast<int>(values_.size()); }

private:
    RVineStructure structure_;
    Eigen::VectorXd values_;
    std::vector<int> level_offset_;
};

/// Flat index of (level, edge) in tree order.
[[nodiscard]] int flat_edge_index(const RVineStructure& structure, int level, int edge);

/// rho_{ij;D u {k}} from three correlations that share the conditioning set D.
[[nodiscard]] double pcor_recursion(double rho_ij, double rho_ik, double rho_jk);

/// Partial correlation of every pair given all remaining indices of `omega`,
/// from its inverse. The diagonal is set to 1.
[[nodiscard]] Eigen::MatrixXd pcor_all_from_corr(const Eigen::MatrixXd& omega);

/// rho_{ij;D} from the 2x2 Schur complement of R restricted to {i, j} u D.
[[nodiscard]] double pcor_single_block(const CorrMatrix& r, int i, int j, const std::vector<int>& conditioning);
[[nodiscard]] double pcor_single_block(const Eigen::MatrixXd& r, int i, int j, const std::vector<int>& conditioning);

[[nodiscard]] PcorVector corr_to_pcv(const CorrMatrix& r, const RVineStructure& structure);

/// Treewise back-transform. Any assignment of values in (-1, 1) yields a
/// positive definite correlation matrix.
[[nodiscard]] CorrMatrix pcv_to_corr(const PcorVector& p);

}  // namespace vinecast
