#pragma once

#include "vinecast/bicop.hpp"
#include "vinecast/rng.hpp"
#include "vinecast/vine_structure.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace vinecast {

enum class DependenceMode { Independence, Full, Structured };

struct DependenceSpec {
    DependenceMode mode = DependenceMode::Full;
    FamilySet families = FamilySet::Mixed;
    /// Components modeled jointly in structured mode; all others are
    /// independent of each other and of this subset.
    std::vector<int> dependent_subset;
    double test_level = 0.05;
};

/// Regular-vine copula: a structure over the components plus one pair copula
/// per edge. The pair copula of edge (i, j | D) takes U_{i|D} as its first and
/// U_{j|D} as its second argument (i < j).
class RVineCopula {
public:
    RVineCopula(RVineStructure structure, std::vector<std::vector<PairCopula>> pairs);

    [[nodiscard]] static RVineCopula independence(int dim);

    [[nodiscard]] int dim() const noexcept { return structure_.dim(); }
    [[nodiscard]] const RVineStructure& structure() const noexcept { return structure_; }
    [[nodiscard]] const PairCopula& pair(int level, int edge) const { return pairs_.at(level - 1).at(edge); }
    [[nodiscard]] const std::vector<std::vector<PairCopula>>& pairs() const noexcept { return pairs_; }

    [[nodiscard]] double log_density(const Eigen::VectorXd& u) const;
    [[nodiscard]] double density(const Eigen::VectorXd& u) const;

    /// One draw by inverse h-function sampling.
    [[nodiscard]] Eigen::VectorXd simulate_one(Rng& rng) const;
    [[nodiscard]] Eigen::MatrixXd simulate(int n, std::uint64_t seed) const;

private:
    struct Links {
        int child_i;  ///< node of the previous tree carrying variable i
        int child_j;
    };
    struct SamplingStep {
        int variable;
        std::vector<int> edges;  ///< edge index at levels 1..L
    };

    [[nodiscard]] double node_value(const std::vector<std::vector<Eigen::Vector2d>>& out, const Eigen::VectorXd& u,
                                    int level, int node, int variable) const;

    RVineStructure structure_;
    std::vector<std::vector<PairCopula>> pairs_;
    std::vector<std::vector<Links>> links_;
    std::vector<SamplingStep> plan_;
};

struct RVineFitOptions {
    int jobs = 1;
};

/// Tree-by-tree fit on pseudo-observations (rows = observations). Each tree is
/// the maximum spanning tree on |empirical Kendall tau| over admissible pairs.
[[nodiscard]] RVineCopula rvine_fit(const Eigen::MatrixXd& u, const DependenceSpec& spec,
                                    const RVineFitOptions& options = {});

[[nodiscard]] nlohmann::json to_json(const RVineCopula& copula);
[[nodiscard]] RVineCopula copula_from_json(const nlohmann::json& j);

}  // namespace vinecast
