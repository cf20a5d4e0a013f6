#pragma once

#include "vinecast/matrix_core.hpp"
#include "vinecast/vine_structure.hpp"

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace vinecast {

struct AveragingScheme {
    enum class Kind { Empirical, Ewma };
    Kind kind = Kind::Empirical;
    double lambda = 0.0;

    [[nodiscard]] static AveragingScheme empirical() { return {}; }
    /// Throws InvalidArgument unless 0 < lambda < 1.
    [[nodiscard]] static AveragingScheme ewma(double lambda);
};

/// Normalized day weights (oldest first) for a series of length `t`.
[[nodiscard]] std::vector<double> averaging_weights(std::size_t t, const AveragingScheme& scheme);

[[nodiscard]] CorrMatrix average_corr(const std::vector<CorrMatrix>& series, const AveragingScheme& scheme);

/// Where the tree-2+ weights come from: partial correlations of the averaged
/// matrix, or averages of the daily partial correlations.
enum class PartialWeightSource { FromAverage, AverageOfDaily };

/// Signed weight of a candidate edge; selection uses its absolute value.
using EdgeWeightFn = std::function<double(const EdgeConstraint&)>;

[[nodiscard]] EdgeWeightFn weights_from_average(const CorrMatrix& average);
[[nodiscard]] EdgeWeightFn weights_from_daily(const std::vector<CorrMatrix>& series, const AveragingScheme& scheme);

struct WeightAuditRow {
    EdgeConstraint constraint;
    double weight = 0.0;
    bool selected = false;
};

struct Selection {
    RVineStructure structure;
    std::vector<WeightAuditRow> audit;  ///< every candidate, level by level
};

/// Treewise maximum spanning trees on |weight| over proximity-admissible candidates.
[[nodiscard]] Selection select_structure_mst(int dim, const EdgeWeightFn& weight);
[[nodiscard]] RVineStructure select_structure_mst(const CorrMatrix& average);

/// C-vine whose root at each level minimizes the summed |weight| of the edges it
/// anchors; ties go to the lowest asset index.
[[nodiscard]] RVineStructure select_cvine_min(int dim, const EdgeWeightFn& weight);
[[nodiscard]] RVineStructure select_cvine_min(const CorrMatrix& average);

/// One MST-selected structure per half-open training range [first, last).
[[nodiscard]] std::vector<RVineStructure> moving_structure_schedule(
    const std::vector<CorrMatrix>& series, const std::vector<std::pair<std::size_t, std::size_t>>& windows,
    const AveragingScheme& scheme);

}  // namespace vinecast
