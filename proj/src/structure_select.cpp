#include "vinecast/structure_select.hpp"

#include "vinecast/error.hpp"
#include "vinecast/pcor_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vinecast {

AveragingScheme AveragingScheme::ewma(double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw Error(ErrorCode::InvalidArgument, "EWMA lambda must lie in (0, 1)");
    return {Kind::Ewma, lambda};
}

std::vector<double> averaging_weights(std::size_t t, const AveragingScheme& scheme) {
    if (t == 0) throw Error(ErrorCode::InvalidArgument, "cannot average an empty series");
    std::vector<double> w(t, 1.0 / static_cast<double>(t));
    if (scheme.kind == AveragingScheme::Kind::Ewma) {
        // (1 - lambda) lambda^(T - t), normalized by 1 - lambda^T.
        double sum = 0.0;
        for (std::size_t k = 0; k < t; ++k) {
            w[k] = (1.0 - scheme.lambda) * std::pow(scheme.lambda, static_cast<double>(t - 1 - k));
            sum += w[k];
        }
        for (auto& x : w) x /= sum;
    }
    return w;
}

CorrMatrix average_corr(const std::vector<CorrMatrix>& series, const AveragingScheme& scheme) {
    const auto w = averaging_weights(series.size(), scheme);
    const int d = series.front().dim();
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t k = 0; k < series.size(); ++k) {
        if (series[k].dim() != d) throw Error(ErrorCode::InvalidArgument, "correlation series has mixed dimensions");
        sum += w[k] * series[k].values();
    }
    sum.diagonal().setOnes();
    return CorrMatrix::from_construction(std::move(sum));
}

EdgeWeightFn weights_from_average(const CorrMatrix& average) {
    return [m = average.values()](const EdgeConstraint& c) {
        return pcor_single_block(m, c.i, c.j, c.conditioning);
    };
}

EdgeWeightFn weights_from_daily(const std::vector<CorrMatrix>& series, const AveragingScheme& scheme) {
    return [&series, w = averaging_weights(series.size(), scheme)](const EdgeConstraint& c) {
        double sum = 0.0;
        for (std::size_t k = 0; k < series.size(); ++k) {
            sum += w[k] * pcor_single_block(series[k].values(), c.i, c.j, c.conditioning);
        }
        return sum;
    };
}

Selection select_structure_mst(int dim, const EdgeWeightFn& weight) {
    if (dim < 2) throw Error(ErrorCode::InvalidArgument, "dimension must be at least 2");
    VineTrees vt;
    vt.dim = dim;
    std::vector<WeightAuditRow> audit;
    for (int level = 1; level < dim; ++level) {
        const auto candidates = admissible_candidates(vt);
        std::vector<double> signed_w;
        std::vector<double> abs_w;
        for (const auto& c : candidates) {
            signed_w.push_back(weight(c.constraint));
            abs_w.push_back(std::abs(signed_w.back()));
        }
        const auto chosen = max_spanning_tree(dim - level + 1, candidates, abs_w);
        std::vector<char> is_chosen(candidates.size(), 0);
        std::vector<VineEdge> edges;
        for (auto k : chosen) {
            is_chosen[k] = 1;
            edges.push_back(candidates[k].edge);
        }
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            audit.push_back({candidates[k].constraint, signed_w[k], is_chosen[k] != 0});
        }
        vt.trees.push_back(std::move(edges));
    }
    return {RVineStructure(std::move(vt)), std::move(audit)};
}

RVineStructure select_structure_mst(const CorrMatrix& average) {
    return select_structure_mst(average.dim(), weights_from_average(average)).structure;
}

RVineStructure select_cvine_min(int dim, const EdgeWeightFn& weight) {
    if (dim < 2) throw Error(ErrorCode::InvalidArgument, "dimension must be at least 2");
    std::vector<int> order;
    std::vector<int> remaining(static_cast<std::size_t>(dim));
    std::iota(remaining.begin(), remaining.end(), 0);
    while (remaining.size() > 1) {
        std::vector<int> conditioning = order;
        std::sort(conditioning.begin(), conditioning.end());
        const int level = static_cast<int>(order.size()) + 1;
        std::size_t best = 0;
        double best_sum = 0.0;
        for (std::size_t x = 0; x < remaining.size(); ++x) {
            double sum = 0.0;
            for (std::size_t y = 0; y < remaining.size(); ++y) {
                if (x == y) continue;
                const int i = std::min(remaining[x], remaining[y]);
                const int j = std::max(remaining[x], remaining[y]);
                sum += std::abs(weight(EdgeConstraint{i, j, conditioning, level}));
            }
            if (x == 0 || sum < best_sum) {
                best = x;
                best_sum = sum;
            }
        }
        order.push_back(remaining[best]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    }
    order.push_back(remaining.front());
    return build_cvine(order);
}

RVineStructure select_cvine_min(const CorrMatrix& average) {
    return select_cvine_min(average.dim(), weights_from_average(average));
}

std::vector<RVineStructure> moving_structure_schedule(
    const std::vector<CorrMatrix>& series, const std::vector<std::pair<std::size_t, std::size_t>>& windows,
    const AveragingScheme& scheme) {
    std::vector<RVineStructure> out;
    for (const auto& [first, last] : windows) {
        if (first >= last || last > series.size()) throw Error(ErrorCode::InvalidArgument, "bad training range");
        const std::vector<CorrMatrix> train(series.begin() + static_cast<std::ptrdiff_t>(first),
                                            series.begin() + static_cast<std::ptrdiff_t>(last));
        out.push_back(select_structure_mst(average_corr(train, scheme)));
    }
    return out;
}

}  // namespace vinecast
