#include "vinecast/rvine_copula.hpp"

#include "vinecast/error.hpp"
#include "vinecast/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>

namespace vinecast {

RVineCopula::RVineCopula(RVineStructure structure, std::vector<std::vector<PairCopula>> pairs)
    : structure_(std::move(structure)), pairs_(std::move(pairs)) {
    if (static_cast<int>(pairs_.size()) != structure_.levels()) {
        throw Error(ErrorCode::InvalidArgument, "one pair-copula list per tree required");
    }
    for (int level = 1; level <= structure_.levels(); ++level) {
        if (pairs_[level - 1].size() != structure_.tree(level).size()) {
            throw Error(ErrorCode::InvalidArgument, "one pair copula per edge required");
        }
        std::vector<Links> links;
        for (int e = 0; e < static_cast<int>(structure_.tree(level).size()); ++e) {
            pairs_[level - 1][e].validate();
            const auto& c = structure_.constraint(level, e);
            const auto& edge = structure_.tree(level)[e];
            const bool a_is_i = structure_.conditioned_from(level, e, 0) == c.i;
            links.push_back(a_is_i ? Links{edge.a, edge.b} : Links{edge.b, edge.a});
        }
        links_.push_back(std::move(links));
    }

    // Peel: the larger conditioned variable x of the current top edge occurs in
    // exactly one remaining edge per level; removing those edges leaves a vine
    // on the other variables. Sampling runs in reverse peel order.
    const int d = structure_.dim();
    std::vector<std::vector<char>> active;
    for (int level = 1; level < d; ++level) active.emplace_back(structure_.tree(level).size(), 1);
    std::vector<char> remaining(static_cast<std::size_t>(d), 1);
    std::vector<SamplingStep> peel;
    for (int top = d - 1; top >= 1; --top) {
        int top_edge = -1;
        for (int e = 0; e < static_cast<int>(active[top - 1].size()); ++e) {
            if (active[top - 1][e]) top_edge = e;
        }
        const int x = structure_.constraint(top, top_edge).j;
        SamplingStep step{x, {}};
        for (int level = 1; level <= top; ++level) {
            int found = -1;
            for (int e = 0; e < static_cast<int>(active[level - 1].size()); ++e) {
                const auto& c = structure_.constraint(level, e);
                if (active[level - 1][e] && (c.i == x || c.j == x)) {
                    if (found >= 0) throw Error(ErrorCode::InvalidStructure, "vine cannot be peeled");
                    found = e;
                }
            }
            if (found < 0) throw Error(ErrorCode::InvalidStructure, "vine cannot be peeled");
            active[level - 1][found] = 0;
            step.edges.push_back(found);
        }
        remaining[x] = 0;
        peel.push_back(std::move(step));
    }
    for (int v = 0; v < d; ++v) {
        if (remaining[v]) peel.push_back({v, {}});
    }
    plan_.assign(peel.rbegin(), peel.rend());
}

RVineCopula RVineCopula::independence(int dim) {
    std::vector<int> order(static_cast<std::size_t>(dim));
    std::iota(order.begin(), order.end(), 0);
    RVineStructure s = build_cvine(order);
    std::vector<std::vector<PairCopula>> pairs;
    for (int level = 1; level <= s.levels(); ++level) pairs.emplace_back(s.tree(level).size(), PairCopula{});
    return RVineCopula(std::move(s), std::move(pairs));
}

double RVineCopula::node_value(const std::vector<std::vector<Eigen::Vector2d>>& out, const Eigen::VectorXd& u,
                               int level, int node, int variable) const {
    if (level == 0) return u(node);
    return out[level - 1][node](structure_.constraint(level, node).i == variable ? 0 : 1);
}

double RVineCopula::log_density(const Eigen::VectorXd& u) const {
    if (u.size() != dim()) throw Error(ErrorCode::InvalidArgument, "point has the wrong dimension");
    std::vector<std::vector<Eigen::Vector2d>> out;
    double log_c = 0.0;
    for (int level = 1; level <= structure_.levels(); ++level) {
        std::vector<Eigen::Vector2d> level_out;
        for (int e = 0; e < static_cast<int>(links_[level - 1].size()); ++e) {
            const auto& c = structure_.constraint(level, e);
            const auto& pc = pairs_[level - 1][e];
            const double a = node_value(out, u, level - 1, links_[level - 1][e].child_i, c.i);
            const double b = node_value(out, u, level - 1, links_[level - 1][e].child_j, c.j);
            if (pc.family != Family::Independence) log_c += std::log(bicop_pdf(pc, a, b));
            level_out.emplace_back(bicop_h1(pc, a, b), bicop_h2(pc, a, b));
        }
        out.push_back(std::move(level_out));
    }
    return log_c;
}

double RVineCopula::density(const Eigen::VectorXd& u) const { return std::exp(log_density(u)); }

Eigen::VectorXd RVineCopula::simulate_one(Rng& rng) const {
    const int d = dim();
    Eigen::VectorXd u(d);
    std::vector<std::vector<Eigen::Vector2d>> out;
    for (int level = 1; level < d; ++level) out.emplace_back(structure_.tree(level).size(), Eigen::Vector2d::Zero());

    std::vector<double> chain;
    for (const auto& step : plan_) {
        const int x = step.variable;
        const int depth = static_cast<int>(step.edges.size());
        chain.assign(static_cast<std::size_t>(depth) + 1, 0.0);
        chain[depth] = rng.uniform();
        // chain[l] = F(x | first l partners); invert from the deepest edge down.
        for (int level = depth; level >= 1; --level) {
            const int e = step.edges[level - 1];
            const auto& c = structure_.constraint(level, e);
            const auto& pc = pairs_[level - 1][e];
            if (c.i == x) {
                const double other = node_value(out, u, level - 1, links_[level - 1][e].child_j, c.j);
                chain[level - 1] = bicop_hinv1(pc, chain[level], other);
            } else {
                const double other = node_value(out, u, level - 1, links_[level - 1][e].child_i, c.i);
                chain[level - 1] = bicop_hinv2(pc, other, chain[level]);
            }
        }
        u(x) = chain[0];
        for (int level = 1; level <= depth; ++level) {
            const int e = step.edges[level - 1];
            const auto& c = structure_.constraint(level, e);
            const auto& pc = pairs_[level - 1][e];
            const double a = c.i == x ? chain[level - 1]
                                      : node_value(out, u, level - 1, links_[level - 1][e].child_i, c.i);
            const double b = c.j == x ? chain[level - 1]
                                      : node_value(out, u, level - 1, links_[level - 1][e].child_j, c.j);
            out[level - 1][e] = Eigen::Vector2d(bicop_h1(pc, a, b), bicop_h2(pc, a, b));
        }
    }
    return u;
}

Eigen::MatrixXd RVineCopula::simulate(int n, std::uint64_t seed) const {
    Rng rng(seed);
    Eigen::MatrixXd sample(n, dim());
    for (int k = 0; k < n; ++k) sample.row(k) = simulate_one(rng).transpose();
    return sample;
}

namespace {

struct LocalFit {
    VineTrees trees;
    std::map<std::pair<int, int>, PairCopula> pairs;  ///< keyed by conditioned pair
};

// Sequential fit on the columns of u (local labels 0..m-1).
LocalFit fit_local(const Eigen::MatrixXd& u, const BicopFitOptions& bicop_options, int jobs) {
    const int m = static_cast<int>(u.cols());
    LocalFit result;
    result.trees.dim = m;
    // Outputs of the nodes of the current top tree: per node, F(i|...) and F(j|...).
    std::vector<std::array<Eigen::VectorXd, 2>> outputs;
    std::vector<EdgeConstraint> node_constraints;
    auto value = [&](int level, int node, int variable) -> Eigen::VectorXd {
        if (level == 0) return u.col(node);
        return outputs[node][node_constraints[node].i == variable ? 0 : 1];
    };
    auto holds = [&](int level, int node, int variable) {
        if (level == 0) return node == variable;
        const auto& c = node_constraints[node];
        return c.i == variable || c.j == variable ||
               std::binary_search(c.conditioning.begin(), c.conditioning.end(), variable);
    };

    for (int level = 1; level < m; ++level) {
        const auto candidates = admissible_candidates(result.trees);
        std::vector<std::array<Eigen::VectorXd, 2>> args(candidates.size());
        std::vector<double> weights(candidates.size());
        parallel_for(candidates.size(), jobs, [&](std::size_t k) {
            const auto& cand = candidates[k];
            const auto& c = cand.constraint;
            const int node_i = holds(level - 1, cand.edge.a, c.i) ? cand.edge.a : cand.edge.b;
            const int node_j = node_i == cand.edge.a ? cand.edge.b : cand.edge.a;
            args[k] = {value(level - 1, node_i, c.i), value(level - 1, node_j, c.j)};
            weights[k] = std::abs(kendall_tau(args[k][0], args[k][1]));
        });
        const auto chosen = max_spanning_tree(m - level + 1, candidates, weights);

        std::vector<PairCopula> fitted(chosen.size());
        std::vector<std::array<Eigen::VectorXd, 2>> next_outputs(chosen.size());
        parallel_for(chosen.size(), jobs, [&](std::size_t k) {
            const auto& a = args[chosen[k]];
            fitted[k] = bicop_fit(a[0], a[1], bicop_options);
            Eigen::VectorXd h1(a[0].size());
            Eigen::VectorXd h2(a[0].size());
            for (Eigen::Index t = 0; t < a[0].size(); ++t) {
                h1(t) = bicop_h1(fitted[k], a[0](t), a[1](t));
                h2(t) = bicop_h2(fitted[k], a[0](t), a[1](t));
            }
            next_outputs[k] = {std::move(h1), std::move(h2)};
        });

        std::vector<VineEdge> edges;
        std::vector<EdgeConstraint> next_constraints;
        for (std::size_t k = 0; k < chosen.size(); ++k) {
            const auto& cand = candidates[chosen[k]];
            edges.push_back(cand.edge);
            next_constraints.push_back(cand.constraint);
            result.pairs[{cand.constraint.i, cand.constraint.j}] = fitted[k];
        }
        result.trees.trees.push_back(std::move(edges));
        outputs = std::move(next_outputs);
        node_constraints = std::move(next_constraints);
    }
    return result;
}

// Adds one variable (label = current dim) joined by a chain of edges
// that runs from the top edge down to tree 1.
void extend_by_one(VineTrees& vt) {
    const int m = vt.dim;
    const int x = m;
    if (m == 1) {
        vt.trees.push_back({{0, x}});
        vt.dim = 2;
        return;
    }
    // chain[l - 1] = index of the chosen edge at level l.
    std::vector<int> chain(static_cast<std::size_t>(m - 1));
    chain[m - 2] = 0;
    for (int level = m - 1; level >= 2; --level) chain[level - 2] = vt.trees[level - 1][chain[level - 1]].a;
    const int partner = vt.trees[0][chain[0]].a;

    vt.trees[0].push_back({partner, x});
    int previous = static_cast<int>(vt.trees[0].size()) - 1;
    for (int level = 2; level <= m; ++level) {
        if (level - 1 == static_cast<int>(vt.trees.size())) vt.trees.emplace_back();
        vt.trees[level - 1].push_back({previous, chain[level - 2]});
        previous = static_cast<int>(vt.trees[level - 1].size()) - 1;
    }
    vt.dim = m + 1;
}

RVineCopula assemble(VineTrees vt, const std::vector<int>& global_label,
                     const std::map<std::pair<int, int>, PairCopula>& local_pairs) {
    std::map<std::pair<int, int>, PairCopula> pairs;
    for (const auto& [key, pc] : local_pairs) {
        int i = global_label[key.first];
        int j = global_label[key.second];
        if (i > j) std::swap(i, j);
        // Local (i, j) orientation may flip under relabeling; reflect the copula.
        PairCopula oriented = pc;
        if (global_label[key.first] > global_label[key.second] && pc.family != Family::Independence) {
            oriented.rotation = pc.rotation == 90 ? 270 : (pc.rotation == 270 ? 90 : pc.rotation);
        }
        pairs[{i, j}] = oriented;
    }
    for (auto& e : vt.trees[0]) {
        e.a = global_label[e.a];
        e.b = global_label[e.b];
    }
    RVineStructure structure(std::move(vt));
    std::vector<std::vector<PairCopula>> ordered;
    for (int level = 1; level <= structure.levels(); ++level) {
        std::vector<PairCopula> row;
        for (const auto& c : structure.constraints()[level - 1]) {
            const auto it = pairs.find({c.i, c.j});
            row.push_back(it == pairs.end() ? PairCopula{} : it->second);
        }
        ordered.push_back(std::move(row));
    }
    return RVineCopula(std::move(structure), std::move(ordered));
}

}  // namespace

RVineCopula rvine_fit(const Eigen::MatrixXd& u, const DependenceSpec& spec, const RVineFitOptions& options) {
    const int k = static_cast<int>(u.cols());
    if (k < 2) throw Error(ErrorCode::InvalidArgument, "copula needs at least two components");
    if (spec.mode == DependenceMode::Independence) return RVineCopula::independence(k);

    BicopFitOptions bicop_options;
    bicop_options.families = spec.families;
    bicop_options.test_level = spec.test_level;

    std::vector<int> subset(static_cast<std::size_t>(k));
    std::iota(subset.begin(), subset.end(), 0);
    if (spec.mode == DependenceMode::Structured) {
        subset = spec.dependent_subset;
        std::sort(subset.begin(), subset.end());
        subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
        if (subset.empty() || subset.front() < 0 || subset.back() >= k) {
            throw Error(ErrorCode::InvalidArgument, "structured mode needs a dependent subset within range");
        }
    }
    Eigen::MatrixXd sub(u.rows(), static_cast<Eigen::Index>(subset.size()));
    for (std::size_t c = 0; c < subset.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = u.col(subset[c]);

    LocalFit local;
    if (subset.size() >= 2) {
        local = fit_local(sub, bicop_options, options.jobs);
    } else {
        local.trees.dim = 1;
    }
    std::vector<int> global_label = subset;
    for (int c = 0; c < k; ++c) {
        if (!std::binary_search(subset.begin(), subset.end(), c)) {
            extend_by_one(local.trees);
            global_label.push_back(c);
        }
    }
    return assemble(std::move(local.trees), global_label, local.pairs);
}

nlohmann::json to_json(const RVineCopula& copula) {
    nlohmann::json j = to_json(copula.structure());
    for (int level = 1; level <= copula.structure().levels(); ++level) {
        auto& edges = j["trees"][level - 1];
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const auto& pc = copula.pair(level, static_cast<int>(e));
            edges[e]["family"] = to_string(pc.family);
            edges[e]["rotation"] = pc.rotation;
            edges[e]["params"] = pc.family == Family::Independence ? nlohmann::json::array()
                                                                   : nlohmann::json::array({pc.param});
        }
    }
    return j;
}

RVineCopula copula_from_json(const nlohmann::json& j) {
    RVineStructure structure = structure_from_json(j);
    std::vector<std::vector<PairCopula>> pairs;
    try {
        for (int level = 1; level <= structure.levels(); ++level) {
            std::vector<PairCopula> row;
            const auto& edges = j.at("trees").at(level - 1);
            for (std::size_t e = 0; e < edges.size(); ++e) {
                PairCopula pc;
                pc.family = family_from_string(edges[e].at("family").get<std::string>());
                pc.rotation = edges[e].value("rotation", 0);
                const auto& params = edges[e].at("params");
                pc.param = params.empty() ? 0.0 : params.at(0).get<double>();
                row.push_back(pc);
            }
            pairs.push_back(std::move(row));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::ConfigError, std::string("malformed copula JSON: ") + ex.what());
    }
    const auto canonical = to_json(structure).at("trees");
    for (std::size_t level = 0; level < canonical.size(); ++level) {
        for (std::size_t e = 0; e < canonical[level].size(); ++e) {
            const auto& given = j["trees"][level][e];
            if (given.at("a") != canonical[level][e]["a"] || given.at("b") != canonical[level][e]["b"]) {
                throw Error(ErrorCode::ConfigError, "copula JSON edges must be in canonical order");
            }
        }
    }
    return RVineCopula(std::move(structure), std::move(pairs));
}

}  // namespace vinecast
