#include "vinecast/vine_structure.hpp"

#include "vinecast/error.hpp"
#include "vinecast/rng.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

namespace vinecast {

namespace {

struct DisjointSets {
    explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    bool unite(int x, int y) {
        x = find(x);
        y = find(y);
        if (x == y) return false;
        parent[y] = x;
        return true;
    }
    std::vector<int> parent;
};

std::vector<int> sorted_union(const std::vector<int>& x, const std::vector<int>& y) {
    std::vector<int> out;
    std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
    return out;
}

std::vector<int> sorted_intersection(const std::vector<int>& x, const std::vector<int>& y) {
    std::vector<int> out;
    std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
    return out;
}

std::vector<int> sorted_difference(const std::vector<int>& x, const std::vector<int>& y) {
    std::vector<int> out;
    std::set_difference(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
    return out;
}

// Constraint of an edge joining two nodes with complete unions ua and ub.
EdgeConstraint make_constraint(const std::vector<int>& ua, const std::vector<int>& ub, int level) {
    EdgeConstraint c;
    c.level = level;
    c.conditioning = sorted_intersection(ua, ub);
    const auto only_a = sorted_difference(ua, c.conditioning);
    const auto only_b = sorted_difference(ub, c.conditioning);
    c.i = only_a.empty() ? -1 : only_a.front();
    c.j = only_b.empty() ? -1 : only_b.front();
    if (c.i > c.j) std::swap(c.i, c.j);
    return c;
}

bool shares_node(const VineEdge& x, const VineEdge& y) {
    return x.a == y.a || x.a == y.b || x.b == y.a || x.b == y.b;
}

}  // namespace

std::optional<Violation> validate(const VineTrees& vt) {
    const int d = vt.dim;
    if (d < 2) return Violation{0, -1, "dimension must be at least 2"};
    if (static_cast<int>(vt.trees.size()) != d - 1) {
        return Violation{0, -1, "expected " + std::to_string(d - 1) + " trees, got " + std::to_string(vt.trees.size())};
    }
    std::vector<std::vector<int>> prev_unions(static_cast<std::size_t>(d));
    for (int v = 0; v < d; ++v) prev_unions[v] = {v};
    std::set<std::pair<int, int>> seen_pairs;

    for (int level = 1; level < d; ++level) {
        const auto& edges = vt.trees[level - 1];
        const int n_nodes = d - level + 1;
        if (static_cast<int>(edges.size()) != n_nodes - 1) {
            return Violation{level, -1,
                             "tree " + std::to_string(level) + " must have " + std::to_string(n_nodes - 1) + " edges"};
        }
        DisjointSets components(n_nodes);
        std::vector<std::vector<int>> unions;
        for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
            const auto& edge = edges[e];
            if (edge.a < 0 || edge.b < 0 || edge.a >= n_nodes || edge.b >= n_nodes) {
                return Violation{level, e, "endpoint out of range"};
            }
            if (edge.a == edge.b) return Violation{level, e, "self loop"};
            if (!components.unite(edge.a, edge.b)) return Violation{level, e, "edge closes a cycle"};
            if (level >= 2) {
                const auto& prev = vt.trees[level - 2];
                if (!shares_node(prev[edge.a], prev[edge.b])) {
                    return Violation{level, e, "proximity condition violated"};
                }
            }
            const auto& ua = prev_unions[edge.a];
            const auto& ub = prev_unions[edge.b];
            const EdgeConstraint c = make_constraint(ua, ub, level);
            if (c.i < 0 || static_cast<int>(c.conditioning.size()) != level - 1) {
                return Violation{level, e, "malformed conditioned set"};
            }
            if (!seen_pairs.emplace(c.i, c.j).second) {
                return Violation{level, e, "conditioned pair appears twice"};
            }
            unions.push_back(sorted_union(ua, ub));
        }
        prev_unions = std::move(unions);
    }
    return std::nullopt;
}

std::string to_string(const EdgeConstraint& c, const std::vector<std::string>& labels) {
    auto name = [&](int asset) {
        return asset < static_cast<int>(labels.size()) ? labels[asset] : std::to_string(asset + 1);
    };
    std::ostringstream out;
    out << name(c.i) << ',' << name(c.j);
    if (!c.conditioning.empty()) {
        out << '|';
        for (std::size_t k = 0; k < c.conditioning.size(); ++k) out << (k ? "," : "") << name(c.conditioning[k]);
    }
    return out.str();
}

RVineStructure::RVineStructure(VineTrees vt) : trees_(std::move(vt)) {
    if (auto violation = validate(trees_)) {
        throw Error(ErrorCode::InvalidStructure, "tree " + std::to_string(violation->level) + ", edge " +
                                                     std::to_string(violation->edge) + ": " + violation->message);
    }
    const int d = trees_.dim;
    std::vector<std::vector<int>> prev_unions(static_cast<std::size_t>(d));
    for (int v = 0; v < d; ++v) prev_unions[v] = {v};

    for (int level = 1; level < d; ++level) {
        auto& edges = trees_.trees[level - 1];
        for (auto& e : edges) {
            if (e.a > e.b) std::swap(e.a, e.b);
        }
        std::vector<EdgeConstraint> cons;
        std::vector<std::vector<int>> unions;
        for (const auto& e : edges) {
            cons.push_back(make_constraint(prev_unions[e.a], prev_unions[e.b], level));
            unions.push_back(sorted_union(prev_unions[e.a], prev_unions[e.b]));
        }
        std::vector<int> order(edges.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int x, int y) { return cons[x] < cons[y]; });

        std::vector<int> new_index(edges.size());
        std::vector<VineEdge> sorted_edges;
        std::vector<EdgeConstraint> sorted_cons;
        std::vector<std::vector<int>> sorted_unions;
        for (std::size_t k = 0; k < order.size(); ++k) {
            new_index[order[k]] = static_cast<int>(k);
            sorted_edges.push_back(edges[order[k]]);
            sorted_cons.push_back(cons[order[k]]);
            sorted_unions.push_back(unions[order[k]]);
        }
        edges = std::move(sorted_edges);
        if (level < d - 1) {
            for (auto& e : trees_.trees[level]) {
                e.a = new_index[e.a];
                e.b = new_index[e.b];
            }
        }
        constraints_.push_back(std::move(sorted_cons));
        unions_.push_back(sorted_unions);
        prev_unions = std::move(sorted_unions);
    }
}

int RVineStructure::conditioned_from(int level, int edge, int side) const {
    const VineEdge& e = tree(level).at(edge);
    const int child = side == 0 ? e.a : e.b;
    if (level == 1) return child;
    const auto& c = constraint(level, edge);
    const auto rest = sorted_difference(complete_union(level - 1, child), c.conditioning);
    return rest.front();
}

std::vector<EdgeConstraint> RVineStructure::flat_constraints() const {
    std::vector<EdgeConstraint> out;
    for (const auto& level : constraints_) out.insert(out.end(), level.begin(), level.end());
    return out;
}

std::vector<std::vector<EdgeConstraint>> constraint_sets(const RVineStructure& structure) {
    return structure.constraints();
}

RVineStructure build_cvine(const std::vector<int>& order) {
    const int d = static_cast<int>(order.size());
    {
        std::vector<int> check = order;
        std::sort(check.begin(), check.end());
        for (int k = 0; k < d; ++k) {
            if (check[k] != k) throw Error(ErrorCode::InvalidArgument, "C-vine order must be a permutation");
        }
    }
    VineTrees vt;
    vt.dim = d;
    // Tree 1: root order[0] to every other asset, listed in order.
    std::vector<VineEdge> t1;
    for (int k = 1; k < d; ++k) t1.push_back({order[0], order[k]});
    vt.trees.push_back(t1);
    // Tree l >= 2: nodes are the edges of tree l-1 indexed by the position of
    // their non-root variable; node 0 carries order[l-1] and is the new root.
    for (int level = 2; level < d; ++level) {
        std::vector<VineEdge> t;
        const int n_nodes = d - level + 1;
        for (int k = 1; k < n_nodes; ++k) t.push_back({0, k});
        vt.trees.push_back(t);
    }
    return RVineStructure(std::move(vt));
}

std::vector<CandidateEdge> admissible_candidates(const VineTrees& partial) {
    std::vector<CandidateEdge> out;
    if (partial.trees.empty()) {
        for (int i = 0; i < partial.dim; ++i) {
            for (int j = i + 1; j < partial.dim; ++j) {
                out.push_back({{i, j}, EdgeConstraint{i, j, {}, 1}});
            }
        }
        return out;
    }
    // Complete unions of the nodes of the next tree.
    std::vector<std::vector<int>> unions(static_cast<std::size_t>(partial.dim));
    for (int v = 0; v < partial.dim; ++v) unions[v] = {v};
    for (const auto& edges : partial.trees) {
        std::vector<std::vector<int>> next;
        for (const auto& e : edges) next.push_back(sorted_union(unions[e.a], unions[e.b]));
        unions = std::move(next);
    }
    const int level = static_cast<int>(partial.trees.size()) + 1;
    const auto& top = partial.trees.back();
    for (int x = 0; x < static_cast<int>(top.size()); ++x) {
        for (int y = x + 1; y < static_cast<int>(top.size()); ++y) {
            if (shares_node(top[x], top[y])) out.push_back({{x, y}, make_constraint(unions[x], unions[y], level)});
        }
    }
    return out;
}

std::vector<std::size_t> max_spanning_tree(int n_nodes, const std::vector<CandidateEdge>& candidates,
                                           const std::vector<double>& weights) {
    if (weights.size() != candidates.size()) throw Error(ErrorCode::InvalidArgument, "weights/candidates mismatch");
    std::vector<std::size_t> chosen;
    if (n_nodes <= 1) return chosen;
    std::vector<char> in_tree(static_cast<std::size_t>(n_nodes), 0);
    in_tree[0] = 1;
    for (int step = 1; step < n_nodes; ++step) {
        std::optional<std::size_t> best;
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            const auto& e = candidates[k].edge;
            if (in_tree[e.a] == in_tree[e.b]) continue;
            if (!best || weights[k] > weights[*best] ||
                (weights[k] == weights[*best] && candidates[k].constraint < candidates[*best].constraint)) {
                best = k;
            }
        }
        if (!best) throw Error(ErrorCode::InvalidStructure, "candidate graph is disconnected");
        chosen.push_back(*best);
        in_tree[candidates[*best].edge.a] = 1;
        in_tree[candidates[*best].edge.b] = 1;
    }
    return chosen;
}

namespace {

// Uniform spanning tree of a connected graph by loop-erased random walks.
std::vector<std::size_t> wilson_spanning_tree(int n_nodes, const std::vector<CandidateEdge>& candidates, Rng& rng) {
    std::vector<std::vector<std::pair<int, std::size_t>>> adjacency(static_cast<std::size_t>(n_nodes));
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        adjacency[candidates[k].edge.a].emplace_back(candidates[k].edge.b, k);
        adjacency[candidates[k].edge.b].emplace_back(candidates[k].edge.a, k);
    }
    std::vector<char> in_tree(static_cast<std::size_t>(n_nodes), 0);
    std::vector<std::size_t> next_edge(static_cast<std::size_t>(n_nodes));
    std::vector<int> next_node(static_cast<std::size_t>(n_nodes), -1);
    const int root = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_nodes)));
    in_tree[root] = 1;
    for (int start = 0; start < n_nodes; ++start) {
        for (int v = start; !in_tree[v]; v = next_node[v]) {
            const auto& nbrs = adjacency[v];
            const auto& [w, k] = nbrs[static_cast<std::size_t>(rng.below(nbrs.size()))];
            next_node[v] = w;
            next_edge[v] = k;
        }
        for (int v = start; !in_tree[v]; v = next_node[v]) in_tree[v] = 1;
    }
    std::vector<std::size_t> chosen;
    for (int v = 0; v < n_nodes; ++v) {
        if (v != root) chosen.push_back(next_edge[v]);
    }
    return chosen;
}

VineEdge candidate_edge(const CandidateEdge& c) { return c.edge; }

// Counts all admissible continuations of `partial` by enumerating edge subsets
// of each candidate graph that form spanning trees.
std::uint64_t count_completions(VineTrees& partial) {
    const int level = static_cast<int>(partial.trees.size()) + 1;
    if (level == partial.dim) return 1;
    const int n_nodes = partial.dim - level + 1;
    const auto candidates = admissible_candidates(partial);
    const int need = n_nodes - 1;
    std::uint64_t total = 0;
    std::vector<std::size_t> pick;
    std::function<void(std::size_t)> recurse = [&](std::size_t from) {
        if (static_cast<int>(pick.size()) == need) {
            DisjointSets sets(n_nodes);
            std::vector<VineEdge> edges;
            for (auto k : pick) {
                if (!sets.unite(candidates[k].edge.a, candidates[k].edge.b)) return;
                edges.push_back(candidates[k].edge);
            }
            partial.trees.push_back(std::move(edges));
            total += count_completions(partial);
            partial.trees.pop_back();
            return;
        }
        for (std::size_t k = from; k < candidates.size(); ++k) {
            pick.push_back(k);
            recurse(k + 1);
            pick.pop_back();
        }
    };
    recurse(0);
    return total;
}

}  // namespace

RVineStructure sample_random_rvine(int dim, std::uint64_t seed) {
    if (dim < 2) throw Error(ErrorCode::InvalidArgument, "dimension must be at least 2");
    Rng rng(seed);
    VineTrees vt;
    vt.dim = dim;
    for (int level = 1; level < dim; ++level) {
        const auto candidates = admissible_candidates(vt);
        const auto chosen = wilson_spanning_tree(dim - level + 1, candidates, rng);
        std::vector<VineEdge> edges;
        for (auto k : chosen) edges.push_back(candidate_edge(candidates[k]));
        vt.trees.push_back(std::move(edges));
    }
    return RVineStructure(std::move(vt));
}

std::uint64_t enumerate_rvine_count(int dim) {
    if (dim < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
    if (dim > 6) throw Error(ErrorCode::InvalidArgument, "enumeration is limited to dimension 6");
    VineTrees vt;
    vt.dim = dim;
    return count_completions(vt);
}

std::uint64_t count_rvines(int dim) {
    if (dim < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
    if (dim <= 5) return enumerate_rvine_count(dim);
    // d!/2 * 2^((d-2)(d-3)/2), checked for uint64 overflow.
    unsigned __int128 count = 1;
    for (int k = 3; k <= dim; ++k) count *= static_cast<unsigned>(k);
    const int exponent = (dim - 2) * (dim - 3) / 2;
    for (int k = 0; k < exponent; ++k) {
        count *= 2;
        if (count > UINT64_MAX) throw Error(ErrorCode::InvalidArgument, "vine count overflows 64 bits");
    }
    if (count > UINT64_MAX) throw Error(ErrorCode::InvalidArgument, "vine count overflows 64 bits");
    return static_cast<std::uint64_t>(count);
}

nlohmann::json to_json(const RVineStructure& structure) {
    nlohmann::json trees = nlohmann::json::array();
    for (int level = 1; level <= structure.levels(); ++level) {
        nlohmann::json edges = nlohmann::json::array();
        const int offset = level == 1 ? 1 : 0;
        for (const auto& e : structure.tree(level)) edges.push_back({{"a", e.a + offset}, {"b", e.b + offset}});
        trees.push_back(std::move(edges));
    }
    return {{"dim", structure.dim()}, {"trees", std::move(trees)}};
}

RVineStructure structure_from_json(const nlohmann::json& j) {
    try {
        VineTrees vt;
        vt.dim = j.at("dim").get<int>();
        const auto& trees = j.at("trees");
        for (std::size_t level = 0; level < trees.size(); ++level) {
            const int offset = level == 0 ? 1 : 0;
            std::vector<VineEdge> edges;
            for (const auto& e : trees[level]) edges.push_back({e.at("a").get<int>() - offset, e.at("b").get<int>() - offset});
            vt.trees.push_back(std::move(edges));
        }
        return RVineStructure(std::move(vt));
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::ConfigError, std::string("malformed structure JSON: ") + ex.what());
    }
}

}  // namespace vinecast
