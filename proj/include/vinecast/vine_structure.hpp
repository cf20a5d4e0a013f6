#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vinecast {

/// An edge joins two nodes of its tree. In tree 1 the nodes are asset indices
/// (0-based); in tree l > 1 they are indices into the edge list of tree l - 1.
struct VineEdge {
    int a = 0;
    int b = 0;
    friend bool operator==(const VineEdge&, const VineEdge&) = default;
};

/// Raw, unvalidated tree sequence.
struct VineTrees {
    int dim = 0;
    std::vector<std::vector<VineEdge>> trees;
};

struct Violation {
    int level = 0;  ///< 1-based tree level, 0 for global problems
    int edge = -1;  ///< index within the tree, -1 when not edge-specific
    std::string message;
};

/// Checks tree sizes, connectivity/acyclicity of every tree, the proximity
/// condition and uniqueness of conditioned pairs. Never throws.
[[nodiscard]] std::optional<Violation> validate(const VineTrees& trees);

/// Conditioned pair {i, j} (i < j) and conditioning set of one edge.
struct EdgeConstraint {
    int i = 0;
    int j = 0;
    std::vector<int> conditioning;  ///< sorted
    int level = 1;                  ///< 1-based tree level

    friend bool operator==(const EdgeConstraint&, const EdgeConstraint&) = default;
    friend auto operator<=>(const EdgeConstraint& x, const EdgeConstraint& y) {
        if (auto c = x.i <=> y.i; c != 0) return c;
        if (auto c = x.j <=> y.j; c != 0) return c;
        return x.conditioning <=> y.conditioning;
    }
};

[[nodiscard]] std::string to_string(const EdgeConstraint& c, const std::vector<std::string>& labels = {});

/// A validated regular vine in canonical form: each edge has a < b, and the
/// edges of every tree are sorted by their constraint.
class RVineStructure {
public:
    /// Validates and canonicalizes; throws InvalidStructure on violation.
    explicit RVineStructure(VineTrees trees);

    [[nodiscard]] int dim() const noexcept { return trees_.dim; }
    [[nodiscard]] int levels() const noexcept { return trees_.dim - 1; }
    /// Edges of 1-based tree `level`.
    [[nodiscard]] const std::vector<VineEdge>& tree(int level) const { return trees_.trees.at(level - 1); }
    [[nodiscard]] const VineTrees& trees() const noexcept { return trees_; }
    [[nodiscard]] const EdgeConstraint& constraint(int level, int edge) const {
        return constraints_.at(level - 1).at(edge);
    }
    [[nodiscard]] const std::vector<std::vector<EdgeConstraint>>& constraints() const noexcept {
        return constraints_;
    }
    /// Complete union U*_e as a sorted asset list.
    [[nodiscard]] const std::vector<int>& complete_union(int level, int edge) const {
        return unions_.at(level - 1).at(edge);
    }
    /// Asset that edge (level, edge) contributes through its endpoint `side`
    /// (0 = a, 1 = b) to the conditioned pair, i.e. C_{e,a} or C_{e,b}.
    [[nodiscard]] int conditioned_from(int level, int edge, int side) const;
    /// All constraints in tree order (tree 1 first).
    [[nodiscard]] std::vector<EdgeConstraint> flat_constraints() const;
    [[nodiscard]] int edge_count() const noexcept { return trees_.dim * (trees_.dim - 1) / 2; }

    friend bool operator==(const RVineStructure& x, const RVineStructure& y) {
        return x.trees_.dim == y.trees_.dim && x.trees_.trees == y.trees_.trees;
    }

private:
    VineTrees trees_;
    std::vector<std::vector<std::vector<int>>> unions_;
    std::vector<std::vector<EdgeConstraint>> constraints_;
};

/// Complete unions, conditioning sets and conditioned pairs of every edge.
[[nodiscard]] std::vector<std::vector<EdgeConstraint>> constraint_sets(const RVineStructure& structure);

/// C-vine whose tree-l root is the l-th element of `order` (0-based assets).
[[nodiscard]] RVineStructure build_cvine(const std::vector<int>& order);

/// Level-wise uniform random spanning trees over the proximity-admissible graph.
[[nodiscard]] RVineStructure sample_random_rvine(int dim, std::uint64_t seed);

/// Number of labeled regular vines on `dim` elements.
[[nodiscard]] std::uint64_t count_rvines(int dim);
/// Brute-force count by enumerating every admissible tree sequence.
[[nodiscard]] std::uint64_t enumerate_rvine_count(int dim);

// Level-wise construction helpers shared by the structure selectors.

/// Candidate edge for the next tree: endpoints are indices into the current
/// top tree's edge list, plus the constraint it would carry.
struct CandidateEdge {
    VineEdge edge;
    EdgeConstraint constraint;
};

/// Tree 1 candidates when `partial` is empty: all asset pairs. Otherwise all
/// proximity-admissible pairs of edges of the last tree in `partial`.
[[nodiscard]] std::vector<CandidateEdge> admissible_candidates(const VineTrees& partial);

/// Maximum spanning tree (Prim) over `n_nodes` nodes with the given candidate
/// weights. Ties are broken by the lexicographic order of the candidates'
/// constraints. Returns indices into `candidates`.
[[nodiscard]] std::vector<std::size_t> max_spanning_tree(int n_nodes, const std::vector<CandidateEdge>& candidates,
                                                         const std::vector<double>& weights);

// Structure file: {"dim": d, "trees": [[{"a":..,"b":..}, ...], ...]} with
// 1-based assets in tree 1 and 0-based edge indices above.
[[nodiscard]] nlohmann::json to_json(const RVineStructure& structure);
[[nodiscard]] RVineStructure structure_from_json(const nlohmann::json& j);

}  // namespace vinecast
