#include "vinecast/error.hpp"
#include "vinecast/vine_structure.hpp"

#include <doctest.h>

#include <algorithm>
#include <deque>
#include <map>
#include <set>

using namespace vinecast;

namespace {

// The 6-dimensional example vine, assets 1-based in the labels, 0-based here.
// T1: 12, 23, 24, 26, 35
// T2: 16|2, 13|2, 34|2, 25|3
// T3: 36|12, 14|23, 45|23
// T4: 46|123, 15|234
// T5: 56|1234
VineTrees example_six() {
    VineTrees vt;
    vt.dim = 6;
    vt.trees = {
        {{0, 1}, {1, 2}, {1, 3}, {1, 5}, {2, 4}},
        {{0, 3}, {0, 1}, {1, 2}, {1, 4}},
        {{0, 1}, {1, 2}, {2, 3}},
        {{0, 1}, {1, 2}},
        {{0, 1}},
    };
    return vt;
}

// Oracle: breadth-first closure of the membership relation down to tree 1.
std::set<int> reachable_assets(const VineTrees& vt, int level, int edge) {
    std::set<int> assets;
    std::deque<std::pair<int, int>> queue{{level, edge}};
    while (!queue.empty()) {
        const auto [l, e] = queue.front();
        queue.pop_front();
        const VineEdge& ve = vt.trees[l - 1][e];
        if (l == 1) {
            assets.insert(ve.a);
            assets.insert(ve.b);
        } else {
            queue.emplace_back(l - 1, ve.a);
            queue.emplace_back(l - 1, ve.b);
        }
    }
    return assets;
}

EdgeConstraint oracle_constraint(const VineTrees& vt, int level, int edge) {
    const VineEdge& ve = vt.trees[level - 1][edge];
    std::set<int> ua, ub;
    if (level == 1) {
        ua = {ve.a};
        ub = {ve.b};
    } else {
        ua = reachable_assets(vt, level - 1, ve.a);
        ub = reachable_assets(vt, level - 1, ve.b);
    }
    EdgeConstraint c;
    c.level = level;
    std::set_intersection(ua.begin(), ua.end(), ub.begin(), ub.end(), std::back_inserter(c.conditioning));
    std::vector<int> pair;
    std::set_symmetric_difference(ua.begin(), ua.end(), ub.begin(), ub.end(), std::back_inserter(pair));
    REQUIRE(pair.size() == 2);
    c.i = pair[0];
    c.j = pair[1];
    return c;
}

void check_constraints_against_oracle(const RVineStructure& s) {
    const auto sets = constraint_sets(s);
    for (int level = 1; level <= s.levels(); ++level) {
        REQUIRE(sets[level - 1].size() == static_cast<std::size_t>(s.dim() - level));
        for (int e = 0; e < s.dim() - level; ++e) {
            const EdgeConstraint expected = oracle_constraint(s.trees(), level, e);
            CHECK(sets[level - 1][e] == expected);
            CHECK(sets[level - 1][e].level == level);
        }
    }
}

bool each_pair_once(const RVineStructure& s) {
    std::set<std::pair<int, int>> seen;
    for (const auto& c : s.flat_constraints()) {
        if (c.i >= c.j || static_cast<int>(c.conditioning.size()) != c.level - 1) return false;
        if (std::binary_search(c.conditioning.begin(), c.conditioning.end(), c.i)) return false;
        if (std::binary_search(c.conditioning.begin(), c.conditioning.end(), c.j)) return false;
        if (!seen.emplace(c.i, c.j).second) return false;
    }
    return static_cast<int>(seen.size()) == s.dim() * (s.dim() - 1) / 2;
}

EdgeConstraint ec(int i, int j, std::vector<int> d, int level) { return {i, j, std::move(d), level}; }

}  // namespace

TEST_CASE("validate") {
    SUBCASE("the six-dimensional example passes") { CHECK_FALSE(validate(example_six()).has_value()); }
    SUBCASE("a single edge on two assets passes") {
        VineTrees vt{2, {{{0, 1}}}};
        CHECK_FALSE(validate(vt).has_value());
    }
    SUBCASE("joining tree-1 edges that share no node breaks proximity") {
        // T1: 12, 23, 34 (a path); T2 joins {1,2} with {3,4}.
        VineTrees vt{4, {{{0, 1}, {1, 2}, {2, 3}}, {{0, 2}, {0, 1}}, {{0, 1}}}};
        const auto v = validate(vt);
        REQUIRE(v.has_value());
        CHECK(v->level == 2);
        CHECK(v->edge == 0);
    }
    SUBCASE("tree 1 with a cycle is rejected") {
        VineTrees vt{3, {{{0, 1}, {1, 2}}, {{0, 1}}}};
        vt.trees[0][1] = {0, 1};
        CHECK(validate(vt).has_value());
    }
    SUBCASE("wrong number of edges is rejected") {
        VineTrees vt{3, {{{0, 1}, {1, 2}}, {}}};
        CHECK(validate(vt).has_value());
    }
    SUBCASE("the constructor throws on a violation") {
        VineTrees vt{4, {{{0, 1}, {1, 2}, {2, 3}}, {{0, 2}, {0, 1}}, {{0, 1}}}};
        try {
            RVineStructure s(vt);
            FAIL("expected InvalidStructure");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidStructure);
        }
    }
}

TEST_CASE("constraint sets of the six-dimensional example") {
    const RVineStructure s(example_six());
    const auto flat = s.flat_constraints();
    std::set<EdgeConstraint> got(flat.begin(), flat.end());
    // 0-based versions of the labels in the example figure.
    const std::vector<EdgeConstraint> expected = {
        ec(0, 1, {}, 1),           ec(1, 2, {}, 1),           ec(1, 3, {}, 1),        ec(1, 5, {}, 1),
        ec(2, 4, {}, 1),           ec(0, 5, {1}, 2),          ec(0, 2, {1}, 2),       ec(2, 3, {1}, 2),
        ec(1, 4, {2}, 2),          ec(2, 5, {0, 1}, 3),       ec(0, 3, {1, 2}, 3),    ec(3, 4, {1, 2}, 3),
        ec(3, 5, {0, 1, 2}, 4),    ec(0, 4, {1, 2, 3}, 4),    ec(4, 5, {0, 1, 2, 3}, 5),
    };
    CHECK(got == std::set<EdgeConstraint>(expected.begin(), expected.end()));

    // Edge {{1,2},{2,6}} of tree 2: conditioned {1,6}, conditioning {2}.
    const auto& t2 = s.constraints()[1];
    CHECK(std::find(t2.begin(), t2.end(), ec(0, 5, {1}, 2)) != t2.end());
    // Top edge: 5,6 | 1,2,3,4.
    CHECK(s.constraint(5, 0) == ec(4, 5, {0, 1, 2, 3}, 5));
    for (const auto& c : s.constraints()[0]) CHECK(c.conditioning.empty());
    check_constraints_against_oracle(s);
    CHECK(to_string(s.constraint(5, 0)) == "5,6|1,2,3,4");
}

TEST_CASE("canonical form is independent of the input edge order") {
    VineTrees shuffled = example_six();
    // Reverse tree 1 and remap tree-2 endpoints accordingly.
    std::reverse(shuffled.trees[0].begin(), shuffled.trees[0].end());
    for (auto& e : shuffled.trees[1]) {
        e.a = 4 - e.a;
        e.b = 4 - e.b;
    }
    CHECK(RVineStructure(shuffled) == RVineStructure(example_six()));
}

TEST_CASE("build_cvine") {
    SUBCASE("d = 2") {
        const auto s = build_cvine({0, 1});
        CHECK(s.flat_constraints() == std::vector<EdgeConstraint>{ec(0, 1, {}, 1)});
    }
    SUBCASE("d = 3") {
        const auto s = build_cvine({0, 1, 2});
        CHECK(s.flat_constraints() ==
              std::vector<EdgeConstraint>{ec(0, 1, {}, 1), ec(0, 2, {}, 1), ec(1, 2, {0}, 2)});
    }
    SUBCASE("d = 4") {
        const auto s = build_cvine({0, 1, 2, 3});
        CHECK(s.flat_constraints() == std::vector<EdgeConstraint>{ec(0, 1, {}, 1), ec(0, 2, {}, 1), ec(0, 3, {}, 1),
                                                                  ec(1, 2, {0}, 2), ec(1, 3, {0}, 2),
                                                                  ec(2, 3, {0, 1}, 3)});
    }
    SUBCASE("star pattern for a permuted order") {
        const std::vector<int> order = {3, 0, 4, 1, 2};
        const auto s = build_cvine(order);
        for (int level = 1; level <= s.levels(); ++level) {
            const int root = order[level - 1];
            std::vector<int> before(order.begin(), order.begin() + level - 1);
            std::sort(before.begin(), before.end());
            for (const auto& c : s.constraints()[level - 1]) {
                CHECK((c.i == root || c.j == root));
                CHECK(c.conditioning == before);
            }
        }
        check_constraints_against_oracle(s);
    }
}

TEST_CASE("sample_random_rvine") {
    CHECK(sample_random_rvine(2, 1) == sample_random_rvine(2, 99));
    CHECK(sample_random_rvine(6, 42) == sample_random_rvine(6, 42));

    // d = 3: the vine is fixed by the centre node of tree 1.
    std::map<int, int> counts;
    const int draws = 10000;
    for (int k = 0; k < draws; ++k) {
        const auto s = sample_random_rvine(3, static_cast<std::uint64_t>(k) + 1);
        counts[s.constraint(2, 0).conditioning.front()]++;
    }
    REQUIRE(counts.size() == 3);
    for (const auto& [centre, n] : counts) {
        CHECK(std::abs(static_cast<double>(n) / draws - 1.0 / 3.0) < 0.02);
    }
}

TEST_CASE("count_rvines agrees with enumeration") {
    CHECK(enumerate_rvine_count(2) == 1);
    CHECK(enumerate_rvine_count(3) == 3);
    for (int d = 2; d <= 5; ++d) CHECK(count_rvines(d) == enumerate_rvine_count(d));
    CHECK(count_rvines(4) == 24);
    CHECK(count_rvines(5) == 480);
    CHECK(count_rvines(6) == 23040);
}

TEST_CASE("structure json round trip") {
    for (const auto& s : {build_cvine({0, 1}), build_cvine({0, 1, 2}), RVineStructure(example_six()),
                          sample_random_rvine(7, 5)}) {
        const auto j = to_json(s);
        CHECK(structure_from_json(j) == s);
        CHECK(structure_from_json(nlohmann::json::parse(j.dump())) == s);
    }
    const auto j = to_json(build_cvine({0, 1, 2}));
    CHECK(j.at("dim") == 3);
    CHECK(j.at("trees").at(0).at(0).at("a") == 1);  // tree-1 assets are 1-based on disk
}

TEST_CASE("property: random and C-vine structures are valid with each pair once") {
    std::uint64_t seed = 1000;
    for (int trial = 0; trial < 1000; ++trial) {
        const int d = 2 + trial % 6;
        const auto s = sample_random_rvine(d, seed++);
        CHECK_FALSE(validate(s.trees()).has_value());
        CHECK(each_pair_once(s));
        if (trial % 10 == 0) check_constraints_against_oracle(s);
    }
    std::vector<int> order = {0, 1, 2, 3, 4, 5, 6};
    int count = 0;
    do {
        if (count++ % 97 != 0) continue;
        const auto s = build_cvine(order);
        CHECK_FALSE(validate(s.trees()).has_value());
        CHECK(each_pair_once(s));
    } while (std::next_permutation(order.begin(), order.end()));
}
