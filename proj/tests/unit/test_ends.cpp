#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "random_measures.hpp"
#include "wtree/ends.hpp"
#include "wtree/error.hpp"

using namespace wtree;
using namespace fixtures;

namespace {

BoundaryMeasure uniform(const MetricTree& tree, std::initializer_list<const char*> edges) {
    std::vector<EndAtom> atoms;
    for (const char* e : edges) atoms.push_back({end(tree, e), 1.0 / double(edges.size())});
    return {tree, std::move(atoms)};
}

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::ParseError;
}

// Distance from the base point to the line between the ends of two rays.
double oracle_gromov(const MetricTree& tree, const testing::DistanceOracle& d, EdgeIndex e, EdgeIndex f) {
    const VertexIndex base = tree.basepoint().vertex();
    const VertexIndex a = tree.edge(e).tail;
    const VertexIndex b = tree.edge(f).tail;
    return (d.vertices(base, a) + d.vertices(base, b) - d.vertices(a, b)) / 2.0;
}

}  // namespace

TEST_CASE("antipodal measures on a star") {
    const auto tree = star(4);
    const auto minus = uniform(tree, {"r1", "r2"});
    const auto plus = uniform(tree, {"r3", "r4"});
    CHECK(is_antipodal(minus, plus).antipodal);
    const auto shared = is_antipodal(minus, uniform(tree, {"r2", "r3"}));
    CHECK_FALSE(shared.antipodal);
    REQUIRE(shared.shared_ends.size() == 1);
    CHECK(shared.shared_ends[0] == end(tree, "r2"));
    CHECK(kind_of([&] { d0_transport(tree, minus, minus); }) == ErrorKind::NotAntipodal);

    const auto flows = flow_table(tree, minus, plus);
    const VertexIndex o = tree.vertex_index("o");
    CHECK(flows.flow(tree, tree.edge_index("r3"), o) == 0.5);
    CHECK(flows.flow(tree, tree.edge_index("r1"), o) == -0.5);
    CHECK(flows.sign(tree, tree.edge_index("r1"), o) == FlowSign::Negative);
    CHECK(flows.vertex_flow[o] == 1.0);
    CHECK(flows.specific_flow[o] == 1.0);
    CHECK(realizability_sum(tree, flows) == 0.0);
    CHECK(d0_transport(tree, minus, plus).value == 0.0);
}

TEST_CASE("a balanced edge carries neutral flow") {
    const auto tree = barbell();
    const auto flows = flow_table(tree, uniform(tree, {"ray1", "ray3"}), uniform(tree, {"ray2", "ray4"}));
    CHECK(flows.sign(tree, tree.edge_index("uv"), tree.vertex_index("u")) == FlowSign::Neutral);
}

TEST_CASE("-D0^2 transport on the barbell") {
    const auto tree = barbell();
    const auto minus = uniform(tree, {"ray1", "ray3"});
    const auto plus = uniform(tree, {"ray2", "ray4"});
    const auto result = d0_transport(tree, minus, plus);
    // Pairing across the bar costs nothing; pairing within v's side costs -1 on half the mass.
    CHECK(result.value == doctest::Approx(-0.5));
    CHECK(realizability_sum(tree, flow_table(tree, minus, plus)) == doctest::Approx(0.5));
    for (const auto& p : result.plan) CHECK(p.minus.edge != p.plus.edge);
}

TEST_CASE("-D0^2 transport agrees with enumeration") {
    testing::Rng rng(51);
    for (int k = 0; k < 30; ++k) {
        const auto tree = testing::random_tree(rng, {1 + testing::pick(rng, 8), 4 + testing::pick(rng, 3)});
        const testing::DistanceOracle oracle(tree);
        auto ends = tree.ends();
        std::shuffle(ends.begin(), ends.end(), rng);
        const std::size_t n = ends.size() / 2;
        std::vector<EndAtom> m, p;
        for (std::size_t i = 0; i < n; ++i) {
            m.push_back({ends[i], 1.0 / double(n)});
            p.push_back({ends[n + i], 1.0 / double(n)});
        }
        std::vector<std::vector<double>> cost(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double g = oracle_gromov(tree, oracle, ends[i].edge, ends[n + j].edge);
                cost[i][j] = -g * g;
            }
        const BoundaryMeasure minus(tree, m), plus(tree, p);
        const auto result = d0_transport(tree, minus, plus);
        CHECK(result.value == doctest::Approx(testing::permutation_optimum(cost).cost));
        CHECK(realizability_sum(tree, flow_table(tree, minus, plus)) == doctest::Approx(-result.value));
    }
}

TEST_CASE("flows agree with end enumeration") {
    testing::Rng rng(52);
    for (int k = 0; k < 40; ++k) {
        const auto tree = testing::random_tree(rng, {1 + testing::pick(rng, 8), 2 + testing::pick(rng, 4)});
        const auto [minus, plus] = testing::random_antipodal(rng, tree);
        const auto flows = flow_table(tree, minus, plus);
        const auto oracle = testing::oracle_flows(tree, minus, plus);
        for (EdgeIndex e = 0; e < tree.edge_count(); ++e) CHECK(flows.edge_flow[e] == doctest::Approx(oracle.edge[e]));
        for (VertexIndex v = 0; v < tree.vertex_count(); ++v) {
            CHECK(flows.vertex_flow[v] == doctest::Approx(oracle.vertex[v]));
            CHECK(flows.specific_flow[v] == doctest::Approx(oracle.specific[v]));
            CHECK(flows.specific_flow[v] >= -1e-12);
        }
    }
}

TEST_CASE("geodesic between antipodal measures on a star") {
    const auto tree = star(4);
    const auto built = construct_geodesic(tree, uniform(tree, {"r1", "r2"}), uniform(tree, {"r3", "r4"}));
    CHECK(built.ends_match);
    CHECK(built.antagonist_free);
    CHECK(built.unit_speed);
    CHECK(built.flow_check.edge_defect < 1e-12);
    CHECK(built.flow_check.vertex_defect < 1e-12);
    CHECK(built.flow_check.specific_defect < 1e-12);
    CHECK(built.second_moment == 0.0);
    CHECK(pushforward_at(tree, built.plan, 0.0).mass_at(tree, at(tree, "o")) == 1.0);
}

TEST_CASE("comb measures") {
    const auto comb = comb_generator(4, 2.0);
    CHECK(comb.tree.vertex_count() == 4);
    CHECK(comb.minus.mass_of(comb.tree.end_of("t1")) == doctest::Approx(0.9));
    CHECK(comb.minus.mass_of(comb.tree.end_of("t3")) == doctest::Approx(0.1));
    CHECK(comb.plus.mass_of(comb.tree.end_of("t2")) == doctest::Approx(0.8));
    CHECK(comb.plus.mass_of(comb.tree.end_of("t4")) == doctest::Approx(0.2));
    CHECK(is_antipodal(comb.minus, comb.plus).antipodal);
    const auto report = comb_realizability(comb);
    CHECK(report.verdict == RealizabilityVerdict::Inconclusive);
    CHECK(report.value == doctest::Approx(realizability_sum(comb.tree, flow_table(comb.tree, comb.minus, comb.plus))));
    CHECK(construct_geodesic(comb).unit_speed);
    CHECK(kind_of([] { comb_generator(1, 2.0); }) == ErrorKind::InvalidMeasure);
}

TEST_CASE("heavy-tailed combs are not realizable") {
    const auto divergent = comb_generator(1024, 3.0);
    CHECK(comb_realizability(divergent).verdict == RealizabilityVerdict::Diverges);
    CHECK(kind_of([&] { construct_geodesic(divergent); }) == ErrorKind::NotRealizable);
    CHECK(comb_realizability(comb_generator(4096, 4.0)).verdict == RealizabilityVerdict::Converges);
}
