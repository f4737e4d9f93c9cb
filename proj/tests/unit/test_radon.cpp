#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "random_measures.hpp"
#include "wtree/error.hpp"
#include "wtree/radon.hpp"

using namespace wtree;
using namespace fixtures;

namespace {

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::ParseError;
}

Flag flag(const MetricTree& tree, const char* x, const char* e, const char* f) {
    return Flag::make(tree.vertex_index(x), tree.edge_index(e), tree.edge_index(f));
}

VertexFunction random_function(testing::Rng& rng, const MetricTree& tree) {
    VertexFunction h;
    for (VertexIndex v = 0; v < tree.vertex_count(); ++v) h.values.push_back(double(testing::pick(rng, 11)) - 5.0);
    return h;
}

}  // namespace

TEST_CASE("transform on the barbell") {
    const auto tree = barbell();
    const VertexFunction h{{2.0, 5.0}};
    const auto data = combinatorial_radon(tree, h);
    CHECK(data.size() == 6);
    CHECK(data.at(flag(tree, "u", "ray1", "ray2")) == 7.0);
    CHECK(data.at(flag(tree, "u", "uv", "ray1")) == 2.0);
    CHECK(data.at(flag(tree, "u", "uv", "ray2")) == 2.0);
    CHECK(data.at(flag(tree, "v", "ray3", "ray4")) == 7.0);
    CHECK(data.at(flag(tree, "v", "uv", "ray3")) == 5.0);

    const auto back = radon_invert(tree, data, 7.0);
    CHECK(back.values == h.values);

    auto broken = data;
    broken[flag(tree, "u", "ray1", "ray2")] = 8.0;
    CHECK(kind_of([&] { radon_invert(tree, broken, 7.0); }) == ErrorKind::InconsistentData);
    broken.erase(flag(tree, "u", "ray1", "ray2"));
    CHECK(kind_of([&] { radon_invert(tree, broken, 7.0); }) == ErrorKind::MalformedForRadon);
}

TEST_CASE("degenerate inputs") {
    const auto s3 = star(3);
    for (const auto& [f, value] : combinatorial_radon(s3, VertexFunction{{4.0}})) CHECK(value == 4.0);
    const auto tree = barbell();
    for (const auto& [f, value] : combinatorial_radon(tree, VertexFunction{{0.0, 0.0}})) CHECK(value == 0.0);
    CHECK(kind_of([] { combinatorial_radon(tripod(), VertexFunction{{1, 0, 0, 0}}); }) == ErrorKind::MalformedForRadon);
    CHECK(kind_of([] { combinatorial_radon(star(2), VertexFunction{{1}}); }) == ErrorKind::MalformedForRadon);
    CHECK(kind_of([&] { combinatorial_radon(tree, VertexFunction{{1}}); }) == ErrorKind::InconsistentData);
}

TEST_CASE("transform agrees with perpendicular sums and inverts exactly") {
    testing::Rng rng(61);
    for (int k = 0; k < 50; ++k) {
        const auto tree = testing::random_tree(rng, {1 + testing::pick(rng, 10), 0, true});
        const auto h = random_function(rng, tree);
        const auto data = combinatorial_radon(tree, h);
        CHECK(data.size() == all_flags(tree).size());
        for (const auto& [f, value] : data) CHECK(value == testing::perpendicular_sum(tree, h, f));
        CHECK(radon_invert(tree, data, h.total()).values == h.values);

        // A different function never has the same transform.
        auto other = h;
        other.values[testing::pick(rng, other.values.size())] += 1.0;
        CHECK(combinatorial_radon(tree, other) != data);
    }
}

TEST_CASE("projections onto a geodesic keep the mass") {
    testing::Rng rng(62);
    for (int k = 0; k < 30; ++k) {
        const auto tree = testing::random_tree(rng, {1 + testing::pick(rng, 8), 0, true});
        const DiscreteMeasure mu(tree, testing::uniform_atoms(rng, tree, 1 + testing::pick(rng, 5)));
        const auto flags = all_flags(tree);
        const auto g = flag_geodesic(tree, flags[testing::pick(rng, flags.size())]);
        const auto projected = radon_measure(tree, mu, g);
        CHECK(projected.total_mass() == doctest::Approx(1.0));
        for (const auto& a : projected.atoms()) CHECK(project_to_geodesic(tree, a.point, g).distance < 1e-12);
    }
    const auto tree = star(3);
    const auto constant = make_geodesic(tree, at(tree, "o"), at(tree, "o"), 0.0, TimeInterval::complete(), at(tree, "o"), 0.0);
    CHECK(kind_of([&] { radon_measure(tree, DiscreteMeasure::dirac(tree, at(tree, "o")), constant); }) ==
          ErrorKind::ConstantGeodesic);
}

TEST_CASE("measures are recovered from their projections") {
    const auto tree = barbell();
    SUBCASE("vertex atoms") {
        const DiscreteMeasure mu(tree, {{at(tree, "u"), 0.25}, {at(tree, "v"), 0.75}});
        CHECK(measure_radon_roundtrip(tree, mu).exact);
    }
    SUBCASE("edge atoms") {
        const DiscreteMeasure mu(tree, {{on(tree, "uv", 0.5), 0.5}, {on(tree, "ray3", 2.0), 0.5}});
        const auto back = measure_radon_roundtrip(tree, mu);
        CHECK(back.exact);
        CHECK(back.vertex_part.values == std::vector<double>{0.0, 0.0});
    }
    SUBCASE("mixed") {
        testing::Rng rng(63);
        for (int k = 0; k < 30; ++k) {
            const auto t = testing::random_tree(rng, {1 + testing::pick(rng, 8), 0, true});
            const DiscreteMeasure mu(t, testing::uniform_atoms(rng, t, 1 + testing::pick(rng, 6)));
            const auto back = measure_radon_roundtrip(t, mu);
            CHECK(back.exact);
            CHECK(back.max_error < 1e-9);
        }
    }
}
