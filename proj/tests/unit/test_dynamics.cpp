#include <doctest.h>

#include <cmath>
#include <functional>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "random_measures.hpp"
#include "wtree/dynamics.hpp"
#include "wtree/error.hpp"

using namespace wtree;
using namespace fixtures;

namespace {

DynamicalPlan two_rays(const MetricTree& tree) {
    return DynamicalPlan(tree,
                         {{ray_to_end(tree, at(tree, "o"), end(tree, "r1"), 1.0), 0.5},
                          {ray_to_end(tree, at(tree, "o"), end(tree, "r2"), 1.0), 0.5}},
                         TimeInterval::ray());
}

DynamicalPlan complete_plan(const MetricTree& tree, std::initializer_list<std::pair<const char*, const char*>> pairs) {
    std::vector<GeodesicAtom> atoms;
    for (const auto& [from, to] : pairs)
        atoms.push_back({geodesic_between_ends(tree, end(tree, from), end(tree, to)), 1.0 / double(pairs.size())});
    return DynamicalPlan(tree, std::move(atoms), TimeInterval::complete());
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::ParseError;
}

}  // namespace

TEST_CASE("pushforwards of a ray plan") {
    const auto tree = star(3);
    const auto plan = two_rays(tree);
    const auto start = pushforward_at(tree, plan, 0.0);
    CHECK(start.size() == 1);
    CHECK(start.mass_at(tree, at(tree, "o")) == 1.0);
    const auto later = pushforward_at(tree, plan, 3.0);
    CHECK(later.mass_at(tree, on(tree, "r1", 3.0)) == 0.5);
    CHECK(later.mass_at(tree, on(tree, "r2", 3.0)) == 0.5);
    CHECK(plan.speed() == doctest::Approx(1.0));
}

TEST_CASE("interpolation between a Dirac and a Dirac") {
    const auto tree = tripod();
    const auto plan = interpolate(tree, DiscreteMeasure::dirac(tree, at(tree, "a")), DiscreteMeasure::dirac(tree, at(tree, "c")));
    REQUIRE(plan.size() == 1);
    CHECK(plan.atoms()[0].geodesic.speed() == 2.0);
    CHECK(pushforward_at(tree, plan, 0.5).mass_at(tree, at(tree, "o")) == 1.0);
}

TEST_CASE("the tripod carries several optimal plans and geodesics") {
    const auto tree = tripod();
    TransportPlan first{{{at(tree, "a"), at(tree, "c"), 0.5}, {at(tree, "b"), at(tree, "o"), 0.5}}};
    TransportPlan second{{{at(tree, "a"), at(tree, "o"), 0.5}, {at(tree, "b"), at(tree, "c"), 0.5}}};
    CHECK(quadratic_cost(tree, first) == quadratic_cost(tree, second));
    const auto mu = DiscreteMeasure(tree, first.source_atoms(tree));
    const auto nu = DiscreteMeasure(tree, first.target_atoms(tree));
    const double w = wasserstein2(tree, mu, nu).distance;
    CHECK(quadratic_cost(tree, first) == doctest::Approx(w * w));

    const auto g1 = interpolate(tree, first);
    const auto g2 = interpolate(tree, second);
    const auto mid1 = pushforward_at(tree, g1, 0.5);
    const auto mid2 = pushforward_at(tree, g2, 0.5);
    CHECK(wasserstein2(tree, mid1, mid2).distance > 0.1);
    for (const auto* g : {&g1, &g2})
        for (double s : {0.0, 0.25, 0.5})
            for (double t : {0.75, 1.0})
                CHECK(wasserstein2(tree, pushforward_at(tree, *g, s), pushforward_at(tree, *g, t)).distance ==
                      doctest::Approx((t - s) * w));
    TransportPlan bad{{{at(tree, "a"), at(tree, "b"), 0.5}, {at(tree, "b"), at(tree, "a"), 0.5}}};
    CHECK(kind_of([&] { interpolate(tree, bad); }) == ErrorKind::PlanNotOptimal);
}

TEST_CASE("interpolations are W2 geodesics on random instances") {
    testing::Rng rng(31);
    for (int k = 0; k < 25; ++k) {
        const auto tree = testing::random_tree(rng, {2 + testing::pick(rng, 8), testing::pick(rng, 3)});
        const DiscreteMeasure mu(tree, testing::uniform_atoms(rng, tree, 1 + testing::pick(rng, 4)));
        const DiscreteMeasure nu(tree, testing::uniform_atoms(rng, tree, 1 + testing::pick(rng, 4)));
        const double w = wasserstein2(tree, mu, nu).distance;
        const auto plan = interpolate(tree, mu, nu);
        CHECK(is_optimal_dynamical(tree, plan).optimal);
        CHECK(pushforward_at(tree, plan, 0.3).total_mass() == doctest::Approx(1.0));
        for (double s : {0.0, 0.25, 0.5})
            for (double t : {0.75, 1.0})
                CHECK(wasserstein2(tree, pushforward_at(tree, plan, s), pushforward_at(tree, plan, t)).distance ==
                      doctest::Approx((t - s) * w).epsilon(1e-7));
        // Restrictions of optimal plans stay optimal.
        const auto restricted = time_coupling(tree, plan, 0.25, 0.75);
        CHECK(is_cyclically_monotone(tree, restricted).monotone);
    }
}

TEST_CASE("lifts") {
    const auto tree = star(3);
    const auto a = DynamicalPlan(tree, {{ray_to_end(tree, at(tree, "o"), end(tree, "r1"), 1.0), 1.0}}, TimeInterval::ray());
    const auto b = DynamicalPlan(tree, {{ray_to_end(tree, at(tree, "o"), end(tree, "r2"), 2.0), 1.0}}, TimeInterval::ray());
    TransportPlan at_one{{{on(tree, "r1", 1.0), on(tree, "r2", 2.0), 1.0}}};
    const auto coupling = lift(tree, a, b, at_one, 1.0);
    REQUIRE(coupling.size() == 1);
    CHECK(coupling[0].mass == 1.0);

    const auto c = two_rays(tree);
    const auto here = pushforward_at(tree, c, 2.0);
    TransportPlan identity;
    for (const auto& atom : here.atoms()) identity.entries.push_back({atom.point, atom.point, atom.mass});
    for (const auto& entry : lift(tree, c, c, identity, 2.0)) CHECK(entry.first == entry.second);
    CHECK(kind_of([&] { lift(tree, a, b, identity, 2.0); }) == ErrorKind::MarginalMismatch);
}

TEST_CASE("lift projects back onto the coupling it lifts") {
    testing::Rng rng(32);
    for (int k = 0; k < 20; ++k) {
        const auto tree = testing::random_tree(rng, {2 + testing::pick(rng, 8), 1 + testing::pick(rng, 3)});
        const auto mu = interpolate(tree, DiscreteMeasure(tree, testing::uniform_atoms(rng, tree, 3)),
                                    DiscreteMeasure(tree, testing::uniform_atoms(rng, tree, 2)));
        const auto sigma = interpolate(tree, DiscreteMeasure(tree, testing::uniform_atoms(rng, tree, 2)),
                                       DiscreteMeasure(tree, testing::uniform_atoms(rng, tree, 3)));
        const double t = 0.5;
        const auto plan_t = wasserstein2(tree, pushforward_at(tree, mu, t), pushforward_at(tree, sigma, t)).plan;
        const auto back = project_lift(tree, mu, sigma, lift(tree, mu, sigma, plan_t, t), t);
        for (const auto& e : plan_t.entries) {
            double mass = 0.0;
            for (const auto& f : back.entries)
                if (tree.same_point(e.source, f.source) && tree.same_point(e.target, f.target)) mass += f.mass;
            CHECK(mass == doctest::Approx(e.mass).epsilon(1e-12));
        }
    }
}

TEST_CASE("antagonist pairs") {
    const auto tree = star(3);
    CHECK(antagonist_pairs(complete_plan(tree, {{"r1", "r2"}, {"r1", "r3"}})).empty());
    const auto crossing = antagonist_pairs(complete_plan(tree, {{"r1", "r2"}, {"r2", "r3"}}));
    REQUIRE(crossing.size() == 1);
    CHECK(tree.edge(crossing[0].edge).id == "r2");
    CHECK(antagonist_pairs(complete_plan(tree, {{"r1", "r2"}})).empty());
}

TEST_CASE("dynamical optimality") {
    const auto tree = tripod();
    // Two geodesics crossing the path a - o - b in opposite directions.
    const DynamicalPlan crossing(tree,
                                 {{geodesic_segment(tree, at(tree, "a"), at(tree, "b"), 0.0, 1.0), 0.5},
                                  {geodesic_segment(tree, at(tree, "b"), at(tree, "a"), 0.0, 1.0), 0.5}},
                                 TimeInterval::segment(0.0, 1.0));
    const auto cert = is_optimal_dynamical(tree, crossing);
    CHECK_FALSE(cert.optimal);
    CHECK_FALSE(cert.antagonist_free);
    CHECK_FALSE(is_cyclically_monotone(tree, time_coupling(tree, crossing, 0.0, 1.0)).monotone);

    const DynamicalPlan still(tree, {{geodesic_segment(tree, at(tree, "c"), at(tree, "c"), 0.0, 1.0), 1.0}},
                              TimeInterval::segment(0.0, 1.0));
    CHECK(is_optimal_dynamical(tree, still).optimal);

    const auto s3 = star(3);
    CHECK(is_optimal_dynamical(s3, complete_plan(s3, {{"r1", "r2"}, {"r1", "r3"}})).optimal);
    CHECK_FALSE(is_optimal_dynamical(s3, complete_plan(s3, {{"r1", "r2"}, {"r2", "r3"}})).optimal);
}

TEST_CASE("extension of Dirac-based segment plans to rays") {
    const auto tree = star(3);
    const DynamicalPlan segment(tree, {{geodesic_segment(tree, at(tree, "o"), on(tree, "r1", 1.0), 0.0, 1.0), 1.0}},
                                TimeInterval::segment(0.0, 1.0));
    const auto ray_plan = extend_from_dirac(tree, segment);
    CHECK(ray_plan.interval().kind == IntervalKind::Ray);
    CHECK(pushforward_at(tree, ray_plan, 5.0).mass_at(tree, on(tree, "r1", 5.0)) == 1.0);

    const auto completed = tripod_completed();
    const DiscreteMeasure ab(completed, {{at(completed, "a"), 0.5}, {at(completed, "b"), 0.5}});
    const auto extended = extend_from_dirac(completed, interpolate(completed, DiscreteMeasure::dirac(completed, at(completed, "o")), ab));
    const auto later = pushforward_at(completed, extended, 3.0);
    CHECK(later.mass_at(completed, on(completed, "ra", 2.0)) == 0.5);
    CHECK(later.mass_at(completed, on(completed, "rb", 2.0)) == 0.5);
    const auto start = pushforward_at(completed, extended, 0.0);
    for (double t : {0.5, 2.0, 7.0})
        CHECK(wasserstein2(completed, start, pushforward_at(completed, extended, t)).distance == doctest::Approx(t));

    // Parked mass stays parked.
    const DynamicalPlan parked(completed, {{geodesic_segment(completed, at(completed, "o"), at(completed, "o"), 0.0, 1.0), 1.0}},
                               TimeInterval::segment(0.0, 1.0));
    CHECK(extend_from_dirac(completed, parked).speed() == 0.0);

    const auto leafy = tripod();
    const auto from_o = interpolate(leafy, DiscreteMeasure::dirac(leafy, at(leafy, "o")), DiscreteMeasure::dirac(leafy, at(leafy, "a")));
    CHECK(kind_of([&] { extend_from_dirac(leafy, from_o); }) == ErrorKind::LeafyTree);
    const auto spread = interpolate(completed, ab, DiscreteMeasure::dirac(completed, at(completed, "c")));
    CHECK(kind_of([&] { extend_from_dirac(completed, spread); }) == ErrorKind::NotDiracBased);
}

TEST_CASE("interpolation from a Dirac mass and the Thales inequality") {
    const auto tree = tripod();
    const auto b = DiscreteMeasure::dirac(tree, at(tree, "b"));
    CHECK(dirac_interpolation(tree, at(tree, "a"), b, 0.5).mass_at(tree, at(tree, "o")) == 1.0);
    CHECK(dirac_interpolation(tree, at(tree, "a"), b, 0.0).mass_at(tree, at(tree, "a")) == 1.0);
    CHECK(dirac_interpolation(tree, at(tree, "a"), b, 1.0).mass_at(tree, at(tree, "b")) == 1.0);
    CHECK(kind_of([&] { dirac_interpolation(tree, at(tree, "a"), b, 1.5); }) == ErrorKind::OutOfInterval);

    testing::Rng rng(33);
    for (int k = 0; k < 40; ++k) {
        const auto t = testing::random_tree(rng, {2 + testing::pick(rng, 8), testing::pick(rng, 3)});
        const DiscreteMeasure mu(t, testing::uniform_atoms(rng, t, 1 + testing::pick(rng, 4)));
        const auto x = testing::random_point(rng, t);
        const auto g = testing::random_point(rng, t);
        const double lhs = wasserstein2(t, dirac_interpolation(t, x, mu, 0.5), DiscreteMeasure::dirac(t, midpoint(t, x, g))).distance;
        const double rhs = wasserstein2(t, mu, DiscreteMeasure::dirac(t, g)).distance / 2.0;
        CHECK(lhs <= rhs + 1e-9);
    }
}

TEST_CASE("support on a maximal geodesic") {
    const auto tree = tripod_completed();
    const auto line = geodesic_between_ends(tree, end(tree, "ra"), end(tree, "rb"));
    const auto off = supported_on_geodesic_test(tree, DiscreteMeasure::dirac(tree, at(tree, "c")), line);
    CHECK_FALSE(off.supported);
    REQUIRE(off.witness);
    CHECK(off.midpoint_distance < off.half_distance);

    const auto on_line = supported_on_geodesic_test(tree, DiscreteMeasure::dirac(tree, on(tree, "ra", 3.0)), line);
    CHECK(on_line.supported);
    CHECK(on_line.max_equality_defect < 1e-12);

    const auto leafy = tripod();
    const auto short_segment = geodesic_segment(leafy, at(leafy, "a"), at(leafy, "o"), 0.0, 1.0);
    CHECK(kind_of([&] { supported_on_geodesic_test(leafy, DiscreteMeasure::dirac(leafy, at(leafy, "a")), short_segment); }) ==
          ErrorKind::InvalidPoint);
}

TEST_CASE("complete plans must have unit speed") {
    const auto tree = star(3);
    CHECK(validate_complete_plan(tree, complete_plan(tree, {{"r1", "r2"}, {"r1", "r3"}})).valid);

    const auto fast = geodesic_between_ends(tree, end(tree, "r1"), end(tree, "r2"));
    const DynamicalPlan mixed(tree,
                              {{make_geodesic(tree, end(tree, "r1"), end(tree, "r2"), std::sqrt(2.0), TimeInterval::complete(),
                                              fast.anchor(), 0.0),
                                0.5},
                               {make_geodesic(tree, at(tree, "o"), at(tree, "o"), 0.0, TimeInterval::complete(), at(tree, "o"), 0.0),
                                0.5}},
                              TimeInterval::complete());
    CHECK(mixed.speed() == doctest::Approx(1.0));
    const auto cert = validate_complete_plan(tree, mixed);
    CHECK_FALSE(cert.valid);
    REQUIRE(cert.witness);
    CHECK_FALSE(cert.witness->monotone);
}
