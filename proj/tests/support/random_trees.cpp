#include "random_trees.hpp"

#include <string>

namespace wtree::testing {

std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

TreeSpec random_tree_spec(Rng& rng, const TreeShape& shape) {
    TreeSpec spec;
    std::vector<std::size_t> degree(shape.vertices, 0);
    std::uniform_int_distribution<int> length(1, shape.max_length);
    for (std::size_t v = 0; v < shape.vertices; ++v) {
        spec.vertices.push_back("v" + std::to_string(v));
        if (v == 0) continue;
        const std::size_t parent = pick(rng, v);
        spec.edges.push_back({"e" + std::to_string(v), {spec.vertices[parent], spec.vertices[v]}, double(length(rng))});
        ++degree[parent];
        ++degree[v];
    }
    std::size_t rays = 0;
    auto add_ray = [&](std::size_t v) {
        spec.edges.push_back({"r" + std::to_string(rays++), {spec.vertices[v]}, kInfinity});
        ++degree[v];
    };
    for (std::size_t k = 0; k < shape.rays; ++k) add_ray(pick(rng, shape.vertices));
    if (shape.radon_ready)
        for (std::size_t v = 0; v < shape.vertices; ++v)
            while (degree[v] < 3) add_ray(v);
    spec.basepoint = PointSpec{spec.vertices[0], "", 0.0};
    return spec;
}

MetricTree random_tree(Rng& rng, const TreeShape& shape) { return MetricTree(random_tree_spec(rng, shape)); }

TreePoint random_point(Rng& rng, const MetricTree& tree) {
    if (tree.edge_count() == 0 || pick(rng, 2) == 0) return TreePoint::at_vertex(pick(rng, tree.vertex_count()));
    const EdgeIndex e = pick(rng, tree.edge_count());
    const double length = tree.edge(e).infinite() ? 4.0 : tree.edge(e).length;
    const auto halves = static_cast<std::size_t>(2.0 * length);
    return tree.point_on_edge(e, 0.5 * double(pick(rng, halves + 1)));
}

}  // namespace wtree::testing
