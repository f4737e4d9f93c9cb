#pragma once

#include <string>

#include "wtree/metric_tree.hpp"

namespace fixtures {

using namespace wtree;

inline EdgeSpec finite(std::string id, std::string from, std::string to, double length = 1.0) {
    return {std::move(id), {std::move(from), std::move(to)}, length};
}
inline EdgeSpec ray(std::string id, std::string from) { return {std::move(id), {std::move(from)}, kInfinity}; }

/// Center o joined to leaves a, b, c by unit edges ea, eb, ec.
inline MetricTree tripod() {
    return MetricTree(TreeSpec{{"o", "a", "b", "c"}, {finite("ea", "o", "a"), finite("eb", "o", "b"), finite("ec", "o", "c")}, {}});
}

/// Tripod with a ray ra, rb, rc past each leaf.
inline MetricTree tripod_completed() {
    return MetricTree(TreeSpec{{"o", "a", "b", "c"},
                               {finite("ea", "o", "a"), finite("eb", "o", "b"), finite("ec", "o", "c"), ray("ra", "a"),
                                ray("rb", "b"), ray("rc", "c")},
                               {}});
}

/// Center o with rays r1..rk.
inline MetricTree star(int k) {
    TreeSpec spec{{"o"}, {}, {}};
    for (int i = 1; i <= k; ++i) spec.edges.push_back(ray("r" + std::to_string(i), "o"));
    return MetricTree(spec);
}

/// Unit edge uv; rays ray1, ray2 at u and ray3, ray4 at v.
inline MetricTree barbell() {
    return MetricTree(TreeSpec{{"u", "v"},
                               {finite("uv", "u", "v"), ray("ray1", "u"), ray("ray2", "u"), ray("ray3", "v"),
                                ray("ray4", "v")},
                               {}});
}

inline TreePoint at(const MetricTree& tree, std::string_view vertex) {
    return TreePoint::at_vertex(tree.vertex_index(vertex));
}

inline TreePoint on(const MetricTree& tree, std::string_view edge, double offset) {
    return tree.point_on_edge(tree.edge_index(edge), offset);
}

inline TreeEnd end(const MetricTree& tree, std::string_view edge) { return tree.end_of(tree.edge_index(edge)); }

}  // namespace fixtures
