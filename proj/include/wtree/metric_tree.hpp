#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wtree/error.hpp"

namespace wtree {

inline constexpr double kTolerance = 1e-9;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

using VertexIndex = std::size_t;
using EdgeIndex = std::size_t;

/// An edge of the tree. Offsets along the edge are measured from `tail`,
/// the first endpoint listed in the input. Infinite edges have no head.
struct Edge {
    std::string id;
    VertexIndex tail = 0;
    std::optional<VertexIndex> head;
    double length = 0.0;

    bool infinite() const { return !head.has_value(); }
};

/// A location in the tree: either a vertex or a point strictly inside an edge.
/// Points obtained from MetricTree are canonical, so a geometric point has a
/// single representation.
class TreePoint {
public:
    TreePoint() = default;

    static TreePoint at_vertex(VertexIndex v) { return TreePoint(true, v, 0.0); }
    /// Raw constructor; prefer MetricTree::point_on_edge which canonicalizes.
    static TreePoint inside_edge(EdgeIndex e, double offset) { return TreePoint(false, e, offset); }

    bool on_vertex() const { return on_vertex_; }
    VertexIndex vertex() const { return index_; }
    EdgeIndex edge() const { return index_; }
    double offset() const { return offset_; }

    friend bool operator==(const TreePoint&, const TreePoint&) = default;

private:
    TreePoint(bool on_vertex, std::size_t index, double offset)
        : on_vertex_(on_vertex), index_(index), offset_(offset) {}

    bool on_vertex_ = true;
    std::size_t index_ = 0;
    double offset_ = 0.0;
};

/// A boundary point. Each infinite edge carries exactly one end.
struct TreeEnd {
    EdgeIndex edge = 0;

    friend auto operator<=>(const TreeEnd&, const TreeEnd&) = default;
};

/// Input description of a tree, before validation.
struct PointSpec {
    std::string vertex;  // used when `edge` is empty
    std::string edge;
    double offset = 0.0;
};

struct EdgeSpec {
    std::string id;
    std::vector<std::string> ends;
    double length = 0.0;
};

struct TreeSpec {
    std::vector<std::string> vertices;
    std::vector<EdgeSpec> edges;
    std::optional<PointSpec> basepoint;
};

struct ValidationReport {
    bool valid = true;
    std::vector<std::string> problems;  // reasons for rejection
    std::vector<std::string> leaves;
    std::vector<std::string> valency_two;
    std::size_t infinite_edges = 0;
    bool connected = true;
    bool acyclic = true;

    /// Radon operations need every vertex of valency 1 or 2 to be absent.
    bool radon_ready() const { return valid && leaves.empty() && valency_two.empty(); }
};

/// Checks a tree description. Never throws; problems are listed in the report.
ValidationReport validate(const TreeSpec& spec);

/// One step of a vertex path: traverse `edge` from `from` to `to`.
struct PathStep {
    EdgeIndex edge;
    VertexIndex from;
    VertexIndex to;
};

/// Immutable, validated metric tree with a base point.
class MetricTree {
public:
    /// Throws Error(MalformedTree) if validate(spec) rejects the description.
    explicit MetricTree(const TreeSpec& spec);

    std::size_t vertex_count() const { return vertex_ids_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    const std::string& vertex_id(VertexIndex v) const { return vertex_ids_.at(v); }
    const Edge& edge(EdgeIndex e) const { return edges_.at(e); }
    std::span<const Edge> edges() const { return edges_; }
    std::span<const EdgeIndex> incident(VertexIndex v) const { return incident_.at(v); }
    std::size_t valency(VertexIndex v) const { return incident_.at(v).size(); }
    const ValidationReport& report() const { return report_; }

    std::optional<VertexIndex> find_vertex(std::string_view id) const;
    std::optional<EdgeIndex> find_edge(std::string_view id) const;
    VertexIndex vertex_index(std::string_view id) const;  // throws InvalidPoint
    EdgeIndex edge_index(std::string_view id) const;      // throws InvalidPoint

    /// The endpoint of `e` that is not `v`; throws for infinite edges.
    VertexIndex opposite(EdgeIndex e, VertexIndex v) const;

    TreePoint vertex_point(std::string_view id) const { return TreePoint::at_vertex(vertex_index(id)); }
    /// Canonical point at `offset` from the tail of `e`.
    TreePoint point_on_edge(EdgeIndex e, double offset) const;
    TreePoint resolve(const PointSpec& spec) const;
    void check_point(const TreePoint& p) const;

    TreeEnd end_of(EdgeIndex e) const;
    TreeEnd end_of(std::string_view edge_id) const { return end_of(edge_index(edge_id)); }
    std::vector<TreeEnd> ends() const;
    /// The finite endpoint of the infinite edge carrying `end`.
    VertexIndex end_vertex(TreeEnd end) const { return edges_.at(end.edge).tail; }

    const TreePoint& basepoint() const { return basepoint_; }
    MetricTree with_basepoint(const TreePoint& p) const;

    VertexIndex lowest_common_ancestor(VertexIndex u, VertexIndex v) const;
    double vertex_distance(VertexIndex u, VertexIndex v) const;
    std::vector<PathStep> vertex_path(VertexIndex from, VertexIndex to) const;

    double distance(const TreePoint& p, const TreePoint& q) const;
    bool same_point(const TreePoint& p, const TreePoint& q) const;

    /// Vertices adjacent to the point with their distances (one entry for a
    /// vertex, two for a finite edge, one for an infinite edge).
    std::vector<std::pair<VertexIndex, double>> anchors(const TreePoint& p) const;

    /// Rooted view used for subtree aggregates (root is vertex 0).
    std::optional<EdgeIndex> parent_edge(VertexIndex v) const { return parent_edge_.at(v); }
    VertexIndex parent(VertexIndex v) const { return parent_.at(v); }
    /// Vertices in an order where parents precede children.
    std::span<const VertexIndex> preorder() const { return preorder_; }

private:
    std::vector<std::string> vertex_ids_;
    std::vector<Edge> edges_;
    std::vector<std::vector<EdgeIndex>> incident_;
    std::unordered_map<std::string, VertexIndex> vertex_lookup_;
    std::unordered_map<std::string, EdgeIndex> edge_lookup_;
    ValidationReport report_;
    TreePoint basepoint_;

    std::vector<std::optional<EdgeIndex>> parent_edge_;
    std::vector<VertexIndex> parent_;
    std::vector<std::size_t> depth_;
    std::vector<double> root_distance_;
    std::vector<std::vector<VertexIndex>> ancestors_;  // binary lifting table
    std::vector<VertexIndex> preorder_;
};

}  // namespace wtree
