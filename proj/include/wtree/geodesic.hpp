#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "wtree/metric_tree.hpp"

namespace wtree {

enum class IntervalKind { Segment, Ray, Complete };

/// Parametrization interval: [start, finish], [0, +inf) or (-inf, +inf).
struct TimeInterval {
    IntervalKind kind = IntervalKind::Segment;
    double start = 0.0;
    double finish = 1.0;

    static TimeInterval segment(double t0, double t1) { return {IntervalKind::Segment, t0, t1}; }
    static TimeInterval ray() { return {IntervalKind::Ray, 0.0, kInfinity}; }
    static TimeInterval complete() { return {IntervalKind::Complete, -kInfinity, kInfinity}; }

    bool contains(double t) const;
    friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

/// A stretch of a locus lying on one edge, in arclength coordinates u.
/// The path sits at offset (u - origin) when `forward`, (origin - u) otherwise,
/// for u in [lo, hi]. Either bound may be infinite on an infinite edge.
struct Traversal {
    EdgeIndex edge = 0;
    bool forward = true;
    double origin = 0.0;
    double lo = 0.0;
    double hi = 0.0;

    double offset_at(double u) const { return forward ? u - origin : origin - u; }
    /// Offsets covered on the edge, as an ordered pair.
    std::pair<double, double> offset_range() const;
};

/// Either side of a locus: a point of the tree or a boundary end.
using LocusSide = std::variant<TreePoint, TreeEnd>;

/// Constant-speed parametrized geodesic of the tree. The locus is stored in
/// arclength coordinates with the anchor at u = 0; time t maps to
/// u = speed * (t - anchor_time).
class TreeGeodesic {
public:
    double speed() const { return speed_; }
    const TimeInterval& interval() const { return interval_; }
    const TreePoint& anchor() const { return anchor_; }
    double anchor_time() const { return anchor_time_; }
    std::span<const Traversal> locus() const { return locus_; }
    const LocusSide& from() const { return from_; }
    const LocusSide& to() const { return to_; }

    bool is_constant() const { return speed_ == 0.0 || locus_.empty(); }
    /// End reached as t -> +inf, if any.
    std::optional<TreeEnd> forward_end() const;
    /// End reached as t -> -inf, if any.
    std::optional<TreeEnd> backward_end() const;

    double arclength_at(double t) const { return is_constant() ? 0.0 : speed_ * (t - anchor_time_); }

private:
    friend class GeodesicFactory;

    double speed_ = 0.0;
    TimeInterval interval_;
    TreePoint anchor_;
    double anchor_time_ = 0.0;
    std::vector<Traversal> locus_;
    LocusSide from_;
    LocusSide to_;
};

/// Geodesic with g(t0) = p and g(t1) = q. Constant when p == q.
TreeGeodesic geodesic_segment(const MetricTree& tree, const TreePoint& p, const TreePoint& q, double t0, double t1);

/// Ray g on [0, inf) with g(0) = p, asymptotic to `end`. Constant when speed is 0.
TreeGeodesic ray_to_end(const MetricTree& tree, const TreePoint& p, TreeEnd end, double speed);

/// Unit-speed complete geodesic from `backward` (t -> -inf) to `forward`
/// (t -> +inf), whose time 0 is the locus point closest to the base point.
TreeGeodesic geodesic_between_ends(const MetricTree& tree, TreeEnd backward, TreeEnd forward);

/// General constructor: locus between the two sides, anchored at the locus
/// point `anchor` (which must lie on it) at time `anchor_time`.
TreeGeodesic make_geodesic(const MetricTree& tree, const LocusSide& from, const LocusSide& to, double speed,
                           const TimeInterval& interval, const TreePoint& anchor, double anchor_time);

TreePoint evaluate(const MetricTree& tree, const TreeGeodesic& g, double t);

/// Point of the locus at arclength u (anchor at u = 0).
TreePoint point_at_arclength(const MetricTree& tree, const TreeGeodesic& g, double u);

/// Arclength coordinate of `p` if it lies on the locus.
std::optional<double> arclength_of(const MetricTree& tree, const TreeGeodesic& g, const TreePoint& p);

/// g reparametrized by t -> -t. Rays cannot be reversed.
TreeGeodesic time_reversed(const TreeGeodesic& g);

/// Same locus, speed, parametrization and anchor.
bool same_geodesic(const MetricTree& tree, const TreeGeodesic& a, const TreeGeodesic& b);

struct Projection {
    TreePoint point;
    double arclength = 0.0;
    double distance = 0.0;
};

/// Closest point of the locus of a non-constant geodesic.
Projection project_to_geodesic(const MetricTree& tree, const TreePoint& y, const TreeGeodesic& g);

/// Distance from the base point to the geodesic joining two ends; +inf when
/// the ends coincide.
double gromov_product(const MetricTree& tree, TreeEnd xi, TreeEnd zeta);

/// Vertices of the perpendicular at x to the flag {e, f}: x together with the
/// components of the tree minus x that contain neither e nor f.
std::vector<VertexIndex> perpendicular(const MetricTree& tree, VertexIndex x, EdgeIndex e, EdgeIndex f);

/// End reached by leaving v through `via` and then always taking the incident
/// edge with the smallest id. Throws LeafyTree when a leaf is reached.
TreeEnd straight_end(const MetricTree& tree, VertexIndex v, EdgeIndex via);

/// Vertices of the component of (tree minus x) entered through edge g at x.
std::vector<VertexIndex> branch_vertices(const MetricTree& tree, VertexIndex x, EdgeIndex g);

}  // namespace wtree
