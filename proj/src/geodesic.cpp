#include "wtree/geodesic.hpp"

#include <algorithm>
#include <cmath>

namespace wtree {

namespace {

double scaled_tolerance(double u) { return kTolerance * std::max(1.0, std::abs(u)); }

// A straight run along one edge between two offsets (either may be infinite).
struct Piece {
    EdgeIndex edge;
    double from_offset;
    double to_offset;
};

Piece step_piece(const MetricTree& tree, const PathStep& step) {
    const Edge& e = tree.edge(step.edge);
    if (step.from == e.tail) return {step.edge, 0.0, e.length};
    return {step.edge, e.length, 0.0};
}

// Leg from an edge-interior point `a` to the endpoint of its edge facing `b`.
std::optional<Piece> exit_leg(const MetricTree& tree, const TreePoint& a, const TreePoint& b, VertexIndex& exit) {
    if (a.on_vertex()) {
        exit = a.vertex();
        return std::nullopt;
    }
    const Edge& e = tree.edge(a.edge());
    const double via_tail = a.offset() + tree.distance(TreePoint::at_vertex(e.tail), b);
    if (e.infinite()) {
        exit = e.tail;
        return Piece{a.edge(), a.offset(), 0.0};
    }
    const double via_head = (e.length - a.offset()) + tree.distance(TreePoint::at_vertex(*e.head), b);
    if (via_tail <= via_head) {
        exit = e.tail;
        return Piece{a.edge(), a.offset(), 0.0};
    }
    exit = *e.head;
    return Piece{a.edge(), a.offset(), e.length};
}

std::vector<Piece> pieces_between_points(const MetricTree& tree, const TreePoint& p, const TreePoint& q) {
    if (tree.same_point(p, q)) return {};
    if (!p.on_vertex() && !q.on_vertex() && p.edge() == q.edge()) return {{p.edge(), p.offset(), q.offset()}};
    VertexIndex first_vertex = 0;
    VertexIndex last_vertex = 0;
    const auto first = exit_leg(tree, p, q, first_vertex);
    const auto last = exit_leg(tree, q, p, last_vertex);
    std::vector<Piece> out;
    if (first) out.push_back(*first);
    for (const auto& step : tree.vertex_path(first_vertex, last_vertex)) out.push_back(step_piece(tree, step));
    if (last) out.push_back({last->edge, last->to_offset, last->from_offset});
    return out;
}

std::vector<Piece> pieces_point_to_end(const MetricTree& tree, const TreePoint& p, TreeEnd end) {
    if (!p.on_vertex() && p.edge() == end.edge) return {{end.edge, p.offset(), kInfinity}};
    auto out = pieces_between_points(tree, p, TreePoint::at_vertex(tree.end_vertex(end)));
    out.push_back({end.edge, 0.0, kInfinity});
    return out;
}

std::vector<Piece> reversed(std::vector<Piece> pieces) {
    std::reverse(pieces.begin(), pieces.end());
    for (auto& piece : pieces) std::swap(piece.from_offset, piece.to_offset);
    return pieces;
}

std::vector<Piece> pieces_between(const MetricTree& tree, const LocusSide& from, const LocusSide& to) {
    const auto* p = std::get_if<TreePoint>(&from);
    const auto* q = std::get_if<TreePoint>(&to);
    if (p && q) return pieces_between_points(tree, *p, *q);
    if (p) return pieces_point_to_end(tree, *p, std::get<TreeEnd>(to));
    if (q) return reversed(pieces_point_to_end(tree, *q, std::get<TreeEnd>(from)));
    const TreeEnd xi = std::get<TreeEnd>(from);
    const TreeEnd zeta = std::get<TreeEnd>(to);
    if (xi == zeta) throw Error(ErrorKind::EqualEnds, "a geodesic needs two distinct ends");
    std::vector<Piece> out{{xi.edge, kInfinity, 0.0}};
    for (const auto& step : tree.vertex_path(tree.end_vertex(xi), tree.end_vertex(zeta)))
        out.push_back(step_piece(tree, step));
    out.push_back({zeta.edge, 0.0, kInfinity});
    return out;
}

// Arclength coordinates: u = 0 at the first finite point of the path.
std::vector<Traversal> assign_arclength(const std::vector<Piece>& pieces) {
    std::vector<Traversal> out;
    out.reserve(pieces.size());
    double u = 0.0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const Piece& piece = pieces[i];
        Traversal t;
        t.edge = piece.edge;
        if (std::isinf(piece.from_offset)) {
            // Coming in from an end: only possible for the first piece.
            t.forward = false;
            t.origin = piece.to_offset;
            t.lo = -kInfinity;
            t.hi = 0.0;
            out.push_back(t);
            continue;
        }
        t.forward = piece.to_offset > piece.from_offset;
        t.origin = t.forward ? u - piece.from_offset : u + piece.from_offset;
        t.lo = u;
        t.hi = u + std::abs(piece.to_offset - piece.from_offset);
        u = t.hi;
        out.push_back(t);
    }
    return out;
}

std::optional<double> locate(const MetricTree& tree, std::span<const Traversal> path, const TreePoint& p) {
    for (const auto& t : path) {
        const Edge& e = tree.edge(t.edge);
        std::optional<double> u;
        if (p.on_vertex()) {
            if (e.tail == p.vertex()) u = t.origin;
            else if (e.head && *e.head == p.vertex()) u = t.forward ? t.origin + e.length : t.origin - e.length;
        } else if (p.edge() == t.edge) {
            u = t.forward ? t.origin + p.offset() : t.origin - p.offset();
        }
        if (u && *u >= t.lo - scaled_tolerance(*u) && *u <= t.hi + scaled_tolerance(*u)) return *u;
    }
    return std::nullopt;
}

TreePoint point_on_path(const MetricTree& tree, std::span<const Traversal> path, double u) {
    auto it = std::lower_bound(path.begin(), path.end(), u,
                               [](const Traversal& t, double value) { return t.hi < value; });
    if (it == path.end()) {
        if (u > path.back().hi + scaled_tolerance(u)) throw Error(ErrorKind::OutOfInterval, "beyond the locus");
        it = std::prev(path.end());
    }
    if (u < it->lo - scaled_tolerance(u)) throw Error(ErrorKind::OutOfInterval, "before the locus");
    const Edge& e = tree.edge(it->edge);
    double offset = std::max(0.0, it->offset_at(u));
    if (!e.infinite()) offset = std::min(offset, e.length);
    return tree.point_on_edge(it->edge, offset);
}

Projection project_on_path(const MetricTree& tree, std::span<const Traversal> path, const TreePoint& y) {
    Projection best{TreePoint{}, 0.0, kInfinity};
    auto consider = [&](double u) {
        const TreePoint p = point_on_path(tree, path, u);
        const double d = tree.distance(p, y);
        if (d < best.distance) best = {p, u, d};
    };
    for (const auto& t : path) {
        if (std::isfinite(t.lo)) consider(t.lo);
        if (std::isfinite(t.hi)) consider(t.hi);
        if (!y.on_vertex() && y.edge() == t.edge) {
            const double u = t.forward ? t.origin + y.offset() : t.origin - y.offset();
            consider(std::clamp(u, t.lo, t.hi));
        }
    }
    return best;
}

bool close(double a, double b) {
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::abs(a - b) <= kTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

bool TimeInterval::contains(double t) const {
    if (std::isnan(t)) return false;
    switch (kind) {
        case IntervalKind::Segment:
            return t >= start - scaled_tolerance(start) && t <= finish + scaled_tolerance(finish);
        case IntervalKind::Ray: return t >= -kTolerance;
        case IntervalKind::Complete: return true;
    }
    return false;
}

std::pair<double, double> Traversal::offset_range() const {
    const double a = offset_at(lo);
    const double b = offset_at(hi);
    return {std::min(a, b), std::max(a, b)};
}

std::optional<TreeEnd> TreeGeodesic::forward_end() const {
    if (is_constant()) return std::nullopt;
    if (const auto* end = std::get_if<TreeEnd>(&to_)) return *end;
    return std::nullopt;
}

std::optional<TreeEnd> TreeGeodesic::backward_end() const {
    if (is_constant()) return std::nullopt;
    if (const auto* end = std::get_if<TreeEnd>(&from_)) return *end;
    return std::nullopt;
}

class GeodesicFactory {
public:
    static TreeGeodesic build(const MetricTree& tree, const LocusSide& from, const LocusSide& to, double speed,
                              const TimeInterval& interval, const TreePoint& anchor, double anchor_time) {
        if (!(speed >= 0.0) || std::isinf(speed)) throw Error(ErrorKind::InvalidPoint, "speed must be finite and nonnegative");
        tree.check_point(anchor);
        TreeGeodesic g;
        g.interval_ = interval;
        g.anchor_ = anchor;
        g.anchor_time_ = anchor_time;
        g.speed_ = speed;
        std::vector<Traversal> path;
        if (speed > 0.0) path = assign_arclength(pieces_between(tree, from, to));
        if (path.empty()) {
            g.speed_ = 0.0;
            g.from_ = anchor;
            g.to_ = anchor;
            return g;
        }
        const auto origin = locate(tree, path, anchor);
        if (!origin) throw Error(ErrorKind::InvalidPoint, "anchor does not lie on the locus");
        for (auto& t : path) {
            t.origin -= *origin;
            t.lo -= *origin;
            t.hi -= *origin;
        }
        g.locus_ = std::move(path);
        g.from_ = from;
        g.to_ = to;
        return g;
    }

    static TreeGeodesic reverse(const TreeGeodesic& g) {
        TreeGeodesic r = g;
        switch (g.interval_.kind) {
            case IntervalKind::Segment: r.interval_ = TimeInterval::segment(-g.interval_.finish, -g.interval_.start); break;
            case IntervalKind::Ray: throw Error(ErrorKind::OutOfInterval, "a ray has no time reversal");
            case IntervalKind::Complete: break;
        }
        r.anchor_time_ = -g.anchor_time_;
        r.from_ = g.to_;
        r.to_ = g.from_;
        r.locus_.assign(g.locus_.rbegin(), g.locus_.rend());
        for (auto& t : r.locus_) {
            t.forward = !t.forward;
            t.origin = -t.origin;
            std::swap(t.lo, t.hi);
            t.lo = -t.lo;
            t.hi = -t.hi;
        }
        return r;
    }
};

TreeGeodesic make_geodesic(const MetricTree& tree, const LocusSide& from, const LocusSide& to, double speed,
                           const TimeInterval& interval, const TreePoint& anchor, double anchor_time) {
    return GeodesicFactory::build(tree, from, to, speed, interval, anchor, anchor_time);
}

TreeGeodesic geodesic_segment(const MetricTree& tree, const TreePoint& p, const TreePoint& q, double t0, double t1) {
    if (!(t0 < t1)) throw Error(ErrorKind::OutOfInterval, "segment needs t0 < t1");
    tree.check_point(p);
    tree.check_point(q);
    const double speed = tree.distance(p, q) / (t1 - t0);
    return make_geodesic(tree, p, q, speed, TimeInterval::segment(t0, t1), p, t0);
}

TreeGeodesic ray_to_end(const MetricTree& tree, const TreePoint& p, TreeEnd end, double speed) {
    tree.end_of(end.edge);
    return make_geodesic(tree, p, end, speed, TimeInterval::ray(), p, 0.0);
}

TreeGeodesic geodesic_between_ends(const MetricTree& tree, TreeEnd backward, TreeEnd forward) {
    tree.end_of(backward.edge);
    tree.end_of(forward.edge);
    if (backward == forward) throw Error(ErrorKind::EqualEnds, "a geodesic needs two distinct ends");
    const auto path = assign_arclength(pieces_between(tree, backward, forward));
    const Projection foot = project_on_path(tree, path, tree.basepoint());
    return make_geodesic(tree, backward, forward, 1.0, TimeInterval::complete(), foot.point, 0.0);
}

TreePoint point_at_arclength(const MetricTree& tree, const TreeGeodesic& g, double u) {
    if (g.locus().empty()) return g.anchor();
    return point_on_path(tree, g.locus(), u);
}

TreePoint evaluate(const MetricTree& tree, const TreeGeodesic& g, double t) {
    if (!g.interval().contains(t)) throw Error(ErrorKind::OutOfInterval, "time outside the parametrization interval");
    return point_at_arclength(tree, g, g.arclength_at(t));
}

std::optional<double> arclength_of(const MetricTree& tree, const TreeGeodesic& g, const TreePoint& p) {
    if (g.locus().empty()) {
        if (tree.same_point(p, g.anchor())) return 0.0;
        return std::nullopt;
    }
    return locate(tree, g.locus(), p);
}

TreeGeodesic time_reversed(const TreeGeodesic& g) { return GeodesicFactory::reverse(g); }

bool same_geodesic(const MetricTree& tree, const TreeGeodesic& a, const TreeGeodesic& b) {
    if (!close(a.speed(), b.speed())) return false;
    if (a.interval().kind != b.interval().kind || !close(a.interval().start, b.interval().start) ||
        !close(a.interval().finish, b.interval().finish))
        return false;
    if (a.locus().size() != b.locus().size()) return false;
    if (a.is_constant()) return tree.same_point(a.anchor(), b.anchor());
    // Same locus and same time-to-arclength map.
    if (!close(a.anchor_time(), b.anchor_time()) || !tree.same_point(a.anchor(), b.anchor())) return false;
    for (std::size_t i = 0; i < a.locus().size(); ++i) {
        const auto& s = a.locus()[i];
        const auto& t = b.locus()[i];
        if (s.edge != t.edge || s.forward != t.forward || !close(s.lo, t.lo) || !close(s.hi, t.hi)) return false;
    }
    return true;
}

Projection project_to_geodesic(const MetricTree& tree, const TreePoint& y, const TreeGeodesic& g) {
    if (g.is_constant()) throw Error(ErrorKind::ConstantGeodesic, "cannot project onto a constant geodesic");
    tree.check_point(y);
    return project_on_path(tree, g.locus(), y);
}

double gromov_product(const MetricTree& tree, TreeEnd xi, TreeEnd zeta) {
    tree.end_of(xi.edge);
    tree.end_of(zeta.edge);
    if (xi == zeta) return kInfinity;
    const auto path = assign_arclength(pieces_between(tree, xi, zeta));
    return project_on_path(tree, path, tree.basepoint()).distance;
}

TreeEnd straight_end(const MetricTree& tree, VertexIndex v, EdgeIndex via) {
    while (!tree.edge(via).infinite()) {
        v = tree.opposite(via, v);
        std::optional<EdgeIndex> next;
        for (EdgeIndex e : tree.incident(v))
            if (e != via && (!next || tree.edge(e).id < tree.edge(*next).id)) next = e;
        if (!next) throw Error(ErrorKind::LeafyTree, "vertex '" + tree.vertex_id(v) + "' is a leaf");
        via = *next;
    }
    return tree.end_of(via);
}

std::vector<VertexIndex> branch_vertices(const MetricTree& tree, VertexIndex x, EdgeIndex g) {
    if (tree.edge(g).infinite()) return {};
    std::vector<VertexIndex> out;
    std::vector<std::pair<VertexIndex, VertexIndex>> stack{{tree.opposite(g, x), x}};
    while (!stack.empty()) {
        const auto [v, came_from] = stack.back();
        stack.pop_back();
        out.push_back(v);
        for (EdgeIndex e : tree.incident(v)) {
            if (tree.edge(e).infinite()) continue;
            const VertexIndex w = tree.opposite(e, v);
            if (w != came_from) stack.push_back({w, v});
        }
    }
    return out;
}

std::vector<VertexIndex> perpendicular(const MetricTree& tree, VertexIndex x, EdgeIndex e, EdgeIndex f) {
    const auto incident = tree.incident(x);
    auto touches = [&](EdgeIndex g) { return std::find(incident.begin(), incident.end(), g) != incident.end(); };
    if (e == f || !touches(e) || !touches(f))
        throw Error(ErrorKind::FlagInvalid, "a flag needs two distinct edges incident to its vertex");
    std::vector<VertexIndex> out{x};
    for (EdgeIndex g : incident) {
        if (g == e || g == f) continue;
        const auto part = branch_vertices(tree, x, g);
        out.insert(out.end(), part.begin(), part.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace wtree
