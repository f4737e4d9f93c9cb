#include "wtree/metric_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wtree {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::MalformedTree: return "MalformedTree";
        case ErrorKind::InvalidPoint: return "InvalidPoint";
        case ErrorKind::OutOfInterval: return "OutOfInterval";
        case ErrorKind::EqualEnds: return "EqualEnds";
        case ErrorKind::ConstantGeodesic: return "ConstantGeodesic";
        case ErrorKind::FlagInvalid: return "FlagInvalid";
        case ErrorKind::PlanNotOptimal: return "PlanNotOptimal";
        case ErrorKind::MarginalMismatch: return "MarginalMismatch";
        case ErrorKind::LeafyTree: return "LeafyTree";
        case ErrorKind::NotDiracBased: return "NotDiracBased";
        case ErrorKind::NonUnitMeasure: return "NonUnitMeasure";
        case ErrorKind::InvalidMeasure: return "InvalidMeasure";
        case ErrorKind::NotAntipodal: return "NotAntipodal";
        case ErrorKind::DiagonalMass: return "DiagonalMass";
        case ErrorKind::NotRealizable: return "NotRealizable";
        case ErrorKind::MalformedForRadon: return "MalformedForRadon";
        case ErrorKind::InconsistentData: return "InconsistentData";
        case ErrorKind::SolverFailure: return "SolverFailure";
        case ErrorKind::ParseError: return "ParseError";
    }
    return "Unknown";
}

namespace {

struct DisjointSets {
    std::vector<std::size_t> parent;

    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

}  // namespace

ValidationReport validate(const TreeSpec& spec) {
    ValidationReport report;
    auto reject = [&](std::string why) {
        report.valid = false;
        report.problems.push_back(std::move(why));
    };

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < spec.vertices.size(); ++i) {
        const auto& id = spec.vertices[i];
        if (id.empty()) reject("empty vertex id");
        if (!index.emplace(id, i).second) reject("duplicate vertex id '" + id + "'");
    }
    if (spec.vertices.empty()) reject("tree has no vertices");

    std::unordered_map<std::string, std::size_t> edge_ids;
    std::vector<std::size_t> valency(spec.vertices.size(), 0);
    DisjointSets sets(spec.vertices.size());
    for (std::size_t i = 0; i < spec.edges.size(); ++i) {
        const auto& e = spec.edges[i];
        if (e.id.empty()) reject("empty edge id");
        if (!edge_ids.emplace(e.id, i).second) reject("duplicate edge id '" + e.id + "'");
        if (!(e.length > 0.0)) reject("edge '" + e.id + "' has nonpositive length");
        if (e.ends.empty() || e.ends.size() > 2) {
            reject("edge '" + e.id + "' must have one or two endpoints");
            continue;
        }
        bool endpoints_known = true;
        for (const auto& end : e.ends) {
            if (!index.contains(end)) {
                reject("edge '" + e.id + "' references unknown vertex '" + end + "'");
                endpoints_known = false;
            }
        }
        if (!endpoints_known) continue;
        if (e.ends.size() == 1) {
            if (!std::isinf(e.length)) reject("edge '" + e.id + "' has one endpoint but finite length");
            ++report.infinite_edges;
            ++valency[index[e.ends[0]]];
            continue;
        }
        if (std::isinf(e.length)) {
            reject("edge '" + e.id + "' has two endpoints and infinite length; split it into two rays");
            continue;
        }
        const auto a = index[e.ends[0]];
        const auto b = index[e.ends[1]];
        ++valency[a];
        ++valency[b];
        if (!sets.unite(a, b)) {
            report.acyclic = false;
            reject("cycle through edge '" + e.id + "'");
        }
    }

    if (!spec.vertices.empty()) {
        const auto root = sets.find(0);
        for (std::size_t v = 1; v < spec.vertices.size(); ++v) {
            if (sets.find(v) != root) {
                report.connected = false;
                reject("vertex '" + spec.vertices[v] + "' is disconnected from '" + spec.vertices[0] + "'");
                break;
            }
        }
    }

    for (std::size_t v = 0; v < spec.vertices.size(); ++v) {
        if (valency[v] == 1) report.leaves.push_back(spec.vertices[v]);
        if (valency[v] == 2) report.valency_two.push_back(spec.vertices[v]);
    }

    if (spec.basepoint) {
        const auto& bp = *spec.basepoint;
        if (bp.edge.empty()) {
            if (!index.contains(bp.vertex)) reject("basepoint vertex '" + bp.vertex + "' is unknown");
        } else if (auto it = edge_ids.find(bp.edge); it == edge_ids.end()) {
            reject("basepoint edge '" + bp.edge + "' is unknown");
        } else {
            const double len = spec.edges[it->second].length;
            if (bp.offset < 0.0 || bp.offset > len) reject("basepoint offset outside its edge");
        }
    }
    return report;
}

MetricTree::MetricTree(const TreeSpec& spec) : report_(validate(spec)) {
    if (!report_.valid) throw Error(ErrorKind::MalformedTree, report_.problems.front());

    vertex_ids_ = spec.vertices;
    for (VertexIndex v = 0; v < vertex_ids_.size(); ++v) vertex_lookup_.emplace(vertex_ids_[v], v);
    incident_.resize(vertex_ids_.size());
    for (EdgeIndex i = 0; i < spec.edges.size(); ++i) {
        const auto& s = spec.edges[i];
        Edge e;
        e.id = s.id;
        e.length = s.length;
        e.tail = vertex_lookup_.at(s.ends[0]);
        if (s.ends.size() == 2) e.head = vertex_lookup_.at(s.ends[1]);
        incident_[e.tail].push_back(i);
        if (e.head) incident_[*e.head].push_back(i);
        edge_lookup_.emplace(e.id, i);
        edges_.push_back(std::move(e));
    }

    const std::size_t n = vertex_ids_.size();
    parent_edge_.assign(n, std::nullopt);
    parent_.assign(n, 0);
    depth_.assign(n, 0);
    root_distance_.assign(n, 0.0);
    preorder_.reserve(n);
    std::vector<bool> seen(n, false);
    std::vector<VertexIndex> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
        const VertexIndex v = stack.back();
        stack.pop_back();
        preorder_.push_back(v);
        for (EdgeIndex e : incident_[v]) {
            if (edges_[e].infinite()) continue;
            const VertexIndex w = opposite(e, v);
            if (seen[w]) continue;
            seen[w] = true;
            parent_[w] = v;
            parent_edge_[w] = e;
            depth_[w] = depth_[v] + 1;
            root_distance_[w] = root_distance_[v] + edges_[e].length;
            stack.push_back(w);
        }
    }

    std::size_t levels = 1;
    while ((std::size_t{1} << levels) < n) ++levels;
    ancestors_.assign(levels, parent_);
    for (std::size_t k = 1; k < levels; ++k)
        for (VertexIndex v = 0; v < n; ++v) ancestors_[k][v] = ancestors_[k - 1][ancestors_[k - 1][v]];

    basepoint_ = spec.basepoint ? resolve(*spec.basepoint) : TreePoint::at_vertex(0);
}

std::optional<VertexIndex> MetricTree::find_vertex(std::string_view id) const {
    auto it = vertex_lookup_.find(std::string(id));
    if (it == vertex_lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<EdgeIndex> MetricTree::find_edge(std::string_view id) const {
    auto it = edge_lookup_.find(std::string(id));
    if (it == edge_lookup_.end()) return std::nullopt;
    return it->second;
}

VertexIndex MetricTree::vertex_index(std::string_view id) const {
    if (auto v = find_vertex(id)) return *v;
    throw Error(ErrorKind::InvalidPoint, "unknown vertex '" + std::string(id) + "'");
}

EdgeIndex MetricTree::edge_index(std::string_view id) const {
    if (auto e = find_edge(id)) return *e;
    throw Error(ErrorKind::InvalidPoint, "unknown edge '" + std::string(id) + "'");
}

VertexIndex MetricTree::opposite(EdgeIndex e, VertexIndex v) const {
    const Edge& edge = edges_.at(e);
    if (edge.infinite()) throw Error(ErrorKind::InvalidPoint, "edge '" + edge.id + "' has a single endpoint");
    return edge.tail == v ? *edge.head : edge.tail;
}

TreePoint MetricTree::point_on_edge(EdgeIndex e, double offset) const {
    const Edge& edge = edges_.at(e);
    if (std::isnan(offset) || offset < -kTolerance || offset > edge.length + kTolerance)
        throw Error(ErrorKind::InvalidPoint, "offset outside edge '" + edge.id + "'");
    if (offset <= kTolerance) return TreePoint::at_vertex(edge.tail);
    if (!edge.infinite() && offset >= edge.length - kTolerance) return TreePoint::at_vertex(*edge.head);
    return TreePoint::inside_edge(e, offset);
}

TreePoint MetricTree::resolve(const PointSpec& spec) const {
    if (spec.edge.empty()) return vertex_point(spec.vertex);
    return point_on_edge(edge_index(spec.edge), spec.offset);
}

void MetricTree::check_point(const TreePoint& p) const {
    if (p.on_vertex()) {
        if (p.vertex() >= vertex_count()) throw Error(ErrorKind::InvalidPoint, "vertex index out of range");
        return;
    }
    if (p.edge() >= edge_count()) throw Error(ErrorKind::InvalidPoint, "edge index out of range");
    const Edge& e = edges_[p.edge()];
    if (!(p.offset() > 0.0) || (!e.infinite() && !(p.offset() < e.length)))
        throw Error(ErrorKind::InvalidPoint, "non-canonical point on edge '" + e.id + "'");
}

TreeEnd MetricTree::end_of(EdgeIndex e) const {
    if (e >= edges_.size() || !edges_[e].infinite())
        throw Error(ErrorKind::InvalidPoint, "an end must reference an infinite edge");
    return TreeEnd{e};
}

std::vector<TreeEnd> MetricTree::ends() const {
    std::vector<TreeEnd> out;
    for (EdgeIndex e = 0; e < edges_.size(); ++e)
        if (edges_[e].infinite()) out.push_back(TreeEnd{e});
    return out;
}

MetricTree MetricTree::with_basepoint(const TreePoint& p) const {
    check_point(p);
    MetricTree copy = *this;
    copy.basepoint_ = p;
    return copy;
}

VertexIndex MetricTree::lowest_common_ancestor(VertexIndex u, VertexIndex v) const {
    if (depth_[u] < depth_[v]) std::swap(u, v);
    std::size_t diff = depth_[u] - depth_[v];
    for (std::size_t k = 0; diff > 0; ++k, diff >>= 1)
        if (diff & 1) u = ancestors_[k][u];
    if (u == v) return u;
    for (std::size_t k = ancestors_.size(); k-- > 0;) {
        if (ancestors_[k][u] != ancestors_[k][v]) {
            u = ancestors_[k][u];
            v = ancestors_[k][v];
        }
    }
    return parent_[u];
}

double MetricTree::vertex_distance(VertexIndex u, VertexIndex v) const {
    const VertexIndex w = lowest_common_ancestor(u, v);
    return root_distance_[u] + root_distance_[v] - 2.0 * root_distance_[w];
}

std::vector<PathStep> MetricTree::vertex_path(VertexIndex from, VertexIndex to) const {
    const VertexIndex w = lowest_common_ancestor(from, to);
    std::vector<PathStep> up;
    for (VertexIndex v = from; v != w; v = parent_[v]) up.push_back({*parent_edge_[v], v, parent_[v]});
    std::vector<PathStep> down;
    for (VertexIndex v = to; v != w; v = parent_[v]) down.push_back({*parent_edge_[v], parent_[v], v});
    up.insert(up.end(), down.rbegin(), down.rend());
    return up;
}

std::vector<std::pair<VertexIndex, double>> MetricTree::anchors(const TreePoint& p) const {
    if (p.on_vertex()) return {{p.vertex(), 0.0}};
    const Edge& e = edges_[p.edge()];
    if (e.infinite()) return {{e.tail, p.offset()}};
    return {{e.tail, p.offset()}, {*e.head, e.length - p.offset()}};
}

double MetricTree::distance(const TreePoint& p, const TreePoint& q) const {
    if (!p.on_vertex() && !q.on_vertex() && p.edge() == q.edge()) return std::abs(p.offset() - q.offset());
    double best = kInfinity;
    for (const auto& [u, du] : anchors(p))
        for (const auto& [v, dv] : anchors(q)) best = std::min(best, du + vertex_distance(u, v) + dv);
    return best;
}

bool MetricTree::same_point(const TreePoint& p, const TreePoint& q) const {
    if (p.on_vertex() != q.on_vertex()) return false;
    if (p.on_vertex()) return p.vertex() == q.vertex();
    // Far out on an infinite edge the offsets themselves are large.
    const double scale = std::max(1.0, std::abs(p.offset()));
    return p.edge() == q.edge() && std::abs(p.offset() - q.offset()) <= kTolerance * scale;
}

}  // namespace wtree
