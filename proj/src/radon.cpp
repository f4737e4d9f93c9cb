#include "wtree/radon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wtree {

std::vector<Flag> all_flags(const MetricTree& tree) {
    std::vector<Flag> flags;
    for (VertexIndex x = 0; x < tree.vertex_count(); ++x) {
        const auto incident = tree.incident(x);
        for (std::size_t i = 0; i < incident.size(); ++i)
            for (std::size_t j = i + 1; j < incident.size(); ++j) flags.push_back(Flag::make(x, incident[i], incident[j]));
    }
    std::sort(flags.begin(), flags.end());
    return flags;
}

double VertexFunction::total() const { return std::accumulate(values.begin(), values.end(), 0.0); }

void require_radon_ready(const MetricTree& tree) {
    if (!tree.report().radon_ready())
        throw Error(ErrorKind::MalformedForRadon, "Radon transforms need a tree without leaves or valency-2 vertices");
}

namespace {

void require_leaf_free(const MetricTree& tree) {
    if (!tree.report().leaves.empty()) throw Error(ErrorKind::LeafyTree, "tree has leaves");
}

// Sum of h over the component of (tree minus x) entered through g.
class BranchSums {
public:
    BranchSums(const MetricTree& tree, const VertexFunction& h) : tree_(tree), below_(h.values), total_(h.total()) {
        const auto order = tree.preorder();
        for (auto it = order.rbegin(); it != order.rend(); ++it)
            if (tree.parent_edge(*it)) below_[tree.parent(*it)] += below_[*it];
    }

    double operator()(VertexIndex x, EdgeIndex g) const {
        const Edge& e = tree_.edge(g);
        if (e.infinite()) return 0.0;
        const VertexIndex y = tree_.opposite(g, x);
        if (tree_.parent_edge(y) == g) return below_[y];
        return total_ - below_[x];
    }

    double total() const { return total_; }

private:
    const MetricTree& tree_;
    std::vector<double> below_;
    double total_;
};

EdgeIndex smallest_other_edge(const MetricTree& tree, VertexIndex x, EdgeIndex skip) {
    std::optional<EdgeIndex> best;
    for (EdgeIndex e : tree.incident(x))
        if (e != skip && (!best || tree.edge(e).id < tree.edge(*best).id)) best = e;
    if (!best) throw Error(ErrorKind::LeafyTree, "vertex '" + tree.vertex_id(x) + "' is a leaf");
    return *best;
}

// Complete geodesic containing edge e.
TreeGeodesic edge_geodesic(const MetricTree& tree, EdgeIndex e) {
    const Edge& edge = tree.edge(e);
    if (edge.infinite()) {
        const TreeEnd other = straight_end(tree, edge.tail, smallest_other_edge(tree, edge.tail, e));
        return geodesic_between_ends(tree, tree.end_of(e), other);
    }
    return geodesic_between_ends(tree, straight_end(tree, *edge.head, e), straight_end(tree, edge.tail, e));
}

double projected_mass_at(const MetricTree& tree, std::span<const Atom> atoms, const TreeGeodesic& g,
                         VertexIndex x) {
    double mass = 0.0;
    for (const auto& a : atoms) {
        const TreePoint p = project_to_geodesic(tree, a.point, g).point;
        if (p.on_vertex() && p.vertex() == x) mass += a.mass;
    }
    return mass;
}

}  // namespace

DiscreteMeasure radon_measure(const MetricTree& tree, const DiscreteMeasure& mu, const TreeGeodesic& g) {
    if (g.is_constant()) throw Error(ErrorKind::ConstantGeodesic, "Radon transform needs a non-constant geodesic");
    require_leaf_free(tree);
    std::vector<Atom> atoms;
    for (const auto& a : mu.atoms()) atoms.push_back({project_to_geodesic(tree, a.point, g).point, a.mass});
    return {tree, std::move(atoms)};
}

RadonData combinatorial_radon(const MetricTree& tree, const VertexFunction& h) {
    require_radon_ready(tree);
    if (h.values.size() != tree.vertex_count())
        throw Error(ErrorKind::InconsistentData, "vertex function size does not match the tree");
    const BranchSums branch(tree, h);
    RadonData out;
    // The perpendicular is everything except the two branches through e and f.
    for (const auto& flag : all_flags(tree))
        out[flag] = branch.total() - branch(flag.vertex, flag.first) - branch(flag.vertex, flag.second);
    return out;
}

VertexFunction radon_invert(const MetricTree& tree, const RadonData& data, double total) {
    require_radon_ready(tree);
    std::vector<double> flag_sum(tree.vertex_count(), 0.0);
    std::vector<std::size_t> flag_count(tree.vertex_count(), 0);
    for (const auto& [flag, value] : data) {
        if (flag.vertex >= tree.vertex_count()) throw Error(ErrorKind::MalformedForRadon, "flag vertex out of range");
        flag_sum[flag.vertex] += value;
        ++flag_count[flag.vertex];
    }
    VertexFunction h;
    h.values.resize(tree.vertex_count());
    for (VertexIndex x = 0; x < tree.vertex_count(); ++x) {
        const double k = static_cast<double>(tree.valency(x));
        if (flag_count[x] != tree.valency(x) * (tree.valency(x) - 1) / 2)
            throw Error(ErrorKind::MalformedForRadon, "missing flags at vertex '" + tree.vertex_id(x) + "'");
        // Each vertex other than x lies in C(k-1, 2) perpendiculars at x, and x in all C(k, 2).
        h.values[x] = (2.0 * flag_sum[x] - (k - 1.0) * (k - 2.0) * total) / (2.0 * (k - 1.0));
    }
    const auto check = combinatorial_radon(tree, h);
    for (const auto& [flag, value] : data) {
        const auto it = check.find(flag);
        if (it == check.end()) throw Error(ErrorKind::MalformedForRadon, "flag does not belong to the tree");
        if (std::abs(it->second - value) > 1e-7)
            throw Error(ErrorKind::InconsistentData, "data is not the transform of any function with this total");
    }
    return h;
}

TreeGeodesic flag_geodesic(const MetricTree& tree, const Flag& flag) {
    return geodesic_between_ends(tree, straight_end(tree, flag.vertex, flag.first),
                                 straight_end(tree, flag.vertex, flag.second));
}

RadonRoundtrip measure_radon_roundtrip(const MetricTree& tree, const DiscreteMeasure& mu) {
    require_radon_ready(tree);
    RadonRoundtrip out;

    for (EdgeIndex e = 0; e < tree.edge_count(); ++e) {
        const auto projected = radon_measure(tree, mu, edge_geodesic(tree, e));
        for (const auto& a : projected.atoms())
            if (!a.point.on_vertex() && a.point.edge() == e) out.edge_part.push_back(a);
    }
    const double edge_mass = std::accumulate(out.edge_part.begin(), out.edge_part.end(), 0.0,
                                             [](double s, const Atom& a) { return s + a.mass; });

    RadonData data;
    for (const auto& flag : all_flags(tree)) {
        const auto g = flag_geodesic(tree, flag);
        const double at_vertex = radon_measure(tree, mu, g).mass_at(tree, TreePoint::at_vertex(flag.vertex));
        data[flag] = at_vertex - projected_mass_at(tree, out.edge_part, g, flag.vertex);
    }
    out.vertex_part = radon_invert(tree, data, 1.0 - edge_mass);

    out.reconstruction = out.edge_part;
    for (VertexIndex x = 0; x < tree.vertex_count(); ++x)
        if (std::abs(out.vertex_part.values[x]) > 1e-12)
            out.reconstruction.push_back({TreePoint::at_vertex(x), out.vertex_part.values[x]});

    for (const auto& a : mu.atoms()) {
        double rebuilt = 0.0;
        for (const auto& r : out.reconstruction)
            if (tree.same_point(r.point, a.point)) rebuilt += r.mass;
        out.max_error = std::max(out.max_error, std::abs(rebuilt - a.mass));
    }
    for (const auto& r : out.reconstruction)
        if (mu.mass_at(tree, r.point) == 0.0) out.max_error = std::max(out.max_error, std::abs(r.mass));
    out.exact = out.max_error <= 1e-9;
    return out;
}

}  // namespace wtree
