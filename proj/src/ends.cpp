#include "wtree/ends.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wtree {

BoundaryMeasure::BoundaryMeasure(const MetricTree& tree, std::vector<EndAtom> atoms) {
    double total = 0.0;
    for (const auto& atom : atoms) {
        if (!std::isfinite(atom.mass) || atom.mass < 0.0)
            throw Error(ErrorKind::InvalidMeasure, "masses must be finite and nonnegative");
        tree.end_of(atom.end.edge);
        total += atom.mass;
        if (atom.mass == 0.0) continue;
        auto it = std::find_if(atoms_.begin(), atoms_.end(), [&](const EndAtom& a) { return a.end == atom.end; });
        if (it == atoms_.end()) atoms_.push_back(atom);
        else it->mass += atom.mass;
    }
    if (atoms_.empty() || std::abs(total - 1.0) > 1e-9) throw Error(ErrorKind::InvalidMeasure, "masses must sum to 1");
}

double BoundaryMeasure::mass_of(TreeEnd end) const {
    for (const auto& a : atoms_)
        if (a.end == end) return a.mass;
    return 0.0;
}

ConeMeasure BoundaryMeasure::unit_cone() const {
    std::vector<ConeAtom> atoms;
    for (const auto& a : atoms_) atoms.push_back({ConePoint{a.end, 1.0}, a.mass});
    return ConeMeasure(std::move(atoms));
}

AntipodalReport is_antipodal(const BoundaryMeasure& minus, const BoundaryMeasure& plus) {
    AntipodalReport report;
    for (const auto& a : minus.atoms())
        if (plus.mass_of(a.end) > 0.0) report.shared_ends.push_back(a.end);
    report.antipodal = report.shared_ends.empty();
    return report;
}

double FlowTable::flow(const MetricTree& tree, EdgeIndex e, VertexIndex from) const {
    return tree.edge(e).tail == from ? edge_flow.at(e) : -edge_flow.at(e);
}

FlowSign FlowTable::sign(const MetricTree& tree, EdgeIndex e, VertexIndex from) const {
    const double f = flow(tree, e, from);
    if (f > kNeutralFlow) return FlowSign::Positive;
    if (f < -kNeutralFlow) return FlowSign::Negative;
    return FlowSign::Neutral;
}

namespace {

void require_antipodal(const BoundaryMeasure& minus, const BoundaryMeasure& plus) {
    if (!is_antipodal(minus, plus).antipodal)
        throw Error(ErrorKind::NotAntipodal, "boundary measures share an end");
}

// For each vertex, the incident edge along which the distance to the base point decreases.
std::vector<std::optional<EdgeIndex>> edges_towards_basepoint(const MetricTree& tree) {
    std::vector<std::optional<EdgeIndex>> toward(tree.vertex_count());
    std::vector<bool> seen(tree.vertex_count(), false);
    std::vector<VertexIndex> queue;
    const TreePoint& x0 = tree.basepoint();
    if (x0.on_vertex()) {
        queue.push_back(x0.vertex());
    } else {
        for (const auto& [v, d] : tree.anchors(x0)) {
            (void)d;
            toward[v] = x0.edge();
            queue.push_back(v);
        }
    }
    for (VertexIndex v : queue) seen[v] = true;
    for (std::size_t k = 0; k < queue.size(); ++k) {
        const VertexIndex v = queue[k];
        for (EdgeIndex e : tree.incident(v)) {
            if (tree.edge(e).infinite()) continue;
            const VertexIndex w = tree.opposite(e, v);
            if (seen[w]) continue;
            seen[w] = true;
            toward[w] = e;
            queue.push_back(w);
        }
    }
    return toward;
}

}  // namespace

FlowTable flow_table(const MetricTree& tree, const BoundaryMeasure& minus, const BoundaryMeasure& plus) {
    require_antipodal(minus, plus);
    const std::size_t nv = tree.vertex_count();
    std::vector<double> end_mass(tree.edge_count(), 0.0);
    for (const auto& a : plus.atoms()) end_mass[a.end.edge] += a.mass;
    for (const auto& a : minus.atoms()) end_mass[a.end.edge] -= a.mass;

    // Signed end mass below each vertex of the rooted view.
    std::vector<double> below(nv, 0.0);
    for (VertexIndex v = 0; v < nv; ++v)
        for (EdgeIndex e : tree.incident(v))
            if (tree.edge(e).infinite()) below[v] += end_mass[e];
    const auto order = tree.preorder();
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if (tree.parent_edge(*it)) below[tree.parent(*it)] += below[*it];

    FlowTable table;
    table.edge_flow.assign(tree.edge_count(), 0.0);
    for (EdgeIndex e = 0; e < tree.edge_count(); ++e) {
        const Edge& edge = tree.edge(e);
        if (edge.infinite()) table.edge_flow[e] = end_mass[e];
        else if (tree.parent_edge(*edge.head) == e) table.edge_flow[e] = below[*edge.head];
        else table.edge_flow[e] = -below[edge.tail];
    }

    const auto toward = edges_towards_basepoint(tree);
    table.vertex_flow.assign(nv, 0.0);
    table.specific_flow.assign(nv, 0.0);
    // No threshold here: a neutral edge adds nothing anyway, and masses far out
    // on a comb are smaller than any fixed cutoff.
    for (VertexIndex v = 0; v < nv; ++v) {
        for (EdgeIndex e : tree.incident(v)) table.vertex_flow[v] += std::max(table.flow(tree, e, v), 0.0);
        table.specific_flow[v] = table.vertex_flow[v];
        if (toward[v]) table.specific_flow[v] -= std::abs(table.flow(tree, *toward[v], v));
    }
    return table;
}

double realizability_sum(const MetricTree& tree, const FlowTable& flows) {
    double sum = 0.0;
    for (VertexIndex v = 0; v < tree.vertex_count(); ++v) {
        const double d = tree.distance(TreePoint::at_vertex(v), tree.basepoint());
        sum += flows.specific_flow[v] * d * d;
    }
    return sum;
}

D0Result d0_transport(const MetricTree& tree, const BoundaryMeasure& minus, const BoundaryMeasure& plus) {
    require_antipodal(minus, plus);
    const auto a = minus.atoms();
    const auto b = plus.atoms();
    CostMatrix cost(a.size(), b.size());
    std::vector<double> supply;
    std::vector<double> demand;
    for (const auto& x : a) supply.push_back(x.mass);
    for (const auto& y : b) demand.push_back(y.mass);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double d = gromov_product(tree, a[i].end, b[j].end);
            if (std::isinf(d)) throw Error(ErrorKind::DiagonalMass, "an end appears in both measures");
            cost(i, j) = -d * d;
        }
    const auto solution = solve_transportation(supply, demand, cost);
    D0Result result;
    result.value = solution.cost;
    for (const auto& cell : solution.support())
        result.plan.push_back({a[cell.row].end, b[cell.col].end, cell.flow, std::sqrt(-cost(cell.row, cell.col))});
    result.duality_gap = duality_gap(solution, cost);
    return result;
}

FlowCheck check_flows(const MetricTree& tree, const DynamicalPlan& plan, const FlowTable& flows) {
    std::vector<double> forward(tree.edge_count(), 0.0);
    std::vector<double> backward(tree.edge_count(), 0.0);
    std::vector<double> passing(tree.vertex_count(), 0.0);
    std::vector<double> closest(tree.vertex_count(), 0.0);
    for (const auto& atom : plan.atoms()) {
        const auto& g = atom.geodesic;
        const auto locus = g.locus();
        for (std::size_t k = 0; k < locus.size(); ++k) {
            (locus[k].forward ? forward : backward)[locus[k].edge] += atom.mass;
            if (k + 1 < locus.size()) {
                const Edge& e = tree.edge(locus[k].edge);
                passing[locus[k].forward ? *e.head : e.tail] += atom.mass;
            }
        }
        if (g.anchor().on_vertex()) closest[g.anchor().vertex()] += atom.mass;
    }
    FlowCheck check;
    for (EdgeIndex e = 0; e < tree.edge_count(); ++e) {
        const double phi = flows.edge_flow[e];
        check.edge_defect = std::max(check.edge_defect, std::abs(forward[e] - std::max(phi, 0.0)));
        check.edge_defect = std::max(check.edge_defect, std::abs(backward[e] - std::max(-phi, 0.0)));
    }
    for (VertexIndex v = 0; v < tree.vertex_count(); ++v) {
        check.vertex_defect = std::max(check.vertex_defect, std::abs(passing[v] - flows.vertex_flow[v]));
        check.specific_defect = std::max(check.specific_defect, std::abs(closest[v] - flows.specific_flow[v]));
    }
    return check;
}

ConstructedGeodesic construct_geodesic(const MetricTree& tree, const BoundaryMeasure& minus,
                                       const BoundaryMeasure& plus) {
    auto flows = flow_table(tree, minus, plus);
    auto transport = d0_transport(tree, minus, plus);
    std::vector<GeodesicAtom> atoms;
    for (const auto& pair : transport.plan)
        atoms.push_back({geodesic_between_ends(tree, pair.minus, pair.plus), pair.mass});
    DynamicalPlan plan(tree, std::move(atoms), TimeInterval::complete());

    ConstructedGeodesic out{plan, std::move(transport), std::move(flows), {}, 0.0, 0.0, false, false, false};
    out.flow_check = check_flows(tree, out.plan, out.flows);
    out.realizability = realizability_sum(tree, out.flows);
    for (const auto& atom : out.plan.atoms()) {
        const double d = tree.distance(atom.geodesic.anchor(), tree.basepoint());
        out.second_moment += atom.mass * d * d;
    }
    std::vector<EndAtom> backward;
    std::vector<EndAtom> forward;
    for (const auto& atom : out.plan.atoms()) {
        backward.push_back({*atom.geodesic.backward_end(), atom.mass});
        forward.push_back({*atom.geodesic.forward_end(), atom.mass});
    }
    const BoundaryMeasure at_minus(tree, std::move(backward));
    const BoundaryMeasure at_plus(tree, std::move(forward));
    out.ends_match = total_variation(at_minus.unit_cone(), minus.unit_cone()) <= 1e-9 &&
                     total_variation(at_plus.unit_cone(), plus.unit_cone()) <= 1e-9;
    out.antagonist_free = antagonist_pairs(out.plan).empty();
    out.unit_speed = validate_complete_plan(tree, out.plan).valid;
    return out;
}

Comb comb_generator(std::size_t depth, double exponent) {
    if (depth < 2) throw Error(ErrorKind::InvalidMeasure, "a comb needs at least two teeth");
    if (!std::isfinite(exponent)) throw Error(ErrorKind::InvalidMeasure, "mass exponent must be finite");
    TreeSpec spec;
    for (std::size_t n = 1; n <= depth; ++n) {
        const std::string v = "v" + std::to_string(n);
        spec.vertices.push_back(v);
        spec.edges.push_back({"t" + std::to_string(n), {v}, kInfinity});
        if (n < depth) spec.edges.push_back({"b" + std::to_string(n), {v, "v" + std::to_string(n + 1)}, 1.0});
    }
    spec.basepoint = PointSpec{"v1", "", 0.0};
    MetricTree tree(spec);

    std::vector<EndAtom> odd;
    std::vector<EndAtom> even;
    double odd_total = 0.0;
    double even_total = 0.0;
    for (std::size_t n = 1; n <= depth; ++n) {
        const double w = std::pow(static_cast<double>(n), -exponent);
        const TreeEnd end = tree.end_of("t" + std::to_string(n));
        if (n % 2 == 1) {
            odd.push_back({end, w});
            odd_total += w;
        } else {
            even.push_back({end, w});
            even_total += w;
        }
    }
    for (auto& a : odd) a.mass /= odd_total;
    for (auto& a : even) a.mass /= even_total;
    BoundaryMeasure minus(tree, std::move(odd));
    BoundaryMeasure plus(tree, std::move(even));
    return {std::move(tree), std::move(minus), std::move(plus), depth, exponent};
}

RealizabilityReport comb_realizability(const Comb& comb) {
    const auto flows = flow_table(comb.tree, comb.minus, comb.plus);
    RealizabilityReport report;
    // Vertex v<n> has index n - 1 and sits at distance n - 1 from v1.
    double sum = 0.0;
    std::size_t next = 2;
    for (std::size_t n = 1; n <= comb.depth; ++n) {
        const double d = static_cast<double>(n - 1);
        sum += flows.specific_flow[n - 1] * d * d;
        if (n == next) {
            report.partial_sums.push_back({n, sum});
            next *= 2;
        }
    }
    report.value = sum;
    report.depth = report.partial_sums.empty() ? comb.depth : report.partial_sums.back().depth;
    report.verdict = RealizabilityVerdict::Inconclusive;
    const auto& s = report.partial_sums;
    if (s.size() >= 4) {
        const std::size_t k = s.size() - 1;
        bool growing = true;
        for (std::size_t i = k - 2; i <= k; ++i)
            if (!(s[i].sum - s[i - 1].sum > kDivergenceIncrement)) growing = false;
        if (growing) report.verdict = RealizabilityVerdict::Diverges;
        else if (std::abs(s[k].sum - s[k - 3].sum) < kConvergenceSpread) report.verdict = RealizabilityVerdict::Converges;
    }
    return report;
}

ConstructedGeodesic construct_geodesic(const Comb& comb) {
    const auto report = comb_realizability(comb);
    if (report.verdict == RealizabilityVerdict::Diverges)
        throw Error(ErrorKind::NotRealizable,
                    "realizability partial sums diverge up to depth " + std::to_string(report.depth));
    return construct_geodesic(comb.tree, comb.minus, comb.plus);
}

}  // namespace wtree
