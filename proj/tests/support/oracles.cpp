#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace wtree::testing {

DistanceOracle::DistanceOracle(const MetricTree& tree) : tree_(tree) {
    const std::size_t n = tree.vertex_count();
    table_.assign(n, std::vector<double>(n, kInfinity));
    for (std::size_t v = 0; v < n; ++v) table_[v][v] = 0.0;
    for (const auto& e : tree.edges())
        if (e.head) table_[e.tail][*e.head] = table_[*e.head][e.tail] = e.length;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) table_[i][j] = std::min(table_[i][j], table_[i][k] + table_[k][j]);
}

std::vector<std::pair<VertexIndex, double>> DistanceOracle::exits(const TreePoint& p) const {
    if (p.on_vertex()) return {{p.vertex(), 0.0}};
    const Edge& e = tree_.edge(p.edge());
    std::vector<std::pair<VertexIndex, double>> out{{e.tail, p.offset()}};
    if (e.head) out.emplace_back(*e.head, e.length - p.offset());
    return out;
}

double DistanceOracle::operator()(const TreePoint& p, const TreePoint& q) const {
    double best = kInfinity;
    if (!p.on_vertex() && !q.on_vertex() && p.edge() == q.edge()) best = std::abs(p.offset() - q.offset());
    for (const auto& [u, a] : exits(p))
        for (const auto& [v, b] : exits(q)) best = std::min(best, a + table_[u][v] + b);
    return best;
}

PermutationOptimum permutation_optimum(const std::vector<std::vector<double>>& cost) {
    std::vector<std::size_t> perm(cost.size());
    std::iota(perm.begin(), perm.end(), 0);
    PermutationOptimum best{kInfinity, perm};
    do {
        double sum = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i) sum += cost[i][perm[i]];
        if (sum < best.cost) best = {sum, perm};
    } while (std::next_permutation(perm.begin(), perm.end()));
    best.cost /= double(cost.size());
    return best;
}

namespace {

// Vertices reachable from `start` without using the edges in `blocked`.
std::vector<bool> reachable(const MetricTree& tree, VertexIndex start, const std::vector<EdgeIndex>& blocked) {
    std::vector<bool> seen(tree.vertex_count(), false);
    std::vector<VertexIndex> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
        const VertexIndex v = stack.back();
        stack.pop_back();
        for (EdgeIndex e = 0; e < tree.edge_count(); ++e) {
            const Edge& edge = tree.edge(e);
            if (!edge.head || std::find(blocked.begin(), blocked.end(), e) != blocked.end()) continue;
            VertexIndex w;
            if (edge.tail == v) w = *edge.head;
            else if (*edge.head == v) w = edge.tail;
            else continue;
            if (!seen[w]) {
                seen[w] = true;
                stack.push_back(w);
            }
        }
    }
    return seen;
}

}  // namespace

OracleFlows oracle_flows(const MetricTree& tree, const BoundaryMeasure& minus, const BoundaryMeasure& plus) {
    OracleFlows out;
    const DistanceOracle distance(tree);
    auto net = [&](EdgeIndex ray) { return plus.mass_of(TreeEnd{ray}) - minus.mass_of(TreeEnd{ray}); };
    for (EdgeIndex e = 0; e < tree.edge_count(); ++e) {
        const Edge& edge = tree.edge(e);
        if (!edge.head) {
            out.edge.push_back(net(e));
            continue;
        }
        const auto side = reachable(tree, *edge.head, {e});
        double flow = 0.0;
        for (EdgeIndex r = 0; r < tree.edge_count(); ++r)
            if (tree.edge(r).infinite() && side[tree.edge(r).tail]) flow += net(r);
        out.edge.push_back(flow);
    }
    const TreePoint base = tree.basepoint();
    for (VertexIndex x = 0; x < tree.vertex_count(); ++x) {
        double through = 0.0;
        double toward_base = 0.0;
        const double here = distance(TreePoint::at_vertex(x), base);
        for (EdgeIndex e = 0; e < tree.edge_count(); ++e) {
            const Edge& edge = tree.edge(e);
            double outgoing;
            double step;
            if (edge.tail == x) {
                outgoing = out.edge[e];
                step = 1e-3;
            } else if (edge.head && *edge.head == x) {
                outgoing = -out.edge[e];
                step = edge.length - 1e-3;
            } else {
                continue;
            }
            through += std::max(outgoing, 0.0);
            if (distance(TreePoint::inside_edge(e, step), base) < here) toward_base = outgoing;
        }
        out.vertex.push_back(through);
        out.specific.push_back(through - std::abs(toward_base));
    }
    return out;
}

double perpendicular_sum(const MetricTree& tree, const VertexFunction& h, const Flag& flag) {
    const auto side = reachable(tree, flag.vertex, {flag.first, flag.second});
    double sum = 0.0;
    for (VertexIndex v = 0; v < tree.vertex_count(); ++v)
        if (side[v]) sum += h.values[v];
    return sum;
}

double oracle_total_variation(const ConeMeasure& a, const ConeMeasure& b) {
    // Key -1 is the apex.
    std::map<long, double> diff;
    for (const auto& x : a.atoms()) diff[x.point.end ? long(x.point.end->edge) : -1L] += x.mass;
    for (const auto& y : b.atoms()) diff[y.point.end ? long(y.point.end->edge) : -1L] -= y.mass;
    double sum = 0.0;
    for (const auto& [key, d] : diff) sum += std::abs(d);
    return 0.5 * sum;
}

}  // namespace wtree::testing
