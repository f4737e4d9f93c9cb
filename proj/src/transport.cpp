#include "wtree/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wtree {

std::vector<Atom> merge_atoms(const MetricTree& tree, std::vector<Atom> atoms) {
    std::vector<Atom> out;
    for (const auto& atom : atoms) {
        if (!std::isfinite(atom.mass) || atom.mass < 0.0)
            throw Error(ErrorKind::InvalidMeasure, "masses must be finite and nonnegative");
        tree.check_point(atom.point);
        if (atom.mass == 0.0) continue;
        auto it = std::find_if(out.begin(), out.end(), [&](const Atom& a) { return tree.same_point(a.point, atom.point); });
        if (it == out.end()) out.push_back(atom);
        else it->mass += atom.mass;
    }
    return out;
}

DiscreteMeasure::DiscreteMeasure(const MetricTree& tree, std::vector<Atom> atoms)
    : atoms_(merge_atoms(tree, std::move(atoms))) {
    if (atoms_.empty()) throw Error(ErrorKind::InvalidMeasure, "measure has no mass");
    if (std::abs(total_mass() - 1.0) > 1e-9) throw Error(ErrorKind::InvalidMeasure, "masses must sum to 1");
}

double DiscreteMeasure::total_mass() const {
    return std::accumulate(atoms_.begin(), atoms_.end(), 0.0, [](double s, const Atom& a) { return s + a.mass; });
}

double DiscreteMeasure::mass_at(const MetricTree& tree, const TreePoint& p) const {
    for (const auto& atom : atoms_)
        if (tree.same_point(atom.point, p)) return atom.mass;
    return 0.0;
}

double TransportPlan::total_mass() const {
    return std::accumulate(entries.begin(), entries.end(), 0.0,
                           [](double s, const PlanEntry& e) { return s + e.mass; });
}

std::vector<Atom> TransportPlan::source_atoms(const MetricTree& tree) const {
    std::vector<Atom> atoms;
    for (const auto& e : entries) atoms.push_back({e.source, e.mass});
    return merge_atoms(tree, std::move(atoms));
}

std::vector<Atom> TransportPlan::target_atoms(const MetricTree& tree) const {
    std::vector<Atom> atoms;
    for (const auto& e : entries) atoms.push_back({e.target, e.mass});
    return merge_atoms(tree, std::move(atoms));
}

double quadratic_cost(const MetricTree& tree, const TransportPlan& plan) {
    double cost = 0.0;
    for (const auto& e : plan.entries) {
        const double d = tree.distance(e.source, e.target);
        cost += e.mass * d * d;
    }
    return cost;
}

WassersteinResult wasserstein2(const MetricTree& tree, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    const auto sources = mu.atoms();
    const auto targets = nu.atoms();
    CostMatrix cost(sources.size(), targets.size());
    std::vector<double> supply;
    std::vector<double> demand;
    for (const auto& a : sources) supply.push_back(a.mass);
    for (const auto& b : targets) demand.push_back(b.mass);
    for (std::size_t i = 0; i < sources.size(); ++i)
        for (std::size_t j = 0; j < targets.size(); ++j) {
            const double d = tree.distance(sources[i].point, targets[j].point);
            cost(i, j) = d * d;
        }
    const auto solution = solve_transportation(supply, demand, cost);

    WassersteinResult result;
    for (const auto& cell : solution.support())
        result.plan.entries.push_back({sources[cell.row].point, targets[cell.col].point, cell.flow});
    result.cost = std::max(0.0, solution.cost);
    result.distance = std::sqrt(result.cost);
    result.source_potential = solution.row_potential;
    result.target_potential = solution.col_potential;
    result.duality_gap = duality_gap(solution, cost);
    return result;
}

namespace {

// Splits a closed walk (first == last) into simple cycles.
std::vector<std::vector<std::size_t>> simple_cycles(const std::vector<std::size_t>& walk) {
    std::vector<std::vector<std::size_t>> cycles;
    std::vector<std::size_t> stack;
    for (std::size_t node : walk) {
        auto it = std::find(stack.begin(), stack.end(), node);
        if (it != stack.end()) {
            cycles.emplace_back(it, stack.end());
            stack.erase(it, stack.end());
        }
        stack.push_back(node);
    }
    return cycles;
}

}  // namespace

MonotonicityCertificate cyclically_monotone(const CostMatrix& pair_cost, std::size_t max_cycle) {
    const std::size_t n = pair_cost.rows();
    MonotonicityCertificate cert;
    cert.max_cycle = std::min(max_cycle, n);
    if (cert.max_cycle < 2) return cert;

    const double tolerance = 1e-9 * (1.0 + pair_cost.scale());
    auto weight = [&](std::size_t a, std::size_t b) { return pair_cost(a, b) - pair_cost(a, a); };
    auto cycle_gain = [&](const std::vector<std::size_t>& cycle) {
        double g = 0.0;
        for (std::size_t k = 0; k < cycle.size(); ++k) g += weight(cycle[k], cycle[(k + 1) % cycle.size()]);
        return g;
    };

    // Cheapest closed walks of each length through each start; a negative one
    // contains a negative simple cycle no longer than itself.
    const std::size_t len = cert.max_cycle;
    std::vector<double> best((len + 1) * n);
    std::vector<std::size_t> pred((len + 1) * n);
    for (std::size_t s = 0; s < n; ++s) {
        std::fill(best.begin(), best.end(), kInfinity);
        best[s] = 0.0;
        for (std::size_t k = 1; k <= len; ++k) {
            for (std::size_t v = 0; v < n; ++v) {
                double& slot = best[k * n + v];
                for (std::size_t u = 0; u < n; ++u) {
                    if (u == v || std::isinf(best[(k - 1) * n + u])) continue;
                    const double candidate = best[(k - 1) * n + u] + weight(u, v);
                    if (candidate < slot) {
                        slot = candidate;
                        pred[k * n + v] = u;
                    }
                }
            }
            if (k < 2 || !(best[k * n + s] < -tolerance)) continue;
            std::vector<std::size_t> walk{s};
            for (std::size_t step = k, v = s; step > 0; --step) {
                v = pred[step * n + v];
                walk.push_back(v);
            }
            std::reverse(walk.begin(), walk.end());
            for (auto& cycle : simple_cycles(walk)) {
                const double g = cycle_gain(cycle);
                if (g < -tolerance && g < cert.gain) {
                    cert.monotone = false;
                    cert.gain = g;
                    cert.cycle = std::move(cycle);
                }
            }
        }
    }
    return cert;
}

MonotonicityCertificate is_cyclically_monotone(const MetricTree& tree, const TransportPlan& plan,
                                               std::optional<std::size_t> max_cycle) {
    const std::size_t n = plan.entries.size();
    CostMatrix cost(n, n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            const double d = tree.distance(plan.entries[a].source, plan.entries[b].target);
            cost(a, b) = d * d;
        }
    return cyclically_monotone(cost, max_cycle.value_or(std::min<std::size_t>(n, 8)));
}

}  // namespace wtree
