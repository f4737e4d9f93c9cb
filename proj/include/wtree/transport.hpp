#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wtree/metric_tree.hpp"
#include "wtree/simplex.hpp"

namespace wtree {

struct Atom {
    TreePoint point;
    double mass = 0.0;
};

/// Finitely supported probability measure on the points of a tree. Atoms at
/// the same point are merged, zero masses dropped, first-occurrence order kept.
class DiscreteMeasure {
public:
    /// Throws InvalidMeasure on negative or non-finite masses, or when the
    /// total differs from 1 by more than 1e-9.
    DiscreteMeasure(const MetricTree& tree, std::vector<Atom> atoms);

    static DiscreteMeasure dirac(const MetricTree& tree, const TreePoint& p) { return {tree, {{p, 1.0}}}; }

    std::span<const Atom> atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    double total_mass() const;
    /// Mass sitting at `p` (0 when p is not an atom).
    double mass_at(const MetricTree& tree, const TreePoint& p) const;

private:
    std::vector<Atom> atoms_;
};

/// Merge atoms at coincident points and drop zero masses, without any
/// normalization check.
std::vector<Atom> merge_atoms(const MetricTree& tree, std::vector<Atom> atoms);

struct PlanEntry {
    TreePoint source;
    TreePoint target;
    double mass = 0.0;
};

struct TransportPlan {
    std::vector<PlanEntry> entries;

    double total_mass() const;
    std::vector<Atom> source_atoms(const MetricTree& tree) const;
    std::vector<Atom> target_atoms(const MetricTree& tree) const;
};

/// Sum of mass * d(source, target)^2.
double quadratic_cost(const MetricTree& tree, const TransportPlan& plan);

struct WassersteinResult {
    double distance = 0.0;
    double cost = 0.0;  // distance^2
    TransportPlan plan;
    /// Dual potentials indexed like the atoms of mu and nu.
    std::vector<double> source_potential;
    std::vector<double> target_potential;
    /// Largest dual-feasibility or complementary-slackness defect.
    double duality_gap = 0.0;
};

/// Exact W2 between two discrete measures with an optimal plan. Plan entries
/// are ordered by (source atom, target atom).
WassersteinResult wasserstein2(const MetricTree& tree, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Result of the cyclical monotonicity check. When `monotone` is false,
/// `cycle` lists plan-entry indices i_0..i_{k-1}: rerouting the source of
/// entry i_a to the target of entry i_{a+1} lowers the cost by `-gain`.
struct MonotonicityCertificate {
    bool monotone = true;
    std::size_t max_cycle = 0;
    std::vector<std::size_t> cycle;
    double gain = 0.0;
};

/// Cycle check on a square matrix with cost(a, b) = c(x_a, y_b) for support
/// pairs (x_a, y_a). A cycle violates monotonicity when its total gain is
/// below -1e-9 * (1 + largest |cost|).
MonotonicityCertificate cyclically_monotone(const CostMatrix& pair_cost, std::size_t max_cycle);

/// Cost d^2 on the support pairs of the plan. max_cycle defaults to
/// min(support size, 8); pass the support size for the full check.
MonotonicityCertificate is_cyclically_monotone(const MetricTree& tree, const TransportPlan& plan,
                                               std::optional<std::size_t> max_cycle = std::nullopt);

}  // namespace wtree
