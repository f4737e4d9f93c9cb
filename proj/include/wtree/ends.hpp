#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wtree/boundary.hpp"

namespace wtree {

struct EndAtom {
    TreeEnd end;
    double mass = 0.0;
};

/// Probability measure on the ends of a tree (the unit-speed slice of the cone).
class BoundaryMeasure {
public:
    BoundaryMeasure(const MetricTree& tree, std::vector<EndAtom> atoms);

    std::span<const EndAtom> atoms() const { return atoms_; }
    double mass_of(TreeEnd end) const;
    ConeMeasure unit_cone() const;

private:
    std::vector<EndAtom> atoms_;
};

struct AntipodalReport {
    /// For finitely supported measures antipodality and uniform antipodality
    /// both reduce to disjoint supports.
    bool antipodal = true;
    std::vector<TreeEnd> shared_ends;
};

AntipodalReport is_antipodal(const BoundaryMeasure& minus, const BoundaryMeasure& plus);

enum class FlowSign { Negative, Neutral, Positive };

/// Flow of nu = nu_plus - nu_minus through oriented edges and vertices.
struct FlowTable {
    /// phi(tail -> head) per edge; for an infinite edge, towards its end.
    std::vector<double> edge_flow;
    /// phi(x) and the specific flow phi0(x) per vertex.
    std::vector<double> vertex_flow;
    std::vector<double> specific_flow;

    /// Flow through `e` leaving vertex `from`.
    double flow(const MetricTree& tree, EdgeIndex e, VertexIndex from) const;
    FlowSign sign(const MetricTree& tree, EdgeIndex e, VertexIndex from) const;
};

/// Flows below this magnitude are labelled neutral.
inline constexpr double kNeutralFlow = 1e-12;

FlowTable flow_table(const MetricTree& tree, const BoundaryMeasure& minus, const BoundaryMeasure& plus);

/// Sum over vertices of phi0(x) d(x, x0)^2.
double realizability_sum(const MetricTree& tree, const FlowTable& flows);

struct D0Result {
    double value = 0.0;  // minimum of the integral of -D0^2
    struct Pair {
        TreeEnd minus;
        TreeEnd plus;
        double mass;
        double gromov;
    };
    std::vector<Pair> plan;
    double duality_gap = 0.0;
};

/// Optimal transport between the two boundary measures for the cost -D0^2.
/// Throws NotAntipodal when the supports meet.
D0Result d0_transport(const MetricTree& tree, const BoundaryMeasure& minus, const BoundaryMeasure& plus);

/// Traversal masses of a complete plan compared with the flows.
struct FlowCheck {
    double edge_defect = 0.0;      // max |mu(xy) - max(phi(xy), 0)|
    double vertex_defect = 0.0;    // max |mu(x) - phi(x)|
    double specific_defect = 0.0;  // max |mu0(x) - phi0(x)|
};

FlowCheck check_flows(const MetricTree& tree, const DynamicalPlan& plan, const FlowTable& flows);

struct ConstructedGeodesic {
    DynamicalPlan plan;
    D0Result transport;
    FlowTable flows;
    FlowCheck flow_check;
    double realizability = 0.0;
    double second_moment = 0.0;  // integral of d(x, x0)^2 against the time-0 measure
    bool ends_match = false;
    bool antagonist_free = false;
    bool unit_speed = false;
};

/// Complete unit W2 geodesic with ends nu_minus at -inf and nu_plus at +inf:
/// each pair of the -D0^2 optimal plan is joined by the unit geodesic whose
/// time 0 is closest to the base point.
ConstructedGeodesic construct_geodesic(const MetricTree& tree, const BoundaryMeasure& minus,
                                       const BoundaryMeasure& plus);

struct Comb {
    MetricTree tree;
    BoundaryMeasure minus;
    BoundaryMeasure plus;
    std::size_t depth;
    double exponent;
};

/// Base path v1 - ... - v_depth of unit edges, an infinite tooth t<n> at each
/// v<n>, base point v1. nu_minus sits on odd teeth and nu_plus on even teeth,
/// each with mass proportional to n^-exponent. Needs depth >= 2.
Comb comb_generator(std::size_t depth, double exponent);

enum class RealizabilityVerdict { Finite, Converges, Diverges, Inconclusive };

struct PartialSum {
    std::size_t depth;
    double sum;
};

struct RealizabilityReport {
    double value = 0.0;
    std::vector<PartialSum> partial_sums;
    RealizabilityVerdict verdict = RealizabilityVerdict::Finite;
    std::size_t depth = 0;
};

/// Growth per doubling above which the comb series is declared divergent.
inline constexpr double kDivergenceIncrement = 0.25;
/// Spread over the last three doublings below which it is declared convergent.
inline constexpr double kConvergenceSpread = 1e-3;

/// Partial sums of the realizability series over v1..v_n for n = 2, 4, 8, ...
/// up to the comb depth, with a verdict from the last three doublings.
RealizabilityReport comb_realizability(const Comb& comb);

/// The truncated comb is a finite tree and always carries a geodesic; throws
/// NotRealizable when the partial sums say the untruncated comb does not.
ConstructedGeodesic construct_geodesic(const Comb& comb);

}  // namespace wtree
