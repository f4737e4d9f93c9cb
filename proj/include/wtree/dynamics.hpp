#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wtree/geodesic.hpp"
#include "wtree/transport.hpp"

namespace wtree {

struct GeodesicAtom {
    TreeGeodesic geodesic;
    double mass = 0.0;
};

/// Finitely supported probability measure on parametrized geodesics sharing
/// one time interval. Identical geodesics are merged.
class DynamicalPlan {
public:
    /// Throws InvalidMeasure on bad masses and OutOfInterval when an atom's
    /// interval differs from `interval`.
    DynamicalPlan(const MetricTree& tree, std::vector<GeodesicAtom> atoms, const TimeInterval& interval);

    std::span<const GeodesicAtom> atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    const TimeInterval& interval() const { return interval_; }
    /// Root mean square speed.
    double speed() const;

private:
    std::vector<GeodesicAtom> atoms_;
    TimeInterval interval_;
};

DiscreteMeasure pushforward_at(const MetricTree& tree, const DynamicalPlan& plan, double t);

/// Displacement interpolation on [0, 1] of a transport plan. Throws
/// PlanNotOptimal unless the plan passes the full cyclical monotonicity check.
DynamicalPlan interpolate(const MetricTree& tree, const TransportPlan& plan);
DynamicalPlan interpolate(const MetricTree& tree, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct LiftEntry {
    std::size_t first;   // atom of the first plan
    std::size_t second;  // atom of the second plan
    double mass = 0.0;
};

/// Most independent coupling of the atoms of `first` and `second` whose
/// (e_t, e_t) projection is `plan_t`. Throws MarginalMismatch when plan_t
/// does not couple the two time-t pushforwards.
std::vector<LiftEntry> lift(const MetricTree& tree, const DynamicalPlan& first, const DynamicalPlan& second,
                            const TransportPlan& plan_t, double t);

/// (e_t, e_t) image of a coupling of geodesics.
TransportPlan project_lift(const MetricTree& tree, const DynamicalPlan& first, const DynamicalPlan& second,
                           std::span<const LiftEntry> coupling, double t);

struct Antagonism {
    std::size_t first;
    std::size_t second;
    EdgeIndex edge;
};

/// Do the two geodesics run along a common stretch of some edge in opposite
/// directions? Returns the first such edge along `a`.
std::optional<EdgeIndex> antagonist_edge(const TreeGeodesic& a, const TreeGeodesic& b);

/// All antagonist pairs of support geodesics (first < second).
std::vector<Antagonism> antagonist_pairs(const DynamicalPlan& plan);

/// Coupling (e_s, e_t) of a dynamical plan, one entry per atom.
TransportPlan time_coupling(const MetricTree& tree, const DynamicalPlan& plan, double s, double t);

struct DynamicalCertificate {
    bool optimal = true;
    bool antagonist_free = true;
    std::vector<Antagonism> antagonists;
    /// Time pairs whose coupling was checked, and the first failure.
    std::vector<std::pair<double, double>> checked_times;
    std::optional<MonotonicityCertificate> failure;
};

/// Optimality of a dynamical plan. Segment plans are optimal exactly when the
/// coupling of their endpoints is cyclically monotone; ray and complete plans
/// are checked on restrictions to growing windows [0, T] or [-T, T]. The
/// antagonism flags are reported alongside.
DynamicalCertificate is_optimal_dynamical(const MetricTree& tree, const DynamicalPlan& plan);

/// Extends a segment plan on [0, T] issued from a Dirac mass to a ray plan on
/// [0, inf). At a vertex the continuation takes the incident edge with the
/// smallest id. Throws LeafyTree, NotDiracBased.
DynamicalPlan extend_from_dirac(const MetricTree& tree, const DynamicalPlan& segment_plan);

/// Time-t point of the interpolation from the Dirac mass at x to mu.
DiscreteMeasure dirac_interpolation(const MetricTree& tree, const TreePoint& x, const DiscreteMeasure& mu, double t);

/// Metric midpoint of p and q.
TreePoint midpoint(const MetricTree& tree, const TreePoint& p, const TreePoint& q);

struct SupportTest {
    bool supported = true;
    /// Pair (x, g) on the locus; when unsupported, the midpoint inequality is strict for it.
    std::optional<std::pair<TreePoint, TreePoint>> witness;
    double midpoint_distance = 0.0;  // W(x^1/2 mu, midpoint(x, g)) for the witness
    double half_distance = 0.0;      // W(mu, delta_g) / 2 for the witness
    /// Largest |midpoint_distance - half_distance| over the sampled pairs when supported.
    double max_equality_defect = 0.0;
    std::size_t pairs_checked = 0;
};

/// Is mu supported on the locus of the maximal geodesic g? Throws
/// ConstantGeodesic, or InvalidPoint when a finite side of g is not a leaf.
SupportTest supported_on_geodesic_test(const MetricTree& tree, const DiscreteMeasure& mu, const TreeGeodesic& g);

struct CompletePlanCertificate {
    bool valid = true;
    std::vector<std::size_t> non_unit_atoms;
    /// Coupling (e_{-T}, e_T) at T = 1e3 and its monotonicity verdict.
    std::optional<MonotonicityCertificate> witness;
};

/// A complete plan can be a unit W2 geodesic only if every support geodesic
/// has unit speed.
CompletePlanCertificate validate_complete_plan(const MetricTree& tree, const DynamicalPlan& plan);

}  // namespace wtree
