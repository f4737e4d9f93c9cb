#pragma once

#include <compare>
#include <map>
#include <vector>

#include "wtree/dynamics.hpp"

namespace wtree {

/// A vertex with an unordered pair of distinct incident edges, stored with
/// first < second.
struct Flag {
    VertexIndex vertex;
    EdgeIndex first;
    EdgeIndex second;

    static Flag make(VertexIndex x, EdgeIndex e, EdgeIndex f) { return e < f ? Flag{x, e, f} : Flag{x, f, e}; }
    friend auto operator<=>(const Flag&, const Flag&) = default;
};

/// Every flag of the tree, ordered by vertex then edge pair.
std::vector<Flag> all_flags(const MetricTree& tree);

/// Real values on the vertices, indexed by vertex.
struct VertexFunction {
    std::vector<double> values;

    double total() const;
};

using RadonData = std::map<Flag, double>;

/// Throws MalformedForRadon when the tree has leaves or valency-2 vertices.
void require_radon_ready(const MetricTree& tree);

/// Projection of mu onto the locus of a complete geodesic.
DiscreteMeasure radon_measure(const MetricTree& tree, const DiscreteMeasure& mu, const TreeGeodesic& g);

/// Sum of h over the perpendicular of each flag.
RadonData combinatorial_radon(const MetricTree& tree, const VertexFunction& h);

/// Recovers h from its transform and its total. Throws MalformedForRadon
/// when a flag is missing, InconsistentData when the result does not
/// transform back to the data within 1e-7.
VertexFunction radon_invert(const MetricTree& tree, const RadonData& data, double total);

/// Complete geodesic through a flag, continued past it by smallest edge ids.
TreeGeodesic flag_geodesic(const MetricTree& tree, const Flag& flag);

struct RadonRoundtrip {
    std::vector<Atom> edge_part;    // recovered from projections onto edge-extending geodesics
    VertexFunction vertex_part;     // recovered by inversion
    std::vector<Atom> reconstruction;
    double max_error = 0.0;         // largest atom mass discrepancy against mu
    bool exact = false;
};

/// Rebuilds mu from projections alone: the part inside edges from one
/// geodesic per edge, the vertex atoms by inverting the combinatorial
/// transform of what projects onto each flag vertex.
RadonRoundtrip measure_radon_roundtrip(const MetricTree& tree, const DiscreteMeasure& mu);

}  // namespace wtree
