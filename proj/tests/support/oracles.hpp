#pragma once

#include <vector>

#include "wtree/ends.hpp"
#include "wtree/radon.hpp"

// Brute-force references that share nothing with the library beyond the raw
// edge list of a tree.
namespace wtree::testing {

/// All-pairs vertex distances by Floyd-Warshall; points reach vertices through
/// the ends of their edge.
class DistanceOracle {
public:
    explicit DistanceOracle(const MetricTree& tree);
    double operator()(const TreePoint& p, const TreePoint& q) const;
    double vertices(VertexIndex u, VertexIndex v) const { return table_[u][v]; }

private:
    std::vector<std::pair<VertexIndex, double>> exits(const TreePoint& p) const;

    const MetricTree& tree_;
    std::vector<std::vector<double>> table_;
};

struct PermutationOptimum {
    double cost = 0.0;  // (1/n) sum_i cost[i][perm[i]]
    std::vector<std::size_t> perm;
};

/// Best assignment by enumerating all permutations.
PermutationOptimum permutation_optimum(const std::vector<std::vector<double>>& cost);

struct OracleFlows {
    std::vector<double> edge;      // nu_+ - nu_- beyond the head, for tail -> head
    std::vector<double> vertex;
    std::vector<double> specific;
};

/// Flows by enumerating, for each edge, the ends behind its head.
OracleFlows oracle_flows(const MetricTree& tree, const BoundaryMeasure& minus, const BoundaryMeasure& plus);

/// Sum of h over the vertices reachable from x without crossing e or f.
double perpendicular_sum(const MetricTree& tree, const VertexFunction& h, const Flag& flag);

/// Total variation 0.5 * sum |a - b| over ends, the apex as its own point.
double oracle_total_variation(const ConeMeasure& a, const ConeMeasure& b);

}  // namespace wtree::testing
