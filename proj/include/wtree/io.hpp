#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "wtree/boundary.hpp"
#include "wtree/dynamics.hpp"
#include "wtree/ends.hpp"
#include "wtree/radon.hpp"
#include "wtree/transport.hpp"

namespace wtree::io {

using Json = nlohmann::ordered_json;

/// Decimal string with 12 significant digits; "inf" / "-inf" for infinities.
std::string format_number(double x);
/// Accepts JSON numbers and decimal strings, including "inf".
double parse_number(const Json& value);

/// Parses an argument that is either inline JSON or a path to a JSON file.
Json load_json(std::string_view argument);

TreeSpec parse_tree_spec(const Json& j);
Json tree_to_json(const MetricTree& tree);

TreePoint parse_point(const MetricTree& tree, const Json& j);
Json point_to_json(const MetricTree& tree, const TreePoint& p);
TreeEnd parse_end(const MetricTree& tree, const Json& j);

DiscreteMeasure parse_measure(const MetricTree& tree, const Json& j);
Json measure_to_json(const MetricTree& tree, std::span<const Atom> atoms);

TransportPlan parse_plan(const MetricTree& tree, const Json& j);
Json plan_to_json(const MetricTree& tree, const TransportPlan& plan);

TimeInterval parse_interval(const Json& j);
Json interval_to_json(const TimeInterval& interval);
TreeGeodesic parse_geodesic(const MetricTree& tree, const Json& j);
Json geodesic_to_json(const MetricTree& tree, const TreeGeodesic& g);
DynamicalPlan parse_dynamical_plan(const MetricTree& tree, const Json& j);
Json dynamical_plan_to_json(const MetricTree& tree, const DynamicalPlan& plan);

ConeMeasure parse_cone_measure(const MetricTree& tree, const Json& j);
Json cone_measure_to_json(const MetricTree& tree, const ConeMeasure& nu);

BoundaryMeasure parse_boundary_measure(const MetricTree& tree, const Json& j);
Json boundary_measure_to_json(const MetricTree& tree, const BoundaryMeasure& nu);

Json certificate_to_json(const MonotonicityCertificate& cert);
Json validation_to_json(const ValidationReport& report);
Json flow_table_to_json(const MetricTree& tree, const FlowTable& flows);
Json realizability_to_json(const RealizabilityReport& report);
std::string_view to_string(RealizabilityVerdict verdict);

VertexFunction parse_vertex_function(const MetricTree& tree, const Json& j);
Json vertex_function_to_json(const MetricTree& tree, const VertexFunction& h);
RadonData parse_radon_data(const MetricTree& tree, const Json& j);
Json radon_data_to_json(const MetricTree& tree, const RadonData& data);

/// CSV with columns t, ratio, target, |ratio-target|.
std::string asymptotic_csv(const AsymptoticReport& report);
Json asymptotic_to_json(const AsymptoticReport& report);

}  // namespace wtree::io
