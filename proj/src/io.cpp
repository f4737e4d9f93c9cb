#include "wtree/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wtree::io {

namespace {

[[noreturn]] void fail(const std::string& message) { throw Error(ErrorKind::ParseError, message); }

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) fail(std::string("missing field '") + key + "'");
    return j.at(key);
}

std::string text(const Json& j, const char* key) {
    const Json& v = field(j, key);
    if (!v.is_string()) fail(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

const Json& atom_list(const Json& j) {
    if (j.is_array()) return j;
    const Json& atoms = field(j, "atoms");
    if (!atoms.is_array()) fail("'atoms' must be an array");
    return atoms;
}

std::string_view sign_name(FlowSign sign) {
    switch (sign) {
        case FlowSign::Positive: return "positive";
        case FlowSign::Neutral: return "neutral";
        case FlowSign::Negative: return "negative";
    }
    return "neutral";
}

}  // namespace

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return "0";
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.12g", x);
    std::string s(buffer);
    return s == "-0" ? "0" : s;
}

double parse_number(const Json& value) {
    if (value.is_number()) return value.get<double>();
    if (!value.is_string()) fail("expected a number or a decimal string");
    std::string s = value.get<std::string>();
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "inf" || lower == "+inf" || lower == "infinity" || lower == "+infinity") return kInfinity;
    if (lower == "-inf" || lower == "-infinity") return -kInfinity;
    const char* begin = s.data();
    if (!s.empty() && s.front() == '+') ++begin;
    double x = 0.0;
    const auto [end, ec] = std::from_chars(begin, s.data() + s.size(), x);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty()) fail("not a decimal number: '" + s + "'");
    return x;
}

Json load_json(std::string_view argument) {
    const auto first = argument.find_first_not_of(" \t\r\n");
    try {
        if (first != std::string_view::npos && (argument[first] == '{' || argument[first] == '['))
            return Json::parse(argument);
        std::ifstream in{std::string(argument)};
        if (!in) fail("cannot open '" + std::string(argument) + "'");
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        fail(std::string("invalid JSON: ") + e.what());
    }
}

namespace {

PointSpec parse_point_spec(const Json& j) {
    PointSpec spec;
    if (j.is_string()) {
        spec.vertex = j.get<std::string>();
        return spec;
    }
    if (j.contains("edge")) {
        spec.edge = text(j, "edge");
        spec.offset = parse_number(field(j, "offset"));
    } else {
        spec.vertex = text(j, "vertex");
    }
    return spec;
}

}  // namespace

TreeSpec parse_tree_spec(const Json& j) {
    TreeSpec spec;
    const Json& vertices = field(j, "vertices");
    if (!vertices.is_array()) fail("'vertices' must be an array");
    for (const auto& v : vertices) {
        if (!v.is_string()) fail("vertex ids must be strings");
        spec.vertices.push_back(v.get<std::string>());
    }
    const Json& edges = field(j, "edges");
    if (!edges.is_array()) fail("'edges' must be an array");
    for (const auto& e : edges) {
        EdgeSpec edge;
        edge.id = text(e, "id");
        const Json& ends = field(e, "ends");
        if (!ends.is_array()) fail("'ends' must be an array");
        for (const auto& v : ends) {
            if (!v.is_string()) fail("edge ends must be vertex ids");
            edge.ends.push_back(v.get<std::string>());
        }
        edge.length = parse_number(field(e, "length"));
        spec.edges.push_back(std::move(edge));
    }
    if (j.contains("basepoint")) spec.basepoint = parse_point_spec(j.at("basepoint"));
    return spec;
}

Json tree_to_json(const MetricTree& tree) {
    Json j;
    j["vertices"] = Json::array();
    for (VertexIndex v = 0; v < tree.vertex_count(); ++v) j["vertices"].push_back(tree.vertex_id(v));
    j["edges"] = Json::array();
    for (const auto& e : tree.edges()) {
        Json ends = Json::array({tree.vertex_id(e.tail)});
        if (e.head) ends.push_back(tree.vertex_id(*e.head));
        j["edges"].push_back({{"id", e.id}, {"ends", ends}, {"length", format_number(e.length)}});
    }
    j["basepoint"] = point_to_json(tree, tree.basepoint());
    return j;
}

TreePoint parse_point(const MetricTree& tree, const Json& j) { return tree.resolve(parse_point_spec(j)); }

Json point_to_json(const MetricTree& tree, const TreePoint& p) {
    if (p.on_vertex()) return {{"vertex", tree.vertex_id(p.vertex())}};
    return {{"edge", tree.edge(p.edge()).id}, {"offset", format_number(p.offset())}};
}

TreeEnd parse_end(const MetricTree& tree, const Json& j) {
    if (j.is_string()) return tree.end_of(j.get<std::string>());
    return tree.end_of(text(j, "end"));
}

DiscreteMeasure parse_measure(const MetricTree& tree, const Json& j) {
    std::vector<Atom> atoms;
    for (const auto& a : atom_list(j)) atoms.push_back({parse_point(tree, field(a, "point")), parse_number(field(a, "mass"))});
    return {tree, std::move(atoms)};
}

Json measure_to_json(const MetricTree& tree, std::span<const Atom> atoms) {
    Json list = Json::array();
    for (const auto& a : atoms) list.push_back({{"point", point_to_json(tree, a.point)}, {"mass", format_number(a.mass)}});
    return {{"atoms", list}};
}

TransportPlan parse_plan(const MetricTree& tree, const Json& j) {
    const Json& entries = j.is_array() ? j : field(j, "entries");
    if (!entries.is_array()) fail("plan entries must be an array");
    TransportPlan plan;
    for (const auto& e : entries)
        plan.entries.push_back({parse_point(tree, field(e, "source")), parse_point(tree, field(e, "target")),
                                parse_number(field(e, "mass"))});
    return plan;
}

Json plan_to_json(const MetricTree& tree, const TransportPlan& plan) {
    Json list = Json::array();
    for (const auto& e : plan.entries)
        list.push_back({{"source", point_to_json(tree, e.source)},
                        {"target", point_to_json(tree, e.target)},
                        {"mass", format_number(e.mass)}});
    return list;
}

TimeInterval parse_interval(const Json& j) {
    const std::string kind = j.is_string() ? j.get<std::string>() : text(j, "kind");
    if (kind == "segment") return TimeInterval::segment(parse_number(field(j, "start")), parse_number(field(j, "finish")));
    if (kind == "ray") return TimeInterval::ray();
    if (kind == "complete") return TimeInterval::complete();
    fail("interval kind must be segment, ray or complete");
}

Json interval_to_json(const TimeInterval& interval) {
    switch (interval.kind) {
        case IntervalKind::Segment:
            return {{"kind", "segment"}, {"start", format_number(interval.start)}, {"finish", format_number(interval.finish)}};
        case IntervalKind::Ray: return {{"kind", "ray"}};
        case IntervalKind::Complete: return {{"kind", "complete"}};
    }
    return {};
}

namespace {

LocusSide parse_side(const MetricTree& tree, const Json& j) {
    if (j.is_object() && j.contains("end")) return parse_end(tree, j);
    return parse_point(tree, j);
}

Json side_to_json(const MetricTree& tree, const LocusSide& side) {
    if (const auto* end = std::get_if<TreeEnd>(&side)) return {{"end", tree.edge(end->edge).id}};
    return point_to_json(tree, std::get<TreePoint>(side));
}

TreeGeodesic parse_geodesic_in(const MetricTree& tree, const Json& j, const std::optional<TimeInterval>& inherited) {
    const TimeInterval interval = j.contains("interval") ? parse_interval(j.at("interval"))
                                  : inherited             ? *inherited
                                                          : (fail("geodesic needs an interval"), TimeInterval{});
    const LocusSide from = parse_side(tree, field(j, "from"));
    const LocusSide to = parse_side(tree, field(j, "to"));
    if (j.contains("anchor")) {
        const TreePoint anchor = parse_point(tree, j.at("anchor"));
        const double anchor_time = j.contains("anchor_time") ? parse_number(j.at("anchor_time")) : 0.0;
        return make_geodesic(tree, from, to, parse_number(field(j, "speed")), interval, anchor, anchor_time);
    }
    // Without an anchor: segments run from `from` to `to` over the interval,
    // rays leave `from` at time 0, complete geodesics sit closest to the base point at time 0.
    switch (interval.kind) {
        case IntervalKind::Segment: {
            const auto* p = std::get_if<TreePoint>(&from);
            const auto* q = std::get_if<TreePoint>(&to);
            if (!p || !q) fail("segment geodesics join two points");
            return geodesic_segment(tree, *p, *q, interval.start, interval.finish);
        }
        case IntervalKind::Ray: {
            const auto* p = std::get_if<TreePoint>(&from);
            if (!p) fail("rays start at a point");
            const double speed = j.contains("speed") ? parse_number(j.at("speed")) : 1.0;
            if (const auto* end = std::get_if<TreeEnd>(&to)) return ray_to_end(tree, *p, *end, speed);
            if (speed != 0.0) fail("a moving ray must head to an end");
            return make_geodesic(tree, *p, *p, 0.0, interval, *p, 0.0);
        }
        case IntervalKind::Complete: {
            const auto* a = std::get_if<TreeEnd>(&from);
            const auto* b = std::get_if<TreeEnd>(&to);
            if (!a || !b) fail("complete geodesics join two ends");
            const double speed = j.contains("speed") ? parse_number(j.at("speed")) : 1.0;
            const auto unit = geodesic_between_ends(tree, *a, *b);
            if (speed == 1.0) return unit;
            return make_geodesic(tree, from, to, speed, interval, unit.anchor(), 0.0);
        }
    }
    fail("unknown interval");
}

}  // namespace

TreeGeodesic parse_geodesic(const MetricTree& tree, const Json& j) { return parse_geodesic_in(tree, j, std::nullopt); }

Json geodesic_to_json(const MetricTree& tree, const TreeGeodesic& g) {
    Json locus = Json::array();
    for (const auto& step : g.locus())
        locus.push_back({{"edge", tree.edge(step.edge).id}, {"direction", step.forward ? "forward" : "backward"}});
    return {{"from", side_to_json(tree, g.from())},
            {"to", side_to_json(tree, g.to())},
            {"speed", format_number(g.speed())},
            {"interval", interval_to_json(g.interval())},
            {"anchor", point_to_json(tree, g.anchor())},
            {"anchor_time", format_number(g.anchor_time())},
            {"locus", locus}};
}

DynamicalPlan parse_dynamical_plan(const MetricTree& tree, const Json& j) {
    const TimeInterval interval = parse_interval(field(j, "interval"));
    std::vector<GeodesicAtom> atoms;
    for (const auto& a : atom_list(j))
        atoms.push_back({parse_geodesic_in(tree, field(a, "geodesic"), interval), parse_number(field(a, "mass"))});
    return {tree, std::move(atoms), interval};
}

Json dynamical_plan_to_json(const MetricTree& tree, const DynamicalPlan& plan) {
    Json atoms = Json::array();
    for (const auto& a : plan.atoms())
        atoms.push_back({{"geodesic", geodesic_to_json(tree, a.geodesic)}, {"mass", format_number(a.mass)}});
    return {{"interval", interval_to_json(plan.interval())}, {"atoms", atoms}};
}

ConeMeasure parse_cone_measure(const MetricTree& tree, const Json& j) {
    std::vector<ConeAtom> atoms;
    for (const auto& a : atom_list(j)) {
        const double mass = parse_number(field(a, "mass"));
        if (a.contains("apex") && a.at("apex").is_boolean() && a.at("apex").get<bool>()) {
            atoms.push_back({ConePoint::apex(), mass});
            continue;
        }
        atoms.push_back({ConePoint{parse_end(tree, a), parse_number(field(a, "speed"))}, mass});
    }
    return ConeMeasure(std::move(atoms));
}

Json cone_measure_to_json(const MetricTree& tree, const ConeMeasure& nu) {
    Json atoms = Json::array();
    for (const auto& a : nu.atoms()) {
        if (a.point.is_apex()) atoms.push_back({{"apex", true}, {"speed", "0"}, {"mass", format_number(a.mass)}});
        else
            atoms.push_back({{"end", tree.edge(a.point.end->edge).id},
                             {"speed", format_number(a.point.speed)},
                             {"mass", format_number(a.mass)}});
    }
    return {{"atoms", atoms}};
}

BoundaryMeasure parse_boundary_measure(const MetricTree& tree, const Json& j) {
    std::vector<EndAtom> atoms;
    for (const auto& a : atom_list(j)) atoms.push_back({parse_end(tree, a), parse_number(field(a, "mass"))});
    return {tree, std::move(atoms)};
}

Json boundary_measure_to_json(const MetricTree& tree, const BoundaryMeasure& nu) {
    Json atoms = Json::array();
    for (const auto& a : nu.atoms()) atoms.push_back({{"end", tree.edge(a.end.edge).id}, {"mass", format_number(a.mass)}});
    return {{"atoms", atoms}};
}

Json certificate_to_json(const MonotonicityCertificate& cert) {
    return {{"monotone", cert.monotone},
            {"max_cycle", cert.max_cycle},
            {"cycle", cert.cycle},
            {"gain", format_number(cert.gain)}};
}

Json validation_to_json(const ValidationReport& report) {
    return {{"valid", report.valid},
            {"problems", report.problems},
            {"connected", report.connected},
            {"acyclic", report.acyclic},
            {"leaves", report.leaves},
            {"valency_two", report.valency_two},
            {"infinite_edges", report.infinite_edges},
            {"radon_ready", report.radon_ready()}};
}

Json flow_table_to_json(const MetricTree& tree, const FlowTable& flows) {
    Json edges = Json::array();
    for (EdgeIndex e = 0; e < tree.edge_count(); ++e) {
        const Edge& edge = tree.edge(e);
        edges.push_back({{"id", edge.id},
                         {"from", tree.vertex_id(edge.tail)},
                         {"to", edge.head ? Json(tree.vertex_id(*edge.head)) : Json({{"end", edge.id}})},
                         {"flow", format_number(flows.edge_flow[e])},
                         {"sign", sign_name(flows.sign(tree, e, edge.tail))}});
    }
    Json vertices = Json::array();
    for (VertexIndex v = 0; v < tree.vertex_count(); ++v)
        vertices.push_back({{"id", tree.vertex_id(v)},
                            {"flow", format_number(flows.vertex_flow[v])},
                            {"specific_flow", format_number(flows.specific_flow[v])}});
    return {{"edges", edges}, {"vertices", vertices}};
}

std::string_view to_string(RealizabilityVerdict verdict) {
    switch (verdict) {
        case RealizabilityVerdict::Finite: return "FINITE";
        case RealizabilityVerdict::Converges: return "CONVERGES";
        case RealizabilityVerdict::Diverges: return "DIVERGES";
        case RealizabilityVerdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

Json realizability_to_json(const RealizabilityReport& report) {
    Json j{{"value", format_number(report.value)}};
    if (!report.partial_sums.empty()) {
        Json sums = Json::array();
        for (const auto& s : report.partial_sums) sums.push_back({{"depth", s.depth}, {"sum", format_number(s.sum)}});
        j["partial_sums"] = sums;
    }
    j["verdict"] = to_string(report.verdict);
    j["depth"] = report.depth;
    return j;
}

VertexFunction parse_vertex_function(const MetricTree& tree, const Json& j) {
    if (!j.is_object()) fail("vertex function must map vertex ids to values");
    VertexFunction h;
    h.values.assign(tree.vertex_count(), 0.0);
    for (const auto& [id, value] : j.items()) h.values[tree.vertex_index(id)] = parse_number(value);
    return h;
}

Json vertex_function_to_json(const MetricTree& tree, const VertexFunction& h) {
    Json j = Json::object();
    for (VertexIndex v = 0; v < tree.vertex_count(); ++v) j[tree.vertex_id(v)] = format_number(h.values[v]);
    return j;
}

RadonData parse_radon_data(const MetricTree& tree, const Json& j) {
    const Json& flags = j.is_array() ? j : field(j, "flags");
    if (!flags.is_array()) fail("Radon data must be an array of flags");
    RadonData data;
    for (const auto& f : flags) {
        const VertexIndex x = tree.vertex_index(text(f, "vertex"));
        const Json& edges = field(f, "edges");
        if (!edges.is_array() || edges.size() != 2) fail("a flag names exactly two edges");
        const EdgeIndex e = tree.edge_index(edges[0].get<std::string>());
        const EdgeIndex g = tree.edge_index(edges[1].get<std::string>());
        const auto incident = tree.incident(x);
        auto touches = [&](EdgeIndex k) { return std::find(incident.begin(), incident.end(), k) != incident.end(); };
        if (e == g || !touches(e) || !touches(g))
            throw Error(ErrorKind::FlagInvalid, "flag edges must be distinct and incident to its vertex");
        if (!data.emplace(Flag::make(x, e, g), parse_number(field(f, "value"))).second) fail("duplicate flag");
    }
    return data;
}

Json radon_data_to_json(const MetricTree& tree, const RadonData& data) {
    Json list = Json::array();
    for (const auto& [flag, value] : data)
        list.push_back({{"vertex", tree.vertex_id(flag.vertex)},
                        {"edges", {tree.edge(flag.first).id, tree.edge(flag.second).id}},
                        {"value", format_number(value)}});
    return list;
}

std::string asymptotic_csv(const AsymptoticReport& report) {
    std::ostringstream out;
    out << "t,ratio,target,abs_error\n";
    for (const auto& s : report.samples)
        out << format_number(s.t) << ',' << format_number(s.ratio) << ',' << format_number(report.target) << ','
            << format_number(s.error) << '\n';
    return out.str();
}

Json asymptotic_to_json(const AsymptoticReport& report) {
    Json samples = Json::array();
    for (const auto& s : report.samples)
        samples.push_back({{"t", format_number(s.t)},
                           {"distance", format_number(s.distance)},
                           {"ratio", format_number(s.ratio)},
                           {"abs_error", format_number(s.error)}});
    Json j{{"target", format_number(report.target)},
           {"samples", samples},
           {"error_at_largest", format_number(report.error_at_largest())},
           {"nondecreasing", report.nondecreasing},
           {"common_dirac_base", report.common_dirac_base},
           {"exit_time", format_number(report.exit_time)},
           {"certified_limit", format_number(report.certified_limit)},
           {"affine_defect", format_number(report.affine_defect)},
           {"regime", report.regime == AsymptoticRegime::Asymptotic ? "asymptotic" : "linear"}};
    if (report.regime == AsymptoticRegime::Asymptotic) j["bounded_limit"] = format_number(report.bounded_limit);
    else j["slope"] = format_number(report.certified_limit);
    return j;
}

}  // namespace wtree::io
