#include "wtree/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace wtree {

namespace {

bool same_interval(const TimeInterval& a, const TimeInterval& b) {
    if (a.kind != b.kind) return false;
    if (a.kind != IntervalKind::Segment) return true;
    const double scale = std::max({1.0, std::abs(a.start), std::abs(a.finish)});
    return std::abs(a.start - b.start) <= kTolerance * scale && std::abs(a.finish - b.finish) <= kTolerance * scale;
}

std::size_t index_of(const MetricTree& tree, std::span<const Atom> atoms, const TreePoint& p) {
    for (std::size_t i = 0; i < atoms.size(); ++i)
        if (tree.same_point(atoms[i].point, p)) return i;
    return atoms.size();
}

// Largest |t| at which some atom crosses a vertex of its locus.
double last_vertex_time(const DynamicalPlan& plan) {
    double latest = 0.0;
    for (const auto& atom : plan.atoms()) {
        const auto& g = atom.geodesic;
        latest = std::max(latest, std::abs(g.anchor_time()));
        if (g.is_constant()) continue;
        for (const auto& step : g.locus())
            for (double u : {step.lo, step.hi})
                if (std::isfinite(u)) latest = std::max(latest, std::abs(g.anchor_time() + u / g.speed()));
    }
    return latest;
}

}  // namespace

DynamicalPlan::DynamicalPlan(const MetricTree& tree, std::vector<GeodesicAtom> atoms, const TimeInterval& interval)
    : interval_(interval) {
    double total = 0.0;
    for (auto& atom : atoms) {
        if (!std::isfinite(atom.mass) || atom.mass < 0.0)
            throw Error(ErrorKind::InvalidMeasure, "masses must be finite and nonnegative");
        if (!same_interval(atom.geodesic.interval(), interval))
            throw Error(ErrorKind::OutOfInterval, "all geodesics of a plan share its interval");
        total += atom.mass;
        if (atom.mass == 0.0) continue;
        auto it = std::find_if(atoms_.begin(), atoms_.end(), [&](const GeodesicAtom& a) {
            return same_geodesic(tree, a.geodesic, atom.geodesic);
        });
        if (it == atoms_.end()) atoms_.push_back(std::move(atom));
        else it->mass += atom.mass;
    }
    if (atoms_.empty() || std::abs(total - 1.0) > 1e-9)
        throw Error(ErrorKind::InvalidMeasure, "plan masses must sum to 1");
}

double DynamicalPlan::speed() const {
    double sum = 0.0;
    for (const auto& a : atoms_) sum += a.mass * a.geodesic.speed() * a.geodesic.speed();
    return std::sqrt(sum);
}

DiscreteMeasure pushforward_at(const MetricTree& tree, const DynamicalPlan& plan, double t) {
    if (!plan.interval().contains(t)) throw Error(ErrorKind::OutOfInterval, "time outside the plan interval");
    std::vector<Atom> atoms;
    for (const auto& a : plan.atoms()) atoms.push_back({evaluate(tree, a.geodesic, t), a.mass});
    return {tree, std::move(atoms)};
}

DynamicalPlan interpolate(const MetricTree& tree, const TransportPlan& plan) {
    const auto cert = is_cyclically_monotone(tree, plan, plan.entries.size());
    if (!cert.monotone) throw Error(ErrorKind::PlanNotOptimal, "plan is not cyclically monotone");
    std::vector<GeodesicAtom> atoms;
    for (const auto& e : plan.entries) atoms.push_back({geodesic_segment(tree, e.source, e.target, 0.0, 1.0), e.mass});
    return {tree, std::move(atoms), TimeInterval::segment(0.0, 1.0)};
}

DynamicalPlan interpolate(const MetricTree& tree, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    return interpolate(tree, wasserstein2(tree, mu, nu).plan);
}

std::vector<LiftEntry> lift(const MetricTree& tree, const DynamicalPlan& first, const DynamicalPlan& second,
                            const TransportPlan& plan_t, double t) {
    const auto mu_t = pushforward_at(tree, first, t);
    const auto sigma_t = pushforward_at(tree, second, t);
    const auto mu_atoms = mu_t.atoms();
    const auto sigma_atoms = sigma_t.atoms();

    std::vector<double> row(mu_atoms.size(), 0.0);
    std::vector<double> col(sigma_atoms.size(), 0.0);
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (const auto& e : plan_t.entries) {
        const std::size_t i = index_of(tree, mu_atoms, e.source);
        const std::size_t j = index_of(tree, sigma_atoms, e.target);
        if (i == mu_atoms.size() || j == sigma_atoms.size())
            throw Error(ErrorKind::MarginalMismatch, "plan entry outside the time-t supports");
        row[i] += e.mass;
        col[j] += e.mass;
        cells.push_back({i, j});
    }
    for (std::size_t i = 0; i < row.size(); ++i)
        if (std::abs(row[i] - mu_atoms[i].mass) > 1e-9)
            throw Error(ErrorKind::MarginalMismatch, "first marginal differs from the time-t pushforward");
    for (std::size_t j = 0; j < col.size(); ++j)
        if (std::abs(col[j] - sigma_atoms[j].mass) > 1e-9)
            throw Error(ErrorKind::MarginalMismatch, "second marginal differs from the time-t pushforward");

    // Which time-t atom each geodesic sits on.
    std::vector<std::size_t> first_at;
    std::vector<std::size_t> second_at;
    for (const auto& a : first.atoms()) first_at.push_back(index_of(tree, mu_atoms, evaluate(tree, a.geodesic, t)));
    for (const auto& b : second.atoms()) second_at.push_back(index_of(tree, sigma_atoms, evaluate(tree, b.geodesic, t)));

    std::map<std::pair<std::size_t, std::size_t>, double> coupling;
    for (std::size_t k = 0; k < plan_t.entries.size(); ++k) {
        const auto [i, j] = cells[k];
        const double m = plan_t.entries[k].mass;
        for (std::size_t a = 0; a < first_at.size(); ++a) {
            if (first_at[a] != i) continue;
            const double share_a = first.atoms()[a].mass / mu_atoms[i].mass;
            for (std::size_t b = 0; b < second_at.size(); ++b) {
                if (second_at[b] != j) continue;
                coupling[{a, b}] += m * share_a * (second.atoms()[b].mass / sigma_atoms[j].mass);
            }
        }
    }
    std::vector<LiftEntry> out;
    for (const auto& [key, mass] : coupling) out.push_back({key.first, key.second, mass});
    return out;
}

TransportPlan project_lift(const MetricTree& tree, const DynamicalPlan& first, const DynamicalPlan& second,
                           std::span<const LiftEntry> coupling, double t) {
    TransportPlan plan;
    for (const auto& entry : coupling) {
        const TreePoint x = evaluate(tree, first.atoms()[entry.first].geodesic, t);
        const TreePoint y = evaluate(tree, second.atoms()[entry.second].geodesic, t);
        auto it = std::find_if(plan.entries.begin(), plan.entries.end(), [&](const PlanEntry& e) {
            return tree.same_point(e.source, x) && tree.same_point(e.target, y);
        });
        if (it == plan.entries.end()) plan.entries.push_back({x, y, entry.mass});
        else it->mass += entry.mass;
    }
    return plan;
}

std::optional<EdgeIndex> antagonist_edge(const TreeGeodesic& a, const TreeGeodesic& b) {
    for (const auto& s : a.locus()) {
        for (const auto& t : b.locus()) {
            if (s.edge != t.edge || s.forward == t.forward) continue;
            const auto [s_lo, s_hi] = s.offset_range();
            const auto [t_lo, t_hi] = t.offset_range();
            const double lo = std::max(s_lo, t_lo);
            const double hi = std::min(s_hi, t_hi);
            if (hi - lo > kTolerance * std::max(1.0, std::abs(lo))) return s.edge;
        }
    }
    return std::nullopt;
}

std::vector<Antagonism> antagonist_pairs(const DynamicalPlan& plan) {
    std::vector<Antagonism> out;
    const auto atoms = plan.atoms();
    for (std::size_t i = 0; i < atoms.size(); ++i)
        for (std::size_t j = i + 1; j < atoms.size(); ++j)
            if (const auto edge = antagonist_edge(atoms[i].geodesic, atoms[j].geodesic)) out.push_back({i, j, *edge});
    return out;
}

TransportPlan time_coupling(const MetricTree& tree, const DynamicalPlan& plan, double s, double t) {
    TransportPlan coupling;
    for (const auto& a : plan.atoms())
        coupling.entries.push_back({evaluate(tree, a.geodesic, s), evaluate(tree, a.geodesic, t), a.mass});
    return coupling;
}

DynamicalCertificate is_optimal_dynamical(const MetricTree& tree, const DynamicalPlan& plan) {
    DynamicalCertificate cert;
    cert.antagonists = antagonist_pairs(plan);
    cert.antagonist_free = cert.antagonists.empty();

    const auto& interval = plan.interval();
    if (interval.kind == IntervalKind::Segment) {
        cert.checked_times.push_back({interval.start, interval.finish});
    } else {
        // Restrictions of an optimal plan are optimal, so widening windows
        // past every vertex crossing decide optimality.
        const double horizon = 1.0 + last_vertex_time(plan);
        for (double factor : {1.0, 2.0, 4.0, 8.0}) {
            const double T = factor * horizon;
            cert.checked_times.push_back({interval.kind == IntervalKind::Ray ? 0.0 : -T, T});
        }
    }
    for (const auto& [s, t] : cert.checked_times) {
        const auto coupling = time_coupling(tree, plan, s, t);
        auto check = is_cyclically_monotone(tree, coupling, coupling.entries.size());
        if (!check.monotone) {
            cert.optimal = false;
            cert.failure = std::move(check);
            break;
        }
    }
    return cert;
}

namespace {

TreeEnd continuation_end(const MetricTree& tree, const TreeGeodesic& g) {
    const Traversal& last = g.locus().back();
    const Edge& e = tree.edge(last.edge);
    // From inside an edge the only way on is along the same edge.
    if (!e.infinite()) return straight_end(tree, last.forward ? e.tail : *e.head, last.edge);
    if (last.forward) return tree.end_of(last.edge);
    // Inbound on a ray: turn at its vertex onto the smallest other edge.
    std::optional<EdgeIndex> next;
    for (EdgeIndex f : tree.incident(e.tail))
        if (f != last.edge && (!next || tree.edge(f).id < tree.edge(*next).id)) next = f;
    if (!next) throw Error(ErrorKind::LeafyTree, "vertex '" + tree.vertex_id(e.tail) + "' is a leaf");
    return straight_end(tree, e.tail, *next);
}

}  // namespace

DynamicalPlan extend_from_dirac(const MetricTree& tree, const DynamicalPlan& segment_plan) {
    for (VertexIndex v = 0; v < tree.vertex_count(); ++v)
        if (tree.valency(v) == 1) throw Error(ErrorKind::LeafyTree, "vertex '" + tree.vertex_id(v) + "' is a leaf");
    const auto& interval = segment_plan.interval();
    if (interval.kind != IntervalKind::Segment || std::abs(interval.start) > kTolerance)
        throw Error(ErrorKind::NotDiracBased, "expected a segment plan on [0, T]");
    const auto start = pushforward_at(tree, segment_plan, 0.0);
    if (start.size() != 1) throw Error(ErrorKind::NotDiracBased, "time-0 measure is not a Dirac mass");
    const TreePoint x = start.atoms()[0].point;
    const auto ends = tree.ends();
    if (ends.empty()) throw Error(ErrorKind::LeafyTree, "tree has no ends");

    std::vector<GeodesicAtom> atoms;
    for (const auto& a : segment_plan.atoms()) {
        const auto& g = a.geodesic;
        if (g.is_constant()) {
            atoms.push_back({ray_to_end(tree, x, ends.front(), 0.0), a.mass});
            continue;
        }
        atoms.push_back({ray_to_end(tree, x, continuation_end(tree, g), g.speed()), a.mass});
    }
    return {tree, std::move(atoms), TimeInterval::ray()};
}

TreePoint midpoint(const MetricTree& tree, const TreePoint& p, const TreePoint& q) {
    if (tree.same_point(p, q)) return p;
    return evaluate(tree, geodesic_segment(tree, p, q, 0.0, 1.0), 0.5);
}

DiscreteMeasure dirac_interpolation(const MetricTree& tree, const TreePoint& x, const DiscreteMeasure& mu, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::OutOfInterval, "interpolation parameter outside [0, 1]");
    std::vector<Atom> atoms;
    for (const auto& a : mu.atoms()) {
        const TreePoint p = tree.same_point(x, a.point) ? x : evaluate(tree, geodesic_segment(tree, x, a.point, 0.0, 1.0), t);
        atoms.push_back({p, a.mass});
    }
    return {tree, std::move(atoms)};
}

namespace {

struct MidpointComparison {
    double midpoint_distance;
    double half_distance;
};

MidpointComparison compare_midpoints(const MetricTree& tree, const DiscreteMeasure& mu, const TreePoint& x,
                                     const TreePoint& g) {
    const auto half = dirac_interpolation(tree, x, mu, 0.5);
    const auto centre = DiscreteMeasure::dirac(tree, midpoint(tree, x, g));
    const auto target = DiscreteMeasure::dirac(tree, g);
    return {wasserstein2(tree, half, centre).distance, 0.5 * wasserstein2(tree, mu, target).distance};
}

void require_maximal(const MetricTree& tree, const LocusSide& side) {
    if (const auto* p = std::get_if<TreePoint>(&side))
        if (!p->on_vertex() || tree.valency(p->vertex()) != 1)
            throw Error(ErrorKind::InvalidPoint, "geodesic is not maximal");
}

}  // namespace

SupportTest supported_on_geodesic_test(const MetricTree& tree, const DiscreteMeasure& mu, const TreeGeodesic& g) {
    if (g.is_constant()) throw Error(ErrorKind::ConstantGeodesic, "support test needs a non-constant geodesic");
    require_maximal(tree, g.from());
    require_maximal(tree, g.to());

    SupportTest result;
    std::optional<Projection> off_locus;
    for (const auto& a : mu.atoms()) {
        const auto proj = project_to_geodesic(tree, a.point, g);
        if (proj.distance > kTolerance) {
            off_locus = proj;
            break;
        }
    }

    if (!off_locus) {
        // Sample pairs among locus vertices and the atoms themselves.
        std::vector<TreePoint> samples;
        for (const auto& step : g.locus())
            for (double u : {step.lo, step.hi})
                if (std::isfinite(u)) samples.push_back(point_at_arclength(tree, g, u));
        for (const auto& a : mu.atoms()) samples.push_back(a.point);
        if (samples.size() < 2) {
            const double u = samples.empty() ? 0.0 : *arclength_of(tree, g, samples.front());
            samples.push_back(point_at_arclength(tree, g, u + 1.0));
        }
        for (std::size_t i = 0; i < samples.size(); ++i)
            for (std::size_t j = 0; j < samples.size(); ++j) {
                if (i == j || tree.same_point(samples[i], samples[j])) continue;
                const auto cmp = compare_midpoints(tree, mu, samples[i], samples[j]);
                ++result.pairs_checked;
                const double defect = std::abs(cmp.midpoint_distance - cmp.half_distance);
                if (!result.witness || defect > result.max_equality_defect) {
                    result.witness = {samples[i], samples[j]};
                    result.midpoint_distance = cmp.midpoint_distance;
                    result.half_distance = cmp.half_distance;
                }
                result.max_equality_defect = std::max(result.max_equality_defect, defect);
            }
        return result;
    }

    // An atom y off the locus with projection p: take x before p closer than
    // d(p, y), and g past p twice as far. Then the midpoint of x and y lies
    // strictly closer to the midpoint of x and g than half of d(y, g).
    result.supported = false;
    const double u = off_locus->arclength;
    const auto& locus = g.locus();
    const double room_back = u - locus.front().lo;
    const double room_ahead = locus.back().hi - u;
    const double step = std::min({off_locus->distance / 2.0, room_back / 2.0, room_ahead / 4.0, 1.0});
    const TreePoint x = point_at_arclength(tree, g, u - step);
    const TreePoint far = point_at_arclength(tree, g, u + 2.0 * step);
    const auto cmp = compare_midpoints(tree, mu, x, far);
    result.witness = {x, far};
    result.midpoint_distance = cmp.midpoint_distance;
    result.half_distance = cmp.half_distance;
    result.pairs_checked = 1;
    return result;
}

CompletePlanCertificate validate_complete_plan(const MetricTree& tree, const DynamicalPlan& plan) {
    if (plan.interval().kind != IntervalKind::Complete)
        throw Error(ErrorKind::OutOfInterval, "expected a plan of complete geodesics");
    CompletePlanCertificate cert;
    for (std::size_t i = 0; i < plan.size(); ++i)
        if (std::abs(plan.atoms()[i].geodesic.speed() - 1.0) > 1e-9) cert.non_unit_atoms.push_back(i);
    cert.valid = cert.non_unit_atoms.empty();
    if (!cert.valid) {
        const auto coupling = time_coupling(tree, plan, -1e3, 1e3);
        cert.witness = is_cyclically_monotone(tree, coupling, coupling.entries.size());
    }
    return cert;
}

}  // namespace wtree
