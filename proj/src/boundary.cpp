#include "wtree/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace wtree {

ConeMeasure::ConeMeasure(std::vector<ConeAtom> atoms) {
    double total = 0.0;
    for (auto atom : atoms) {
        if (!std::isfinite(atom.mass) || atom.mass < 0.0)
            throw Error(ErrorKind::InvalidMeasure, "masses must be finite and nonnegative");
        if (!std::isfinite(atom.point.speed) || atom.point.speed < 0.0)
            throw Error(ErrorKind::InvalidMeasure, "cone speeds must be finite and nonnegative");
        total += atom.mass;
        if (atom.mass == 0.0) continue;
        if (atom.point.speed == 0.0) atom.point.end.reset();
        if (atom.point.is_apex()) atom.point.speed = 0.0;
        auto it = std::find_if(atoms_.begin(), atoms_.end(), [&](const ConeAtom& a) {
            return a.point.end == atom.point.end && d_infinity(a.point, atom.point) <= kTolerance;
        });
        if (it == atoms_.end()) atoms_.push_back(atom);
        else it->mass += atom.mass;
    }
    if (atoms_.empty() || std::abs(total - 1.0) > 1e-9) throw Error(ErrorKind::InvalidMeasure, "masses must sum to 1");
}

double ConeMeasure::second_moment() const {
    double sum = 0.0;
    for (const auto& a : atoms_) sum += a.mass * a.point.speed * a.point.speed;
    return sum;
}

bool ConeMeasure::is_unit() const { return std::abs(second_moment() - 1.0) <= 1e-9; }

double d_infinity(const ConePoint& a, const ConePoint& b) {
    if (a.is_apex() || b.is_apex() || a.end == b.end) return std::abs(a.speed - b.speed);
    return a.speed + b.speed;
}

WInfinityResult w_infinity(const ConeMeasure& first, const ConeMeasure& second) {
    const auto a = first.atoms();
    const auto b = second.atoms();
    CostMatrix cost(a.size(), b.size());
    std::vector<double> supply;
    std::vector<double> demand;
    for (const auto& x : a) supply.push_back(x.mass);
    for (const auto& y : b) demand.push_back(y.mass);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double d = d_infinity(a[i].point, b[j].point);
            cost(i, j) = d * d;
        }
    const auto solution = solve_transportation(supply, demand, cost);
    WInfinityResult result;
    result.distance = std::sqrt(std::max(0.0, solution.cost));
    for (const auto& cell : solution.support()) result.plan.push_back({cell.row, cell.col, cell.flow});
    return result;
}

double total_variation(const ConeMeasure& a, const ConeMeasure& b) {
    // Signed mass per end; the apex counts as one more point.
    std::map<std::optional<EdgeIndex>, double> difference;
    auto key = [](const ConePoint& p) { return p.end ? std::optional<EdgeIndex>(p.end->edge) : std::nullopt; };
    for (const auto& x : a.atoms()) difference[key(x.point)] += x.mass;
    for (const auto& y : b.atoms()) difference[key(y.point)] -= y.mass;
    double l1 = 0.0;
    for (const auto& [k, v] : difference) l1 += std::abs(v);
    return 0.5 * l1;
}

ConeMeasure asymptotic_measure(const DynamicalPlan& ray_plan) {
    if (ray_plan.interval().kind != IntervalKind::Ray)
        throw Error(ErrorKind::OutOfInterval, "asymptotic measures are defined for ray plans");
    std::vector<ConeAtom> atoms;
    for (const auto& a : ray_plan.atoms()) {
        const auto end = a.geodesic.forward_end();
        atoms.push_back({end ? ConePoint{end, a.geodesic.speed()} : ConePoint::apex(), a.mass});
    }
    return ConeMeasure(std::move(atoms));
}

DynamicalPlan ray_from_asymptotic_measure(const MetricTree& tree, const TreePoint& x, const ConeMeasure& nu,
                                          bool require_unit) {
    if (require_unit && !nu.is_unit())
        throw Error(ErrorKind::NonUnitMeasure, "cone measure does not have unit second moment");
    tree.check_point(x);
    std::vector<GeodesicAtom> atoms;
    for (const auto& a : nu.atoms()) {
        if (a.point.is_apex()) atoms.push_back({make_geodesic(tree, x, x, 0.0, TimeInterval::ray(), x, 0.0), a.mass});
        else atoms.push_back({ray_to_end(tree, x, *a.point.end, a.point.speed), a.mass});
    }
    return {tree, std::move(atoms), TimeInterval::ray()};
}

std::vector<double> default_time_grid() { return {1.0, 10.0, 1e2, 1e3, 1e4, 1e6}; }

namespace {

// Position of a ray once it sits on its last edge: offset = base + speed * t
// along an infinite edge, from `settle` on.
struct FinalLeg {
    std::optional<EdgeIndex> edge;
    double base = 0.0;
    double speed = 0.0;
    double settle = 0.0;
};

FinalLeg final_leg(const MetricTree& tree, const TreeGeodesic& g) {
    FinalLeg leg;
    if (g.is_constant()) {
        const TreePoint& p = g.anchor();
        if (!p.on_vertex() && tree.edge(p.edge()).infinite()) {
            leg.edge = p.edge();
            leg.base = p.offset();
        }
        return leg;
    }
    for (const auto& step : g.locus())
        for (double u : {step.lo, step.hi})
            if (std::isfinite(u)) leg.settle = std::max(leg.settle, g.anchor_time() + u / g.speed());
    const Traversal& last = g.locus().back();
    if (tree.edge(last.edge).infinite() && last.forward) {
        leg.edge = last.edge;
        leg.speed = g.speed();
        leg.base = -g.speed() * g.anchor_time() - last.origin;
    }
    return leg;
}

double exit_time(const MetricTree& tree, const DynamicalPlan& mu, const DynamicalPlan& sigma) {
    std::vector<FinalLeg> first;
    std::vector<FinalLeg> second;
    double latest = 0.0;
    for (const auto& a : mu.atoms()) first.push_back(final_leg(tree, a.geodesic));
    for (const auto& b : sigma.atoms()) second.push_back(final_leg(tree, b.geodesic));
    for (const auto& leg : first) latest = std::max(latest, leg.settle);
    for (const auto& leg : second) latest = std::max(latest, leg.settle);
    // Two rays on the same infinite edge stop being affine apart once they cross.
    for (const auto& p : first)
        for (const auto& q : second)
            if (p.edge && p.edge == q.edge && p.speed != q.speed)
                latest = std::max(latest, (q.base - p.base) / (p.speed - q.speed));
    return latest;
}

std::vector<double> pair_distances(const MetricTree& tree, const DynamicalPlan& mu, const DynamicalPlan& sigma,
                                   double t) {
    std::vector<double> out;
    for (const auto& a : mu.atoms()) {
        const TreePoint x = evaluate(tree, a.geodesic, t);
        for (const auto& b : sigma.atoms()) out.push_back(tree.distance(x, evaluate(tree, b.geodesic, t)));
    }
    return out;
}

}  // namespace

AsymptoticReport asymptotic_formula_check(const MetricTree& tree, const DynamicalPlan& mu, const DynamicalPlan& sigma,
                                          std::span<const double> grid) {
    AsymptoticReport report;
    report.target = w_infinity(asymptotic_measure(mu), asymptotic_measure(sigma)).distance;

    const auto start_mu = pushforward_at(tree, mu, 0.0);
    const auto start_sigma = pushforward_at(tree, sigma, 0.0);
    report.common_dirac_base = start_mu.size() == 1 && start_sigma.size() == 1 &&
                               tree.same_point(start_mu.atoms()[0].point, start_sigma.atoms()[0].point);

    for (double t : grid) {
        if (!(t > 0.0)) throw Error(ErrorKind::OutOfInterval, "grid times must be positive");
        RatioSample s;
        s.t = t;
        s.distance = wasserstein2(tree, pushforward_at(tree, mu, t), pushforward_at(tree, sigma, t)).distance;
        s.ratio = s.distance / t;
        s.error = std::abs(s.ratio - report.target);
        if (!report.samples.empty()) {
            const double previous = report.samples.back().ratio;
            if (s.ratio < previous - 1e-9 * (1.0 + previous)) report.nondecreasing = false;
        }
        report.samples.push_back(s);
    }

    // Past the exit time each pair distance is a * t - b; read a and b off two
    // times and confirm on a third.
    report.exit_time = exit_time(tree, mu, sigma);
    const double t1 = 2.0 * std::max(1.0, report.exit_time);
    const auto d1 = pair_distances(tree, mu, sigma, t1);
    const auto d2 = pair_distances(tree, mu, sigma, 2.0 * t1);
    const auto d3 = pair_distances(tree, mu, sigma, 4.0 * t1);
    const std::size_t m = mu.size();
    const std::size_t n = sigma.size();
    CostMatrix slope_cost(m, n);
    CostMatrix offset_cost(m, n);
    std::vector<double> slopes(m * n);
    std::vector<double> offsets(m * n);
    for (std::size_t k = 0; k < m * n; ++k) {
        slopes[k] = (d2[k] - d1[k]) / t1;
        offsets[k] = slopes[k] * t1 - d1[k];
        const double predicted = slopes[k] * 4.0 * t1 - offsets[k];
        report.affine_defect =
            std::max(report.affine_defect, std::abs(d3[k] - predicted) / std::max(1.0, std::abs(d3[k])));
        slope_cost(k / n, k % n) = slopes[k] * slopes[k];
    }
    std::vector<double> supply;
    std::vector<double> demand;
    for (const auto& a : mu.atoms()) supply.push_back(a.mass);
    for (const auto& b : sigma.atoms()) demand.push_back(b.mass);
    const auto limit = solve_transportation(supply, demand, slope_cost);
    report.certified_limit = std::sqrt(std::max(0.0, limit.cost));

    if (report.certified_limit <= 1e-9) {
        report.regime = AsymptoticRegime::Asymptotic;
        // Lexicographic problem: zero slopes first, then the constant distances.
        double max_offset = 1.0;
        double min_slope = kInfinity;
        for (std::size_t k = 0; k < m * n; ++k) {
            max_offset = std::max(max_offset, offsets[k] * offsets[k]);
            if (slopes[k] > 1e-9) min_slope = std::min(min_slope, slopes[k] * slopes[k]);
        }
        const double penalty = std::isinf(min_slope) ? 0.0 : 1e6 * max_offset / min_slope;
        for (std::size_t k = 0; k < m * n; ++k)
            offset_cost(k / n, k % n) = penalty * slope_cost(k / n, k % n) + offsets[k] * offsets[k];
        const auto bounded = solve_transportation(supply, demand, offset_cost);
        double sum = 0.0;
        for (const auto& cell : bounded.support()) sum += cell.flow * offsets[cell.row * n + cell.col] * offsets[cell.row * n + cell.col];
        report.bounded_limit = std::sqrt(sum);
    }
    return report;
}

}  // namespace wtree
