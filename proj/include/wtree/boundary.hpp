#pragma once

#include <optional>
#include <span>
#include <vector>

#include "wtree/dynamics.hpp"

namespace wtree {

/// A point of the cone over the boundary: an end with a speed. Speed 0 is the
/// apex, which carries no end.
struct ConePoint {
    std::optional<TreeEnd> end;
    double speed = 0.0;

    static ConePoint apex() { return {}; }
    bool is_apex() const { return !end.has_value(); }
};

struct ConeAtom {
    ConePoint point;
    double mass = 0.0;
};

/// Finitely supported probability measure on the cone. Atoms at equal cone
/// points are merged; zero-speed atoms are moved to the apex.
class ConeMeasure {
public:
    explicit ConeMeasure(std::vector<ConeAtom> atoms);

    std::span<const ConeAtom> atoms() const { return atoms_; }
    /// Mass-weighted mean of speed^2.
    double second_moment() const;
    bool is_unit() const;

private:
    std::vector<ConeAtom> atoms_;
};

/// Cone distance: |s - t| for equal ends or at the apex, s + t otherwise.
double d_infinity(const ConePoint& a, const ConePoint& b);

struct ConeCoupling {
    std::size_t first;
    std::size_t second;
    double mass;
};

struct WInfinityResult {
    double distance = 0.0;
    std::vector<ConeCoupling> plan;
};

WInfinityResult w_infinity(const ConeMeasure& first, const ConeMeasure& second);

/// sup over sets of ends |a(A) - b(A)|, speeds ignored.
double total_variation(const ConeMeasure& a, const ConeMeasure& b);

/// End and speed of each ray of a ray plan.
ConeMeasure asymptotic_measure(const DynamicalPlan& ray_plan);

/// One ray from x per cone atom. With `require_unit`, throws NonUnitMeasure
/// unless the second moment of nu is 1.
DynamicalPlan ray_from_asymptotic_measure(const MetricTree& tree, const TreePoint& x, const ConeMeasure& nu,
                                          bool require_unit = false);

std::vector<double> default_time_grid();

struct RatioSample {
    double t = 0.0;
    double distance = 0.0;  // W(mu_t, sigma_t)
    double ratio = 0.0;     // distance / t
    double error = 0.0;     // |ratio - target|
};

enum class AsymptoticRegime { Asymptotic, Linear };

struct AsymptoticReport {
    std::vector<RatioSample> samples;
    double target = 0.0;  // W_infinity of the asymptotic measures
    /// Past this time every pair of rays is at affine distance a * t - b.
    double exit_time = 0.0;
    /// Exact limit of the ratio from the slopes a.
    double certified_limit = 0.0;
    /// Largest deviation of sampled pair distances from the affine model.
    double affine_defect = 0.0;
    bool nondecreasing = true;
    bool common_dirac_base = false;
    AsymptoticRegime regime = AsymptoticRegime::Linear;
    /// Asymptotic regime only: limit of W(mu_t, sigma_t).
    double bounded_limit = 0.0;

    double error_at_largest() const { return samples.empty() ? 0.0 : samples.back().error; }
};

/// Compares W(mu_t, sigma_t) / t over the grid with W_infinity of the
/// asymptotic measures, and certifies the limit from the exit time on.
AsymptoticReport asymptotic_formula_check(const MetricTree& tree, const DynamicalPlan& mu, const DynamicalPlan& sigma,
                                          std::span<const double> grid);

}  // namespace wtree
