#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wtree {

/// Dense cost matrix of a transportation problem, row-major.
class CostMatrix {
public:
    CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    /// Largest absolute entry, at least 1.
    double scale() const;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

struct BasicCell {
    std::size_t row;
    std::size_t col;
    double flow;
};

/// Optimal basic solution with its dual potentials: cost(i,j) - row(i) - col(j)
/// is nonnegative everywhere and zero on the basis.
struct TransportationSolution {
    std::vector<BasicCell> basis;  // m + n - 1 cells, zero flows included
    std::vector<double> row_potential;
    std::vector<double> col_potential;
    double cost = 0.0;
    std::size_t pivots = 0;

    /// Cells with positive flow, ordered by (row, col).
    std::vector<BasicCell> support() const;
};

/// Transportation simplex: northwest-corner start, Bland's rule for both the
/// entering and the leaving cell. Costs may have any sign. Supplies and
/// demands must be positive with equal totals (relative 1e-9).
TransportationSolution solve_transportation(std::span<const double> supply, std::span<const double> demand,
                                            const CostMatrix& cost);

/// Largest violation of dual feasibility or complementary slackness.
double duality_gap(const TransportationSolution& solution, const CostMatrix& cost);

}  // namespace wtree
