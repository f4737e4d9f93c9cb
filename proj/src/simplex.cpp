#include "wtree/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <tuple>

#include "wtree/error.hpp"

namespace wtree {

double CostMatrix::scale() const {
    double s = 1.0;
    for (double c : data_) s = std::max(s, std::abs(c));
    return s;
}

std::vector<BasicCell> TransportationSolution::support() const {
    std::vector<BasicCell> out;
    for (const auto& cell : basis)
        if (cell.flow > 0.0) out.push_back(cell);
    std::sort(out.begin(), out.end(),
              [](const BasicCell& a, const BasicCell& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
    return out;
}

namespace {

// Rows are nodes 0..m-1, columns nodes m..m+n-1; basic cells are the tree edges.
class BasisTree {
public:
    BasisTree(std::size_t rows, std::size_t cols, const std::vector<BasicCell>& basis)
        : rows_(rows), adjacency_(rows + cols) {
        for (std::size_t k = 0; k < basis.size(); ++k) {
            adjacency_[basis[k].row].push_back(k);
            adjacency_[rows + basis[k].col].push_back(k);
        }
    }

    void potentials(const std::vector<BasicCell>& basis, const CostMatrix& cost, std::vector<double>& u,
                    std::vector<double>& v) const {
        std::vector<bool> seen(adjacency_.size(), false);
        std::vector<std::size_t> stack{0};
        u.assign(rows_, 0.0);
        v.assign(adjacency_.size() - rows_, 0.0);
        seen[0] = true;
        while (!stack.empty()) {
            const std::size_t node = stack.back();
            stack.pop_back();
            for (std::size_t k : adjacency_[node]) {
                const auto& cell = basis[k];
                const std::size_t other = node < rows_ ? rows_ + cell.col : cell.row;
                if (seen[other]) continue;
                seen[other] = true;
                if (other >= rows_) v[cell.col] = cost(cell.row, cell.col) - u[cell.row];
                else u[cell.row] = cost(cell.row, cell.col) - v[cell.col];
                stack.push_back(other);
            }
        }
        if (std::find(seen.begin(), seen.end(), false) != seen.end())
            throw Error(ErrorKind::SolverFailure, "basis does not span the transportation graph");
    }

    // Basic cells on the tree path from node `from` to node `to`, in order.
    std::vector<std::size_t> path(std::size_t from, std::size_t to, const std::vector<BasicCell>& basis) const {
        constexpr std::size_t kNone = static_cast<std::size_t>(-1);
        std::vector<std::size_t> via(adjacency_.size(), kNone);
        std::vector<bool> seen(adjacency_.size(), false);
        std::vector<std::size_t> stack{from};
        seen[from] = true;
        while (!stack.empty() && !seen[to]) {
            const std::size_t node = stack.back();
            stack.pop_back();
            for (std::size_t k : adjacency_[node]) {
                const std::size_t other = node < rows_ ? rows_ + basis[k].col : basis[k].row;
                if (seen[other]) continue;
                seen[other] = true;
                via[other] = k;
                stack.push_back(other);
            }
        }
        std::vector<std::size_t> cells;
        for (std::size_t node = to; node != from;) {
            const std::size_t k = via[node];
            cells.push_back(k);
            node = node < rows_ ? rows_ + basis[k].col : basis[k].row;
        }
        std::reverse(cells.begin(), cells.end());
        return cells;
    }

private:
    std::size_t rows_;
    std::vector<std::vector<std::size_t>> adjacency_;
};

std::vector<BasicCell> northwest_corner(std::span<const double> supply, std::span<const double> demand) {
    std::vector<double> rows(supply.begin(), supply.end());
    std::vector<double> cols(demand.begin(), demand.end());
    const std::size_t m = rows.size();
    const std::size_t n = cols.size();
    std::vector<BasicCell> basis;
    basis.reserve(m + n - 1);
    std::size_t i = 0;
    std::size_t j = 0;
    while (true) {
        const double x = std::max(0.0, std::min(rows[i], cols[j]));
        basis.push_back({i, j, x});
        rows[i] -= x;
        cols[j] -= x;
        if (i == m - 1 && j == n - 1) break;
        if (i == m - 1) ++j;
        else if (j == n - 1) ++i;
        else if (rows[i] <= cols[j]) ++i;
        else ++j;
    }
    // Absorb rounding residue so the marginals hold to the last bit we can.
    basis.back().flow += std::max(0.0, std::min(rows[m - 1], cols[n - 1]));
    return basis;
}

}  // namespace

TransportationSolution solve_transportation(std::span<const double> supply, std::span<const double> demand,
                                            const CostMatrix& cost) {
    const std::size_t m = supply.size();
    const std::size_t n = demand.size();
    if (m == 0 || n == 0) throw Error(ErrorKind::InvalidMeasure, "empty marginal");
    if (cost.rows() != m || cost.cols() != n) throw Error(ErrorKind::SolverFailure, "cost matrix shape mismatch");
    for (double s : supply)
        if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorKind::InvalidMeasure, "supplies must be positive");
    for (double d : demand)
        if (!(d > 0.0) || !std::isfinite(d)) throw Error(ErrorKind::InvalidMeasure, "demands must be positive");
    const double total_supply = std::accumulate(supply.begin(), supply.end(), 0.0);
    const double total_demand = std::accumulate(demand.begin(), demand.end(), 0.0);
    if (std::abs(total_supply - total_demand) > 1e-9 * std::max(1.0, total_supply))
        throw Error(ErrorKind::MarginalMismatch, "supply and demand totals differ");

    TransportationSolution sol;
    sol.basis = northwest_corner(supply, demand);
    const double eps = 1e-12 * cost.scale();
    const std::size_t max_pivots = 1000 + 20 * m * n * (m + n);

    while (true) {
        const BasisTree tree(m, n, sol.basis);
        tree.potentials(sol.basis, cost, sol.row_potential, sol.col_potential);

        // Bland: the first cell in (row, col) order with negative reduced cost enters.
        std::optional<std::pair<std::size_t, std::size_t>> entering;
        for (std::size_t i = 0; i < m && !entering; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (cost(i, j) - sol.row_potential[i] - sol.col_potential[j] < -eps) {
                    entering = {i, j};
                    break;
                }
        if (!entering) break;
        if (++sol.pivots > max_pivots) throw Error(ErrorKind::SolverFailure, "pivot limit reached");

        const auto [ei, ej] = *entering;
        // Cycle: entering cell (+), then the tree path from its column back to its row, alternating - / +.
        const auto cycle = tree.path(m + ej, ei, sol.basis);
        std::optional<std::size_t> leaving;
        for (std::size_t k = 0; k < cycle.size(); k += 2) {
            const auto& cell = sol.basis[cycle[k]];
            if (!leaving) {
                leaving = cycle[k];
                continue;
            }
            const auto& best = sol.basis[*leaving];
            if (cell.flow < best.flow ||
                (cell.flow == best.flow && std::tie(cell.row, cell.col) < std::tie(best.row, best.col)))
                leaving = cycle[k];
        }
        const double theta = sol.basis[*leaving].flow;
        for (std::size_t k = 0; k < cycle.size(); ++k) {
            auto& cell = sol.basis[cycle[k]];
            cell.flow = k % 2 == 0 ? std::max(0.0, cell.flow - theta) : cell.flow + theta;
        }
        sol.basis[*leaving] = {ei, ej, theta};
    }

    sol.cost = 0.0;
    for (const auto& cell : sol.basis) sol.cost += cell.flow * cost(cell.row, cell.col);
    return sol;
}

double duality_gap(const TransportationSolution& solution, const CostMatrix& cost) {
    double gap = 0.0;
    for (std::size_t i = 0; i < cost.rows(); ++i)
        for (std::size_t j = 0; j < cost.cols(); ++j)
            gap = std::max(gap, solution.row_potential[i] + solution.col_potential[j] - cost(i, j));
    for (const auto& cell : solution.basis)
        if (cell.flow > 0.0)
            gap = std::max(gap, std::abs(cost(cell.row, cell.col) - solution.row_potential[cell.row] -
                                         solution.col_potential[cell.col]));
    return gap;
}

}  // namespace wtree
