#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fogalloc/arrival_model.hpp"

namespace fogalloc {

/// Solver failure: Picard non-convergence or a post-solve ordering violation.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

struct SolverOptions {
    /// Number of grid intervals M; the grid has M + 1 points.
    std::size_t grid_intervals = 2000;
    std::size_t max_iterations = 500;
    /// Relative change between successive Picard iterates at which a node is converged.
    double step_tolerance = 1e-12;
    /// Bound on the relative fixed-point residual of the assembled curves.
    double residual_tolerance = 1e-6;
};

/// Optimal cutoff curves y_1(t) > ... > y_N0(t) on a uniform time grid, in
/// raw-characteristic units. Curve indices are 1-based throughout.
///
/// Besides the curves themselves the table may carry each curve's excess over
/// the terminal reserve in transformed units. Deep curves sit within a few ulp
/// of the reserve for most of the horizon, so ordering is only resolvable on
/// the excess. Tables loaded from CSV have no excess.
class ThresholdTable {
public:
    ThresholdTable() = default;
    ThresholdTable(std::vector<double> grid, std::vector<std::vector<double>> curves, double eta,
                   std::vector<std::vector<long double>> excess = {}, double reserve_transformed = 0.0);

    std::span<const double> grid() const noexcept { return grid_; }
    double horizon() const noexcept { return grid_.empty() ? 0.0 : grid_.back(); }
    double eta() const noexcept { return eta_; }
    std::size_t curve_count() const noexcept { return curves_.size(); }
    std::size_t grid_size() const noexcept { return grid_.size(); }

    std::span<const double> curve(std::size_t i) const;
    double value(std::size_t i, std::size_t m) const { return curve(i)[m]; }

    bool has_excess() const noexcept { return !excess_.empty(); }
    std::span<const long double> excess(std::size_t i) const;
    double reserve_transformed() const noexcept { return reserve_transformed_; }

    /// Linear interpolation of curve i at time t. Throws std::out_of_range for
    /// i outside [1, N0] or t outside [0, T].
    double threshold_at(std::size_t i, double t) const;

    /// Values y_1(t), ..., y_n(t) for the family of n available units.
    std::vector<double> family_at(std::size_t n, double t) const;

private:
    std::vector<double> grid_;
    std::vector<std::vector<double>> curves_;
    std::vector<std::vector<long double>> excess_;
    double eta_ = 1.0;
    double reserve_transformed_ = 0.0;
};

/// R(1_i, t): expected revenue of i unit-rate units from t to T, on the
/// table's grid. Index 1-based like the curves.
class RevenueCurve {
public:
    RevenueCurve() = default;
    RevenueCurve(std::vector<double> grid, std::vector<std::vector<double>> values)
        : grid_(std::move(grid)), values_(std::move(values)) {}

    std::span<const double> grid() const noexcept { return grid_; }
    std::size_t curve_count() const noexcept { return values_.size(); }
    std::span<const double> curve(std::size_t i) const;
    double value_at(std::size_t i, double t) const;

private:
    std::vector<double> grid_;
    std::vector<std::vector<double>> values_;
};

struct SolveReport {
    /// Largest Picard iteration count at any node.
    std::size_t max_node_iterations = 0;
    /// Largest relative change of the final Picard step at any node.
    double max_final_step = 0.0;
    /// Largest relative residual |y - RHS(y)| / max(1, |y|) over all curves.
    double max_residual = 0.0;
    /// Nodes where oscillation triggered damping.
    std::size_t damped_nodes = 0;
};

struct ThresholdSolution {
    ThresholdTable table;
    RevenueCurve revenue;
    SolveReport report;
};

/// Solve the recursive threshold equations for counts 1..n_initial.
/// The result does not depend on any response rate.
ThresholdSolution solve_thresholds(const ArrivalModel& model, std::size_t n_initial, double horizon,
                                   const SolverOptions& options = {});

/// Relative fixed-point residual of curve i computed directly on the
/// raw-unit curves with plain trapezoid sums, independently of the solver's
/// excess formulation.
double fixed_point_residual(const ArrivalModel& model, const ThresholdTable& table, std::size_t i);

// Closed forms, used as oracles.
double closed_form_y1_exponential(double t, double lambda, double alpha, double eta, double horizon);
double closed_form_y2_exponential(double t, double lambda, double alpha, double eta, double horizon);
double closed_form_y3_exponential(double t, double lambda, double alpha, double eta, double horizon);
double closed_form_y1_uniform(double t, double lambda, double beta, double eta, double horizon);

/// Expected revenue at t of the units with the given rates (sorted descending):
/// sum_i r_i^(1/eta) (yhat_i(t) - hazard(yhat_i(t))).
double expected_revenue(const ArrivalModel& model, const ThresholdTable& table, std::span<const double> rates,
                        double t);

/// Same quantity through the revenue curve: sum_i r_i^(1/eta) (R_i(t) - R_{i-1}(t)).
double expected_revenue(const RevenueCurve& revenue, std::span<const double> rates, double eta, double t);

}  // namespace fogalloc
