#include "fogalloc/threshold_engine.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fogalloc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Threshold equation terms written relative to the reserve r (in transformed
// units): for an excess e the curve value is r + e.
//   hazard_delta(e)  = H(r + e) - H(r)
//   full(e)          = S(r + e)
//   delta(a, b)      = S(r + a) - S(r + b)
// with H = (1 - F) / f and S = (1 - F)^2 / f. The built-in laws evaluate the
// differences in closed form so that excesses far below one ulp of r keep
// full relative precision.
class ExcessKernel {
public:
    explicit ExcessKernel(const ArrivalModel& model) : model_(model), r_(model.reserve()) {
        std::visit(overloaded{
                       [&](const ExponentialLaw& l) {
                           kind_ = Kind::exponential;
                           rate_ = l.alpha;
                           scale_ = std::exp(-static_cast<long double>(l.alpha) * r_) / l.alpha;
                       },
                       [&](const UniformLaw& l) {
                           kind_ = Kind::uniform;
                           beta_ = l.beta;
                           headroom_ = static_cast<long double>(l.beta) - r_;
                       },
                       [&](const CustomLaw&) { kind_ = Kind::custom; },
                   },
                   model.law());
    }

    long double reserve() const { return r_; }

    long double hazard_delta(long double e) const {
        switch (kind_) {
        case Kind::exponential:
            return 0.0L;
        case Kind::uniform:
            return -e;
        case Kind::custom:
            break;
        }
        return static_cast<long double>(model_.hazard_inverse(static_cast<double>(r_ + e))) -
               static_cast<long double>(model_.hazard_inverse(static_cast<double>(r_)));
    }

    long double full(long double e) const {
        switch (kind_) {
        case Kind::exponential:
            return scale_ * std::exp(-rate_ * e);
        case Kind::uniform: {
            const long double w = headroom_ - e;
            return w * w / beta_;
        }
        case Kind::custom:
            break;
        }
        return model_.squared_survival_over_pdf(static_cast<double>(r_ + e));
    }

    long double delta(long double a, long double b) const {
        switch (kind_) {
        case Kind::exponential:
            return scale_ * (std::expm1(-rate_ * a) - std::expm1(-rate_ * b));
        case Kind::uniform:
            return (b - a) * (2.0L * headroom_ - a - b) / beta_;
        case Kind::custom:
            break;
        }
        return full(a) - full(b);
    }

private:
    enum class Kind { exponential, uniform, custom };

    const ArrivalModel& model_;
    long double r_;
    Kind kind_ = Kind::custom;
    long double rate_ = 0.0L;
    long double scale_ = 0.0L;
    long double beta_ = 0.0L;
    long double headroom_ = 0.0L;
};

double raise(double v, double eta) { return eta == 1.0 ? v : std::pow(v, eta); }
double root(double v, double eta) { return eta == 1.0 ? v : std::pow(v, 1.0 / eta); }

std::size_t locate(std::span<const double> grid, double t) {
    // Index m with grid[m] <= t < grid[m + 1]; last interval is closed.
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    std::size_t m = static_cast<std::size_t>(std::distance(grid.begin(), it));
    if (m == 0) return 0;
    return std::min(m - 1, grid.size() - 2);
}

double interpolate(std::span<const double> grid, std::span<const double> values, double t) {
    if (grid.size() == 1) return values[0];
    const std::size_t m = locate(grid, t);
    if (t == grid[m]) return values[m];
    if (t == grid[m + 1]) return values[m + 1];
    const double w = (t - grid[m]) / (grid[m + 1] - grid[m]);
    return values[m] + w * (values[m + 1] - values[m]);
}

void check_sorted_rates(std::span<const double> rates) {
    for (std::size_t k = 0; k < rates.size(); ++k) {
        if (!(rates[k] > 0.0)) throw std::invalid_argument("rates must be positive");
        if (k > 0 && rates[k] > rates[k - 1]) throw std::invalid_argument("rates must be sorted descending");
    }
}

}  // namespace

// ---------------------------------------------------------------- table

ThresholdTable::ThresholdTable(std::vector<double> grid, std::vector<std::vector<double>> curves, double eta,
                               std::vector<std::vector<long double>> excess, double reserve_transformed)
    : grid_(std::move(grid)),
      curves_(std::move(curves)),
      excess_(std::move(excess)),
      eta_(eta),
      reserve_transformed_(reserve_transformed) {
    if (grid_.size() < 2) throw std::invalid_argument("threshold grid needs at least two points");
    if (grid_.front() != 0.0) throw std::invalid_argument("threshold grid must start at t = 0");
    for (std::size_t m = 1; m < grid_.size(); ++m)
        if (!(grid_[m] > grid_[m - 1])) throw std::invalid_argument("threshold grid must be strictly increasing");
    for (const auto& c : curves_)
        if (c.size() != grid_.size()) throw std::invalid_argument("curve length does not match the grid");
    if (!excess_.empty() && excess_.size() != curves_.size())
        throw std::invalid_argument("excess curves do not match the threshold curves");
}

std::span<const double> ThresholdTable::curve(std::size_t i) const {
    if (i < 1 || i > curves_.size())
        throw std::out_of_range(fmt::format("curve index {} outside [1, {}]", i, curves_.size()));
    return curves_[i - 1];
}

std::span<const long double> ThresholdTable::excess(std::size_t i) const {
    if (i < 1 || i > excess_.size())
        throw std::out_of_range(fmt::format("excess index {} outside [1, {}]", i, excess_.size()));
    return excess_[i - 1];
}

double ThresholdTable::threshold_at(std::size_t i, double t) const {
    const auto c = curve(i);
    if (!(t >= 0.0 && t <= horizon()))
        throw std::out_of_range(fmt::format("time {} outside [0, {}]", t, horizon()));
    return interpolate(grid_, c, t);
}

std::vector<double> ThresholdTable::family_at(std::size_t n, double t) const {
    if (n > curves_.size())
        throw std::out_of_range(fmt::format("family size {} exceeds the {} solved curves", n, curves_.size()));
    std::vector<double> out(n);
    for (std::size_t i = 1; i <= n; ++i) out[i - 1] = threshold_at(i, t);
    return out;
}

std::span<const double> RevenueCurve::curve(std::size_t i) const {
    if (i < 1 || i > values_.size())
        throw std::out_of_range(fmt::format("revenue index {} outside [1, {}]", i, values_.size()));
    return values_[i - 1];
}

double RevenueCurve::value_at(std::size_t i, double t) const {
    if (i == 0) return 0.0;
    const auto c = curve(i);
    if (!(t >= 0.0 && t <= grid_.back()))
        throw std::out_of_range(fmt::format("time {} outside [0, {}]", t, grid_.back()));
    return interpolate(grid_, c, t);
}

// ---------------------------------------------------------------- solver

ThresholdSolution solve_thresholds(const ArrivalModel& model, std::size_t n_initial, double horizon,
                                   const SolverOptions& options) {
    if (n_initial < 1) throw std::invalid_argument("need at least one unit to solve for");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be positive");
    if (options.grid_intervals < 100) throw std::invalid_argument("grid resolution must be at least 100 intervals");
    if (options.max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");

    const std::size_t M = options.grid_intervals;
    const double eta = model.eta();
    const long double lambda = model.lambda();
    const long double half_dt = 0.5L * static_cast<long double>(horizon) / static_cast<long double>(M);

    std::vector<double> grid(M + 1);
    for (std::size_t m = 0; m <= M; ++m) grid[m] = horizon * static_cast<double>(m) / static_cast<double>(M);
    grid[M] = horizon;

    const ExcessKernel kernel(model);
    const long double r = kernel.reserve();
    const long double e_min = static_cast<long double>(model.support_min()) - r;
    const long double e_max = static_cast<long double>(model.support_max()) - r;

    std::vector<std::vector<long double>> excess(n_initial, std::vector<long double>(M + 1, 0.0L));
    std::vector<std::vector<double>> curves(n_initial, std::vector<double>(M + 1));
    std::vector<std::vector<double>> revenue(n_initial, std::vector<double>(M + 1));
    std::vector<long double> cumulative(M + 1, 0.0L);  // lambda * integral, summed over curves 1..i
    std::vector<long double> integral(M + 1);
    std::vector<long double> integrand(M + 1);

    SolveReport report;

    for (std::size_t i = 1; i <= n_initial; ++i) {
        auto& e_cur = excess[i - 1];
        const std::vector<long double>* e_prev = i > 1 ? &excess[i - 2] : nullptr;

        auto integrand_at = [&](long double e, std::size_t m) {
            return e_prev ? kernel.delta(e, (*e_prev)[m]) : kernel.full(e);
        };

        e_cur[M] = 0.0L;
        integral[M] = 0.0L;
        integrand[M] = integrand_at(0.0L, M);

        for (std::size_t m = M; m-- > 0;) {
            const long double known = integral[m + 1] + half_dt * integrand[m + 1];
            auto picard_map = [&](long double e) {
                return kernel.hazard_delta(e) + lambda * (known + half_dt * integrand_at(e, m));
            };

            // Damped Picard iteration, warm-started from the later node.
            long double e = e_cur[m + 1];
            long double omega = 1.0L;
            long double prev_delta = 0.0L;
            long double last_step = 0.0L;
            bool converged = false;
            bool damped = false;
            std::size_t it = 0;
            while (it < options.max_iterations) {
                ++it;
                const long double delta = picard_map(e) - e;
                if (!std::isfinite(static_cast<double>(delta)))
                    throw SolverError(fmt::format("curve {} diverged at t={}", i, grid[m]),
                                      std::numeric_limits<double>::infinity());
                if (it > 1 && delta * prev_delta < 0.0L && std::abs(delta) > 0.5L * std::abs(prev_delta)) {
                    omega *= 0.5L;
                    damped = true;
                }
                long double next = std::clamp(e + omega * delta, e_min, e_max);
                last_step = next - e;
                e = next;
                prev_delta = delta;
                if (std::abs(last_step) <= static_cast<long double>(options.step_tolerance) * std::abs(e)) {
                    converged = true;
                    break;
                }
            }
            if (!converged) {
                const double rel = static_cast<double>(std::abs(last_step) / std::max(std::abs(e), 1e-300L));
                throw SolverError(fmt::format("Picard iteration for curve {} did not converge at t={} after {} "
                                              "iterations (relative step {:.3e})",
                                              i, grid[m], it, rel),
                                  rel);
            }
            report.max_node_iterations = std::max(report.max_node_iterations, it);
            if (e != 0.0L)
                report.max_final_step =
                    std::max(report.max_final_step, static_cast<double>(std::abs(last_step) / std::abs(e)));
            if (damped) ++report.damped_nodes;

            e_cur[m] = e;
            integrand[m] = integrand_at(e, m);
            integral[m] = known + half_dt * integrand[m];
        }

        for (std::size_t m = 0; m <= M; ++m) {
            cumulative[m] += lambda * integral[m];
            revenue[i - 1][m] = static_cast<double>(cumulative[m]);
            curves[i - 1][m] = raise(static_cast<double>(r + e_cur[m]), eta);
        }
    }

    // Ordering and monotonicity, checked on the excess where they are resolvable.
    for (std::size_t i = 1; i <= n_initial; ++i) {
        const auto& e = excess[i - 1];
        for (std::size_t m = 0; m <= M; ++m) {
            if (!(curves[i - 1][m] > 0.0))
                throw SolverError(fmt::format("curve {} is not positive at t={}", i, grid[m]), 0.0);
            if (m < M && e[m] < e[m + 1])
                throw SolverError(fmt::format("curve {} increases between t={} and t={}", i, grid[m], grid[m + 1]),
                                  0.0);
            if (i > 1 && m < M && !(e[m] < excess[i - 2][m]))
                throw SolverError(fmt::format("ordering violated: y_{} >= y_{} at t={}", i, i - 1, grid[m]), 0.0);
        }
    }

    ThresholdTable table(grid, std::move(curves), eta, std::move(excess), static_cast<double>(r));

    for (std::size_t i = 1; i <= n_initial; ++i) {
        const double res = fixed_point_residual(model, table, i);
        report.max_residual = std::max(report.max_residual, res);
        if (!(res <= options.residual_tolerance))
            throw SolverError(fmt::format("fixed-point residual {:.3e} of curve {} exceeds {:.1e}", res, i,
                                          options.residual_tolerance),
                              res);
    }

    return {std::move(table), RevenueCurve(std::move(grid), std::move(revenue)), report};
}

double fixed_point_residual(const ArrivalModel& model, const ThresholdTable& table, std::size_t i) {
    const auto grid = table.grid();
    const std::size_t n = grid.size();
    const double eta = table.eta();
    const double lambda = model.lambda();

    auto tail_integrals = [&](std::size_t k) {
        std::vector<double> out(n, 0.0);
        if (k == 0) return out;
        const auto c = table.curve(k);
        double next = model.squared_survival_over_pdf(root(c[n - 1], eta));
        for (std::size_t m = n - 1; m-- > 0;) {
            const double here = model.squared_survival_over_pdf(root(c[m], eta));
            out[m] = out[m + 1] + 0.5 * (grid[m + 1] - grid[m]) * (here + next);
            next = here;
        }
        return out;
    };

    const auto own = tail_integrals(i);
    const auto prev = tail_integrals(i - 1);
    const auto c = table.curve(i);
    double worst = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        const double yhat = root(c[m], eta);
        const double rhs = raise(model.hazard_inverse(yhat) + lambda * own[m] - lambda * prev[m], eta);
        worst = std::max(worst, std::abs(c[m] - rhs) / std::max(1.0, std::abs(c[m])));
    }
    return worst;
}

// ---------------------------------------------------------------- closed forms

double closed_form_y1_exponential(double t, double lambda, double alpha, double eta, double horizon) {
    const double z = lambda * (horizon - t);
    return std::pow(1.0 / alpha, eta) * std::pow(1.0 + std::log1p(z / std::numbers::e), eta);
}

double closed_form_y2_exponential(double t, double lambda, double alpha, double eta, double horizon) {
    constexpr double e = std::numbers::e;
    const double z = lambda * (horizon - t);
    return std::pow(1.0 / alpha, eta) * std::pow(1.0 + std::log1p(z * z / (2.0 * e * (z + e))), eta);
}

double closed_form_y3_exponential(double t, double lambda, double alpha, double eta, double horizon) {
    constexpr double e = std::numbers::e;
    const double z = lambda * (horizon - t);
    return std::pow(1.0 / alpha, eta) *
           std::pow(1.0 + std::log1p(z * z * z / (3.0 * e * (z * z + 2.0 * e * (z + e)))), eta);
}

double closed_form_y1_uniform(double t, double lambda, double beta, double eta, double horizon) {
    return std::pow(beta, eta) * std::pow(1.0 - 2.0 / (lambda * (horizon - t) + 4.0), eta);
}

// ---------------------------------------------------------------- revenue

double expected_revenue(const ArrivalModel& model, const ThresholdTable& table, std::span<const double> rates,
                        double t) {
    check_sorted_rates(rates);
    if (rates.size() > table.curve_count())
        throw std::invalid_argument("more rates than solved threshold curves");
    const double eta = table.eta();
    double total = 0.0;
    for (std::size_t i = 1; i <= rates.size(); ++i) {
        const double yhat = root(table.threshold_at(i, t), eta);
        total += root(rates[i - 1], eta) * (yhat - model.hazard_inverse(yhat));
    }
    return total;
}

double expected_revenue(const RevenueCurve& revenue, std::span<const double> rates, double eta, double t) {
    check_sorted_rates(rates);
    if (rates.size() > revenue.curve_count())
        throw std::invalid_argument("more rates than solved revenue curves");
    double total = 0.0;
    for (std::size_t i = 1; i <= rates.size(); ++i)
        total += root(rates[i - 1], eta) * (revenue.value_at(i, t) - revenue.value_at(i - 1, t));
    return total;
}

}  // namespace fogalloc
