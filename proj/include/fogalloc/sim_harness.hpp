#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fogalloc/arrival_model.hpp"
#include "fogalloc/benchmark_strategies.hpp"
#include "fogalloc/fog_topology.hpp"
#include "fogalloc/ledger.hpp"
#include "fogalloc/threshold_engine.hpp"

namespace fogalloc {

enum class DelayMode { fixed, sampled };

/// Fog nodes plus the rule for VMI processing delays. Sampled delays are
/// redrawn once per replication.
struct TopologySpec {
    std::vector<double> latency_ms{0.1, 0.2, 0.4, 0.6, 0.8};
    std::vector<std::size_t> vmi_count{20, 20, 20, 20, 20};
    double other_delay_ms = 0.1;
    DelayMode delays = DelayMode::sampled;
    double processing_min_ms = 0.2;
    double processing_max_ms = 1.0;
    /// Fixed mode: a single value for every VMI, or one per VMI in node order.
    std::vector<double> processing_ms;

    std::size_t total_vmis() const;
    std::vector<FogNode> nodes() const;
    /// `engine` is only drawn from in sampled mode.
    FogTopology build(Engine& engine) const;
    void validate() const;
};

enum class SweepAxis { none, lambda, mean };

std::string_view to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view name);

struct ExperimentSpec {
    ArrivalModel model{10.0, ExponentialLaw{1.0}, 1.0};
    TopologySpec topology;
    double horizon = 12.0;
    std::vector<StrategyKind> strategies{StrategyKind::optimal};
    std::size_t replications = 1000;
    std::uint64_t seed = 1;
    double epsilon = 0.5;
    /// Defaults to horizon / 24.
    std::optional<double> auction_period;
    SweepAxis axis = SweepAxis::none;
    std::vector<double> sweep_values;
    SolverOptions solver;
    /// 0 = hardware concurrency.
    unsigned threads = 0;
    /// Grid points of the time-evolution series, including t = 0 and t = T.
    std::size_t evolution_points = 49;

    double effective_auction_period() const { return auction_period.value_or(horizon / 24.0); }
    void validate() const;
};

/// Solver failure at one sweep point.
class SweepPointError : public std::runtime_error {
public:
    SweepPointError(const std::string& what, double value) : std::runtime_error(what), value_(value) {}
    double value() const noexcept { return value_; }

private:
    double value_;
};

/// Arrival model of the experiment at one sweep value. The mean axis rescales the
/// law of the transformed characteristic to the given mean.
ArrivalModel model_at(const ExperimentSpec& spec, double value);

/// Sweep values to run: the configured list, or the base arrival rate when
/// there is no sweep axis.
std::vector<double> sweep_points(const ExperimentSpec& spec);

/// Model and (when the optimal strategy is requested) solved thresholds for
/// one sweep point. The table is shared read-only across replications.
struct PreparedPoint {
    double value = 0.0;
    ArrivalModel model;
    std::shared_ptr<const ThresholdTable> table;
};

PreparedPoint prepare_point(const ExperimentSpec& spec, double value);
/// Reuse an already solved table instead of solving.
PreparedPoint prepare_point(const ExperimentSpec& spec, double value, std::shared_ptr<const ThresholdTable> table);

struct StrategyOutcome {
    StrategyKind kind = StrategyKind::optimal;
    double revenue = 0.0;
    double total_qoe = 0.0;
    std::size_t allocations = 0;
    /// Allocation count and cumulative QoE at each evolution grid time.
    std::vector<double> allocated_at;
    std::vector<double> cum_qoe_at;
};

struct ReplicationOutcome {
    std::size_t arrivals = 0;
    std::vector<StrategyOutcome> strategies;  // in spec.strategies order
};

/// One paired replication: every strategy sees the same arrivals and rates.
/// `evolution_grid` may be empty.
ReplicationOutcome run_replication(const ExperimentSpec& spec, const PreparedPoint& point, std::size_t replication,
                                   std::span<const double> evolution_grid = {});

/// All replications of one point, evaluated on spec.threads workers and
/// returned in replication order.
std::vector<ReplicationOutcome> run_replications(const ExperimentSpec& spec, const PreparedPoint& point,
                                                 std::span<const double> evolution_grid = {});

struct OptimalTrace {
    Ledger ledger;
    std::vector<Rejection> rejections;
};

/// Allocation and rejection records of the optimal policy on one replication.
OptimalTrace optimal_trace(const ExperimentSpec& spec, const PreparedPoint& point, std::size_t replication);

struct Summary {
    double mean = 0.0;
    /// Sample standard deviation / sqrt(count).
    double se = 0.0;
    std::size_t count = 0;
};

Summary summarize(std::span<const double> values);

struct StrategyMetrics {
    StrategyKind kind = StrategyKind::optimal;
    Summary revenue;
    Summary total_qoe;
    /// Total QoE divided by the number of arrivals (serviced or not).
    Summary qoe_per_arrival;
    /// Total QoE divided by the number of allocations, over replications with at least one.
    Summary qoe_per_serviced;
    Summary allocations;
};

struct SweepPoint {
    double value = 0.0;
    std::vector<StrategyMetrics> strategies;
};

struct MetricSeries {
    SweepAxis axis = SweepAxis::none;
    std::vector<SweepPoint> points;
};

std::vector<StrategyMetrics> aggregate(const ExperimentSpec& spec, std::span<const ReplicationOutcome> outcomes);

struct Evolution {
    std::vector<double> grid;
    std::vector<StrategyKind> kinds;
    /// [strategy][grid point]
    std::vector<std::vector<double>> mean_allocated;
    std::vector<std::vector<double>> mean_cum_qoe;
};

/// Uniform grid of `points` times on [0, horizon].
std::vector<double> evolution_grid(double horizon, std::size_t points);

Evolution evolution_from(const ExperimentSpec& spec, std::span<const double> grid,
                         std::span<const ReplicationOutcome> outcomes);

MetricSeries run_experiment(const ExperimentSpec& spec);

/// Mean allocation count and cumulative QoE over time at the base model. The
/// clairvoyant ideal strategy has no online trajectory and is reported as its
/// end-of-horizon totals at every grid time.
Evolution time_evolution(const ExperimentSpec& spec);

struct BarrierPoint {
    double p = 0.0;
    double analytic = 0.0;
    double mc_mean = 0.0;
    /// Sample standard error of the Monte Carlo mean.
    double mc_se = 0.0;
    /// Binomial standard error implied by the analytic qualification probability.
    double null_se = 0.0;
};

/// Expected revenue of one unit-rate VMI sold to the first arrival with
/// x >= p at price p^(1/eta): p^(1/eta) (1 - exp(-lambda T (1 - F(p^(1/eta))))).
double static_barrier_revenue(const ArrivalModel& model, double horizon, double p);

std::vector<BarrierPoint> single_vmi_static_barrier_curve(const ArrivalModel& model, double horizon,
                                                          std::span<const double> barriers,
                                                          std::size_t replications, std::uint64_t seed,
                                                          unsigned threads = 0);

/// Run fn(0..count-1) on up to `threads` workers (0 = hardware concurrency).
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace fogalloc
