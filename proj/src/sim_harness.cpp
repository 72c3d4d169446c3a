#include "fogalloc/sim_harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>

#include "fogalloc/allocation_policy.hpp"

namespace fogalloc {

std::size_t TopologySpec::total_vmis() const {
    std::size_t n = 0;
    for (auto c : vmi_count) n += c;
    return n;
}

std::vector<FogNode> TopologySpec::nodes() const {
    std::vector<FogNode> out;
    out.reserve(latency_ms.size());
    for (std::size_t k = 0; k < latency_ms.size(); ++k)
        out.push_back({static_cast<int>(k + 1), latency_ms[k], vmi_count[k]});
    return out;
}

void TopologySpec::validate() const {
    if (latency_ms.empty()) throw std::invalid_argument("topology needs at least one node");
    if (latency_ms.size() != vmi_count.size())
        throw std::invalid_argument(fmt::format("{} latencies but {} VMI counts", latency_ms.size(), vmi_count.size()));
    if (total_vmis() == 0) throw std::invalid_argument("topology has no VMIs");
    if (delays == DelayMode::sampled) {
        if (!(processing_min_ms > 0.0 && processing_max_ms >= processing_min_ms))
            throw std::invalid_argument("processing delay range must satisfy 0 < min <= max");
    } else if (processing_ms.size() != 1 && processing_ms.size() != total_vmis()) {
        throw std::invalid_argument(fmt::format("fixed processing delays need 1 or {} values, got {}", total_vmis(),
                                                processing_ms.size()));
    }
}

FogTopology TopologySpec::build(Engine& engine) const {
    validate();
    if (delays == DelayMode::sampled)
        return FogTopology::with_sampled_delays(nodes(), other_delay_ms, processing_min_ms, processing_max_ms, engine);
    std::vector<std::vector<double>> per_node;
    std::size_t k = 0;
    for (auto count : vmi_count) {
        auto& d = per_node.emplace_back();
        for (std::size_t v = 0; v < count; ++v, ++k)
            d.push_back(processing_ms.size() == 1 ? processing_ms[0] : processing_ms[k]);
    }
    return FogTopology(nodes(), std::move(per_node), other_delay_ms);
}

std::string_view to_string(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::none:
        return "none";
    case SweepAxis::lambda:
        return "lambda";
    case SweepAxis::mean:
        return "mean";
    }
    return "unknown";
}

SweepAxis parse_sweep_axis(std::string_view name) {
    for (auto a : {SweepAxis::none, SweepAxis::lambda, SweepAxis::mean})
        if (to_string(a) == name) return a;
    throw std::invalid_argument(fmt::format("unknown sweep axis '{}'", name));
}

void ExperimentSpec::validate() const {
    topology.validate();
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (replications < 1) throw std::invalid_argument("replications must be at least 1");
    if (strategies.empty()) throw std::invalid_argument("no strategies selected");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
    const double period = effective_auction_period();
    if (!(period > 0.0 && period <= horizon))
        throw std::invalid_argument("auction period must lie in (0, horizon]");
    if (axis != SweepAxis::none) {
        if (sweep_values.empty()) throw std::invalid_argument("sweep axis set but no sweep values");
        for (double v : sweep_values)
            if (!(v > 0.0)) throw std::invalid_argument(fmt::format("sweep value {} must be positive", v));
    }
    if (evolution_points < 2) throw std::invalid_argument("evolution grid needs at least 2 points");
}

ArrivalModel model_at(const ExperimentSpec& spec, double value) {
    switch (spec.axis) {
    case SweepAxis::none:
        return spec.model;
    case SweepAxis::lambda:
        return spec.model.with_lambda(value);
    case SweepAxis::mean:
        return std::visit(
            [&](const auto& law) -> ArrivalModel {
                using L = std::decay_t<decltype(law)>;
                if constexpr (std::is_same_v<L, ExponentialLaw>)
                    return spec.model.with_law(ExponentialLaw{1.0 / value});
                else if constexpr (std::is_same_v<L, UniformLaw>)
                    return spec.model.with_law(UniformLaw{2.0 * value});
                else
                    throw std::invalid_argument("mean sweep is only defined for the built-in laws");
            },
            spec.model.law());
    }
    return spec.model;
}

std::vector<double> sweep_points(const ExperimentSpec& spec) {
    if (spec.axis == SweepAxis::none) return {spec.model.lambda()};
    return spec.sweep_values;
}

namespace {

bool wants(const ExperimentSpec& spec, StrategyKind kind) {
    return std::find(spec.strategies.begin(), spec.strategies.end(), kind) != spec.strategies.end();
}

Ledger run_optimal(std::span<const Arrival> arrivals, const SortedRates& units,
                   const std::shared_ptr<const ThresholdTable>& table) {
    Allocator alloc(table, units);
    for (std::size_t k = 0; k < arrivals.size(); ++k) alloc.process_arrival(k, arrivals[k].x, arrivals[k].time);
    return alloc.ledger();
}

}  // namespace

PreparedPoint prepare_point(const ExperimentSpec& spec, double value) {
    PreparedPoint point{value, model_at(spec, value), nullptr};
    if (!wants(spec, StrategyKind::optimal)) return point;
    try {
        auto sol = solve_thresholds(point.model, spec.topology.total_vmis(), spec.horizon, spec.solver);
        point.table = std::make_shared<const ThresholdTable>(std::move(sol.table));
    } catch (const SolverError& e) {
        throw SweepPointError(fmt::format("threshold solve failed at {} = {}: {}", to_string(spec.axis), value,
                                          e.what()),
                              value);
    }
    return point;
}

PreparedPoint prepare_point(const ExperimentSpec& spec, double value, std::shared_ptr<const ThresholdTable> table) {
    PreparedPoint point{value, model_at(spec, value), std::move(table)};
    if (wants(spec, StrategyKind::optimal)) {
        if (!point.table) throw std::invalid_argument("optimal strategy needs a threshold table");
        if (point.table->curve_count() < spec.topology.total_vmis())
            throw std::invalid_argument(fmt::format("threshold table has {} curves for {} VMIs",
                                                    point.table->curve_count(), spec.topology.total_vmis()));
        if (std::abs(point.table->horizon() - spec.horizon) > 1e-9 * spec.horizon)
            throw std::invalid_argument("threshold table horizon differs from the experiment horizon");
    }
    return point;
}

ReplicationOutcome run_replication(const ExperimentSpec& spec, const PreparedPoint& point, std::size_t replication,
                                   std::span<const double> evolution_grid) {
    Engine arrival_engine = derive_engine(spec.seed, replication, StreamTag::arrivals);
    Engine delay_engine = derive_engine(spec.seed, replication, StreamTag::processing_delays);
    const auto arrivals = point.model.sample_arrivals(spec.horizon, arrival_engine);
    const SortedRates units = sort_and_map(spec.topology.build(delay_engine));
    const double eta = point.model.eta();
    const double reserve = point.model.reserve();

    ReplicationOutcome out;
    out.arrivals = arrivals.size();
    for (auto kind : spec.strategies) {
        Ledger ledger;
        switch (kind) {
        case StrategyKind::optimal:
            ledger = run_optimal(arrivals, units, point.table);
            break;
        case StrategyKind::ideal:
            ledger = run_ideal(arrivals, units, eta);
            break;
        case StrategyKind::pessimistic:
            ledger = run_pessimistic(arrivals, units, reserve, eta);
            break;
        case StrategyKind::optimistic:
            ledger = run_optimistic(arrivals, units, reserve, eta);
            break;
        case StrategyKind::epsilon_greedy: {
            Engine e = derive_engine(spec.seed, replication, StreamTag::epsilon_greedy);
            ledger = run_epsilon_greedy(arrivals, units, spec.epsilon, eta, e);
            break;
        }
        case StrategyKind::auction:
            ledger = run_periodic_auction(arrivals, units, spec.effective_auction_period(), spec.horizon, eta);
            break;
        }

        StrategyOutcome s;
        s.kind = kind;
        const auto tot = totals(ledger);
        s.revenue = tot.revenue;
        s.total_qoe = tot.qoe;
        s.allocations = tot.allocations;
        if (!evolution_grid.empty()) {
            s.allocated_at.assign(evolution_grid.size(), 0.0);
            s.cum_qoe_at.assign(evolution_grid.size(), 0.0);
            if (kind == StrategyKind::ideal) {
                std::fill(s.allocated_at.begin(), s.allocated_at.end(), static_cast<double>(tot.allocations));
                std::fill(s.cum_qoe_at.begin(), s.cum_qoe_at.end(), tot.qoe);
            } else {
                std::vector<std::pair<double, double>> events;
                events.reserve(ledger.size());
                for (const auto& r : ledger) events.emplace_back(r.decision_time, r.qoe);
                std::sort(events.begin(), events.end());
                std::size_t e = 0;
                double count = 0.0;
                double cum = 0.0;
                for (std::size_t k = 0; k < evolution_grid.size(); ++k) {
                    for (; e < events.size() && events[e].first <= evolution_grid[k]; ++e) {
                        count += 1.0;
                        cum += events[e].second;
                    }
                    s.allocated_at[k] = count;
                    s.cum_qoe_at[k] = cum;
                }
            }
        }
        out.strategies.push_back(std::move(s));
    }
    return out;
}

OptimalTrace optimal_trace(const ExperimentSpec& spec, const PreparedPoint& point, std::size_t replication) {
    if (!point.table) throw std::invalid_argument("optimal trace needs a threshold table");
    Engine arrival_engine = derive_engine(spec.seed, replication, StreamTag::arrivals);
    Engine delay_engine = derive_engine(spec.seed, replication, StreamTag::processing_delays);
    const auto arrivals = point.model.sample_arrivals(spec.horizon, arrival_engine);
    Allocator alloc(point.table, sort_and_map(spec.topology.build(delay_engine)));
    for (std::size_t k = 0; k < arrivals.size(); ++k) alloc.process_arrival(k, arrivals[k].x, arrivals[k].time);
    return {alloc.ledger(), alloc.rejections()};
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next = count;
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

std::vector<ReplicationOutcome> run_replications(const ExperimentSpec& spec, const PreparedPoint& point,
                                                 std::span<const double> evolution_grid) {
    std::vector<ReplicationOutcome> out(spec.replications);
    parallel_for(spec.replications, spec.threads,
                 [&](std::size_t rep) { out[rep] = run_replication(spec, point, rep, evolution_grid); });
    return out;
}

Summary summarize(std::span<const double> values) {
    Summary s;
    s.count = values.size();
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        const double n = static_cast<double>(values.size());
        s.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return s;
}

std::vector<StrategyMetrics> aggregate(const ExperimentSpec& spec, std::span<const ReplicationOutcome> outcomes) {
    std::vector<StrategyMetrics> out;
    for (std::size_t k = 0; k < spec.strategies.size(); ++k) {
        std::vector<double> revenue, qoe, per_arrival, per_serviced, allocations;
        for (const auto& rep : outcomes) {
            const auto& s = rep.strategies.at(k);
            revenue.push_back(s.revenue);
            qoe.push_back(s.total_qoe);
            per_arrival.push_back(rep.arrivals == 0 ? 0.0 : s.total_qoe / static_cast<double>(rep.arrivals));
            if (s.allocations > 0) per_serviced.push_back(s.total_qoe / static_cast<double>(s.allocations));
            allocations.push_back(static_cast<double>(s.allocations));
        }
        StrategyMetrics m;
        m.kind = spec.strategies[k];
        m.revenue = summarize(revenue);
        m.total_qoe = summarize(qoe);
        m.qoe_per_arrival = summarize(per_arrival);
        m.qoe_per_serviced = summarize(per_serviced);
        m.allocations = summarize(allocations);
        out.push_back(m);
    }
    return out;
}

std::vector<double> evolution_grid(double horizon, std::size_t points) {
    std::vector<double> grid(points);
    for (std::size_t k = 0; k < points; ++k)
        grid[k] = k + 1 == points ? horizon : horizon * static_cast<double>(k) / static_cast<double>(points - 1);
    return grid;
}

Evolution evolution_from(const ExperimentSpec& spec, std::span<const double> grid,
                         std::span<const ReplicationOutcome> outcomes) {
    Evolution ev;
    ev.grid.assign(grid.begin(), grid.end());
    ev.kinds = spec.strategies;
    const double n = static_cast<double>(outcomes.size());
    for (std::size_t k = 0; k < spec.strategies.size(); ++k) {
        std::vector<double> alloc(grid.size(), 0.0);
        std::vector<double> cum(grid.size(), 0.0);
        for (const auto& rep : outcomes) {
            const auto& s = rep.strategies.at(k);
            for (std::size_t g = 0; g < grid.size(); ++g) {
                alloc[g] += s.allocated_at.at(g);
                cum[g] += s.cum_qoe_at.at(g);
            }
        }
        for (std::size_t g = 0; g < grid.size(); ++g) {
            alloc[g] /= n;
            cum[g] /= n;
        }
        ev.mean_allocated.push_back(std::move(alloc));
        ev.mean_cum_qoe.push_back(std::move(cum));
    }
    return ev;
}

MetricSeries run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    MetricSeries series;
    series.axis = spec.axis;
    for (double value : sweep_points(spec)) {
        const PreparedPoint point = prepare_point(spec, value);
        const auto outcomes = run_replications(spec, point);
        series.points.push_back({value, aggregate(spec, outcomes)});
    }
    return series;
}

Evolution time_evolution(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentSpec base = spec;
    base.axis = SweepAxis::none;
    base.sweep_values.clear();
    const auto grid = evolution_grid(base.horizon, base.evolution_points);
    const PreparedPoint point = prepare_point(base, base.model.lambda());
    const auto outcomes = run_replications(base, point, grid);
    return evolution_from(base, grid, outcomes);
}

double static_barrier_revenue(const ArrivalModel& model, double horizon, double p) {
    if (!(p > 0.0)) throw std::invalid_argument("barrier must be positive");
    const double phat = model.eta() == 1.0 ? p : std::pow(p, 1.0 / model.eta());
    const double tail = model.in_support(phat) ? model.survival(phat) : (phat < model.support_min() ? 1.0 : 0.0);
    return phat * -std::expm1(-model.lambda() * horizon * tail);
}

std::vector<BarrierPoint> single_vmi_static_barrier_curve(const ArrivalModel& model, double horizon,
                                                          std::span<const double> barriers,
                                                          std::size_t replications, std::uint64_t seed,
                                                          unsigned threads) {
    if (replications < 1) throw std::invalid_argument("replications must be at least 1");
    for (double p : barriers)
        if (!(p > 0.0)) throw std::invalid_argument("barrier grid must be positive");

    // The first arrival with x >= p exists iff the stream maximum reaches p,
    // so one maximum per replication serves every barrier.
    std::vector<double> max_x(replications, 0.0);
    parallel_for(replications, threads, [&](std::size_t rep) {
        Engine e = derive_engine(seed, rep, StreamTag::barrier);
        double m = 0.0;
        for (const auto& a : model.sample_arrivals(horizon, e)) m = std::max(m, a.x);
        max_x[rep] = m;
    });

    const double n = static_cast<double>(replications);
    std::vector<BarrierPoint> out;
    out.reserve(barriers.size());
    std::vector<double> revenue(replications);
    for (double p : barriers) {
        const double price = model.eta() == 1.0 ? p : std::pow(p, 1.0 / model.eta());
        for (std::size_t rep = 0; rep < replications; ++rep) revenue[rep] = max_x[rep] >= p ? price : 0.0;
        const Summary s = summarize(revenue);
        BarrierPoint bp;
        bp.p = p;
        bp.analytic = static_barrier_revenue(model, horizon, p);
        bp.mc_mean = s.mean;
        bp.mc_se = s.se;
        const double q = bp.analytic / price;
        bp.null_se = price * std::sqrt(q * (1.0 - q) / n);
        out.push_back(bp);
    }
    return out;
}

}  // namespace fogalloc
