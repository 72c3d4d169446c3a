#include "fogalloc/benchmark_strategies.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fogalloc/pricing.hpp"

namespace fogalloc {

namespace {

double root(double v, double eta) { return eta == 1.0 ? v : std::pow(v, 1.0 / eta); }

AllocationRecord make_record(std::size_t index, const Arrival& a, double decided, std::size_t rank, double rate,
                             const VmiId& id, double price, double eta) {
    AllocationRecord rec;
    rec.request_id = index;
    rec.arrival_time = a.time;
    rec.decision_time = decided;
    rec.x = a.x;
    rec.rank = rank;
    rec.vmi = id;
    rec.rate = rate;
    rec.price = price;
    rec.qoe = qoe(a.x, rate, eta);
    return rec;
}

Ledger run_static(std::span<const Arrival> arrivals, const SortedRates& units, double reserve_transformed,
                  double eta, bool best_first) {
    const double bar = eta == 1.0 ? reserve_transformed : std::pow(reserve_transformed, eta);
    Ledger out;
    // Units are consumed from one end; `lo`/`hi` bracket the remaining ones.
    std::size_t lo = 0;
    std::size_t hi = units.size();
    for (std::size_t k = 0; k < arrivals.size() && lo < hi; ++k) {
        const auto& a = arrivals[k];
        if (!(a.x >= bar)) continue;
        const std::size_t pick = best_first ? lo++ : --hi;
        const std::size_t rank = best_first ? 1 : hi - lo + 1;
        const double rate = units.rates[pick];
        out.push_back(make_record(k, a, a.time, rank, rate, units.mapping[pick],
                                  root(rate, eta) * reserve_transformed, eta));
    }
    return out;
}

}  // namespace

std::string_view to_string(StrategyKind kind) {
    switch (kind) {
    case StrategyKind::optimal:
        return "optimal";
    case StrategyKind::ideal:
        return "ideal";
    case StrategyKind::pessimistic:
        return "pessimistic";
    case StrategyKind::optimistic:
        return "optimistic";
    case StrategyKind::epsilon_greedy:
        return "epsilon_greedy";
    case StrategyKind::auction:
        return "auction";
    }
    return "unknown";
}

StrategyKind parse_strategy(std::string_view name) {
    for (auto k : {StrategyKind::optimal, StrategyKind::ideal, StrategyKind::pessimistic, StrategyKind::optimistic,
                   StrategyKind::epsilon_greedy, StrategyKind::auction})
        if (to_string(k) == name) return k;
    throw std::invalid_argument(fmt::format("unknown strategy '{}'", name));
}

Ledger run_ideal(std::span<const Arrival> arrivals, const SortedRates& units, double eta) {
    std::vector<std::size_t> order(arrivals.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Largest x first; earlier arrival wins ties.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return arrivals[a].x > arrivals[b].x; });
    const std::size_t n = std::min(order.size(), units.size());
    Ledger out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& a = arrivals[order[k]];
        const double rate = units.rates[k];
        const double q = qoe(a.x, rate, eta);
        out.push_back(make_record(order[k], a, a.time, k + 1, rate, units.mapping[k], q, eta));
    }
    std::sort(out.begin(), out.end(),
              [](const AllocationRecord& a, const AllocationRecord& b) { return a.request_id < b.request_id; });
    return out;
}

Ledger run_pessimistic(std::span<const Arrival> arrivals, const SortedRates& units, double reserve_transformed,
                       double eta) {
    return run_static(arrivals, units, reserve_transformed, eta, true);
}

Ledger run_optimistic(std::span<const Arrival> arrivals, const SortedRates& units, double reserve_transformed,
                      double eta) {
    return run_static(arrivals, units, reserve_transformed, eta, false);
}

Ledger run_epsilon_greedy(std::span<const Arrival> arrivals, const SortedRates& units, double epsilon, double eta,
                          Engine& engine) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
    std::vector<std::size_t> remaining(units.size());
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});
    Ledger out;
    for (std::size_t k = 0; k < arrivals.size() && !remaining.empty(); ++k) {
        if (!(uniform_open(engine) < epsilon)) continue;
        const auto pick = static_cast<std::size_t>(uniform_open(engine) * static_cast<double>(remaining.size()));
        const std::size_t slot = std::min(pick, remaining.size() - 1);
        const std::size_t unit = remaining[slot];
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(slot));
        const auto& a = arrivals[k];
        out.push_back(make_record(k, a, a.time, slot + 1, units.rates[unit], units.mapping[unit], 0.0, eta));
    }
    return out;
}

Ledger run_periodic_auction(std::span<const Arrival> arrivals, const SortedRates& units, double period,
                            double horizon, double eta) {
    if (!(period > 0.0)) throw std::invalid_argument("auction period must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    const auto windows = static_cast<std::size_t>(std::ceil(horizon / period - 1e-9));
    Ledger out;
    std::size_t next_unit = 0;
    std::size_t k = 0;
    for (std::size_t w = 0; w < windows && next_unit < units.size(); ++w) {
        const double end = w + 1 == windows ? horizon : std::min(horizon, static_cast<double>(w + 1) * period);
        std::optional<std::size_t> best;
        for (; k < arrivals.size() && (arrivals[k].time < end || (w + 1 == windows && arrivals[k].time <= end)); ++k)
            if (!best || arrivals[k].x > arrivals[*best].x) best = k;
        if (!best) continue;
        const auto& a = arrivals[*best];
        out.push_back(make_record(*best, a, end, 1, units.rates[next_unit], units.mapping[next_unit], a.x, eta));
        ++next_unit;
    }
    return out;
}

}  // namespace fogalloc
