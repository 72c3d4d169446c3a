#pragma once

#include <span>
#include <string>
#include <string_view>

#include "fogalloc/arrival_model.hpp"
#include "fogalloc/fog_topology.hpp"
#include "fogalloc/ledger.hpp"
#include "fogalloc/random.hpp"

namespace fogalloc {

enum class StrategyKind { optimal, ideal, pessimistic, optimistic, epsilon_greedy, auction };

std::string_view to_string(StrategyKind kind);
/// Accepts "optimal", "ideal", "pessimistic", "optimistic", "epsilon_greedy", "auction".
StrategyKind parse_strategy(std::string_view name);

// Every strategy consumes the arrival stream as given (time-ordered) and the
// full unit pool. Request ids are the 0-based arrival indices.
//
// Prices are a reporting convention for the benchmarks, which are compared on
// QoE: ideal extracts the full QoE, pessimistic/optimistic charge the posted
// price r^(1/eta) * reserve, epsilon-greedy charges nothing and the auction
// winner pays its bid.

/// Clairvoyant assortative matching of the top characteristics to the top rates.
Ledger run_ideal(std::span<const Arrival> arrivals, const SortedRates& units, double eta);

/// Each arrival with x >= reserve^eta takes the best remaining unit.
Ledger run_pessimistic(std::span<const Arrival> arrivals, const SortedRates& units, double reserve_transformed,
                       double eta);

/// Each arrival with x >= reserve^eta takes the worst remaining unit.
Ledger run_optimistic(std::span<const Arrival> arrivals, const SortedRates& units, double reserve_transformed,
                      double eta);

/// Each arrival takes a uniformly random remaining unit with probability epsilon.
Ledger run_epsilon_greedy(std::span<const Arrival> arrivals, const SortedRates& units, double epsilon, double eta,
                          Engine& engine);

/// First-price auction per window [k*period, (k+1)*period) clipped to the
/// horizon: the highest bid takes the best remaining unit at window end.
Ledger run_periodic_auction(std::span<const Arrival> arrivals, const SortedRates& units, double period,
                            double horizon, double eta);

}  // namespace fogalloc
