#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fogalloc {

/// Quality of experience (x * r)^(1/eta). Throws on nonpositive x or r.
double qoe(double x, double rate, double eta);

/// Prices P_1 >= ... >= P_n for the n currently available units, in QoE units.
struct PriceSchedule {
    std::vector<double> prices;

    /// Price of rank j (1-based).
    double at(std::size_t rank) const { return prices.at(rank - 1); }
    std::size_t size() const noexcept { return prices.size(); }
};

/// Displaced-value prices
///   P_j = sum_{i=j}^{n} (r_i^(1/eta) - r_{i+1}^(1/eta)) y_i^(1/eta),  r_{n+1} = 0,
/// evaluated by the backward recursion P_j = P_{j+1} + (r_j^(1/eta) - r_{j+1}^(1/eta)) y_j^(1/eta).
/// `rates` and `thresholds` (raw units, at the decision time) must be sorted
/// descending and of equal length.
PriceSchedule price_schedule(std::span<const double> rates, std::span<const double> thresholds, double eta);

}  // namespace fogalloc
