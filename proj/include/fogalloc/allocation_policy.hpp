#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "fogalloc/fog_topology.hpp"
#include "fogalloc/ledger.hpp"
#include "fogalloc/threshold_engine.hpp"

namespace fogalloc {

/// Raised for an arrival past the allocation horizon.
class HorizonExpired : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Rank j with x in [y_j(t), y_{j-1}(t)), y_0 = +inf, using the family
/// y_1..y_n of n available units. nullopt means reject (x < y_n(t)).
std::optional<std::size_t> classify(double x, double t, std::size_t n_available, const ThresholdTable& table);

/// Same rule against thresholds already evaluated at t (sorted descending).
std::optional<std::size_t> classify(double x, std::span<const double> family);

struct AvailableUnit {
    double rate = 0.0;
    VmiId id;
};

/// Online allocation and pricing over a fixed unit pool.
///
/// Single writer: events must be fed in nondecreasing time order. The table
/// is shared read-only and must hold at least as many curves as the pool.
class Allocator {
public:
    Allocator(std::shared_ptr<const ThresholdTable> table, const SortedRates& units);

    /// Classify, allocate the rank-j unit and charge the schedule price.
    /// Returns nullopt on reject (including when nothing is available).
    /// Throws HorizonExpired for t > T and std::invalid_argument for t before the clock.
    std::optional<AllocationRecord> process_arrival(std::uint64_t request_id, double x, double t);

    /// Return the unit held by `request_id`. Throws std::invalid_argument for an
    /// unknown or already released id.
    void release(std::uint64_t request_id, double t);

    std::span<const AvailableUnit> available() const noexcept { return available_; }
    std::size_t pool_size() const noexcept { return pool_size_; }
    std::size_t live_allocations() const noexcept { return live_.size(); }
    double clock() const noexcept { return clock_; }
    const Ledger& ledger() const noexcept { return ledger_; }
    const std::vector<Rejection>& rejections() const noexcept { return rejections_; }
    const ThresholdTable& table() const noexcept { return *table_; }

private:
    void advance_clock(double t);

    std::shared_ptr<const ThresholdTable> table_;
    std::vector<AvailableUnit> available_;
    std::size_t pool_size_ = 0;
    double clock_ = 0.0;
    Ledger ledger_;
    std::vector<Rejection> rejections_;
    std::unordered_map<std::uint64_t, std::size_t> live_;  // request id -> ledger index
};

}  // namespace fogalloc
