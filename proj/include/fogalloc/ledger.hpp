#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fogalloc/fog_topology.hpp"

namespace fogalloc {

/// One accepted request. `rank` is the 1-based position of the allocated unit
/// among the units available at the decision; `decision_time` differs from
/// `arrival_time` only for batch strategies (auction windows).
struct AllocationRecord {
    std::uint64_t request_id = 0;
    double arrival_time = 0.0;
    double decision_time = 0.0;
    double x = 0.0;
    std::size_t rank = 0;
    VmiId vmi;
    double rate = 0.0;
    double price = 0.0;
    double qoe = 0.0;
    std::optional<double> released_at;
};

struct Rejection {
    std::uint64_t request_id = 0;
    double arrival_time = 0.0;
    double x = 0.0;
};

using Ledger = std::vector<AllocationRecord>;

struct LedgerTotals {
    double revenue = 0.0;
    double qoe = 0.0;
    std::size_t allocations = 0;
};

inline LedgerTotals totals(const Ledger& ledger) {
    LedgerTotals t;
    for (const auto& r : ledger) {
        t.revenue += r.price;
        t.qoe += r.qoe;
    }
    t.allocations = ledger.size();
    return t;
}

}  // namespace fogalloc
