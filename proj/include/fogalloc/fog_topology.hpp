#pragma once

#include <cstddef>
#include <vector>

#include "fogalloc/random.hpp"

namespace fogalloc {

struct FogNode {
    int id = 0;
    double latency_ms = 0.0;
    std::size_t vmi_count = 0;
};

/// (node id, 1-based VMI index within the node).
struct VmiId {
    int node = 0;
    std::size_t vmi = 0;
    friend bool operator==(const VmiId&, const VmiId&) = default;
    friend auto operator<=>(const VmiId&, const VmiId&) = default;
};

/// Fog nodes with per-VMI processing delays (ms) and a shared other delay
/// (air interface and transmission, ms).
class FogTopology {
public:
    FogTopology(std::vector<FogNode> nodes, std::vector<std::vector<double>> processing_delays_ms,
                double other_delay_ms);

    /// Processing delays drawn i.i.d. uniform on [lo, hi] ms.
    static FogTopology with_sampled_delays(std::vector<FogNode> nodes, double other_delay_ms, double lo_ms,
                                           double hi_ms, Engine& engine);

    const std::vector<FogNode>& nodes() const noexcept { return nodes_; }
    const std::vector<std::vector<double>>& processing_delays_ms() const noexcept { return delays_; }
    double other_delay_ms() const noexcept { return other_delay_ms_; }
    std::size_t total_vmis() const noexcept { return total_; }

private:
    std::vector<FogNode> nodes_;
    std::vector<std::vector<double>> delays_;
    double other_delay_ms_;
    std::size_t total_ = 0;
};

/// Response rates sorted descending with the mapping from sorted index back to
/// the VMI identity. rates[n] belongs to mapping[n].
struct SortedRates {
    std::vector<double> rates;
    std::vector<VmiId> mapping;

    std::size_t size() const noexcept { return rates.size(); }
};

/// 1 / (latency + processing + other), per ms. Throws on a nonpositive delay.
double response_rate(double latency_ms, double processing_ms, double other_ms);

/// Sort all VMIs by response rate, ties broken by (node id, VMI index).
SortedRates sort_and_map(const FogTopology& topology);

}  // namespace fogalloc
