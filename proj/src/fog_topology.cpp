#include "fogalloc/fog_topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fogalloc {

FogTopology::FogTopology(std::vector<FogNode> nodes, std::vector<std::vector<double>> processing_delays_ms,
                         double other_delay_ms)
    : nodes_(std::move(nodes)), delays_(std::move(processing_delays_ms)), other_delay_ms_(other_delay_ms) {
    if (nodes_.empty()) throw std::invalid_argument("topology has no fog nodes");
    if (delays_.size() != nodes_.size())
        throw std::invalid_argument("processing delays must be given for every node");
    if (!(other_delay_ms_ > 0.0)) throw std::invalid_argument("other delay must be positive");
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        const auto& node = nodes_[k];
        if (!(node.latency_ms > 0.0))
            throw std::invalid_argument("node " + std::to_string(node.id) + " has a nonpositive latency");
        if (delays_[k].size() != node.vmi_count)
            throw std::invalid_argument("node " + std::to_string(node.id) + " declares " +
                                        std::to_string(node.vmi_count) + " VMIs but has " +
                                        std::to_string(delays_[k].size()) + " processing delays");
        for (double d : delays_[k])
            if (!(d > 0.0))
                throw std::invalid_argument("node " + std::to_string(node.id) + " has a nonpositive processing delay");
        for (std::size_t j = 0; j < k; ++j)
            if (nodes_[j].id == node.id) throw std::invalid_argument("duplicate node id " + std::to_string(node.id));
        total_ += node.vmi_count;
    }
}

FogTopology FogTopology::with_sampled_delays(std::vector<FogNode> nodes, double other_delay_ms, double lo_ms,
                                             double hi_ms, Engine& engine) {
    if (!(lo_ms > 0.0 && hi_ms >= lo_ms)) throw std::invalid_argument("processing delay bounds must satisfy 0 < lo <= hi");
    std::vector<std::vector<double>> delays;
    delays.reserve(nodes.size());
    for (const auto& node : nodes) {
        std::vector<double> d(node.vmi_count);
        for (auto& v : d) v = lo_ms + (hi_ms - lo_ms) * uniform_open(engine);
        delays.push_back(std::move(d));
    }
    return {std::move(nodes), std::move(delays), other_delay_ms};
}

double response_rate(double latency_ms, double processing_ms, double other_ms) {
    if (!(latency_ms > 0.0) || !(processing_ms > 0.0) || !(other_ms > 0.0))
        throw std::invalid_argument("delays must be positive");
    return 1.0 / (latency_ms + processing_ms + other_ms);
}

SortedRates sort_and_map(const FogTopology& topology) {
    struct Entry {
        double rate;
        VmiId id;
    };
    std::vector<Entry> entries;
    entries.reserve(topology.total_vmis());
    const auto& nodes = topology.nodes();
    for (std::size_t k = 0; k < nodes.size(); ++k)
        for (std::size_t j = 0; j < nodes[k].vmi_count; ++j)
            entries.push_back({response_rate(nodes[k].latency_ms, topology.processing_delays_ms()[k][j],
                                             topology.other_delay_ms()),
                               VmiId{nodes[k].id, j + 1}});

    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.rate != b.rate) return a.rate > b.rate;
        return a.id < b.id;
    });

    SortedRates out;
    out.rates.reserve(entries.size());
    out.mapping.reserve(entries.size());
    for (const auto& e : entries) {
        out.rates.push_back(e.rate);
        out.mapping.push_back(e.id);
    }
    return out;
}

}  // namespace fogalloc
