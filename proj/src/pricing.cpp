#include "fogalloc/pricing.hpp"

#include <cmath>
#include <stdexcept>

namespace fogalloc {

namespace {

double root(double v, double eta) { return eta == 1.0 ? v : std::pow(v, 1.0 / eta); }

}  // namespace

double qoe(double x, double rate, double eta) {
    if (!(x > 0.0) || !(rate > 0.0)) throw std::invalid_argument("QoE needs positive characteristic and rate");
    if (!(eta >= 1.0)) throw std::invalid_argument("QoE exponent eta must be >= 1");
    return root(x * rate, eta);
}

PriceSchedule price_schedule(std::span<const double> rates, std::span<const double> thresholds, double eta) {
    if (rates.size() != thresholds.size())
        throw std::invalid_argument("price schedule needs one threshold per available rate");
    for (std::size_t k = 0; k < rates.size(); ++k) {
        if (!(rates[k] > 0.0)) throw std::invalid_argument("rates must be positive");
        if (!(thresholds[k] >= 0.0)) throw std::invalid_argument("thresholds must be nonnegative");
        if (k > 0 && rates[k] > rates[k - 1]) throw std::invalid_argument("rates must be sorted descending");
        if (k > 0 && thresholds[k] > thresholds[k - 1])
            throw std::invalid_argument("thresholds must be sorted descending");
    }

    PriceSchedule out;
    out.prices.resize(rates.size());
    double running = 0.0;
    double next_rate_root = 0.0;
    for (std::size_t k = rates.size(); k-- > 0;) {
        const double rate_root = root(rates[k], eta);
        running += (rate_root - next_rate_root) * root(thresholds[k], eta);
        out.prices[k] = running;
        next_rate_root = rate_root;
    }
    return out;
}

}  // namespace fogalloc
