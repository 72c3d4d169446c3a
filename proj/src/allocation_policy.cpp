#include "fogalloc/allocation_policy.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "fogalloc/pricing.hpp"

namespace fogalloc {

namespace {

bool unit_before(const AvailableUnit& a, const AvailableUnit& b) {
    if (a.rate != b.rate) return a.rate > b.rate;
    return a.id < b.id;
}

}  // namespace

std::optional<std::size_t> classify(double x, std::span<const double> family) {
    // Smallest j with x >= y_j. Intervals are closed below.
    for (std::size_t j = 0; j < family.size(); ++j)
        if (x >= family[j]) return j + 1;
    return std::nullopt;
}

std::optional<std::size_t> classify(double x, double t, std::size_t n_available, const ThresholdTable& table) {
    if (n_available == 0) return std::nullopt;
    return classify(x, table.family_at(n_available, t));
}

Allocator::Allocator(std::shared_ptr<const ThresholdTable> table, const SortedRates& units)
    : table_(std::move(table)), pool_size_(units.size()) {
    if (!table_) throw std::invalid_argument("allocator needs a threshold table");
    if (units.rates.size() != units.mapping.size()) throw std::invalid_argument("rates and mapping differ in length");
    if (units.size() > table_->curve_count())
        throw std::invalid_argument(fmt::format("pool of {} units exceeds the {} solved threshold curves",
                                                units.size(), table_->curve_count()));
    available_.reserve(units.size());
    for (std::size_t n = 0; n < units.size(); ++n) {
        if (n > 0 && units.rates[n] > units.rates[n - 1])
            throw std::invalid_argument("unit rates must be sorted descending");
        available_.push_back({units.rates[n], units.mapping[n]});
    }
}

void Allocator::advance_clock(double t) {
    if (t < clock_) throw std::invalid_argument(fmt::format("event at t={} precedes the clock t={}", t, clock_));
    clock_ = t;
}

std::optional<AllocationRecord> Allocator::process_arrival(std::uint64_t request_id, double x, double t) {
    if (t > table_->horizon())
        throw HorizonExpired(fmt::format("arrival at t={} after the horizon T={}", t, table_->horizon()));
    if (live_.contains(request_id))
        throw std::invalid_argument(fmt::format("request {} already holds a unit", request_id));
    advance_clock(t);

    const std::size_t n = available_.size();
    std::optional<std::size_t> rank;
    std::vector<double> family;
    if (n > 0) {
        family = table_->family_at(n, t);
        rank = classify(x, family);
    }
    if (!rank) {
        rejections_.push_back({request_id, t, x});
        return std::nullopt;
    }

    std::vector<double> rates(n);
    for (std::size_t k = 0; k < n; ++k) rates[k] = available_[k].rate;
    const PriceSchedule prices = price_schedule(rates, family, table_->eta());

    const std::size_t j = *rank;
    const AvailableUnit unit = available_[j - 1];
    AllocationRecord rec;
    rec.request_id = request_id;
    rec.arrival_time = t;
    rec.decision_time = t;
    rec.x = x;
    rec.rank = j;
    rec.vmi = unit.id;
    rec.rate = unit.rate;
    rec.price = prices.at(j);
    rec.qoe = qoe(x, unit.rate, table_->eta());

    available_.erase(available_.begin() + static_cast<std::ptrdiff_t>(j - 1));
    live_.emplace(request_id, ledger_.size());
    ledger_.push_back(rec);
    return rec;
}

void Allocator::release(std::uint64_t request_id, double t) {
    auto it = live_.find(request_id);
    if (it == live_.end())
        throw std::invalid_argument(fmt::format("request {} holds no live allocation", request_id));
    advance_clock(t);
    AllocationRecord& rec = ledger_[it->second];
    rec.released_at = t;
    const AvailableUnit unit{rec.rate, rec.vmi};
    available_.insert(std::upper_bound(available_.begin(), available_.end(), unit, unit_before), unit);
    live_.erase(it);
}

}  // namespace fogalloc
