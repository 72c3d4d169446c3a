#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fogalloc/benchmark_strategies.hpp"
#include "fogalloc/pricing.hpp"

using namespace fogalloc;

namespace {

SortedRates units_of(std::vector<double> rates) {
    SortedRates s;
    s.rates = std::move(rates);
    for (std::size_t k = 0; k < s.rates.size(); ++k) s.mapping.push_back({1, k + 1});
    return s;
}

std::vector<Arrival> stream(std::initializer_list<double> xs, double dt = 1.0) {
    std::vector<Arrival> a;
    double t = 0.0;
    for (double x : xs) a.push_back({t += dt, x});
    return a;
}

// Best total QoE over every injective assignment of arrivals to units.
double brute_force_best(const std::vector<Arrival>& arrivals, const std::vector<double>& rates, double eta) {
    const std::size_t n = arrivals.size();
    std::vector<int> slot(n, -1);
    double best = 0.0;
    std::vector<bool> used(rates.size(), false);
    auto rec = [&](auto&& self, std::size_t k, double acc) -> void {
        if (k == n) {
            best = std::max(best, acc);
            return;
        }
        self(self, k + 1, acc);
        for (std::size_t u = 0; u < rates.size(); ++u) {
            if (used[u]) continue;
            used[u] = true;
            self(self, k + 1, acc + std::pow(arrivals[k].x * rates[u], 1.0 / eta));
            used[u] = false;
        }
    };
    rec(rec, 0, 0.0);
    return best;
}

}  // namespace

TEST_CASE("strategy names") {
    for (auto k : {StrategyKind::optimal, StrategyKind::ideal, StrategyKind::pessimistic, StrategyKind::optimistic,
                   StrategyKind::epsilon_greedy, StrategyKind::auction})
        CHECK(parse_strategy(to_string(k)) == k);
    CHECK_THROWS_AS(parse_strategy("greedy"), std::invalid_argument);
}

TEST_CASE("ideal assignment") {
    const auto arrivals = stream({3, 1, 2});
    const auto led = run_ideal(arrivals, units_of({10, 5}), 1.0);
    REQUIRE(led.size() == 2);
    CHECK(totals(led).qoe == doctest::Approx(40.0));
    CHECK(brute_force_best(arrivals, {10, 5}, 1.0) == doctest::Approx(40.0));
    CHECK(led[0].x == 3.0);
    CHECK(led[0].rate == 10.0);
    CHECK(led[1].x == 2.0);
    CHECK(led[1].rate == 5.0);

    const auto few = run_ideal(stream({0.5, 0.1}), units_of({3, 2, 1}), 1.0);
    CHECK(few.size() == 2);

    const auto same = run_ideal(stream({2, 2, 2}), units_of({4, 1}), 1.0);
    CHECK(totals(same).qoe == doctest::Approx(10.0));

    // Random small cases against the enumeration oracle.
    Engine e(17);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Arrival> arr;
        const int n = 1 + static_cast<int>(uniform_open(e) * 6);
        for (int k = 0; k < n; ++k) arr.push_back({static_cast<double>(k), 0.1 + 5.0 * uniform_open(e)});
        std::vector<double> r;
        const int m = 1 + static_cast<int>(uniform_open(e) * 4);
        for (int k = 0; k < m; ++k) r.push_back(0.5 + 2.0 * uniform_open(e));
        std::sort(r.begin(), r.end(), std::greater<>());
        const double eta = trial % 2 ? 1.0 : 2.0;
        CHECK(totals(run_ideal(arr, units_of(r), eta)).qoe ==
              doctest::Approx(brute_force_best(arr, r, eta)).epsilon(1e-12));
    }
}

TEST_CASE("pessimistic and optimistic") {
    const auto units = units_of({5, 3, 1});
    const auto arrivals = stream({2, 0.5, 4, 3, 9});

    const auto pess = run_pessimistic(arrivals, units, 1.0, 1.0);
    REQUIRE(pess.size() == 3);
    CHECK(pess[0].rate == 5);
    CHECK(pess[0].rank == 1);
    CHECK(pess[1].rate == 3);
    CHECK(pess[2].rate == 1);
    CHECK(pess[0].x == 2);
    CHECK(pess[1].x == 4);
    CHECK(pess[2].x == 3);
    CHECK(pess[0].price == doctest::Approx(5.0));

    const auto opt = run_optimistic(arrivals, units, 1.0, 1.0);
    REQUIRE(opt.size() == 3);
    CHECK(opt[0].rate == 1);
    CHECK(opt[0].rank == 3);
    CHECK(opt[1].rate == 3);
    CHECK(opt[2].rate == 5);

    CHECK(run_pessimistic(stream({0.2, 0.9}), units, 1.0, 1.0).empty());
    CHECK(run_optimistic(stream({0.2, 0.9}), units, 1.0, 1.0).empty());

    // eta = 2: bar at reserve^2.
    CHECK(run_pessimistic(stream({3.9, 4.0}), units, 2.0, 2.0).size() == 1);
}

TEST_CASE("epsilon greedy") {
    const auto units = units_of({4, 3, 2, 1});
    const auto arrivals = stream({1, 1, 1, 1, 1, 1});
    Engine e1(1);
    const auto all = run_epsilon_greedy(arrivals, units, 1.0, 1.0, e1);
    REQUIRE(all.size() == 4);
    std::vector<double> taken;
    for (const auto& r : all) {
        taken.push_back(r.rate);
        CHECK(r.price == 0.0);
    }
    std::sort(taken.begin(), taken.end());
    CHECK(taken == std::vector<double>{1, 2, 3, 4});
    for (std::size_t k = 0; k < 4; ++k) CHECK(all[k].request_id == k);

    Engine e0(1);
    CHECK(run_epsilon_greedy(arrivals, units, 0.0, 1.0, e0).empty());
    CHECK_THROWS_AS(run_epsilon_greedy(arrivals, units, 1.5, 1.0, e0), std::invalid_argument);

    // Acceptance fraction while units remain.
    const auto big = units_of(std::vector<double>(1000, 1.0));
    std::vector<Arrival> many;
    for (int k = 0; k < 400; ++k) many.push_back({0.01 * k, 1.0});
    double accepted = 0.0;
    const int streams = 200;
    for (int s = 0; s < streams; ++s) {
        Engine e(derive_seed(5, s, StreamTag::epsilon_greedy));
        accepted += static_cast<double>(run_epsilon_greedy(many, big, 0.5, 1.0, e).size());
    }
    const double trials = 400.0 * streams;
    const double frac = accepted / trials;
    CHECK(std::abs(frac - 0.5) <= 3.0 * std::sqrt(0.25 / trials));
}

TEST_CASE("periodic auction") {
    const auto units = units_of({5, 3});
    std::vector<Arrival> bids{{0.1, 2}, {0.2, 5}, {0.3, 3}};
    const auto one = run_periodic_auction(bids, units, 1.0, 4.0, 1.0);
    REQUIRE(one.size() == 1);
    CHECK(one[0].x == 5.0);
    CHECK(one[0].price == 5.0);
    CHECK(one[0].rate == 5.0);
    CHECK(one[0].request_id == 1);
    CHECK(one[0].decision_time == doctest::Approx(1.0));

    // Empty second window, third window wins the remaining unit, fourth has nothing left.
    std::vector<Arrival> spread{{0.5, 1}, {2.2, 7}, {2.9, 8}, {3.5, 9}, {4.0, 10}};
    const auto led = run_periodic_auction(spread, units, 1.0, 4.0, 1.0);
    REQUIRE(led.size() == 2);
    CHECK(led[0].x == 1.0);
    CHECK(led[0].rate == 5.0);
    CHECK(led[1].x == 8.0);
    CHECK(led[1].rate == 3.0);
    CHECK(led[1].decision_time == doctest::Approx(3.0));

    // At most min(N, windows) allocations.
    const ArrivalModel m(50.0, ExponentialLaw{1.0});
    const auto arr = m.sample_arrivals(12.0, 3);
    CHECK(run_periodic_auction(arr, units_of(std::vector<double>(100, 1.0)), 0.5, 12.0, 1.0).size() == 24);
    CHECK(run_periodic_auction(arr, units_of({1, 1, 1}), 0.5, 12.0, 1.0).size() == 3);
    CHECK_THROWS_AS(run_periodic_auction(arr, units, 0.0, 12.0, 1.0), std::invalid_argument);
}

TEST_CASE("ideal dominates every online strategy") {
    const ArrivalModel m(10.0, ExponentialLaw{1.0});
    std::vector<double> r;
    for (int k = 0; k < 20; ++k) r.push_back(2.5 - 0.1 * k);
    const auto units = units_of(r);
    bool dominates = true;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto arr = m.sample_arrivals(12.0, s);
        const double best = totals(run_ideal(arr, units, 1.0)).qoe;
        Engine e(s);
        for (const auto& led : {run_pessimistic(arr, units, 1.0, 1.0), run_optimistic(arr, units, 1.0, 1.0),
                                run_epsilon_greedy(arr, units, 0.5, 1.0, e),
                                run_periodic_auction(arr, units, 0.5, 12.0, 1.0)})
            if (totals(led).qoe > best * (1.0 + 1e-12)) dominates = false;
    }
    CHECK(dominates);
}
