#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fogalloc/pricing.hpp"

using namespace fogalloc;

TEST_CASE("qoe") {
    CHECK(qoe(2.0, 2.5, 1.0) == doctest::Approx(5.0));
    CHECK(qoe(4.0, 4.0, 2.0) == doctest::Approx(4.0));
    CHECK(qoe(1e-300, 1.0, 1.0) < 1e-299);
    CHECK_THROWS_AS(qoe(0.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(qoe(1.0, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("price schedule examples") {
    const double r1[] = {2.5};
    const double y1[] = {4.0};
    CHECK(price_schedule(r1, y1, 1.0).at(1) == doctest::Approx(10.0));

    const double r2[] = {4.0, 1.0};
    const double y2[] = {3.0, 1.0};
    const auto p = price_schedule(r2, y2, 1.0);
    CHECK(p.at(2) == doctest::Approx(1.0));
    CHECK(p.at(1) == doctest::Approx(10.0));

    const double r3[] = {4.0, 4.0};
    const double y3[] = {7.0, 2.0};
    const auto q = price_schedule(r3, y3, 1.0);
    CHECK(q.at(1) == q.at(2));

    const double bad_rates[] = {1.0, 4.0};
    CHECK_THROWS_AS(price_schedule(bad_rates, y2, 1.0), std::invalid_argument);
    const double bad_y[] = {1.0, 3.0};
    CHECK_THROWS_AS(price_schedule(r2, bad_y, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(price_schedule(r2, y1, 1.0), std::invalid_argument);
}

TEST_CASE("randomized schedule properties") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> u(0.05, 5.0);
    std::uniform_int_distribution<int> len(1, 40);
    bool rational = true;
    bool telescopes = true;
    bool monotone = true;
    for (int trial = 0; trial < 2000; ++trial) {
        const int n = len(rng);
        const double eta = trial % 3 == 0 ? 1.0 : 1.0 + 2.0 * u(rng) / 5.0;
        std::vector<double> r(n), y(n);
        for (auto& v : r) v = u(rng);
        for (auto& v : y) v = u(rng);
        std::sort(r.begin(), r.end(), std::greater<>());
        std::sort(y.begin(), y.end(), std::greater<>());
        const auto p = price_schedule(r, y, eta);
        REQUIRE(p.size() == static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            // Direct sum, independent of the recursion.
            double direct = 0.0;
            for (int i = j; i < n; ++i) {
                const double next = i + 1 < n ? std::pow(r[i + 1], 1.0 / eta) : 0.0;
                direct += (std::pow(r[i], 1.0 / eta) - next) * std::pow(y[i], 1.0 / eta);
            }
            if (std::abs(p.prices[j] - direct) > 1e-12 * std::max(1.0, direct)) telescopes = false;
            if (j > 0 && p.prices[j - 1] < p.prices[j]) monotone = false;
            if (p.prices[j] < 0.0) monotone = false;
            // Any x at or above y_j pays no more than its QoE.
            const double lo = y[j];
            for (double x : {lo, lo * 1.001, lo * 3.0})
                if (p.prices[j] > qoe(x, r[j], eta) * (1.0 + 1e-12)) rational = false;
        }
    }
    CHECK(rational);
    CHECK(telescopes);
    CHECK(monotone);
}
