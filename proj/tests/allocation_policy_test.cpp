#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fogalloc/allocation_policy.hpp"
#include "fogalloc/arrival_model.hpp"
#include "fogalloc/pricing.hpp"

using namespace fogalloc;

namespace {

// Two curves on [0, 2], linear in t.
std::shared_ptr<const ThresholdTable> small_table() {
    return std::make_shared<const ThresholdTable>(std::vector<double>{0.0, 1.0, 2.0},
                                                  std::vector<std::vector<double>>{{4.0, 3.0, 1.0}, {2.0, 1.5, 1.0}},
                                                  1.0);
}

SortedRates two_units() { return {{3.0, 1.0}, {{1, 1}, {2, 1}}}; }

}  // namespace

TEST_CASE("classification") {
    const double fam[] = {4.0, 2.0};
    CHECK(classify(5.0, fam) == 1u);
    CHECK(classify(4.0, fam) == 1u);
    CHECK(classify(3.0, fam) == 2u);
    CHECK(classify(2.0, fam) == 2u);
    CHECK_FALSE(classify(1.9, fam).has_value());

    const auto tab = small_table();
    CHECK(classify(3.0, 0.0, 2, *tab) == 2u);
    CHECK(classify(3.0, 0.0, 1, *tab) == std::nullopt);
    CHECK(classify(5.0, 0.0, 0, *tab) == std::nullopt);
}

TEST_CASE("allocation steps") {
    const auto tab = small_table();

    SUBCASE("two qualifying arrivals") {
        Allocator a(tab, two_units());
        const auto first = a.process_arrival(0, 10.0, 0.0);
        REQUIRE(first);
        CHECK(first->rank == 1);
        CHECK(first->rate == 3.0);
        CHECK(first->vmi == VmiId{1, 1});
        // N=2 family at t=0 is [4, 2]: P_1 = 1*2 + (3-1)*4.
        CHECK(first->price == doctest::Approx(10.0));
        CHECK(first->qoe == doctest::Approx(30.0));

        const auto second = a.process_arrival(1, 10.0, 1.0);
        REQUIRE(second);
        CHECK(second->rank == 1);
        CHECK(second->vmi == VmiId{2, 1});
        // N=1 family at t=1 is [3].
        CHECK(second->price == doctest::Approx(3.0));
        CHECK(a.available().empty());
        CHECK_FALSE(a.process_arrival(2, 100.0, 1.5).has_value());
        CHECK(a.rejections().size() == 1);
    }

    SUBCASE("single unit price") {
        const SortedRates one{{2.5}, {{7, 3}}};
        Allocator a(tab, one);
        const auto rec = a.process_arrival(5, 4.0, 0.5);
        REQUIRE(rec);
        CHECK(rec->price == doctest::Approx(2.5 * 3.5));
        CHECK(rec->price <= rec->qoe);
    }

    SUBCASE("reject leaves state untouched") {
        Allocator a(tab, two_units());
        CHECK_FALSE(a.process_arrival(0, 1.0, 0.5).has_value());
        CHECK(a.available().size() == 2);
        CHECK(a.ledger().empty());
        CHECK(a.clock() == 0.5);
    }

    SUBCASE("release restores the pool and relaxes the bottom threshold") {
        Allocator a(tab, two_units());
        const auto before = std::vector<AvailableUnit>(a.available().begin(), a.available().end());
        REQUIRE(a.process_arrival(0, 10.0, 0.0));
        // With one unit left the family at t=0 is [4]; x=3 is rejected.
        CHECK_FALSE(a.process_arrival(1, 3.0, 0.0).has_value());
        a.release(0, 0.0);
        CHECK(a.available().size() == before.size());
        for (std::size_t k = 0; k < before.size(); ++k) {
            CHECK(a.available()[k].rate == before[k].rate);
            CHECK(a.available()[k].id == before[k].id);
        }
        CHECK(a.ledger()[0].released_at == 0.0);
        // The N=2 family [4, 2] now accepts x=3 at rank 2.
        const auto again = a.process_arrival(2, 3.0, 0.0);
        REQUIRE(again);
        CHECK(again->rank == 2);
    }

    SUBCASE("errors") {
        Allocator a(tab, two_units());
        CHECK_THROWS_AS(a.process_arrival(0, 5.0, 2.5), HorizonExpired);
        REQUIRE(a.process_arrival(0, 5.0, 1.0));
        CHECK_THROWS_AS(a.process_arrival(0, 5.0, 1.2), std::invalid_argument);
        CHECK_THROWS_AS(a.process_arrival(1, 5.0, 0.5), std::invalid_argument);
        CHECK_THROWS_AS(a.release(42, 1.5), std::invalid_argument);
        a.release(0, 2.5);
        CHECK_THROWS_AS(a.release(0, 2.6), std::invalid_argument);
        CHECK(a.available().size() == 2);
        CHECK_THROWS_AS(a.process_arrival(3, 100.0, 2.7), HorizonExpired);
    }

    SUBCASE("pool larger than the table") {
        const SortedRates three{{3.0, 2.0, 1.0}, {{1, 1}, {1, 2}, {1, 3}}};
        CHECK_THROWS_AS(Allocator(tab, three), std::invalid_argument);
    }
}

TEST_CASE("determinism and conservation on solved thresholds") {
    const ArrivalModel m(20.0, ExponentialLaw{1.0});
    const std::size_t n0 = 12;
    auto table = std::make_shared<const ThresholdTable>(solve_thresholds(m, n0, 6.0).table);
    SortedRates units;
    for (std::size_t k = 0; k < n0; ++k) {
        units.rates.push_back(3.0 - 0.2 * static_cast<double>(k));
        units.mapping.push_back({static_cast<int>(k / 4) + 1, k % 4 + 1});
    }

    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto arrivals = m.sample_arrivals(6.0, seed);
        Allocator a(table, units);
        Allocator b(table, units);
        Engine release_rng(seed + 1000);
        std::vector<std::uint64_t> live;
        bool conserved = true;
        bool rational = true;
        bool qualified = true;
        for (std::size_t k = 0; k < arrivals.size(); ++k) {
            const auto& arr = arrivals[k];
            const std::size_t n_before = a.available().size();
            std::vector<double> fam;
            if (n_before > 0) fam = table->family_at(n_before, arr.time);
            const auto ra = a.process_arrival(k, arr.x, arr.time);
            const auto rb = b.process_arrival(k, arr.x, arr.time);
            CHECK(ra.has_value() == rb.has_value());
            if (ra) {
                live.push_back(k);
                if (ra->price > ra->qoe * (1.0 + 1e-12)) rational = false;
                if (arr.x < fam[ra->rank - 1]) qualified = false;
            }
            // Occasionally return a unit.
            if (!live.empty() && uniform_open(release_rng) < 0.2) {
                a.release(live.front(), arr.time);
                b.release(live.front(), arr.time);
                live.erase(live.begin());
            }
            if (a.available().size() + a.live_allocations() != n0) conserved = false;
            if (!std::is_sorted(a.available().begin(), a.available().end(),
                                [](const auto& l, const auto& r) { return l.rate > r.rate; }))
                conserved = false;
        }
        CHECK(conserved);
        CHECK(rational);
        CHECK(qualified);
        REQUIRE(a.ledger().size() == b.ledger().size());
        for (std::size_t k = 0; k < a.ledger().size(); ++k) {
            CHECK(a.ledger()[k].request_id == b.ledger()[k].request_id);
            CHECK(a.ledger()[k].vmi == b.ledger()[k].vmi);
            CHECK(a.ledger()[k].price == b.ledger()[k].price);
        }
    }
}
