#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fogalloc/pricing.hpp"
#include "fogalloc/sim_harness.hpp"

using namespace fogalloc;

namespace {

ExperimentSpec small_spec() {
    ExperimentSpec s;
    s.model = ArrivalModel(5.0, ExponentialLaw{1.0});
    s.horizon = 4.0;
    s.topology.latency_ms = {0.1, 0.4};
    s.topology.vmi_count = {3, 2};
    s.replications = 40;
    s.seed = 11;
    s.threads = 2;
    s.strategies = {StrategyKind::optimal,     StrategyKind::ideal,          StrategyKind::pessimistic,
                    StrategyKind::optimistic,  StrategyKind::epsilon_greedy, StrategyKind::auction};
    s.auction_period = 0.5;
    s.solver.grid_intervals = 400;
    return s;
}

}  // namespace

TEST_CASE("single replication hand check") {
    ExperimentSpec s = small_spec();
    s.strategies = {StrategyKind::ideal};
    s.replications = 1;
    const auto series = run_experiment(s);
    REQUIRE(series.points.size() == 1);
    const auto& m = series.points[0].strategies[0];

    // Recompute the ideal ledger by hand from the same streams.
    Engine ae = derive_engine(s.seed, 0, StreamTag::arrivals);
    Engine de = derive_engine(s.seed, 0, StreamTag::processing_delays);
    const auto arrivals = s.model.sample_arrivals(s.horizon, ae);
    const auto units = sort_and_map(s.topology.build(de));
    std::vector<double> xs;
    for (const auto& a : arrivals) xs.push_back(a.x);
    std::sort(xs.begin(), xs.end(), std::greater<>());
    double total = 0.0;
    const std::size_t n = std::min(xs.size(), units.size());
    for (std::size_t k = 0; k < n; ++k) total += xs[k] * units.rates[k];

    CHECK(m.total_qoe.mean == doctest::Approx(total).epsilon(1e-12));
    CHECK(m.revenue.mean == doctest::Approx(total).epsilon(1e-12));
    CHECK(m.allocations.mean == static_cast<double>(n));
    CHECK(m.qoe_per_arrival.mean == doctest::Approx(total / static_cast<double>(arrivals.size())));
    CHECK(m.total_qoe.se == 0.0);
}

TEST_CASE("paired streams and determinism") {
    ExperimentSpec s = small_spec();
    const auto point = prepare_point(s, s.model.lambda());
    const auto grid = evolution_grid(s.horizon, 17);
    const auto a = run_replications(s, point, grid);
    s.threads = 1;
    const auto b = run_replications(s, point, grid);
    REQUIRE(a.size() == b.size());
    bool same = true;
    bool ideal_dominates = true;
    for (std::size_t r = 0; r < a.size(); ++r) {
        if (a[r].arrivals != b[r].arrivals) same = false;
        for (std::size_t k = 0; k < a[r].strategies.size(); ++k) {
            const auto& x = a[r].strategies[k];
            const auto& y = b[r].strategies[k];
            if (x.revenue != y.revenue || x.total_qoe != y.total_qoe || x.allocated_at != y.allocated_at) same = false;
            if (x.total_qoe > a[r].strategies[1].total_qoe * (1.0 + 1e-12)) ideal_dominates = false;
        }
    }
    CHECK(same);
    CHECK(ideal_dominates);

    // The optimal strategy matches the allocator trace on the same stream.
    for (std::size_t r : {0u, 7u}) {
        const auto trace = optimal_trace(s, point, r);
        const auto tot = totals(trace.ledger);
        CHECK(tot.revenue == doctest::Approx(a[r].strategies[0].revenue).epsilon(1e-12));
        CHECK(trace.ledger.size() + trace.rejections.size() == a[r].arrivals);
    }
}

TEST_CASE("time evolution") {
    ExperimentSpec s = small_spec();
    const auto ev = time_evolution(s);
    REQUIRE(ev.grid.size() == s.evolution_points);
    CHECK(ev.grid.front() == 0.0);
    CHECK(ev.grid.back() == s.horizon);
    const double n = static_cast<double>(s.topology.total_vmis());
    for (std::size_t k = 0; k < ev.kinds.size(); ++k) {
        const auto& alloc = ev.mean_allocated[k];
        const auto& cum = ev.mean_cum_qoe[k];
        if (ev.kinds[k] == StrategyKind::ideal) {
            CHECK(std::adjacent_find(alloc.begin(), alloc.end(), std::not_equal_to<>()) == alloc.end());
            continue;
        }
        CHECK(alloc.front() == 0.0);
        CHECK(cum.front() == 0.0);
        for (std::size_t g = 0; g < alloc.size(); ++g) {
            CHECK(alloc[g] >= 0.0);
            CHECK(alloc[g] <= n);
            if (g > 0) {
                CHECK(alloc[g] >= alloc[g - 1]);
                CHECK(cum[g] >= cum[g - 1]);
            }
        }
    }

    // Auction staircase: per replication at most one allocation per window.
    ExperimentSpec a = small_spec();
    a.strategies = {StrategyKind::auction};
    a.model = ArrivalModel(50.0, ExponentialLaw{1.0});
    a.topology.vmi_count = {20, 20};
    const auto windows = evolution_grid(a.horizon, 9);  // spacing 0.5 = period
    const auto point = prepare_point(a, a.model.lambda());
    bool staircase = true;
    for (const auto& rep : run_replications(a, point, windows)) {
        const auto& c = rep.strategies[0].allocated_at;
        for (std::size_t g = 1; g < c.size(); ++g)
            if (c[g] - c[g - 1] > 1.0) staircase = false;
        if (c.back() > 8.0) staircase = false;
    }
    CHECK(staircase);
}

TEST_CASE("sweep points") {
    ExperimentSpec s = small_spec();
    s.strategies = {StrategyKind::optimal, StrategyKind::pessimistic};
    s.axis = SweepAxis::lambda;
    s.sweep_values = {1.0, 4.0};
    const auto series = run_experiment(s);
    REQUIRE(series.points.size() == 2);
    CHECK(series.points[0].value == 1.0);
    CHECK(series.points[1].strategies[0].revenue.mean > series.points[0].strategies[0].revenue.mean);

    s.axis = SweepAxis::mean;
    CHECK(model_at(s, 2.0).mean_transformed() == doctest::Approx(2.0));
    s.model = ArrivalModel(5.0, UniformLaw{4.0});
    CHECK(model_at(s, 3.0).mean_transformed() == doctest::Approx(3.0));
    CHECK(sweep_points(small_spec()) == std::vector<double>{5.0});

    ExperimentSpec bad = small_spec();
    bad.axis = SweepAxis::lambda;
    bad.sweep_values = {1.0};
    bad.solver.max_iterations = 1;
    try {
        prepare_point(bad, 1.0);
        FAIL("expected a sweep point error");
    } catch (const SweepPointError& e) {
        CHECK(e.value() == 1.0);
    }
}

TEST_CASE("summary statistics") {
    const double v[] = {1.0, 2.0, 3.0, 4.0};
    const auto s = summarize(v);
    CHECK(s.mean == 2.5);
    CHECK(s.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(s.count == 4);
}

TEST_CASE("static barrier") {
    const ArrivalModel m(20.0, ExponentialLaw{1.0});
    CHECK(static_barrier_revenue(m, 10.0, 1e-9) < 1e-8);
    CHECK(static_barrier_revenue(m, 10.0, 60.0) < 1e-20);
    for (double p : {0.5, 3.0, 7.0})
        CHECK(static_barrier_revenue(m, 10.0, p) == doctest::Approx(p * (1.0 - std::exp(-200.0 * std::exp(-p)))));

    const double grid[] = {1.0, 4.0, 6.0, 9.0};
    const auto curve = single_vmi_static_barrier_curve(m, 10.0, grid, 4000, 3, 2);
    REQUIRE(curve.size() == 4);
    for (const auto& bp : curve) CHECK(std::abs(bp.mc_mean - bp.analytic) <= 3.0 * bp.null_se + 1e-12);
}

TEST_CASE("single unit Monte Carlo against expected revenue") {
    ExperimentSpec s;
    s.model = ArrivalModel(10.0, ExponentialLaw{1.0});
    s.horizon = 12.0;
    s.topology.latency_ms = {0.5};
    s.topology.vmi_count = {1};
    s.topology.delays = DelayMode::fixed;
    s.topology.processing_ms = {0.4};
    s.replications = 20000;
    s.seed = 5;
    const auto point = prepare_point(s, 10.0);
    const auto m = aggregate(s, run_replications(s, point));
    const double exact = std::log(1.0 + 120.0 / std::exp(1.0));
    CHECK(std::abs(m[0].revenue.mean - exact) <= 3.0 * m[0].revenue.se);
}

TEST_CASE("experiment validation") {
    ExperimentSpec s = small_spec();
    s.replications = 0;
    CHECK_THROWS(s.validate());
    s = small_spec();
    s.axis = SweepAxis::lambda;
    CHECK_THROWS(s.validate());
    s.sweep_values = {-1.0};
    CHECK_THROWS(s.validate());
    CHECK(parse_sweep_axis(to_string(SweepAxis::mean)) == SweepAxis::mean);
}
