// fogalloc command-line front end: solve, simulate, decide.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <type_traits>
#include <variant>

#include "fogalloc/allocation_policy.hpp"
#include "fogalloc/config.hpp"
#include "fogalloc/csv_io.hpp"
#include "fogalloc/pricing.hpp"
#include "fogalloc/sim_harness.hpp"

#ifndef FOGALLOC_VERSION
#define FOGALLOC_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace fogalloc;

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    std::string hex;
    for (unsigned int k = 0; k < len; ++k) hex += fmt::format("{:02x}", digest[k]);
    return hex;
}

RunConfig load(const Overrides& o) {
    RunConfig cfg = load_config(o.config);
    if (o.out) cfg.out_dir = *o.out;
    if (o.seed) cfg.experiment.seed = *o.seed;
    if (o.threads) cfg.experiment.threads = *o.threads;
    return cfg;
}

json law_json(const ArrivalModel& m) {
    return std::visit(
        [](const auto& law) -> json {
            using L = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<L, ExponentialLaw>)
                return {{"law", "exponential"}, {"alpha", law.alpha}};
            else if constexpr (std::is_same_v<L, UniformLaw>)
                return {{"law", "uniform"}, {"beta", law.beta}};
            else
                return {{"law", law.name}};
        },
        m.law());
}

json parameters(const RunConfig& cfg) {
    const ExperimentSpec& s = cfg.experiment;
    json arrivals = law_json(s.model);
    arrivals["lambda"] = s.model.lambda();
    arrivals["eta"] = s.model.eta();
    arrivals["horizon_hours"] = s.horizon;
    arrivals["reserve"] = s.model.reserve();

    const TopologySpec& t = s.topology;
    json topology = {{"latency_ms", t.latency_ms},
                     {"vmi_count", t.vmi_count},
                     {"tau_o_ms", t.other_delay_ms},
                     {"processing_delays", t.delays == DelayMode::sampled ? "sampled" : "fixed"}};
    if (t.delays == DelayMode::sampled) {
        topology["processing_delay_min_ms"] = t.processing_min_ms;
        topology["processing_delay_max_ms"] = t.processing_max_ms;
    } else {
        topology["processing_delay_ms"] = t.processing_ms;
    }

    json strategies = json::array();
    for (auto k : s.strategies) strategies.push_back(std::string(to_string(k)));

    return {{"arrivals", arrivals},
            {"topology", topology},
            {"solver",
             {{"grid_intervals", s.solver.grid_intervals},
              {"max_iterations", s.solver.max_iterations},
              {"step_tolerance", s.solver.step_tolerance},
              {"residual_tolerance", s.solver.residual_tolerance}}},
            {"simulation",
             {{"strategy", strategies},
              {"replications", s.replications},
              {"epsilon", s.epsilon},
              {"auction_period_hours", s.effective_auction_period()},
              {"sweep", std::string(to_string(s.axis))},
              {"sweep_values", s.sweep_values},
              {"evolution", cfg.evolution},
              {"evolution_points", s.evolution_points}}},
            {"barrier",
             {{"enabled", cfg.barrier.enabled},
              {"points", cfg.barrier.points},
              {"max", cfg.barrier.max},
              {"replications", cfg.barrier.replications}}},
            {"threads", s.threads}};
}

/// Files are staged in memory and written only once everything succeeded.
class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

    void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }

    void commit(const RunConfig& cfg, std::string_view command) {
        fs::create_directories(dir_);
        json hashes = json::object();
        for (const auto& [name, content] : files_) {
            write_file_atomic(dir_ / name, content);
            hashes[name] = sha256_hex(content);
        }
        json manifest = {{"version", FOGALLOC_VERSION},
                         {"command", command},
                         {"seed", cfg.experiment.seed},
                         {"units",
                          {{"time", "hours"},
                           {"lambda", "requests per hour"},
                           {"delay", "milliseconds"},
                           {"response_rate", "1/ms"}}},
                         {"parameters", parameters(cfg)},
                         {"files", hashes}};
        write_file_atomic(dir_ / "manifest.json", manifest.dump(2) + "\n");
    }

private:
    fs::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

template <class F>
std::string render(F&& f) {
    std::ostringstream out;
    f(out);
    return out.str();
}

void stage_solution(Outputs& outputs, const ThresholdSolution& sol) {
    outputs.add("thresholds.csv", render([&](std::ostream& o) { write_thresholds(o, sol.table); }));
    outputs.add("revenue.csv", render([&](std::ostream& o) { write_revenue(o, sol.revenue); }));
}

int cmd_solve(const Overrides& o) {
    const RunConfig cfg = load(o);
    const ExperimentSpec& s = cfg.experiment;
    const auto sol = solve_thresholds(s.model, s.topology.total_vmis(), s.horizon, s.solver);
    Outputs outputs(cfg.out_dir);
    stage_solution(outputs, sol);
    outputs.commit(cfg, "solve");
    std::cerr << fmt::format("solved {} curves on {} grid points, max residual {:.3g}\n", sol.table.curve_count(),
                             sol.table.grid_size(), sol.report.max_residual);
    return 0;
}

int cmd_simulate(const Overrides& o) {
    const RunConfig cfg = load(o);
    const ExperimentSpec& spec = cfg.experiment;
    Outputs outputs(cfg.out_dir);
    const bool optimal =
        std::find(spec.strategies.begin(), spec.strategies.end(), StrategyKind::optimal) != spec.strategies.end();

    // Base-model thresholds: reuse thresholds.csv from the output directory,
    // otherwise solve and write it alongside the results.
    std::shared_ptr<const ThresholdTable> base_table;
    if (optimal && (spec.axis == SweepAxis::none || cfg.evolution)) {
        const fs::path existing = fs::path(cfg.out_dir) / "thresholds.csv";
        if (fs::exists(existing)) {
            std::ifstream in(existing, std::ios::binary);
            std::string content{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
            std::istringstream parse(content);
            base_table = std::make_shared<const ThresholdTable>(read_thresholds(parse, spec.model.eta()));
            outputs.add("thresholds.csv", std::move(content));
            const fs::path revenue = fs::path(cfg.out_dir) / "revenue.csv";
            if (fs::exists(revenue)) {
                std::ifstream rin(revenue, std::ios::binary);
                outputs.add("revenue.csv",
                            std::string{std::istreambuf_iterator<char>(rin), std::istreambuf_iterator<char>()});
            }
        } else {
            auto sol = solve_thresholds(spec.model, spec.topology.total_vmis(), spec.horizon, spec.solver);
            stage_solution(outputs, sol);
            base_table = std::make_shared<const ThresholdTable>(std::move(sol.table));
        }
    }

    ExperimentSpec base = spec;
    base.axis = SweepAxis::none;
    base.sweep_values.clear();
    const auto grid = evolution_grid(spec.horizon, spec.evolution_points);
    std::optional<std::vector<ReplicationOutcome>> base_outcomes;
    auto run_base = [&]() -> const std::vector<ReplicationOutcome>& {
        if (!base_outcomes) {
            const auto point = prepare_point(base, base.model.lambda(), base_table);
            base_outcomes = run_replications(base, point, cfg.evolution ? std::span<const double>(grid)
                                                                        : std::span<const double>());
        }
        return *base_outcomes;
    };

    MetricSeries series;
    series.axis = spec.axis;
    if (spec.axis == SweepAxis::none) {
        series.points.push_back({spec.model.lambda(), aggregate(spec, run_base())});
    } else {
        for (double value : spec.sweep_values) {
            const auto point = prepare_point(spec, value);
            series.points.push_back({value, aggregate(spec, run_replications(spec, point))});
        }
    }
    outputs.add("sweep.csv", render([&](std::ostream& out) { write_sweep(out, series); }));

    if (cfg.evolution) {
        const auto ev = evolution_from(base, grid, run_base());
        outputs.add("evolution.csv", render([&](std::ostream& out) { write_evolution(out, ev); }));
    }

    if (base_table) {
        const auto point = prepare_point(base, base.model.lambda(), base_table);
        const auto trace = optimal_trace(base, point, 0);
        outputs.add("ledger.csv",
                    render([&](std::ostream& out) { write_ledger(out, trace.ledger, trace.rejections); }));
    }

    if (cfg.barrier.enabled) {
        std::vector<double> barriers(cfg.barrier.points);
        for (std::size_t k = 0; k < barriers.size(); ++k)
            barriers[k] = cfg.barrier.max * static_cast<double>(k + 1) / static_cast<double>(barriers.size());
        const auto curve = single_vmi_static_barrier_curve(spec.model, spec.horizon, barriers,
                                                           cfg.barrier.replications, spec.seed, spec.threads);
        outputs.add("barrier.csv", render([&](std::ostream& out) { write_barrier(out, curve); }));
    }

    outputs.commit(cfg, "simulate");
    return 0;
}

struct DecideArgs {
    std::string thresholds;
    std::vector<double> rates;
    double x = 0.0;
    double t = 0.0;
    double eta = 1.0;
};

int cmd_decide(const DecideArgs& a) {
    const ThresholdTable table = read_thresholds(a.thresholds, a.eta);
    if (a.t < 0.0 || a.t > table.horizon())
        throw HorizonExpired(fmt::format("t = {} outside the horizon [0, {}]", a.t, table.horizon()));
    std::vector<double> rates = a.rates;
    std::sort(rates.begin(), rates.end(), std::greater<>());
    if (rates.empty()) {
        std::cout << "REJECT\n";
        return 0;
    }
    if (rates.size() > table.curve_count())
        throw std::invalid_argument(
            fmt::format("{} available units but only {} threshold curves", rates.size(), table.curve_count()));
    const auto family = table.family_at(rates.size(), a.t);
    const auto rank = classify(a.x, family);
    if (!rank) {
        std::cout << "REJECT\n";
        return 0;
    }
    const auto prices = price_schedule(rates, family, a.eta);
    std::cout << fmt::format("ACCEPT rank={} rate={} price={}\n", *rank, rates[*rank - 1], prices.at(*rank));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Revenue-optimal dynamic VMI allocation and pricing"};
    app.set_version_flag("--version", FOGALLOC_VERSION);
    app.require_subcommand(1);

    Overrides o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Run configuration (TOML)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--seed", o.seed, "Base seed");
        sub->add_option("--threads", o.threads, "Worker threads (0 = auto)");
    };
    auto* solve = app.add_subcommand("solve", "Solve the cutoff curves; writes thresholds.csv and revenue.csv");
    add_common(solve);
    auto* simulate = app.add_subcommand("simulate", "Run the Monte Carlo experiment");
    add_common(simulate);

    DecideArgs d;
    auto* decide = app.add_subcommand("decide", "Classify and price one arrival against a thresholds file");
    decide->add_option("--thresholds", d.thresholds, "thresholds.csv")->required()->check(CLI::ExistingFile);
    decide->add_option("--rates", d.rates, "Response rates of the available units")->delimiter(',');
    decide->add_option("--x", d.x, "Characteristic of the arrival")->required();
    decide->add_option("--t", d.t, "Arrival time (hours)")->required();
    decide->add_option("--eta", d.eta, "QoE exponent")->check(CLI::Range(1.0, 1e9));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) return cmd_solve(o);
        if (*simulate) return cmd_simulate(o);
        if (*decide) return cmd_decide(d);
    } catch (const HorizonExpired& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
