#include "fogalloc/config.hpp"

#include <fmt/format.h>
#include <toml.hpp>

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace fogalloc {

namespace {

class Reader {
public:
    Reader(const toml::table& table, std::string prefix) : table_(table), prefix_(std::move(prefix)) {}

    void allow_only(std::initializer_list<std::string_view> keys) const {
        const std::set<std::string_view> known(keys);
        for (const auto& [k, v] : table_)
            if (!known.contains(k.str())) throw ConfigError(fmt::format("unknown key '{}'", path(k.str())));
    }

    bool has(std::string_view key) const { return table_.contains(key); }
    bool has_array(std::string_view key) const {
        const auto* node = table_.get(key);
        return node && node->is_array();
    }

    double number(std::string_view key, double fallback) const {
        const auto* node = table_.get(key);
        if (!node) return fallback;
        return as_number(*node, key);
    }

    std::int64_t integer(std::string_view key, std::int64_t fallback) const {
        const auto* node = table_.get(key);
        if (!node) return fallback;
        if (auto v = node->value_exact<std::int64_t>()) return *v;
        throw ConfigError(fmt::format("'{}' must be an integer", path(key)));
    }

    std::size_t count(std::string_view key, std::size_t fallback) const {
        const auto v = integer(key, static_cast<std::int64_t>(fallback));
        if (v < 0) throw ConfigError(fmt::format("'{}' must be nonnegative", path(key)));
        return static_cast<std::size_t>(v);
    }

    bool boolean(std::string_view key, bool fallback) const {
        const auto* node = table_.get(key);
        if (!node) return fallback;
        if (auto v = node->value_exact<bool>()) return *v;
        throw ConfigError(fmt::format("'{}' must be true or false", path(key)));
    }

    std::string string(std::string_view key, std::string fallback) const {
        const auto* node = table_.get(key);
        if (!node) return fallback;
        if (auto v = node->value_exact<std::string>()) return *v;
        throw ConfigError(fmt::format("'{}' must be a string", path(key)));
    }

    std::vector<double> numbers(std::string_view key, std::vector<double> fallback) const {
        const auto* node = table_.get(key);
        if (!node) return fallback;
        const auto* arr = node->as_array();
        if (!arr) throw ConfigError(fmt::format("'{}' must be an array of numbers", path(key)));
        std::vector<double> out;
        for (const auto& el : *arr) out.push_back(as_number(el, key));
        return out;
    }

    std::vector<std::size_t> counts(std::string_view key, std::vector<std::size_t> fallback) const {
        const auto* node = table_.get(key);
        if (!node) return fallback;
        const auto* arr = node->as_array();
        if (!arr) throw ConfigError(fmt::format("'{}' must be an array of integers", path(key)));
        std::vector<std::size_t> out;
        for (const auto& el : *arr) {
            auto v = el.value_exact<std::int64_t>();
            if (!v || *v < 0) throw ConfigError(fmt::format("'{}' must hold nonnegative integers", path(key)));
            out.push_back(static_cast<std::size_t>(*v));
        }
        return out;
    }

    /// A string or an array of strings.
    std::vector<std::string> strings(std::string_view key, std::vector<std::string> fallback) const {
        const auto* node = table_.get(key);
        if (!node) return fallback;
        if (auto v = node->value_exact<std::string>()) return {*v};
        const auto* arr = node->as_array();
        if (!arr) throw ConfigError(fmt::format("'{}' must be a string or an array of strings", path(key)));
        std::vector<std::string> out;
        for (const auto& el : *arr) {
            auto v = el.value_exact<std::string>();
            if (!v) throw ConfigError(fmt::format("'{}' must hold strings", path(key)));
            out.push_back(*v);
        }
        return out;
    }

    std::string path(std::string_view key) const {
        return prefix_.empty() ? std::string(key) : fmt::format("{}.{}", prefix_, key);
    }

private:
    double as_number(const toml::node& node, std::string_view key) const {
        if (auto v = node.value_exact<double>()) return *v;
        if (auto v = node.value_exact<std::int64_t>()) return static_cast<double>(*v);
        throw ConfigError(fmt::format("'{}' must be a number", path(key)));
    }

    const toml::table& table_;
    std::string prefix_;
};

const toml::table& section(const toml::table& root, std::string_view name) {
    static const toml::table empty;
    const auto* node = root.get(name);
    if (!node) return empty;
    const auto* t = node->as_table();
    if (!t) throw ConfigError(fmt::format("'{}' must be a table", name));
    return *t;
}

template <class F>
auto checked(std::string_view what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(fmt::format("{}: {}", what, e.what()));
    }
}

}  // namespace

RunConfig parse_config(std::string_view text, std::string_view source) {
    toml::table root;
    try {
        root = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << e;
        throw ConfigError(msg.str());
    }

    RunConfig cfg;
    ExperimentSpec& spec = cfg.experiment;

    Reader top(root, "");
    top.allow_only({"seed", "threads", "out", "arrivals", "topology", "solver", "simulation", "barrier"});
    {
        const auto seed = top.integer("seed", 1);
        spec.seed = static_cast<std::uint64_t>(seed);
        spec.threads = static_cast<unsigned>(top.count("threads", 0));
        cfg.out_dir = top.string("out", cfg.out_dir);
    }

    Reader arr(section(root, "arrivals"), "arrivals");
    arr.allow_only({"lambda", "law", "alpha", "beta", "eta", "horizon_hours"});
    {
        const double lambda = arr.number("lambda", 10.0);
        const double eta = arr.number("eta", 1.0);
        const std::string law = arr.string("law", "exponential");
        Law l;
        if (law == "exponential") {
            if (arr.has("beta")) throw ConfigError("'arrivals.beta' applies only to the uniform law");
            l = ExponentialLaw{arr.number("alpha", 1.0)};
        } else if (law == "uniform") {
            if (arr.has("alpha")) throw ConfigError("'arrivals.alpha' applies only to the exponential law");
            l = UniformLaw{arr.number("beta", 10.0)};
        } else {
            throw ConfigError(fmt::format("'arrivals.law' must be \"exponential\" or \"uniform\", got \"{}\"", law));
        }
        spec.model = checked("arrivals", [&] { return ArrivalModel(lambda, l, eta); });
        spec.horizon = arr.number("horizon_hours", 12.0);
    }

    Reader topo(section(root, "topology"), "topology");
    topo.allow_only({"latency_ms", "vmi_count", "tau_o_ms", "processing_delays", "processing_delay_min_ms",
                     "processing_delay_max_ms", "processing_delay_ms"});
    {
        TopologySpec& t = spec.topology;
        t.latency_ms = topo.numbers("latency_ms", t.latency_ms);
        t.vmi_count = topo.counts("vmi_count", t.vmi_count);
        t.other_delay_ms = topo.number("tau_o_ms", t.other_delay_ms);
        const std::string mode = topo.string("processing_delays", "sampled");
        if (mode == "sampled")
            t.delays = DelayMode::sampled;
        else if (mode == "fixed")
            t.delays = DelayMode::fixed;
        else
            throw ConfigError(
                fmt::format("'topology.processing_delays' must be \"fixed\" or \"sampled\", got \"{}\"", mode));
        t.processing_min_ms = topo.number("processing_delay_min_ms", t.processing_min_ms);
        t.processing_max_ms = topo.number("processing_delay_max_ms", t.processing_max_ms);
        if (topo.has("processing_delay_ms") && !topo.has_array("processing_delay_ms"))
            t.processing_ms = {topo.number("processing_delay_ms", 0.0)};
        else
            t.processing_ms = topo.numbers("processing_delay_ms", {});
        if (t.delays == DelayMode::sampled && topo.has("processing_delay_ms"))
            throw ConfigError("'topology.processing_delay_ms' requires processing_delays = \"fixed\"");
        checked("topology", [&] {
            Engine scratch(0);
            return sort_and_map(t.build(scratch)).size();
        });
    }

    Reader sol(section(root, "solver"), "solver");
    sol.allow_only({"grid_intervals", "max_iterations", "step_tolerance", "residual_tolerance"});
    spec.solver.grid_intervals = sol.count("grid_intervals", spec.solver.grid_intervals);
    spec.solver.max_iterations = sol.count("max_iterations", spec.solver.max_iterations);
    spec.solver.step_tolerance = sol.number("step_tolerance", spec.solver.step_tolerance);
    spec.solver.residual_tolerance = sol.number("residual_tolerance", spec.solver.residual_tolerance);
    if (spec.solver.grid_intervals < 100) throw ConfigError("'solver.grid_intervals' must be at least 100");
    if (spec.solver.max_iterations < 1) throw ConfigError("'solver.max_iterations' must be at least 1");
    if (!(spec.solver.step_tolerance > 0.0)) throw ConfigError("'solver.step_tolerance' must be positive");
    if (!(spec.solver.residual_tolerance > 0.0)) throw ConfigError("'solver.residual_tolerance' must be positive");

    Reader sim(section(root, "simulation"), "simulation");
    sim.allow_only({"strategy", "replications", "epsilon", "auction_period_hours", "sweep", "sweep_values",
                    "evolution", "evolution_points"});
    {
        spec.strategies.clear();
        for (const auto& name : sim.strings("strategy", {"optimal"}))
            spec.strategies.push_back(checked("simulation.strategy", [&] { return parse_strategy(name); }));
        spec.replications = sim.count("replications", spec.replications);
        spec.epsilon = sim.number("epsilon", spec.epsilon);
        if (sim.has("auction_period_hours")) spec.auction_period = sim.number("auction_period_hours", 0.0);
        spec.axis = checked("simulation.sweep", [&] { return parse_sweep_axis(sim.string("sweep", "none")); });
        spec.sweep_values = sim.numbers("sweep_values", {});
        if (spec.axis == SweepAxis::none && !spec.sweep_values.empty())
            throw ConfigError("'simulation.sweep_values' given without a sweep axis");
        cfg.evolution = sim.boolean("evolution", cfg.evolution);
        spec.evolution_points = sim.count("evolution_points", spec.evolution_points);
    }

    Reader bar(section(root, "barrier"), "barrier");
    bar.allow_only({"enabled", "points", "max", "replications"});
    cfg.barrier.enabled = bar.boolean("enabled", cfg.barrier.enabled);
    cfg.barrier.points = bar.count("points", cfg.barrier.points);
    cfg.barrier.max = bar.number("max", cfg.barrier.max);
    cfg.barrier.replications = bar.count("replications", cfg.barrier.replications);
    if (cfg.barrier.points < 1) throw ConfigError("'barrier.points' must be at least 1");
    if (!(cfg.barrier.max > 0.0)) throw ConfigError("'barrier.max' must be positive");
    if (cfg.barrier.replications < 1) throw ConfigError("'barrier.replications' must be at least 1");

    checked("configuration", [&] {
        spec.validate();
        return 0;
    });
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

}  // namespace fogalloc
