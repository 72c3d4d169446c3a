#include "fogalloc/csv_io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <system_error>

namespace fogalloc {

namespace {

void put(std::ostream& out, double v) { out << fmt::format("{}", v); }

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

double parse_double(std::string_view s, std::size_t line) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::runtime_error(fmt::format("line {}: '{}' is not a number", line, s));
    return v;
}

}  // namespace

void write_thresholds(std::ostream& out, const ThresholdTable& table) {
    out << 't';
    for (std::size_t i = 1; i <= table.curve_count(); ++i) out << ",y_" << i;
    out << '\n';
    const auto grid = table.grid();
    for (std::size_t m = 0; m < grid.size(); ++m) {
        put(out, grid[m]);
        for (std::size_t i = 1; i <= table.curve_count(); ++i) {
            out << ',';
            put(out, table.value(i, m));
        }
        out << '\n';
    }
}

void write_revenue(std::ostream& out, const RevenueCurve& revenue) {
    out << 't';
    for (std::size_t i = 1; i <= revenue.curve_count(); ++i) out << ",R_" << i;
    out << '\n';
    const auto grid = revenue.grid();
    for (std::size_t m = 0; m < grid.size(); ++m) {
        put(out, grid[m]);
        for (std::size_t i = 1; i <= revenue.curve_count(); ++i) {
            out << ',';
            put(out, revenue.curve(i)[m]);
        }
        out << '\n';
    }
}

void write_sweep(std::ostream& out, const MetricSeries& series) {
    out << "sweep_value,strategy,mean_revenue,se_revenue,mean_total_qoe,se_total_qoe,mean_qoe_per_request,se,"
           "mean_qoe_per_serviced,se_qoe_per_serviced,mean_allocations,se_allocations\n";
    for (const auto& point : series.points) {
        for (const auto& m : point.strategies) {
            put(out, point.value);
            out << ',' << to_string(m.kind);
            for (const Summary* s : {&m.revenue, &m.total_qoe, &m.qoe_per_arrival, &m.qoe_per_serviced,
                                     &m.allocations}) {
                out << ',';
                put(out, s->mean);
                out << ',';
                put(out, s->se);
            }
            out << '\n';
        }
    }
}

void write_evolution(std::ostream& out, const Evolution& evolution) {
    out << "t,strategy,mean_allocated,mean_cum_qoe\n";
    for (std::size_t g = 0; g < evolution.grid.size(); ++g) {
        for (std::size_t k = 0; k < evolution.kinds.size(); ++k) {
            put(out, evolution.grid[g]);
            out << ',' << to_string(evolution.kinds[k]) << ',';
            put(out, evolution.mean_allocated[k][g]);
            out << ',';
            put(out, evolution.mean_cum_qoe[k][g]);
            out << '\n';
        }
    }
}

void write_barrier(std::ostream& out, std::span<const BarrierPoint> curve) {
    out << "p,analytic_revenue,mc_revenue,mc_se\n";
    for (const auto& b : curve) {
        put(out, b.p);
        out << ',';
        put(out, b.analytic);
        out << ',';
        put(out, b.mc_mean);
        out << ',';
        put(out, b.mc_se);
        out << '\n';
    }
}

void write_ledger(std::ostream& out, const Ledger& ledger, std::span<const Rejection> rejections) {
    out << "request_id,t_arrival,x,decision,rank,node,vmi,price,qoe\n";
    std::size_t a = 0;
    std::size_t r = 0;
    while (a < ledger.size() || r < rejections.size()) {
        const bool take_alloc =
            r == rejections.size() || (a < ledger.size() && ledger[a].request_id < rejections[r].request_id);
        if (take_alloc) {
            const auto& rec = ledger[a++];
            out << rec.request_id << ',';
            put(out, rec.arrival_time);
            out << ',';
            put(out, rec.x);
            out << ",ACCEPT," << rec.rank << ',' << rec.vmi.node << ',' << rec.vmi.vmi << ',';
            put(out, rec.price);
            out << ',';
            put(out, rec.qoe);
            out << '\n';
        } else {
            const auto& rej = rejections[r++];
            out << rej.request_id << ',';
            put(out, rej.arrival_time);
            out << ',';
            put(out, rej.x);
            out << ",REJECT,,,,,\n";
        }
    }
}

ThresholdTable read_thresholds(std::istream& in, double eta) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("thresholds file is empty");
    const auto header = split(line);
    if (header.size() < 2 || header[0] != "t") throw std::runtime_error("thresholds header must be t,y_1,...");
    const std::size_t n = header.size() - 1;
    std::vector<double> grid;
    std::vector<std::vector<double>> curves(n);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto fields = split(line);
        if (fields.size() != n + 1)
            throw std::runtime_error(fmt::format("line {}: expected {} fields, got {}", lineno, n + 1, fields.size()));
        grid.push_back(parse_double(fields[0], lineno));
        for (std::size_t i = 0; i < n; ++i) curves[i].push_back(parse_double(fields[i + 1], lineno));
    }
    return ThresholdTable(std::move(grid), std::move(curves), eta);
}

ThresholdTable read_thresholds(const std::filesystem::path& path, double eta) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot read '{}'", path.string()));
    return read_thresholds(in, eta);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error(fmt::format("write to '{}' failed", tmp.string()));
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace fogalloc
