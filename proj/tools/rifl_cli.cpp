#include "rifl/analysis.hpp"
#include "rifl/harness.hpp"
#include "rifl/link_sim.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

using namespace rifl;

namespace {

// Flat `key = value` text with [sections]; the first setting must be `schema = 1`.
class ConfigFile {
public:
    static ConfigFile load(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open config " + path);
        ConfigFile cfg;
        std::string line;
        std::string section;
        int lineno = 0;
        bool schema_seen = false;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find_first_of("#;");
            if (hash != std::string::npos)
                line.erase(hash);
            line = trim(line);
            if (line.empty())
                continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed section header");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (!schema_seen) {
                if (!section.empty() || key != "schema")
                    throw std::runtime_error(path + ": first setting must be schema = 1");
                if (value != "1")
                    throw std::runtime_error(path + ": unsupported schema " + value);
                schema_seen = true;
                continue;
            }
            cfg.values_[section.empty() ? key : section + "." + key] = value;
        }
        if (!schema_seen)
            throw std::runtime_error(path + ": missing schema = 1");
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string str(const std::string& key, const std::string& fallback) const
    {
        used_.push_back(key);
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double num(const std::string& key, double fallback) const
    {
        const auto s = str(key, "");
        if (s.empty())
            return fallback;
        try {
            std::size_t n = 0;
            const double v = std::stod(s, &n);
            if (n != s.size())
                throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw std::runtime_error("config key " + key + ": not a number: " + s);
        }
    }

    std::uint64_t count(const std::string& key, std::uint64_t fallback) const
    {
        const double v = num(key, static_cast<double>(fallback));
        if (v < 0 || v != std::floor(v))
            throw std::runtime_error("config key " + key + ": expected a non-negative integer");
        return static_cast<std::uint64_t>(v);
    }

    bool flag(const std::string& key, bool fallback) const
    {
        const auto s = str(key, fallback ? "true" : "false");
        if (s == "true" || s == "1" || s == "yes")
            return true;
        if (s == "false" || s == "0" || s == "no")
            return false;
        throw std::runtime_error("config key " + key + ": expected true or false");
    }

    std::vector<double> list(const std::string& key) const
    {
        std::vector<double> out;
        std::stringstream ss(str(key, ""));
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty())
                continue;
            try {
                out.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw std::runtime_error("config key " + key + ": not a number: " + item);
            }
        }
        return out;
    }

    /// Keys present in the file that no reader asked for.
    std::vector<std::string> unused() const
    {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_)
            if (std::find(used_.begin(), used_.end(), k) == used_.end())
                out.push_back(k);
        return out;
    }

private:
    static std::string trim(const std::string& s)
    {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos)
            return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, std::string> values_;
    mutable std::vector<std::string> used_;
};

struct Experiment {
    LinkScenario scenario;
    TrafficSpec traffic;
    bool duplex = true;
    double bits_per_point = 1e8; // wire bits per lane per run
    std::vector<double> bers;
    std::uint32_t payload_from = 1;
    std::uint32_t payload_to = 1500;
    std::uint32_t payload_step = 1;
    std::uint64_t payload_slots = 4000;
    std::vector<int> lanes;
};

TrafficMode parse_mode(const std::string& s)
{
    if (s == "random")
        return TrafficMode::Random;
    if (s == "fixed")
        return TrafficMode::Fixed;
    if (s == "sweep")
        return TrafficMode::Sweep;
    throw std::runtime_error("unknown traffic mode " + s + " (random, fixed, sweep)");
}

// ber_from..ber_to in log steps of ber_step_decades, or an explicit bers list.
std::vector<double> parse_ber_axis(const ConfigFile& cfg)
{
    if (cfg.has("sweep.ber_from")) {
        const double from = std::log10(cfg.num("sweep.ber_from", 1e-12));
        const double to = std::log10(cfg.num("sweep.ber_to", 1e-5));
        const double step = cfg.num("sweep.ber_step_decades", 0.25);
        if (!(step > 0) || to < from)
            throw std::runtime_error("sweep: need ber_from <= ber_to and ber_step_decades > 0");
        std::vector<double> out;
        const int n = static_cast<int>(std::floor((to - from) / step + 1e-9));
        for (int k = 0; k <= n; ++k)
            out.push_back(std::pow(10.0, from + k * step));
        return out;
    }
    return cfg.list("sweep.bers");
}

Experiment load_experiment(const std::string& path, std::uint64_t seed_override, bool full)
{
    const auto cfg = ConfigFile::load(path);
    Experiment e;
    auto& sc = e.scenario;
    sc.id = cfg.str("scenario.id", "run");
    auto& p = sc.protocol;
    p.frame_size_bits = static_cast<int>(cfg.count("protocol.frame_size_bits", 256));
    p.frame_id_bits = static_cast<int>(cfg.count("protocol.frame_id_bits", 8));
    p.lanes = static_cast<int>(cfg.count("protocol.lanes", 1));
    p.line_rate_bps = cfg.num("protocol.line_rate_bps", p.line_rate_bps);

    sc.cable_length_m = cfg.num("scenario.cable_length_m", sc.cable_length_m);
    sc.propagation_ns_per_m = cfg.num("scenario.propagation_ns_per_m", sc.propagation_ns_per_m);
    sc.circuit_delay_ns = cfg.num("scenario.circuit_delay_ns", sc.circuit_delay_ns);
    sc.ber_forward = cfg.num("scenario.ber_forward", 0.0);
    sc.ber_reverse = cfg.num("scenario.ber_reverse", sc.ber_forward);
    sc.seed_forward = cfg.count("scenario.seed_forward", sc.seed_forward);
    sc.seed_reverse = cfg.count("scenario.seed_reverse", sc.seed_reverse);
    sc.ppm_a = cfg.num("scenario.ppm_a", 0.0);
    sc.ppm_b = cfg.num("scenario.ppm_b", 0.0);
    sc.fc_capacity_bits = cfg.count("scenario.fc_capacity_bits", 0);
    sc.clock_compensation = cfg.flag("scenario.clock_compensation", true);
    for (double s : cfg.list("scenario.lane_skew_slots"))
        sc.lane_skew_slots.push_back(s);
    e.duplex = cfg.flag("scenario.duplex", true);

    e.bits_per_point = cfg.num("scenario.bits_per_point", 1e8);
    if (full)
        e.bits_per_point = cfg.num("scenario.full_bits_per_point", 8e10);
    sc.duration_slots = cfg.count("scenario.duration_slots", 0);
    if (sc.duration_slots == 0)
        sc.duration_slots = static_cast<std::uint64_t>(std::ceil(e.bits_per_point / p.frame_size_bits));

    auto& t = e.traffic;
    t.mode = parse_mode(cfg.str("traffic.mode", "random"));
    t.min_bytes = static_cast<std::uint32_t>(cfg.count("traffic.min_bytes", 1));
    t.max_bytes = static_cast<std::uint32_t>(cfg.count("traffic.max_bytes", 8192));
    t.fixed_bytes = static_cast<std::uint32_t>(cfg.count("traffic.fixed_bytes", 30));
    t.sweep_from = static_cast<std::uint32_t>(cfg.count("traffic.sweep_from", 1));
    t.sweep_to = static_cast<std::uint32_t>(cfg.count("traffic.sweep_to", 1500));
    t.sweep_step = static_cast<std::uint32_t>(cfg.count("traffic.sweep_step", 1));
    t.sweep_bytes_per_size = cfg.count("traffic.sweep_bytes_per_size", t.sweep_bytes_per_size);
    t.seed = cfg.count("traffic.seed", 1);
    t.max_packets = cfg.count("traffic.max_packets", 0);
    if (seed_override != 0) {
        t.seed = seed_override;
        sc.seed_forward = seed_override * 2 + 1;
        sc.seed_reverse = seed_override * 2 + 2;
    }

    e.bers = parse_ber_axis(cfg);
    e.payload_from = static_cast<std::uint32_t>(cfg.count("sweep.payload_from", 1));
    e.payload_to = static_cast<std::uint32_t>(cfg.count("sweep.payload_to", 1500));
    e.payload_step = static_cast<std::uint32_t>(cfg.count("sweep.payload_step", 1));
    e.payload_slots = cfg.count("sweep.payload_slots", 4000);
    for (double l : cfg.list("sweep.lanes"))
        e.lanes.push_back(static_cast<int>(l));

    const auto unused = cfg.unused();
    if (!unused.empty()) {
        std::string msg = path + ": unknown keys:";
        for (const auto& k : unused)
            msg += " " + k;
        throw std::runtime_error(msg);
    }
    sc.validate();
    return e;
}

TrafficSpec reverse_traffic(const TrafficSpec& t)
{
    TrafficSpec r = t;
    r.seed = t.seed + 0x9E3779B9ULL;
    return r;
}

RunResult run_experiment(const Experiment& e, const LinkScenario& sc)
{
    return run(sc, e.traffic, e.duplex ? std::optional<TrafficSpec>(reverse_traffic(e.traffic)) : std::nullopt);
}

bool report_mismatch(const RunResult& r, const std::string& id)
{
    bool ok = true;
    for (const auto* d : {&r.forward, &r.reverse}) {
        if (d->mismatch) {
            std::cerr << id << (d == &r.forward ? " forward: " : " reverse: ") << d->mismatch->to_string() << "\n";
            ok = false;
        }
    }
    if (!r.lossless()) {
        if (ok)
            std::cerr << id << ": stream not delivered losslessly\n";
        ok = false;
    }
    return ok;
}

// Runs `n` independent jobs on up to `jobs` threads; results land at their own index.
template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn fn)
{
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < jobs; ++k)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    for (auto& err : errors)
        if (err)
            std::rethrow_exception(err);
}

class Output {
public:
    explicit Output(const std::string& path)
    {
        if (!path.empty()) {
            file_.open(path);
            if (!file_)
                throw std::runtime_error("cannot write " + path);
        }
    }
    std::ostream& os() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

// BER points share one error-free baseline so bandwidth_ratio is comparable across the series.
bool run_ber_series(const Experiment& e, unsigned jobs, std::ostream& out)
{
    LinkScenario base = e.scenario;
    base.ber_forward = base.ber_reverse = 0.0;
    const RunResult baseline = run_experiment(e, base);
    std::vector<RunResult> results(e.bers.size());
    parallel_for(e.bers.size(), jobs, [&](std::size_t i) {
        LinkScenario sc = e.scenario;
        sc.ber_forward = sc.ber_reverse = e.bers[i];
        sc.id = e.scenario.id + "_" + std::to_string(i);
        results[i] = run_experiment(e, sc);
        apply_baseline(results[i], baseline);
    });
    bool ok = report_mismatch(baseline, e.scenario.id + "_baseline");
    out << metrics_csv_header() << "\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        ok &= report_mismatch(results[i], results[i].metrics.scenario_id);
        out << metrics_csv_row(results[i].metrics) << "\n";
    }
    return ok;
}

int cmd_simulate(const std::string& path, std::uint64_t seed, const std::string& out_path, bool full, unsigned jobs)
{
    const auto e = load_experiment(path, seed, full);
    Output out(out_path);
    if (!e.bers.empty())
        return run_ber_series(e, jobs, out.os()) ? 0 : 1;
    auto r = run_experiment(e, e.scenario);
    out.os() << metrics_csv_header() << "\n" << metrics_csv_row(r.metrics) << "\n";
    return report_mismatch(r, e.scenario.id) ? 0 : 1;
}

int cmd_sweep(const std::string& path, const std::string& axis, std::uint64_t seed, const std::string& out_path,
              bool full, unsigned jobs)
{
    const auto e = load_experiment(path, seed, full);
    Output out(out_path);
    if (axis == "ber") {
        if (e.bers.empty())
            throw std::runtime_error("sweep: config has no BER axis (sweep.bers or sweep.ber_from)");
        return run_ber_series(e, jobs, out.os()) ? 0 : 1;
    }
    if (axis == "payload") {
        std::vector<std::uint32_t> sizes;
        for (std::uint32_t s = e.payload_from; s <= e.payload_to; s += std::max(1u, e.payload_step))
            sizes.push_back(s);
        std::vector<EfficiencyPoint> points(sizes.size());
        std::vector<char> good(sizes.size(), 1);
        parallel_for(sizes.size(), jobs, [&](std::size_t i) {
            LinkScenario sc = e.scenario;
            sc.ber_forward = sc.ber_reverse = 0.0;
            sc.duration_slots = e.payload_slots;
            TrafficSpec t;
            t.mode = TrafficMode::Fixed;
            t.fixed_bytes = sizes[i];
            t.seed = e.traffic.seed;
            const auto r = run(sc, t, std::nullopt);
            good[i] = r.lossless();
            points[i] = {sizes[i], r.forward.goodput_bps / (sc.protocol.line_rate_bps * sc.protocol.lanes)};
        });
        out.os() << efficiency_curve_csv(points, e.scenario.protocol.frame_size_bits);
        return std::all_of(good.begin(), good.end(), [](char g) { return g != 0; }) ? 0 : 1;
    }
    if (axis == "lanes") {
        if (e.lanes.empty())
            throw std::runtime_error("sweep: config has no lane axis (sweep.lanes)");
        std::vector<RunResult> results(e.lanes.size());
        parallel_for(e.lanes.size(), jobs, [&](std::size_t i) {
            LinkScenario sc = e.scenario;
            sc.protocol.lanes = e.lanes[i];
            sc.lane_skew_slots.resize(std::min<std::size_t>(sc.lane_skew_slots.size(),
                                                            static_cast<std::size_t>(e.lanes[i])));
            sc.id = e.scenario.id + "_lanes" + std::to_string(e.lanes[i]);
            sc.validate();
            results[i] = run_experiment(e, sc);
        });
        bool ok = true;
        out.os() << "lanes," << metrics_csv_header() << "\n";
        for (std::size_t i = 0; i < results.size(); ++i) {
            ok &= report_mismatch(results[i], results[i].metrics.scenario_id);
            out.os() << e.lanes[i] << "," << metrics_csv_row(results[i].metrics) << "\n";
        }
        return ok ? 0 : 1;
    }
    throw std::runtime_error("unknown sweep axis " + axis + " (ber, payload, lanes)");
}

struct DesignArgs {
    bool table2 = false;
    bool efficiency = false;
    bool sizing = false;
    bool table4 = false;
    double line_rate = 100e9;
    double rtt = 500e-9;
    double ber = 1e-7;
    int frame_size = 0;
    double target_years = 100.0;
    std::vector<double> bers;
    bool markdown = false;
};

int cmd_design(const DesignArgs& a, const std::string& out_path)
{
    Output out(out_path);
    auto& os = out.os();
    bool any = false;
    if (a.table2) {
        const auto rows = analysis::table2(a.line_rate, a.rtt, a.ber, a.target_years);
        os << (a.markdown ? analysis::table2_markdown(rows) : analysis::table2_csv(rows));
        any = true;
    }
    if (a.efficiency) {
        if (a.frame_size != 0) {
            const auto rows = analysis::table3();
            const auto it = std::find_if(rows.begin(), rows.end(),
                                         [&](const auto& r) { return r.frame_bits == a.frame_size; });
            if (it == rows.end())
                throw std::runtime_error("no efficiency row for frame size " + std::to_string(a.frame_size));
            os << format_double(it->efficiency) << "\n";
        } else {
            const auto rows = analysis::table3();
            os << (a.markdown ? analysis::table3_markdown(rows) : analysis::table3_csv(rows));
        }
        any = true;
    }
    if (a.sizing) {
        const auto s = analysis::sizing(a.line_rate, a.rtt);
        os << "s_retrans_bits,s_fc_bits,thr_on_bits,thr_off_bits\n"
           << format_double(s.s_retrans_bits) << "," << format_double(s.s_fc_bits) << ","
           << format_double(s.thr_on_bits) << "," << format_double(s.thr_off_bits) << "\n";
        any = true;
    }
    if (a.table4) {
        analysis::DesignPoint d;
        d.frame_bits = a.frame_size != 0 ? a.frame_size : 256;
        d.line_rate_bps = a.line_rate;
        d.rtt_s = a.rtt;
        std::vector<double> bers = a.bers;
        if (bers.empty())
            for (int k = 0; k <= 28; ++k)
                bers.push_back(std::pow(10.0, -12.0 + k * 0.25));
        const auto rows = analysis::table4(d, bers);
        os << (a.markdown ? analysis::table4_markdown(rows) : analysis::table4_csv(rows));
        any = true;
    }
    if (!any)
        throw std::runtime_error("design: choose at least one of --table2, --efficiency, --sizing, --table4");
    return 0;
}

struct TrafficGenArgs {
    std::string mode = "random";
    std::uint32_t min_bytes = 1;
    std::uint32_t max_bytes = 8192;
    std::uint32_t fixed_bytes = 30;
    std::uint32_t sweep_from = 1;
    std::uint32_t sweep_to = 1500;
    std::uint32_t sweep_step = 1;
    std::uint64_t bytes_per_size = 30000;
    std::uint64_t flits = 1000;
    int frame_size = 256;
};

int cmd_traffic_gen(const TrafficGenArgs& a, std::uint64_t seed, const std::string& out_path)
{
    TrafficSpec t;
    t.mode = parse_mode(a.mode);
    t.min_bytes = a.min_bytes;
    t.max_bytes = a.max_bytes;
    t.fixed_bytes = a.fixed_bytes;
    t.sweep_from = a.sweep_from;
    t.sweep_to = a.sweep_to;
    t.sweep_step = a.sweep_step;
    t.sweep_bytes_per_size = a.bytes_per_size;
    t.seed = seed != 0 ? seed : 1;
    const int bus = (a.frame_size - ProtocolConfig::kHeaderBits) / 8;
    const auto records = generate_records(t, bus, a.flits);
    Output out(out_path);
    write_traffic_csv(out.os(), records, bus);
    return 0;
}

std::vector<TrafficRecord> read_csv_file(const std::string& path, int bus)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    return read_traffic_csv(in, bus);
}

int cmd_traffic_validate(const std::string& sent, const std::string& received, int frame_size,
                         const std::string& out_path)
{
    const int bus = (frame_size - ProtocolConfig::kHeaderBits) / 8;
    const auto a = records_to_flits(read_csv_file(sent, bus));
    const auto b = records_to_flits(read_csv_file(received, bus));
    const auto mismatch = compare_streams(a, b);
    Output out(out_path);
    if (mismatch) {
        out.os() << "MISMATCH " << mismatch->to_string() << "\n";
        return 1;
    }
    out.os() << "OK " << a.size() << " flits identical\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"RIFL link-layer design calculators, simulator and traffic tools"};
    app.require_subcommand(1);
    app.fallthrough();
    std::uint64_t seed = 0;
    std::string out_path;
    bool full = false;
    unsigned jobs = 1;
    app.add_option("--seed", seed, "Override traffic and error seeds (0 keeps the config values)");
    app.add_option("--out", out_path, "Write output to this file instead of stdout");
    app.add_flag("--full", full, "Use full measurement volume instead of the scaled default");
    app.add_option("-j,--jobs", jobs, "Worker threads for independent points")->check(CLI::PositiveNumber);

    DesignArgs d;
    auto* design = app.add_subcommand("design", "Evaluate closed-form design tables");
    design->add_flag("--table2", d.table2, "Frame size, ID width, checksum width, MTBF");
    design->add_flag("--efficiency", d.efficiency, "Header efficiency per frame size");
    design->add_flag("--sizing", d.sizing, "Retransmit and flow-control buffer sizes");
    design->add_flag("--table4", d.table4, "MTBF against BER");
    design->add_option("--line-rate", d.line_rate, "Line rate in bits/s");
    design->add_option("--rtt", d.rtt, "Round-trip time in seconds");
    design->add_option("--ber", d.ber, "Bit error rate");
    design->add_option("--frame-size", d.frame_size, "Frame size in bits");
    design->add_option("--target-years", d.target_years, "Required MTBF in years");
    design->add_option("--bers", d.bers, "BER points for --table4")->delimiter(',');
    design->add_flag("--markdown", d.markdown, "Markdown tables instead of CSV");

    std::string config;
    auto* simulate = app.add_subcommand("simulate", "Run a configured link simulation");
    simulate->add_option("config", config, "Experiment config file")->required()->check(CLI::ExistingFile);

    std::string axis = "ber";
    auto* sweep = app.add_subcommand("sweep", "Run a configured sweep axis");
    sweep->add_option("config", config, "Experiment config file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--axis", axis, "ber, payload or lanes")->check(CLI::IsMember({"ber", "payload", "lanes"}));

    auto* traffic = app.add_subcommand("traffic", "Traffic CSV tools");
    traffic->require_subcommand(1);
    TrafficGenArgs g;
    auto* gen = traffic->add_subcommand("gen", "Generate a traffic CSV");
    gen->add_option("--mode", g.mode, "random, fixed or sweep")->check(CLI::IsMember({"random", "fixed", "sweep"}));
    gen->add_option("--min-bytes", g.min_bytes);
    gen->add_option("--max-bytes", g.max_bytes);
    gen->add_option("--fixed-bytes", g.fixed_bytes);
    gen->add_option("--sweep-from", g.sweep_from);
    gen->add_option("--sweep-to", g.sweep_to);
    gen->add_option("--sweep-step", g.sweep_step);
    gen->add_option("--bytes-per-size", g.bytes_per_size);
    gen->add_option("--flits", g.flits, "Number of flits to emit");
    gen->add_option("--frame-size", g.frame_size, "Frame size in bits (sets the bus width)");
    std::string sent_path;
    std::string received_path;
    int validate_frame_size = 256;
    auto* validate = traffic->add_subcommand("validate", "Compare a received traffic CSV against the sent one");
    validate->add_option("sent", sent_path)->required()->check(CLI::ExistingFile);
    validate->add_option("received", received_path)->required()->check(CLI::ExistingFile);
    validate->add_option("--frame-size", validate_frame_size, "Frame size in bits (sets the bus width)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*design)
            return cmd_design(d, out_path);
        if (*simulate)
            return cmd_simulate(config, seed, out_path, full, jobs);
        if (*sweep)
            return cmd_sweep(config, axis, seed, out_path, full, jobs);
        if (*gen)
            return cmd_traffic_gen(g, seed, out_path);
        if (*validate)
            return cmd_traffic_validate(sent_path, received_path, validate_frame_size, out_path);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 2;
}
