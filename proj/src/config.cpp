#include "fastswitch/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fastswitch {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Each struct lists its fields once; the same list drives reading and writing.

template <class Io>
void visit(Io& io, IvCurve& c)
{
    io("v0", c.v0);
    io("a", c.a);
    io("b", c.b);
    io("c", c.c);
    io("v_min", c.v_min);
    io("v_max", c.v_max);
}

template <class Io>
void visit(Io& io, PlantParams& p)
{
    io("base_frequency_thz", p.base_frequency_thz);
    io("tuning_span_thz", p.tuning_span_thz);
    io("rear_range_ma", p.rear_range_ma);
    io("phase_range_ma", p.phase_range_ma);
    io("front_range_ma", p.front_range_ma);
    io("n_front_pairs", p.n_front_pairs);
    io("rear_tuning_ghz", p.rear_tuning_ghz);
    io("rear_saturation_ma", p.rear_saturation_ma);
    io("front_tuning_ghz", p.front_tuning_ghz);
    io("cavity_mode_spacing_ghz", p.cavity_mode_spacing_ghz);
    io("hop_hysteresis", p.hop_hysteresis);
    io("phase_anchor_ma", p.phase_anchor_ma);
    io("comb_rear_coupling", p.comb_rear_coupling);
    io("mode_pulling", p.mode_pulling);
    io("soa_current_ma", p.soa_current_ma);
    io("gain_current_ma", p.gain_current_ma);
    io("carrier_time_constant_ns", p.carrier_time_constant_ns);
    io("slow_time_constant_ns", p.slow_time_constant_ns);
    io("slow_fraction", p.slow_fraction);
    io("thermal_gain", p.thermal_gain);
    io("thermal_rise_ns", p.thermal_rise_ns);
    io("thermal_decay_ns", p.thermal_decay_ns);
    io("rear_heat_comb_ghz_per_ma", p.rear_heat_comb_ghz_per_ma);
    io("drive_bandwidth_mhz", p.drive_bandwidth_mhz);
    io("awg_sample_rate_msps", p.awg_sample_rate_msps);
    io("awg_bits", p.awg_bits);
    io("mux_delay_min_ns", p.mux_delay_min_ns);
    io("mux_delay_max_ns", p.mux_delay_max_ns);
    io("iv_curves", p.iv_curves);
    io("combined_linewidth_mhz", p.combined_linewidth_mhz);
    io("rx_bandwidth_ghz", p.rx_bandwidth_ghz);
    io("rx_filter_order", p.rx_filter_order);
    io("rx_sample_rate_gsps", p.rx_sample_rate_gsps);
    io("capture_snr_db", p.capture_snr_db);
    io("burst_period_ns", p.burst_period_ns);
    io("capture_bursts", p.capture_bursts);
    io("rng_seed", p.rng_seed);
}

template <class Io>
void visit(Io& io, OptimizerConfig& o)
{
    io("mu", o.mu);
    io("mu_phase", o.mu_phase);
    io("n_updates", o.n_updates);
    io("n_seeds", o.n_seeds);
    io("seed_step", o.seed_step);
    io("k_rising", o.k_rising);
    io("k_falling", o.k_falling);
    io("bin_width_ns", o.bin_width_ns);
    io("settle_threshold_ghz", o.settle_threshold_ghz);
    io("weight_limit", o.weight_limit);
    io("phase_weight_min", o.phase_weight_min);
    io("phase_weight_max", o.phase_weight_max);
    io("mode_spacing_ghz", o.mode_spacing_ghz);
    io("keep_best", o.keep_best);
}

template <class Io>
void visit(Io& io, MapResolution& m)
{
    io("rear_step_ma", m.rear_step_ma);
    io("front_step_ma", m.front_step_ma);
    io("phase_ma", m.phase_ma);
}

template <class Io>
void visit(Io& io, PlacementConfig& c)
{
    io("first_thz", c.first_thz);
    io("last_thz", c.last_thz);
    io("spacing_ghz", c.spacing_ghz);
    io("max_rear_ma", c.max_rear_ma);
    io("max_error_mhz", c.max_error_mhz);
    io("candidate_window_ghz", c.candidate_window_ghz);
    io("rear_search_below_ma", c.rear_search_below_ma);
    io("rear_search_above_ma", c.rear_search_above_ma);
    io("rear_coarse_step_ma", c.rear_coarse_step_ma);
    io("rear_fine_step_ma", c.rear_fine_step_ma);
    io("phase_scan_step_ma", c.phase_scan_step_ma);
    io("min_phase_margin_ma", c.min_phase_margin_ma);
}

template <class Io>
void visit(Io& io, WorstCaseConfig& w)
{
    io("n_extra", w.n_extra);
}

template <class Io>
void visit(Io& io, EstimatorConfig& e)
{
    io("window_ns", e.window_ns);
    io("power_threshold", e.power_threshold);
    io("reference_power", e.reference_power);
}

template <class Io>
void visit(Io& io, SimulatedTestbedConfig& t)
{
    io("n_average", t.n_average);
    io("estimator", t.estimator);
}

template <class Io>
void visit(Io& io, RunConfig& r)
{
    io("plant", r.plant);
    io("optimizer", r.optimizer);
    io("map", r.map);
    io("placement", r.placement);
    io("worst_case", r.worst_case);
    io("testbed", r.testbed);
    io("parallelism", r.parallelism);
    io("output_dir", r.output_dir);
}

struct Reader {
    const json& j;
    std::string path;
    std::set<std::string> known{};

    template <class T>
    void operator()(const char* name, T& field)
    {
        known.insert(name);
        const auto it = j.find(name);
        if (it == j.end()) return;
        read(*it, path.empty() ? std::string(name) : path + "." + name, field);
    }

    static void expect(bool ok, const std::string& where, const char* what)
    {
        if (!ok) throw ConfigError(where + ": expected " + what);
    }

    static void read(const json& v, const std::string& where, double& out)
    {
        expect(v.is_number(), where, "a number");
        out = v.get<double>();
    }
    static void read(const json& v, const std::string& where, int& out)
    {
        expect(v.is_number_integer(), where, "an integer");
        out = v.get<int>();
    }
    static void read(const json& v, const std::string& where, std::uint64_t& out)
    {
        expect(v.is_number_unsigned(), where, "a non-negative integer");
        out = v.get<std::uint64_t>();
    }
    static void read(const json& v, const std::string& where, bool& out)
    {
        expect(v.is_boolean(), where, "true or false");
        out = v.get<bool>();
    }
    static void read(const json& v, const std::string& where, std::filesystem::path& out)
    {
        expect(v.is_string(), where, "a string");
        out = v.get<std::string>();
    }
    template <class T>
    static void read(const json& v, const std::string& where, PerSection<T>& out)
    {
        expect(v.is_object(), where, "an object keyed by section");
        for (const auto& [key, value] : v.items()) {
            Section s{};
            try {
                s = section_from_string(key);
            } catch (const std::invalid_argument&) {
                throw ConfigError(where + ": unknown section '" + key + "'");
            }
            read(value, where + "." + key, out[s]);
        }
    }
    template <class T>
    static void read(const json& v, const std::string& where, T& out)
    {
        expect(v.is_object(), where, "an object");
        Reader sub{v, where};
        visit(sub, out);
        sub.reject_unknown();
    }

    void reject_unknown() const
    {
        for (const auto& [key, value] : j.items())
            if (!known.count(key)) throw ConfigError((path.empty() ? "" : path + ": ") + "unknown key '" + key + "'");
    }
};

struct Writer {
    ordered_json out = ordered_json::object();

    template <class T>
    void operator()(const char* name, T& field)
    {
        out[name] = write(field);
    }

    static ordered_json write(double v) { return v; }
    static ordered_json write(int v) { return v; }
    static ordered_json write(std::uint64_t v) { return v; }
    static ordered_json write(bool v) { return v; }
    static ordered_json write(std::filesystem::path& v) { return v.string(); }
    template <class T>
    static ordered_json write(PerSection<T>& v)
    {
        ordered_json o = ordered_json::object();
        for (Section s : kDynamicSections) o[std::string(to_string(s))] = write(v[s]);
        return o;
    }
    template <class T>
    static ordered_json write(T& v)
    {
        Writer sub;
        visit(sub, v);
        return sub.out;
    }
};

}  // namespace

void RunConfig::validate() const
{
    plant.validate();
    optimizer.validate();
    map.validate();
    placement.validate();
    if (worst_case.n_extra < 0) throw std::invalid_argument("worst_case.n_extra must be >= 0");
    if (testbed.n_average < 1) throw std::invalid_argument("testbed.n_average must be >= 1");
    if (!(testbed.estimator.window_ns > 0.0)) throw std::invalid_argument("testbed.estimator.window_ns must be > 0");
    if (parallelism < 0) throw std::invalid_argument("parallelism must be >= 0");
    if (output_dir.empty()) throw std::invalid_argument("output_dir must not be empty");
}

RunConfig run_config_from_json(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    RunConfig config;
    Reader reader{doc, ""};
    visit(reader, config);
    reader.reject_unknown();
    try {
        config.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return run_config_from_json(ss.str());
}

std::string run_config_to_json(const RunConfig& config)
{
    RunConfig copy = config;
    return Writer::write(copy).dump(2) + "\n";
}

}  // namespace fastswitch
