// Copyright 2026 The bspower Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "bspower/harness.hpp"

#include "bspower/format.hpp"
#include "bspower/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace bspower
{

Mode parse_mode(std::string_view name)
{
    if (name == "raps")
        return Mode::raps;
    if (name == "ba1")
        return Mode::ba1;
    if (name == "ba2")
        return Mode::ba2;
    if (name == "dtx")
        return Mode::dtx;
    if (name == "max")
        return Mode::max;
    throw std::invalid_argument("unknown mode '" + std::string(name) + "' (expected raps, ba1, ba2, dtx or max)");
}

std::string_view to_string(Mode mode)
{
    switch (mode)
    {
    case Mode::raps:
        return "raps";
    case Mode::ba1:
        return "ba1";
    case Mode::ba2:
        return "ba2";
    case Mode::dtx:
        return "dtx";
    case Mode::max:
        return "max";
    }
    return "?";
}

std::string_view to_string(Outage outage)
{
    switch (outage)
    {
    case Outage::none:
        return "none";
    case Outage::step1:
        return "step1";
    case Outage::step2:
        return "step2";
    }
    return "?";
}

Format parse_format(std::string_view name)
{
    if (name == "csv")
        return Format::csv;
    if (name == "json")
        return Format::json;
    throw std::invalid_argument("unknown format '" + std::string(name) + "' (expected csv or json)");
}

void RunConfig::validate() const
{
    if (modes.empty())
        throw std::invalid_argument("run config: mode list is empty");
    if (rates_bps.empty())
        throw std::invalid_argument("run config: no target rates");
    for (double r : rates_bps)
        if (!(r >= 0.0) || !std::isfinite(r))
            throw std::invalid_argument("run config: target rates must be finite and non-negative");
    if (drops < 1)
        throw std::invalid_argument("run config: drop count must be at least 1");
    system.validate();
    power.validate();
}

// ---------- config text ----------

namespace
{

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

} // namespace

void apply_config_text(std::string_view text, SystemConfig &system, PowerModelParams &power)
{
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw))
    {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        const auto num = [&] { return parse_double(value); };
        const auto integer = [&] { return parse_integer<int>(value); };

        FadingParams &f = system.fading;
        if (key == "k")
            system.users = integer();
        else if (key == "n_subcarriers")
            system.subcarriers = integer();
        else if (key == "t_slots")
            system.slots = integer();
        else if (key == "w_hz")
            system.subcarrier_bw_hz = num();
        else if (key == "tau_s")
            system.slot_s = num();
        else if (key == "n0_w_per_hz")
            system.noise_psd_w_per_hz = num();
        else if (key == "m_r")
            system.rx_antennas = integer();
        else if (key == "cell_radius_m")
            system.cell_radius_m = num();
        else if (key == "min_distance_m")
            system.min_distance_m = num();
        else if (key == "p0_1_w")
            power.p0_w[0] = num();
        else if (key == "p0_2_w")
            power.p0_w[1] = num();
        else if (key == "delta_pm")
            power.delta_pm = num();
        else if (key == "p_sleep_w")
            power.p_sleep_w = num();
        else if (key == "p_max_dbm")
            power.p_max_w = dbm_to_watt(num());
        else if (key == "pathloss_intercept_db")
            f.pathloss_intercept_db = num();
        else if (key == "pathloss_slope_db")
            f.pathloss_slope_db = num();
        else if (key == "shadowing_std_db")
            f.shadowing_std_db = num();
        else if (key == "fading_taps")
            f.taps = integer();
        else if (key == "tap_spacing_s")
            f.tap_spacing_s = num();
        else if (key == "pdp_decay_taps")
            f.pdp_decay_taps = num();
        else if (key == "speed_mps")
            f.speed_mps = num();
        else if (key == "carrier_hz")
            f.carrier_hz = num();
        else
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
}

void load_config_file(const std::filesystem::path &path, SystemConfig &system, PowerModelParams &power)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    apply_config_text(buf.str(), system, power);
}

std::string to_config_text(const SystemConfig &system, const PowerModelParams &power)
{
    std::ostringstream out;
    const FadingParams &f = system.fading;
    out << "k = " << system.users << '\n'
        << "n_subcarriers = " << system.subcarriers << '\n'
        << "t_slots = " << system.slots << '\n'
        << "w_hz = " << format_double(system.subcarrier_bw_hz) << '\n'
        << "tau_s = " << format_double(system.slot_s) << '\n'
        << "n0_w_per_hz = " << format_double(system.noise_psd_w_per_hz) << '\n'
        << "m_r = " << system.rx_antennas << '\n'
        << "cell_radius_m = " << format_double(system.cell_radius_m) << '\n'
        << "min_distance_m = " << format_double(system.min_distance_m) << '\n'
        << "p0_1_w = " << format_double(power.p0_w[0]) << '\n'
        << "p0_2_w = " << format_double(power.p0_w[1]) << '\n'
        << "delta_pm = " << format_double(power.delta_pm) << '\n'
        << "p_sleep_w = " << format_double(power.p_sleep_w) << '\n'
        << "p_max_dbm = " << format_double(watt_to_dbm(power.p_max_w)) << '\n'
        << "pathloss_intercept_db = " << format_double(f.pathloss_intercept_db) << '\n'
        << "pathloss_slope_db = " << format_double(f.pathloss_slope_db) << '\n'
        << "shadowing_std_db = " << format_double(f.shadowing_std_db) << '\n'
        << "fading_taps = " << f.taps << '\n'
        << "tap_spacing_s = " << format_double(f.tap_spacing_s) << '\n'
        << "pdp_decay_taps = " << format_double(f.pdp_decay_taps) << '\n'
        << "speed_mps = " << format_double(f.speed_mps) << '\n'
        << "carrier_hz = " << format_double(f.carrier_hz) << '\n';
    return out.str();
}

// ---------- pipeline ----------

RapsOutcome run_raps(const ChannelGrid &grid, const EigenGrid &eigen, const SystemConfig &config,
                     const UserDemand &demand, const PowerModelParams &power, ChannelSelect select)
{
    RapsOutcome out;
    out.step1 = solve(make_step1_problem(grid, config, demand, power, select));
    if (!out.step1.feasible)
    {
        out.outage = Outage::step1;
        return out;
    }
    out.plan = quantize(out.step1, grid.subcarriers(), grid.slots(), grid.users());
    out.allocation = allocate_frame(*out.plan, grid, eigen, config, out.step1, demand, power);
    if (out.allocation->power_budget_exceeded)
    {
        out.outage = Outage::step2;
        return out;
    }
    out.supply_w = frame_supply_power(power, out.allocation->trace());
    return out;
}

std::uint64_t drop_seed(std::uint64_t master, int drop)
{
    return derive_seed(master, static_cast<std::uint64_t>(drop));
}

namespace
{

DropResult benchmark_row(const BenchmarkResult &b, double target_sum_bps, double frame_s)
{
    DropResult row;
    row.antennas = b.antennas;
    row.outage = b.outage ? Outage::step1 : Outage::none;
    row.t_sleep = b.slots_slept;
    double bits = 0.0;
    for (double x : b.delivered_bits)
        bits += x;
    row.sum_rate_bps = bits / frame_s;
    if (b.supply_w)
    {
        row.supply_w = b.supply_w;
        row.ee_bit_per_j = energy_efficiency(*b.supply_w, target_sum_bps);
    }
    return row;
}

} // namespace

ResultTable run(const RunConfig &config, std::ostream *allocation_csv)
{
    config.validate();
    const SystemConfig &sys = config.system;
    const std::size_t n_rates = config.rates_bps.size();
    const std::size_t n_modes = config.modes.size();
    const std::size_t n_drops = static_cast<std::size_t>(config.drops);

    if (allocation_csv && n_rates != 1)
        throw std::invalid_argument("allocation dump needs exactly one target rate");
    if (allocation_csv)
        *allocation_csv << kAllocationHeader << '\n';

    // rows[(rate * drops + drop) * modes + mode]
    std::vector<DropResult> rows(n_rates * n_drops * n_modes);
    for (int d = 0; d < config.drops; ++d)
    {
        const std::uint64_t seed = drop_seed(config.seed, d);
        const ChannelGrid grid = generate(sys, seed);
        const EigenGrid eigen(grid);

        for (std::size_t r = 0; r < n_rates; ++r)
        {
            const double rate = config.rates_bps[r];
            const UserDemand demand = UserDemand::uniform(sys.users, rate);
            const double target_sum = rate * sys.users;
            for (std::size_t m = 0; m < n_modes; ++m)
            {
                DropResult row;
                const Mode mode = config.modes[m];
                switch (mode)
                {
                case Mode::raps:
                {
                    const RapsOutcome o = run_raps(grid, eigen, sys, demand, config.power, config.select);
                    row.outage = o.outage;
                    if (o.step1.feasible)
                    {
                        row.antennas = o.step1.antennas;
                        row.step1_w = o.step1.supply_w;
                    }
                    if (o.plan)
                        row.t_sleep = o.plan->t_sleep;
                    if (o.allocation)
                    {
                        double bits = 0.0;
                        for (double b : o.allocation->achieved_bits)
                            bits += b;
                        row.sum_rate_bps = bits / sys.frame_s();
                        if (allocation_csv)
                            write_allocation_rows(*allocation_csv, d, *o.allocation);
                    }
                    if (o.supply_w)
                    {
                        row.supply_w = o.supply_w;
                        row.ee_bit_per_j = energy_efficiency(*o.supply_w, target_sum);
                    }
                    break;
                }
                case Mode::ba1:
                case Mode::ba2:
                    row = benchmark_row(
                        ba_schedule(grid, eigen, sys, demand, config.power, mode == Mode::ba1 ? 1 : 2), target_sum,
                        sys.frame_s());
                    break;
                case Mode::dtx:
                    row = benchmark_row(dtx_schedule(grid, eigen, sys, demand, config.power), target_sum,
                                        sys.frame_s());
                    break;
                case Mode::max:
                {
                    const BenchmarkResult b = max_power(config.power, 2);
                    row.antennas = 2;
                    row.supply_w = b.supply_w;
                    row.sum_rate_bps = target_sum;
                    row.ee_bit_per_j = energy_efficiency(*b.supply_w, target_sum);
                    break;
                }
                }
                row.drop = d;
                row.seed = seed;
                row.mode = mode;
                row.rate_bps = rate;
                rows[(r * n_drops + static_cast<std::size_t>(d)) * n_modes + m] = row;
            }
        }
    }

    ResultTable table;
    table.drops = std::move(rows);
    table.aggregate = aggregate(table.drops, config);
    return table;
}

std::vector<AggregateRow> aggregate(const std::vector<DropResult> &drops, const RunConfig &config)
{
    struct Acc
    {
        int drops = 0;
        int outages = 0;
        std::vector<double> supply, step1, t_sleep, ee;
        int mt2 = 0;
        int with_antennas = 0;
    };

    auto mean = [](const std::vector<double> &v) -> std::optional<double> {
        if (v.empty())
            return std::nullopt;
        double s = 0.0;
        for (double x : v)
            s += x;
        return s / static_cast<double>(v.size());
    };
    auto stddev = [&](const std::vector<double> &v) -> std::optional<double> {
        if (v.empty())
            return std::nullopt;
        if (v.size() == 1)
            return 0.0;
        const double m = *mean(v);
        double s = 0.0;
        for (double x : v)
            s += (x - m) * (x - m);
        return std::sqrt(s / static_cast<double>(v.size() - 1));
    };

    std::vector<AggregateRow> out;
    for (double rate : config.rates_bps)
        for (Mode mode : config.modes)
        {
            Acc acc;
            for (const DropResult &d : drops)
            {
                if (d.rate_bps != rate || d.mode != mode)
                    continue;
                ++acc.drops;
                if (d.outage != Outage::none)
                {
                    ++acc.outages;
                    continue;
                }
                if (d.supply_w)
                    acc.supply.push_back(*d.supply_w);
                if (d.step1_w)
                    acc.step1.push_back(*d.step1_w);
                if (d.ee_bit_per_j)
                    acc.ee.push_back(*d.ee_bit_per_j);
                acc.t_sleep.push_back(d.t_sleep);
                if (d.antennas)
                {
                    ++acc.with_antennas;
                    acc.mt2 += *d.antennas == 2 ? 1 : 0;
                }
            }
            AggregateRow row;
            row.rate_bps = rate;
            row.mode = mode;
            row.drops = acc.drops;
            row.outage_prob = acc.drops ? static_cast<double>(acc.outages) / acc.drops : 0.0;
            row.supply_mean_w = mean(acc.supply);
            row.supply_std_w = stddev(acc.supply);
            row.step1_mean_w = mean(acc.step1);
            row.t_sleep_mean = mean(acc.t_sleep);
            row.t_sleep_std = stddev(acc.t_sleep);
            row.ee_mean = mean(acc.ee);
            if (acc.with_antennas)
                row.mt2_fraction = static_cast<double>(acc.mt2) / acc.with_antennas;
            out.push_back(row);
        }
    return out;
}

// ---------- emission ----------

void write_drops_csv(std::ostream &out, const std::vector<DropResult> &rows)
{
    out << kDropHeader << '\n';
    for (const DropResult &r : rows)
    {
        out << r.drop << ',' << r.seed << ',' << to_string(r.mode) << ',' << format_double(r.rate_bps) << ','
            << (r.antennas ? std::to_string(*r.antennas) : std::string{}) << ',' << format_optional(r.supply_w) << ','
            << format_optional(r.step1_w) << ',' << to_string(r.outage) << ',' << r.t_sleep << ','
            << format_optional(r.sum_rate_bps) << ',' << format_optional(r.ee_bit_per_j) << '\n';
    }
}

void write_aggregate_csv(std::ostream &out, const std::vector<AggregateRow> &rows)
{
    out << kAggregateHeader << '\n';
    for (const AggregateRow &r : rows)
    {
        out << format_double(r.rate_bps) << ',' << to_string(r.mode) << ',' << r.drops << ','
            << format_double(r.outage_prob) << ',' << format_optional(r.supply_mean_w) << ','
            << format_optional(r.supply_std_w) << ',' << format_optional(r.step1_mean_w) << ','
            << format_optional(r.t_sleep_mean) << ',' << format_optional(r.t_sleep_std) << ','
            << format_optional(r.ee_mean) << ',' << format_optional(r.mt2_fraction) << '\n';
    }
}

namespace
{

template <typename T>
nlohmann::ordered_json opt(const std::optional<T> &v)
{
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

} // namespace

void write_drops_json(std::ostream &out, const std::vector<DropResult> &rows)
{
    auto arr = nlohmann::ordered_json::array();
    for (const DropResult &r : rows)
    {
        nlohmann::ordered_json j;
        j["drop"] = r.drop;
        j["seed"] = r.seed;
        j["mode"] = to_string(r.mode);
        j["rate_bps"] = r.rate_bps;
        j["m_t"] = opt(r.antennas);
        j["supply_w"] = opt(r.supply_w);
        j["step1_w"] = opt(r.step1_w);
        j["outage"] = to_string(r.outage);
        j["t_sleep"] = r.t_sleep;
        j["sum_rate_bps"] = opt(r.sum_rate_bps);
        j["ee_bit_per_j"] = opt(r.ee_bit_per_j);
        arr.push_back(std::move(j));
    }
    out << arr.dump(1) << '\n';
}

void write_aggregate_json(std::ostream &out, const std::vector<AggregateRow> &rows)
{
    auto arr = nlohmann::ordered_json::array();
    for (const AggregateRow &r : rows)
    {
        nlohmann::ordered_json j;
        j["rate_bps"] = r.rate_bps;
        j["mode"] = to_string(r.mode);
        j["drops"] = r.drops;
        j["outage_prob"] = r.outage_prob;
        j["supply_mean_w"] = opt(r.supply_mean_w);
        j["supply_std_w"] = opt(r.supply_std_w);
        j["step1_mean_w"] = opt(r.step1_mean_w);
        j["t_sleep_mean"] = opt(r.t_sleep_mean);
        j["t_sleep_std"] = opt(r.t_sleep_std);
        j["ee_mean_bit_per_j"] = opt(r.ee_mean);
        j["mt2_fraction"] = opt(r.mt2_fraction);
        arr.push_back(std::move(j));
    }
    out << arr.dump(1) << '\n';
}

std::vector<std::filesystem::path> emit(const ResultTable &results, Format format,
                                        const std::filesystem::path &out_dir)
{
    if (results.drops.empty())
        throw std::invalid_argument("emit: no results to write");
    std::filesystem::create_directories(out_dir);
    const std::string ext = format == Format::csv ? ".csv" : ".json";
    const auto drops_path = out_dir / ("drops" + ext);
    const auto agg_path = out_dir / ("aggregate" + ext);

    auto open = [](const std::filesystem::path &p) {
        std::ofstream f(p, std::ios::binary | std::ios::trunc);
        if (!f)
            throw std::runtime_error("cannot write " + p.string());
        return f;
    };
    {
        auto f = open(drops_path);
        format == Format::csv ? write_drops_csv(f, results.drops) : write_drops_json(f, results.drops);
        if (!f)
            throw std::runtime_error("write failed: " + drops_path.string());
    }
    {
        auto f = open(agg_path);
        format == Format::csv ? write_aggregate_csv(f, results.aggregate) : write_aggregate_json(f, results.aggregate);
        if (!f)
            throw std::runtime_error("write failed: " + agg_path.string());
    }
    return {drops_path, agg_path};
}

// ---------- single-link trade-off ----------

std::optional<std::size_t> TradeoffCurves::argmin(const std::vector<std::optional<double>> &curve)
{
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < curve.size(); ++i)
        if (curve[i] && (!best || *curve[i] < *curve[*best]))
            best = i;
    return best;
}

TradeoffCurves tradeoff_curve(double spectral_target, const PowerModelParams &params, double gain_per_w,
                              int antennas, int points)
{
    if (!(spectral_target > 0.0) || !(gain_per_w > 0.0))
        throw std::invalid_argument("tradeoff_curve: target and gain must be positive");
    if (points < 1)
        throw std::invalid_argument("tradeoff_curve: need at least one sample");
    params.validate();

    TradeoffCurves out;
    const double full_rate = std::log2(1.0 + params.p_max_w * gain_per_w);
    out.full_power_share = spectral_target / full_rate;
    out.feasible = out.full_power_share <= 1.0;

    const double p0 = params.p0(antennas);
    const double busy_full = p0 + params.delta_pm * params.p_max_w;
    for (int i = 1; i <= points; ++i)
    {
        const double phi = static_cast<double>(i) / points;
        out.phi.push_back(phi);
        std::optional<double> pc, dtx, joint;
        if (out.feasible)
        {
            const double p_tx = std::expm1(spectral_target / phi * std::numbers::ln2) / gain_per_w;
            if (p_tx <= params.p_max_w)
            {
                pc = p0 + phi * params.delta_pm * p_tx;
                joint = phi * (p0 + params.delta_pm * p_tx) + (1.0 - phi) * params.p_sleep_w;
            }
            if (phi * full_rate >= spectral_target * (1.0 - 1e-12))
                dtx = phi * busy_full + (1.0 - phi) * params.p_sleep_w;
        }
        out.pc_only.push_back(pc);
        out.dtx_only.push_back(dtx);
        out.joint.push_back(joint);
    }
    return out;
}

void write_tradeoff_csv(std::ostream &out, const TradeoffCurves &curves)
{
    out << "phi,pc_only_w,dtx_only_w,joint_w\n";
    for (std::size_t i = 0; i < curves.phi.size(); ++i)
        out << format_double(curves.phi[i]) << ',' << format_optional(curves.pc_only[i]) << ','
            << format_optional(curves.dtx_only[i]) << ',' << format_optional(curves.joint[i]) << '\n';
}

} // namespace bspower
