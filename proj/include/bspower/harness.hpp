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

#pragma once

#include "bspower/benchmarks.hpp"
#include "bspower/channel.hpp"
#include "bspower/power_model.hpp"
#include "bspower/step1.hpp"
#include "bspower/step2.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bspower
{

enum class Mode
{
    raps, // two-step joint antenna adaptation, power control and DTX
    ba1,  // bandwidth adaptation, one antenna
    ba2,  // bandwidth adaptation, two antennas
    dtx,  // full power then DTX
    max   // constant maximum power
};

Mode parse_mode(std::string_view name);
std::string_view to_string(Mode mode);

enum class Outage
{
    none,
    step1,
    step2
};

std::string_view to_string(Outage outage);

enum class Format
{
    csv,
    json
};

Format parse_format(std::string_view name);

struct RunConfig
{
    SystemConfig system;
    PowerModelParams power;
    std::vector<double> rates_bps{10.0e6};
    int drops = 100;
    std::uint64_t seed = 1;
    std::vector<Mode> modes{Mode::raps, Mode::ba1, Mode::ba2, Mode::dtx, Mode::max};
    ChannelSelect select = ChannelSelect::center;

    /// Throws std::invalid_argument for an empty mode list, no rates,
    /// negative rates or a non-positive drop count.
    void validate() const;
};

/// Reads flat "key = value" text ('#' starts a comment) into the system and
/// power parameters. Unknown keys are rejected.
void apply_config_text(std::string_view text, SystemConfig &system, PowerModelParams &power);
void load_config_file(const std::filesystem::path &path, SystemConfig &system, PowerModelParams &power);

/// Inverse of apply_config_text; every key is written.
std::string to_config_text(const SystemConfig &system, const PowerModelParams &power);

/// Everything RAPS produces for one drop at one rate.
struct RapsOutcome
{
    Outage outage = Outage::none;
    Step1Solution step1;
    std::optional<ResourcePlan> plan;
    std::optional<FrameAllocation> allocation;
    std::optional<double> supply_w; // absent on outage
};

RapsOutcome run_raps(const ChannelGrid &grid, const EigenGrid &eigen, const SystemConfig &config,
                     const UserDemand &demand, const PowerModelParams &power,
                     ChannelSelect select = ChannelSelect::center);

struct DropResult
{
    int drop = 0;
    std::uint64_t seed = 0;
    Mode mode = Mode::raps;
    double rate_bps = 0.0; // per-user target
    std::optional<int> antennas;
    std::optional<double> supply_w;
    std::optional<double> step1_w;
    Outage outage = Outage::none;
    int t_sleep = 0;
    std::optional<double> sum_rate_bps; // achieved
    std::optional<double> ee_bit_per_j;  // target sum rate / supply
};

struct AggregateRow
{
    double rate_bps = 0.0;
    Mode mode = Mode::raps;
    int drops = 0;
    double outage_prob = 0.0;
    std::optional<double> supply_mean_w;
    std::optional<double> supply_std_w;
    std::optional<double> step1_mean_w;
    std::optional<double> t_sleep_mean;
    std::optional<double> t_sleep_std;
    std::optional<double> ee_mean;
    std::optional<double> mt2_fraction;
};

struct ResultTable
{
    std::vector<DropResult> drops;
    std::vector<AggregateRow> aggregate;
};

/// Seed of drop `drop` under the master seed; all rates and modes of a drop
/// share its channel.
std::uint64_t drop_seed(std::uint64_t master, int drop);

/// Monte Carlo campaign. Rows are ordered by rate, drop, then mode as listed.
/// If allocation_csv is given, RAPS power allocations are appended to it.
ResultTable run(const RunConfig &config, std::ostream *allocation_csv = nullptr);

/// Per (rate, mode) statistics over the drop rows. Outage rows count toward the
/// outage probability only.
std::vector<AggregateRow> aggregate(const std::vector<DropResult> &drops, const RunConfig &config);

inline constexpr const char *kDropHeader =
    "drop,seed,mode,rate_bps,m_t,supply_w,step1_w,outage,t_sleep,sum_rate_bps,ee_bit_per_j";
inline constexpr const char *kAggregateHeader = "rate_bps,mode,drops,outage_prob,supply_mean_w,supply_std_w,"
                                                "step1_mean_w,t_sleep_mean,t_sleep_std,ee_mean_bit_per_j,mt2_fraction";

void write_drops_csv(std::ostream &out, const std::vector<DropResult> &rows);
void write_aggregate_csv(std::ostream &out, const std::vector<AggregateRow> &rows);
void write_drops_json(std::ostream &out, const std::vector<DropResult> &rows);
void write_aggregate_json(std::ostream &out, const std::vector<AggregateRow> &rows);

/// Writes drops.{csv,json} and aggregate.{csv,json} into out_dir and returns
/// the paths written. Throws std::invalid_argument for an empty table and
/// std::runtime_error on I/O failure.
std::vector<std::filesystem::path> emit(const ResultTable &results, Format format,
                                        const std::filesystem::path &out_dir);

/// Single block-fading link carrying a fixed spectral efficiency over the
/// frame while transmitting for a share phi of it.
struct TradeoffCurves
{
    bool feasible = false;
    double full_power_share = 0.0; // smallest phi reachable at p_max
    std::vector<double> phi;
    std::vector<std::optional<double>> pc_only;  // power control, idle at p0 otherwise
    std::vector<std::optional<double>> dtx_only; // p_max while transmitting, sleep otherwise
    std::vector<std::optional<double>> joint;    // power control plus sleep

    /// Index of the smallest present value of a curve, if any.
    static std::optional<std::size_t> argmin(const std::vector<std::optional<double>> &curve);
};

/// Samples phi = i / points for i = 1..points. gain_per_w is the
/// noise-normalised channel gain (1/W).
TradeoffCurves tradeoff_curve(double spectral_target, const PowerModelParams &params, double gain_per_w,
                              int antennas = 1, int points = 1000);

void write_tradeoff_csv(std::ostream &out, const TradeoffCurves &curves);

} // namespace bspower
