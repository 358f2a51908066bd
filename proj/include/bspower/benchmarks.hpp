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

#include "bspower/channel.hpp"
#include "bspower/power_model.hpp"
#include "bspower/step1.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace bspower
{

enum class BenchmarkMode
{
    max_power,
    bandwidth_adapting,
    dtx_only
};

struct BenchmarkResult
{
    BenchmarkMode mode = BenchmarkMode::max_power;
    int antennas = 2;
    std::vector<double> slot_power_w;
    std::optional<double> supply_w; // absent on outage
    bool outage = false;
    int slots_slept = 0;
    std::vector<double> delivered_bits; // per user
};

/// Constant full-power transmission on every slot.
BenchmarkResult max_power(const PowerModelParams &params, int antennas = 2);

/// Bandwidth adaptation without sleep: each slot, users in round-robin order
/// claim their best remaining subcarrier until their share of the outstanding
/// frame bit target is covered. Claimed subcarriers radiate P_max / N split
/// evenly over the antennas; idle slots still cost p0.
BenchmarkResult ba_schedule(const ChannelGrid &grid, const EigenGrid &eigen, const SystemConfig &config,
                            const UserDemand &demand, const PowerModelParams &params, int antennas);

/// Full-power transmission on two antennas from the start of the frame until
/// every bit target is met, then DTX. Each slot's subcarriers are split with
/// equal quotas among users that still have bits outstanding.
BenchmarkResult dtx_schedule(const ChannelGrid &grid, const EigenGrid &eigen, const SystemConfig &config,
                             const UserDemand &demand, const PowerModelParams &params);

} // namespace bspower
