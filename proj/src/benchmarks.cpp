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

#include "bspower/benchmarks.hpp"

#include "bspower/capacity.hpp"
#include "bspower/step2.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace bspower
{

namespace
{

// Tolerance on "target met"; guards against a residual of a few ulps keeping a
// user active for another slot.
constexpr double kBitTolerance = 1e-9;

bool met(double outstanding, double target)
{
    return outstanding <= kBitTolerance * target;
}

void check_inputs(const ChannelGrid &grid, const EigenGrid &eigen, const SystemConfig &config,
                  const UserDemand &demand)
{
    if (static_cast<int>(demand.rate_bps.size()) != grid.users())
        throw std::invalid_argument("benchmark: demand size differs from user count");
    if (eigen.users() != grid.users() || eigen.subcarriers() != grid.subcarriers() || eigen.slots() != grid.slots())
        throw std::invalid_argument("benchmark: eigen grid does not match the channel grid");
    if (config.subcarriers != grid.subcarriers() || config.slots != grid.slots())
        throw std::invalid_argument("benchmark: config does not match the channel grid");
}

} // namespace

BenchmarkResult max_power(const PowerModelParams &params, int antennas)
{
    BenchmarkResult r;
    r.mode = BenchmarkMode::max_power;
    r.antennas = antennas;
    r.slot_power_w = {params.p_max_w};
    r.supply_w = params.p0(antennas) + params.delta_pm * params.p_max_w;
    return r;
}

BenchmarkResult ba_schedule(const ChannelGrid &grid, const EigenGrid &eigen, const SystemConfig &config,
                            const UserDemand &demand, const PowerModelParams &params, int antennas)
{
    check_inputs(grid, eigen, config, demand);
    const int users = grid.users();
    const int n_sc = grid.subcarriers();
    const int n_slots = grid.slots();
    const double psd_power = params.p_max_w / n_sc;

    BenchmarkResult r;
    r.mode = BenchmarkMode::bandwidth_adapting;
    r.antennas = antennas;
    r.slot_power_w.assign(static_cast<std::size_t>(n_slots), 0.0);
    r.delivered_bits.assign(static_cast<std::size_t>(users), 0.0);

    std::vector<double> target(static_cast<std::size_t>(users));
    for (int k = 0; k < users; ++k)
        target[static_cast<std::size_t>(k)] = demand.rate_bps[static_cast<std::size_t>(k)] * config.frame_s();
    std::vector<double> outstanding = target;

    std::vector<char> taken(static_cast<std::size_t>(n_sc));
    std::vector<std::vector<int>> ranking(static_cast<std::size_t>(users));
    std::vector<std::size_t> cursor(static_cast<std::size_t>(users));
    std::vector<double> slot_need(static_cast<std::size_t>(users));

    for (int t = 0; t < n_slots; ++t)
    {
        const auto metric = slot_metrics(grid, t, antennas);
        for (int k = 0; k < users; ++k)
        {
            auto &order = ranking[static_cast<std::size_t>(k)];
            order.resize(static_cast<std::size_t>(n_sc));
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                return metric[static_cast<std::size_t>(a * users + k)] > metric[static_cast<std::size_t>(b * users + k)];
            });
            cursor[static_cast<std::size_t>(k)] = 0;
            slot_need[static_cast<std::size_t>(k)] =
                outstanding[static_cast<std::size_t>(k)] / static_cast<double>(n_slots - t);
        }
        std::fill(taken.begin(), taken.end(), 0);

        int used = 0;
        bool progress = true;
        while (progress && used < n_sc)
        {
            progress = false;
            for (int k = 0; k < users && used < n_sc; ++k)
            {
                const auto ku = static_cast<std::size_t>(k);
                if (met(slot_need[ku], target[ku]) || slot_need[ku] <= 0.0)
                    continue;
                auto &c = cursor[ku];
                while (c < ranking[ku].size() && taken[static_cast<std::size_t>(ranking[ku][c])])
                    ++c;
                if (c == ranking[ku].size())
                    continue;
                const int n = ranking[ku][c];
                taken[static_cast<std::size_t>(n)] = 1;
                ++used;
                const double bits = equal_power_bits(config, eigen.values(n, t, k, antennas), psd_power, antennas);
                slot_need[ku] -= bits;
                outstanding[ku] -= bits;
                r.delivered_bits[ku] += bits;
                progress = true;
            }
        }
        r.slot_power_w[static_cast<std::size_t>(t)] = params.p_max_w * (static_cast<double>(used) / n_sc);
    }

    for (int k = 0; k < users; ++k)
        if (!met(outstanding[static_cast<std::size_t>(k)], target[static_cast<std::size_t>(k)]))
            r.outage = true;
    if (!r.outage)
    {
        double sum = 0.0;
        const double p0 = params.p0(antennas);
        for (double p : r.slot_power_w)
            sum += p0 + params.delta_pm * p; // no sleep: idle slots still cost p0
        r.supply_w = sum / n_slots;
    }
    return r;
}

BenchmarkResult dtx_schedule(const ChannelGrid &grid, const EigenGrid &eigen, const SystemConfig &config,
                             const UserDemand &demand, const PowerModelParams &params)
{
    check_inputs(grid, eigen, config, demand);
    constexpr int antennas = 2;
    const int users = grid.users();
    const int n_sc = grid.subcarriers();
    const int n_slots = grid.slots();
    const double psd_power = params.p_max_w / n_sc;

    BenchmarkResult r;
    r.mode = BenchmarkMode::dtx_only;
    r.antennas = antennas;
    r.slot_power_w.assign(static_cast<std::size_t>(n_slots), 0.0);
    r.delivered_bits.assign(static_cast<std::size_t>(users), 0.0);

    std::vector<double> target(static_cast<std::size_t>(users));
    for (int k = 0; k < users; ++k)
        target[static_cast<std::size_t>(k)] = demand.rate_bps[static_cast<std::size_t>(k)] * config.frame_s();
    std::vector<double> outstanding = target;

    int t = 0;
    for (; t < n_slots; ++t)
    {
        std::vector<int> waiting;
        for (int k = 0; k < users; ++k)
            if (!met(outstanding[static_cast<std::size_t>(k)], target[static_cast<std::size_t>(k)]))
                waiting.push_back(k);
        if (waiting.empty())
            break;

        std::vector<int> quota(static_cast<std::size_t>(users), 0);
        const int share = n_sc / static_cast<int>(waiting.size());
        int rest = n_sc - share * static_cast<int>(waiting.size());
        for (int k : waiting)
            quota[static_cast<std::size_t>(k)] = share + (rest-- > 0 ? 1 : 0);

        const auto sets = rcg_assign(quota, slot_metrics(grid, t, antennas), users);
        for (int k : waiting)
            for (int n : sets[static_cast<std::size_t>(k)])
            {
                const double bits = equal_power_bits(config, eigen.values(n, t, k, antennas), psd_power, antennas);
                outstanding[static_cast<std::size_t>(k)] -= bits;
                r.delivered_bits[static_cast<std::size_t>(k)] += bits;
            }
        r.slot_power_w[static_cast<std::size_t>(t)] = params.p_max_w;
    }
    r.slots_slept = n_slots - t;

    for (int k = 0; k < users; ++k)
        if (!met(outstanding[static_cast<std::size_t>(k)], target[static_cast<std::size_t>(k)]))
            r.outage = true;
    if (!r.outage)
        r.supply_w = frame_supply_power(params, {r.slot_power_w, antennas});
    return r;
}

} // namespace bspower
