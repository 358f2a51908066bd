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

#include "bspower/capacity.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bspower
{

double stream_bits(const SystemConfig &config, double eigenvalue, double power_w)
{
    const double w = config.subcarrier_bw_hz;
    return w * config.slot_s * std::log1p(power_w * eigenvalue / (config.noise_psd_w_per_hz * w)) / std::numbers::ln2;
}

double equal_power_bits(const SystemConfig &config, std::span<const double> eigenvalues, double p_total_w,
                        int antennas)
{
    double bits = 0.0;
    for (double eps : eigenvalues)
        bits += stream_bits(config, eps, p_total_w / antennas);
    return bits;
}

std::vector<double> user_rates_bps(std::span<const PowerEntry> entries, const EigenGrid &eigen,
                                   const SystemConfig &config, int antennas)
{
    std::vector<double> bits(static_cast<std::size_t>(eigen.users()), 0.0);
    for (const PowerEntry &e : entries)
    {
        const auto ev = eigen.values(e.subcarrier, e.slot, e.user, antennas);
        if (e.eigen < 0 || e.eigen >= static_cast<int>(ev.size()))
            throw std::out_of_range("user_rates_bps: eigenchannel index out of range");
        bits[static_cast<std::size_t>(e.user)] += stream_bits(config, ev[static_cast<std::size_t>(e.eigen)], e.power_w);
    }
    for (double &b : bits)
        b /= config.frame_s();
    return bits;
}

} // namespace bspower
