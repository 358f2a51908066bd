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

#include "bspower/power_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bspower
{

double dbm_to_watt(double dbm)
{
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

double watt_to_dbm(double watt)
{
    return 10.0 * std::log10(watt) + 30.0;
}

double snap_power(double p_w)
{
    return std::abs(p_w) < kPowerFloorW ? 0.0 : p_w;
}

static void check_antennas(int antennas)
{
    if (antennas != 1 && antennas != 2)
        throw std::invalid_argument("unsupported transmit antenna count " + std::to_string(antennas) +
                                    " (only 1 and 2 are modelled)");
}

double PowerModelParams::p0(int antennas) const
{
    check_antennas(antennas);
    return p0_w[static_cast<std::size_t>(antennas - 1)];
}

void PowerModelParams::validate() const
{
    if (!(p_sleep_w < p0_w[0] && p0_w[0] < p0_w[1]))
        throw std::invalid_argument("power model requires p_sleep < p0(1) < p0(2)");
    // A zero slope is accepted so the circuit-power-only variant can be evaluated.
    if (!(delta_pm >= 0.0))
        throw std::invalid_argument("power model slope delta_pm must be non-negative");
    if (!(p_max_w > 0.0))
        throw std::invalid_argument("power model p_max must be positive");
}

double supply_power(const PowerModelParams &params, int antennas, double p_tx_w)
{
    check_antennas(antennas);
    const double p = snap_power(p_tx_w);
    if (p < 0.0 || p > params.p_max_w || std::isnan(p))
        throw std::domain_error("RF power " + std::to_string(p_tx_w) + " W outside the budget [0, " +
                                std::to_string(params.p_max_w) + "] W");
    if (p == 0.0)
        return params.p_sleep_w;
    return params.p0(antennas) + params.delta_pm * p;
}

double frame_supply_power(const PowerModelParams &params, const SlotPowerTrace &trace)
{
    if (trace.p_tx_w.empty())
        throw std::domain_error("frame_supply_power: empty slot trace");
    double sum = 0.0;
    for (double p : trace.p_tx_w)
        sum += supply_power(params, trace.antennas, p);
    return sum / static_cast<double>(trace.p_tx_w.size());
}

double energy_efficiency(double supply_w, double sum_rate_bps)
{
    if (!(supply_w > 0.0))
        throw std::domain_error("energy_efficiency: supply power must be positive");
    if (sum_rate_bps < 0.0)
        throw std::domain_error("energy_efficiency: negative rate");
    return sum_rate_bps / supply_w;
}

} // namespace bspower
