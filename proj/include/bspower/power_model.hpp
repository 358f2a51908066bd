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

#include <array>
#include <span>
#include <vector>

namespace bspower
{

/// Powers below this floor (W) are treated as exactly zero at module boundaries.
inline constexpr double kPowerFloorW = 1e-12;

double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);

/// Snaps floating-point dust below kPowerFloorW to exactly 0.
double snap_power(double p_w);

/// Linear base-station supply power model.
///
/// An active slot costs p0(M_T) + delta_pm * P_tx, a slot with zero RF output
/// is spent in DTX micro-sleep and costs p_sleep. The default values describe a
/// single sector of a macro site with up to two transmit chains.
struct PowerModelParams
{
    std::array<double, 2> p0_w{185.0, 260.0}; // idle-active supply power for 1 and 2 chains
    double delta_pm = 4.7;                    // load-dependence slope
    double p_sleep_w = 150.0;                 // DTX supply power
    double p_max_w = 39.810717055349734;      // per-slot RF budget, 46 dBm

    double p0(int antennas) const;

    /// Supply power at constant full-power transmission.
    double max_supply(int antennas = 2) const { return p0(antennas) + delta_pm * p_max_w; }

    /// Throws std::invalid_argument when the ordering p_sleep < p0[1] < p0[2]
    /// or the positivity constraints are violated.
    void validate() const;

    static PowerModelParams defaults() { return {}; }
};

struct SlotPowerTrace
{
    std::vector<double> p_tx_w; // one entry per slot
    int antennas = 2;
};

/// Supply power drawn while radiating p_tx_w. Zero RF power means DTX.
/// Throws std::domain_error outside [0, p_max] and std::invalid_argument for
/// antenna counts other than 1 or 2.
double supply_power(const PowerModelParams &params, int antennas, double p_tx_w);

/// Frame-average supply power, slots with zero power are slept.
double frame_supply_power(const PowerModelParams &params, const SlotPowerTrace &trace);

/// Delivered bits per Joule.
double energy_efficiency(double supply_w, double sum_rate_bps);

} // namespace bspower
