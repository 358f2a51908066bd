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

#include <span>
#include <vector>

namespace bspower
{

/// Power on one eigenchannel of one resource unit.
struct PowerEntry
{
    int user = 0;
    int slot = 0;
    int subcarrier = 0;
    int eigen = 0;
    double power_w = 0.0;
};

/// Bits carried in one slot by one stream: w tau log2(1 + P eps / (N0 w)).
double stream_bits(const SystemConfig &config, double eigenvalue, double power_w);

/// Bits carried on one resource unit when p_total_w is split equally over the
/// `antennas` transmit streams.
double equal_power_bits(const SystemConfig &config, std::span<const double> eigenvalues, double p_total_w,
                        int antennas);

/// Per-user frame rates (bit/s) of a power allocation, eigenvalues looked up
/// in `eigen` for the given antenna count.
std::vector<double> user_rates_bps(std::span<const PowerEntry> entries, const EigenGrid &eigen,
                                   const SystemConfig &config, int antennas);

} // namespace bspower
