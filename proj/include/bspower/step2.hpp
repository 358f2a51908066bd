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

#include "bspower/capacity.hpp"
#include "bspower/channel.hpp"
#include "bspower/power_model.hpp"
#include "bspower/step1.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace bspower
{

/// Integer frame plan derived from the real-valued shares.
struct ResourcePlan
{
    std::vector<int> resources;            // m_k, resource units per user
    int t_sleep = 0;                       // DTX slots, placed at the end of the frame
    int t_active = 0;                      // T - t_sleep
    std::vector<std::vector<int>> quota;   // quota[t][k] subcarriers per active slot
    bool high_load = false;                // T N mu_sleep < K branch taken

    /// Throws std::logic_error if the conservation or quota invariants fail.
    void check(int subcarriers, int slots) const;
};

/// Maps shares mu = (mu_1..mu_K, mu_sleep) onto resource counts, DTX slots and
/// per-slot quotas.
///
/// Normal load: m_k = ceil(mu_k N T), T_sleep = floor(T mu_sleep - K / N).
/// High load (T N mu_sleep < K): no DTX and m_k = floor(mu_k N T). Leftover
/// units go round-robin to users with a positive share, lowest index first.
/// Each active slot then receives floor(m_k / T_active) units per user and the
/// per-user remainders are wrapped round-robin across slots so that the slot
/// quotas of user k add up to m_k exactly.
ResourcePlan quantize(std::span<const double> mu, int subcarriers, int slots);
ResourcePlan quantize(const Step1Solution &step1, int subcarriers, int slots, int users);

/// Greedy subcarrier assignment for one slot with quota trading.
///
/// `metric` is row-major [n][k] with `users` columns. Phase one gives each
/// subcarrier to its best user, phase two moves subcarriers from over-quota
/// users to the under-quota user whose metric is closest. Ties go to the lowest
/// index. Returns each user's subcarriers in ascending order.
std::vector<std::vector<int>> rcg_assign(std::span<const int> quota, std::span<const double> metric, int users);

/// Ranking metric matrix [n][k] for slot t.
std::vector<double> slot_metrics(const ChannelGrid &grid, int slot, int antennas);

struct Patch
{
    int resource = 0; // slot * N + subcarrier
    int eigen = 0;
    double alpha_w = 0.0; // N0 w / eps
};

/// Patches for a set of resources, sorted by ascending height (ties by
/// resource, then eigenchannel). Zero eigenvalues carry nothing and are skipped.
std::vector<Patch> build_patches(const EigenGrid &eigen, const SystemConfig &config, int user, int antennas,
                                 std::span<const std::pair<int, int>> resources);

struct IwfResult
{
    std::vector<double> power_w;        // aligned with the input patches
    std::size_t active = 0;             // patches with positive power (a prefix)
    std::optional<double> water_level;  // nu; absent for a zero bit target
    double water_height_w = 0.0;        // nu w tau / ln 2
    std::vector<double> height_trace;   // water height after each added patch
};

/// Inverse water-filling: minimum sum power carrying b_target_bits over the
/// patches (sorted ascending by alpha). Patches are added best-first until the
/// water height no longer exceeds the next patch.
IwfResult iwf_allocate(std::span<const Patch> patches, double b_target_bits, double w_hz, double tau_s);

struct FrameAllocation
{
    int antennas = 0;
    int t_sleep = 0;
    std::vector<std::vector<std::vector<int>>> sets; // sets[t][k], active slots only
    std::vector<PowerEntry> entries;                 // positive-power streams
    std::vector<double> slot_power_w;                // P_t for all T slots
    std::vector<double> achieved_bits;               // per user
    std::vector<std::optional<double>> water_level;  // per user
    bool power_budget_exceeded = false;

    SlotPowerTrace trace() const { return {slot_power_w, antennas}; }
};

/// Subcarrier assignment plus per-user inverse water-filling for the frame.
/// DTX slots are the last t_sleep slots. A slot exceeding p_max sets
/// power_budget_exceeded rather than throwing.
FrameAllocation allocate_frame(const ResourcePlan &plan, const ChannelGrid &grid, const EigenGrid &eigen,
                               const SystemConfig &config, const Step1Solution &step1, const UserDemand &demand,
                               const PowerModelParams &power);

/// CSV rows "drop,k,t,n,e,power_w" for each entry (header written by the caller).
void write_allocation_rows(std::ostream &out, int drop, const FrameAllocation &alloc);
inline constexpr const char *kAllocationHeader = "drop,k,t,n,e,power_w";

} // namespace bspower
