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

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace bspower
{

/// Raised when the Step-1 solver fails numerically. Infeasibility (outage) is
/// not an error and is reported through the return value instead.
class SolverError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct UserDemand
{
    std::vector<double> rate_bps; // R_k per user

    static UserDemand uniform(int users, double rate_bps)
    {
        return {std::vector<double>(static_cast<std::size_t>(users), rate_bps)};
    }
};

/// Eigenvalues of one user's block-fading channel normalised by N0 * W (1/W).
struct NormalizedEigen
{
    std::array<double, 1> simo{};
    std::array<double, 2> mimo{};

    std::span<const double> values(int antennas) const;
};

/// Block-fading resource-share problem for one frame.
struct Step1Problem
{
    std::vector<NormalizedEigen> eigen;
    UserDemand demand;
    PowerModelParams power;
    double total_bw_hz = 10.0e6;

    int users() const { return static_cast<int>(demand.rate_bps.size()); }
    void validate() const;
};

/// Spectral efficiency with equal-power precoding over `antennas` streams.
double spectral_efficiency(int antennas, std::span<const double> eps_norm, double p_w);

/// Transmit power needed to carry rate_bps within the time share mu of the
/// band total_bw_hz, i.e. the inverse of spectral_efficiency at C = R / (W mu).
/// Returns 0 for a zero rate; throws std::domain_error if mu <= 0 with a
/// positive rate.
double power_for_rate(int antennas, std::span<const double> eps_norm, double rate_bps, double mu,
                      double total_bw_hz);

/// Smallest share that meets the rate within the power budget.
double min_share(int antennas, std::span<const double> eps_norm, double rate_bps, double p_max_w,
                 double total_bw_hz);

/// Frame-average supply power of a share vector mu = (mu_1..mu_K, mu_sleep).
/// Throws std::domain_error if mu is not on the simplex. A user with a
/// positive rate and a zero share costs +infinity.
double cost(const Step1Problem &problem, int antennas, std::span<const double> mu);

/// True when every user's required power fits in p_max.
bool within_power_budget(const Step1Problem &problem, int antennas, std::span<const double> mu);

struct ModeSolution
{
    int antennas = 0;
    std::vector<double> mu;      // K + 1 entries, last is the sleep share
    std::vector<double> power_w; // per-user transmit power
    double cost_w = 0.0;
    double multiplier = 0.0; // price of the sum-share constraint
};

/// Minimises cost for a fixed antenna count. std::nullopt means the rates do
/// not fit in the frame even at full power.
std::optional<ModeSolution> solve_mode(const Step1Problem &problem, int antennas);

struct Step1Solution
{
    bool feasible = false;
    int antennas = 0;
    std::vector<double> mu;
    std::vector<double> power_w;
    double supply_w = 0.0;
    std::array<std::optional<ModeSolution>, 2> per_mode; // index antennas - 1

    double sleep_share() const { return mu.empty() ? 0.0 : mu.back(); }
};

/// Solves both antenna modes and keeps the cheaper one. Costs equal within
/// 1e-9 W resolve to a single antenna.
Step1Solution solve(const Step1Problem &problem);

/// Builds the block-fading problem from a representative matrix per user.
Step1Problem make_step1_problem(const ChannelGrid &grid, const SystemConfig &config, const UserDemand &demand,
                                const PowerModelParams &power, ChannelSelect method = ChannelSelect::center);

} // namespace bspower
