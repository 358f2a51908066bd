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

#include "bspower/step1.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace bspower
{

namespace
{

constexpr double kLn2 = std::numbers::ln2;
constexpr double kInf = std::numeric_limits<double>::infinity();
// shares sitting exactly on mu_min reproduce p_max only up to rounding
constexpr double kBudgetSlack = 1e-9;

void check_antennas(int antennas)
{
    if (antennas != 1 && antennas != 2)
        throw std::invalid_argument("step1: antennas must be 1 or 2");
}

/// Transmit power as a function of spectral efficiency C.
double power_at(int antennas, std::span<const double> eps, double c)
{
    const double q = std::expm1(c * kLn2); // 2^C - 1
    if (antennas == 1)
        return q / eps[0];
    const double s = eps[0] + eps[1];
    const double p = eps[0] * eps[1];
    // (-s + sqrt(s^2 + 4pq)) / p, rationalised
    return 4.0 * q / (s + std::sqrt(s * s + 4.0 * p * q));
}

/// dP/dC
double power_slope_at(int antennas, std::span<const double> eps, double c)
{
    const double two_c = std::exp2(c);
    if (antennas == 1)
        return kLn2 * two_c / eps[0];
    const double s = eps[0] + eps[1];
    const double p = eps[0] * eps[1];
    return 2.0 * kLn2 * two_c / std::sqrt(s * s + 4.0 * p * (two_c - 1.0));
}

/// d/dmu [mu P(R / (W mu))] = P(C) - C P'(C) = -marginal(C); increasing in C.
double marginal(int antennas, std::span<const double> eps, double c)
{
    return c * power_slope_at(antennas, eps, c) - power_at(antennas, eps, c);
}

/// Spectral efficiency at which the per-user cost gradient equals -lambda.
double stationary_efficiency(int antennas, std::span<const double> eps, double target)
{
    double lo = 0.0;
    double hi = 1.0;
    while (marginal(antennas, eps, hi) < target)
    {
        lo = hi;
        hi *= 2.0;
        if (hi > 4096.0)
            throw SolverError("step1: spectral efficiency bracket diverged");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it)
    {
        const double mid = 0.5 * (lo + hi);
        if (marginal(antennas, eps, mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

std::span<const double> NormalizedEigen::values(int antennas) const
{
    check_antennas(antennas);
    if (antennas == 1)
        return simo;
    return mimo;
}

void Step1Problem::validate() const
{
    if (eigen.size() != demand.rate_bps.size())
        throw std::invalid_argument("step1 problem: eigenvalue and demand sizes differ");
    if (eigen.empty())
        throw std::invalid_argument("step1 problem: no users");
    if (!(total_bw_hz > 0.0))
        throw std::invalid_argument("step1 problem: bandwidth must be positive");
    power.validate();
    for (std::size_t k = 0; k < eigen.size(); ++k)
    {
        const auto &e = eigen[k];
        if (!(demand.rate_bps[k] >= 0.0) || !std::isfinite(demand.rate_bps[k]))
            throw std::invalid_argument("step1 problem: rates must be finite and non-negative");
        if (!(e.simo[0] > 0.0) || !(e.mimo[0] > 0.0) || !(e.mimo[1] >= 0.0) || e.mimo[1] > e.mimo[0])
            throw std::invalid_argument("step1 problem: eigenvalues must be positive and sorted descending (user " +
                                        std::to_string(k) + ")");
    }
}

double spectral_efficiency(int antennas, std::span<const double> eps_norm, double p_w)
{
    check_antennas(antennas);
    double c = 0.0;
    for (std::size_t e = 0; e < static_cast<std::size_t>(antennas); ++e)
        c += std::log1p(p_w / antennas * eps_norm[e]) / kLn2;
    return c;
}

double power_for_rate(int antennas, std::span<const double> eps_norm, double rate_bps, double mu,
                      double total_bw_hz)
{
    check_antennas(antennas);
    if (rate_bps == 0.0)
        return 0.0;
    if (!(mu > 0.0))
        throw std::domain_error("power_for_rate: positive rate needs a positive share");
    return power_at(antennas, eps_norm, rate_bps / (total_bw_hz * mu));
}

double min_share(int antennas, std::span<const double> eps_norm, double rate_bps, double p_max_w,
                 double total_bw_hz)
{
    if (rate_bps == 0.0)
        return 0.0;
    return rate_bps / (total_bw_hz * spectral_efficiency(antennas, eps_norm, p_max_w));
}

double cost(const Step1Problem &problem, int antennas, std::span<const double> mu)
{
    const std::size_t users = problem.demand.rate_bps.size();
    if (mu.size() != users + 1)
        throw std::domain_error("cost: share vector must have K + 1 entries");
    double sum = 0.0;
    for (double m : mu)
    {
        if (m < 0.0 || !std::isfinite(m))
            throw std::domain_error("cost: negative share");
        sum += m;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::domain_error("cost: shares must sum to one");

    const double p0 = problem.power.p0(antennas);
    double total = mu[users] * problem.power.p_sleep_w;
    for (std::size_t k = 0; k < users; ++k)
    {
        const double rate = problem.demand.rate_bps[k];
        if (rate == 0.0)
        {
            total += mu[k] * p0;
            continue;
        }
        if (mu[k] == 0.0)
            return kInf;
        const double p = power_for_rate(antennas, problem.eigen[k].values(antennas), rate, mu[k], problem.total_bw_hz);
        total += mu[k] * (p0 + problem.power.delta_pm * p);
    }
    return total;
}

bool within_power_budget(const Step1Problem &problem, int antennas, std::span<const double> mu)
{
    for (std::size_t k = 0; k < problem.demand.rate_bps.size(); ++k)
    {
        const double rate = problem.demand.rate_bps[k];
        if (rate == 0.0)
            continue;
        if (mu[k] <= 0.0)
            return false;
        const double p = power_for_rate(antennas, problem.eigen[k].values(antennas), rate, mu[k], problem.total_bw_hz);
        if (p > problem.power.p_max_w * (1.0 + kBudgetSlack))
            return false;
    }
    return true;
}

// The cost is separable in the user shares once mu_sleep = 1 - sum(mu_k) is
// eliminated, so the only coupling is sum(mu_k) <= 1. For a price lambda >= 0
// on that constraint every user's optimal share follows from a scalar root,
// clamped to [mu_min, 1]; lambda itself is found by bisection.
std::optional<ModeSolution> solve_mode(const Step1Problem &problem, int antennas)
{
    check_antennas(antennas);
    problem.validate();
    const std::size_t users = problem.demand.rate_bps.size();
    const PowerModelParams &pm = problem.power;
    const double bw = problem.total_bw_hz;

    std::vector<std::size_t> active;
    std::vector<double> lower(users, 0.0);
    double lower_sum = 0.0;
    for (std::size_t k = 0; k < users; ++k)
    {
        const double rate = problem.demand.rate_bps[k];
        if (rate == 0.0)
            continue;
        active.push_back(k);
        lower[k] = min_share(antennas, problem.eigen[k].values(antennas), rate, pm.p_max_w, bw);
        lower_sum += lower[k];
    }
    if (lower_sum > 1.0)
        return std::nullopt;

    const double idle_gap = pm.p0(antennas) - pm.p_sleep_w;
    std::vector<double> mu(users + 1, 0.0);

    auto shares_at = [&](double lambda) {
        double sum = 0.0;
        for (std::size_t k : active)
        {
            double share = lower[k];
            if (pm.delta_pm > 0.0)
            {
                const double c = stationary_efficiency(antennas, problem.eigen[k].values(antennas),
                                                       (idle_gap + lambda) / pm.delta_pm);
                share = std::clamp(problem.demand.rate_bps[k] / (bw * c), lower[k], 1.0);
            }
            mu[k] = share;
            sum += share;
        }
        return sum;
    };

    double lambda = 0.0;
    if (!active.empty() && shares_at(0.0) > 1.0)
    {
        double lo = 0.0;
        double hi = 1.0;
        while (shares_at(hi) > 1.0)
        {
            lo = hi;
            hi *= 2.0;
            if (!std::isfinite(hi))
                throw SolverError("step1: multiplier bracket diverged");
        }
        for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it)
        {
            const double mid = 0.5 * (lo + hi);
            if (shares_at(mid) > 1.0)
                lo = mid;
            else
                hi = mid;
        }
        lambda = hi;
        shares_at(hi);
    }

    double used = 0.0;
    for (std::size_t k = 0; k < users; ++k)
        used += mu[k];
    if (used > 1.0)
    {
        // only reachable through rounding when sum(mu_min) is exactly one
        for (std::size_t k = 0; k < users; ++k)
            mu[k] /= used;
        used = 1.0;
    }
    mu[users] = std::max(0.0, 1.0 - used);

    ModeSolution sol;
    sol.antennas = antennas;
    sol.multiplier = lambda;
    sol.power_w.assign(users, 0.0);
    for (std::size_t k : active)
    {
        const double p =
            power_for_rate(antennas, problem.eigen[k].values(antennas), problem.demand.rate_bps[k], mu[k], bw);
        if (!std::isfinite(p) || p > pm.p_max_w * (1.0 + kBudgetSlack))
            throw SolverError("step1: solution violates the power budget");
        sol.power_w[k] = std::min(p, pm.p_max_w);
    }
    sol.mu = std::move(mu);
    sol.cost_w = cost(problem, antennas, sol.mu);
    if (!std::isfinite(sol.cost_w))
        throw SolverError("step1: non-finite cost at the solution");
    return sol;
}

Step1Solution solve(const Step1Problem &problem)
{
    Step1Solution out;
    out.per_mode[0] = solve_mode(problem, 1);
    out.per_mode[1] = solve_mode(problem, 2);

    const ModeSolution *best = nullptr;
    if (out.per_mode[0])
        best = &*out.per_mode[0];
    if (out.per_mode[1] && (!best || out.per_mode[1]->cost_w < best->cost_w - 1e-9))
        best = &*out.per_mode[1];
    if (!best)
        return out;

    out.feasible = true;
    out.antennas = best->antennas;
    out.mu = best->mu;
    out.power_w = best->power_w;
    out.supply_w = best->cost_w;
    return out;
}

Step1Problem make_step1_problem(const ChannelGrid &grid, const SystemConfig &config, const UserDemand &demand,
                                const PowerModelParams &power, ChannelSelect method)
{
    if (static_cast<int>(demand.rate_bps.size()) != grid.users())
        throw std::invalid_argument("make_step1_problem: demand size differs from user count");
    Step1Problem problem;
    problem.demand = demand;
    problem.power = power;
    problem.total_bw_hz = config.total_bw_hz();
    const double noise_w = config.noise_psd_w_per_hz * problem.total_bw_hz;
    problem.eigen.resize(static_cast<std::size_t>(grid.users()));
    for (int k = 0; k < grid.users(); ++k)
    {
        const ChannelMatrix h = representative_channel(grid, k, method);
        auto &e = problem.eigen[static_cast<std::size_t>(k)];
        e.simo[0] = gram_eigenvalues(h, 1)[0] / noise_w;
        const auto mimo = gram_eigenvalues(h, 2);
        e.mimo = {mimo[0] / noise_w, mimo[1] / noise_w};
    }
    return problem;
}

} // namespace bspower
