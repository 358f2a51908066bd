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

#include "bspower/step2.hpp"

#include "bspower/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace bspower
{

void ResourcePlan::check(int subcarriers, int slots) const
{
    auto fail = [](const std::string &what) { throw std::logic_error("resource plan: " + what); };
    if (t_sleep < 0 || t_active < 0 || t_sleep + t_active != slots)
        fail("slot counts do not add up");
    long total = static_cast<long>(subcarriers) * t_sleep;
    for (int m : resources)
    {
        if (m < 0)
            fail("negative resource count");
        total += m;
    }
    if (total != static_cast<long>(subcarriers) * slots && t_active > 0)
        fail("resources not conserved");
    if (static_cast<int>(quota.size()) != t_active)
        fail("quota table size differs from active slots");
    std::vector<long> per_user(resources.size(), 0);
    for (const auto &slot : quota)
    {
        if (slot.size() != resources.size())
            fail("quota row has wrong width");
        long sum = 0;
        for (std::size_t k = 0; k < slot.size(); ++k)
        {
            if (slot[k] < 0)
                fail("negative slot quota");
            sum += slot[k];
            per_user[k] += slot[k];
        }
        if (sum != subcarriers)
            fail("slot quotas do not fill the slot");
    }
    for (std::size_t k = 0; k < resources.size(); ++k)
        if (t_active > 0 && per_user[k] != resources[k])
            fail("slot quotas of user " + std::to_string(k) + " do not add up to m_k");
}

ResourcePlan quantize(std::span<const double> mu, int subcarriers, int slots)
{
    if (mu.size() < 2)
        throw std::invalid_argument("quantize: need at least one user share and the sleep share");
    if (subcarriers < 1 || slots < 1)
        throw std::invalid_argument("quantize: grid dimensions must be positive");
    const int users = static_cast<int>(mu.size()) - 1;
    if (subcarriers < users)
        throw std::invalid_argument("quantize: fewer subcarriers than users");
    for (double m : mu)
        if (!(m >= 0.0) || !std::isfinite(m))
            throw std::invalid_argument("quantize: shares must be finite and non-negative");

    const long n = subcarriers;
    const long t = slots;
    const long grid_units = n * t;
    const double mu_sleep = mu[static_cast<std::size_t>(users)];

    ResourcePlan plan;
    plan.resources.assign(static_cast<std::size_t>(users), 0);

    std::vector<std::size_t> sharing;
    for (std::size_t k = 0; k < static_cast<std::size_t>(users); ++k)
        if (mu[k] > 0.0)
            sharing.push_back(k);
    if (sharing.empty())
    {
        plan.t_sleep = slots;
        plan.t_active = 0;
        return plan;
    }

    // slack absorbs representation error in mu_k * N * T
    constexpr double kSlack = 1e-9;
    plan.high_load = static_cast<double>(grid_units) * mu_sleep < static_cast<double>(users);
    long sleep = 0;
    if (!plan.high_load)
    {
        for (std::size_t k : sharing)
            plan.resources[k] = static_cast<int>(std::ceil(mu[k] * static_cast<double>(grid_units) - kSlack));
        sleep = static_cast<long>(std::floor(static_cast<double>(t) * mu_sleep -
                                             static_cast<double>(users) / static_cast<double>(n) + kSlack));
        sleep = std::clamp(sleep, 0L, t - 1);
    }
    else
    {
        for (std::size_t k : sharing)
            plan.resources[k] = static_cast<int>(std::floor(mu[k] * static_cast<double>(grid_units) + kSlack));
    }

    auto assigned = [&] { return std::accumulate(plan.resources.begin(), plan.resources.end(), 0L); };

    // Shares summing to slightly more than one can overshoot; give back DTX
    // slots first, then trim the largest holder.
    while (assigned() + n * sleep > grid_units)
    {
        if (sleep > 0)
            --sleep;
        else
            --*std::max_element(plan.resources.begin(), plan.resources.end());
    }

    long remaining = grid_units - assigned() - n * sleep;
    // every user with a positive share holds at least one unit
    for (std::size_t k : sharing)
    {
        if (plan.resources[k] > 0)
            continue;
        if (remaining > 0)
            --remaining;
        else
            --*std::max_element(plan.resources.begin(), plan.resources.end());
        plan.resources[k] = 1;
    }
    for (std::size_t i = 0; remaining > 0; i = (i + 1) % sharing.size(), --remaining)
        ++plan.resources[sharing[i]];

    plan.t_sleep = static_cast<int>(sleep);
    plan.t_active = slots - plan.t_sleep;

    // floor(m_k / sum(m) * N) == floor(m_k / T_active) since sum(m) = N T_active
    const int active = plan.t_active;
    plan.quota.assign(static_cast<std::size_t>(active), std::vector<int>(static_cast<std::size_t>(users), 0));
    long position = 0;
    for (std::size_t k = 0; k < static_cast<std::size_t>(users); ++k)
    {
        const int base = plan.resources[k] / active;
        const int extra = plan.resources[k] % active;
        for (auto &row : plan.quota)
            row[k] = base;
        for (int e = 0; e < extra; ++e, ++position)
            ++plan.quota[static_cast<std::size_t>(position % active)][k];
    }
    return plan;
}

ResourcePlan quantize(const Step1Solution &step1, int subcarriers, int slots, int users)
{
    if (!step1.feasible)
        throw std::invalid_argument("quantize: Step-1 solution is infeasible");
    if (static_cast<int>(step1.mu.size()) != users + 1)
        throw std::invalid_argument("quantize: share vector does not match the user count");
    return quantize(step1.mu, subcarriers, slots);
}

std::vector<std::vector<int>> rcg_assign(std::span<const int> quota, std::span<const double> metric, int users)
{
    if (users < 1 || static_cast<int>(quota.size()) != users)
        throw std::invalid_argument("rcg_assign: quota size differs from user count");
    if (metric.size() % static_cast<std::size_t>(users) != 0)
        throw std::invalid_argument("rcg_assign: metric matrix is not N x K");
    const int n_sc = static_cast<int>(metric.size()) / users;
    long quota_sum = 0;
    for (int q : quota)
    {
        if (q < 0)
            throw std::domain_error("rcg_assign: negative quota");
        quota_sum += q;
    }
    if (quota_sum != n_sc)
        throw std::domain_error("rcg_assign: quotas must add up to the subcarrier count");

    auto h = [&](int n, int k) { return metric[static_cast<std::size_t>(n * users + k)]; };

    std::vector<int> owner(static_cast<std::size_t>(n_sc));
    std::vector<int> count(static_cast<std::size_t>(users), 0);
    for (int n = 0; n < n_sc; ++n)
    {
        int best = 0;
        for (int k = 1; k < users; ++k)
            if (h(n, k) > h(n, best))
                best = k;
        owner[static_cast<std::size_t>(n)] = best;
        ++count[static_cast<std::size_t>(best)];
    }

    for (int k = 0; k < users; ++k)
    {
        while (count[static_cast<std::size_t>(k)] > quota[static_cast<std::size_t>(k)])
        {
            int best_l = -1;
            int best_n = -1;
            double best_diff = std::numeric_limits<double>::infinity();
            for (int l = 0; l < users; ++l)
            {
                if (count[static_cast<std::size_t>(l)] >= quota[static_cast<std::size_t>(l)])
                    continue;
                for (int n = 0; n < n_sc; ++n)
                {
                    if (owner[static_cast<std::size_t>(n)] != k)
                        continue;
                    const double diff = std::abs(-h(n, k) + h(n, l));
                    if (diff < best_diff || best_l < 0)
                    {
                        best_diff = diff;
                        best_l = l;
                        best_n = n;
                    }
                }
            }
            if (best_l < 0)
                throw std::logic_error("rcg_assign: no under-quota user to trade with");
            owner[static_cast<std::size_t>(best_n)] = best_l;
            --count[static_cast<std::size_t>(k)];
            ++count[static_cast<std::size_t>(best_l)];
        }
    }

    std::vector<std::vector<int>> sets(static_cast<std::size_t>(users));
    for (int n = 0; n < n_sc; ++n)
        sets[static_cast<std::size_t>(owner[static_cast<std::size_t>(n)])].push_back(n);
    return sets;
}

std::vector<double> slot_metrics(const ChannelGrid &grid, int slot, int antennas)
{
    const int users = grid.users();
    std::vector<double> metric(static_cast<std::size_t>(grid.subcarriers() * users));
    for (int n = 0; n < grid.subcarriers(); ++n)
        for (int k = 0; k < users; ++k)
            metric[static_cast<std::size_t>(n * users + k)] = mean_entry_gain(grid.at(n, slot, k), antennas);
    return metric;
}

std::vector<Patch> build_patches(const EigenGrid &eigen, const SystemConfig &config, int user, int antennas,
                                 std::span<const std::pair<int, int>> resources)
{
    std::vector<Patch> patches;
    patches.reserve(resources.size() * static_cast<std::size_t>(antennas));
    const double noise_w = config.noise_psd_w_per_hz * config.subcarrier_bw_hz;
    for (const auto &[slot, n] : resources)
    {
        const auto ev = eigen.values(n, slot, user, antennas);
        for (std::size_t e = 0; e < ev.size(); ++e)
            if (ev[e] > 0.0)
                patches.push_back({slot * config.subcarriers + n, static_cast<int>(e), noise_w / ev[e]});
    }
    std::sort(patches.begin(), patches.end(), [](const Patch &a, const Patch &b) {
        if (a.alpha_w != b.alpha_w)
            return a.alpha_w < b.alpha_w;
        if (a.resource != b.resource)
            return a.resource < b.resource;
        return a.eigen < b.eigen;
    });
    return patches;
}

IwfResult iwf_allocate(std::span<const Patch> patches, double b_target_bits, double w_hz, double tau_s)
{
    if (!(b_target_bits >= 0.0) || !std::isfinite(b_target_bits))
        throw std::invalid_argument("iwf_allocate: bit target must be finite and non-negative");
    if (!(w_hz > 0.0) || !(tau_s > 0.0))
        throw std::invalid_argument("iwf_allocate: bandwidth and slot duration must be positive");
    for (std::size_t i = 0; i < patches.size(); ++i)
    {
        if (!(patches[i].alpha_w > 0.0) || !std::isfinite(patches[i].alpha_w))
            throw std::invalid_argument("iwf_allocate: patch heights must be positive");
        if (i > 0 && patches[i].alpha_w < patches[i - 1].alpha_w)
            throw std::invalid_argument("iwf_allocate: patches must be sorted by ascending height");
    }

    IwfResult out;
    out.power_w.assign(patches.size(), 0.0);
    if (b_target_bits == 0.0)
        return out;
    if (patches.empty())
        throw std::invalid_argument("iwf_allocate: positive bit target with no patches");

    // Work relative to the best patch: rel[i] = log2(alpha_i / alpha_0) and
    // level = log2(height / alpha_0), so that height / alpha_i = 2^(level - rel[i]).
    const double unit_bits = b_target_bits / (w_hz * tau_s);
    const double alpha0 = patches[0].alpha_w;
    auto rel = [&](std::size_t i) { return std::log2(patches[i].alpha_w / alpha0); };

    double rel_sum = 0.0;
    std::size_t used = 1;
    double level = unit_bits;
    out.height_trace.push_back(alpha0 * std::exp2(level));
    while (used < patches.size())
    {
        const double next = rel(used);
        if (level <= next) // water no higher than the next patch
            break;
        rel_sum += next;
        ++used;
        level = (unit_bits + rel_sum) / static_cast<double>(used);
        out.height_trace.push_back(alpha0 * std::exp2(level));
    }

    double carried = 0.0;
    for (std::size_t i = 0; i < used; ++i)
    {
        const double x = level - rel(i); // log2(1 + P / alpha)
        out.power_w[i] = patches[i].alpha_w * std::expm1(x * std::numbers::ln2);
        carried += std::log1p(out.power_w[i] / patches[i].alpha_w) / std::numbers::ln2;
    }
    if (std::abs(carried - unit_bits) > 1e-9 * unit_bits)
        throw std::logic_error("iwf_allocate: capacity identity not met (" + std::to_string(carried) + " vs " +
                               std::to_string(unit_bits) + ")");

    out.active = used;
    out.water_height_w = out.height_trace.back();
    out.water_level = out.water_height_w * std::numbers::ln2 / (w_hz * tau_s);
    return out;
}

FrameAllocation allocate_frame(const ResourcePlan &plan, const ChannelGrid &grid, const EigenGrid &eigen,
                               const SystemConfig &config, const Step1Solution &step1, const UserDemand &demand,
                               const PowerModelParams &power)
{
    const int users = grid.users();
    const int n_sc = grid.subcarriers();
    const int n_slots = grid.slots();
    if (static_cast<int>(plan.resources.size()) != users || static_cast<int>(demand.rate_bps.size()) != users)
        throw std::invalid_argument("allocate_frame: plan or demand size differs from user count");
    if (!step1.feasible)
        throw std::invalid_argument("allocate_frame: Step-1 solution is infeasible");

    FrameAllocation alloc;
    alloc.antennas = step1.antennas;
    alloc.t_sleep = plan.t_sleep;
    alloc.slot_power_w.assign(static_cast<std::size_t>(n_slots), 0.0);
    alloc.achieved_bits.assign(static_cast<std::size_t>(users), 0.0);
    alloc.water_level.assign(static_cast<std::size_t>(users), std::nullopt);

    std::vector<std::vector<std::pair<int, int>>> owned(static_cast<std::size_t>(users));
    for (int t = 0; t < plan.t_active; ++t)
    {
        const auto metric = slot_metrics(grid, t, alloc.antennas);
        auto sets = rcg_assign(plan.quota[static_cast<std::size_t>(t)], metric, users);
        for (int k = 0; k < users; ++k)
            for (int n : sets[static_cast<std::size_t>(k)])
                owned[static_cast<std::size_t>(k)].emplace_back(t, n);
        alloc.sets.push_back(std::move(sets));
    }

    for (int k = 0; k < users; ++k)
    {
        const double bits = demand.rate_bps[static_cast<std::size_t>(k)] * config.frame_s();
        if (bits == 0.0)
            continue;
        const auto patches = build_patches(eigen, config, k, alloc.antennas, owned[static_cast<std::size_t>(k)]);
        if (patches.empty())
            throw std::logic_error("allocate_frame: user " + std::to_string(k) + " has demand but no resources");
        const IwfResult iwf = iwf_allocate(patches, bits, config.subcarrier_bw_hz, config.slot_s);
        alloc.water_level[static_cast<std::size_t>(k)] = iwf.water_level;
        for (std::size_t i = 0; i < iwf.active; ++i)
        {
            const Patch &p = patches[i];
            alloc.entries.push_back({k, p.resource / n_sc, p.resource % n_sc, p.eigen, iwf.power_w[i]});
        }
    }
    std::sort(alloc.entries.begin(), alloc.entries.end(), [](const PowerEntry &a, const PowerEntry &b) {
        return std::tie(a.user, a.slot, a.subcarrier, a.eigen) < std::tie(b.user, b.slot, b.subcarrier, b.eigen);
    });

    for (const PowerEntry &e : alloc.entries)
    {
        alloc.slot_power_w[static_cast<std::size_t>(e.slot)] += e.power_w;
        const auto ev = eigen.values(e.subcarrier, e.slot, e.user, alloc.antennas);
        alloc.achieved_bits[static_cast<std::size_t>(e.user)] +=
            stream_bits(config, ev[static_cast<std::size_t>(e.eigen)], e.power_w);
    }
    for (double &p : alloc.slot_power_w)
    {
        p = snap_power(p);
        if (p > power.p_max_w)
            alloc.power_budget_exceeded = true;
    }
    return alloc;
}

void write_allocation_rows(std::ostream &out, int drop, const FrameAllocation &alloc)
{
    for (const PowerEntry &e : alloc.entries)
        out << drop << ',' << e.user << ',' << e.slot << ',' << e.subcarrier << ',' << e.eigen << ','
            << format_double(e.power_w) << '\n';
}

} // namespace bspower
