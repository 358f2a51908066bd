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

// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and
// thresholds are fixed here; the process exits non-zero if any criterion fails.

#include "bspower/format.hpp"
#include "bspower/harness.hpp"
#include "bspower/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace bspower;
namespace fs = std::filesystem;

namespace
{

// ---- pinned tolerances ----
constexpr double kIwfPowerRelTol = 1e-6;
constexpr double kIwfCapacityRelTol = 1e-9;
constexpr double kIwfTimeLimitS = 10.0;
constexpr double kStep1GridRelTol = 0.005;
constexpr double kStep1GridStep = 1e-3;
constexpr double kStep1TimeLimitS = 60.0;
constexpr double kConvexityTol = 1e-9;
constexpr double kRateRelTol = 1e-9;
constexpr double kSavingsLow = 0.20;
constexpr double kSavingsHigh = 0.45;
constexpr double kMaxSupplyW = 447.1;
constexpr double kCampaignTimeLimitS = 600.0;
constexpr double kMt2HighRateMin = 0.95;
constexpr double kMt2LowRateMax = 0.5;
constexpr double kStepGapMax = 0.10;
constexpr int kCampaignDrops = 1000;
constexpr std::uint64_t kCampaignSeed = 20260101;

struct Verdict
{
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char *f, double a)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// ---------- 1: inverse water-filling against bisection on nu ----------

Verdict iwf_oracle()
{
    const auto t0 = Clock::now();
    Rng rng(101);
    const double w = 200e3;
    const double tau = 1e-3;
    double worst_power = 0.0;
    double worst_capacity = 0.0;
    double worst_kkt = 0.0;
    for (int i = 0; i < 1000; ++i)
    {
        const std::size_t count = 2 + static_cast<std::size_t>(rng.uniform(0.0, 3.0));
        std::vector<Patch> patches(count);
        for (std::size_t j = 0; j < count; ++j)
            patches[j] = {static_cast<int>(j), 0, std::pow(10.0, rng.uniform(-14.0, -9.0))};
        std::sort(patches.begin(), patches.end(), [](const Patch &a, const Patch &b) { return a.alpha_w < b.alpha_w; });
        const double bits = rng.uniform(10.0, 4000.0) * static_cast<double>(count);
        const IwfResult r = iwf_allocate(patches, bits, w, tau);

        // Oracle: the KKT conditions of min sum P s.t. sum w tau log2(1 + P/alpha) = B
        // give P = max(0, nu w tau / ln2 - alpha); find nu by bisection on the bit count.
        const double scale = w * tau / std::numbers::ln2;
        auto bits_at = [&](double nu) {
            double b = 0.0;
            for (const Patch &p : patches)
                b += w * tau * std::log2(std::max(1.0, nu * scale / p.alpha_w));
            return b;
        };
        double lo = 0.0;
        double hi = patches[0].alpha_w / scale;
        while (bits_at(hi) < bits)
            hi *= 2.0;
        for (int it = 0; it < 300; ++it)
        {
            const double mid = 0.5 * (lo + hi);
            (bits_at(mid) < bits ? lo : hi) = mid;
        }
        const double nu = 0.5 * (lo + hi);
        double oracle_sum = 0.0;
        double ours_sum = 0.0;
        double carried = 0.0;
        for (std::size_t j = 0; j < count; ++j)
        {
            const double p_ref = std::max(0.0, nu * scale - patches[j].alpha_w);
            oracle_sum += p_ref;
            ours_sum += r.power_w[j];
            carried += w * tau * std::log2(1.0 + r.power_w[j] / patches[j].alpha_w);
            // KKT: dual feasibility and complementary slackness at the oracle point
            const double grad = 1.0 - nu * scale / (patches[j].alpha_w + p_ref);
            if (p_ref > 0.0)
                worst_kkt = std::max(worst_kkt, std::abs(grad));
            else
                worst_kkt = std::max(worst_kkt, std::max(0.0, -grad));
        }
        worst_power = std::max(worst_power, std::abs(ours_sum - oracle_sum) / oracle_sum);
        worst_capacity = std::max(worst_capacity, std::abs(carried - bits) / bits);
    }
    const double elapsed = seconds_since(t0);
    Verdict v;
    v.pass = worst_power <= kIwfPowerRelTol && worst_capacity <= kIwfCapacityRelTol && worst_kkt <= 1e-9 &&
             elapsed <= kIwfTimeLimitS;
    v.detail = "max power rel err " + fmt("%.2e", worst_power) + ", max capacity residual " +
               fmt("%.2e", worst_capacity) + ", oracle KKT residual " + fmt("%.2e", worst_kkt) + ", " +
               fmt("%.2f s", elapsed);
    return v;
}

// ---------- 2: Step-1 solver against a simplex grid ----------

// Transmit power written directly from the equal-power capacity expressions.
double reference_power(int antennas, const NormalizedEigen &e, double c)
{
    if (antennas == 1)
        return (std::pow(2.0, c) - 1.0) / e.simo[0];
    const double a = e.mimo[0];
    const double b = e.mimo[1];
    return (-(a + b) + std::sqrt((a + b) * (a + b) + 4.0 * a * b * (std::pow(2.0, c) - 1.0))) / (a * b);
}

Verdict step1_grid()
{
    const auto t0 = Clock::now();
    Rng rng(202);
    const PowerModelParams pm = PowerModelParams::defaults();
    const double bw = 10.0e6;
    const int steps = static_cast<int>(std::lround(1.0 / kStep1GridStep));
    double worst = 0.0;
    int solved[2] = {0, 0};
    int below_grid = 0;
    for (int m = 1; m <= 2; ++m)
    {
        while (solved[m - 1] < 200)
        {
            Step1Problem p;
            p.power = pm;
            p.total_bw_hz = bw;
            for (int k = 0; k < 2; ++k)
            {
                const double scale = std::pow(10.0, rng.uniform(-1.0, 2.0));
                const double a = scale * rng.uniform(0.3, 3.0);
                const double b = a * rng.uniform(0.02, 1.0);
                NormalizedEigen e;
                e.simo = {a * rng.uniform(0.5, 1.0)};
                e.mimo = {a, b};
                p.eigen.push_back(e);
                p.demand.rate_bps.push_back(rng.uniform(0.5e6, 40.0e6));
            }
            const auto sol = solve_mode(p, m);
            if (!sol)
                continue;

            // separable cost: f_k(mu_k) + (1 - mu_1 - mu_2) PS
            std::vector<std::vector<double>> f(2, std::vector<double>(static_cast<std::size_t>(steps) + 1));
            for (std::size_t k = 0; k < 2; ++k)
                for (int i = 0; i <= steps; ++i)
                {
                    const double mu = i * kStep1GridStep;
                    double v = std::numeric_limits<double>::infinity();
                    if (i > 0)
                    {
                        const double ptx = reference_power(m, p.eigen[k], p.demand.rate_bps[k] / (bw * mu));
                        if (ptx <= pm.p_max_w)
                            v = mu * (pm.p0(m) + pm.delta_pm * ptx - pm.p_sleep_w);
                    }
                    f[k][static_cast<std::size_t>(i)] = v;
                }
            double best = std::numeric_limits<double>::infinity();
            for (int i = 1; i < steps; ++i)
                for (int j = 1; i + j <= steps; ++j)
                    best = std::min(best, f[0][static_cast<std::size_t>(i)] + f[1][static_cast<std::size_t>(j)]);
            if (!std::isfinite(best))
                continue; // feasible region thinner than the grid step
            best += pm.p_sleep_w;
            const double gap = (sol->cost_w - best) / best;
            if (gap < -1e-12)
                ++below_grid;
            worst = std::max(worst, std::abs(gap));
            ++solved[m - 1];
        }
    }
    const double elapsed = seconds_since(t0);
    Verdict v;
    v.pass = worst <= kStep1GridRelTol && elapsed <= kStep1TimeLimitS;
    v.detail = "200+200 problems, max |cost - grid| / grid " + fmt("%.2e", worst) + ", solver below grid in " +
               std::to_string(below_grid) + ", " + fmt("%.2f s", elapsed);
    return v;
}

// ---------- 3: convexity of mu * P(R, mu) ----------

Verdict convexity()
{
    Rng rng(303);
    const PowerModelParams pm = PowerModelParams::defaults();
    const double bw = 10.0e6;
    double worst = std::numeric_limits<double>::infinity();
    int draws = 0;
    while (draws < 100)
    {
        const int m = 1 + draws % 2;
        const double scale = std::pow(10.0, rng.uniform(-1.0, 2.0));
        NormalizedEigen e;
        e.mimo = {scale * rng.uniform(0.3, 3.0), 0.0};
        e.mimo[1] = e.mimo[0] * rng.uniform(0.02, 1.0);
        e.simo = {e.mimo[0] * rng.uniform(0.5, 1.0)};
        const double rate = rng.uniform(0.1e6, 40.0e6);
        // the grid spans the feasible shares [mu_min, 1]
        const double lo = min_share(m, e.values(m), rate, pm.p_max_w, bw);
        if (lo >= 1.0)
            continue;
        ++draws;
        std::vector<double> f(1000);
        for (std::size_t i = 0; i < f.size(); ++i)
        {
            const double mu = lo + (1.0 - lo) * static_cast<double>(i + 1) / static_cast<double>(f.size());
            f[i] = mu * power_for_rate(m, e.values(m), rate, mu, bw);
        }
        for (std::size_t i = 1; i + 1 < f.size(); ++i)
            worst = std::min(worst, f[i + 1] - 2.0 * f[i] + f[i - 1]);
    }
    Verdict v;
    v.pass = worst >= -kConvexityTol;
    v.detail = "100 draws x 1000 points, min second difference " + fmt("%.3e", worst);
    return v;
}

// ---------- 4-7: default campaign ----------

struct Campaign
{
    RunConfig config;
    std::map<double, ResultTable> tables;     // by per-user rate
    std::map<double, std::string> allocation; // emitted allocation rows by rate
    double seconds = 0.0;
};

Campaign run_campaign()
{
    Campaign c;
    c.config.drops = kCampaignDrops;
    c.config.seed = kCampaignSeed;
    c.config.modes = {Mode::raps, Mode::ba1, Mode::ba2, Mode::dtx, Mode::max};
    const auto t0 = Clock::now();
    for (double rate : {4.0e6, 10.0e6, 16.0e6})
    {
        RunConfig rc = c.config;
        rc.rates_bps = {rate};
        std::ostringstream alloc;
        c.tables[rate] = run(rc, &alloc);
        c.allocation[rate] = alloc.str();
    }
    c.seconds = seconds_since(t0);
    return c;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i)
        if (i == s.size() || s[i] == sep)
        {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    return out;
}

Verdict rate_fulfilment(const Campaign &c)
{
    const SystemConfig &sys = c.config.system;
    const double w = sys.subcarrier_bw_hz;
    double worst = 0.0;
    long users_checked = 0;
    long missing = 0;
    for (const auto &[rate, table] : c.tables)
    {
        // per drop: antennas and whether the drop delivered
        std::map<int, int> antennas;
        for (const DropResult &d : table.drops)
            if (d.mode == Mode::raps && d.outage == Outage::none)
                antennas[d.drop] = *d.antennas;

        std::map<int, std::vector<double>> bits; // drop -> per-user bits
        std::map<int, ChannelGrid> grids;
        std::istringstream in(c.allocation.at(rate));
        std::string line;
        std::getline(in, line); // header
        int cached_drop = -1;
        ChannelGrid grid;
        while (std::getline(in, line))
        {
            const auto f = split(line, ',');
            const int drop = parse_integer<int>(f[0]);
            const auto it = antennas.find(drop);
            if (it == antennas.end())
                continue; // step-2 outage drop
            if (drop != cached_drop)
            {
                grid = generate(sys, drop_seed(c.config.seed, drop));
                cached_drop = drop;
            }
            const int k = parse_integer<int>(f[1]);
            const int t = parse_integer<int>(f[2]);
            const int n = parse_integer<int>(f[3]);
            const int e = parse_integer<int>(f[4]);
            const double p = parse_double(f[5]);
            const double eps = gram_eigenvalues(grid.at(n, t, k), it->second)[static_cast<std::size_t>(e)];
            auto &b = bits[drop];
            b.resize(static_cast<std::size_t>(sys.users), 0.0);
            b[static_cast<std::size_t>(k)] += w * sys.slot_s * std::log2(1.0 + p * eps / (sys.noise_psd_w_per_hz * w));
        }
        const double target = rate * sys.frame_s();
        for (const auto &[drop, m] : antennas)
        {
            const auto it = bits.find(drop);
            if (it == bits.end())
            {
                ++missing;
                continue;
            }
            for (double b : it->second)
            {
                worst = std::max(worst, std::abs(b - target) / target);
                ++users_checked;
            }
        }
    }
    Verdict v;
    v.pass = missing == 0 && users_checked > 0 && worst <= kRateRelTol;
    v.detail = std::to_string(users_checked) + " user-frames recomputed from emitted powers, max |R - R_target| / R_target " +
               fmt("%.2e", worst) + (missing ? ", drops without rows " + std::to_string(missing) : "");
    return v;
}

struct Paired
{
    int drops = 0;
    double raps = 0.0;
    double dtx = 0.0;
    double ba = 0.0;
};

Paired paired_means(const ResultTable &table)
{
    std::map<int, std::map<Mode, std::optional<double>>> by_drop;
    for (const DropResult &d : table.drops)
        by_drop[d.drop][d.mode] = d.supply_w;
    Paired p;
    for (auto &[drop, modes] : by_drop)
    {
        const auto raps = modes[Mode::raps];
        const auto dtx = modes[Mode::dtx];
        std::optional<double> ba;
        for (Mode m : {Mode::ba1, Mode::ba2})
            if (modes[m] && (!ba || *modes[m] < *ba))
                ba = modes[m];
        if (!raps || !dtx || !ba)
            continue;
        ++p.drops;
        p.raps += *raps;
        p.dtx += *dtx;
        p.ba += *ba;
    }
    if (p.drops > 0)
    {
        p.raps /= p.drops;
        p.dtx /= p.drops;
        p.ba /= p.drops;
    }
    return p;
}

Verdict benchmark_ordering(const Campaign &c)
{
    Verdict v;
    std::string detail;
    for (double rate : {10.0e6, 16.0e6})
    {
        const Paired p = paired_means(c.tables.at(rate));
        const double saving = 1.0 - p.raps / p.ba;
        const bool ok = p.drops > 0 && p.raps <= p.dtx && p.dtx <= p.ba && p.ba <= kMaxSupplyW &&
                        saving >= kSavingsLow && saving <= kSavingsHigh;
        v.pass = v.pass && ok;
        if (!detail.empty())
            detail += "; ";
        detail += fmt("%.0f Mbps: ", rate / 1e6) + "RAPS " + fmt("%.1f", p.raps) + " DTX " + fmt("%.1f", p.dtx) +
                  " BA " + fmt("%.1f W", p.ba) + ", saving " + fmt("%.1f%%", 100.0 * saving) + " over " +
                  std::to_string(p.drops) + " drops";
    }
    v.pass = v.pass && c.seconds <= kCampaignTimeLimitS;
    v.detail = detail + ", campaign " + fmt("%.1f s", c.seconds);
    return v;
}

double mt2_fraction(const ResultTable &table)
{
    int feasible = 0;
    int two = 0;
    for (const DropResult &d : table.drops)
        if (d.mode == Mode::raps && d.antennas)
        {
            ++feasible;
            two += *d.antennas == 2;
        }
    return feasible ? static_cast<double>(two) / feasible : std::numeric_limits<double>::quiet_NaN();
}

Verdict antenna_adaptation(const Campaign &c)
{
    const double high = mt2_fraction(c.tables.at(16.0e6));
    const double low = mt2_fraction(c.tables.at(4.0e6));
    Verdict v;
    v.pass = high >= kMt2HighRateMin && low <= kMt2LowRateMax;
    v.detail = "M_T = 2 fraction " + fmt("%.3f", high) + " at 16 Mbps (need >= 0.95), " + fmt("%.3f", low) +
               " at 4 Mbps (need <= 0.5)";
    return v;
}

Verdict step_consistency(const Campaign &c)
{
    double sum = 0.0;
    int n = 0;
    double worst = 0.0;
    for (const auto &[rate, table] : c.tables)
        for (const DropResult &d : table.drops)
            if (d.mode == Mode::raps && d.outage == Outage::none)
            {
                const double gap = std::abs(*d.supply_w - *d.step1_w) / *d.step1_w;
                sum += gap;
                worst = std::max(worst, gap);
                ++n;
            }
    const double mean = n ? sum / n : std::numeric_limits<double>::infinity();
    Verdict v;
    v.pass = mean <= kStepGapMax;
    v.detail = "mean |P_step2 - P_step1| / P_step1 " + fmt("%.4f", mean) + " over " + std::to_string(n) +
               " drops (max " + fmt("%.4f", worst) + ")";
    return v;
}

// ---------- 8: trade-off dominance ----------

Verdict tradeoff_dominance()
{
    Rng rng(808);
    int cases = 0;
    int interior = 0;
    double worst = -std::numeric_limits<double>::infinity();
    while (cases < 50)
    {
        PowerModelParams pm;
        pm.p_sleep_w = rng.uniform(20.0, 200.0);
        pm.p0_w = {pm.p_sleep_w + rng.uniform(1.0, 150.0), 0.0};
        pm.p0_w[1] = pm.p0_w[0] + rng.uniform(0.0, 100.0);
        pm.delta_pm = rng.uniform(0.5, 10.0);
        pm.p_max_w = rng.uniform(5.0, 80.0);
        const double target = rng.uniform(0.2, 8.0);
        const double gain = std::pow(10.0, rng.uniform(0.0, 6.0));
        const TradeoffCurves t = tradeoff_curve(target, pm, gain, 1 + cases % 2);
        if (!t.feasible)
            continue;
        ++cases;
        const auto j = TradeoffCurves::argmin(t.joint);
        const auto pc = TradeoffCurves::argmin(t.pc_only);
        const auto dtx = TradeoffCurves::argmin(t.dtx_only);
        if (!j)
        {
            worst = std::numeric_limits<double>::infinity();
            continue;
        }
        if (pc)
            worst = std::max(worst, *t.joint[*j] - *t.pc_only[*pc]);
        if (dtx)
            worst = std::max(worst, *t.joint[*j] - *t.dtx_only[*dtx]);
        if (*j > 0 && *j + 1 < t.phi.size())
            ++interior;
    }
    Verdict v;
    v.pass = worst <= 0.0 && interior >= 1;
    v.detail = "50 links, max (joint min - restricted min) " + fmt("%.3e W", worst) + ", interior minimiser in " +
               std::to_string(interior);
    return v;
}

// ---------- 9: determinism ----------

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Verdict determinism()
{
    RunConfig rc;
    rc.drops = 50;
    rc.seed = 909;
    rc.rates_bps = {4.0e6, 10.0e6, 16.0e6};
    const fs::path base = fs::temp_directory_path() / "bspower_acceptance_determinism";
    fs::remove_all(base);
    emit(run(rc), Format::csv, base / "a");
    emit(run(rc), Format::csv, base / "b");
    bool same = true;
    std::size_t bytes = 0;
    for (const char *f : {"drops.csv", "aggregate.csv"})
    {
        const std::string a = slurp(base / "a" / f);
        const std::string b = slurp(base / "b" / f);
        same = same && !a.empty() && a == b;
        bytes += a.size();
    }
    fs::remove_all(base);
    Verdict v;
    v.pass = same;
    v.detail = std::to_string(bytes) + " bytes compared across two runs";
    return v;
}

// ---------- 10: quantisation fuzz ----------

Verdict quantize_fuzz()
{
    Rng rng(1010);
    long failures = 0;
    long high_load = 0;
    std::string first;
    for (long i = 0; i < 100000; ++i)
    {
        const int k = 1 + static_cast<int>(rng.uniform(0.0, 20.0));
        const int n = k + static_cast<int>(rng.uniform(0.0, 100.0));
        const int t = 1 + static_cast<int>(rng.uniform(0.0, 20.0));
        std::vector<double> mu(static_cast<std::size_t>(k + 1));
        for (auto &m : mu)
        {
            const double u = rng.uniform();
            m = u < 0.1 ? 0.0 : (u < 0.2 ? 1e-6 * rng.uniform() : rng.uniform());
        }
        double s = 0.0;
        for (double m : mu)
            s += m;
        if (s == 0.0)
        {
            mu.back() = 1.0;
            s = 1.0;
        }
        for (auto &m : mu)
            m /= s;

        std::string why;
        try
        {
            const ResourcePlan p = quantize(mu, n, t);
            p.check(n, t);
            long total = static_cast<long>(n) * p.t_sleep;
            for (int m : p.resources)
                total += m;
            bool any_share = false;
            for (int u = 0; u < k; ++u)
                any_share = any_share || mu[static_cast<std::size_t>(u)] > 0.0;
            if (any_share && total != static_cast<long>(n) * t)
                why = "resources not conserved";
            const bool corner = any_share && static_cast<double>(t) * n * mu.back() < k;
            if (corner)
            {
                ++high_load;
                if (!p.high_load || p.t_sleep != 0)
                    why = "high-load branch not taken";
            }
            else if (p.high_load)
                why = "high-load branch taken without cause";
        }
        catch (const std::exception &e)
        {
            why = e.what();
        }
        if (!why.empty())
        {
            if (failures++ == 0)
                first = why;
        }
    }
    Verdict v;
    v.pass = failures == 0;
    v.detail = "100000 tuples, " + std::to_string(high_load) + " in the high-load branch, " +
               std::to_string(failures) + " failures" + (first.empty() ? "" : " (first: " + first + ")");
    return v;
}

} // namespace

int main()
{
    int failed = 0;
    auto report = [&](int id, const char *name, const Verdict &v) {
        std::printf("[%s] %2d %-22s %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
        std::fflush(stdout);
        failed += !v.pass;
    };
    auto guarded = [](const std::function<Verdict()> &f) {
        try
        {
            return f();
        }
        catch (const std::exception &e)
        {
            return Verdict{false, std::string("exception: ") + e.what()};
        }
    };

    report(1, "iwf_oracle", guarded(iwf_oracle));
    report(2, "step1_optimality", guarded(step1_grid));
    report(3, "convexity", guarded(convexity));

    Campaign campaign;
    std::string campaign_error;
    try
    {
        campaign = run_campaign();
    }
    catch (const std::exception &e)
    {
        campaign_error = e.what();
    }
    auto from_campaign = [&](Verdict (*f)(const Campaign &)) {
        if (!campaign_error.empty())
            return Verdict{false, "campaign failed: " + campaign_error};
        return guarded([&] { return f(campaign); });
    };
    report(4, "rate_fulfilment", from_campaign(rate_fulfilment));
    report(5, "benchmark_ordering", from_campaign(benchmark_ordering));
    report(6, "antenna_adaptation", from_campaign(antenna_adaptation));
    report(7, "step1_step2_gap", from_campaign(step_consistency));
    report(8, "tradeoff_dominance", guarded(tradeoff_dominance));
    report(9, "determinism", guarded(determinism));
    report(10, "quantize_fuzz", guarded(quantize_fuzz));

    std::printf("%d of 10 criteria passed\n", 10 - failed);
    return failed == 0 ? 0 : 1;
}
