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

#include "bspower/channel.hpp"

#include "bspower/format.hpp"
#include "bspower/rng.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace bspower
{

namespace
{
constexpr double kSpeedOfLight = 299792458.0;
}

double FadingParams::ar_coefficient(double slot_s) const
{
    const double doppler_hz = speed_mps * carrier_hz / kSpeedOfLight;
    return std::cyl_bessel_j(0.0, 2.0 * std::numbers::pi * doppler_hz * slot_s);
}

void SystemConfig::validate() const
{
    if (users < 1)
        throw std::invalid_argument("system config: need at least one user");
    if (subcarriers < users)
        throw std::invalid_argument("system config: subcarriers must be >= users");
    if (slots < 1)
        throw std::invalid_argument("system config: need at least one slot");
    if (rx_antennas != 2)
        throw std::invalid_argument("system config: only 2 receive antennas are supported");
    if (!(subcarrier_bw_hz > 0.0) || !(slot_s > 0.0) || !(noise_psd_w_per_hz > 0.0))
        throw std::invalid_argument("system config: bandwidth, slot duration and noise PSD must be positive");
    if (!(min_distance_m > 0.0) || !(cell_radius_m >= min_distance_m))
        throw std::invalid_argument("system config: need 0 < min_distance <= cell_radius");
    if (fading.taps < 1 || !(fading.tap_spacing_s >= 0.0) || !(fading.pdp_decay_taps > 0.0) ||
        !(fading.shadowing_std_db >= 0.0) || !(fading.speed_mps >= 0.0) || !(fading.carrier_hz > 0.0))
        throw std::invalid_argument("system config: invalid fading parameters");
}

ChannelMatrix ChannelMatrix::identity()
{
    return diagonal(1.0, 1.0);
}

ChannelMatrix ChannelMatrix::diagonal(cplx a, cplx b)
{
    ChannelMatrix m;
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

std::array<double, 2> gram_eigenvalues(const ChannelMatrix &h, int antennas)
{
    const double a = std::norm(h(0, 0)) + std::norm(h(1, 0));
    if (antennas == 1)
        return {a, 0.0};
    if (antennas != 2)
        throw std::invalid_argument("gram_eigenvalues: antennas must be 1 or 2");
    // G = [[a, b], [conj(b), d]]
    const double d = std::norm(h(0, 1)) + std::norm(h(1, 1));
    const cplx b = std::conj(h(0, 0)) * h(0, 1) + std::conj(h(1, 0)) * h(1, 1);
    const double half_tr = 0.5 * (a + d);
    const double half_diff = 0.5 * (a - d);
    const double disc = std::sqrt(half_diff * half_diff + std::norm(b));
    const double l1 = half_tr + disc;
    // small root from det / l1 avoids cancellation
    const double det = a * d - std::norm(b);
    const double l2 = l1 > 0.0 ? std::max(0.0, det / l1) : 0.0;
    return {l1, l2};
}

double mean_entry_gain(const ChannelMatrix &h, int antennas)
{
    cplx sum = 0.0;
    for (int rx = 0; rx < 2; ++rx)
        for (int tx = 0; tx < antennas; ++tx)
            sum += h(rx, tx);
    return std::norm(sum / static_cast<double>(2 * antennas));
}

double UserLink::gain() const
{
    return std::pow(10.0, -(pathloss_db + shadowing_db) / 10.0);
}

ChannelGrid::ChannelGrid(int subcarriers, int slots, int users)
    : n_(subcarriers), t_(slots), k_(users),
      h_(static_cast<std::size_t>(subcarriers) * static_cast<std::size_t>(slots) * static_cast<std::size_t>(users)),
      links_(static_cast<std::size_t>(users))
{
    if (subcarriers < 1 || slots < 1 || users < 1)
        throw std::invalid_argument("channel grid dimensions must be positive");
}

ChannelGrid generate(const SystemConfig &config, std::uint64_t seed)
{
    config.validate();
    const FadingParams &f = config.fading;
    const int n_sc = config.subcarriers;
    const int n_slots = config.slots;
    const int n_taps = f.taps;

    ChannelGrid grid(n_sc, n_slots, config.users);

    std::vector<double> tap_power(static_cast<std::size_t>(n_taps));
    double pdp_sum = 0.0;
    for (int l = 0; l < n_taps; ++l)
        pdp_sum += tap_power[static_cast<std::size_t>(l)] = std::exp(-l / f.pdp_decay_taps);
    for (double &p : tap_power)
        p /= pdp_sum;

    // phase[n][l] = exp(-j 2 pi n w l dt)
    std::vector<cplx> phase(static_cast<std::size_t>(n_sc * n_taps));
    for (int n = 0; n < n_sc; ++n)
        for (int l = 0; l < n_taps; ++l)
            phase[static_cast<std::size_t>(n * n_taps + l)] = std::polar(
                1.0, -2.0 * std::numbers::pi * n * config.subcarrier_bw_hz * l * f.tap_spacing_s);

    const double rho = f.ar_coefficient(config.slot_s);
    const double innovation = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    const double r_min2 = config.min_distance_m * config.min_distance_m;
    const double r_max2 = config.cell_radius_m * config.cell_radius_m;

    // taps[(rx * 2 + tx) * L + l]
    std::vector<cplx> taps(static_cast<std::size_t>(4 * n_taps));

    for (int k = 0; k < config.users; ++k)
    {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));

        UserLink &link = grid.links()[static_cast<std::size_t>(k)];
        link.distance_m = std::sqrt(rng.uniform(r_min2, r_max2));
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        link.x_m = link.distance_m * std::cos(angle);
        link.y_m = link.distance_m * std::sin(angle);
        link.pathloss_db = f.pathloss_intercept_db + f.pathloss_slope_db * std::log10(link.distance_m / 1000.0);
        link.shadowing_db = f.shadowing_std_db * rng.normal();
        const double amplitude = std::sqrt(link.gain());

        for (int t = 0; t < n_slots; ++t)
        {
            for (int pair = 0; pair < 4; ++pair)
                for (int l = 0; l < n_taps; ++l)
                {
                    cplx &g = taps[static_cast<std::size_t>(pair * n_taps + l)];
                    const cplx fresh = rng.complex_normal(tap_power[static_cast<std::size_t>(l)]);
                    g = t == 0 ? fresh : rho * g + innovation * fresh;
                }

            for (int n = 0; n < n_sc; ++n)
            {
                ChannelMatrix &h = grid.at(n, t, k);
                for (int pair = 0; pair < 4; ++pair)
                {
                    cplx acc = 0.0;
                    for (int l = 0; l < n_taps; ++l)
                        acc += taps[static_cast<std::size_t>(pair * n_taps + l)] *
                               phase[static_cast<std::size_t>(n * n_taps + l)];
                    h.v[static_cast<std::size_t>(pair)] = amplitude * acc;
                }
            }
        }
    }
    return grid;
}

EigenGrid::EigenGrid(const ChannelGrid &grid)
    : ev_(static_cast<std::size_t>(grid.subcarriers()) * static_cast<std::size_t>(grid.slots()) *
          static_cast<std::size_t>(grid.users())),
      n_(grid.subcarriers()), t_(grid.slots()), k_(grid.users())
{
    std::size_t i = 0;
    for (int n = 0; n < n_; ++n)
        for (int t = 0; t < t_; ++t)
            for (int k = 0; k < k_; ++k, ++i)
            {
                const ChannelMatrix &h = grid.at(n, t, k);
                const auto mimo = gram_eigenvalues(h, 2);
                ev_[i] = {gram_eigenvalues(h, 1)[0], mimo[0], mimo[1]};
            }
}

std::span<const double> EigenGrid::values(int n, int t, int k, int antennas) const
{
    const std::size_t i =
        (static_cast<std::size_t>(n) * static_cast<std::size_t>(t_) + static_cast<std::size_t>(t)) *
            static_cast<std::size_t>(k_) +
        static_cast<std::size_t>(k);
    const auto &e = ev_[i];
    if (antennas == 1)
        return {e.data(), 1};
    if (antennas == 2)
        return {e.data() + 1, 2};
    throw std::invalid_argument("EigenGrid::values: antennas must be 1 or 2");
}

EigenGrid eigen_grid(const ChannelGrid &grid)
{
    return EigenGrid(grid);
}

ChannelSelect parse_channel_select(std::string_view name)
{
    if (name == "center")
        return ChannelSelect::center;
    if (name == "mean")
        return ChannelSelect::mean;
    if (name == "median")
        return ChannelSelect::median;
    throw std::invalid_argument("unknown channel selection method '" + std::string(name) +
                                "' (expected center, mean or median)");
}

std::string_view to_string(ChannelSelect method)
{
    switch (method)
    {
    case ChannelSelect::center:
        return "center";
    case ChannelSelect::mean:
        return "mean";
    case ChannelSelect::median:
        return "median";
    }
    return "?";
}

namespace
{
double median_of(std::vector<double> &v)
{
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1)
        return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}
} // namespace

ChannelMatrix representative_channel(const ChannelGrid &grid, int user, ChannelSelect method)
{
    if (user < 0 || user >= grid.users())
        throw std::out_of_range("representative_channel: user index out of range");
    const int n_sc = grid.subcarriers();
    const int n_slots = grid.slots();

    switch (method)
    {
    case ChannelSelect::center:
        // ceil(N/2), ceil(T/2) counted from 1
        return grid.at((n_sc + 1) / 2 - 1, (n_slots + 1) / 2 - 1, user);
    case ChannelSelect::mean:
    {
        ChannelMatrix acc;
        for (int n = 0; n < n_sc; ++n)
            for (int t = 0; t < n_slots; ++t)
                for (std::size_t i = 0; i < 4; ++i)
                    acc.v[i] += grid.at(n, t, user).v[i];
        for (auto &x : acc.v)
            x /= static_cast<double>(n_sc) * n_slots;
        return acc;
    }
    case ChannelSelect::median:
    {
        ChannelMatrix out;
        std::vector<double> re, im;
        re.reserve(static_cast<std::size_t>(n_sc * n_slots));
        im.reserve(static_cast<std::size_t>(n_sc * n_slots));
        for (std::size_t i = 0; i < 4; ++i)
        {
            re.clear();
            im.clear();
            for (int n = 0; n < n_sc; ++n)
                for (int t = 0; t < n_slots; ++t)
                {
                    re.push_back(grid.at(n, t, user).v[i].real());
                    im.push_back(grid.at(n, t, user).v[i].imag());
                }
            out.v[i] = {median_of(re), median_of(im)};
        }
        return out;
    }
    }
    throw std::invalid_argument("representative_channel: unknown method");
}

void write_grid(std::ostream &out, const ChannelGrid &grid)
{
    out << "# bspower channel grid v1\n";
    out << "# dims " << grid.subcarriers() << ' ' << grid.slots() << ' ' << grid.users() << '\n';
    for (int k = 0; k < grid.users(); ++k)
    {
        const UserLink &l = grid.links()[static_cast<std::size_t>(k)];
        out << "# user " << k << ' ' << format_double(l.x_m) << ' ' << format_double(l.y_m) << ' '
            << format_double(l.distance_m) << ' ' << format_double(l.pathloss_db) << ' '
            << format_double(l.shadowing_db) << '\n';
    }
    out << "n t k rx tx re im\n";
    for (int n = 0; n < grid.subcarriers(); ++n)
        for (int t = 0; t < grid.slots(); ++t)
            for (int k = 0; k < grid.users(); ++k)
                for (int rx = 0; rx < 2; ++rx)
                    for (int tx = 0; tx < 2; ++tx)
                    {
                        const cplx v = grid.at(n, t, k)(rx, tx);
                        out << n << ' ' << t << ' ' << k << ' ' << rx << ' ' << tx << ' ' << format_double(v.real())
                            << ' ' << format_double(v.imag()) << '\n';
                    }
}

ChannelGrid read_grid(std::istream &in)
{
    std::string line;
    auto fail = [](const std::string &what) { throw std::runtime_error("read_grid: " + what); };

    if (!std::getline(in, line) || line != "# bspower channel grid v1")
        fail("missing format header");
    if (!std::getline(in, line))
        fail("missing dims line");
    std::istringstream dims(line);
    std::string hash, tag;
    int n_sc = 0, n_slots = 0, n_users = 0;
    if (!(dims >> hash >> tag >> n_sc >> n_slots >> n_users) || tag != "dims")
        fail("malformed dims line");
    ChannelGrid grid(n_sc, n_slots, n_users);

    auto field = [&](std::istringstream &ss) {
        std::string tok;
        if (!(ss >> tok))
            fail("truncated line: " + line);
        return tok;
    };

    for (int k = 0; k < n_users; ++k)
    {
        if (!std::getline(in, line))
            fail("missing user line");
        std::istringstream ss(line);
        if (field(ss) != "#" || field(ss) != "user" || parse_integer<int>(field(ss)) != k)
            fail("malformed user line: " + line);
        UserLink &l = grid.links()[static_cast<std::size_t>(k)];
        l.x_m = parse_double(field(ss));
        l.y_m = parse_double(field(ss));
        l.distance_m = parse_double(field(ss));
        l.pathloss_db = parse_double(field(ss));
        l.shadowing_db = parse_double(field(ss));
    }
    if (!std::getline(in, line) || line != "n t k rx tx re im")
        fail("missing column header");

    const std::size_t expected = static_cast<std::size_t>(n_sc) * n_slots * n_users * 4;
    std::size_t rows = 0;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        std::istringstream ss(line);
        const int n = parse_integer<int>(field(ss));
        const int t = parse_integer<int>(field(ss));
        const int k = parse_integer<int>(field(ss));
        const int rx = parse_integer<int>(field(ss));
        const int tx = parse_integer<int>(field(ss));
        const double re = parse_double(field(ss));
        const double im = parse_double(field(ss));
        if (n < 0 || n >= n_sc || t < 0 || t >= n_slots || k < 0 || k >= n_users || rx < 0 || rx > 1 || tx < 0 ||
            tx > 1)
            fail("index out of range: " + line);
        grid.at(n, t, k)(rx, tx) = {re, im};
        ++rows;
    }
    if (rows != expected)
        fail("expected " + std::to_string(expected) + " rows, got " + std::to_string(rows));
    return grid;
}

} // namespace bspower
