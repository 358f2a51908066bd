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
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace bspower
{

using cplx = std::complex<double>;

/// Synthetic fading generator knobs. Large-scale: macro NLOS pathloss
/// L = intercept + slope * log10(d / km) plus log-normal shadowing. Small-scale:
/// tapped delay line with an exponential power-delay profile, Rayleigh taps
/// evolving over slots as a first-order autoregressive process.
struct FadingParams
{
    double pathloss_intercept_db = 128.1;
    double pathloss_slope_db = 37.6;
    double shadowing_std_db = 8.0;
    int taps = 6;
    double tap_spacing_s = 0.3e-6;
    double pdp_decay_taps = 2.0; // tap l has relative power exp(-l / decay)
    double speed_mps = 3.0;
    double carrier_hz = 2.0e9;

    /// Slot-to-slot tap correlation J0(2 pi f_D tau).
    double ar_coefficient(double slot_s) const;
};

struct SystemConfig
{
    int users = 10;                     // K
    int subcarriers = 50;               // N
    int slots = 10;                     // T
    double subcarrier_bw_hz = 200.0e3;  // w
    double slot_s = 1.0e-3;             // tau
    double noise_psd_w_per_hz = 4e-21;  // N0
    int rx_antennas = 2;                // M_R, fixed
    double cell_radius_m = 250.0;
    double min_distance_m = 40.0;
    FadingParams fading;

    double frame_s() const { return slots * slot_s; }
    double total_bw_hz() const { return subcarriers * subcarrier_bw_hz; }

    /// Throws std::invalid_argument on inconsistent settings (N < K, M_R != 2, ...).
    void validate() const;
};

/// 2x2 channel matrix, rows are receive antennas, columns transmit antennas.
struct ChannelMatrix
{
    std::array<cplx, 4> v{};

    cplx &operator()(int rx, int tx) { return v[static_cast<std::size_t>(rx * 2 + tx)]; }
    const cplx &operator()(int rx, int tx) const { return v[static_cast<std::size_t>(rx * 2 + tx)]; }

    static ChannelMatrix identity();
    static ChannelMatrix diagonal(cplx a, cplx b);
    bool operator==(const ChannelMatrix &) const = default;
};

/// Eigenvalues of the Gram matrix of the first `antennas` columns, descending.
/// One value for antennas = 1, two values for antennas = 2.
std::array<double, 2> gram_eigenvalues(const ChannelMatrix &h, int antennas);

/// |mean of the entries of the first `antennas` columns|^2, the per-resource
/// scalar used to rank subcarriers.
double mean_entry_gain(const ChannelMatrix &h, int antennas);

struct UserLink
{
    double x_m = 0.0;
    double y_m = 0.0;
    double distance_m = 0.0;
    double pathloss_db = 0.0;
    double shadowing_db = 0.0;

    /// Linear large-scale power gain.
    double gain() const;
    bool operator==(const UserLink &) const = default;
};

/// Channel matrices for every subcarrier x slot x user. Immutable once built.
class ChannelGrid
{
  public:
    ChannelGrid() = default;
    ChannelGrid(int subcarriers, int slots, int users);

    int subcarriers() const { return n_; }
    int slots() const { return t_; }
    int users() const { return k_; }

    const ChannelMatrix &at(int n, int t, int k) const { return h_[index(n, t, k)]; }
    ChannelMatrix &at(int n, int t, int k) { return h_[index(n, t, k)]; }

    std::span<const UserLink> links() const { return links_; }
    std::vector<UserLink> &links() { return links_; }

    bool operator==(const ChannelGrid &) const = default;

  private:
    std::size_t index(int n, int t, int k) const
    {
        return (static_cast<std::size_t>(n) * static_cast<std::size_t>(t_) + static_cast<std::size_t>(t)) *
                   static_cast<std::size_t>(k_) +
               static_cast<std::size_t>(k);
    }

    int n_ = 0;
    int t_ = 0;
    int k_ = 0;
    std::vector<ChannelMatrix> h_;
    std::vector<UserLink> links_;
};

/// Draws one drop: user placement, large-scale gains and the small-scale
/// channel for the whole frame. Deterministic in (config, seed); user k draws
/// only from the substream derive_seed(seed, k).
ChannelGrid generate(const SystemConfig &config, std::uint64_t seed);

/// Per-resource eigenvalues for both antenna modes.
class EigenGrid
{
  public:
    EigenGrid() = default;
    explicit EigenGrid(const ChannelGrid &grid);

    int subcarriers() const { return n_; }
    int slots() const { return t_; }
    int users() const { return k_; }

    /// Eigenvalues for `antennas` transmit antennas, sorted descending.
    std::span<const double> values(int n, int t, int k, int antennas) const;

  private:
    // per resource: [simo, mimo_1, mimo_2]
    std::vector<std::array<double, 3>> ev_;
    int n_ = 0;
    int t_ = 0;
    int k_ = 0;
};

EigenGrid eigen_grid(const ChannelGrid &grid);

enum class ChannelSelect
{
    center,
    mean,
    median
};

ChannelSelect parse_channel_select(std::string_view name);
std::string_view to_string(ChannelSelect method);

/// Block-fading stand-in for user k over the whole frame.
ChannelMatrix representative_channel(const ChannelGrid &grid, int user, ChannelSelect method);

/// Columnar text dump: '#' header lines with dimensions and user links, then
/// one row "n t k rx tx re im" per matrix entry. Numbers round-trip exactly.
void write_grid(std::ostream &out, const ChannelGrid &grid);
ChannelGrid read_grid(std::istream &in);

} // namespace bspower
