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

// Command-line front end: Monte Carlo campaigns and the single-link
// transmit-time trade-off curve.

#include "bspower/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace bspower;

int main(int argc, char **argv)
{
    CLI::App app{"Base-station supply power minimisation simulator"};

    std::string config_path;
    int drops = 100;
    std::uint64_t seed = 1;
    std::vector<double> rates_mbps{10.0};
    std::vector<std::string> mode_names{"raps", "ba1", "ba2", "dtx", "max"};
    std::string select_name = "center";
    std::string out_dir = "results";
    std::string format_name = "csv";
    std::string allocation_path;
    bool tradeoff = false;
    double tradeoff_target = 3.6;
    double tradeoff_gain = 2.5e4;
    int tradeoff_antennas = 1;
    int tradeoff_points = 1000;

    app.add_option("--config", config_path, "Flat key = value parameter file")->check(CLI::ExistingFile);
    app.add_option("--drops", drops, "Monte Carlo drops per rate")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Master seed");
    app.add_option("--rates", rates_mbps, "Per-user target rates in Mbit/s")->delimiter(',');
    app.add_option("--modes", mode_names, "Schedulers: raps, ba1, ba2, dtx, max")->delimiter(',');
    app.add_option("--channel-select", select_name, "Step-1 channel: center, mean or median");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--format", format_name, "csv or json");
    app.add_option("--allocation-csv", allocation_path, "Dump RAPS power allocations (single rate only)");
    app.add_flag("--tradeoff", tradeoff, "Write the single-link transmit-time trade-off curves instead");
    app.add_option("--tradeoff-target", tradeoff_target, "Spectral efficiency target (bit/s/Hz)");
    app.add_option("--tradeoff-gain", tradeoff_gain, "Noise-normalised link gain (1/W)");
    app.add_option("--tradeoff-antennas", tradeoff_antennas, "Active transmit chains for the idle power");
    app.add_option("--tradeoff-points", tradeoff_points, "Samples of the transmit share");

    CLI11_PARSE(app, argc, argv);

    try
    {
        RunConfig cfg;
        if (!config_path.empty())
            load_config_file(config_path, cfg.system, cfg.power);

        if (tradeoff)
        {
            const TradeoffCurves curves =
                tradeoff_curve(tradeoff_target, cfg.power, tradeoff_gain, tradeoff_antennas, tradeoff_points);
            if (!curves.feasible)
            {
                std::cerr << "tradeoff: target unreachable at full power and full transmit share\n";
                return 2;
            }
            std::filesystem::create_directories(out_dir);
            const auto path = std::filesystem::path(out_dir) / "tradeoff.csv";
            std::ofstream f(path, std::ios::binary);
            write_tradeoff_csv(f, curves);
            std::cout << path.string() << '\n';
            return 0;
        }

        cfg.drops = drops;
        cfg.seed = seed;
        cfg.rates_bps.clear();
        for (double r : rates_mbps)
            cfg.rates_bps.push_back(r * 1e6);
        cfg.modes.clear();
        for (const auto &m : mode_names)
            cfg.modes.push_back(parse_mode(m));
        cfg.select = parse_channel_select(select_name);
        const Format format = parse_format(format_name);
        cfg.validate();

        std::ofstream alloc;
        if (!allocation_path.empty())
        {
            if (cfg.rates_bps.size() != 1)
                throw std::invalid_argument("--allocation-csv needs exactly one rate");
            alloc.open(allocation_path, std::ios::binary);
            if (!alloc)
                throw std::runtime_error("cannot write " + allocation_path);
        }

        const ResultTable table = run(cfg, alloc.is_open() ? &alloc : nullptr);
        for (const auto &p : emit(table, format, out_dir))
            std::cout << p.string() << '\n';
    }
    catch (const std::invalid_argument &e)
    {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
