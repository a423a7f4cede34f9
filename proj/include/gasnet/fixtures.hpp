#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "gasnet/scenario.hpp"

namespace gasnet {

namespace detail {

inline Profile daily(double mean, double rel_amp, int harmonic, double phase = 0.0) {
    return Profile::relative_sinusoid(mean, rel_amp, harmonic, 86400.0, phase);
}

inline DimensionalScenario single_pipe_spec() {
    DimensionalScenario ds;
    ds.name = "single-pipe";
    ds.nodes = {{1, true, psi_to_pa(500.0), psi_to_pa(1100.0)}, {2, false, psi_to_pa(500.0), psi_to_pa(1100.0)}};
    ds.pipes = {{1, 1, 2, 100000.0, 0.5, 0.011}};
    ds.compressors = {{1, CompressorEnd::From, daily(1.15, 0.01 / 1.15, 1)}};
    ds.withdrawals = {{2, daily(68.094, 0.1, 2)}};
    ds.slack_pressure = {{1, Profile::constant(psi_to_pa(942.75), 86400.0)}};
    return ds;
}

// Single loop 2-3-4 fed from slack 1; compressors at the inlet of pipes 1 and 2.
inline DimensionalScenario four_node_spec() {
    DimensionalScenario ds;
    ds.name = "four-node";
    const double lo = psi_to_pa(400.0), hi = psi_to_pa(1000.0);
    ds.nodes = {{1, true, lo, hi}, {2, false, lo, hi}, {3, false, lo, hi}, {4, false, lo, hi}};
    ds.pipes = {{1, 1, 2, 80000.0, 0.6, 0.01},
                {2, 2, 3, 50000.0, 0.5, 0.01},
                {3, 2, 4, 60000.0, 0.5, 0.01},
                {4, 3, 4, 30000.0, 0.4, 0.01}};
    ds.compressors = {{1, CompressorEnd::From, daily(1.5, 0.02, 1)},
                      {2, CompressorEnd::From, daily(1.15, 0.02, 1, 0.5 * std::numbers::pi)}};
    ds.withdrawals = {{2, daily(10.0, 0.1, 2)}, {3, daily(15.0, 0.1, 2, 0.3)}, {4, daily(20.0, 0.15, 2, 0.6)}};
    ds.slack_pressure = {{1, Profile::constant(psi_to_pa(500.0), 86400.0)}};
    return ds;
}

// Tree with 25 junctions and 24 pipes: a trunk 1-...-9 with side branches.
// Mixes long and very short pipes; five compressors.
inline DimensionalScenario twenty_five_node_spec() {
    DimensionalScenario ds;
    ds.name = "twenty-five-node";
    const double lo = psi_to_pa(350.0), hi = psi_to_pa(1000.0);
    ds.nodes.push_back({1, true, lo, hi});
    for (int j = 2; j <= 25; ++j) ds.nodes.push_back({j, false, lo, hi});
    struct P { int from, to; double km, d; };
    const P layout[] = {
        {1, 2, 60, 0.9},  {2, 3, 40, 0.9},  {3, 4, 50, 0.9},  {4, 5, 30, 0.8},  {5, 6, 45, 0.8},
        {6, 7, 35, 0.7},  {7, 8, 25, 0.7},  {8, 9, 20, 0.6},  {2, 10, 15, 0.5}, {10, 11, 8, 0.4},
        {3, 12, 30, 0.5}, {12, 13, 5, 0.4}, {12, 14, 12, 0.4}, {4, 15, 25, 0.5}, {15, 16, 6, 0.4},
        {5, 17, 35, 0.5}, {17, 18, 10, 0.4}, {6, 19, 20, 0.5}, {19, 20, 5, 0.3}, {7, 21, 18, 0.5},
        {21, 22, 7, 0.4}, {8, 23, 12, 0.4}, {9, 24, 10, 0.4}, {24, 25, 5, 0.3},
    };
    int id = 1;
    for (const auto& p : layout) ds.pipes.push_back({id++, p.from, p.to, p.km * 1000.0, p.d, 0.01});
    ds.compressors = {{1, CompressorEnd::From, daily(1.5, 0.02, 1)},
                      {4, CompressorEnd::From, daily(1.2, 0.02, 1, 1.0)},
                      {7, CompressorEnd::From, daily(1.2, 0.02, 1, 2.0)},
                      {11, CompressorEnd::From, daily(1.1, 0.02, 1, 3.0)},
                      {16, CompressorEnd::From, daily(1.1, 0.02, 1, 4.0)}};
    const double base[] = {6, 8, 7, 5, 9, 6, 8, 7, 5, 6, 4, 7, 5, 6, 8, 5, 6, 4, 7, 5, 6, 5, 4, 6};
    for (int j = 2; j <= 25; ++j)
        ds.withdrawals.push_back({j, daily(base[j - 2], 0.1, 2, 0.25 * j)});
    ds.slack_pressure = {{1, Profile::constant(psi_to_pa(500.0), 86400.0)}};
    return ds;
}

} // namespace detail

inline DimensionalScenario builtin_fixture_spec(const std::string& name) {
    if (name == "single-pipe") return detail::single_pipe_spec();
    if (name == "four-node") return detail::four_node_spec();
    if (name == "twenty-five-node") return detail::twenty_five_node_spec();
    detail::fail(ErrorKind::InvalidArgument, "unknown fixture '" + name + "'");
}

inline Scenario builtin_fixture(const std::string& name) { return make_scenario(builtin_fixture_spec(name)); }

} // namespace gasnet
