#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gasnet/dynamics.hpp"
#include "gasnet/network.hpp"
#include "gasnet/profiles.hpp"
#include "gasnet/units.hpp"

namespace gasnet {

/// A complete operating scenario in nondimensional units: network, boundary
/// profiles, refinement length and the estimation grid size.
///
/// withdrawals[j] belongs to the j-th non-slack junction (input order) and is a
/// nondimensional flow (GasConstants::nd_flow); slack_density[i] belongs to the
/// i-th slack junction. All profiles are periodic in constants.nondim_horizon().
struct Scenario {
    std::string name;
    GasConstants constants;
    Network network;
    double delta = 5000.0; // m
    std::vector<Profile> withdrawals;
    std::vector<Profile> slack_density;
    int grid_points = 24;

    double horizon() const { return constants.nondim_horizon(); }

    RefinedNetwork refined() const { return refine(network, delta, constants.ell0); }

    void validate() const {
        constants.validate();
        detail::require(withdrawals.size() == network.nonslack_junctions().size(),
                        "one withdrawal profile per non-slack junction is required");
        detail::require(slack_density.size() == network.slack_junctions().size(),
                        "one density profile per slack junction is required");
        detail::require(grid_points >= 8, "estimation grid needs at least 8 points");
        const double T = horizon();
        auto periodic = [T](const Profile& p) { return std::abs(p.period() - T) <= 1e-9 * T; };
        for (const auto& p : withdrawals) detail::require(periodic(p), "withdrawal profile period differs from the horizon");
        for (const auto& p : slack_density) detail::require(periodic(p), "slack profile period differs from the horizon");
        for (const auto& c : network.compressors())
            detail::require(periodic(c.ratio), "compressor profile period differs from the horizon");
    }

    Vector withdrawal(double t) const {
        Vector d(static_cast<Eigen::Index>(withdrawals.size()));
        for (std::size_t j = 0; j < withdrawals.size(); ++j) d[static_cast<Eigen::Index>(j)] = withdrawals[j].eval(t);
        return d;
    }
    Vector slack(double t) const {
        Vector s(static_cast<Eigen::Index>(slack_density.size()));
        for (std::size_t j = 0; j < slack_density.size(); ++j) s[static_cast<Eigen::Index>(j)] = slack_density[j].eval(t);
        return s;
    }
    Vector slack_rate(double t) const {
        Vector s(static_cast<Eigen::Index>(slack_density.size()));
        for (std::size_t j = 0; j < slack_density.size(); ++j)
            s[static_cast<Eigen::Index>(j)] = slack_density[j].eval_deriv(t);
        return s;
    }

    /// Copy with every profile (including compressor ratios) replaced by its period mean.
    Scenario time_averaged() const {
        Scenario out = *this;
        const double T = horizon();
        for (auto& p : out.withdrawals) p = Profile::constant(p.mean(), T);
        for (auto& p : out.slack_density) p = Profile::constant(p.mean(), T);
        std::vector<Compressor> comps = network.compressors();
        for (auto& c : comps) c.ratio = Profile::constant(c.ratio.mean(), T);
        out.network = network.with_compressors(std::move(comps));
        return out;
    }
};

/// Scenario in SI units as it appears in files and fixtures. Profiles take time
/// in seconds; withdrawals are kg/s, slack and bound values are Pa.
struct DimensionalScenario {
    struct Node {
        int id = 0;
        bool slack = false;
        double p_min = 0.0; // Pa
        double p_max = 0.0; // Pa
    };
    struct Comp {
        int pipe = 0;
        CompressorEnd end = CompressorEnd::From;
        Profile ratio;
    };

    std::string name;
    double a = kDefaultSpeedOfSound;
    std::optional<double> ell0;  // m; longest pipe when absent
    std::optional<double> rho0;  // kg/m^3; mean density of the first slack when absent
    double horizon = 86400.0;    // s
    double delta = 5000.0;       // m
    int grid_points = 24;
    std::vector<Node> nodes;
    std::vector<Pipe> pipes;
    std::vector<Comp> compressors;
    std::vector<std::pair<int, Profile>> withdrawals; // junction id -> kg/s
    std::vector<std::pair<int, Profile>> slack_pressure; // junction id -> Pa
};

inline Scenario make_scenario(const DimensionalScenario& ds) {
    GasConstants c;
    c.a = ds.a;
    c.horizon = ds.horizon;
    double longest = 0.0;
    for (const auto& p : ds.pipes) longest = std::max(longest, p.length);
    c.ell0 = ds.ell0.value_or(longest);
    if (ds.rho0) {
        c.rho0 = *ds.rho0;
    } else {
        detail::require(!ds.slack_pressure.empty(), "scenario has no slack pressure profile");
        c.rho0 = ds.slack_pressure.front().second.mean() / (c.a * c.a);
    }
    c.validate();
    const double ts = c.time_scale();
    const double to_nd_density = 1.0 / (c.a * c.a * c.rho0);

    std::vector<Junction> js;
    for (const auto& n : ds.nodes)
        js.push_back({n.id, n.slack ? JunctionKind::Slack : JunctionKind::NonSlack, n.p_min * to_nd_density,
                      n.p_max * to_nd_density});
    std::vector<Compressor> cs;
    for (const auto& cp : ds.compressors) cs.push_back({cp.pipe, cp.end, cp.ratio.rescaled(ts, 1.0)});

    Scenario sc;
    sc.name = ds.name;
    sc.constants = c;
    sc.network = Network(std::move(js), ds.pipes, std::move(cs));
    sc.delta = ds.delta;
    sc.grid_points = ds.grid_points;

    auto lookup = [](const std::vector<std::pair<int, Profile>>& v, int id, const char* what) -> const Profile& {
        for (const auto& [jid, p] : v)
            if (jid == id) return p;
        detail::fail(ErrorKind::InvalidArgument, std::string("missing ") + what + " profile for junction " + std::to_string(id));
    };
    for (std::size_t i : sc.network.nonslack_junctions()) {
        const int id = sc.network.junctions()[i].id;
        sc.withdrawals.push_back(lookup(ds.withdrawals, id, "withdrawal").rescaled(ts, 1.0 / c.flux_scale()));
    }
    for (std::size_t i : sc.network.slack_junctions()) {
        const int id = sc.network.junctions()[i].id;
        sc.slack_density.push_back(lookup(ds.slack_pressure, id, "slack pressure").rescaled(ts, to_nd_density));
    }
    for (const auto& [id, p] : ds.withdrawals) {
        const std::size_t j = sc.network.junction_index(id);
        detail::require(!sc.network.junctions()[j].slack(), "withdrawal given for slack junction " + std::to_string(id));
        (void)p;
    }
    sc.validate();
    return sc;
}

} // namespace gasnet
