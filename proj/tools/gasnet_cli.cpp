// gasnet_cli: periodic simulation and estimation driver.
//
// Exit codes: 0 success, 1 internal error, 2 invalid input (schema, usage,
// missing file), 3 integration failure, 4 solver non-convergence.
// Results go to files under --out; stdout gets one JSON status document;
// stderr carries logs only.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "gasnet/io.hpp"

namespace fs = std::filesystem;
using namespace gasnet;

namespace {

enum Exit { kOk = 0, kInternal = 1, kInput = 2, kIntegration = 3, kNoConvergence = 4 };

bool quiet = false;

void log(const std::string& msg) {
    if (!quiet) std::cerr << "[gasnet] " << msg << std::endl;
}

int exit_code(ErrorKind k) {
    switch (k) {
    case ErrorKind::Schema:
    case ErrorKind::InvalidArgument:
    case ErrorKind::Topology: return kInput;
    case ErrorKind::IntegrationFailure:
    case ErrorKind::NoPeriodicOrbit:
    case ErrorKind::InfeasibleSteadyState:
    case ErrorKind::SingularDerivative: return kIntegration;
    case ErrorKind::NumericalFailure: return kNoConvergence;
    }
    return kInternal;
}

int emit_error(int code, const std::string& kind, const std::string& message, const std::string& field = {},
               const json& extra = nullptr) {
    json j = {{"status", "error"}, {"exit_code", code}, {"error", {{"kind", kind}, {"message", message}}}};
    if (!field.empty()) j["error"]["field"] = field;
    if (!extra.is_null()) j["report"] = extra;
    std::cout << j.dump(2) << std::endl;
    return code;
}

void prepare_out(const fs::path& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw SchemaError("out", "cannot create output directory '" + out.string() + "'");
}

struct Loaded {
    ScenarioFile file;
    Scenario sc;
    RefinedNetwork rn;
};

Loaded load(const fs::path& path) {
    if (!fs::exists(path)) throw SchemaError("scenario", "file not found: '" + path.string() + "'");
    Loaded l;
    l.file = read_scenario_file(path);
    l.sc = make_scenario(l.file.scenario);
    l.rn = l.sc.refined();
    log("scenario '" + l.sc.name + "': " + std::to_string(l.rn.num_nodes()) + " refined nodes, " +
        std::to_string(l.rn.num_edges()) + " refined edges");
    return l;
}

void write_bundle(const fs::path& out, const Trajectory& tr, const RefinedNetwork& rn, const GasConstants& c,
                  const std::string& prefix = "") {
    write_grid_csv(out / (prefix + "pressure.csv"), pressure_table(tr, rn, c), "node");
    write_grid_csv(out / (prefix + "flux.csv"), flux_table(tr, rn, c), "edge");
    write_grid_csv(out / (prefix + "withdrawal.csv"), withdrawal_table(tr, rn, c), "node");
}

int cmd_simulate(const fs::path& scenario, const fs::path& out, int samples, double rel_tol) {
    const Loaded l = load(scenario);
    prepare_out(out);
    SimulationOptions opt;
    opt.rel_tol = rel_tol;
    const auto t0 = std::chrono::steady_clock::now();
    const PeriodicOrbit orbit = periodic_orbit(l.rn, l.sc, 1e-6, opt);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log("periodic orbit after " + std::to_string(orbit.periods) + " periods");
    const int n = samples > 0 ? samples : l.sc.grid_points;
    const Trajectory tr = orbit.trajectory.sample(grid_times(l.sc.horizon(), n));
    write_bundle(out, tr, l.rn, l.sc.constants);
    json rep = {{"scenario", l.sc.name},
                {"periods", orbit.periods},
                {"seam_mismatch", orbit.seam_mismatch},
                {"integrator_steps", orbit.trajectory.size() - 1},
                {"refined_nodes", l.rn.num_nodes()},
                {"refined_edges", l.rn.num_edges()},
                {"samples", n},
                {"wall_time_s", secs}};
    write_json(out / "orbit.json", rep);
    std::cout << json{{"status", "ok"}, {"command", "simulate"}, {"out", out.string()}, {"orbit", rep}}.dump(2) << std::endl;
    return kOk;
}

Formulation parse_mode(const std::string& m) {
    if (m == "noiseless") return Formulation::Noiseless;
    if (m == "state") return Formulation::State;
    if (m == "joint") return Formulation::Joint;
    throw SchemaError("mode", "must be noiseless | state | joint");
}

int cmd_estimate(const fs::path& scenario, const std::string& mode, const fs::path& out, std::optional<double> level,
                 std::optional<std::uint64_t> seed) {
    const Loaded l = load(scenario);
    prepare_out(out);
    EstimationOptions opt = l.file.estimation;
    opt.formulation = parse_mode(mode);
    const bool external = l.file.measured_withdrawals && l.file.measured_pressures;
    NoiseSpec noise = l.file.noise.value_or(NoiseSpec{});
    if (level) noise.level = *level;
    if (seed) noise.seed = *seed;
    if (opt.formulation != Formulation::Noiseless && !external && !l.file.noise && !level)
        throw SchemaError("noise", "state and joint estimation need a noise spec or measurement files");

    Estimate est;
    SolveReport report;
    json errors = nullptr;
    if (external && opt.formulation != Formulation::Noiseless) {
        log("estimating from measurement files");
        const MeasurementSet m = read_measurements(*l.file.measured_withdrawals, *l.file.measured_pressures, l.rn, l.sc,
                                                   opt.w_d, opt.w_rho);
        const TimeGrid grid = TimeGrid::of(l.sc);
        const Transcription tx = opt.formulation == Formulation::State
                                     ? build_state_estimation(l.rn, grid, l.sc, m)
                                     : build_joint_estimation(l.rn, grid, l.sc, m, opt.friction_lo, opt.friction_hi);
        const SolveResult r = solve(tx.problem, default_start(tx, l.rn, l.sc, &m), opt.solver);
        report = r.report;
        est = tx.unpack(r.x, l.rn, l.sc);
    } else {
        log("computing grid truth");
        const Trajectory truth = grid_truth(l.rn, l.sc, opt.solver);
        log("estimating (" + mode + ", noise " + detail::fmt17(noise.level) + "%, seed " + std::to_string(noise.seed) + ")");
        const EstimationResult r = run_estimation(l.rn, l.sc, truth, noise, opt);
        report = r.report;
        est = r.estimate;
        errors = to_json(r.errors);
        write_bundle(out, truth, l.rn, l.sc.constants, "truth_");
    }
    write_bundle(out, est.trajectory, l.rn, l.sc.constants);
    json rep = {{"scenario", l.sc.name}, {"mode", mode}, {"solve", to_json(report)}, {"errors", errors}};
    if (opt.formulation != Formulation::Noiseless && !external)
        rep["noise"] = {{"level", noise.level}, {"seed", noise.seed}};
    if (opt.formulation == Formulation::Joint) {
        std::ofstream f(out / "friction.csv");
        write_friction_csv(f, l.sc.network, est.friction);
        rep["friction"] = json::array();
        for (Eigen::Index p = 0; p < est.friction.size(); ++p)
            rep["friction"].push_back({{"pipe", l.sc.network.pipes()[static_cast<std::size_t>(p)].id}, {"lambda", est.friction[p]}});
    }
    write_json(out / "report.json", rep);
    if (report.status != SolveStatus::Converged)
        return emit_error(kNoConvergence, "non-convergence", report.message.empty() ? to_string(report.status) : report.message,
                          {}, to_json(report));
    std::cout << json{{"status", "ok"}, {"command", "estimate"}, {"out", out.string()}, {"report", rep}}.dump(2) << std::endl;
    return kOk;
}

int cmd_sweep(const fs::path& scenario, const std::string& mode, const fs::path& out, const std::vector<double>& levels,
              const std::vector<std::uint64_t>& seeds) {
    const Loaded l = load(scenario);
    prepare_out(out);
    EstimationOptions opt = l.file.estimation;
    opt.formulation = parse_mode(mode);
    if (opt.formulation == Formulation::Noiseless) throw SchemaError("mode", "sweep needs state or joint mode");
    if (levels.empty()) throw SchemaError("levels", "at least one level is required");
    if (seeds.empty()) throw SchemaError("seeds", "at least one seed is required");
    log("computing grid truth");
    const Trajectory truth = grid_truth(l.rn, l.sc, opt.solver);
    log("running " + std::to_string(levels.size() * seeds.size()) + " estimations on " + std::to_string(worker_threads()) + " threads");
    const auto cells = sweep(l.sc, truth, levels, seeds, opt);
    {
        std::ofstream f(out / "table.csv");
        write_sweep_csv(f, cells);
    }
    json rep = {{"scenario", l.sc.name}, {"mode", mode}, {"cells", json::array()}};
    bool any_ok = false;
    for (const auto& c : cells) {
        any_ok = any_ok || c.runs_ok > 0;
        json cell = {{"level", c.level}, {"runs_ok", c.runs_ok}, {"runs_failed", c.runs_failed}, {"errors", to_json(c.mean)}};
        if (opt.formulation == Formulation::Joint) {
            cell["mean_friction"] = json::array();
            for (double v : c.mean_friction) cell["mean_friction"].push_back(detail::num(v));
        }
        rep["cells"].push_back(cell);
    }
    if (opt.formulation == Formulation::Joint && seeds.size() >= 2) {
        for (const auto& c : cells) {
            if (c.runs_ok == 0) continue;
            std::ofstream f(out / ("bias_" + detail::fmt17(c.level) + ".csv"));
            write_bias_csv(f, l.sc.network, bias_report(l.sc.network, c.mean_friction, c.runs_ok, c.runs_failed));
        }
    }
    write_json(out / "sweep.json", rep);
    if (!any_ok) return emit_error(kNoConvergence, "non-convergence", "no sweep cell produced a converged run", {}, rep);
    std::cout << json{{"status", "ok"}, {"command", "sweep"}, {"out", out.string()}, {"sweep", rep}}.dump(2) << std::endl;
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gas network periodic simulation and estimation"};
    app.require_subcommand(1);
    app.add_flag("-q,--quiet", quiet, "Suppress log lines on stderr");

    std::string scenario, out, mode = "state";
    int samples = 0;
    double rel_tol = 1e-4;
    std::optional<double> level;
    std::optional<std::uint64_t> seed;
    std::vector<double> levels;
    std::vector<std::uint64_t> seeds;

    auto* sim = app.add_subcommand("simulate", "Periodic orbit of a scenario, written as heatmap CSVs");
    sim->add_option("scenario", scenario, "Scenario JSON file")->required();
    sim->add_option("-o,--out", out, "Output directory")->required();
    sim->add_option("--samples", samples, "Output columns per period (default: grid points)")->check(CLI::NonNegativeNumber);
    sim->add_option("--rel-tol", rel_tol, "Integrator relative tolerance")->check(CLI::PositiveNumber);

    auto* est = app.add_subcommand("estimate", "Noiseless, state or joint state/friction estimation");
    est->add_option("scenario", scenario, "Scenario JSON file")->required();
    est->add_option("-o,--out", out, "Output directory")->required();
    est->add_option("-m,--mode", mode, "noiseless | state | joint")->required()->check(CLI::IsMember({"noiseless", "state", "joint"}));
    est->add_option("--level", level, "Noise level in percent (overrides the scenario)");
    est->add_option("--seed", seed, "Noise seed (overrides the scenario)");

    auto* sw = app.add_subcommand("sweep", "Noise-level x seed grid of estimations");
    sw->add_option("scenario", scenario, "Scenario JSON file")->required();
    sw->add_option("-o,--out", out, "Output directory")->required();
    sw->add_option("-m,--mode", mode, "state | joint")->check(CLI::IsMember({"state", "joint"}));
    sw->add_option("--levels", levels, "Noise levels in percent, comma separated")->required()->delimiter(',');
    sw->add_option("--seeds", seeds, "Seeds, comma separated")->required()->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return emit_error(kInput, "usage", e.what());
    }

    try {
        if (*sim) return cmd_simulate(scenario, out, samples, rel_tol);
        if (*est) return cmd_estimate(scenario, mode, out, level, seed);
        if (*sw) return cmd_sweep(scenario, mode, out, levels, seeds);
    } catch (const SchemaError& e) {
        return emit_error(kInput, to_string(e.kind()), e.what(), e.field());
    } catch (const Error& e) {
        return emit_error(exit_code(e.kind()), to_string(e.kind()), e.what());
    } catch (const std::exception& e) {
        return emit_error(kInternal, "internal", e.what());
    }
    return kInternal;
}
