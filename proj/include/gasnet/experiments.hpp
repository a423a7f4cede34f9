#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "gasnet/fixtures.hpp"
#include "gasnet/nlp_solver.hpp"
#include "gasnet/simulator.hpp"
#include "gasnet/transcription.hpp"

namespace gasnet {

/// Additive Gaussian noise with standard deviation `level` percent of the true value.
struct NoiseSpec {
    double level = 0.0; // percent
    std::uint64_t seed = 0;
    bool withdrawals = true;
    bool pressures = true;
};

/// Noisy samples of the physical non-slack withdrawals and densities of `truth`
/// (which must be on the estimation grid). Weights are relative (see set_relative_weights).
inline MeasurementSet synthesize(const Trajectory& truth, const RefinedNetwork& rn, const NoiseSpec& spec,
                                 double w_d = 1.0, double w_rho = 1.0) {
    detail::require(spec.level >= 0.0 && std::isfinite(spec.level), "noise level must be non-negative");
    const auto P = static_cast<Eigen::Index>(rn.num_physical());
    const auto N = static_cast<Eigen::Index>(truth.size());
    MeasurementSet m;
    m.d_tilde = truth.d.topRows(P);
    m.rho_tilde = truth.rho.topRows(P);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> xi(0.0, 1.0);
    const double s = spec.level / 100.0;
    for (Eigen::Index k = 0; k < N; ++k)
        for (Eigen::Index j = 0; j < P; ++j) {
            const double a = xi(rng), b = xi(rng);
            if (spec.withdrawals) m.d_tilde(j, k) *= 1.0 + s * a;
            if (spec.pressures) m.rho_tilde(j, k) *= 1.0 + s * b;
        }
    set_relative_weights(m, w_d, w_rho);
    return m;
}

/// Relative errors in percent. Flux metrics are NaN when every sample falls below the flow floor.
struct ErrorReport {
    double e_d_max = 0.0, e_p_max = 0.0, e_phi_max = 0.0;
    double e_d_avg = 0.0, e_p_avg = 0.0, e_phi_avg = 0.0;
    std::size_t phi_samples = 0;
    std::size_t phi_excluded = 0;

    bool phi_applicable() const { return phi_samples > 0; }
};

namespace detail {

struct Accum {
    double max = 0.0, sum = 0.0;
    std::size_t n = 0;
    void add(double e) {
        max = std::max(max, e);
        sum += e;
        ++n;
    }
    double avg() const { return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN(); }
};

} // namespace detail

/// Withdrawal errors over physical non-slack junctions, pressure errors over all
/// non-slack refined nodes, flux errors over all refined edges whose true mass
/// flow magnitude reaches `flow_floor` (kg/s).
inline ErrorReport error_report(const Trajectory& est, const Trajectory& truth, const RefinedNetwork& rn,
                                const GasConstants& c, double flow_floor = 1.0) {
    detail::require(est.size() == truth.size() && est.rho.rows() == truth.rho.rows() && est.Phi.rows() == truth.Phi.rows(),
                    "error_report: estimate and truth are not aligned");
    const auto P = static_cast<Eigen::Index>(rn.num_physical());
    const auto N = static_cast<Eigen::Index>(truth.size());
    detail::Accum ed, ep, ephi;
    std::size_t excluded = 0;
    const double d_tiny = 1e-12 * std::max(1.0, truth.d.topRows(P).cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < N; ++k) {
        for (Eigen::Index j = 0; j < P; ++j)
            if (std::abs(truth.d(j, k)) > d_tiny) ed.add(100.0 * std::abs(est.d(j, k) - truth.d(j, k)) / std::abs(truth.d(j, k)));
        for (Eigen::Index i = 0; i < truth.rho.rows(); ++i)
            ep.add(100.0 * std::abs(est.rho(i, k) - truth.rho(i, k)) / std::abs(truth.rho(i, k)));
        for (Eigen::Index e = 0; e < truth.Phi.rows(); ++e) {
            const double flow = std::abs(c.dim_flow(truth.Phi(e, k) * rn.X()[e]));
            if (flow < flow_floor) {
                ++excluded;
                continue;
            }
            ephi.add(100.0 * std::abs(est.Phi(e, k) - truth.Phi(e, k)) / std::abs(truth.Phi(e, k)));
        }
    }
    ErrorReport r;
    r.e_d_max = ed.n ? ed.max : std::numeric_limits<double>::quiet_NaN();
    r.e_d_avg = ed.avg();
    r.e_p_max = ep.max;
    r.e_p_avg = ep.avg();
    r.phi_samples = ephi.n;
    r.phi_excluded = excluded;
    r.e_phi_max = ephi.n ? ephi.max : std::numeric_limits<double>::quiet_NaN();
    r.e_phi_avg = ephi.avg();
    return r;
}

/// Solution of the noiseless problem on the grid: the grid-consistent periodic
/// trajectory used as ground truth for synthetic measurements.
inline Trajectory grid_truth(const RefinedNetwork& rn, const Scenario& sc, const SolveOptions& opt = {}) {
    const TimeGrid grid = TimeGrid::of(sc);
    const Transcription tx = build_noiseless_ivp(rn, grid, sc);
    SolveResult r = solve(tx.problem, default_start(tx, rn, sc), opt);
    if (r.report.status != SolveStatus::Converged)
        detail::fail(ErrorKind::NumericalFailure, std::string("noiseless problem did not converge: ") + to_string(r.report.status));
    return tx.unpack(r.x, rn, sc).trajectory;
}

struct EstimationOptions {
    Formulation formulation = Formulation::State;
    SolveOptions solver;
    double w_d = 1.0;
    double w_rho = 1.0;
    double friction_lo = 0.5;
    double friction_hi = 2.0;
    double flow_floor = 1.0; // kg/s
};

struct EstimationResult {
    Estimate estimate;
    SolveReport report;
    ErrorReport errors;
    MeasurementSet measurements;
};

/// One estimation run against a given grid truth.
inline EstimationResult run_estimation(const RefinedNetwork& rn, const Scenario& sc, const Trajectory& truth,
                                       const NoiseSpec& noise, const EstimationOptions& opt = {}) {
    const TimeGrid grid = TimeGrid::of(sc);
    EstimationResult out;
    Transcription tx;
    const MeasurementSet* mp = nullptr;
    if (opt.formulation == Formulation::Noiseless) {
        tx = build_noiseless_ivp(rn, grid, sc);
    } else {
        out.measurements = synthesize(truth, rn, noise, opt.w_d, opt.w_rho);
        mp = &out.measurements;
        tx = opt.formulation == Formulation::State
                 ? build_state_estimation(rn, grid, sc, out.measurements)
                 : build_joint_estimation(rn, grid, sc, out.measurements, opt.friction_lo, opt.friction_hi);
    }
    SolveResult r = solve(tx.problem, default_start(tx, rn, sc, mp), opt.solver);
    out.report = r.report;
    out.estimate = tx.unpack(r.x, rn, sc);
    out.errors = error_report(out.estimate.trajectory, truth, rn, sc.constants, opt.flow_floor);
    return out;
}

/// Worker count from GASNET_THREADS, else the hardware concurrency.
inline unsigned worker_threads() {
    if (const char* env = std::getenv("GASNET_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs f(i) for i in [0, n) on up to worker_threads() threads; results land in slot i.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F f) {
    std::vector<T> out(n);
    const std::size_t workers = std::min<std::size_t>(worker_threads(), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) out[i] = f(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

struct BiasReport {
    std::vector<double> weight;          // L / L_max per parent pipe
    std::vector<double> mean_friction;   // over successful runs
    std::vector<double> relative_bias;   // unweighted (mean - true) / true
    std::vector<double> weighted_bias;   // relative_bias * weight
    std::size_t runs_ok = 0;
    std::size_t runs_failed = 0;
};

/// Length-weighted relative bias of mean friction estimates.
inline BiasReport bias_report(const Network& net, const std::vector<double>& mean_friction, std::size_t runs_ok,
                              std::size_t runs_failed) {
    const auto& pipes = net.pipes();
    detail::require(mean_friction.size() == pipes.size(), "bias_report: one mean per pipe is required");
    const double Lmax = net.max_pipe_length();
    BiasReport rep;
    rep.runs_ok = runs_ok;
    rep.runs_failed = runs_failed;
    rep.mean_friction = mean_friction;
    for (std::size_t p = 0; p < pipes.size(); ++p) {
        rep.weight.push_back(pipes[p].length / Lmax);
        rep.relative_bias.push_back((mean_friction[p] - pipes[p].friction) / pipes[p].friction);
        rep.weighted_bias.push_back(rep.relative_bias.back() * rep.weight.back());
    }
    return rep;
}

/// Weighted relative friction bias over repeated joint estimations that differ only by noise seed.
inline BiasReport bias_study(const Scenario& sc, const Trajectory& truth, double level,
                             const std::vector<std::uint64_t>& seeds, const EstimationOptions& base = {}) {
    detail::require(seeds.size() >= 2, "bias study needs at least two runs");
    const RefinedNetwork rn = sc.refined();
    EstimationOptions opt = base;
    opt.formulation = Formulation::Joint;
    struct Run {
        bool ok = false;
        Vector friction;
    };
    const auto runs = parallel_map<Run>(seeds.size(), [&](std::size_t i) {
        Run r;
        try {
            const EstimationResult e = run_estimation(rn, sc, truth, {level, seeds[i]}, opt);
            r.ok = e.report.status == SolveStatus::Converged;
            r.friction = e.estimate.friction;
        } catch (const Error&) {
            r.ok = false;
        }
        return r;
    });
    std::vector<double> sum(sc.network.pipes().size(), 0.0);
    std::size_t ok = 0, failed = 0;
    for (const auto& r : runs) {
        if (!r.ok) {
            ++failed;
            continue;
        }
        ++ok;
        for (std::size_t p = 0; p < sum.size(); ++p) sum[p] += r.friction[static_cast<Eigen::Index>(p)];
    }
    for (auto& v : sum) v = ok ? v / static_cast<double>(ok) : std::numeric_limits<double>::quiet_NaN();
    return bias_report(sc.network, sum, ok, failed);
}

/// Mean metrics of one noise level over several seeds.
struct SweepCell {
    double level = 0.0;
    ErrorReport mean;
    std::size_t runs_ok = 0;
    std::size_t runs_failed = 0;
    std::vector<double> mean_friction; // joint mode only
};

inline std::vector<SweepCell> sweep(const Scenario& sc, const Trajectory& truth, const std::vector<double>& levels,
                                    const std::vector<std::uint64_t>& seeds, const EstimationOptions& opt = {}) {
    detail::require(!levels.empty() && !seeds.empty(), "sweep needs at least one level and one seed");
    const RefinedNetwork rn = sc.refined();
    struct Job {
        std::size_t cell;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (std::size_t l = 0; l < levels.size(); ++l)
        for (auto s : seeds) jobs.push_back({l, s});
    struct Out {
        bool ok = false;
        ErrorReport e;
        Vector friction;
    };
    const auto outs = parallel_map<Out>(jobs.size(), [&](std::size_t i) {
        Out o;
        try {
            const EstimationResult r = run_estimation(rn, sc, truth, {levels[jobs[i].cell], jobs[i].seed}, opt);
            o.ok = r.report.status == SolveStatus::Converged;
            o.e = r.errors;
            o.friction = r.estimate.friction;
        } catch (const Error&) {
            o.ok = false;
        }
        return o;
    });
    std::vector<SweepCell> cells(levels.size());
    for (std::size_t l = 0; l < levels.size(); ++l) {
        cells[l].level = levels[l];
        cells[l].mean_friction.assign(sc.network.pipes().size(), 0.0);
    }
    std::vector<std::size_t> phi_n(levels.size(), 0);
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        SweepCell& c = cells[jobs[i].cell];
        if (!outs[i].ok) {
            ++c.runs_failed;
            continue;
        }
        ++c.runs_ok;
        const ErrorReport& e = outs[i].e;
        c.mean.e_d_max += e.e_d_max;
        c.mean.e_d_avg += e.e_d_avg;
        c.mean.e_p_max += e.e_p_max;
        c.mean.e_p_avg += e.e_p_avg;
        if (e.phi_applicable()) {
            c.mean.e_phi_max += e.e_phi_max;
            c.mean.e_phi_avg += e.e_phi_avg;
            ++phi_n[jobs[i].cell];
        }
        for (std::size_t p = 0; p < c.mean_friction.size(); ++p) c.mean_friction[p] += outs[i].friction[static_cast<Eigen::Index>(p)];
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t l = 0; l < levels.size(); ++l) {
        SweepCell& c = cells[l];
        const double n = static_cast<double>(c.runs_ok);
        if (c.runs_ok == 0) {
            c.mean = {nan, nan, nan, nan, nan, nan, 0, 0};
            for (auto& f : c.mean_friction) f = nan;
            continue;
        }
        c.mean.e_d_max /= n;
        c.mean.e_d_avg /= n;
        c.mean.e_p_max /= n;
        c.mean.e_p_avg /= n;
        const double np = static_cast<double>(phi_n[l]);
        c.mean.e_phi_max = phi_n[l] ? c.mean.e_phi_max / np : nan;
        c.mean.e_phi_avg = phi_n[l] ? c.mean.e_phi_avg / np : nan;
        c.mean.phi_samples = phi_n[l];
        for (auto& f : c.mean_friction) f /= n;
    }
    return cells;
}

} // namespace gasnet
