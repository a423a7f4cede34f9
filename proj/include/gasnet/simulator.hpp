#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "gasnet/dynamics.hpp"
#include "gasnet/error.hpp"
#include "gasnet/scenario.hpp"

namespace gasnet {

/// Time-indexed nondimensional states. Column j belongs to times[j].
struct Trajectory {
    std::vector<double> times;
    Eigen::MatrixXd rho; // M x N, non-slack refined nodes
    Eigen::MatrixXd Phi; // |E| x N
    Eigen::MatrixXd s;   // b x N
    Eigen::MatrixXd d;   // M x N, refined withdrawals (zero on auxiliary nodes)

    std::size_t size() const { return times.size(); }

    /// Full nodal densities (slack first) at column j.
    Vector rhoN(std::size_t j) const { return stack_density(s.col(static_cast<Eigen::Index>(j)), rho.col(static_cast<Eigen::Index>(j))); }

    /// Linear interpolation onto `query` times (each must lie within [times.front(), times.back()]).
    Trajectory sample(const std::vector<double>& query) const {
        detail::require(!times.empty(), "cannot sample an empty trajectory");
        Trajectory out;
        out.times = query;
        const auto n = static_cast<Eigen::Index>(query.size());
        out.rho.resize(rho.rows(), n);
        out.Phi.resize(Phi.rows(), n);
        out.s.resize(s.rows(), n);
        out.d.resize(d.rows(), n);
        const double tol = 1e-9 * std::max(1.0, std::abs(times.back()));
        for (Eigen::Index q = 0; q < n; ++q) {
            const double t = query[static_cast<std::size_t>(q)];
            detail::require(t >= times.front() - tol && t <= times.back() + tol, "sample time outside trajectory");
            auto it = std::lower_bound(times.begin(), times.end(), t - tol);
            std::size_t hi = static_cast<std::size_t>(std::distance(times.begin(), it));
            if (hi >= times.size()) hi = times.size() - 1;
            if (std::abs(times[hi] - t) <= tol || hi == 0) {
                copy_col(out, q, hi, hi, 0.0);
                continue;
            }
            const std::size_t lo = hi - 1;
            const double w = (t - times[lo]) / (times[hi] - times[lo]);
            copy_col(out, q, lo, hi, w);
        }
        return out;
    }

private:
    void copy_col(Trajectory& out, Eigen::Index q, std::size_t lo, std::size_t hi, double w) const {
        const auto l = static_cast<Eigen::Index>(lo), h = static_cast<Eigen::Index>(hi);
        out.rho.col(q) = (1.0 - w) * rho.col(l) + w * rho.col(h);
        out.Phi.col(q) = (1.0 - w) * Phi.col(l) + w * Phi.col(h);
        out.s.col(q) = (1.0 - w) * s.col(l) + w * s.col(h);
        out.d.col(q) = (1.0 - w) * d.col(l) + w * d.col(h);
    }
};

struct SimulationOptions {
    double rel_tol = 1e-4;
    double initial_step_fraction = 1e-3; // of the horizon
    double fixed_step = 0.0;             // > 0 disables adaptivity
    double min_step_fraction = 1e-10;
    int newton_max_iter = 30;
    std::size_t max_steps = 2000000;
};

namespace detail {

/// Implicit-Euler step (or steady state when inv_h == 0) of the network DAE in
/// unknowns z = (rho, Phi), solved by damped Newton with the analytic sparse Jacobian.
class StepSolver {
public:
    StepSolver(const RefinedNetwork& rn, const Scenario& sc) : rn_(rn), sc_(sc) {
        absAd_ = rn.incidence().Ad.cwiseAbs();
        M_ = static_cast<Eigen::Index>(rn.num_nonslack());
        E_ = static_cast<Eigen::Index>(rn.num_edges());
    }

    Vector residual(const Vector& z, const Vector& rho_prev, double t, double inv_h) const {
        const Vector rho = z.head(M_), Phi = z.tail(E_);
        NodalState x{rho, sc_.slack(t), Phi};
        const Vector rho_dot = inv_h * (rho - rho_prev);
        const Vector s_dot = inv_h == 0.0 ? Vector::Zero(x.s.size()) : sc_.slack_rate(t);
        const Vector d = expand_withdrawals(rn_, sc_.withdrawal(t));
        const DaeResidual r = dae_residual(rn_, t, x, rho_dot, s_dot, d);
        Vector out(M_ + E_);
        out << r.mass, r.momentum;
        return out;
    }

    SparseMatrix jacobian(const Vector& z, double t, double inv_h) const {
        const std::size_t b = rn_.num_slack();
        const Vector s = sc_.slack(t);
        std::vector<Triplet> trip;
        trip.reserve(static_cast<std::size_t>(6 * E_ + 4 * M_));
        if (inv_h != 0.0) {
            const SparseMatrix Mm = mass_matrix(rn_, t);
            for (int c = 0; c < Mm.outerSize(); ++c)
                for (SparseMatrix::InnerIterator it(Mm, c); it; ++it) trip.emplace_back(it.row(), it.col(), inv_h * it.value());
        }
        double phi_floor = 1e-8;
        for (Eigen::Index k = 0; k < E_; ++k) phi_floor = std::max(phi_floor, 1e-6 * std::abs(z[M_ + k]));
        for (std::size_t k = 0; k < rn_.num_edges(); ++k) {
            const auto& e = rn_.edges()[k];
            const auto kk = static_cast<Eigen::Index>(k);
            const double phi = z[M_ + kk];
            const double g = -4.0 * e.area;
            if (static_cast<std::size_t>(e.to) >= b) trip.emplace_back(e.to - static_cast<int>(b), M_ + kk, g);
            if (static_cast<std::size_t>(e.from) >= b) trip.emplace_back(e.from - static_cast<int>(b), M_ + kk, -g);
            const double lk = rn_.Lambda()[kk] * rn_.K()[kk];
            trip.emplace_back(M_ + kk, M_ + kk, 2.0 * lk * std::max(std::abs(phi), phi_floor));
            const double a_in = rn_.ratio_from(k, t), a_out = rn_.ratio_to(k, t);
            if (static_cast<std::size_t>(e.to) >= b) {
                const double r = z[e.to - static_cast<int>(b)];
                trip.emplace_back(M_ + kk, e.to - static_cast<int>(b), 2.0 * a_out * a_out * r);
            }
            if (static_cast<std::size_t>(e.from) >= b) {
                const double r = z[e.from - static_cast<int>(b)];
                trip.emplace_back(M_ + kk, e.from - static_cast<int>(b), -2.0 * a_in * a_in * r);
            }
        }
        (void)s;
        SparseMatrix J(M_ + E_, M_ + E_);
        J.setFromTriplets(trip.begin(), trip.end());
        J.makeCompressed();
        return J;
    }

    /// Returns false when Newton fails to converge.
    bool solve(Vector& z, const Vector& rho_prev, double t, double inv_h, int max_iter, double tol = 1e-12) const {
        Vector F = residual(z, rho_prev, t, inv_h);
        double fnorm = F.lpNorm<Eigen::Infinity>();
        Eigen::SparseLU<SparseMatrix> lu;
        bool analyzed = false;
        for (int it = 0; it < max_iter; ++it) {
            if (!F.allFinite()) return false;
            if (fnorm <= tol) return true;
            const SparseMatrix J = jacobian(z, t, inv_h);
            if (!analyzed) {
                lu.analyzePattern(J);
                analyzed = true;
            }
            lu.factorize(J);
            if (lu.info() != Eigen::Success) return false;
            const Vector dz = lu.solve(-F);
            if (!dz.allFinite()) return false;
            // keep densities positive
            double step = 1.0;
            for (Eigen::Index i = 0; i < M_; ++i)
                if (dz[i] < 0.0) step = std::min(step, 0.9 * z[i] / -dz[i]);
            bool improved = false;
            for (int ls = 0; ls < 30; ++ls) {
                const Vector zt = z + step * dz;
                const Vector Ft = residual(zt, rho_prev, t, inv_h);
                const double ft = Ft.lpNorm<Eigen::Infinity>();
                if (Ft.allFinite() && (ft < (1.0 - 1e-4 * step) * fnorm || ft <= tol)) {
                    z = zt;
                    F = Ft;
                    fnorm = ft;
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!improved) {
                // accept a full Newton step once residuals are at round-off level
                if (fnorm <= 1e3 * tol) return true;
                return false;
            }
        }
        return fnorm <= tol;
    }

    Eigen::Index M() const { return M_; }
    Eigen::Index E() const { return E_; }

private:
    const RefinedNetwork& rn_;
    const Scenario& sc_;
    SparseMatrix absAd_;
    Eigen::Index M_ = 0, E_ = 0;
};

/// Initial guess for the steady problem: minimum-norm mass flows balancing the
/// withdrawals, then densities propagated outward from the slack nodes.
inline Vector steady_guess(const RefinedNetwork& rn, const Scenario& sc, double t) {
    const auto M = static_cast<Eigen::Index>(rn.num_nonslack());
    const auto E = static_cast<Eigen::Index>(rn.num_edges());
    const std::size_t b = rn.num_slack();
    const Vector d = expand_withdrawals(rn, sc.withdrawal(t));
    const SparseMatrix& Ad = rn.incidence().Ad;
    SparseMatrix L = Ad * SparseMatrix(Ad.transpose());
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(L);
    if (ldlt.info() != Eigen::Success) fail(ErrorKind::Topology, "reduced Laplacian is singular (disconnected network?)");
    const Vector q = Ad.transpose() * Vector(ldlt.solve(d));
    const Vector Phi = q.cwiseQuotient(rn.X());

    Vector rhoN = Vector::Constant(static_cast<Eigen::Index>(rn.num_nodes()), -1.0);
    const Vector s = sc.slack(t);
    std::queue<std::size_t> frontier;
    for (std::size_t i = 0; i < b; ++i) {
        rhoN[static_cast<Eigen::Index>(i)] = s[static_cast<Eigen::Index>(i)];
        frontier.push(i);
    }
    std::vector<std::vector<std::size_t>> adj(rn.num_nodes());
    for (std::size_t k = 0; k < rn.num_edges(); ++k) {
        adj[static_cast<std::size_t>(rn.edges()[k].from)].push_back(k);
        adj[static_cast<std::size_t>(rn.edges()[k].to)].push_back(k);
    }
    while (!frontier.empty()) {
        const std::size_t u = frontier.front();
        frontier.pop();
        for (std::size_t k : adj[u]) {
            const auto& e = rn.edges()[k];
            const auto kk = static_cast<Eigen::Index>(k);
            const double drop = rn.Lambda()[kk] * rn.K()[kk] * Phi[kk] * std::abs(Phi[kk]);
            const double a_in = rn.ratio_from(k, t), a_out = rn.ratio_to(k, t);
            std::size_t v;
            double val;
            if (static_cast<std::size_t>(e.from) == u) {
                v = static_cast<std::size_t>(e.to);
                const double lo = a_in * rhoN[static_cast<Eigen::Index>(u)];
                val = std::sqrt(std::max(lo * lo - drop, 1e-4 * lo * lo)) / a_out;
            } else {
                v = static_cast<std::size_t>(e.from);
                const double hi = a_out * rhoN[static_cast<Eigen::Index>(u)];
                val = std::sqrt(std::max(hi * hi + drop, 1e-4 * hi * hi)) / a_in;
            }
            if (rhoN[static_cast<Eigen::Index>(v)] < 0.0) {
                rhoN[static_cast<Eigen::Index>(v)] = val;
                frontier.push(v);
            }
        }
    }
    Vector z(M + E);
    z << rhoN.tail(M), Phi;
    return z;
}

} // namespace detail

/// Steady solution for the scenario's inputs frozen at time t (time derivatives zero).
inline NodalState steady_state(const RefinedNetwork& rn, const Scenario& sc, double t = 0.0) {
    detail::StepSolver solver(rn, sc);
    Vector z = detail::steady_guess(rn, sc, t);
    const Vector dummy = z.head(solver.M());
    if (!solver.solve(z, dummy, t, 0.0, 50, 1e-12))
        detail::fail(ErrorKind::InfeasibleSteadyState, "steady-state Newton iteration did not converge");
    if ((z.head(solver.M()).array() <= 0.0).any())
        detail::fail(ErrorKind::InfeasibleSteadyState, "steady state has non-positive densities");
    return {z.head(solver.M()), sc.slack(t), z.tail(solver.E())};
}

namespace detail {

inline void append_column(Trajectory& tr, std::size_t col, double t, const Vector& rho, const Vector& Phi,
                          const Vector& s, const Vector& d) {
    const auto c = static_cast<Eigen::Index>(col);
    if (c >= tr.rho.cols()) {
        const Eigen::Index grow = std::max<Eigen::Index>(64, tr.rho.cols());
        tr.rho.conservativeResize(Eigen::NoChange, tr.rho.cols() + grow);
        tr.Phi.conservativeResize(Eigen::NoChange, tr.Phi.cols() + grow);
        tr.s.conservativeResize(Eigen::NoChange, tr.s.cols() + grow);
        tr.d.conservativeResize(Eigen::NoChange, tr.d.cols() + grow);
    }
    tr.times.push_back(t);
    tr.rho.col(c) = rho;
    tr.Phi.col(c) = Phi;
    tr.s.col(c) = s;
    tr.d.col(c) = d;
}

} // namespace detail

/// Implicit-Euler integration of the network DAE over [t0, t0 + duration], with
/// step-doubling error control on the nodal densities. Every time in
/// `output_times` (relative to nothing; absolute) inside the interval is hit exactly.
inline Trajectory simulate(const RefinedNetwork& rn, const Scenario& sc, const Vector& rho_init, double t0,
                           double duration, const SimulationOptions& opt = {},
                           const std::vector<double>& output_times = {}) {
    detail::require(opt.rel_tol > 0.0, "simulate: rel_tol must be positive");
    detail::require(duration > 0.0, "simulate: duration must be positive");
    detail::require(static_cast<std::size_t>(rho_init.size()) == rn.num_nonslack(), "simulate: initial state size mismatch");
    detail::require((rho_init.array() > 0.0).all(), "simulate: initial densities must be positive");

    detail::StepSolver solver(rn, sc);
    const Eigen::Index M = solver.M(), E = solver.E();
    const double t_end = t0 + duration;
    const double horizon = sc.horizon();
    const double h_min = opt.min_step_fraction * horizon;

    std::vector<double> stops;
    for (double t : output_times)
        if (t > t0 + 1e-12 * horizon && t < t_end - 1e-12 * horizon) stops.push_back(t);
    std::sort(stops.begin(), stops.end());
    stops.push_back(t_end);

    Trajectory tr;
    tr.rho.resize(M, 0);
    tr.Phi.resize(E, 0);
    tr.s.resize(static_cast<Eigen::Index>(rn.num_slack()), 0);
    tr.d.resize(M, 0);

    Vector rho = rho_init;
    const Vector Phi0 = phi_from_rho(rn, t0, stack_density(sc.slack(t0), rho));
    std::size_t col = 0;
    detail::append_column(tr, col++, t0, rho, Phi0, sc.slack(t0), expand_withdrawals(rn, sc.withdrawal(t0)));
    Vector z(M + E);
    z << rho, Phi0;

    double t = t0;
    double h = opt.fixed_step > 0.0 ? opt.fixed_step : opt.initial_step_fraction * horizon;
    std::size_t next_stop = 0;
    std::size_t steps = 0;

    auto advance = [&](const Vector& z_from, double t_from, double step, Vector& z_out) {
        z_out = z_from;
        return solver.solve(z_out, z_from.head(M), t_from + step, 1.0 / step, opt.newton_max_iter);
    };

    while (t < t_end - 1e-12 * horizon) {
        if (++steps > opt.max_steps) detail::fail(ErrorKind::IntegrationFailure, "simulate: step budget exhausted");
        while (next_stop < stops.size() && stops[next_stop] <= t + 1e-12 * horizon) ++next_stop;
        const double target = stops[next_stop];
        double step = std::min(h, target - t);
        // avoid a sliver step right before a stop
        if (target - (t + step) < 1e-3 * step) step = target - t;

        Vector z_full, z_half, z_two;
        if (opt.fixed_step > 0.0) {
            if (!advance(z, t, step, z_full)) detail::fail(ErrorKind::IntegrationFailure, "simulate: Newton failure at fixed step");
            z = z_full;
            t = (std::abs(t + step - target) <= 1e-12 * horizon) ? target : t + step;
        } else {
            const bool ok = advance(z, t, step, z_full) && advance(z, t, 0.5 * step, z_half) &&
                            advance(z_half, t + 0.5 * step, 0.5 * step, z_two);
            if (!ok) {
                h = 0.25 * step;
                if (h < h_min) detail::fail(ErrorKind::IntegrationFailure, "simulate: step size underflow after Newton failures");
                continue;
            }
            double err = 0.0;
            for (Eigen::Index i = 0; i < M; ++i)
                err = std::max(err, std::abs(z_two[i] - z_full[i]) / std::max(std::abs(z_two[i]), 1e-12));
            const double factor = std::clamp(0.9 * std::sqrt(opt.rel_tol / std::max(err, 1e-300)), 0.2, 5.0);
            if (err > opt.rel_tol) {
                h = step * factor;
                if (h < h_min) detail::fail(ErrorKind::IntegrationFailure, "simulate: step size underflow");
                continue;
            }
            z = z_two;
            t = (std::abs(t + step - target) <= 1e-12 * horizon) ? target : t + step;
            // keep the step chosen by the controller, not the one clipped to a stop
            if (step >= 0.999 * h) h = step * factor;
            else h = std::max(h, step * factor);
        }
        detail::append_column(tr, col++, t, z.head(M), z.tail(E), sc.slack(t), expand_withdrawals(rn, sc.withdrawal(t)));
    }
    tr.rho.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(col));
    tr.Phi.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(col));
    tr.s.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(col));
    tr.d.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(col));
    return tr;
}

struct PeriodicOrbit {
    Trajectory trajectory; // one period, t in [0, T]
    int periods = 0;
    double seam_mismatch = 0.0;
};

/// Uniform circular grid times k T / N, k = 0..N-1.
inline std::vector<double> grid_times(double horizon, int n) {
    std::vector<double> t(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) t[static_cast<std::size_t>(k)] = horizon * k / n;
    return t;
}

/// Picard iteration over whole periods until rho(0) and rho(T) agree to `tol`.
/// Starts from `rho_init`, or the steady state of the period-averaged scenario.
inline PeriodicOrbit periodic_orbit(const RefinedNetwork& rn, const Scenario& sc, double tol = 1e-6,
                                    const SimulationOptions& opt = {}, std::optional<Vector> rho_init = std::nullopt,
                                    int max_periods = 50) {
    const double T = sc.horizon();
    Vector rho0;
    if (rho_init) {
        rho0 = *rho_init;
    } else {
        const Scenario avg = sc.time_averaged();
        const RefinedNetwork rn_avg = avg.refined();
        rho0 = steady_state(rn_avg, avg, 0.0).rho;
    }
    std::vector<double> outputs = grid_times(T, sc.grid_points);
    PeriodicOrbit orbit;
    for (int p = 1; p <= max_periods; ++p) {
        Trajectory tr = simulate(rn, sc, rho0, 0.0, T, opt, outputs);
        const Vector end = tr.rho.col(tr.rho.cols() - 1);
        orbit.seam_mismatch = (end - rho0).lpNorm<Eigen::Infinity>();
        orbit.periods = p;
        orbit.trajectory = std::move(tr);
        if (orbit.seam_mismatch <= tol) return orbit;
        rho0 = end;
    }
    detail::fail(ErrorKind::NoPeriodicOrbit,
                 "no periodic orbit after " + std::to_string(max_periods) + " periods; seam mismatch " +
                     std::to_string(orbit.seam_mismatch));
}

} // namespace gasnet
