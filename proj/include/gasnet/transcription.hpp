#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>

#include "gasnet/dynamics.hpp"
#include "gasnet/nlp.hpp"
#include "gasnet/scenario.hpp"
#include "gasnet/simulator.hpp"

namespace gasnet {

/// Circular time grid: N points t_k = k T / N, with index N identified with 0.
struct TimeGrid {
    int N = 24;
    double T = 1.0; // nondimensional horizon

    TimeGrid() = default;
    TimeGrid(int n, double horizon) : N(n), T(horizon) {
        detail::require(n >= 8, "time grid needs at least 8 points");
        detail::require(std::isfinite(horizon) && horizon > 0.0, "time grid horizon must be positive");
    }
    static TimeGrid of(const Scenario& sc) { return TimeGrid(sc.grid_points, sc.horizon()); }

    double dt() const { return T / N; }
    double time(int k) const { return dt() * wrap(k); }
    int wrap(int k) const { return ((k % N) + N) % N; }
    std::vector<double> times() const { return grid_times(T, N); }
};

/// Noisy grid samples at the physical non-slack junctions (rows in network
/// order, columns = grid points). Values are nondimensional.
struct MeasurementSet {
    Eigen::MatrixXd d_tilde;
    Eigen::MatrixXd rho_tilde;
    Vector W1; // per-junction weight on withdrawal residuals
    Vector W2; // per-junction weight on density residuals
};

/// Weights that make each residual relative to the mean magnitude of its
/// measurement series, times the user multipliers.
inline void set_relative_weights(MeasurementSet& m, double w_d = 1.0, double w_rho = 1.0) {
    detail::require(w_d >= 0.0 && w_rho >= 0.0, "weights must be non-negative");
    const auto P = m.d_tilde.rows();
    m.W1.resize(P);
    m.W2.resize(P);
    const double total = m.d_tilde.cwiseAbs().rowwise().mean().sum();
    for (Eigen::Index j = 0; j < P; ++j) {
        double dm = m.d_tilde.row(j).cwiseAbs().mean();
        if (!(dm > 1e-3 * total) || !std::isfinite(dm)) dm = std::max(1e-3 * total, 1e-12);
        const double rm = std::max(m.rho_tilde.row(j).cwiseAbs().mean(), 1e-12);
        m.W1[j] = w_d / (dm * dm);
        m.W2[j] = w_rho / (rm * rm);
    }
}

enum class Formulation { Noiseless, State, Joint };

/// Estimated (or transcribed) quantities on the grid.
struct Estimate {
    Trajectory trajectory;
    Vector friction; // per parent pipe
};

/// A transcribed problem plus the layout needed to move between trajectories and NLP vectors.
///
/// Per grid point k the variables are rho_k (M), Phi_k (|E|) and, unless
/// noiseless, d_k (physical non-slack junctions); the joint formulation appends
/// one friction multiplier per parent pipe. Densities are unscaled, fluxes are
/// scaled by a per-edge reference, withdrawals by a per-junction reference and
/// friction by its nominal value.
class Transcription {
public:
    NlpProblem problem;
    Formulation formulation = Formulation::State;
    TimeGrid grid;

    int M = 0, E = 0, P = 0, pipes = 0;
    Vector flux_scale;     // per edge
    Vector withdrawal_scale; // per physical junction
    Vector friction_nominal; // per parent pipe
    Eigen::MatrixXd d_known; // physical x N, noiseless only

    int block() const { return M + E + (formulation == Formulation::Noiseless ? 0 : P); }
    int rho(int k, int i) const { return grid.wrap(k) * block() + i; }
    int phi(int k, int e) const { return grid.wrap(k) * block() + M + e; }
    int d(int k, int j) const {
        detail::require(formulation != Formulation::Noiseless, "noiseless problem has no withdrawal variables");
        return grid.wrap(k) * block() + M + E + j;
    }
    int lambda(int p) const {
        detail::require(formulation == Formulation::Joint, "only the joint problem has friction variables");
        return grid.N * block() + p;
    }
    int mass_row(int k, int i) const { return grid.wrap(k) * (M + E) + i; }
    int momentum_row(int k, int e) const { return grid.wrap(k) * (M + E) + M + e; }

    Vector pack(const Trajectory& tr, const std::optional<Vector>& friction = std::nullopt) const {
        detail::require(static_cast<int>(tr.size()) == grid.N, "pack: trajectory is not on the grid");
        Vector x = Vector::Zero(problem.num_variables());
        for (int k = 0; k < grid.N; ++k) {
            for (int i = 0; i < M; ++i) x[rho(k, i)] = tr.rho(i, k);
            for (int e = 0; e < E; ++e) x[phi(k, e)] = tr.Phi(e, k) / flux_scale[e];
            if (formulation != Formulation::Noiseless)
                for (int j = 0; j < P; ++j) x[d(k, j)] = tr.d(j, k) / withdrawal_scale[j];
        }
        if (formulation == Formulation::Joint) {
            const Vector f = friction ? *friction : friction_nominal;
            for (int p = 0; p < pipes; ++p) x[lambda(p)] = f[p] / friction_nominal[p];
        }
        return x;
    }

    Estimate unpack(const Vector& x, const RefinedNetwork& rn, const Scenario& sc) const {
        detail::require(x.size() == problem.num_variables(), "unpack: vector size mismatch");
        Estimate est;
        auto& tr = est.trajectory;
        tr.times = grid.times();
        tr.rho.resize(M, grid.N);
        tr.Phi.resize(E, grid.N);
        tr.s.resize(static_cast<Eigen::Index>(rn.num_slack()), grid.N);
        tr.d = Eigen::MatrixXd::Zero(M, grid.N);
        for (int k = 0; k < grid.N; ++k) {
            for (int i = 0; i < M; ++i) tr.rho(i, k) = x[rho(k, i)];
            for (int e = 0; e < E; ++e) tr.Phi(e, k) = x[phi(k, e)] * flux_scale[e];
            for (int j = 0; j < P; ++j)
                tr.d(j, k) = formulation == Formulation::Noiseless ? d_known(j, k) : x[d(k, j)] * withdrawal_scale[j];
            tr.s.col(k) = sc.slack(grid.time(k));
        }
        est.friction = friction_nominal;
        if (formulation == Formulation::Joint)
            for (int p = 0; p < pipes; ++p) est.friction[p] = x[lambda(p)] * friction_nominal[p];
        return est;
    }
};

namespace detail {

/// Reference flow per refined edge from the minimum-norm flows carrying the
/// mean withdrawals, floored at 5% of the total.
inline Vector edge_flow_reference(const RefinedNetwork& rn, const Vector& mean_d_phys) {
    const Vector d = expand_withdrawals(rn, mean_d_phys);
    const double total = mean_d_phys.cwiseAbs().sum();
    const SparseMatrix& Ad = rn.incidence().Ad;
    SparseMatrix L = Ad * SparseMatrix(Ad.transpose());
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(L);
    if (ldlt.info() != Eigen::Success) fail(ErrorKind::Topology, "reduced Laplacian is singular");
    const Vector q = Ad.transpose() * Vector(ldlt.solve(d));
    const double floor = total > 0.0 ? 0.05 * total : 1e-3;
    Vector ref(q.size());
    for (Eigen::Index k = 0; k < q.size(); ++k) ref[k] = std::max(std::abs(q[k]), floor);
    return ref;
}

inline Transcription transcribe(const RefinedNetwork& rn, const TimeGrid& grid, const Scenario& sc,
                                Formulation form, const MeasurementSet* meas, double lo, double hi) {
    Transcription tx;
    tx.formulation = form;
    tx.grid = grid;
    tx.M = static_cast<int>(rn.num_nonslack());
    tx.E = static_cast<int>(rn.num_edges());
    tx.P = static_cast<int>(rn.num_physical());
    tx.pipes = static_cast<int>(rn.num_pipes());
    tx.friction_nominal = rn.nominal_friction();
    const int N = grid.N, M = tx.M, E = tx.E, P = tx.P;
    const std::size_t b = rn.num_slack();

    Eigen::MatrixXd dsrc(P, N);
    if (form == Formulation::Noiseless) {
        for (int k = 0; k < N; ++k) dsrc.col(k) = sc.withdrawal(grid.time(k));
        tx.d_known = dsrc;
    } else {
        require(meas != nullptr, "measurements required");
        require(meas->d_tilde.rows() == P && meas->d_tilde.cols() == N, "withdrawal measurements do not match the grid");
        require(meas->rho_tilde.rows() == P && meas->rho_tilde.cols() == N, "density measurements do not match the grid");
        require(meas->W1.size() == P && meas->W2.size() == P, "weight vectors do not match the measurements");
        require((meas->W1.array() >= 0.0).all() && (meas->W2.array() >= 0.0).all(), "weights must be non-negative");
        require(meas->d_tilde.allFinite() && meas->rho_tilde.allFinite(), "measurements must be finite");
        dsrc = meas->d_tilde;
    }
    const Vector mean_d = dsrc.rowwise().mean();
    const Vector q_ref = edge_flow_reference(rn, mean_d);
    tx.flux_scale = q_ref.cwiseQuotient(rn.X());
    const double total = std::max(mean_d.cwiseAbs().sum(), 1e-3);
    tx.withdrawal_scale.resize(P);
    for (int j = 0; j < P; ++j) {
        const double m = dsrc.row(j).cwiseAbs().mean();
        tx.withdrawal_scale[j] = m > 1e-3 * total ? m : 1e-3 * total;
    }
    if (form == Formulation::Joint) require(lo > 0.0 && lo < 1.0 && hi > 1.0, "friction bounds need 0 < lo < 1 < hi");

    NlpProblem& nlp = tx.problem;
    const auto& nodes = rn.nodes();
    for (int k = 0; k < N; ++k) {
        for (int i = 0; i < M; ++i) {
            const auto& nd = nodes[b + static_cast<std::size_t>(i)];
            nlp.add_variable({Quantity::Density, i, k, 1.0}, nd.rho_min, nd.rho_max);
        }
        for (int e = 0; e < E; ++e) nlp.add_variable({Quantity::Flux, e, k, tx.flux_scale[e]});
        if (form != Formulation::Noiseless)
            for (int j = 0; j < P; ++j) nlp.add_variable({Quantity::Withdrawal, j, k, tx.withdrawal_scale[j]});
    }
    if (form == Formulation::Joint)
        for (int p = 0; p < tx.pipes; ++p) nlp.add_variable({Quantity::Friction, p, -1, tx.friction_nominal[p]}, lo, hi);

    if (form != Formulation::Noiseless) {
        for (int k = 0; k < N; ++k)
            for (int j = 0; j < P; ++j) {
                const double ds = tx.withdrawal_scale[j];
                nlp.add_atom({tx.d(k, j), meas->d_tilde(j, k) / ds, meas->W1[j] * ds * ds});
                nlp.add_atom({tx.rho(k, j), meas->rho_tilde(j, k), meas->W2[j]});
            }
    }

    // Rows: BDF2 mass balance and momentum at every grid point.
    const double dt = grid.dt();
    const double mass_scale = 1.0 / (4.0 * total);
    const SparseMatrix& Ad = rn.incidence().Ad;
    const SparseMatrix absAd = Ad.cwiseAbs();
    const Vector xl = rn.X().cwiseProduct(rn.Lambda());
    const double c0 = 3.0 / (2.0 * dt), c1 = -4.0 / (2.0 * dt), c2 = 1.0 / (2.0 * dt);
    for (int k = 0; k < N; ++k) {
        const double t = grid.time(k);
        const SparseMatrix Mm = SparseMatrix(mass_matrix(rn, t).transpose()); // column j = row j of M
        const Incidence B = weighted_incidence(rn, t);
        const Vector slack_term = absAd * xl.cwiseProduct(SparseMatrix(B.As.cwiseAbs()).transpose() * sc.slack_rate(t));
        const Vector s = sc.slack(t);
        const SparseMatrix AdT = SparseMatrix(Ad.transpose());
        for (int i = 0; i < M; ++i) {
            double constant = slack_term[i] * mass_scale;
            if (form == Formulation::Noiseless && i < P) constant += dsrc(i, k) / total;
            nlp.begin_row(constant);
            for (SparseMatrix::InnerIterator it(Mm, i); it; ++it) {
                const int l = static_cast<int>(it.row());
                const double m = it.value() * mass_scale;
                nlp.add_term({TermKind::Linear, tx.rho(k, l), -1, m * c0});
                nlp.add_term({TermKind::Linear, tx.rho(k - 1, l), -1, m * c1});
                nlp.add_term({TermKind::Linear, tx.rho(k - 2, l), -1, m * c2});
            }
            for (SparseMatrix::InnerIterator it(AdT, i); it; ++it) {
                const int e = static_cast<int>(it.row());
                nlp.add_term({TermKind::Linear, tx.phi(k, e), -1, -it.value() * q_ref[e] / total});
            }
            if (form != Formulation::Noiseless && i < P)
                nlp.add_term({TermKind::Linear, tx.d(k, i), -1, tx.withdrawal_scale[i] / total});
        }
        for (int e = 0; e < E; ++e) {
            const auto& edge = rn.edges()[static_cast<std::size_t>(e)];
            const double lk = rn.Lambda()[e] * rn.K()[e];
            const double sigma = 1.0 / (lk * tx.flux_scale[e] * tx.flux_scale[e]);
            nlp.begin_row(0.0);
            if (form == Formulation::Joint) nlp.add_term({TermKind::ProdAbsSquare, tx.phi(k, e), tx.lambda(edge.pipe), 1.0});
            else nlp.add_term({TermKind::AbsSquare, tx.phi(k, e), -1, 1.0});
            const double a_out = rn.ratio_to(static_cast<std::size_t>(e), t);
            const double a_in = rn.ratio_from(static_cast<std::size_t>(e), t);
            for (auto [node, w] : {std::pair{edge.to, a_out * a_out}, std::pair{edge.from, -a_in * a_in}}) {
                const auto n = static_cast<std::size_t>(node);
                if (n < b) nlp.add_constant(w * s[static_cast<Eigen::Index>(n)] * s[static_cast<Eigen::Index>(n)] * sigma);
                else nlp.add_term({TermKind::Square, tx.rho(k, static_cast<int>(n - b)), -1, w * sigma});
            }
        }
    }
    return tx;
}

} // namespace detail

/// State estimation: withdrawals and states free, friction known.
inline Transcription build_state_estimation(const RefinedNetwork& rn, const TimeGrid& grid, const Scenario& known,
                                            const MeasurementSet& meas) {
    return detail::transcribe(rn, grid, known, Formulation::State, &meas, 0.5, 2.0);
}

/// Joint state and friction estimation; friction of every parent pipe bounded
/// to [lo, hi] times its nominal value.
inline Transcription build_joint_estimation(const RefinedNetwork& rn, const TimeGrid& grid, const Scenario& known,
                                            const MeasurementSet& meas, double lo = 0.5, double hi = 2.0) {
    return detail::transcribe(rn, grid, known, Formulation::Joint, &meas, lo, hi);
}

/// Feasibility problem with exact withdrawals; its unique solution is the
/// discrete periodic trajectory.
inline Transcription build_noiseless_ivp(const RefinedNetwork& rn, const TimeGrid& grid, const Scenario& known) {
    return detail::transcribe(rn, grid, known, Formulation::Noiseless, nullptr, 0.5, 2.0);
}

/// Steady state of the period-averaged scenario replicated over the grid,
/// withdrawals at their measurements, friction at nominal; projected into the bounds.
inline Vector default_start(const Transcription& tx, const RefinedNetwork& rn, const Scenario& sc,
                            const MeasurementSet* meas = nullptr) {
    const int N = tx.grid.N;
    Trajectory tr;
    tr.times = tx.grid.times();
    tr.rho.resize(tx.M, N);
    tr.Phi.resize(tx.E, N);
    tr.s.resize(static_cast<Eigen::Index>(rn.num_slack()), N);
    tr.d = Eigen::MatrixXd::Zero(tx.M, N);
    NodalState ss;
    try {
        const Scenario avg = sc.time_averaged();
        const RefinedNetwork rn_avg = avg.refined();
        ss = steady_state(rn_avg, avg, 0.0);
    } catch (const Error&) {
        ss.s = sc.slack(0.0);
        ss.rho = Vector::Constant(tx.M, ss.s.mean());
        ss.Phi = Vector::Zero(tx.E);
    }
    for (int k = 0; k < N; ++k) {
        tr.rho.col(k) = ss.rho;
        tr.Phi.col(k) = ss.Phi;
        const double t = tx.grid.time(k);
        for (int j = 0; j < tx.P; ++j) {
            double v = meas ? meas->d_tilde(j, k) : sc.withdrawals[static_cast<std::size_t>(j)].eval(t);
            tr.d(j, k) = std::isfinite(v) ? v : 0.0;
        }
    }
    Vector x = tx.pack(tr);
    const Vector lo = tx.problem.lower(), hi = tx.problem.upper();
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    return x;
}

} // namespace gasnet
