#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "gasnet/error.hpp"
#include "gasnet/nlp.hpp"

namespace gasnet {

struct SolveOptions {
    double tol = 1e-4;
    int max_iter = 500;
    double mu0 = 0.1;
    double kappa_mu = 0.2;   // linear barrier reduction
    double theta_mu = 1.5;   // superlinear barrier reduction
    double kappa_eps = 10.0; // barrier subproblem tolerance factor
    double tau = 0.995;      // fraction to the boundary
    double delta_c = 1e-8;   // constraint regularization
    double reg_floor = 1e-20;
    bool polish = true;      // final Newton solve on the identified active set
};

enum class SolveStatus { Converged, IterationLimit, Infeasible, NumericalFailure };

inline const char* to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::IterationLimit: return "iteration-limit";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::NumericalFailure: return "numerical-failure";
    }
    return "unknown";
}

struct SolveReport {
    SolveStatus status = SolveStatus::NumericalFailure;
    double stationarity = 0.0;
    double feasibility = 0.0;
    double complementarity = 0.0;
    double objective = 0.0;
    int iterations = 0;
    double wall_time = 0.0; // s
    double mu = 0.0;
    bool polished = false;
    int active_bounds = 0;
    std::string message;

    double kkt_error() const { return std::max({stationarity, feasibility, complementarity}); }
};

struct SolveResult {
    Eigen::VectorXd x, y, z_lower, z_upper;
    SolveReport report;
};

namespace detail {

struct KktResiduals {
    double stationarity = 0.0, feasibility = 0.0, complementarity = 0.0;
    double max() const { return std::max({stationarity, feasibility, complementarity}); }
};

class InteriorPoint {
public:
    InteriorPoint(const NlpProblem& p, const SolveOptions& o) : p_(p), o_(o) {
        n_ = p.num_variables();
        m_ = p.num_constraints();
        l_ = p.lower();
        u_ = p.upper();
        for (int i = 0; i < n_; ++i) {
            has_l_.push_back(std::isfinite(l_[i]));
            has_u_.push_back(std::isfinite(u_[i]));
        }
    }

    SolveResult run(const Eigen::VectorXd& x0) {
        const auto start = std::chrono::steady_clock::now();
        require(x0.size() == n_, "solve: start point has the wrong size");
        require(x0.allFinite(), "solve: start point must be finite");
        for (int i = 0; i < n_; ++i)
            require(!(has_l_[i] && has_u_[i]) || u_[i] > l_[i], "solve: every bounded variable needs lower < upper");

        x_ = interior_start(x0);
        y_ = Eigen::VectorXd::Zero(m_);
        mu_ = o_.mu0;
        zl_ = Eigen::VectorXd::Zero(n_);
        zu_ = Eigen::VectorXd::Zero(n_);
        for (int i = 0; i < n_; ++i) {
            if (has_l_[i]) zl_[i] = mu_ / (x_[i] - l_[i]);
            if (has_u_[i]) zu_[i] = mu_ / (u_[i] - x_[i]);
        }
        nu_ = 1.0;
        delta_w_last_ = 0.0;

        SolveResult res;
        SolveReport& rep = res.report;
        rep.status = SolveStatus::IterationLimit;
        double target = o_.tol;
        double mu_min = std::min(o_.tol / 10.0, 1e-9);
        int it = 0;
        bool refining = false;
        int refine_stop = 0;
        for (;;) {
            const KktResiduals e0 = residuals(0.0);
            if (!std::isfinite(e0.max())) {
                rep.status = SolveStatus::NumericalFailure;
                rep.message = "non-finite residuals";
                break;
            }
            if (e0.max() <= target) {
                rep.status = SolveStatus::Converged;
                if (!o_.polish) break;
                if (polish()) {
                    rep.polished = true;
                    break;
                }
                if (refining) {
                    rep.message = std::string("polish skipped: ") + polish_note_;
                    break;
                }
                // ambiguous active set: tighten the barrier and try again
                refining = true;
                remember_best();
                refine_stop = it + 60;
                target = std::max(1e-11, 1e-4 * o_.tol);
                mu_min = 1e-12;
                continue;
            }
            if (it >= o_.max_iter || (refining && it >= refine_stop)) {
                if (refining) {
                    rep.status = SolveStatus::Converged;
                    restore_best();
                }
                break;
            }
            // barrier update (possibly several times if already solved)
            for (int guard = 0; guard < 50; ++guard) {
                if (residuals(mu_).max() > o_.kappa_eps * mu_ || mu_ <= mu_min) break;
                mu_ = std::max(mu_min, std::min(o_.kappa_mu * mu_, std::pow(mu_, o_.theta_mu)));
            }
            if (!step()) {
                rep.status = refining ? SolveStatus::Converged : SolveStatus::NumericalFailure;
                rep.message = message_;
                if (refining) restore_best();
                break;
            }
            ++it;
            if (refining) remember_best();
        }
        rep.iterations = it;

        const KktResiduals fin = residuals(0.0);
        rep.stationarity = fin.stationarity;
        rep.feasibility = fin.feasibility;
        rep.complementarity = fin.complementarity;
        rep.objective = p_.objective(x_);
        rep.mu = mu_;
        if (rep.status == SolveStatus::Converged && fin.max() > o_.tol) rep.status = SolveStatus::NumericalFailure;
        if (rep.status != SolveStatus::Converged && fin.feasibility > 1e3 * o_.tol && rep.status != SolveStatus::NumericalFailure)
            rep.status = SolveStatus::Infeasible;
        for (int i = 0; i < n_; ++i)
            if ((has_l_[i] && x_[i] - l_[i] <= 1e-12 * std::max(1.0, std::abs(l_[i]))) ||
                (has_u_[i] && u_[i] - x_[i] <= 1e-12 * std::max(1.0, std::abs(u_[i]))))
                ++rep.active_bounds;
        rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        res.x = x_;
        res.y = y_;
        res.z_lower = zl_;
        res.z_upper = zu_;
        return res;
    }

private:
    void remember_best() {
        const double e = residuals(0.0).max();
        if (e < best_err_) {
            best_err_ = e;
            best_ = {x_, y_, zl_, zu_};
        }
    }
    void restore_best() {
        if (best_.size() == 4) {
            x_ = best_[0];
            y_ = best_[1];
            zl_ = best_[2];
            zu_ = best_[3];
        }
    }

    Eigen::VectorXd interior_start(const Eigen::VectorXd& x0) const {
        Eigen::VectorXd x = x0;
        for (int i = 0; i < n_; ++i) {
            const bool bl = has_l_[i], bu = has_u_[i];
            double pl = 1e-2 * std::max(1.0, std::abs(l_[i]));
            double pu = 1e-2 * std::max(1.0, std::abs(u_[i]));
            if (bl && bu) {
                pl = std::min(pl, 1e-2 * (u_[i] - l_[i]));
                pu = std::min(pu, 1e-2 * (u_[i] - l_[i]));
            }
            if (bl) x[i] = std::max(x[i], l_[i] + pl);
            if (bu) x[i] = std::min(x[i], u_[i] - pu);
        }
        return x;
    }

    KktResiduals residuals(double mu) const {
        KktResiduals r;
        const Eigen::VectorXd g = p_.gradient(x_);
        const Eigen::SparseMatrix<double> J = p_.jacobian(x_);
        const Eigen::VectorXd stat = g + J.transpose() * y_ - zl_ + zu_;
        r.stationarity = stat.lpNorm<Eigen::Infinity>();
        r.feasibility = m_ > 0 ? p_.constraints(x_).lpNorm<Eigen::Infinity>() : 0.0;
        double c = 0.0;
        for (int i = 0; i < n_; ++i) {
            if (has_l_[i]) c = std::max(c, std::abs((x_[i] - l_[i]) * zl_[i] - mu));
            if (has_u_[i]) c = std::max(c, std::abs((u_[i] - x_[i]) * zu_[i] - mu));
        }
        r.complementarity = c;
        return r;
    }

    double barrier_merit(const Eigen::VectorXd& x, double nu) const {
        double phi = p_.objective(x);
        for (int i = 0; i < n_; ++i) {
            if (has_l_[i]) phi -= mu_ * std::log(x[i] - l_[i]);
            if (has_u_[i]) phi -= mu_ * std::log(u_[i] - x[i]);
        }
        if (m_ > 0) phi += nu * p_.constraints(x).lpNorm<1>();
        return phi;
    }

    // Assembles and factors the lower triangle of the primal-dual KKT matrix with
    // inertia correction. Returns false if no admissible regularization exists.
    bool factor(const Eigen::SparseMatrix<double>& Hl, const Eigen::SparseMatrix<double>& J, const Eigen::VectorXd& sigma) {
        const double dc = m_ > 0 ? o_.delta_c : 0.0;
        double dw = 0.0;
        for (int attempt = 0; attempt < 60; ++attempt) {
            std::vector<Eigen::Triplet<double>> trip;
            trip.reserve(static_cast<std::size_t>(Hl.nonZeros() + J.nonZeros() + n_ + m_));
            for (int c = 0; c < Hl.outerSize(); ++c)
                for (Eigen::SparseMatrix<double>::InnerIterator it(Hl, c); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
            for (int i = 0; i < n_; ++i) trip.emplace_back(i, i, sigma[i] + dw);
            for (int c = 0; c < J.outerSize(); ++c)
                for (Eigen::SparseMatrix<double>::InnerIterator it(J, c); it; ++it)
                    trip.emplace_back(n_ + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
            for (int r = 0; r < m_; ++r) trip.emplace_back(n_ + r, n_ + r, -dc);
            K_.resize(n_ + m_, n_ + m_);
            K_.setFromTriplets(trip.begin(), trip.end());
            ldlt_.compute(K_);
            bool ok = ldlt_.info() == Eigen::Success;
            if (ok) {
                const Eigen::VectorXd D = ldlt_.vectorD();
                int pos = 0, neg = 0;
                for (Eigen::Index i = 0; i < D.size(); ++i) {
                    if (D[i] > 0.0) ++pos;
                    else if (D[i] < 0.0) ++neg;
                }
                ok = pos == n_ && neg == m_ && D.allFinite();
            }
            if (ok) {
                delta_w_last_ = dw;
                delta_w_ = dw;
                delta_c_ = dc;
                return true;
            }
            if (dw == 0.0) dw = delta_w_last_ == 0.0 ? 1e-4 : std::max(o_.reg_floor, delta_w_last_ / 3.0);
            else dw *= (delta_w_last_ == 0.0 ? 100.0 : 8.0);
            if (dw > 1e40) break;
        }
        message_ = "KKT matrix could not be regularized to the correct inertia";
        return false;
    }

    // Solves the factored system with a few steps of iterative refinement
    // against the matrix without the constraint regularization.
    Eigen::VectorXd kkt_solve(const Eigen::VectorXd& rhs) const {
        Eigen::VectorXd sol = ldlt_.solve(rhs);
        if (delta_c_ == 0.0) return sol;
        for (int r = 0; r < 3; ++r) {
            Eigen::VectorXd Ks = K_.selfadjointView<Eigen::Lower>() * sol;
            Ks.tail(m_) += delta_c_ * sol.tail(m_);
            const Eigen::VectorXd res = rhs - Ks;
            if (res.lpNorm<Eigen::Infinity>() <= 1e-14 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>())) break;
            sol += ldlt_.solve(res);
        }
        return sol;
    }

    double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv, const std::vector<char>& mask_l,
                     const Eigen::VectorXd& lo, bool upper) const {
        double a = 1.0;
        for (int i = 0; i < n_; ++i) {
            if (!mask_l[i]) continue;
            const double slack = upper ? lo[i] - v[i] : v[i] - lo[i];
            const double d = upper ? -dv[i] : dv[i];
            if (d < 0.0) a = std::min(a, -o_.tau * slack / d);
        }
        return a;
    }

    double max_dual_step(const Eigen::VectorXd& z, const Eigen::VectorXd& dz, const std::vector<char>& mask) const {
        double a = 1.0;
        for (int i = 0; i < n_; ++i)
            if (mask[i] && dz[i] < 0.0) a = std::min(a, -o_.tau * z[i] / dz[i]);
        return a;
    }

    bool step() {
        const Eigen::VectorXd g = p_.gradient(x_);
        const Eigen::SparseMatrix<double> J = p_.jacobian(x_);
        const Eigen::VectorXd c = m_ > 0 ? p_.constraints(x_) : Eigen::VectorXd();
        const Eigen::SparseMatrix<double> Hl = p_.hessian_lower(x_, y_);

        Eigen::VectorXd sigma = Eigen::VectorXd::Zero(n_);
        Eigen::VectorXd grad_phi = g;
        for (int i = 0; i < n_; ++i) {
            if (has_l_[i]) {
                sigma[i] += zl_[i] / (x_[i] - l_[i]);
                grad_phi[i] -= mu_ / (x_[i] - l_[i]);
            }
            if (has_u_[i]) {
                sigma[i] += zu_[i] / (u_[i] - x_[i]);
                grad_phi[i] += mu_ / (u_[i] - x_[i]);
            }
        }
        if (!factor(Hl, J, sigma)) return false;

        Eigen::VectorXd rhs(n_ + m_);
        rhs.head(n_) = -(grad_phi + J.transpose() * y_);
        if (m_ > 0) rhs.tail(m_) = -c;
        const Eigen::VectorXd sol = kkt_solve(rhs);
        if (!sol.allFinite()) {
            message_ = "non-finite Newton step";
            return false;
        }
        const Eigen::VectorXd dx = sol.head(n_);
        const Eigen::VectorXd dy = sol.tail(m_);

        Eigen::VectorXd dzl = Eigen::VectorXd::Zero(n_), dzu = Eigen::VectorXd::Zero(n_);
        for (int i = 0; i < n_; ++i) {
            if (has_l_[i]) dzl[i] = mu_ / (x_[i] - l_[i]) - zl_[i] - zl_[i] / (x_[i] - l_[i]) * dx[i];
            if (has_u_[i]) dzu[i] = mu_ / (u_[i] - x_[i]) - zu_[i] + zu_[i] / (u_[i] - x_[i]) * dx[i];
        }

        const double a_max = std::min(max_step(x_, dx, has_l_, l_, false), max_step(x_, dx, has_u_, u_, true));
        const double az = std::min(max_dual_step(zl_, dzl, has_l_), max_dual_step(zu_, dzu, has_u_));

        // l1 merit with penalty update
        const double cnorm = m_ > 0 ? c.lpNorm<1>() : 0.0;
        const Eigen::SparseMatrix<double> Hfull = Hl.selfadjointView<Eigen::Lower>();
        double curv = dx.dot(Hfull * dx) + dx.dot(sigma.cwiseProduct(dx));
        const double gdx = grad_phi.dot(dx);
        if (cnorm > 0.0) {
            const double need = (gdx + 0.5 * std::max(curv, 0.0)) / (0.9 * cnorm);
            if (nu_ < need) nu_ = need + 1.0;
        }
        const double D = gdx - nu_ * cnorm;
        const double phi0 = barrier_merit(x_, nu_);

        double alpha = a_max;
        bool accepted = false;
        Eigen::VectorXd x_new;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = x_ + alpha * dx;
            const double phi1 = barrier_merit(x_new, nu_);
            if (std::isfinite(phi1) && phi1 <= phi0 + 1e-4 * alpha * std::min(D, 0.0) + 1e-13 * std::abs(phi0)) {
                accepted = true;
                break;
            }
            if (ls == 0 && m_ > 0) {
                // second-order correction for the constraints
                const Eigen::VectorXd c_trial = p_.constraints(x_new);
                if (c_trial.lpNorm<1>() >= cnorm) {
                    Eigen::VectorXd rhs_soc = rhs;
                    rhs_soc.tail(m_) = -(alpha * c + c_trial);
                    const Eigen::VectorXd soc = kkt_solve(rhs_soc);
                    const Eigen::VectorXd dxs = soc.head(n_);
                    const double as = std::min(max_step(x_, dxs, has_l_, l_, false), max_step(x_, dxs, has_u_, u_, true));
                    const Eigen::VectorXd xs = x_ + as * dxs;
                    const double phis = barrier_merit(xs, nu_);
                    if (std::isfinite(phis) && phis <= phi0 + 1e-4 * alpha * std::min(D, 0.0)) {
                        x_new = xs;
                        alpha = as;
                        accepted = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
            if (alpha < 1e-16) break;
        }
        if (!accepted) {
            // take a short step anyway; the barrier keeps it interior
            alpha = std::min(a_max, 1e-8);
            x_new = x_ + alpha * dx;
            if (++stalls_ > 20) {
                message_ = "line search failed repeatedly";
                return false;
            }
        } else {
            stalls_ = 0;
        }
        x_ = x_new;
        y_ += alpha * dy;
        zl_ += az * dzl;
        zu_ += az * dzu;
        // keep the duals near the central path
        constexpr double kSigma = 1e10;
        for (int i = 0; i < n_; ++i) {
            if (has_l_[i]) {
                const double s = x_[i] - l_[i];
                zl_[i] = std::clamp(zl_[i], mu_ / (kSigma * s), kSigma * mu_ / s);
            }
            if (has_u_[i]) {
                const double s = u_[i] - x_[i];
                zu_[i] = std::clamp(zu_[i], mu_ / (kSigma * s), kSigma * mu_ / s);
            }
        }
        return true;
    }

    // Newton iterations on the KKT system of the problem with the identified
    // active bounds held fixed. Accepted only if it yields a better KKT point
    // with correctly signed bound multipliers. A few rounds of active-set
    // correction handle nearly degenerate bounds the barrier could not decide.
    bool polish() {
        std::vector<int> state(static_cast<std::size_t>(n_), 0); // -1 at lower, +1 at upper
        for (int i = 0; i < n_; ++i) {
            if (has_l_[i] && zl_[i] > x_[i] - l_[i]) state[static_cast<std::size_t>(i)] = -1;
            else if (has_u_[i] && zu_[i] > u_[i] - x_[i]) state[static_cast<std::size_t>(i)] = 1;
        }
        for (int round = 0; round < 8; ++round) {
            Eigen::VectorXd x, y, zl, zu;
            if (!polish_newton(state, x, y)) return false;
            const Eigen::VectorXd gl = p_.gradient(x) + p_.jacobian(x).transpose() * y;
            zl = Eigen::VectorXd::Zero(n_);
            zu = Eigen::VectorXd::Zero(n_);
            bool changed = false;
            for (int i = 0; i < n_; ++i) {
                int& s = state[static_cast<std::size_t>(i)];
                if (s == -1) zl[i] = gl[i];
                if (s == 1) zu[i] = -gl[i];
                if (s == 0 && has_l_[i] && x[i] <= l_[i]) { s = -1; changed = true; }
                else if (s == 0 && has_u_[i] && x[i] >= u_[i]) { s = 1; changed = true; }
                else if ((s == -1 && zl[i] < -o_.tol) || (s == 1 && zu[i] < -o_.tol)) { s = 0; changed = true; }
            }
            if (changed) continue;
            const Eigen::VectorXd xs = x_, ys = y_, zls = zl_, zus = zu_;
            const double before = residuals(0.0).max();
            x_ = x;
            y_ = y;
            zl_ = zl.cwiseMax(0.0);
            zu_ = zu.cwiseMax(0.0);
            if (residuals(0.0).max() <= std::max(before, 1e-12) && residuals(0.0).max() <= o_.tol) return true;
            x_ = xs;
            y_ = ys;
            zl_ = zls;
            zu_ = zus;
            return polish_fail("polished point is not a better KKT point");
        }
        return polish_fail("active set did not settle");
    }

    bool polish_newton(const std::vector<int>& state, Eigen::VectorXd& x, Eigen::VectorXd& y) {
        std::vector<int> free_idx, pos(static_cast<std::size_t>(n_), -1);
        for (int i = 0; i < n_; ++i)
            if (state[static_cast<std::size_t>(i)] == 0) {
                pos[static_cast<std::size_t>(i)] = static_cast<int>(free_idx.size());
                free_idx.push_back(i);
            }
        const int nf = static_cast<int>(free_idx.size());
        x = x_;
        y = y_;
        for (int i = 0; i < n_; ++i) {
            if (state[static_cast<std::size_t>(i)] == -1) x[i] = l_[i];
            if (state[static_cast<std::size_t>(i)] == 1) x[i] = u_[i];
        }
        auto kkt_res = [&](const Eigen::VectorXd& xx, const Eigen::VectorXd& yy) {
            const Eigen::VectorXd gl = p_.gradient(xx) + p_.jacobian(xx).transpose() * yy;
            Eigen::VectorXd r(nf + m_);
            for (int q = 0; q < nf; ++q) r[q] = gl[free_idx[static_cast<std::size_t>(q)]];
            if (m_ > 0) r.tail(m_) = p_.constraints(xx);
            return r;
        };
        Eigen::VectorXd r = kkt_res(x, y);
        for (int it = 0; it < 20 && r.lpNorm<Eigen::Infinity>() > 1e-13; ++it) {
            const Eigen::SparseMatrix<double> H = p_.hessian_lower(x, y);
            const Eigen::SparseMatrix<double> J = p_.jacobian(x);
            std::vector<Eigen::Triplet<double>> trip;
            for (int c = 0; c < H.outerSize(); ++c)
                for (Eigen::SparseMatrix<double>::InnerIterator itH(H, c); itH; ++itH) {
                    const int a = pos[static_cast<std::size_t>(itH.row())], b = pos[static_cast<std::size_t>(itH.col())];
                    if (a < 0 || b < 0) continue;
                    trip.emplace_back(a, b, itH.value());
                    if (a != b) trip.emplace_back(b, a, itH.value());
                }
            for (int c = 0; c < J.outerSize(); ++c)
                for (Eigen::SparseMatrix<double>::InnerIterator itJ(J, c); itJ; ++itJ) {
                    const int a = pos[static_cast<std::size_t>(itJ.col())];
                    if (a < 0) continue;
                    trip.emplace_back(nf + static_cast<int>(itJ.row()), a, itJ.value());
                    trip.emplace_back(a, nf + static_cast<int>(itJ.row()), itJ.value());
                }
            Eigen::SparseMatrix<double> Kp(nf + m_, nf + m_);
            Kp.setFromTriplets(trip.begin(), trip.end());
            Kp.makeCompressed();
            Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
            lu.compute(Kp);
            if (lu.info() != Eigen::Success) return polish_fail("singular reduced KKT matrix");
            const Eigen::VectorXd d = lu.solve(-r);
            if (!d.allFinite()) return polish_fail("non-finite polish step");
            for (int q = 0; q < nf; ++q) x[free_idx[static_cast<std::size_t>(q)]] += d[q];
            y += d.tail(m_);
            const Eigen::VectorXd r_new = kkt_res(x, y);
            if (!(r_new.lpNorm<Eigen::Infinity>() < r.lpNorm<Eigen::Infinity>())) {
                r = r_new;
                break;
            }
            r = r_new;
        }
        return true;
    }

    bool polish_fail(const char* why) {
        polish_note_ = why;
        return false;
    }

    const NlpProblem& p_;
    SolveOptions o_;
    int n_ = 0, m_ = 0;
    Eigen::VectorXd l_, u_;
    std::vector<char> has_l_, has_u_;
    Eigen::VectorXd x_, y_, zl_, zu_;
    double mu_ = 0.1, nu_ = 1.0;
    double delta_w_ = 0.0, delta_w_last_ = 0.0, delta_c_ = 0.0;
    int stalls_ = 0;
    std::string polish_note_;
    double best_err_ = std::numeric_limits<double>::infinity();
    std::vector<Eigen::VectorXd> best_;
    std::string message_;
    Eigen::SparseMatrix<double> K_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt_;
};

} // namespace detail

/// Primal-dual interior-point solve of min f s.t. c(x) = 0, l <= x <= u.
/// Deterministic for identical (problem, x0, options).
inline SolveResult solve(const NlpProblem& p, const Eigen::VectorXd& x0, const SolveOptions& opt = {}) {
    detail::require(opt.tol > 0.0, "solve: tolerance must be positive");
    detail::require(opt.max_iter >= 0, "solve: max_iter must be non-negative");
    detail::InteriorPoint ip(p, opt);
    return ip.run(x0);
}

} // namespace gasnet
