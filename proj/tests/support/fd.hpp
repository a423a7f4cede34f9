#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "gasnet/nlp.hpp"

// Largest entrywise mismatch between the analytic constraint Jacobian and
// central differences, relative to max(|analytic|, |numeric|, floor). Every
// constraint term is at most quadratic in a single variable, so central
// differences are exact up to rounding as long as the stencil does not cross
// zero (the kink of x|x|). The step is therefore wide but capped at half the
// distance to zero; the floor keeps rounding noise on near-zero entries from
// reading as relative error.
inline double fd_step(double x) {
    const double h = 1e-3 * std::max(1.0, std::abs(x));
    return x == 0.0 ? 1e-5 : std::min(h, 0.5 * std::abs(x));
}

inline double jacobian_fd_error(const gasnet::NlpProblem& p, const Eigen::VectorXd& x, double floor = 1e-4) {
    Eigen::SparseMatrix<double> J = p.jacobian(x);
    J.makeCompressed();
    double worst = 0.0;
    Eigen::VectorXd xp = x, xm = x, analytic = Eigen::VectorXd::Zero(p.num_constraints());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = fd_step(x[j]);
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        const Eigen::VectorXd col = (p.constraints(xp) - p.constraints(xm)) / (2.0 * h);
        xp[j] = xm[j] = x[j];
        for (Eigen::SparseMatrix<double>::InnerIterator it(J, j); it; ++it) analytic[it.row()] = it.value();
        for (Eigen::Index i = 0; i < col.size(); ++i) {
            const double a = analytic[i], b = col[i];
            worst = std::max(worst, std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor}));
        }
        for (Eigen::SparseMatrix<double>::InnerIterator it(J, j); it; ++it) analytic[it.row()] = 0.0;
    }
    return worst;
}

inline double gradient_fd_error(const gasnet::NlpProblem& p, const Eigen::VectorXd& x, double floor = 1e-4) {
    const Eigen::VectorXd g = p.gradient(x);
    double worst = 0.0;
    Eigen::VectorXd xp = x, xm = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = fd_step(x[j]);
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        const double num = (p.objective(xp) - p.objective(xm)) / (2.0 * h);
        xp[j] = xm[j] = x[j];
        worst = std::max(worst, std::abs(g[j] - num) / std::max({std::abs(g[j]), std::abs(num), floor}));
    }
    return worst;
}
