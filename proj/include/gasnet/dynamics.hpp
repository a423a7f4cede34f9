#pragma once

#include <cmath>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "gasnet/error.hpp"
#include "gasnet/network.hpp"

namespace gasnet {

using Vector = Eigen::VectorXd;

struct EdgeParams {
    double friction = 0.0;
    double diameter = 0.0; // m
    double ell0 = 0.0;     // m
};

inline EdgeParams edge_params(const RefinedNetwork& rn, std::size_t k) {
    const auto& e = rn.edges()[k];
    return {e.friction, e.diameter, rn.ell0()};
}

/// Steady flux carried by a segment with mean density u and density gradient w:
/// f(u, w) = sgn(w) sqrt(|u * 2D/(lambda ell0) * w|). Odd in w.
inline double dissipation(const EdgeParams& p, double u, double w) {
    detail::require(u > 0.0, "dissipation: density must be positive");
    const double c = 2.0 * p.diameter / (p.friction * p.ell0);
    const double mag = std::sqrt(std::abs(u * c * w));
    return w > 0.0 ? mag : (w < 0.0 ? -mag : 0.0);
}

/// df/dw = (1/2) sqrt(c u / |w|), strictly positive, unbounded as w -> 0.
inline double dissipation_dw(const EdgeParams& p, double u, double w) {
    detail::require(u > 0.0, "dissipation_dw: density must be positive");
    if (w == 0.0) detail::fail(ErrorKind::SingularDerivative, "dissipation_dw: derivative unbounded at w = 0");
    const double c = 2.0 * p.diameter / (p.friction * p.ell0);
    return 0.5 * std::sqrt(c * u / std::abs(w));
}

/// Nodal state of the refined network: non-slack densities, slack densities, edge-average fluxes.
struct NodalState {
    Vector rho;
    Vector s;
    Vector Phi;
};

/// Full nodal density vector (s, rho) in refined node order.
inline Vector stack_density(const Vector& s, const Vector& rho) {
    Vector out(s.size() + rho.size());
    out << s, rho;
    return out;
}

/// Physical non-slack withdrawals padded with zeros on auxiliary nodes.
inline Vector expand_withdrawals(const RefinedNetwork& rn, const Vector& d_physical) {
    detail::require(static_cast<std::size_t>(d_physical.size()) == rn.num_physical(), "withdrawal vector size mismatch");
    Vector d = Vector::Zero(static_cast<Eigen::Index>(rn.num_nonslack()));
    d.head(d_physical.size()) = d_physical;
    return d;
}

namespace detail {

inline void check_shapes(const RefinedNetwork& rn, const Vector& rhoN) {
    require(static_cast<std::size_t>(rhoN.size()) == rn.num_nodes(), "nodal density vector has wrong length");
}

} // namespace detail

/// Edge fluxes from nodal densities in matrix form:
/// Phi = -| -(Lambda K)^-1 (B^T rhoN) .* (|B^T| rhoN) |^(1/2) .* sgn(B^T rhoN)
inline Vector phi_from_rho(const RefinedNetwork& rn, double t, const Vector& rhoN, const Vector& K) {
    detail::check_shapes(rn, rhoN);
    const Incidence B = weighted_incidence(rn, t);
    const Vector diff = B.A.transpose() * rhoN;
    const Vector sum = SparseMatrix(B.A.cwiseAbs()).transpose() * rhoN;
    if ((sum.array() <= 0.0).any()) detail::fail(ErrorKind::InvalidArgument, "phi_from_rho: non-positive edge density sum");
    const Vector LK = rn.Lambda().cwiseProduct(K);
    const Vector mag = (diff.cwiseProduct(sum).cwiseQuotient(LK)).cwiseAbs().cwiseSqrt();
    return -mag.cwiseProduct(Vector(diff.array().sign()));
}

inline Vector phi_from_rho(const RefinedNetwork& rn, double t, const Vector& rhoN) {
    return phi_from_rho(rn, t, rhoN, rn.K());
}

/// Same quantity edge by edge through the dissipation function:
/// Phi_k = -f(1/2 (|B^T| rhoN)_k, (Lambda^-1 B^T rhoN)_k).
inline Vector phi_from_rho_componentwise(const RefinedNetwork& rn, double t, const Vector& rhoN) {
    detail::check_shapes(rn, rhoN);
    Vector Phi(static_cast<Eigen::Index>(rn.num_edges()));
    for (std::size_t k = 0; k < rn.num_edges(); ++k) {
        const auto& e = rn.edges()[k];
        const double lo = rn.ratio_from(k, t) * rhoN[e.from];
        const double hi = rn.ratio_to(k, t) * rhoN[e.to];
        if (lo + hi <= 0.0) detail::fail(ErrorKind::InvalidArgument, "phi_from_rho: non-positive edge density sum");
        Phi[static_cast<Eigen::Index>(k)] = -dissipation(edge_params(rn, k), 0.5 * (lo + hi), (hi - lo) / e.length);
    }
    return Phi;
}

/// |A_d| X Lambda |B_d^T(t)|, the mass matrix multiplying d(rho)/dt.
inline SparseMatrix mass_matrix(const RefinedNetwork& rn, double t) {
    const Incidence B = weighted_incidence(rn, t);
    const SparseMatrix absAd = rn.incidence().Ad.cwiseAbs();
    const SparseMatrix absBd = B.Ad.cwiseAbs();
    const Vector xl = rn.X().cwiseProduct(rn.Lambda());
    return SparseMatrix(absAd * xl.asDiagonal() * absBd.transpose());
}

struct DaeResidual {
    Vector mass;     // length M
    Vector momentum; // length |E|
};

/// Matrix-form residual of the lumped network DAE:
///   mass     = |A_d| X Lambda (|B_d^T| rho' + |B_s^T| s') - 4 (A_d X Phi - d)
///   momentum = Lambda K Phi.*|Phi| + (B^T rhoN) .* (|B^T| rhoN)
/// `d` is indexed by refined non-slack node (zero on auxiliary nodes).
inline DaeResidual dae_residual(const RefinedNetwork& rn, double t, const NodalState& x, const Vector& rho_dot,
                                const Vector& s_dot, const Vector& d, const Vector& K) {
    const auto M = static_cast<Eigen::Index>(rn.num_nonslack());
    const auto b = static_cast<Eigen::Index>(rn.num_slack());
    const auto E = static_cast<Eigen::Index>(rn.num_edges());
    detail::require(x.rho.size() == M && rho_dot.size() == M && d.size() == M, "dae_residual: non-slack vector size mismatch");
    detail::require(x.s.size() == b && s_dot.size() == b, "dae_residual: slack vector size mismatch");
    detail::require(x.Phi.size() == E && K.size() == E, "dae_residual: edge vector size mismatch");

    const Incidence B = weighted_incidence(rn, t);
    const SparseMatrix absAd = rn.incidence().Ad.cwiseAbs();
    const SparseMatrix absBdT = SparseMatrix(B.Ad.cwiseAbs()).transpose();
    const SparseMatrix absBsT = SparseMatrix(B.As.cwiseAbs()).transpose();
    const Vector xl = rn.X().cwiseProduct(rn.Lambda());

    DaeResidual r;
    const Vector edge_rate = absBdT * rho_dot + absBsT * s_dot;
    r.mass = absAd * xl.cwiseProduct(edge_rate) - 4.0 * (rn.incidence().Ad * rn.X().cwiseProduct(x.Phi) - d);

    const Vector rhoN = stack_density(x.s, x.rho);
    const Vector diff = B.A.transpose() * rhoN;
    const Vector sum = SparseMatrix(B.A.cwiseAbs()).transpose() * rhoN;
    r.momentum = rn.Lambda().cwiseProduct(K).cwiseProduct(x.Phi.cwiseProduct(x.Phi.cwiseAbs())) + diff.cwiseProduct(sum);
    return r;
}

inline DaeResidual dae_residual(const RefinedNetwork& rn, double t, const NodalState& x, const Vector& rho_dot,
                                const Vector& s_dot, const Vector& d) {
    return dae_residual(rn, t, x, rho_dot, s_dot, d, rn.K());
}

/// Segment-by-segment assembly of the same residual from the lumped edge
/// relations: end densities from nodal densities and compression ratios, the
/// half-difference flux from the trapezoidal mass balance, end fluxes, and the
/// nodal flow balance. Returned with the scaling and sign of dae_residual
/// (mass rows are -4 x flow imbalance; momentum rows are rho_out^2 - rho_in^2 + L K Phi|Phi|).
inline DaeResidual segmentwise_residual(const RefinedNetwork& rn, double t, const NodalState& x,
                                        const Vector& rho_dot, const Vector& s_dot, const Vector& d) {
    const std::size_t b = rn.num_slack();
    const Vector rhoN = stack_density(x.s, x.rho);
    const Vector rateN = stack_density(s_dot, rho_dot);
    DaeResidual r;
    r.mass = Vector::Zero(static_cast<Eigen::Index>(rn.num_nonslack()));
    r.momentum = Vector::Zero(static_cast<Eigen::Index>(rn.num_edges()));
    Vector imbalance = -d;
    for (std::size_t k = 0; k < rn.num_edges(); ++k) {
        const auto& e = rn.edges()[k];
        const auto kk = static_cast<Eigen::Index>(k);
        const double a_in = rn.ratio_from(k, t), a_out = rn.ratio_to(k, t);
        const double rho_in = a_in * rhoN[e.from];
        const double rho_out = a_out * rhoN[e.to];
        const double rate_in = a_in * rateN[e.from];
        const double rate_out = a_out * rateN[e.to];
        // (L/2)(rate_in + rate_out) = phi_in - phi_out = -2 Phi_minus
        const double phi_minus = -0.25 * e.length * (rate_in + rate_out);
        const double phi_in = x.Phi[kk] - phi_minus;
        const double phi_out = x.Phi[kk] + phi_minus;
        if (static_cast<std::size_t>(e.to) >= b) imbalance[static_cast<Eigen::Index>(e.to - static_cast<int>(b))] += e.area * phi_out;
        if (static_cast<std::size_t>(e.from) >= b) imbalance[static_cast<Eigen::Index>(e.from - static_cast<int>(b))] -= e.area * phi_in;
        r.momentum[kk] = rho_out * rho_out - rho_in * rho_in +
                         e.length * rn.K()[kk] * x.Phi[kk] * std::abs(x.Phi[kk]);
    }
    r.mass = -4.0 * imbalance;
    return r;
}

/// rho' of the nodal ODE obtained by eliminating Phi through phi_from_rho.
inline Vector nodal_ode_rhs(const RefinedNetwork& rn, double t, const Vector& rho, const Vector& s,
                            const Vector& s_dot, const Vector& d) {
    const Vector rhoN = stack_density(s, rho);
    const Vector Phi = phi_from_rho(rn, t, rhoN);
    const Incidence B = weighted_incidence(rn, t);
    const SparseMatrix absAd = rn.incidence().Ad.cwiseAbs();
    const SparseMatrix absBsT = SparseMatrix(B.As.cwiseAbs()).transpose();
    const Vector xl = rn.X().cwiseProduct(rn.Lambda());
    const Vector rhs = 4.0 * (rn.incidence().Ad * rn.X().cwiseProduct(Phi) - d) - absAd * xl.cwiseProduct(absBsT * s_dot);

    SparseMatrix Mm = mass_matrix(rn, t);
    Mm.makeCompressed();
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(Mm);
    if (lu.info() != Eigen::Success) detail::fail(ErrorKind::Topology, "nodal mass matrix is singular (disconnected network?)");
    Vector rho_dot = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !rho_dot.allFinite())
        detail::fail(ErrorKind::Topology, "nodal mass matrix solve failed");
    return rho_dot;
}

} // namespace gasnet
