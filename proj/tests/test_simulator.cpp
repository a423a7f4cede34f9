#include <gtest/gtest.h>

#include "gasnet/fixtures.hpp"
#include "gasnet/simulator.hpp"

using namespace gasnet;

namespace {

Scenario without_compressors(Scenario sc) {
    std::vector<Compressor> none;
    sc.network = sc.network.with_compressors(none);
    return sc;
}

} // namespace

TEST(SteadyState, RestWithoutDemand) {
    Scenario sc = without_compressors(builtin_fixture("four-node"));
    for (auto& w : sc.withdrawals) w = Profile::constant(0.0, sc.horizon());
    const RefinedNetwork rn = sc.refined();
    const NodalState x = steady_state(rn, sc);
    const double s = sc.slack(0.0)[0];
    EXPECT_LE((x.rho.array() - s).abs().maxCoeff(), 1e-12);
    EXPECT_LE(x.Phi.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SteadyState, WeymouthProfileOnSinglePipe) {
    const Scenario sc = builtin_fixture("single-pipe").time_averaged();
    const RefinedNetwork rn = sc.refined();
    const NodalState x = steady_state(rn, sc);
    const auto& pipe = sc.network.pipes()[0];
    const double phi = sc.constants.nd_flow(68.094) / pipe.area();
    const double K = sc.constants.ell0 * pipe.friction / pipe.diameter;
    const double rho_in = sc.network.compressors()[0].ratio.eval(0.0) * sc.slack(0.0)[0];
    double pos = 0.0;
    for (int e : rn.edges_of_pipe(0)) {
        const auto& edge = rn.edges()[static_cast<std::size_t>(e)];
        pos += edge.length;
        const double expected = std::sqrt(rho_in * rho_in - K * phi * std::abs(phi) * pos);
        const double got = x.rho[edge.to - static_cast<int>(rn.num_slack())];
        EXPECT_LE(std::abs(got - expected) / expected, 1e-6);
        EXPECT_NEAR(x.Phi[e], phi, 1e-12 * phi);
    }
}

TEST(SteadyState, FarEndWithinBounds) {
    const Scenario sc = builtin_fixture("single-pipe");
    const Scenario avg = sc.time_averaged();
    const NodalState x = steady_state(avg.refined(), avg);
    const double p = pa_to_psi(sc.constants.dim_pressure(x.rho[0]));
    EXPECT_GT(p, 500.0);
    EXPECT_LT(p, 1100.0);
}

TEST(Simulate, ConstantScenarioStaysPut) {
    const Scenario sc = builtin_fixture("four-node").time_averaged();
    const RefinedNetwork rn = sc.refined();
    const NodalState x = steady_state(rn, sc);
    const Trajectory tr = simulate(rn, sc, x.rho, 0.0, sc.horizon());
    for (Eigen::Index k = 0; k < tr.rho.cols(); ++k) EXPECT_LE((tr.rho.col(k) - x.rho).lpNorm<Eigen::Infinity>(), 1e-8);
}

TEST(Simulate, HitsOutputTimes) {
    const Scenario sc = builtin_fixture("four-node");
    const RefinedNetwork rn = sc.refined();
    const Scenario avg = sc.time_averaged();
    const NodalState x = steady_state(avg.refined(), avg);
    const std::vector<double> outs = grid_times(sc.horizon(), 24);
    const Trajectory tr = simulate(rn, sc, x.rho, 0.0, sc.horizon(), {}, outs);
    for (double t : outs) EXPECT_NE(std::find(tr.times.begin(), tr.times.end(), t), tr.times.end());
    EXPECT_EQ(tr.times.back(), sc.horizon());
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        NodalState s{tr.rho.col(c), tr.s.col(c), tr.Phi.col(c)};
        const DaeResidual r = dae_residual(rn, tr.times[i], s, Vector::Zero(s.rho.size()), sc.slack_rate(tr.times[i]), tr.d.col(c));
        EXPECT_LE(r.momentum.lpNorm<Eigen::Infinity>(), 1e-8);
    }
}

TEST(Simulate, FixedStepsSatisfyTheImplicitEulerResidual) {
    const Scenario sc = builtin_fixture("four-node");
    const RefinedNetwork rn = sc.refined();
    const Scenario avg = sc.time_averaged();
    const NodalState x = steady_state(avg.refined(), avg);
    SimulationOptions opt;
    opt.fixed_step = sc.horizon() / 96;
    const Trajectory tr = simulate(rn, sc, x.rho, 0.0, sc.horizon(), opt);
    for (std::size_t i = 1; i < tr.size(); ++i) {
        const double h = tr.times[i] - tr.times[i - 1];
        const auto c = static_cast<Eigen::Index>(i);
        NodalState s{tr.rho.col(c), tr.s.col(c), tr.Phi.col(c)};
        const Vector rd = (tr.rho.col(c) - tr.rho.col(c - 1)) / h;
        const DaeResidual r = dae_residual(rn, tr.times[i], s, rd, sc.slack_rate(tr.times[i]), tr.d.col(c));
        EXPECT_LE(r.mass.lpNorm<Eigen::Infinity>(), 1e-8);
        EXPECT_LE(r.momentum.lpNorm<Eigen::Infinity>(), 1e-8);
    }
}

TEST(Simulate, SelfConvergence) {
    const Scenario sc = builtin_fixture("single-pipe");
    const RefinedNetwork rn = sc.refined();
    const NodalState x = steady_state(rn, sc);
    auto end_state = [&](double tol) {
        SimulationOptions o;
        o.rel_tol = tol;
        const Trajectory tr = simulate(rn, sc, x.rho, 0.0, 0.25 * sc.horizon(), o);
        return Vector(tr.rho.col(tr.rho.cols() - 1));
    };
    const Vector ref = end_state(1e-8);
    auto err = [&](double tol) { return ((end_state(tol) - ref).array() / ref.array()).abs().maxCoeff(); };
    const double loose = err(1e-4), tight = err(1e-6);
    EXPECT_LE(loose, 2e-3);
    EXPECT_LT(tight, 0.2 * loose);
}

TEST(Simulate, FixedStepMode) {
    const Scenario sc = builtin_fixture("single-pipe");
    const RefinedNetwork rn = sc.refined();
    SimulationOptions opt;
    opt.fixed_step = sc.horizon() / 96.0;
    const Trajectory tr = simulate(rn, sc, steady_state(rn, sc).rho, 0.0, sc.horizon(), opt);
    EXPECT_EQ(tr.size(), 97u);
}

TEST(Simulate, RejectsBadInput) {
    const Scenario sc = builtin_fixture("single-pipe");
    const RefinedNetwork rn = sc.refined();
    EXPECT_THROW(simulate(rn, sc, Vector::Ones(3), 0.0, 1.0), Error);
    EXPECT_THROW(simulate(rn, sc, -Vector::Ones(static_cast<Eigen::Index>(rn.num_nonslack())), 0.0, 1.0), Error);
    EXPECT_THROW(simulate(rn, sc, Vector::Ones(static_cast<Eigen::Index>(rn.num_nonslack())), 0.0, -1.0), Error);
}

TEST(PeriodicOrbit, ConstantScenarioTakesOnePeriod) {
    const Scenario sc = builtin_fixture("single-pipe").time_averaged();
    const RefinedNetwork rn = sc.refined();
    const PeriodicOrbit o = periodic_orbit(rn, sc);
    EXPECT_EQ(o.periods, 1);
}

TEST(PeriodicOrbit, SinglePipe) {
    const Scenario sc = builtin_fixture("single-pipe");
    const RefinedNetwork rn = sc.refined();
    const PeriodicOrbit o = periodic_orbit(rn, sc);
    EXPECT_LE(o.seam_mismatch, 1e-6);
    const Trajectory g = o.trajectory.sample(grid_times(sc.horizon(), 96));
    const double slack = sc.slack(0.0)[0];
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Vector rhoN = g.rhoN(k);
        for (Eigen::Index i = 0; i < rhoN.size(); ++i) {
            const double p = pa_to_psi(sc.constants.dim_pressure(rhoN[i]));
            EXPECT_GE(p, 500.0);
            EXPECT_LE(p, 1100.0);
        }
        // the withdrawal end is the pressure minimum
        EXPECT_LT(g.rho(0, static_cast<Eigen::Index>(k)), slack);
        EXPECT_NEAR(g.rho.col(static_cast<Eigen::Index>(k)).minCoeff(), g.rho(0, static_cast<Eigen::Index>(k)), 1e-15);
    }
    // outlet flux follows the twice-daily demand: two maxima per period
    const int last = rn.edges_of_pipe(0).back();
    const Eigen::VectorXd f = g.Phi.row(last).transpose();
    int peaks = 0;
    for (Eigen::Index k = 0; k < f.size(); ++k) {
        const double prev = f[(k + f.size() - 1) % f.size()], next = f[(k + 1) % f.size()];
        if (f[k] > prev && f[k] >= next) ++peaks;
    }
    EXPECT_EQ(peaks, 2);
}

TEST(PeriodicOrbit, UniqueFromDifferentStarts) {
    const Scenario sc = builtin_fixture("four-node");
    const RefinedNetwork rn = sc.refined();
    const PeriodicOrbit a = periodic_orbit(rn, sc, 1e-8);
    const Vector lo = a.trajectory.rho.col(0) * 0.9, hi = a.trajectory.rho.col(0) * 1.08;
    const PeriodicOrbit b = periodic_orbit(rn, sc, 1e-8, {}, lo);
    const PeriodicOrbit c = periodic_orbit(rn, sc, 1e-8, {}, hi);
    EXPECT_LE((a.trajectory.rho.col(0) - b.trajectory.rho.col(0)).lpNorm<Eigen::Infinity>(), 1e-5);
    EXPECT_LE((b.trajectory.rho.col(0) - c.trajectory.rho.col(0)).lpNorm<Eigen::Infinity>(), 1e-5);
}

TEST(PeriodicOrbit, GiveUpIsReported) {
    const Scenario sc = builtin_fixture("single-pipe");
    const RefinedNetwork rn = sc.refined();
    try {
        periodic_orbit(rn, sc, 1e-14, {}, std::nullopt, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoPeriodicOrbit);
    }
}
