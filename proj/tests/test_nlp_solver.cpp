#include <Eigen/LU>
#include <gtest/gtest.h>

#include "gasnet/experiments.hpp"

using namespace gasnet;

namespace {

VarInfo var(int i) { return {Quantity::Density, i, -1, 1.0}; }

} // namespace

TEST(Solver, UnconstrainedQuadratic) {
    NlpProblem p;
    for (int i = 0; i < 5; ++i) {
        p.add_variable(var(i), -10.0, 10.0);
        p.add_atom({i, 0.5 * i - 1.0, 1.0 + i});
    }
    const SolveResult r = solve(p, Vector::Zero(5));
    ASSERT_EQ(r.report.status, SolveStatus::Converged);
    EXPECT_LE(r.report.iterations, 5);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(r.x[i], 0.5 * i - 1.0, 1e-8);
}

TEST(Solver, EqualityConstrainedQuadraticMatchesDenseKkt) {
    // min sum w_i (x_i - t_i)^2  s.t.  C x = c
    const int n = 4;
    const Eigen::Vector4d w(1.0, 2.0, 0.5, 3.0), t(1.0, -2.0, 0.5, 4.0);
    Eigen::Matrix<double, 2, 4> C;
    C << 1, 1, 1, 1, 1, -2, 0, 3;
    const Eigen::Vector2d c(2.0, -1.0);
    NlpProblem p;
    for (int i = 0; i < n; ++i) {
        p.add_variable(var(i));
        p.add_atom({i, t[i], w[i]});
    }
    for (int r = 0; r < 2; ++r) {
        p.begin_row(-c[r]);
        for (int i = 0; i < n; ++i) p.add_term({TermKind::Linear, i, -1, C(r, i)});
    }
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(6, 6);
    Eigen::VectorXd rhs(6);
    K.topLeftCorner(4, 4) = (2.0 * w).asDiagonal();
    K.topRightCorner(4, 2) = C.transpose();
    K.bottomLeftCorner(2, 4) = C;
    rhs << 2.0 * w.cwiseProduct(t), c;
    const Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
    const SolveResult r = solve(p, Vector::Zero(n));
    ASSERT_EQ(r.report.status, SolveStatus::Converged);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(r.x[i], sol[i], 1e-8);
}

TEST(Solver, ActiveBoundAndMultiplier) {
    NlpProblem p;
    p.add_variable(var(0), 0.0, 1.0);
    p.add_variable(var(1), -5.0, 5.0);
    p.add_atom({0, 2.0, 1.0});
    p.add_atom({1, 0.5, 1.0});
    p.begin_row(0.0);
    p.add_term({TermKind::Square, 1, -1, 1.0});
    p.add_term({TermKind::Linear, 0, -1, -0.25});
    const SolveResult r = solve(p, Vector::Constant(2, 0.5));
    ASSERT_EQ(r.report.status, SolveStatus::Converged);
    EXPECT_TRUE(r.report.polished);
    EXPECT_EQ(r.x[0], 1.0);
    EXPECT_NEAR(r.x[1] * r.x[1], 0.25, 1e-12);
    EXPECT_GT(r.z_upper[0], 0.0);
    EXPECT_LE(r.report.kkt_error(), 1e-10);
}

TEST(Solver, ReportsIterationLimit) {
    const Scenario sc = builtin_fixture("single-pipe");
    const RefinedNetwork rn = sc.refined();
    const Transcription tx = build_noiseless_ivp(rn, TimeGrid::of(sc), sc);
    SolveOptions o;
    o.max_iter = 1;
    const SolveResult r = solve(tx.problem, default_start(tx, rn, sc), o);
    EXPECT_EQ(r.report.status, SolveStatus::IterationLimit);
}

TEST(Solver, NoiselessStateEstimation) {
    const Scenario sc = builtin_fixture("single-pipe");
    const RefinedNetwork rn = sc.refined();
    const Trajectory truth = grid_truth(rn, sc);
    const MeasurementSet m = synthesize(truth, rn, {0.0, 1});
    const Transcription tx = build_state_estimation(rn, TimeGrid::of(sc), sc, m);
    const SolveResult r = solve(tx.problem, default_start(tx, rn, sc, &m));
    ASSERT_EQ(r.report.status, SolveStatus::Converged);
    EXPECT_LE(r.report.objective, 1e-8);
    EXPECT_LE(r.report.kkt_error(), 1e-4);
}

TEST(Solver, ConstantInputStartIsOptimal) {
    const Scenario sc = builtin_fixture("single-pipe").time_averaged();
    const RefinedNetwork rn = sc.refined();
    const Transcription tx = build_noiseless_ivp(rn, TimeGrid::of(sc), sc);
    const Vector x0 = default_start(tx, rn, sc);
    EXPECT_LE(tx.problem.constraints(x0).lpNorm<Eigen::Infinity>(), 1e-8);
    const SolveResult r = solve(tx.problem, x0);
    ASSERT_EQ(r.report.status, SolveStatus::Converged);
    EXPECT_LE((r.x - x0).lpNorm<Eigen::Infinity>(), 1e-6);
}

TEST(Solver, Deterministic) {
    const Scenario sc = builtin_fixture("single-pipe");
    const RefinedNetwork rn = sc.refined();
    const Trajectory truth = grid_truth(rn, sc);
    const MeasurementSet m = synthesize(truth, rn, {1.0, 9});
    const Transcription tx = build_joint_estimation(rn, TimeGrid::of(sc), sc, m);
    const Vector x0 = default_start(tx, rn, sc, &m);
    const SolveResult a = solve(tx.problem, x0), b = solve(tx.problem, x0);
    EXPECT_EQ(a.report.objective, b.report.objective);
    EXPECT_EQ((a.x - b.x).norm(), 0.0);
    EXPECT_EQ(a.report.iterations, b.report.iterations);
}

TEST(Solver, RejectsBadStart) {
    NlpProblem p;
    p.add_variable(var(0), 0.0, 1.0);
    EXPECT_THROW(solve(p, Vector::Zero(2)), Error);
}
