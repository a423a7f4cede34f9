#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "gasnet/experiments.hpp"

using namespace gasnet;

namespace {

struct SinglePipe : ::testing::Test {
    static void SetUpTestSuite() {
        sc = builtin_fixture("single-pipe");
        rn = sc.refined();
        truth = grid_truth(rn, sc);
    }
    static Scenario sc;
    static RefinedNetwork rn;
    static Trajectory truth;
};
Scenario SinglePipe::sc;
RefinedNetwork SinglePipe::rn;
Trajectory SinglePipe::truth;

} // namespace

TEST_F(SinglePipe, ZeroNoiseReproducesTruth) {
    const MeasurementSet m = synthesize(truth, rn, {0.0, 5});
    EXPECT_EQ(m.d_tilde, truth.d.topRows(1));
    EXPECT_EQ(m.rho_tilde, truth.rho.topRows(1));
}

TEST_F(SinglePipe, SeedDeterminesNoise) {
    const MeasurementSet a = synthesize(truth, rn, {2.0, 11}), b = synthesize(truth, rn, {2.0, 11});
    const MeasurementSet c = synthesize(truth, rn, {2.0, 12});
    EXPECT_EQ(a.d_tilde, b.d_tilde);
    EXPECT_EQ(a.rho_tilde, b.rho_tilde);
    EXPECT_NE(a.d_tilde, c.d_tilde);
}

TEST_F(SinglePipe, SelectiveNoise) {
    const MeasurementSet m = synthesize(truth, rn, {5.0, 3, true, false});
    EXPECT_EQ(m.rho_tilde, truth.rho.topRows(1));
    EXPECT_NE(m.d_tilde, truth.d.topRows(1));
}

TEST_F(SinglePipe, NoiseStandardDeviation) {
    // 1.5% of 68.094 kg/s is 1.0214 kg/s.
    const int N = 20000;
    Trajectory tr;
    tr.times.resize(N);
    tr.rho = Eigen::MatrixXd::Ones(rn.num_nodes() - 1, N);
    tr.d = Eigen::MatrixXd::Constant(1, N, sc.constants.nd_flow(68.094));
    const MeasurementSet m = synthesize(tr, rn, {1.5, 77});
    const Eigen::ArrayXd q = (m.d_tilde.row(0).array() - tr.d(0, 0)) * sc.constants.flux_scale();
    const double sd = std::sqrt(q.square().mean());
    EXPECT_NEAR(sd, 1.0214, 0.02);
    EXPECT_NEAR(q.mean(), 0.0, 0.03);
}

TEST_F(SinglePipe, ErrorsVanishOnTruth) {
    const ErrorReport e = error_report(truth, truth, rn, sc.constants);
    EXPECT_EQ(e.e_d_max, 0.0);
    EXPECT_EQ(e.e_p_max, 0.0);
    EXPECT_EQ(e.e_phi_max, 0.0);
    EXPECT_EQ(e.phi_excluded, 0u);
}

TEST_F(SinglePipe, FlowFloorExcludesSmallFlows) {
    Trajectory t;
    t.times = {0.0, 1.0};
    const auto M = static_cast<Eigen::Index>(rn.num_nodes() - rn.num_slack());
    const auto E = static_cast<Eigen::Index>(rn.num_edges());
    t.rho = Eigen::MatrixXd::Ones(M, 2);
    t.d = Eigen::MatrixXd::Zero(M, 2);
    t.d.row(0).setConstant(2.0);
    t.Phi.resize(E, 2);
    for (Eigen::Index e = 0; e < E; ++e) t.Phi.row(e).setConstant(sc.constants.nd_flow(5.0) / rn.X()[e]);
    t.Phi(3, 0) = sc.constants.nd_flow(0.5) / rn.X()[3];
    Trajectory est = t;
    est.Phi *= 1.1;
    est.Phi(3, 0) = 100.0 * t.Phi(3, 0);
    est.rho(2, 1) = 1.02;
    est.d(0, 0) = 1.0;
    const ErrorReport r = error_report(est, t, rn, sc.constants, 1.0);
    EXPECT_EQ(r.phi_excluded, 1u);
    EXPECT_EQ(r.phi_samples, static_cast<std::size_t>(2 * E - 1));
    EXPECT_NEAR(r.e_phi_max, 10.0, 1e-9);
    EXPECT_NEAR(r.e_phi_avg, 10.0, 1e-9);
    EXPECT_NEAR(r.e_p_max, 2.0, 1e-12);
    EXPECT_NEAR(r.e_p_avg, 2.0 / (2.0 * static_cast<double>(M)), 1e-12);
    EXPECT_NEAR(r.e_d_max, 50.0, 1e-12);
    EXPECT_NEAR(r.e_d_avg, 25.0, 1e-12);
    const ErrorReport none = error_report(est, t, rn, sc.constants, 1e6);
    EXPECT_TRUE(std::isnan(none.e_phi_max));
    EXPECT_FALSE(none.phi_applicable());
}

TEST_F(SinglePipe, NoiselessJointEstimationRecoversFriction) {
    EstimationOptions opt;
    opt.formulation = Formulation::Joint;
    const BiasReport b = bias_study(sc, truth, 0.0, {1, 2}, opt);
    ASSERT_EQ(b.runs_ok, 2u);
    EXPECT_NEAR(b.relative_bias[0], 0.0, 1e-4);
    EXPECT_EQ(b.weight[0], 1.0);
}

TEST_F(SinglePipe, SmallNoiseGivesSmallPressureError) {
    const EstimationResult r = run_estimation(rn, sc, truth, {0.5, 3});
    ASSERT_EQ(r.report.status, SolveStatus::Converged);
    EXPECT_LT(r.errors.e_p_avg, 0.5);
    EXPECT_LT(r.errors.e_d_avg, 2.0);
}

TEST_F(SinglePipe, SweepShape) {
    const std::vector<double> levels = {0.5, 1.0, 1.5, 2.0};
    const auto cells = sweep(sc, truth, levels, {1, 2});
    ASSERT_EQ(cells.size(), 4u);
    for (std::size_t l = 0; l < 4; ++l) {
        EXPECT_EQ(cells[l].level, levels[l]);
        EXPECT_EQ(cells[l].runs_ok, 2u);
        EXPECT_TRUE(std::isfinite(cells[l].mean.e_p_avg));
    }
    EXPECT_LT(cells[0].mean.e_p_avg, cells[3].mean.e_p_avg);
    EXPECT_LT(cells[0].mean.e_d_avg, cells[3].mean.e_d_avg);
}

TEST(ParallelMap, PreservesOrder) {
    const auto v = parallel_map<int>(100, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], static_cast<int>(i * i));
}

TEST(Bias, WeightsFollowPipeLength) {
    const Scenario sc = builtin_fixture("twenty-five-node");
    std::vector<double> f;
    for (const auto& p : sc.network.pipes()) f.push_back(p.friction * 1.1);
    const BiasReport b = bias_report(sc.network, f, 3, 0);
    const double Lmax = sc.network.max_pipe_length();
    for (std::size_t p = 0; p < f.size(); ++p) {
        EXPECT_NEAR(b.relative_bias[p], 0.1, 1e-12);
        EXPECT_DOUBLE_EQ(b.weight[p], sc.network.pipes()[p].length / Lmax);
        EXPECT_NEAR(b.weighted_bias[p], 0.1 * b.weight[p], 1e-12);
    }
    EXPECT_EQ(*std::max_element(b.weight.begin(), b.weight.end()), 1.0);
}

TEST(Bias, ShortPipesCarryLargerRelativeBias) {
    const Scenario sc = builtin_fixture("twenty-five-node");
    const RefinedNetwork rn = sc.refined();
    const Trajectory truth = grid_truth(rn, sc);
    std::vector<std::uint64_t> seeds(30);
    std::iota(seeds.begin(), seeds.end(), 1);
    const BiasReport b = bias_study(sc, truth, 1.5, seeds);
    ASSERT_GE(b.runs_ok, 25u);
    double short_sum = 0, long_sum = 0;
    int short_n = 0, long_n = 0;
    for (std::size_t p = 0; p < b.weight.size(); ++p) {
        if (b.weight[p] < 0.5) {
            short_sum += std::abs(b.relative_bias[p]);
            ++short_n;
        } else {
            long_sum += std::abs(b.relative_bias[p]);
            ++long_n;
        }
    }
    ASSERT_GT(short_n, 0);
    ASSERT_GT(long_n, 0);
    EXPECT_GT(short_sum / short_n, long_sum / long_n);
}
