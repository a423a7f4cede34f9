#include <random>

#include <gtest/gtest.h>

#include "gasnet/fixtures.hpp"
#include "support/exact_rank.hpp"

using namespace gasnet;

namespace {

Network line_network(double length_m, bool compressor = false) {
    std::vector<Junction> js{{1, JunctionKind::Slack, 0.5, 2.0}, {2, JunctionKind::NonSlack, 0.5, 2.0}};
    std::vector<Pipe> ps{{1, 1, 2, length_m, 0.5, 0.011}};
    std::vector<Compressor> cs;
    if (compressor) cs.push_back({1, CompressorEnd::From, Profile(SinusoidSum{10.0, 1.2, {{0.05, 1, 0.0}}})});
    return Network(js, ps, cs);
}

Eigen::MatrixXd dense(const SparseMatrix& m) { return Eigen::MatrixXd(m); }

} // namespace

TEST(Refine, SinglePipeAtFiveKm) {
    const RefinedNetwork rn = refine(line_network(100000.0), 5000.0);
    EXPECT_EQ(rn.num_nodes(), 21u);
    EXPECT_EQ(rn.num_edges(), 20u);
    for (double L : std::vector<double>(rn.Lambda().data(), rn.Lambda().data() + rn.Lambda().size())) EXPECT_NEAR(L, 0.05, 1e-15);
}

TEST(Refine, ShortPipeUnchanged) {
    const RefinedNetwork rn = refine(line_network(4000.0), 5000.0);
    EXPECT_EQ(rn.num_edges(), 1u);
    EXPECT_EQ(rn.num_nodes(), 2u);
}

TEST(Refine, SevenKmPipeSplitsInTwo) {
    const RefinedNetwork rn = refine(line_network(7000.0), 5000.0, 7000.0);
    ASSERT_EQ(rn.num_edges(), 2u);
    const double seg = rn.Lambda()[0] * rn.ell0();
    EXPECT_NEAR(seg, 3500.0, 1e-9);
    EXPECT_LT(5000.0 * 7.0 / 12.0, seg);
    EXPECT_LT(seg, 5000.0);
}

TEST(Incidence, TwoNodes) {
    const RefinedNetwork rn = refine(line_network(1000.0), 5000.0);
    const Eigen::MatrixXd A = dense(rn.incidence().A);
    ASSERT_EQ(A.rows(), 2);
    ASSERT_EQ(A.cols(), 1);
    EXPECT_EQ(A(0, 0), -1.0);
    EXPECT_EQ(A(1, 0), 1.0);
}

TEST(Incidence, FourNodeLoop) {
    const Scenario sc = builtin_fixture("four-node");
    EXPECT_EQ(sc.network.compressors().size(), 2u);
    const std::size_t V = sc.network.junctions().size(), E = sc.network.pipes().size();
    EXPECT_EQ(E - V + 1, 1u); // one independent loop
    const RefinedNetwork rn = refine(sc.network, 1e9); // unrefined
    const Eigen::MatrixXd A = dense(rn.incidence().A);
    for (Eigen::Index c = 0; c < A.cols(); ++c) {
        EXPECT_EQ(A.col(c).sum(), 0.0);
        EXPECT_EQ(A.col(c).cwiseAbs().sum(), 2.0);
    }
}

TEST(Incidence, TwentyFiveNodeTree) {
    const Scenario sc = builtin_fixture("twenty-five-node");
    EXPECT_EQ(sc.network.junctions().size(), 25u);
    EXPECT_EQ(sc.network.pipes().size(), 24u);
    EXPECT_EQ(sc.network.compressors().size(), 5u);
}

TEST(Incidence, RandomConnectedGraphsHaveRankNMinusOne) {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 7);
        std::vector<std::pair<int, int>> edges;
        for (int v = 1; v < n; ++v) edges.emplace_back(static_cast<int>(rng() % v), v);
        const int extra = static_cast<int>(rng() % 4);
        for (int k = 0; k < extra; ++k) {
            const int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
            if (a != b) edges.emplace_back(a, b);
        }
        std::vector<std::vector<std::int64_t>> A(n, std::vector<std::int64_t>(edges.size(), 0));
        for (std::size_t k = 0; k < edges.size(); ++k) {
            A[edges[k].first][k] = -1;
            A[edges[k].second][k] = 1;
        }
        EXPECT_EQ(exact_rank(A), n - 1);
    }
}

TEST(Incidence, WeightedIncidenceWithoutCompressorsIsA) {
    const RefinedNetwork rn = refine(line_network(20000.0), 5000.0);
    for (double t : {0.0, 1.3, 7.0}) EXPECT_EQ((dense(weighted_incidence(rn, t).A) - dense(rn.incidence().A)).norm(), 0.0);
}

TEST(Incidence, SourceCompressorScalesSourceEntry) {
    const RefinedNetwork rn = refine(line_network(20000.0, true), 5000.0);
    const double t = 2.0;
    const double alpha = rn.parent().compressors()[0].ratio.eval(t);
    const Eigen::MatrixXd B = dense(weighted_incidence(rn, t).A), A = dense(rn.incidence().A);
    const int e0 = rn.edges_of_pipe(0).front();
    const int src = rn.edges()[static_cast<std::size_t>(e0)].from;
    EXPECT_DOUBLE_EQ(B(src, e0), -alpha);
    Eigen::MatrixXd D = B - A;
    D(src, e0) = 0.0;
    EXPECT_EQ(D.norm(), 0.0);
}

TEST(Incidence, UnitRatioGivesA) {
    std::vector<Junction> js{{1, JunctionKind::Slack, 0.5, 2.0}, {2, JunctionKind::NonSlack, 0.5, 2.0}};
    const Network net(js, {{1, 1, 2, 20000.0, 0.5, 0.011}}, {{1, CompressorEnd::To, Profile::constant(1.0, 10.0)}});
    const RefinedNetwork rn = refine(net, 5000.0);
    EXPECT_EQ((dense(weighted_incidence(rn, 3.0).A) - dense(rn.incidence().A)).norm(), 0.0);
}

TEST(Network, Validation) {
    std::vector<Junction> js{{1, JunctionKind::Slack, 0.5, 2.0}, {2, JunctionKind::NonSlack, 0.5, 2.0},
                             {3, JunctionKind::NonSlack, 0.5, 2.0}};
    try {
        Network(js, {{1, 1, 2, 1000.0, 0.5, 0.01}}, {});
        FAIL() << "disconnected network accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Topology);
    }
    EXPECT_THROW(Network(js, {{1, 1, 1, 1000.0, 0.5, 0.01}}, {}), Error);
    EXPECT_THROW(Network(js, {{1, 1, 2, 1000.0, 0.5, 0.01}, {2, 2, 9, 1000.0, 0.5, 0.01}}, {}), Error);
    js[0].kind = JunctionKind::NonSlack;
    try {
        Network(js, {{1, 1, 2, 1000.0, 0.5, 0.01}, {2, 2, 3, 1000.0, 0.5, 0.01}}, {});
        FAIL() << "network without slack accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Topology);
    }
    EXPECT_THROW(refine(line_network(1000.0), 0.0), Error);
}

TEST(Refine, NodeOrderAndAuxiliaryBounds) {
    const Scenario sc = builtin_fixture("four-node");
    const RefinedNetwork rn = sc.refined();
    EXPECT_EQ(rn.num_nodes(), 44u);
    EXPECT_EQ(rn.num_edges(), 44u);
    EXPECT_EQ(rn.num_slack(), 1u);
    EXPECT_EQ(rn.num_physical(), 3u);
    for (std::size_t i = 0; i < rn.num_nodes(); ++i) {
        const auto& n = rn.nodes()[i];
        if (i < 4) EXPECT_GE(n.junction, 0);
        else EXPECT_EQ(n.junction, -1);
    }
    // every parent pipe is a chain of edges from its from junction to its to junction
    for (std::size_t p = 0; p < rn.num_pipes(); ++p) {
        const auto& es = rn.edges_of_pipe(p);
        const auto& pipe = sc.network.pipes()[p];
        EXPECT_EQ(rn.edges()[static_cast<std::size_t>(es.front())].from,
                  static_cast<int>(rn.node_of_junction(sc.network.junction_index(pipe.from))));
        EXPECT_EQ(rn.edges()[static_cast<std::size_t>(es.back())].to,
                  static_cast<int>(rn.node_of_junction(sc.network.junction_index(pipe.to))));
        double total = 0.0;
        for (int e : es) total += rn.Lambda()[e];
        EXPECT_NEAR(total * rn.ell0(), pipe.length, 1e-6);
    }
}
