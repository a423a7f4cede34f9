#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "gasnet/error.hpp"
#include "gasnet/profiles.hpp"

namespace gasnet {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

enum class JunctionKind { Slack, NonSlack };

/// Density bounds are nondimensional.
struct Junction {
    int id = 0;
    JunctionKind kind = JunctionKind::NonSlack;
    double rho_min = 0.0;
    double rho_max = 0.0;

    bool slack() const { return kind == JunctionKind::Slack; }
};

struct Pipe {
    int id = 0;
    int from = 0; // junction id
    int to = 0;   // junction id
    double length = 0.0;   // m
    double diameter = 0.0; // m
    double friction = 0.0; // Darcy-Weisbach lambda

    double area() const { return std::numbers::pi * diameter * diameter / 4.0; }
};

/// From: the compressor boosts density entering the pipe at its `from` junction.
/// To: it boosts density entering the pipe at its `to` junction.
enum class CompressorEnd { From, To };

struct Compressor {
    int pipe = 0; // pipe id
    CompressorEnd end = CompressorEnd::From;
    Profile ratio; // nondimensional time
};

class Network {
public:
    Network() = default;
    Network(std::vector<Junction> junctions, std::vector<Pipe> pipes, std::vector<Compressor> compressors)
        : junctions_(std::move(junctions)), pipes_(std::move(pipes)), compressors_(std::move(compressors)) {
        validate();
    }

    const std::vector<Junction>& junctions() const { return junctions_; }
    const std::vector<Pipe>& pipes() const { return pipes_; }
    const std::vector<Compressor>& compressors() const { return compressors_; }

    std::size_t junction_index(int id) const {
        auto it = junction_index_.find(id);
        if (it == junction_index_.end()) detail::fail(ErrorKind::InvalidArgument, "unknown junction id " + std::to_string(id));
        return it->second;
    }
    std::size_t pipe_index(int id) const {
        auto it = pipe_index_.find(id);
        if (it == pipe_index_.end()) detail::fail(ErrorKind::InvalidArgument, "unknown pipe id " + std::to_string(id));
        return it->second;
    }

    std::vector<std::size_t> slack_junctions() const { return by_kind(true); }
    std::vector<std::size_t> nonslack_junctions() const { return by_kind(false); }

    double max_pipe_length() const {
        double L = 0.0;
        for (const auto& p : pipes_) L = std::max(L, p.length);
        return L;
    }

    /// Replaces the compressor list (same topology); used for scenario perturbations.
    Network with_compressors(std::vector<Compressor> compressors) const {
        return Network(junctions_, pipes_, std::move(compressors));
    }

private:
    std::vector<std::size_t> by_kind(bool slack) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < junctions_.size(); ++i)
            if (junctions_[i].slack() == slack) out.push_back(i);
        return out;
    }

    void validate() {
        junction_index_.clear();
        pipe_index_.clear();
        detail::require(!junctions_.empty(), "network has no junctions");
        std::size_t slack_count = 0;
        for (std::size_t i = 0; i < junctions_.size(); ++i) {
            const auto& j = junctions_[i];
            detail::require(junction_index_.emplace(j.id, i).second, "duplicate junction id " + std::to_string(j.id));
            detail::require(j.rho_min > 0.0 && j.rho_min < j.rho_max,
                            "junction " + std::to_string(j.id) + ": need 0 < rho_min < rho_max");
            slack_count += j.slack() ? 1 : 0;
        }
        if (slack_count == 0) detail::fail(ErrorKind::Topology, "network needs at least one slack junction");
        for (std::size_t k = 0; k < pipes_.size(); ++k) {
            const auto& p = pipes_[k];
            detail::require(pipe_index_.emplace(p.id, k).second, "duplicate pipe id " + std::to_string(p.id));
            detail::require(p.from != p.to, "pipe " + std::to_string(p.id) + " is a self-loop");
            junction_index(p.from);
            junction_index(p.to);
            detail::require(p.length > 0.0 && p.diameter > 0.0, "pipe " + std::to_string(p.id) + ": non-positive geometry");
            detail::require(p.friction > 0.0 && p.friction < 1.0, "pipe " + std::to_string(p.id) + ": friction outside (0,1)");
        }
        std::vector<char> used(2 * pipes_.size(), 0);
        for (const auto& c : compressors_) {
            const std::size_t k = pipe_index(c.pipe);
            const std::size_t slot = 2 * k + (c.end == CompressorEnd::From ? 0 : 1);
            detail::require(!used[slot], "two compressors on the same end of pipe " + std::to_string(c.pipe));
            used[slot] = 1;
        }
        // connectivity by union-find
        std::vector<std::size_t> parent(junctions_.size());
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](std::size_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (const auto& p : pipes_) parent[find(junction_index(p.from))] = find(junction_index(p.to));
        for (std::size_t i = 0; i < junctions_.size(); ++i)
            if (find(i) != find(0)) detail::fail(ErrorKind::Topology, "network is not connected");
    }

    std::vector<Junction> junctions_;
    std::vector<Pipe> pipes_;
    std::vector<Compressor> compressors_;
    std::unordered_map<int, std::size_t> junction_index_;
    std::unordered_map<int, std::size_t> pipe_index_;
};

struct RefinedNode {
    int junction = -1; // index into parent junctions; -1 for auxiliary nodes
    int pipe = -1;     // parent pipe index for auxiliary nodes
    bool slack = false;
    double rho_min = 0.0;
    double rho_max = 0.0;
};

struct RefinedEdge {
    int from = 0; // refined node index
    int to = 0;
    int pipe = 0;    // parent pipe index (the surjection mu)
    int segment = 0; // position along the parent, from its `from` end
    double length = 0.0;   // nondimensional
    double diameter = 0.0; // m
    double area = 0.0;     // m^2
    double friction = 0.0;
    int compressor_from = -1; // index into parent compressors
    int compressor_to = -1;
};

struct Incidence {
    SparseMatrix A;  // |V| x |E|
    SparseMatrix As; // slack rows
    SparseMatrix Ad; // non-slack rows
};

/// Spatially refined image of a Network. Node order: slack junctions, non-slack
/// junctions, then auxiliary nodes pipe by pipe. Immutable after construction.
class RefinedNetwork {
public:
    const Network& parent() const { return parent_; }
    const std::vector<RefinedNode>& nodes() const { return nodes_; }
    const std::vector<RefinedEdge>& edges() const { return edges_; }
    std::size_t num_nodes() const { return nodes_.size(); }
    std::size_t num_edges() const { return edges_.size(); }
    std::size_t num_slack() const { return num_slack_; }
    std::size_t num_nonslack() const { return nodes_.size() - num_slack_; }
    /// Physical non-slack junctions occupy refined rows num_slack() .. num_slack()+num_physical()-1.
    std::size_t num_physical() const { return num_physical_; }
    std::size_t num_pipes() const { return parent_.pipes().size(); }
    double delta() const { return delta_; }
    double ell0() const { return ell0_; }

    /// Refined node index of a parent junction.
    std::size_t node_of_junction(std::size_t junction_index) const { return junction_node_.at(junction_index); }
    /// Refined edges of a parent pipe, in order from its `from` end.
    const std::vector<int>& edges_of_pipe(std::size_t pipe_index) const { return pipe_edges_.at(pipe_index); }

    const Eigen::VectorXd& Lambda() const { return lambda_; }
    const Eigen::VectorXd& K() const { return k_; }
    const Eigen::VectorXd& X() const { return x_; }
    const Incidence& incidence() const { return incidence_; }

    double ratio_from(std::size_t k, double t) const { return ratio(edges_[k].compressor_from, t); }
    double ratio_to(std::size_t k, double t) const { return ratio(edges_[k].compressor_to, t); }
    double ratio_from_deriv(std::size_t k, double t) const { return ratio_deriv(edges_[k].compressor_from, t); }
    double ratio_to_deriv(std::size_t k, double t) const { return ratio_deriv(edges_[k].compressor_to, t); }

    /// K entries ell0 * lambda / D for a per-parent-pipe friction vector.
    Eigen::VectorXd K_for_friction(const Eigen::VectorXd& friction_per_pipe) const {
        detail::require(static_cast<std::size_t>(friction_per_pipe.size()) == num_pipes(), "friction vector size mismatch");
        Eigen::VectorXd K(num_edges());
        for (std::size_t k = 0; k < edges_.size(); ++k)
            K[k] = ell0_ * friction_per_pipe[edges_[k].pipe] / edges_[k].diameter;
        return K;
    }

    Eigen::VectorXd nominal_friction() const {
        Eigen::VectorXd f(num_pipes());
        for (std::size_t p = 0; p < num_pipes(); ++p) f[p] = parent_.pipes()[p].friction;
        return f;
    }

private:
    friend RefinedNetwork refine(const Network& net, double delta, std::optional<double> ell0);

    double ratio(int c, double t) const {
        if (c < 0) return 1.0;
        detail::require(std::isfinite(t), "compressor profile undefined at non-finite time");
        return parent_.compressors()[static_cast<std::size_t>(c)].ratio.eval(t);
    }
    double ratio_deriv(int c, double t) const {
        if (c < 0) return 0.0;
        return parent_.compressors()[static_cast<std::size_t>(c)].ratio.eval_deriv(t);
    }

    Network parent_;
    std::vector<RefinedNode> nodes_;
    std::vector<RefinedEdge> edges_;
    std::vector<std::size_t> junction_node_;
    std::vector<std::vector<int>> pipe_edges_;
    std::size_t num_slack_ = 0;
    std::size_t num_physical_ = 0;
    double delta_ = 0.0;
    double ell0_ = 0.0;
    Eigen::VectorXd lambda_, k_, x_;
    Incidence incidence_;
};

inline Incidence build_incidence(const std::vector<RefinedEdge>& edges, std::size_t num_nodes, std::size_t num_slack) {
    std::vector<Triplet> t, ts, td;
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const int col = static_cast<int>(k);
        for (auto [node, v] : {std::pair{edges[k].to, 1.0}, std::pair{edges[k].from, -1.0}}) {
            t.emplace_back(node, col, v);
            const auto n = static_cast<std::size_t>(node);
            if (n < num_slack) ts.emplace_back(node, col, v);
            else td.emplace_back(static_cast<int>(n - num_slack), col, v);
        }
    }
    const int E = static_cast<int>(edges.size());
    Incidence inc{SparseMatrix(static_cast<int>(num_nodes), E), SparseMatrix(static_cast<int>(num_slack), E),
                  SparseMatrix(static_cast<int>(num_nodes - num_slack), E)};
    inc.A.setFromTriplets(t.begin(), t.end());
    inc.As.setFromTriplets(ts.begin(), ts.end());
    inc.Ad.setFromTriplets(td.begin(), td.end());
    return inc;
}

/// Splits every pipe into ceil(L/delta) equal segments. ell0 defaults to the longest pipe.
inline RefinedNetwork refine(const Network& net, double delta, std::optional<double> ell0 = std::nullopt) {
    detail::require(std::isfinite(delta) && delta > 0.0, "refinement length must be positive");
    RefinedNetwork rn;
    rn.parent_ = net;
    rn.delta_ = delta;
    rn.ell0_ = ell0.value_or(net.max_pipe_length());
    detail::require(rn.ell0_ > 0.0, "nominal length must be positive");

    const auto& js = net.junctions();
    rn.junction_node_.assign(js.size(), 0);
    auto push_junction = [&](std::size_t i) {
        rn.junction_node_[i] = rn.nodes_.size();
        rn.nodes_.push_back({static_cast<int>(i), -1, js[i].slack(), js[i].rho_min, js[i].rho_max});
    };
    for (std::size_t i : net.slack_junctions()) push_junction(i);
    rn.num_slack_ = rn.nodes_.size();
    for (std::size_t i : net.nonslack_junctions()) push_junction(i);
    rn.num_physical_ = rn.nodes_.size() - rn.num_slack_;

    std::vector<int> comp_from(net.pipes().size(), -1), comp_to(net.pipes().size(), -1);
    for (std::size_t c = 0; c < net.compressors().size(); ++c) {
        const auto& comp = net.compressors()[c];
        const std::size_t p = net.pipe_index(comp.pipe);
        (comp.end == CompressorEnd::From ? comp_from : comp_to)[p] = static_cast<int>(c);
    }

    rn.pipe_edges_.resize(net.pipes().size());
    for (std::size_t p = 0; p < net.pipes().size(); ++p) {
        const auto& pipe = net.pipes()[p];
        const auto& jf = js[net.junction_index(pipe.from)];
        const auto& jt = js[net.junction_index(pipe.to)];
        const int n = std::max(1, static_cast<int>(std::ceil(pipe.length / delta - 1e-12)));
        const double seg = pipe.length / n;
        const double lo = std::min(jf.rho_min, jt.rho_min);
        const double hi = std::max(jf.rho_max, jt.rho_max);
        int prev = static_cast<int>(rn.junction_node_[net.junction_index(pipe.from)]);
        for (int s = 0; s < n; ++s) {
            int next;
            if (s + 1 == n) {
                next = static_cast<int>(rn.junction_node_[net.junction_index(pipe.to)]);
            } else {
                next = static_cast<int>(rn.nodes_.size());
                rn.nodes_.push_back({-1, static_cast<int>(p), false, lo, hi});
            }
            RefinedEdge e;
            e.from = prev;
            e.to = next;
            e.pipe = static_cast<int>(p);
            e.segment = s;
            e.length = seg / rn.ell0_;
            e.diameter = pipe.diameter;
            e.area = pipe.area();
            e.friction = pipe.friction;
            e.compressor_from = (s == 0) ? comp_from[p] : -1;
            e.compressor_to = (s + 1 == n) ? comp_to[p] : -1;
            rn.pipe_edges_[p].push_back(static_cast<int>(rn.edges_.size()));
            rn.edges_.push_back(e);
            prev = next;
        }
    }

    const std::size_t E = rn.edges_.size();
    rn.lambda_.resize(static_cast<Eigen::Index>(E));
    rn.k_.resize(static_cast<Eigen::Index>(E));
    rn.x_.resize(static_cast<Eigen::Index>(E));
    for (std::size_t k = 0; k < E; ++k) {
        const auto& e = rn.edges_[k];
        rn.lambda_[k] = e.length;
        rn.k_[k] = rn.ell0_ * e.friction / e.diameter;
        rn.x_[k] = e.area;
    }
    rn.incidence_ = build_incidence(rn.edges_, rn.nodes_.size(), rn.num_slack_);
    return rn;
}

inline Incidence incidence(const RefinedNetwork& rn) { return rn.incidence(); }

/// Compressor-weighted incidence B(t): +ratio_to where an edge enters a node,
/// -ratio_from where it leaves, with the slack/non-slack row blocks.
inline Incidence weighted_incidence(const RefinedNetwork& rn, double t) {
    detail::require(std::isfinite(t), "weighted_incidence: time must be finite");
    const std::size_t b = rn.num_slack();
    std::vector<Triplet> tb, ts, td;
    for (std::size_t k = 0; k < rn.num_edges(); ++k) {
        const auto& e = rn.edges()[k];
        const int col = static_cast<int>(k);
        for (auto [node, v] : {std::pair{e.to, rn.ratio_to(k, t)}, std::pair{e.from, -rn.ratio_from(k, t)}}) {
            tb.emplace_back(node, col, v);
            const auto n = static_cast<std::size_t>(node);
            if (n < b) ts.emplace_back(node, col, v);
            else td.emplace_back(static_cast<int>(n - b), col, v);
        }
    }
    const int V = static_cast<int>(rn.num_nodes()), E = static_cast<int>(rn.num_edges());
    Incidence out{SparseMatrix(V, E), SparseMatrix(static_cast<int>(b), E), SparseMatrix(V - static_cast<int>(b), E)};
    out.A.setFromTriplets(tb.begin(), tb.end());
    out.As.setFromTriplets(ts.begin(), ts.end());
    out.Ad.setFromTriplets(td.begin(), td.end());
    return out;
}

} // namespace gasnet
