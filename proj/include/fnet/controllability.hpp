#pragma once

#include "fnet/network.hpp"

#include <Eigen/Dense>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fnet {

/// Unweighted digraph distilled from a real-weighted network by
/// thresholding |W_ij| > theta (edge j -> i). Self-loops are kept.
struct DirectedGraph {
    int n = 0;
    double theta = 0.0;
    std::vector<std::pair<int, int>> edges; // (from, to)

    static DirectedGraph from_network(const Network& net, double theta = 0.05);
    static DirectedGraph from_edges(int n, std::vector<std::pair<int, int>> edges);

    [[nodiscard]] int edge_count() const { return static_cast<int>(edges.size()); }
};

/// |edges| / n^2; self-loops count in both numerator and denominator.
[[nodiscard]] double edge_fraction(const DirectedGraph& graph);

/// Maximum bipartite matching between out-copies and in-copies of the
/// nodes (Hopcroft-Karp). matched_in[i] is the tail matched into node i,
/// or -1.
struct MatchingResult {
    int size = 0;
    std::vector<int> matched_in;
};
[[nodiscard]] MatchingResult maximum_matching(const DirectedGraph& graph);

/// Driver nodes under linear nodal dynamics: unmatched in-copies of a
/// maximum matching; max(n - |matching|, 1) drivers in total. For a
/// perfectly matched graph the single driver may be any node (node 0 by
/// convention).
struct LndmResult {
    int driver_count = 0;
    std::vector<int> drivers;
    int matching_size = 0;
};
[[nodiscard]] LndmResult lndm_driver_count(const DirectedGraph& graph);

/// Numerical rank of the Krylov controllability subspace
/// span{B, WB, ..., W^{n-1}B} via incremental orthonormalization.
/// Acceptance of a candidate vector is relative to its own norm, which
/// keeps the rank invariant under positive rescaling of W.
struct KalmanRank {
    int rank = 0;
    bool fully_controllable = false;
};
[[nodiscard]] KalmanRank kalman_rank(const Eigen::MatrixXd& W, const Eigen::MatrixXd& B,
                                     double pivot_tol = 1e-8, int size_cap = 64);

/// Driver nodes under switchboard (edge) dynamics: every divergent node
/// (out-degree > in-degree), plus the lowest-index node of each balanced
/// connected component that has edges but no divergent node.
struct SbdResult {
    int driver_count = 0;
    std::vector<int> drivers;
    bool degenerate = false; // edgeless graph
};
[[nodiscard]] SbdResult sbd_driver_count(const DirectedGraph& graph);

/// Small-n verification of the switchboard controllability factor: builds
/// the line digraph adjacency M, seeds the Krylov sweep with the
/// sigmoid-ed input carried by each edge's tail, and degrades edge
/// (u -> v) at rate k2[v].
struct SbdRank {
    int rank = 0;
    bool full = false;
    int line_digraph_size = 0;
};
[[nodiscard]] SbdRank sbd_rank_check(const Network& net, const Eigen::VectorXd& input,
                                     double theta = 0.05, int size_cap = 256);

/// Line digraph adjacency: entry (b, a) = 1 when edge a's head is edge b's
/// tail. Exposed for the rank cross-checks.
[[nodiscard]] Eigen::MatrixXd line_digraph_adjacency(const DirectedGraph& graph);

struct ControllabilityReport {
    int n = 0;
    double theta = 0.0;
    double e = 0.0; // edge fraction
    int N_L = 0;
    double n_L = 0.0;
    int N_S = 0;
    double n_S = 0.0;
    bool sbd_degenerate = false;
};
[[nodiscard]] ControllabilityReport analyze_controllability(const Network& net,
                                                            double theta = 0.05);
[[nodiscard]] ControllabilityReport analyze_controllability(const DirectedGraph& graph);

[[nodiscard]] std::string controllability_report_to_json_string(const ControllabilityReport&);

/// Per-generation reports averaged arithmetically (Table-1 style bars).
struct ControllabilityTimeseries {
    int snapshots = 0;
    double e_bar = 0.0;
    double n_L_bar = 0.0;
    double n_S_bar = 0.0;

    void add(const ControllabilityReport& report);
};
[[nodiscard]] ControllabilityTimeseries controllability_timeseries(
    std::span<const ControllabilityReport> reports);

} // namespace fnet
