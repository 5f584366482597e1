#include "fnet/controllability.hpp"

#include "fnet/errors.hpp"
#include "fnet/simulation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <set>

namespace fnet {

DirectedGraph DirectedGraph::from_network(const Network& net, double theta) {
    DirectedGraph graph;
    graph.n = net.n_nodes;
    graph.theta = theta;
    for (int i = 0; i < net.n_nodes; ++i) {
        for (int j = 0; j < net.n_nodes; ++j) {
            if (std::abs(net.weights(i, j)) > theta) graph.edges.emplace_back(j, i);
        }
    }
    return graph;
}

DirectedGraph DirectedGraph::from_edges(int n, std::vector<std::pair<int, int>> edges) {
    DirectedGraph graph;
    graph.n = n;
    std::set<std::pair<int, int>> seen;
    for (const auto& [from, to] : edges) {
        if (from < 0 || from >= n || to < 0 || to >= n) {
            throw ContractError("DirectedGraph: edge endpoint out of range");
        }
        if (!seen.insert({from, to}).second) {
            throw ContractError("DirectedGraph: duplicate edge");
        }
    }
    graph.edges = std::move(edges);
    return graph;
}

double edge_fraction(const DirectedGraph& graph) {
    if (graph.n == 0) return 0.0;
    return static_cast<double>(graph.edge_count()) /
           (static_cast<double>(graph.n) * graph.n);
}

// Hopcroft-Karp on the bipartite representation: left = out-copies (tails),
// right = in-copies (heads), one bipartite edge per directed edge.
MatchingResult maximum_matching(const DirectedGraph& graph) {
    const int n = graph.n;
    std::vector<std::vector<int>> adj(n);
    for (const auto& [from, to] : graph.edges) adj[from].push_back(to);

    constexpr int kInf = std::numeric_limits<int>::max();
    std::vector<int> match_left(n, -1);  // tail -> matched head
    std::vector<int> match_right(n, -1); // head -> matched tail
    std::vector<int> dist(n);

    auto bfs = [&]() -> bool {
        std::deque<int> queue;
        for (int u = 0; u < n; ++u) {
            if (match_left[u] == -1) {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = kInf;
            }
        }
        bool found_free = false;
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            for (int v : adj[u]) {
                const int w = match_right[v];
                if (w == -1) {
                    found_free = true;
                } else if (dist[w] == kInf) {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        return found_free;
    };

    std::function<bool(int)> dfs = [&](int u) -> bool {
        for (int v : adj[u]) {
            const int w = match_right[v];
            if (w == -1 || (dist[w] == dist[u] + 1 && dfs(w))) {
                match_left[u] = v;
                match_right[v] = u;
                return true;
            }
        }
        dist[u] = kInf;
        return false;
    };

    int size = 0;
    while (bfs()) {
        for (int u = 0; u < n; ++u) {
            if (match_left[u] == -1 && dfs(u)) ++size;
        }
    }

    MatchingResult result;
    result.size = size;
    result.matched_in = std::move(match_right);
    return result;
}

LndmResult lndm_driver_count(const DirectedGraph& graph) {
    const MatchingResult matching = maximum_matching(graph);
    LndmResult result;
    result.matching_size = matching.size;
    for (int i = 0; i < graph.n; ++i) {
        if (matching.matched_in[i] == -1) result.drivers.push_back(i);
    }
    if (result.drivers.empty()) result.drivers.push_back(0); // perfect matching
    result.driver_count = std::max(graph.n - matching.size, 1);
    return result;
}

KalmanRank kalman_rank(const Eigen::MatrixXd& W, const Eigen::MatrixXd& B, double pivot_tol,
                       int size_cap) {
    const int n = static_cast<int>(W.rows());
    if (W.cols() != n) throw ContractError("kalman_rank: W must be square");
    if (B.rows() != n) throw ContractError("kalman_rank: B row count must equal n");
    if (n > size_cap) {
        throw SizeCapError("kalman_rank: n exceeds the rank-test size cap; "
                           "use the structural driver counts instead");
    }

    std::vector<Eigen::VectorXd> basis;
    Eigen::MatrixXd block = B;
    KalmanRank result;
    for (int power = 0; power < n && result.rank < n; ++power) {
        if (power > 0) block = W * block;
        for (int c = 0; c < block.cols() && result.rank < n; ++c) {
            Eigen::VectorXd v = block.col(c);
            const double original_norm = v.norm();
            if (original_norm == 0.0) continue;
            // Two Gram-Schmidt passes keep the basis orthogonal to working
            // precision.
            for (int pass = 0; pass < 2; ++pass) {
                for (const auto& q : basis) v -= q.dot(v) * q;
            }
            const double residual_norm = v.norm();
            if (residual_norm > pivot_tol * original_norm) {
                basis.push_back(v / residual_norm);
                ++result.rank;
            }
        }
    }
    result.fully_controllable = result.rank == n;
    return result;
}

SbdResult sbd_driver_count(const DirectedGraph& graph) {
    SbdResult result;
    if (graph.edges.empty()) {
        result.degenerate = true;
        return result;
    }
    const int n = graph.n;
    std::vector<int> out_deg(n, 0), in_deg(n, 0);
    std::vector<std::vector<int>> undirected(n);
    for (const auto& [from, to] : graph.edges) {
        ++out_deg[from];
        ++in_deg[to];
        undirected[from].push_back(to);
        undirected[to].push_back(from);
    }

    std::vector<std::uint8_t> divergent(n, 0);
    for (int v = 0; v < n; ++v) {
        if (out_deg[v] > in_deg[v]) {
            divergent[v] = 1;
            result.drivers.push_back(v);
        }
    }

    // Weakly connected components over nodes with at least one edge; a
    // component with no divergent node is balanced and contributes one pick.
    std::vector<int> component(n, -1);
    int n_components = 0;
    for (int v = 0; v < n; ++v) {
        if (component[v] != -1 || (out_deg[v] == 0 && in_deg[v] == 0)) continue;
        const int c = n_components++;
        std::deque<int> queue{v};
        component[v] = c;
        int lowest = v;
        bool has_divergent = false;
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            if (divergent[u]) has_divergent = true;
            lowest = std::min(lowest, u);
            for (int w : undirected[u]) {
                if (component[w] == -1) {
                    component[w] = c;
                    queue.push_back(w);
                }
            }
        }
        if (!has_divergent) result.drivers.push_back(lowest);
    }
    std::sort(result.drivers.begin(), result.drivers.end());
    result.driver_count = static_cast<int>(result.drivers.size());
    return result;
}

Eigen::MatrixXd line_digraph_adjacency(const DirectedGraph& graph) {
    const int m = graph.edge_count();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
            if (graph.edges[a].second == graph.edges[b].first) M(b, a) = 1.0;
        }
    }
    return M;
}

SbdRank sbd_rank_check(const Network& net, const Eigen::VectorXd& input, double theta,
                       int size_cap) {
    if (input.size() != net.n_nodes) {
        throw ContractError("sbd_rank_check: input length does not match n_nodes");
    }
    const DirectedGraph graph = DirectedGraph::from_network(net, theta);
    const int m = graph.edge_count();
    if (m == 0) throw ContractError("sbd_rank_check: graph has no edges (empty line digraph)");
    if (m > size_cap) {
        throw SizeCapError("sbd_rank_check: line digraph exceeds the size cap");
    }

    Eigen::MatrixXd M = line_digraph_adjacency(graph);
    Eigen::VectorXd fI(m);
    for (int a = 0; a < m; ++a) {
        const auto& [tail, head] = graph.edges[a];
        fI[a] = sigmoid(input[tail]);
        M(a, a) -= net.k2[head];
    }

    const KalmanRank kr = kalman_rank(M, fI, 1e-8, size_cap);
    SbdRank result;
    result.rank = kr.rank;
    result.full = kr.fully_controllable;
    result.line_digraph_size = m;
    return result;
}

ControllabilityReport analyze_controllability(const DirectedGraph& graph) {
    ControllabilityReport report;
    report.n = graph.n;
    report.theta = graph.theta;
    report.e = edge_fraction(graph);
    const LndmResult lndm = lndm_driver_count(graph);
    report.N_L = lndm.driver_count;
    report.n_L = static_cast<double>(report.N_L) / graph.n;
    const SbdResult sbd = sbd_driver_count(graph);
    report.N_S = sbd.driver_count;
    report.n_S = static_cast<double>(report.N_S) / graph.n;
    report.sbd_degenerate = sbd.degenerate;
    return report;
}

ControllabilityReport analyze_controllability(const Network& net, double theta) {
    return analyze_controllability(DirectedGraph::from_network(net, theta));
}

std::string controllability_report_to_json_string(const ControllabilityReport& report) {
    nlohmann::ordered_json doc;
    doc["schema"] = "controllability_report.v1";
    doc["nodes"] = report.n;
    doc["theta"] = report.theta;
    doc["e"] = report.e;
    doc["N_L"] = report.N_L;
    doc["n_L"] = report.n_L;
    doc["N_S"] = report.N_S;
    doc["n_S"] = report.n_S;
    doc["sbd_degenerate"] = report.sbd_degenerate;
    return doc.dump(2) + "\n";
}

void ControllabilityTimeseries::add(const ControllabilityReport& report) {
    const double count = static_cast<double>(snapshots);
    e_bar = (e_bar * count + report.e) / (count + 1.0);
    n_L_bar = (n_L_bar * count + report.n_L) / (count + 1.0);
    n_S_bar = (n_S_bar * count + report.n_S) / (count + 1.0);
    ++snapshots;
}

ControllabilityTimeseries controllability_timeseries(
    std::span<const ControllabilityReport> reports) {
    ControllabilityTimeseries series;
    for (const auto& report : reports) series.add(report);
    return series;
}

} // namespace fnet
