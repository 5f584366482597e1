// Acceptance suite: one line per criterion, [PASS]/[FAIL] plus timing.
// Exit code is the number of failed criteria. The 1000-node scaling run is
// gated behind --large (hours of compute); without it the gate itself is
// verified.

#include "fnet/controllability.hpp"
#include "fnet/errors.hpp"
#include "fnet/experiments.hpp"
#include "fnet/optimizers.hpp"
#include "fnet/rng.hpp"
#include "fnet/stability.hpp"
#include "fnet/stats.hpp"
#include "fnet/tasks.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace fnet;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

constexpr std::int64_t kCriterion2Budget = 224LL * 2000LL;

// --------------------------------------------------------------------------
// criterion 1: fixed-point residual on random converged simulations

Outcome criterion_fixed_point() {
    std::mt19937_64 gen(101);
    const SimulationSettings settings;
    int converged = 0, attempts = 0;
    double worst = 0.0;
    const std::vector<int> sizes = {1, 3, 10, 50};
    std::size_t size_idx = 0;
    while (converged < 200 && attempts < 500) {
        ++attempts;
        const int n = sizes[size_idx];
        size_idx = (size_idx + 1) % sizes.size();
        Network net = Network::dense_template(n, n >= 2 ? 1 : 0, n >= 2 ? 1 : 0);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) net.weights(i, j) = dist(gen);
        Eigen::VectorXd input = Eigen::VectorXd::Zero(n);
        if (!net.input_nodes.empty()) input[net.input_nodes[0]] = 0.5;
        try {
            const SimResult sim = simulate_to_steady_state(net, input, settings);
            if (!sim.converged) continue;
            ++converged;
            worst = std::max(worst, steady_state_residual(net, sim.state, input));
        } catch (const DivergenceError&) {
        }
    }
    Outcome out;
    out.pass = converged >= 200 && worst < 1e-5;
    out.detail = std::to_string(converged) + " converged runs, worst residual " +
                 format_double(worst);
    return out;
}

// --------------------------------------------------------------------------
// criterion 2: the four EAs learn the 3-node band-pass task

OptimizerConfig budgeted_config(Algorithm algo) {
    OptimizerConfig config;
    config.algorithm = algo;
    config.population_size = 224;
    config.max_generations = 2000;
    if (algo != Algorithm::sga) {
        // Equal evaluation budget instead of the SGA generation cap.
        config.max_evaluations = kCriterion2Budget;
        config.max_generations = 1000000;
    }
    return config;
}

struct LearnabilityResult {
    ConvergenceStudyResult study;
    Outcome outcome;
};

LearnabilityResult criterion_learnability(const fs::path& out_dir) {
    ExperimentManifest manifest;
    manifest.kind = "convergence";
    manifest.node_counts = {3};
    manifest.trials = 20;
    manifest.base_seed = 20240801;
    manifest.algorithms = {budgeted_config(Algorithm::sga), budgeted_config(Algorithm::cmaes),
                           budgeted_config(Algorithm::spso2011),
                           budgeted_config(Algorithm::acor)};

    Archive archive(out_dir);
    LearnabilityResult result{convergence_study(manifest, archive), {}};

    bool pass = true;
    std::string detail;
    for (const auto& per : result.study.algorithms) {
        if (!detail.empty()) detail += ", ";
        detail += to_string(per.algorithm) + " " + std::to_string(per.successes) + "/20";
        if (per.successes < 16) pass = false;
    }
    result.outcome = {pass, detail};
    return result;
}

// --------------------------------------------------------------------------
// criterion 3: random search fails on the 10-node task

Outcome criterion_random_search_failure() {
    const TaskSpec task = make_simple_task(TargetName::band_pass);
    const Network net_template = Network::dense_template(10, 1, 1);

    OptimizerConfig config;
    config.algorithm = Algorithm::random_search;
    config.population_size = 224;
    config.max_generations = 1000000;
    config.max_evaluations = kCriterion2Budget;

    int stayed_unlearned = 0, stayed_above_5 = 0;
    double best_seen = 1e300;
    for (int t = 0; t < 20; ++t) {
        config.seed = trial_seed(20240803, 3, t);
        const RunRecord record = run(config, task, net_template);
        if (!record.converged && record.final_cost >= 1.6) ++stayed_unlearned;
        if (record.final_cost > 5.0) ++stayed_above_5;
        best_seen = std::min(best_seen, record.final_cost);
    }
    Outcome out;
    out.pass = stayed_unlearned == 20 && stayed_above_5 == 20;
    out.detail = std::to_string(stayed_unlearned) + "/20 above tolerance, " +
                 std::to_string(stayed_above_5) + "/20 above cost 5, best elite " +
                 format_double(best_seen);
    return out;
}

// --------------------------------------------------------------------------
// criterion 4: controllability of the learned networks

int brute_force_matching(const DirectedGraph& graph) {
    const int n = graph.n;
    std::vector<std::vector<int>> adj(n);
    for (const auto& [from, to] : graph.edges) adj[from].push_back(to);
    std::vector<std::vector<int>> memo(n + 1, std::vector<int>(1 << n, -1));
    std::function<int(int, int)> best = [&](int u, int used) -> int {
        if (u == n) return 0;
        int& cached = memo[u][used];
        if (cached >= 0) return cached;
        int value = best(u + 1, used);
        for (int v : adj[u]) {
            if (!(used >> v & 1)) value = std::max(value, 1 + best(u + 1, used | (1 << v)));
        }
        return cached = value;
    };
    return best(0, 0);
}

struct ScalingResult {
    ScalingStudyResult study;
    Outcome outcome;
};

ScalingResult criterion_controllability(const ConvergenceStudyResult& learnability,
                                        const fs::path& out_dir) {
    ScalingResult result;
    bool pass = true;
    std::string detail;

    // Matching vs exhaustive enumeration, 50 random graphs with n <= 8.
    std::mt19937_64 gen(404);
    int matching_agreements = 0;
    for (int rep = 0; rep < 50; ++rep) {
        const int n = 3 + static_cast<int>(gen() % 6);
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        std::vector<std::pair<int, int>> edges;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                if (dist(gen) < 0.3) edges.emplace_back(j, i);
        const DirectedGraph graph = DirectedGraph::from_edges(n, std::move(edges));
        if (maximum_matching(graph).size == brute_force_matching(graph)) ++matching_agreements;
    }
    if (matching_agreements != 50) pass = false;
    detail += "matching oracle " + std::to_string(matching_agreements) + "/50";

    // Every network learned in criterion 2 needs exactly one LNDM driver.
    int checked = 0, nl_ok = 0;
    for (const auto& per : learnability.algorithms) {
        for (const auto& record : per.records) {
            if (!record.converged) continue;
            ++checked;
            if (analyze_controllability(record.final_network).N_L == 1) ++nl_ok;
        }
    }
    if (nl_ok != checked) pass = false;
    detail += ", N_L=1 on " + std::to_string(nl_ok) + "/" + std::to_string(checked) +
              " learned 3-node nets";

    // Learned nets at n in {100, 300}: N_L = 1, and n_S in the paper band
    // for dense nets.
    ExperimentManifest manifest;
    manifest.kind = "scaling";
    manifest.node_counts = {100, 300};
    manifest.base_seed = 20240804;
    manifest.algorithms = {budgeted_config(Algorithm::sga)};

    Archive archive(out_dir);
    result.study = dense_network_scaling(manifest, archive);
    for (const auto& entry : result.study.entries) {
        if (!entry.ran) {
            pass = false;
            detail += ", n" + std::to_string(entry.nodes) + " skipped";
            continue;
        }
        const bool learned = entry.record.converged;
        const bool nl1 = entry.controllability.N_L == 1;
        const bool dense = entry.controllability.e > 0.9;
        const bool ns_in_band =
            entry.controllability.n_S >= 0.40 && entry.controllability.n_S <= 0.55;
        if (!learned || !nl1 || !dense || !ns_in_band) pass = false;
        detail += ", n" + std::to_string(entry.nodes) + (learned ? " learned" : " NOT learned") +
                  " e=" + format_double(entry.controllability.e) +
                  " N_L=" + std::to_string(entry.controllability.N_L) +
                  " n_S=" + format_double(entry.controllability.n_S);
    }

    result.outcome = {pass, detail};
    return result;
}

// --------------------------------------------------------------------------
// criterion 5: multiplexing on the binary 2-input / multiplex-output wiring

Outcome criterion_multiplex(const fs::path& out_dir) {
    ExperimentManifest manifest;
    manifest.kind = "multiplex";
    manifest.node_counts = {20};
    manifest.base_seed = 20240805;
    manifest.targets = {TargetName::band_pass, TargetName::valley, TargetName::threshold};
    manifest.scenarios = {ScenarioKind::binary_in_multiplex_out};
    OptimizerConfig config = budgeted_config(Algorithm::cmaes);
    config.max_evaluations = 10 * kCriterion2Budget;
    manifest.algorithms = {config};

    Archive archive(out_dir);
    const MultiplexStudyResult study = multiplex_study(manifest, archive);
    const MultiplexScenarioResult& entry = study.scenarios.front();

    bool pass = entry.record.converged;
    std::string detail = entry.record.converged ? "learned all three channels"
                                                : "budget exhausted before tolerance";
    detail += " (cost " + format_double(entry.record.final_cost) + ", " +
              std::to_string(entry.record.evaluations_used) + " evals)";
    for (std::size_t c = 0; c < entry.record.final_per_channel.size(); ++c) {
        if (!is_learned(entry.record.final_per_channel[c], manifest.b)) pass = false;
    }

    // The 00 probe must stay inactive: curve range below 0.1.
    for (const auto& resp : entry.sweep) {
        const bool all_zero =
            std::all_of(resp.encoding.begin(), resp.encoding.end(),
                        [](std::uint8_t b) { return b == 0; });
        if (!all_zero) continue;
        const Eigen::VectorXd col = resp.outputs.col(0);
        const double range = col.maxCoeff() - col.minCoeff();
        detail += ", 00-range " + format_double(range);
        if (!(range < 0.1)) pass = false;
    }
    return {pass, detail};
}

// --------------------------------------------------------------------------
// criterion 6: transfer learning at n = 10

Outcome criterion_transfer(const fs::path& out_dir) {
    ExperimentManifest manifest;
    manifest.kind = "transfer";
    manifest.node_counts = {10};
    manifest.trials = 36;
    manifest.base_seed = 20240806;
    manifest.algorithms = {budgeted_config(Algorithm::sga)};

    Archive archive(out_dir);
    const TransferStudyResult result = transfer_study(manifest, archive);

    bool pass = result.converged_pairs >= 30;
    std::string detail = std::to_string(result.converged_pairs) + " converged pairs";
    if (result.converged_pairs > 0) {
        detail += ", transfer " + format_double(result.mean_transfer_generations) +
                  " vs scratch " + format_double(result.mean_scratch_generations) + " gens";
        if (!(result.mean_transfer_generations < result.mean_scratch_generations)) pass = false;
        detail += ", p=" + format_double(result.rank_sum.p_less);
        if (!(result.rank_sum.p_less < 0.05)) pass = false;
        detail += ", init cost peak " + format_double(result.mean_peak_initial_cost) +
                  " vs random " + format_double(result.mean_random_initial_cost);
        if (!(result.mean_peak_initial_cost < result.mean_random_initial_cost)) pass = false;
    } else {
        pass = false;
    }
    return {pass, detail};
}

// --------------------------------------------------------------------------
// criterion 7: stability suite

Outcome criterion_stability() {
    std::mt19937_64 gen(707);
    const SimulationSettings settings;

    // Analytic Jacobian vs central differences on 100 converged instances.
    int jac_ok = 0, jac_total = 0;
    while (jac_total < 100) {
        Network net = Network::dense_template(5, 1, 1);
        std::uniform_real_distribution<double> dist(-1.5, 1.5);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) net.weights(i, j) = dist(gen);
        Eigen::VectorXd input = Eigen::VectorXd::Zero(5);
        input[net.input_nodes[0]] = 0.5;
        SimResult sim{};
        try {
            sim = simulate_to_steady_state(net, input, settings);
        } catch (const DivergenceError&) {
            continue;
        }
        if (!sim.converged) continue;
        ++jac_total;
        const Eigen::MatrixXd J = jacobian_at(net, sim.state, input);
        Eigen::MatrixXd J_fd(5, 5);
        const double h = 1e-6;
        for (int j = 0; j < 5; ++j) {
            NodeState plus = sim.state, minus = sim.state;
            plus[j] += h;
            minus[j] -= h;
            J_fd.col(j) =
                (dynamics_rhs(net, plus, input) - dynamics_rhs(net, minus, input)) / (2.0 * h);
        }
        if ((J - J_fd).cwiseAbs().maxCoeff() < 1e-5) ++jac_ok;
    }

    // Chart classification vs direct eigenvalues on 1000 random 2x2s.
    std::uniform_real_distribution<double> entry2(-2.0, 2.0);
    int class_ok = 0, class_total = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        Eigen::Matrix2d J;
        J << entry2(gen), entry2(gen), entry2(gen), entry2(gen);
        const Classification c = classify_2d(J);
        if (c.borderline && c.cls == EquilibriumClass::center_borderline) continue;
        ++class_total;
        const Eigen::Vector2cd eigs = J.eigenvalues();
        const double re0 = eigs[0].real(), re1 = eigs[1].real();
        bool ok = false;
        switch (c.cls) {
        case EquilibriumClass::saddle: ok = re0 * re1 < 0.0; break;
        case EquilibriumClass::stable_node:
        case EquilibriumClass::stable_spiral: ok = re0 < 0.0 && re1 < 0.0; break;
        case EquilibriumClass::unstable_node:
        case EquilibriumClass::unstable_spiral: ok = re0 > 0.0 && re1 > 0.0; break;
        default: ok = false;
        }
        if (ok) ++class_ok;
    }

    // Lyapunov PD verdict vs the spectral radius oracle on 100 random 4x4s.
    std::uniform_real_distribution<double> entry4(-1.0, 1.0);
    std::uniform_real_distribution<double> scale(0.1, 1.6);
    int lyap_ok = 0;
    for (int rep = 0; rep < 100; ++rep) {
        Eigen::MatrixXd W(4, 4);
        const double s = scale(gen);
        for (int i = 0; i < 16; ++i) W(i / 4, i % 4) = entry4(gen) * s;
        const double rho = W.eigenvalues().cwiseAbs().maxCoeff();
        const LyapunovResult lyap = lyapunov_check(W);
        const bool agrees = (rho < 1.0) == (lyap.solvable && lyap.positive_definite);
        if (agrees) ++lyap_ok;
    }

    Outcome out;
    out.pass = jac_ok == 100 && class_ok == class_total && lyap_ok == 100;
    out.detail = "jacobian " + std::to_string(jac_ok) + "/100, chart " +
                 std::to_string(class_ok) + "/" + std::to_string(class_total) + ", lyapunov " +
                 std::to_string(lyap_ok) + "/100";
    return out;
}

// --------------------------------------------------------------------------
// criterion 8: deterministic replay of the produced archives

Outcome criterion_replay(const std::vector<fs::path>& archives, const fs::path& scratch_root) {
    Outcome out;
    out.pass = true;
    int replayed = 0;
    for (const auto& dir : archives) {
        if (!fs::exists(dir / "index.json")) continue;
        const ReplayReport report = replay_archive(dir, scratch_root / dir.filename());
        ++replayed;
        if (!report.ok()) {
            out.pass = false;
            out.detail += dir.filename().string() + " NOT reproducible; ";
        }
    }
    out.detail += std::to_string(replayed) + " archives replayed byte-identically";
    if (replayed == 0) out.pass = false;
    return out;
}

// --------------------------------------------------------------------------
// criterion 9: the gated large-scale path

Outcome criterion_large(bool run_large, const fs::path& out_dir) {
    ExperimentManifest manifest;
    manifest.kind = "scaling";
    manifest.node_counts = {1000};
    manifest.base_seed = 20240809;
    OptimizerConfig config;
    config.algorithm = Algorithm::sga;
    config.population_size = 32; // keeps two populations of 10^6 weights in memory
    config.max_generations = 60;
    manifest.algorithms = {config};

    if (!run_large) {
        // Verify the gate: without --large the 1000-node entry must be
        // skipped with a recorded reason, not attempted.
        Archive archive(out_dir);
        const ScalingStudyResult gated = dense_network_scaling(manifest, archive);
        const ScalingEntry& entry = gated.entries.front();
        Outcome out;
        out.pass = !entry.ran && !entry.skip_reason.empty();
        out.detail = "gate verified (skip reason: '" + entry.skip_reason +
                     "'); run with --large to execute the 1000-node evolution";
        return out;
    }

    manifest.large = true;
    Archive archive(out_dir);
    const auto t0 = std::chrono::steady_clock::now();
    const ScalingStudyResult study = dense_network_scaling(manifest, archive);
    const double hours = seconds_since(t0) / 3600.0;
    const ScalingEntry& entry = study.entries.front();

    Outcome out;
    if (!entry.ran || entry.record.trajectory.empty()) {
        out.pass = false;
        out.detail = "1000-node run did not execute";
        return out;
    }
    const double initial = entry.record.trajectory.front().elite_cost;
    const double final_cost = entry.record.final_cost;
    const double improvement = (initial - final_cost) / initial;
    out.pass = improvement >= 0.5 && hours < 4.0;
    out.detail = "loss " + format_double(initial) + " -> " + format_double(final_cost) + " (" +
                 format_double(100.0 * improvement) + "% improvement) in " +
                 format_double(hours) + " h; N_L=" + std::to_string(entry.controllability.N_L) +
                 ", n_S=" + format_double(entry.controllability.n_S);
    return out;
}

void report(int number, const std::string& name, const Outcome& outcome, double seconds,
            int& failures) {
    std::printf("[%s] criterion %d: %s — %s (%.1fs)\n", outcome.pass ? "PASS" : "FAIL", number,
                name.c_str(), outcome.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
}

} // namespace

int main(int argc, char** argv) {
    bool run_large = false;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--large") == 0) run_large = true;
    }

    const fs::path root = fs::temp_directory_path() / "fnet_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);

    int failures = 0;
    auto timed = [&](int number, const std::string& name, auto&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = fn();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        report(number, name, outcome, seconds_since(t0), failures);
        return outcome;
    };

    (void)timed(1, "fixed-point correctness", [] { return criterion_fixed_point(); });

    const auto t2 = std::chrono::steady_clock::now();
    LearnabilityResult learnability;
    try {
        learnability = criterion_learnability(root / "convergence");
    } catch (const std::exception& e) {
        learnability.outcome = {false, std::string("exception: ") + e.what()};
    }
    report(2, "band-pass learnability (sga/cmaes/pso/acor)", learnability.outcome,
           seconds_since(t2), failures);

    (void)timed(3, "random-search failure at 10 nodes",
                [] { return criterion_random_search_failure(); });

    (void)timed(4, "controllability of learned networks", [&] {
        return criterion_controllability(learnability.study, root / "scaling").outcome;
    });

    (void)timed(5, "binary multiplexing at 20 nodes",
                [&] { return criterion_multiplex(root / "multiplex"); });

    (void)timed(6, "transfer learning at 10 nodes",
                [&] { return criterion_transfer(root / "transfer"); });

    (void)timed(7, "stability suite", [] { return criterion_stability(); });

    (void)timed(8, "deterministic replay", [&] {
        return criterion_replay({root / "convergence", root / "scaling", root / "transfer",
                                 root / "multiplex"},
                                root / "replay_scratch");
    });

    (void)timed(9, "gated large-scale path",
                [&] { return criterion_large(run_large, root / "large"); });

    std::printf("%d/9 criteria passed\n", 9 - failures);
    return failures;
}
