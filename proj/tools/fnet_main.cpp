// Command-line entry point: evolve networks, analyze them, run the study
// harnesses, and replay archives for determinism checks.

#include "fnet/archive.hpp"
#include "fnet/controllability.hpp"
#include "fnet/errors.hpp"
#include "fnet/experiments.hpp"
#include "fnet/optimizers.hpp"
#include "fnet/stability.hpp"
#include "fnet/tasks.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using fnet::ConfigError;
using ordered_json = nlohmann::ordered_json;

void emit_error(const std::string& message, const std::string& field = "") {
    ordered_json doc;
    doc["error"]["message"] = message;
    if (!field.empty()) doc["error"]["field"] = field;
    std::cerr << doc.dump(2) << "\n";
}

std::vector<fnet::TargetName> parse_target_list(const std::vector<std::string>& names) {
    std::vector<fnet::TargetName> targets;
    for (const auto& name : names) targets.push_back(fnet::target_name_from_string(name));
    return targets;
}

int cmd_evolve(const std::string& algo, int nodes, const std::string& task_file,
               std::uint64_t seed, int max_gens, std::int64_t max_evals, int pop, int workers,
               const std::string& out_dir) {
    fnet::EvolveCommand cmd;
    cmd.config.algorithm = fnet::algorithm_from_string(algo);
    cmd.config.seed = seed;
    cmd.config.max_generations = max_gens;
    cmd.config.max_evaluations = max_evals;
    if (pop > 0) cmd.config.population_size = pop;
    cmd.config.workers = workers;
    cmd.nodes = nodes;
    cmd.task = task_file.empty() ? fnet::make_simple_task(fnet::TargetName::band_pass)
                                 : fnet::load_task(task_file);

    fnet::Archive archive(out_dir);
    const fnet::RunRecord record = fnet::evolve_to_archive(cmd, archive);
    std::cout << "algorithm " << fnet::to_string(cmd.config.algorithm) << ", nodes " << nodes
              << ": " << (record.converged ? "learned" : "not learned") << " after "
              << record.generations_used << " generations (" << record.evaluations_used
              << " evaluations), elite cost " << record.final_cost << "\n"
              << "archive: " << archive.root().string() << "\n";
    return 0;
}

int cmd_task(const std::string& name, const std::string& scenario, int b, double lo, double hi,
             const std::vector<std::string>& targets, const std::string& out_file) {
    fnet::TaskSpec task;
    if (scenario.empty() || scenario == "one_in_one_out") {
        task = fnet::make_simple_task(fnet::target_name_from_string(name), b, lo, hi);
    } else {
        std::vector<fnet::TargetName> list =
            targets.empty() ? std::vector<fnet::TargetName>{fnet::target_name_from_string(name)}
                            : parse_target_list(targets);
        task = fnet::make_multiplex_task(fnet::scenario_kind_from_string(scenario), list, b, lo,
                                         hi);
    }
    fnet::save_task(task, out_file);
    std::cout << "wrote " << out_file << "\n";
    return 0;
}

int cmd_analyze_controllability(const std::string& net_file, double theta,
                                const std::string& out_file) {
    const fnet::Network net = fnet::load_network(net_file);
    const fnet::ControllabilityReport report = fnet::analyze_controllability(net, theta);
    const std::string doc = fnet::controllability_report_to_json_string(report);
    if (out_file.empty()) {
        std::cout << doc;
    } else {
        std::ofstream out(out_file, std::ios::binary);
        if (!out) throw fnet::IoError("cannot open for writing: " + out_file);
        out << doc;
        std::cout << "wrote " << out_file << "\n";
    }
    return 0;
}

int cmd_analyze_stability(const std::string& net_file, double input_level,
                          const std::string& encoding, const std::string& lyapunov,
                          const std::string& out_file) {
    const fnet::Network net = fnet::load_network(net_file);
    Eigen::VectorXd input = Eigen::VectorXd::Zero(net.n_nodes);
    if (encoding.empty()) {
        for (int idx : net.input_nodes) input[idx] = input_level;
    } else {
        const auto bits = fnet::encoding_from_string(encoding);
        if (bits.size() != net.input_nodes.size()) {
            throw ConfigError("encoding", "encoding length must equal the input-node count");
        }
        for (std::size_t k = 0; k < bits.size(); ++k) {
            if (bits[k]) input[net.input_nodes[k]] = input_level;
        }
    }
    const fnet::StabilityReport report = fnet::analyze_stability(
        net, input, fnet::SimulationSettings{}, fnet::lyapunov_matrix_from_string(lyapunov));
    const std::string doc = fnet::stability_report_to_json_string(report);
    if (out_file.empty()) {
        std::cout << doc;
    } else {
        std::ofstream out(out_file, std::ios::binary);
        if (!out) throw fnet::IoError("cannot open for writing: " + out_file);
        out << doc;
        std::cout << "wrote " << out_file << "\n";
    }
    return 0;
}

int cmd_experiment(const std::string& kind, const std::string& manifest_file,
                   const std::string& out_dir, bool large, int workers) {
    fnet::ExperimentManifest manifest = fnet::load_manifest(manifest_file);
    if (manifest.kind != kind) {
        throw ConfigError("kind", "manifest kind '" + manifest.kind +
                                      "' does not match the requested study '" + kind + "'");
    }
    if (large) manifest.large = true;
    if (workers > 0) manifest.workers = workers;

    fnet::Archive archive(out_dir);
    if (kind == "convergence") {
        const auto result = fnet::convergence_study(manifest, archive);
        for (const auto& per : result.algorithms) {
            std::cout << fnet::to_string(per.algorithm) << ": " << per.successes << "/"
                      << manifest.trials << " trials learned\n";
        }
    } else if (kind == "multiplex") {
        const auto result = fnet::multiplex_study(manifest, archive);
        for (const auto& entry : result.scenarios) {
            std::cout << fnet::to_string(entry.kind) << " n=" << entry.nodes << ": "
                      << (entry.record.converged ? "learned" : "not learned") << " (cost "
                      << entry.record.final_cost << ")\n";
        }
    } else if (kind == "transfer") {
        const auto result = fnet::transfer_study(manifest, archive);
        std::cout << "converged pairs: " << result.converged_pairs << "\n"
                  << "mean generations scratch->final: " << result.mean_scratch_generations
                  << "\n"
                  << "mean generations intermediate->final: " << result.mean_transfer_generations
                  << "\n"
                  << "rank-sum p (transfer < scratch): " << result.rank_sum.p_less << "\n";
    } else if (kind == "scaling") {
        const auto result = fnet::dense_network_scaling(manifest, archive);
        for (const auto& entry : result.entries) {
            if (!entry.ran) {
                std::cout << "n=" << entry.nodes << ": skipped (" << entry.skip_reason << ")\n";
            } else {
                std::cout << "n=" << entry.nodes << ": "
                          << (entry.record.converged ? "learned" : "not learned")
                          << ", e=" << entry.controllability.e
                          << ", N_L=" << entry.controllability.N_L
                          << ", n_S=" << entry.controllability.n_S << "\n";
            }
        }
    } else {
        throw ConfigError("kind", "unknown study '" + kind + "'");
    }
    std::cout << "archive: " << archive.root().string() << "\n";
    return 0;
}

int cmd_replay(const std::string& archive_dir, std::string scratch_dir) {
    if (scratch_dir.empty()) {
        scratch_dir = (std::filesystem::temp_directory_path() /
                       ("fnet_replay_" + std::to_string(::getpid())))
                          .string();
    }
    const fnet::ReplayReport report = fnet::replay_archive(archive_dir, scratch_dir);
    std::cout << "artifacts indexed: " << report.artifacts << "\n";
    for (const auto& path : report.hash_failures) {
        std::cout << "hash mismatch (archive modified): " << path << "\n";
    }
    for (const auto& path : report.mismatches) {
        std::cout << "replay mismatch: " << path << "\n";
    }
    if (!report.ok()) {
        emit_error("replay failed: archive is not reproducible");
        return 1;
    }
    std::cout << "replay OK: every artifact reproduced byte-identically\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evolves weighted directed networks whose steady-state dynamics compute "
                 "prescribed input-output functions, and analyzes the results"};
    app.require_subcommand(1);

    // evolve
    std::string algo = "sga", task_file, out_dir = "fnet_run";
    int nodes = 3, max_gens = 2000, pop = 0, workers = 1;
    std::int64_t max_evals = 0;
    std::uint64_t seed = 1;
    auto* evolve = app.add_subcommand("evolve", "Evolve a network for a task");
    evolve->add_option("--algo", algo, "rs|sga|cmaes|pso|acor|gd")->capture_default_str();
    evolve->add_option("--nodes", nodes, "network size")->capture_default_str();
    evolve->add_option("--task", task_file, "task document (default: 3-node band-pass)");
    evolve->add_option("--seed", seed, "run seed")->capture_default_str();
    evolve->add_option("--max-gens", max_gens, "generation cap")->capture_default_str();
    evolve->add_option("--max-evals", max_evals, "evaluation budget (0 = unbounded)");
    evolve->add_option("--pop", pop, "population size override");
    evolve->add_option("--workers", workers, "parallel evaluation workers");
    evolve->add_option("--out", out_dir, "archive directory")->capture_default_str();

    // task
    std::string task_name = "band_pass", task_scenario, task_out = "task.json";
    int task_b = 32;
    double task_lo = 0.0, task_hi = 1.0;
    std::vector<std::string> task_targets;
    auto* task = app.add_subcommand("task", "Write a task document");
    task->add_option("--name", task_name, "target function")->capture_default_str();
    task->add_option("--scenario", task_scenario, "wiring scenario kind");
    task->add_option("--b", task_b, "batch size")->capture_default_str();
    task->add_option("--lo", task_lo, "input range low")->capture_default_str();
    task->add_option("--hi", task_hi, "input range high")->capture_default_str();
    task->add_option("--targets", task_targets, "channel targets (multiplex scenarios)");
    task->add_option("--out", task_out, "output file")->capture_default_str();

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Controllability / stability reports");
    analyze->require_subcommand(1);
    std::string ctrl_net, ctrl_out;
    double ctrl_theta = 0.05;
    auto* ctrl = analyze->add_subcommand("controllability", "Driver-node analysis");
    ctrl->add_option("--net", ctrl_net, "network document")->required();
    ctrl->add_option("--theta", ctrl_theta, "edge threshold on |W_ij|")->capture_default_str();
    ctrl->add_option("--out", ctrl_out, "output file (default: stdout)");

    std::string stab_net, stab_out, stab_encoding, stab_lyapunov = "euler_map";
    double stab_level = 0.5;
    auto* stab = analyze->add_subcommand("stability", "Jacobian / Lyapunov analysis");
    stab->add_option("--net", stab_net, "network document")->required();
    stab->add_option("--input-level", stab_level, "injected input level")->capture_default_str();
    stab->add_option("--encoding", stab_encoding, "input encoding bits (default: all active)");
    stab->add_option("--lyapunov", stab_lyapunov, "euler_map|jacobian|weights")
        ->capture_default_str();
    stab->add_option("--out", stab_out, "output file (default: stdout)");

    // experiment
    std::string exp_kind, exp_manifest, exp_out = "fnet_experiment";
    bool exp_large = false;
    int exp_workers = 0;
    auto* experiment = app.add_subcommand("experiment", "Run a study from a manifest");
    experiment->add_option("kind", exp_kind, "convergence|multiplex|transfer|scaling")
        ->required();
    experiment->add_option("--manifest", exp_manifest, "manifest document")->required();
    experiment->add_option("--out", exp_out, "archive directory")->capture_default_str();
    experiment->add_flag("--large", exp_large, "allow node counts above the desk-scale gate");
    experiment->add_option("--workers", exp_workers, "parallel evaluation workers");

    // replay
    std::string replay_archive_dir, replay_scratch;
    auto* replay = app.add_subcommand("replay", "Re-verify an archive's determinism");
    replay->add_option("--archive", replay_archive_dir, "archive directory")->required();
    replay->add_option("--scratch", replay_scratch, "regeneration directory (default: temp)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (evolve->parsed()) {
            return cmd_evolve(algo, nodes, task_file, seed, max_gens, max_evals, pop, workers,
                              out_dir);
        }
        if (task->parsed()) {
            return cmd_task(task_name, task_scenario, task_b, task_lo, task_hi, task_targets,
                            task_out);
        }
        if (analyze->parsed()) {
            if (ctrl->parsed()) return cmd_analyze_controllability(ctrl_net, ctrl_theta, ctrl_out);
            if (stab->parsed()) {
                return cmd_analyze_stability(stab_net, stab_level, stab_encoding, stab_lyapunov,
                                             stab_out);
            }
        }
        if (experiment->parsed()) {
            return cmd_experiment(exp_kind, exp_manifest, exp_out, exp_large, exp_workers);
        }
        if (replay->parsed()) return cmd_replay(replay_archive_dir, replay_scratch);
    } catch (const ConfigError& e) {
        emit_error(e.what(), e.field());
        return 1;
    } catch (const std::exception& e) {
        emit_error(e.what());
        return 1;
    }
    return 0;
}
