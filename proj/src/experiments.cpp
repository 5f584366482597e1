#include "fnet/experiments.hpp"

#include "fnet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace fnet {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string three_digits(int value) {
    std::string s = std::to_string(value);
    while (s.size() < 3) s.insert(s.begin(), '0');
    return s;
}

OptimizerConfig default_sga_config() {
    OptimizerConfig config;
    config.algorithm = Algorithm::sga;
    config.population_size = 224;
    return config;
}

TaskSpec single_target_task(const ExperimentManifest& manifest, TargetName target) {
    return make_simple_task(target, manifest.b, manifest.input_lo, manifest.input_hi);
}

Network template_for(const TaskSpec& task, int nodes) {
    return Network::dense_template(nodes, task.scenario.n_inputs, task.scenario.n_outputs);
}

void write_run_artifacts(Archive& archive, const std::string& prefix, const RunRecord& record,
                         const TaskSpec& task) {
    archive.write_text(prefix + "run_record.json", run_record_to_json_string(record, task));
    archive.set_timing(prefix + "run_record.json", record.wall_clock_seconds);
    archive.write_text(prefix + "trajectory.csv", curve_csv(record));
    archive.write_text(prefix + "final_network.json",
                       network_to_json_string(record.final_network));
}

/// Response CSV of the record's elite over the task channels, with target
/// overlays.
void write_response_artifact(Archive& archive, const std::string& path, const RunRecord& record,
                             const TaskSpec& task, const SimulationSettings& settings) {
    std::vector<NamedCurve> curves;
    Eigen::VectorXd input(record.final_network.n_nodes);
    for (const auto& ch : task.scenario.channels) {
        NamedCurve curve;
        curve.name = "out" + std::to_string(ch.output_index) + "_enc" +
                     encoding_to_string(ch.encoding);
        const int out_node = record.final_network.output_nodes[ch.output_index];
        for (int p = 0; p < task.batch.b; ++p) {
            input.setZero();
            for (int k = 0; k < task.scenario.n_inputs; ++k) {
                if (ch.encoding[k]) input[record.final_network.input_nodes[k]] = task.batch.levels[p];
            }
            double value = std::numeric_limits<double>::quiet_NaN();
            try {
                value = simulate_to_steady_state(record.final_network, input, settings)
                            .state[out_node];
            } catch (const DivergenceError&) {
            }
            curve.values.push_back(value);
        }
        curves.push_back(std::move(curve));

        NamedCurve target;
        target.name = "target_" + to_string(ch.target.name) + "_enc" +
                      encoding_to_string(ch.encoding);
        for (const auto& [_, y] : ch.target.samples) target.values.push_back(y);
        curves.push_back(std::move(target));
    }
    archive.write_text(path, response_csv(task.batch.levels, curves));
}

} // namespace

void ExperimentManifest::validate() const {
    static const std::set<std::string> kinds = {"convergence", "multiplex", "transfer",
                                                "scaling", "evolve"};
    if (!kinds.count(kind)) throw ConfigError("kind", "unknown experiment kind '" + kind + "'");
    if (trials < 1) throw ConfigError("trials", "must be >= 1");
    if (node_counts.empty()) throw ConfigError("node_counts", "must list at least one size");
    for (int n : node_counts) {
        if (n < 3) throw ConfigError("node_counts", "node counts must be >= 3");
    }
    if (b < 2) throw ConfigError("b", "must be >= 2");
    if (!(input_lo < input_hi)) throw ConfigError("input_range", "lo must be < hi");
    if (targets.empty()) throw ConfigError("targets", "must list at least one target");
    if (workers < 1) throw ConfigError("workers", "must be >= 1");
    for (const auto& config : algorithms) config.validate();
}

ordered_json manifest_to_json(const ExperimentManifest& manifest) {
    ordered_json doc;
    doc["kind"] = manifest.kind;
    doc["node_counts"] = manifest.node_counts;
    doc["trials"] = manifest.trials;
    doc["base_seed"] = manifest.base_seed;
    doc["b"] = manifest.b;
    doc["input_range"] = {manifest.input_lo, manifest.input_hi};
    ordered_json targets = ordered_json::array();
    for (TargetName t : manifest.targets) targets.push_back(to_string(t));
    doc["targets"] = std::move(targets);
    ordered_json scenarios = ordered_json::array();
    for (ScenarioKind k : manifest.scenarios) scenarios.push_back(to_string(k));
    doc["scenarios"] = std::move(scenarios);
    ordered_json algorithms = ordered_json::array();
    for (const auto& config : manifest.algorithms) algorithms.push_back(optimizer_config_to_json(config));
    doc["algorithms"] = std::move(algorithms);
    doc["large"] = manifest.large;
    doc["workers"] = manifest.workers;
    return doc;
}

ExperimentManifest manifest_from_json(const ordered_json& doc) {
    static const std::set<std::string> known = {"kind",    "node_counts", "trials",
                                                "base_seed", "b",         "input_range",
                                                "targets", "scenarios",   "algorithms",
                                                "large",   "workers"};
    for (const auto& [key, _] : doc.items()) {
        if (!known.count(key)) throw ConfigError(key, "unknown manifest field");
    }
    ExperimentManifest manifest;
    try {
        manifest.kind = doc.at("kind").get<std::string>();
        if (doc.contains("node_counts")) manifest.node_counts = doc.at("node_counts").get<std::vector<int>>();
        if (doc.contains("trials")) manifest.trials = doc.at("trials").get<int>();
        if (doc.contains("base_seed")) manifest.base_seed = doc.at("base_seed").get<std::uint64_t>();
        if (doc.contains("b")) manifest.b = doc.at("b").get<int>();
        if (doc.contains("input_range")) {
            manifest.input_lo = doc.at("input_range").at(0).get<double>();
            manifest.input_hi = doc.at("input_range").at(1).get<double>();
        }
        if (doc.contains("targets")) {
            manifest.targets.clear();
            for (const auto& t : doc.at("targets")) {
                manifest.targets.push_back(target_name_from_string(t.get<std::string>()));
            }
        }
        if (doc.contains("scenarios")) {
            manifest.scenarios.clear();
            for (const auto& s : doc.at("scenarios")) {
                manifest.scenarios.push_back(scenario_kind_from_string(s.get<std::string>()));
            }
        }
        if (doc.contains("algorithms")) {
            for (const auto& a : doc.at("algorithms")) {
                manifest.algorithms.push_back(optimizer_config_from_json(a));
            }
        }
        if (doc.contains("large")) manifest.large = doc.at("large").get<bool>();
        if (doc.contains("workers")) manifest.workers = doc.at("workers").get<int>();
    } catch (const ordered_json::exception& e) {
        throw ConfigError("manifest", std::string("malformed value: ") + e.what());
    }
    manifest.validate();
    return manifest;
}

ExperimentManifest load_manifest(const std::filesystem::path& path) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(read_file(path));
    } catch (const std::exception& e) {
        throw IoError(std::string("manifest is not valid JSON: ") + e.what());
    }
    return manifest_from_json(doc);
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t study_stream,
                         std::uint64_t trial_index) {
    return Rng::derive(Rng::derive(base_seed, study_stream), trial_index);
}

ordered_json evolve_command_to_json(const EvolveCommand& cmd) {
    ordered_json doc;
    doc["kind"] = "evolve";
    doc["nodes"] = cmd.nodes;
    doc["config"] = optimizer_config_to_json(cmd.config);
    doc["task"] = ordered_json::parse(task_to_json_string(cmd.task));
    return doc;
}

EvolveCommand evolve_command_from_json(const ordered_json& doc) {
    static const std::set<std::string> known = {"kind", "nodes", "config", "task"};
    for (const auto& [key, _] : doc.items()) {
        if (!known.count(key)) throw ConfigError(key, "unknown evolve manifest field");
    }
    EvolveCommand cmd;
    try {
        cmd.nodes = doc.at("nodes").get<int>();
        cmd.config = optimizer_config_from_json(doc.at("config"));
        cmd.task = task_from_json_string(doc.at("task").dump());
    } catch (const ordered_json::exception& e) {
        throw ConfigError("evolve", std::string("malformed value: ") + e.what());
    }
    return cmd;
}

RunRecord evolve_to_archive(const EvolveCommand& cmd, Archive& archive) {
    archive.write_json("manifest.json", evolve_command_to_json(cmd));
    const SimulationSettings settings;
    const Network net_template =
        template_for(cmd.task, cmd.nodes);
    RunRecord record = run(cmd.config, cmd.task, net_template, settings);
    write_run_artifacts(archive, "", record, cmd.task);
    write_response_artifact(archive, "response.csv", record, cmd.task, settings);
    archive.finalize();
    return record;
}

ConvergenceStudyResult convergence_study(const ExperimentManifest& manifest, Archive& archive) {
    manifest.validate();
    archive.write_json("manifest.json", manifest_to_json(manifest));

    const SimulationSettings settings;
    const TaskSpec task = single_target_task(manifest, manifest.targets.front());
    const int nodes = manifest.node_counts.front();
    const Network net_template = template_for(task, nodes);

    std::vector<OptimizerConfig> algorithms = manifest.algorithms;
    if (algorithms.empty()) algorithms.push_back(default_sga_config());

    ConvergenceStudyResult result;
    ordered_json summary_algos = ordered_json::array();
    for (std::size_t a = 0; a < algorithms.size(); ++a) {
        OptimizerConfig config = algorithms[a];
        config.workers = manifest.workers;
        ConvergenceStudyResult::PerAlgorithm per;
        per.algorithm = config.algorithm;

        const std::string algo_dir = to_string(config.algorithm) + "/";
        int max_gens_seen = 0;
        for (int t = 0; t < manifest.trials; ++t) {
            config.seed = trial_seed(manifest.base_seed, a, static_cast<std::uint64_t>(t));
            RunRecord record = run(config, task, net_template, settings);
            if (record.converged) ++per.successes;
            const std::string prefix = algo_dir + "trial_" + three_digits(t) + "/";
            write_run_artifacts(archive, prefix, record, task);
            max_gens_seen = std::max(max_gens_seen,
                                     static_cast<int>(record.trajectory.size()));
            per.records.push_back(std::move(record));
        }

        // Mean elite-cost curve; exhausted trials carry their last value.
        std::string mean_csv = "generation,mean_elite_cost\n";
        for (int g = 0; g < max_gens_seen; ++g) {
            double sum = 0.0;
            for (const auto& record : per.records) {
                const auto& traj = record.trajectory;
                const std::size_t idx = std::min<std::size_t>(g, traj.size() - 1);
                sum += traj[idx].elite_cost;
            }
            mean_csv += std::to_string(g + 1) + "," +
                        format_double(sum / static_cast<double>(per.records.size())) + "\n";
        }
        archive.write_text(algo_dir + "mean_curve.csv", mean_csv);

        summary_algos.push_back({{"algorithm", to_string(config.algorithm)},
                                 {"successes", per.successes},
                                 {"trials", manifest.trials}});
        result.algorithms.push_back(std::move(per));
    }

    ordered_json summary;
    summary["schema"] = "convergence_summary.v1";
    summary["nodes"] = nodes;
    summary["target"] = to_string(manifest.targets.front());
    summary["algorithms"] = std::move(summary_algos);
    archive.write_json("summary.json", summary);
    archive.finalize();
    return result;
}

MultiplexStudyResult multiplex_study(const ExperimentManifest& manifest, Archive& archive) {
    manifest.validate();
    archive.write_json("manifest.json", manifest_to_json(manifest));

    const SimulationSettings settings;
    OptimizerConfig config =
        manifest.algorithms.empty() ? default_sga_config() : manifest.algorithms.front();
    config.workers = manifest.workers;

    MultiplexStudyResult result;
    ordered_json summary_entries = ordered_json::array();
    std::uint64_t stream = 0;
    for (ScenarioKind kind : manifest.scenarios) {
        for (int nodes : manifest.node_counts) {
            MultiplexScenarioResult entry;
            entry.kind = kind;
            entry.nodes = nodes;
            entry.task = make_multiplex_task(kind, manifest.targets, manifest.b,
                                             manifest.input_lo, manifest.input_hi);
            const Network net_template = template_for(entry.task, nodes);
            config.seed = trial_seed(manifest.base_seed, 1000, stream++);
            entry.record = run(config, entry.task, net_template, settings);

            const std::string prefix =
                to_string(kind) + "_n" + std::to_string(nodes) + "/";
            write_run_artifacts(archive, prefix, entry.record, entry.task);
            write_response_artifact(archive, prefix + "response.csv", entry.record, entry.task,
                                    settings);

            const bool binary = kind == ScenarioKind::binary_in_many_out ||
                                kind == ScenarioKind::binary_in_multiplex_out;
            if (binary) {
                entry.sweep = encoding_sweep(entry.record.final_network,
                                             entry.task.scenario.n_inputs, entry.task.batch,
                                             settings);
                std::vector<NamedCurve> curves;
                for (const auto& resp : entry.sweep) {
                    for (int o = 0; o < resp.outputs.cols(); ++o) {
                        NamedCurve curve;
                        curve.name = "enc" + encoding_to_string(resp.encoding) + "_out" +
                                     std::to_string(o);
                        for (int p = 0; p < resp.outputs.rows(); ++p) {
                            curve.values.push_back(resp.outputs(p, o));
                        }
                        curves.push_back(std::move(curve));
                    }
                }
                archive.write_text(prefix + "encoding_sweep.csv",
                                   response_csv(entry.task.batch.levels, curves));
            }

            summary_entries.push_back({{"scenario", to_string(kind)},
                                       {"nodes", nodes},
                                       {"converged", entry.record.converged},
                                       {"final_cost", entry.record.final_cost},
                                       {"generations", entry.record.generations_used}});
            result.scenarios.push_back(std::move(entry));
        }
    }

    ordered_json summary;
    summary["schema"] = "multiplex_summary.v1";
    summary["entries"] = std::move(summary_entries);
    archive.write_json("summary.json", summary);
    archive.finalize();
    return result;
}

TransferStudyResult transfer_study(const ExperimentManifest& manifest, Archive& archive) {
    manifest.validate();
    archive.write_json("manifest.json", manifest_to_json(manifest));

    const SimulationSettings settings;
    const int nodes = manifest.node_counts.front();
    const TargetName intermediate =
        manifest.targets.size() >= 2 ? manifest.targets[0] : TargetName::peak;
    const TargetName final_target =
        manifest.targets.size() >= 2 ? manifest.targets[1] : TargetName::band_pass;

    const TaskSpec final_task = single_target_task(manifest, final_target);
    const TaskSpec intermediate_task = single_target_task(manifest, intermediate);
    const Network net_template = template_for(final_task, nodes);

    OptimizerConfig config =
        manifest.algorithms.empty() ? default_sga_config() : manifest.algorithms.front();
    if (config.algorithm != Algorithm::sga) {
        throw ConfigError("algorithms", "transfer continuation requires the sga backend");
    }
    config.workers = manifest.workers;

    TransferStudyResult result;
    std::vector<double> scratch_gens, transfer_gens;
    std::vector<double> random_costs, peak_costs;
    double total_two_phase = 0.0;

    for (int t = 0; t < manifest.trials; ++t) {
        TransferTrial trial;
        trial.scratch_seed = trial_seed(manifest.base_seed, 2000, 3 * t);
        trial.peak_seed = trial_seed(manifest.base_seed, 2000, 3 * t + 1);
        trial.transfer_seed = trial_seed(manifest.base_seed, 2000, 3 * t + 2);

        OptimizerConfig scratch_config = config;
        scratch_config.seed = trial.scratch_seed;
        const RunRecord scratch = run(scratch_config, final_task, net_template, settings);
        trial.scratch_converged = scratch.converged;
        trial.scratch_generations = scratch.generations_used;
        trial.random_initial_cost =
            scratch.trajectory.empty() ? 0.0 : scratch.trajectory.front().elite_cost;

        OptimizerConfig peak_config = config;
        peak_config.seed = trial.peak_seed;
        peak_config.record_population = true;
        const RunRecord peak = run(peak_config, intermediate_task, net_template, settings);
        trial.peak_converged = peak.converged;
        trial.peak_generations = peak.generations_used;

        if (peak.converged && !peak.final_population.empty()) {
            OptimizerConfig transfer_config = config;
            transfer_config.seed = trial.transfer_seed;
            const RunRecord transfer = run_from_population(
                transfer_config, final_task, net_template, peak.final_population, settings);
            trial.transfer_converged = transfer.converged;
            trial.transfer_generations = transfer.generations_used;
            trial.peak_initial_cost =
                transfer.trajectory.empty() ? 0.0 : transfer.trajectory.front().elite_cost;
        }

        if (trial.scratch_converged && trial.peak_converged && trial.transfer_converged) {
            ++result.converged_pairs;
            scratch_gens.push_back(trial.scratch_generations);
            transfer_gens.push_back(trial.transfer_generations);
            random_costs.push_back(trial.random_initial_cost);
            peak_costs.push_back(trial.peak_initial_cost);
            total_two_phase += trial.peak_generations + trial.transfer_generations;
        }
        result.trials.push_back(trial);
    }

    result.sufficient_data = result.converged_pairs >= 2;
    if (result.converged_pairs > 0) {
        result.mean_scratch_generations = mean(scratch_gens);
        result.mean_transfer_generations = mean(transfer_gens);
        result.mean_total_transfer_generations =
            total_two_phase / static_cast<double>(result.converged_pairs);
        result.mean_random_initial_cost = mean(random_costs);
        result.mean_peak_initial_cost = mean(peak_costs);
    }
    if (result.sufficient_data) {
        result.rank_sum = rank_sum_test(transfer_gens, scratch_gens);
    }

    std::string trials_csv =
        "trial,scratch_converged,scratch_generations,peak_converged,peak_generations,"
        "transfer_converged,transfer_generations,random_initial_cost,peak_initial_cost\n";
    for (std::size_t t = 0; t < result.trials.size(); ++t) {
        const TransferTrial& trial = result.trials[t];
        trials_csv += std::to_string(t) + "," + std::to_string(trial.scratch_converged) + "," +
                      std::to_string(trial.scratch_generations) + "," +
                      std::to_string(trial.peak_converged) + "," +
                      std::to_string(trial.peak_generations) + "," +
                      std::to_string(trial.transfer_converged) + "," +
                      std::to_string(trial.transfer_generations) + "," +
                      format_double(trial.random_initial_cost) + "," +
                      format_double(trial.peak_initial_cost) + "\n";
    }
    archive.write_text("trials.csv", trials_csv);

    ordered_json summary;
    summary["schema"] = "transfer_summary.v1";
    summary["nodes"] = nodes;
    summary["trials"] = manifest.trials;
    summary["converged_pairs"] = result.converged_pairs;
    summary["sufficient_data"] = result.sufficient_data;
    summary["mean_scratch_generations"] = result.mean_scratch_generations;
    summary["mean_transfer_generations"] = result.mean_transfer_generations;
    summary["mean_total_transfer_generations"] = result.mean_total_transfer_generations;
    summary["mean_random_initial_cost"] = result.mean_random_initial_cost;
    summary["mean_peak_initial_cost"] = result.mean_peak_initial_cost;
    summary["rank_sum_u"] = result.rank_sum.u_statistic;
    summary["rank_sum_z"] = result.rank_sum.z;
    summary["rank_sum_p_less"] = result.rank_sum.p_less;
    archive.write_json("summary.json", summary);
    archive.finalize();
    return result;
}

ScalingStudyResult dense_network_scaling(const ExperimentManifest& manifest, Archive& archive) {
    manifest.validate();
    archive.write_json("manifest.json", manifest_to_json(manifest));

    const SimulationSettings settings;
    OptimizerConfig config =
        manifest.algorithms.empty() ? default_sga_config() : manifest.algorithms.front();
    config.workers = manifest.workers;

    ScalingStudyResult result;
    ordered_json summary_entries = ordered_json::array();
    for (std::size_t s = 0; s < manifest.node_counts.size(); ++s) {
        const int nodes = manifest.node_counts[s];
        ScalingEntry entry;
        entry.nodes = nodes;

        if (nodes > ExperimentManifest::kLargeNodeThreshold && !manifest.large) {
            entry.skip_reason = "requires the --large flag";
        } else {
            // Rough memory need: two populations of n^2 doubles each.
            const double bytes = 2.0 * config.population_size *
                                 static_cast<double>(nodes) * nodes * 8.0;
            if (bytes > 4.5e9) {
                entry.skip_reason = "population would exceed the memory budget";
            }
        }

        const std::string prefix = "n" + std::to_string(nodes) + "/";
        if (entry.skip_reason.empty()) {
            const TaskSpec task = single_target_task(manifest, manifest.targets.front());
            const Network net_template = template_for(task, nodes);
            config.seed = trial_seed(manifest.base_seed, 3000, s);

            ControllabilityTimeseries series;
            const GenerationObserver observer = [&series](int, const Network& elite) {
                series.add(analyze_controllability(elite));
            };
            entry.record = run(config, task, net_template, settings, observer);
            entry.ran = true;
            entry.series = series;
            entry.controllability = analyze_controllability(entry.record.final_network);

            write_run_artifacts(archive, prefix, entry.record, task);
            ordered_json report =
                ordered_json::parse(controllability_report_to_json_string(entry.controllability));
            report["e_bar"] = entry.series.e_bar;
            report["n_L_bar"] = entry.series.n_L_bar;
            report["n_S_bar"] = entry.series.n_S_bar;
            report["snapshots"] = entry.series.snapshots;
            archive.write_json(prefix + "controllability.json", report);

            if (nodes <= 64) {
                Eigen::VectorXd input = Eigen::VectorXd::Zero(nodes);
                for (int idx : entry.record.final_network.input_nodes) {
                    input[idx] = 0.5 * (manifest.input_lo + manifest.input_hi);
                }
                entry.stability = analyze_stability(entry.record.final_network, input, settings);
                archive.write_text(prefix + "stability.json",
                                   stability_report_to_json_string(*entry.stability));
            }
        }

        summary_entries.push_back(
            {{"nodes", nodes},
             {"ran", entry.ran},
             {"skip_reason", entry.skip_reason},
             {"converged", entry.ran ? entry.record.converged : false},
             {"final_cost", entry.ran ? entry.record.final_cost : 0.0},
             {"e", entry.ran ? entry.controllability.e : 0.0},
             {"N_L", entry.ran ? entry.controllability.N_L : 0},
             {"n_S", entry.ran ? entry.controllability.n_S : 0.0}});
        result.entries.push_back(std::move(entry));
    }

    ordered_json summary;
    summary["schema"] = "scaling_summary.v1";
    summary["entries"] = std::move(summary_entries);
    archive.write_json("summary.json", summary);
    archive.finalize();
    return result;
}

ReplayReport replay_archive(const std::filesystem::path& archive_dir,
                            const std::filesystem::path& scratch_dir) {
    ReplayReport report;
    const auto entries = read_index(archive_dir);
    report.artifacts = static_cast<int>(entries.size());
    report.hash_failures = verify_index_hashes(archive_dir);

    ordered_json manifest_doc;
    try {
        manifest_doc = ordered_json::parse(read_file(archive_dir / "manifest.json"));
    } catch (const std::exception& e) {
        throw IoError(std::string("replay: cannot read manifest.json: ") + e.what());
    }
    const std::string kind = manifest_doc.at("kind").get<std::string>();

    std::filesystem::remove_all(scratch_dir);
    Archive regenerated(scratch_dir);
    if (kind == "evolve") {
        (void)evolve_to_archive(evolve_command_from_json(manifest_doc), regenerated);
    } else {
        const ExperimentManifest manifest = manifest_from_json(manifest_doc);
        if (kind == "convergence") {
            (void)convergence_study(manifest, regenerated);
        } else if (kind == "multiplex") {
            (void)multiplex_study(manifest, regenerated);
        } else if (kind == "transfer") {
            (void)transfer_study(manifest, regenerated);
        } else if (kind == "scaling") {
            (void)dense_network_scaling(manifest, regenerated);
        } else {
            throw ConfigError("kind", "replay cannot handle kind '" + kind + "'");
        }
    }

    report.mismatches = compare_archives(archive_dir, scratch_dir);
    return report;
}

} // namespace fnet
