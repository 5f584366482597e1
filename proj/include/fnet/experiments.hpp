#pragma once

#include "fnet/archive.hpp"
#include "fnet/controllability.hpp"
#include "fnet/optimizers.hpp"
#include "fnet/stability.hpp"
#include "fnet/stats.hpp"
#include "fnet/tasks.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fnet {

/// Declarative description of one study. Trial seeds derive from
/// (base_seed, indices) so a manifest reproduces its artifacts exactly.
struct ExperimentManifest {
    std::string kind; // convergence | multiplex | transfer | scaling
    std::vector<int> node_counts = {3};
    std::vector<OptimizerConfig> algorithms;
    int trials = 20;
    std::uint64_t base_seed = 1;
    int b = 32;
    double input_lo = 0.0;
    double input_hi = 1.0;
    std::vector<TargetName> targets = {TargetName::band_pass};
    std::vector<ScenarioKind> scenarios = {ScenarioKind::binary_in_multiplex_out};
    bool large = false; // gates node counts above kLargeNodeThreshold
    int workers = 1;

    static constexpr int kLargeNodeThreshold = 400;

    void validate() const;
};

[[nodiscard]] nlohmann::ordered_json manifest_to_json(const ExperimentManifest& manifest);
[[nodiscard]] ExperimentManifest manifest_from_json(const nlohmann::ordered_json& doc);
[[nodiscard]] ExperimentManifest load_manifest(const std::filesystem::path& path);

/// Pure per-trial seed derivation, stable across releases.
[[nodiscard]] std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t study_stream,
                                       std::uint64_t trial_index);

// ---------------------------------------------------------------------------
// evolve (single run, the CLI verb)

struct EvolveCommand {
    OptimizerConfig config;
    TaskSpec task;
    int nodes = 3;
};
[[nodiscard]] nlohmann::ordered_json evolve_command_to_json(const EvolveCommand& cmd);
[[nodiscard]] EvolveCommand evolve_command_from_json(const nlohmann::ordered_json& doc);

/// Runs one evolution and writes manifest, run record, trajectory CSV,
/// final network, and the elite's response curves into the archive.
RunRecord evolve_to_archive(const EvolveCommand& cmd, Archive& archive);

// ---------------------------------------------------------------------------
// convergence curves (cost vs evaluations, many trials per algorithm)

struct ConvergenceStudyResult {
    struct PerAlgorithm {
        Algorithm algorithm;
        int successes = 0;
        std::vector<RunRecord> records;
    };
    std::vector<PerAlgorithm> algorithms;
};
ConvergenceStudyResult convergence_study(const ExperimentManifest& manifest, Archive& archive);

// ---------------------------------------------------------------------------
// multiplexing scenarios

struct MultiplexScenarioResult {
    ScenarioKind kind;
    int nodes = 0;
    TaskSpec task;
    RunRecord record;
    std::vector<EncodingResponse> sweep; // all encodings, binary kinds only
};
struct MultiplexStudyResult {
    std::vector<MultiplexScenarioResult> scenarios;
};
MultiplexStudyResult multiplex_study(const ExperimentManifest& manifest, Archive& archive);

// ---------------------------------------------------------------------------
// transfer learning (scratch -> band-pass vs scratch -> peak -> band-pass)

struct TransferTrial {
    std::uint64_t scratch_seed = 0;
    std::uint64_t peak_seed = 0;
    std::uint64_t transfer_seed = 0;
    bool scratch_converged = false;
    bool peak_converged = false;
    bool transfer_converged = false;
    int scratch_generations = 0;
    int peak_generations = 0;
    int transfer_generations = 0; // second phase only
    double random_initial_cost = 0.0;
    double peak_initial_cost = 0.0;
};
struct TransferStudyResult {
    std::vector<TransferTrial> trials;
    int converged_pairs = 0;
    bool sufficient_data = false; // >= 2 converged pairs for the test
    double mean_scratch_generations = 0.0;
    double mean_transfer_generations = 0.0;
    double mean_total_transfer_generations = 0.0; // both phases summed
    double mean_random_initial_cost = 0.0;
    double mean_peak_initial_cost = 0.0;
    RankSumResult rank_sum; // H1: transfer generations < scratch generations
};
TransferStudyResult transfer_study(const ExperimentManifest& manifest, Archive& archive);

// ---------------------------------------------------------------------------
// dense network scaling (evolve per size + controllability/stability)

struct ScalingEntry {
    int nodes = 0;
    bool ran = false;
    std::string skip_reason;
    RunRecord record;
    ControllabilityReport controllability;
    ControllabilityTimeseries series;
    std::optional<StabilityReport> stability; // small n only
};
struct ScalingStudyResult {
    std::vector<ScalingEntry> entries;
};
ScalingStudyResult dense_network_scaling(const ExperimentManifest& manifest, Archive& archive);

// ---------------------------------------------------------------------------
// replay

struct ReplayReport {
    int artifacts = 0;
    std::vector<std::string> hash_failures; // stored bytes vs recorded hash
    std::vector<std::string> mismatches;    // regenerated bytes vs stored bytes
    [[nodiscard]] bool ok() const { return hash_failures.empty() && mismatches.empty(); }
};

/// Re-verifies an archive: recorded hashes against bytes on disk, then a
/// full re-run of the archive's manifest into scratch_dir compared byte for
/// byte against the stored artifacts.
ReplayReport replay_archive(const std::filesystem::path& archive_dir,
                            const std::filesystem::path& scratch_dir);

} // namespace fnet
