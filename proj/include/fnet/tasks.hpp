#pragma once

#include "fnet/network.hpp"
#include "fnet/simulation.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace fnet {

enum class TargetName { band_pass, valley, threshold, peak, linear, custom };

[[nodiscard]] std::string to_string(TargetName name);
[[nodiscard]] TargetName target_name_from_string(const std::string& s);

/// A desired steady-state input-output function sampled at b points.
struct TargetFunction {
    TargetName name = TargetName::custom;
    std::vector<std::pair<double, double>> samples; // (input level, desired output)

    void validate() const;
};

/// Builds the named target sampled at b equally spaced levels over
/// [lo, hi]. Plateaus sit at 0.1 / 0.9 so that sigmoid-bounded outputs can
/// reach them with margin, joined by linear ramps (half-width 10% of the
/// range): band_pass is high on the middle third, valley is its
/// complement, threshold switches at the midpoint, peak is high on the
/// middle fifth, linear ramps low to high.
[[nodiscard]] TargetFunction make_target(TargetName name, int b, double lo = 0.0,
                                         double hi = 1.0);
[[nodiscard]] TargetFunction make_target(const std::string& name, int b, double lo = 0.0,
                                         double hi = 1.0);

/// The sweep of input levels one loss evaluation runs over.
struct Batch {
    int b = 32;
    std::vector<double> levels;

    static Batch linspace(int b, double lo = 0.0, double hi = 1.0);
    void validate() const;
};

enum class ScenarioKind {
    one_in_one_out,
    one_in_many_out,
    many_in_many_out,
    binary_in_many_out,
    binary_in_multiplex_out,
};

[[nodiscard]] std::string to_string(ScenarioKind kind);
[[nodiscard]] ScenarioKind scenario_kind_from_string(const std::string& s);

/// One trained (encoding, output, target) triple. encoding[k] gates whether
/// input node k receives the sweep level (1) or zero (0); output_index
/// selects among the network's output nodes.
struct Channel {
    std::vector<std::uint8_t> encoding;
    int output_index = 0;
    TargetFunction target;
};

/// Encoding <-> display string. The rightmost character is input node 0
/// (least significant bit first on the right), e.g. "01" activates only the
/// first input node.
[[nodiscard]] std::string encoding_to_string(const std::vector<std::uint8_t>& enc);
[[nodiscard]] std::vector<std::uint8_t> encoding_from_string(const std::string& s);

struct WiringScenario {
    ScenarioKind kind = ScenarioKind::one_in_one_out;
    int n_inputs = 1;
    int n_outputs = 1;
    std::vector<Channel> channels;

    void validate() const;
};

/// Full task description: sweep plus wiring.
struct TaskSpec {
    Batch batch;
    WiringScenario scenario;

    void validate() const;
    [[nodiscard]] int channel_count() const {
        return static_cast<int>(scenario.channels.size());
    }
};

/// Single-channel task on the named target.
[[nodiscard]] TaskSpec make_simple_task(TargetName name, int b = 32, double lo = 0.0,
                                        double hi = 1.0);

/// The four multiplexing configurations. `targets` are assigned to channels
/// in order; binary kinds enumerate the nonzero encodings in ascending
/// numeric order (01, 10, 11, ...).
[[nodiscard]] TaskSpec make_multiplex_task(ScenarioKind kind,
                                           const std::vector<TargetName>& targets,
                                           int b = 32, double lo = 0.0, double hi = 1.0);

[[nodiscard]] std::string task_to_json_string(const TaskSpec& task);
[[nodiscard]] TaskSpec task_from_json_string(const std::string& text);
void save_task(const TaskSpec& task, const std::filesystem::path& path);
[[nodiscard]] TaskSpec load_task(const std::filesystem::path& path);

/// Loss-evaluation knobs beyond the simulation itself.
struct LossOptions {
    double divergence_penalty_factor = 10.0; // channel loss = factor * b on divergence
};

struct LossResult {
    double total = 0.0;
    std::vector<double> per_channel;
    std::vector<std::uint8_t> channel_diverged;
    bool any_diverged = false;
};

/// Simulates every (channel, level) pair to steady state and accumulates
/// sum of 1/2 (y - yhat)^2 per channel; total is the ordered sum over
/// channels. A diverged channel is assigned the penalty loss and flagged.
[[nodiscard]] LossResult evaluate_loss(const Network& net, const WiringScenario& scenario,
                                       const Batch& batch, const SimulationSettings& settings,
                                       const LossOptions& options = {});

/// Learning tolerance: 5% of batch size, applied per channel.
[[nodiscard]] inline double learning_tolerance(int b) { return 0.05 * b; }
[[nodiscard]] inline bool is_learned(double channel_loss, int b) {
    return channel_loss < learning_tolerance(b);
}
[[nodiscard]] bool is_learned(const std::vector<double>& per_channel, int b);

/// Steady-state response of every output node over the sweep.
/// outputs(p, o) is output node o at level p; diverged levels hold NaN.
struct EncodingResponse {
    std::vector<std::uint8_t> encoding;
    Eigen::MatrixXd outputs;
    bool diverged = false;
};

/// Probes all 2^n_inputs encodings, including all-zeros; used for
/// inspection, never for training.
[[nodiscard]] std::vector<EncodingResponse> encoding_sweep(const Network& net, int n_inputs,
                                                           const Batch& batch,
                                                           const SimulationSettings& settings);

} // namespace fnet
