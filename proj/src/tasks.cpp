#include "fnet/tasks.hpp"

#include "fnet/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace fnet {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kLowLevel = 0.1;
constexpr double kHighLevel = 0.9;
constexpr double kRampHalfWidth = 0.1; // of the normalized input range

// 0 -> 1 linearly across [edge - w, edge + w].
double rise(double t, double edge, double w = kRampHalfWidth) {
    if (t <= edge - w) return 0.0;
    if (t >= edge + w) return 1.0;
    return (t - (edge - w)) / (2.0 * w);
}

double target_value(TargetName name, double t) {
    double up = 0.0;
    switch (name) {
    case TargetName::band_pass:
        up = rise(t, 1.0 / 3.0) * (1.0 - rise(t, 2.0 / 3.0));
        break;
    case TargetName::valley:
        up = 1.0 - rise(t, 1.0 / 3.0) * (1.0 - rise(t, 2.0 / 3.0));
        break;
    case TargetName::threshold:
        up = rise(t, 0.5);
        break;
    case TargetName::peak:
        up = rise(t, 0.4) * (1.0 - rise(t, 0.6));
        break;
    case TargetName::linear:
        up = t;
        break;
    case TargetName::custom:
        throw ConfigError("target", "custom targets need explicit samples");
    }
    return kLowLevel + (kHighLevel - kLowLevel) * up;
}

} // namespace

std::string to_string(TargetName name) {
    switch (name) {
    case TargetName::band_pass: return "band_pass";
    case TargetName::valley: return "valley";
    case TargetName::threshold: return "threshold";
    case TargetName::peak: return "peak";
    case TargetName::linear: return "linear";
    case TargetName::custom: return "custom";
    }
    return "custom";
}

TargetName target_name_from_string(const std::string& s) {
    if (s == "band_pass") return TargetName::band_pass;
    if (s == "valley") return TargetName::valley;
    if (s == "threshold") return TargetName::threshold;
    if (s == "peak") return TargetName::peak;
    if (s == "linear") return TargetName::linear;
    if (s == "custom") return TargetName::custom;
    throw ConfigError("target", "unknown target function '" + s + "'");
}

void TargetFunction::validate() const {
    if (samples.size() < 2) throw ConfigError("target.samples", "need at least 2 samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i].first) || !std::isfinite(samples[i].second)) {
            throw ConfigError("target.samples", "non-finite sample");
        }
        if (i > 0 && !(samples[i].first > samples[i - 1].first)) {
            throw ConfigError("target.samples", "input levels must be strictly increasing");
        }
        if (!(samples[i].second > 0.0 && samples[i].second < 1.0)) {
            throw ConfigError("target.samples", "desired outputs must lie strictly in (0,1)");
        }
    }
}

TargetFunction make_target(TargetName name, int b, double lo, double hi) {
    if (b < 2) throw ConfigError("b", "batch size must be >= 2");
    if (!(lo < hi)) throw ConfigError("input_range", "lo must be < hi");
    if (name == TargetName::custom) {
        throw ConfigError("target", "custom targets need explicit samples");
    }
    TargetFunction target;
    target.name = name;
    target.samples.reserve(b);
    for (int i = 0; i < b; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / (b - 1);
        const double t = static_cast<double>(i) / (b - 1);
        target.samples.emplace_back(x, target_value(name, t));
    }
    target.validate();
    return target;
}

TargetFunction make_target(const std::string& name, int b, double lo, double hi) {
    return make_target(target_name_from_string(name), b, lo, hi);
}

Batch Batch::linspace(int b, double lo, double hi) {
    if (b < 2) throw ConfigError("b", "batch size must be >= 2");
    if (!(lo < hi)) throw ConfigError("input_range", "lo must be < hi");
    Batch batch;
    batch.b = b;
    batch.levels.reserve(b);
    for (int i = 0; i < b; ++i) {
        batch.levels.push_back(lo + (hi - lo) * static_cast<double>(i) / (b - 1));
    }
    return batch;
}

void Batch::validate() const {
    if (b < 2) throw ConfigError("b", "batch size must be >= 2");
    if (static_cast<int>(levels.size()) != b) {
        throw ConfigError("batch.levels", "level count does not equal b");
    }
    for (std::size_t i = 1; i < levels.size(); ++i) {
        if (!(levels[i] > levels[i - 1])) {
            throw ConfigError("batch.levels", "levels must be strictly increasing");
        }
    }
}

std::string to_string(ScenarioKind kind) {
    switch (kind) {
    case ScenarioKind::one_in_one_out: return "one_in_one_out";
    case ScenarioKind::one_in_many_out: return "one_in_many_out";
    case ScenarioKind::many_in_many_out: return "many_in_many_out";
    case ScenarioKind::binary_in_many_out: return "binary_in_many_out";
    case ScenarioKind::binary_in_multiplex_out: return "binary_in_multiplex_out";
    }
    return "one_in_one_out";
}

ScenarioKind scenario_kind_from_string(const std::string& s) {
    if (s == "one_in_one_out") return ScenarioKind::one_in_one_out;
    if (s == "one_in_many_out") return ScenarioKind::one_in_many_out;
    if (s == "many_in_many_out") return ScenarioKind::many_in_many_out;
    if (s == "binary_in_many_out") return ScenarioKind::binary_in_many_out;
    if (s == "binary_in_multiplex_out") return ScenarioKind::binary_in_multiplex_out;
    throw ConfigError("scenario", "unknown scenario kind '" + s + "'");
}

std::string encoding_to_string(const std::vector<std::uint8_t>& enc) {
    std::string s(enc.size(), '0');
    for (std::size_t k = 0; k < enc.size(); ++k) {
        if (enc[k]) s[enc.size() - 1 - k] = '1';
    }
    return s;
}

std::vector<std::uint8_t> encoding_from_string(const std::string& s) {
    std::vector<std::uint8_t> enc(s.size(), 0);
    for (std::size_t k = 0; k < s.size(); ++k) {
        const char c = s[s.size() - 1 - k];
        if (c != '0' && c != '1') {
            throw ConfigError("encoding", "encoding must be a bit string, got '" + s + "'");
        }
        enc[k] = (c == '1') ? 1 : 0;
    }
    return enc;
}

void WiringScenario::validate() const {
    if (n_inputs < 1) throw ConfigError("scenario.n_inputs", "must be >= 1");
    if (n_outputs < 1) throw ConfigError("scenario.n_outputs", "must be >= 1");
    if (channels.empty()) throw ConfigError("scenario.channels", "must declare at least one channel");

    const bool binary = kind == ScenarioKind::binary_in_many_out ||
                        kind == ScenarioKind::binary_in_multiplex_out;
    std::set<std::pair<std::string, int>> seen;
    for (const auto& ch : channels) {
        if (static_cast<int>(ch.encoding.size()) != n_inputs) {
            throw ConfigError("channel.encoding", "encoding length must equal n_inputs");
        }
        const bool any_active =
            std::any_of(ch.encoding.begin(), ch.encoding.end(), [](std::uint8_t b) { return b != 0; });
        if (!any_active) {
            throw ConfigError("channel.encoding",
                              "the all-zeros encoding is excluded from training targets");
        }
        if (!binary) {
            const bool all_active =
                std::all_of(ch.encoding.begin(), ch.encoding.end(), [](std::uint8_t b) { return b != 0; });
            if (!all_active) {
                throw ConfigError("channel.encoding",
                                  "non-binary scenarios inject every input node (all-ones encoding)");
            }
        }
        if (ch.output_index < 0 || ch.output_index >= n_outputs) {
            throw ConfigError("channel.output", "output index out of range");
        }
        if (!seen.insert({encoding_to_string(ch.encoding), ch.output_index}).second) {
            throw ConfigError("channel", "duplicate (encoding, output) pair");
        }
        ch.target.validate();
    }
}

void TaskSpec::validate() const {
    batch.validate();
    scenario.validate();
    for (const auto& ch : scenario.channels) {
        if (static_cast<int>(ch.target.samples.size()) != batch.b) {
            throw ConfigError("channel.target", "target sample count must equal batch size b");
        }
    }
}

TaskSpec make_simple_task(TargetName name, int b, double lo, double hi) {
    TaskSpec task;
    task.batch = Batch::linspace(b, lo, hi);
    task.scenario.kind = ScenarioKind::one_in_one_out;
    task.scenario.n_inputs = 1;
    task.scenario.n_outputs = 1;
    task.scenario.channels.push_back({{1}, 0, make_target(name, b, lo, hi)});
    task.validate();
    return task;
}

TaskSpec make_multiplex_task(ScenarioKind kind, const std::vector<TargetName>& targets, int b,
                             double lo, double hi) {
    TaskSpec task;
    task.batch = Batch::linspace(b, lo, hi);
    task.scenario.kind = kind;

    const int n_targets = static_cast<int>(targets.size());
    if (n_targets < 1) throw ConfigError("targets", "need at least one target");

    switch (kind) {
    case ScenarioKind::one_in_one_out: {
        if (n_targets != 1) throw ConfigError("targets", "one_in_one_out takes one target");
        return make_simple_task(targets[0], b, lo, hi);
    }
    case ScenarioKind::one_in_many_out: {
        task.scenario.n_inputs = 1;
        task.scenario.n_outputs = n_targets;
        for (int c = 0; c < n_targets; ++c) {
            task.scenario.channels.push_back({{1}, c, make_target(targets[c], b, lo, hi)});
        }
        break;
    }
    case ScenarioKind::many_in_many_out: {
        task.scenario.n_inputs = n_targets;
        task.scenario.n_outputs = n_targets;
        std::vector<std::uint8_t> all_ones(n_targets, 1);
        for (int c = 0; c < n_targets; ++c) {
            task.scenario.channels.push_back({all_ones, c, make_target(targets[c], b, lo, hi)});
        }
        break;
    }
    case ScenarioKind::binary_in_many_out:
    case ScenarioKind::binary_in_multiplex_out: {
        // Smallest input-node count whose nonzero encodings cover the targets.
        int n_in = 1;
        while ((1 << n_in) - 1 < n_targets) ++n_in;
        task.scenario.n_inputs = n_in;
        task.scenario.n_outputs =
            kind == ScenarioKind::binary_in_multiplex_out ? 1 : n_targets;
        for (int c = 0; c < n_targets; ++c) {
            std::vector<std::uint8_t> enc(n_in, 0);
            const int code = c + 1; // skip the all-zeros encoding
            for (int k = 0; k < n_in; ++k) enc[k] = (code >> k) & 1;
            const int out = kind == ScenarioKind::binary_in_multiplex_out ? 0 : c;
            task.scenario.channels.push_back({enc, out, make_target(targets[c], b, lo, hi)});
        }
        break;
    }
    }
    task.validate();
    return task;
}

std::string task_to_json_string(const TaskSpec& task) {
    ordered_json doc;
    doc["b"] = task.batch.b;
    doc["levels"] = task.batch.levels;
    doc["scenario"] = to_string(task.scenario.kind);
    doc["n_inputs"] = task.scenario.n_inputs;
    doc["n_outputs"] = task.scenario.n_outputs;
    ordered_json channels = ordered_json::array();
    for (const auto& ch : task.scenario.channels) {
        ordered_json c;
        c["encoding"] = encoding_to_string(ch.encoding);
        c["output"] = ch.output_index;
        c["target"] = to_string(ch.target.name);
        ordered_json samples = ordered_json::array();
        for (const auto& [x, y] : ch.target.samples) samples.push_back({x, y});
        c["samples"] = std::move(samples);
        channels.push_back(std::move(c));
    }
    doc["channels"] = std::move(channels);
    return doc.dump(2) + "\n";
}

TaskSpec task_from_json_string(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw IoError(std::string("task document is not valid JSON: ") + e.what());
    }
    static const std::set<std::string> known = {"b",        "levels",    "scenario",
                                                "n_inputs", "n_outputs", "channels"};
    for (const auto& [key, _] : doc.items()) {
        if (!known.count(key)) throw ConfigError(key, "unknown task field");
    }
    TaskSpec task;
    try {
        task.batch.b = doc.at("b").get<int>();
        if (doc.contains("levels")) {
            task.batch.levels = doc.at("levels").get<std::vector<double>>();
        } else {
            task.batch = Batch::linspace(task.batch.b);
        }
        task.scenario.kind = scenario_kind_from_string(doc.at("scenario").get<std::string>());
        task.scenario.n_inputs = doc.at("n_inputs").get<int>();
        task.scenario.n_outputs = doc.at("n_outputs").get<int>();
        for (const auto& c : doc.at("channels")) {
            static const std::set<std::string> ch_known = {"encoding", "output", "target",
                                                           "samples"};
            for (const auto& [key, _] : c.items()) {
                if (!ch_known.count(key)) throw ConfigError("channels." + key, "unknown channel field");
            }
            Channel ch;
            ch.encoding = encoding_from_string(c.at("encoding").get<std::string>());
            ch.output_index = c.at("output").get<int>();
            ch.target.name = target_name_from_string(c.at("target").get<std::string>());
            if (c.contains("samples")) {
                for (const auto& s : c.at("samples")) {
                    ch.target.samples.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
                }
            } else {
                const double lo = task.batch.levels.front();
                const double hi = task.batch.levels.back();
                ch.target = make_target(ch.target.name, task.batch.b, lo, hi);
            }
            task.scenario.channels.push_back(std::move(ch));
        }
    } catch (const ordered_json::exception& e) {
        throw IoError(std::string("task document: ") + e.what());
    }
    task.validate();
    return task;
}

void save_task(const TaskSpec& task, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << task_to_json_string(task);
    if (!out) throw IoError("write failed: " + path.string());
}

TaskSpec load_task(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return task_from_json_string(ss.str());
}

LossResult evaluate_loss(const Network& net, const WiringScenario& scenario, const Batch& batch,
                         const SimulationSettings& settings, const LossOptions& options) {
    scenario.validate();
    batch.validate();
    if (static_cast<int>(net.input_nodes.size()) != scenario.n_inputs) {
        throw ContractError("evaluate_loss: network input-node count does not match scenario");
    }
    if (static_cast<int>(net.output_nodes.size()) < scenario.n_outputs) {
        throw ContractError("evaluate_loss: network output-node count does not match scenario");
    }

    LossResult result;
    result.per_channel.reserve(scenario.channels.size());
    result.channel_diverged.reserve(scenario.channels.size());

    Eigen::VectorXd input(net.n_nodes);
    for (const auto& ch : scenario.channels) {
        if (static_cast<int>(ch.target.samples.size()) != batch.b) {
            throw ContractError("evaluate_loss: channel target sample count != batch size");
        }
        const int out_node = net.output_nodes[ch.output_index];
        double loss = 0.0;
        bool diverged = false;
        for (int p = 0; p < batch.b && !diverged; ++p) {
            input.setZero();
            for (int k = 0; k < scenario.n_inputs; ++k) {
                if (ch.encoding[k]) input[net.input_nodes[k]] = batch.levels[p];
            }
            try {
                const SimResult sim = simulate_to_steady_state(net, input, settings);
                const double err = sim.state[out_node] - ch.target.samples[p].second;
                loss += 0.5 * err * err;
            } catch (const DivergenceError&) {
                diverged = true;
            }
        }
        if (diverged) loss = options.divergence_penalty_factor * batch.b;
        result.per_channel.push_back(loss);
        result.channel_diverged.push_back(diverged ? 1 : 0);
        result.any_diverged = result.any_diverged || diverged;
        result.total += loss;
    }
    return result;
}

bool is_learned(const std::vector<double>& per_channel, int b) {
    if (per_channel.empty()) return false;
    return std::all_of(per_channel.begin(), per_channel.end(),
                       [b](double loss) { return is_learned(loss, b); });
}

std::vector<EncodingResponse> encoding_sweep(const Network& net, int n_inputs, const Batch& batch,
                                             const SimulationSettings& settings) {
    batch.validate();
    if (static_cast<int>(net.input_nodes.size()) != n_inputs) {
        throw ContractError("encoding_sweep: network input-node count does not match n_inputs");
    }
    const int n_out = static_cast<int>(net.output_nodes.size());
    std::vector<EncodingResponse> responses;
    responses.reserve(std::size_t{1} << n_inputs);

    Eigen::VectorXd input(net.n_nodes);
    for (int code = 0; code < (1 << n_inputs); ++code) {
        EncodingResponse resp;
        resp.encoding.resize(n_inputs);
        for (int k = 0; k < n_inputs; ++k) resp.encoding[k] = (code >> k) & 1;
        resp.outputs.setConstant(batch.b, n_out, std::numeric_limits<double>::quiet_NaN());
        for (int p = 0; p < batch.b; ++p) {
            input.setZero();
            for (int k = 0; k < n_inputs; ++k) {
                if (resp.encoding[k]) input[net.input_nodes[k]] = batch.levels[p];
            }
            try {
                const SimResult sim = simulate_to_steady_state(net, input, settings);
                for (int o = 0; o < n_out; ++o) resp.outputs(p, o) = sim.state[net.output_nodes[o]];
            } catch (const DivergenceError&) {
                resp.diverged = true;
            }
        }
        responses.push_back(std::move(resp));
    }
    return responses;
}

} // namespace fnet
