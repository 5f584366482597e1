#include "fnet/optimizers.hpp"

#include "fnet/acor.hpp"
#include "fnet/cmaes.hpp"
#include "fnet/errors.hpp"
#include "fnet/parallel.hpp"
#include "fnet/pso.hpp"
#include "fnet/sga.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

namespace fnet {

namespace {
using ordered_json = nlohmann::ordered_json;
}

std::string to_string(Algorithm algo) {
    switch (algo) {
    case Algorithm::random_search: return "random_search";
    case Algorithm::sga: return "sga";
    case Algorithm::cmaes: return "cmaes";
    case Algorithm::spso2011: return "spso2011";
    case Algorithm::acor: return "acor";
    case Algorithm::gd: return "gd";
    }
    return "sga";
}

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "random_search" || s == "rs") return Algorithm::random_search;
    if (s == "sga") return Algorithm::sga;
    if (s == "cmaes") return Algorithm::cmaes;
    if (s == "spso2011" || s == "pso") return Algorithm::spso2011;
    if (s == "acor") return Algorithm::acor;
    if (s == "gd") return Algorithm::gd;
    throw ConfigError("algorithm", "unknown algorithm '" + s + "'");
}

void OptimizerConfig::validate() const {
    const int min_pop =
        (algorithm == Algorithm::gd || algorithm == Algorithm::random_search) ? 1 : 2;
    if (population_size < min_pop) {
        throw ConfigError("population_size", "must be >= " + std::to_string(min_pop));
    }
    if (max_generations < 1) throw ConfigError("max_generations", "must be >= 1");
    if (max_evaluations < 0) throw ConfigError("max_evaluations", "must be >= 0");
    if (workers < 1) throw ConfigError("workers", "must be >= 1");
    if (!(band.lo < band.hi)) throw ConfigError("band", "lo must be < hi");

    if (sga.selection_pressure < 1) throw ConfigError("sga.selection_pressure", "must be >= 1");
    if (sga.mutation_rate < 0.0 || sga.mutation_rate > 1.0) {
        throw ConfigError("sga.mutation_rate", "must lie in [0, 1]");
    }
    if (sga.mutation_sigma < 0.0) throw ConfigError("sga.mutation_sigma", "must be >= 0");
    if (cmaes.lambda != 0 && cmaes.lambda < 2) throw ConfigError("cmaes.lambda", "must be >= 2");
    if (cmaes.initial_sigma < 0.0) throw ConfigError("cmaes.initial_sigma", "must be >= 0");
    if (pso.swarm_size < 2) throw ConfigError("pso.swarm_size", "must be >= 2");
    if (pso.informants < 1) throw ConfigError("pso.informants", "must be >= 1");
    if (acor.archive_size < 2) throw ConfigError("acor.archive_size", "must be >= 2");
    if (!(acor.locality > 0.0)) throw ConfigError("acor.locality", "must be > 0");
    if (!(acor.convergence_speed > 0.0)) throw ConfigError("acor.convergence_speed", "must be > 0");
    if (acor.ants_per_iter < 1) throw ConfigError("acor.ants_per_iter", "must be >= 1");
    if (gd.learning_rate < 0.0) throw ConfigError("gd.learning_rate", "must be >= 0");
    if (!(gd.fd_step > 0.0)) throw ConfigError("gd.fd_step", "must be > 0");
}

ordered_json optimizer_config_to_json(const OptimizerConfig& config) {
    ordered_json doc;
    doc["algorithm"] = to_string(config.algorithm);
    doc["population_size"] = config.population_size;
    doc["max_generations"] = config.max_generations;
    doc["max_evaluations"] = config.max_evaluations;
    doc["seed"] = config.seed;
    doc["band"] = {config.band.lo, config.band.hi};
    doc["workers"] = config.workers;
    doc["record_population"] = config.record_population;
    doc["sga"] = {{"selection_pressure", config.sga.selection_pressure},
                  {"mutation_rate", config.sga.mutation_rate},
                  {"mutation_sigma", config.sga.mutation_sigma}};
    doc["cmaes"] = {{"initial_sigma", config.cmaes.initial_sigma}, {"lambda", config.cmaes.lambda}};
    doc["pso"] = {{"swarm_size", config.pso.swarm_size}, {"informants", config.pso.informants}};
    doc["acor"] = {{"archive_size", config.acor.archive_size},
                   {"locality", config.acor.locality},
                   {"convergence_speed", config.acor.convergence_speed},
                   {"ants_per_iter", config.acor.ants_per_iter}};
    doc["gd"] = {{"learning_rate", config.gd.learning_rate}, {"fd_step", config.gd.fd_step}};
    return doc;
}

namespace {

void reject_unknown_keys(const ordered_json& doc, const std::set<std::string>& known,
                         const std::string& prefix) {
    for (const auto& [key, _] : doc.items()) {
        if (!known.count(key)) throw ConfigError(prefix + key, "unknown field");
    }
}

} // namespace

OptimizerConfig optimizer_config_from_json(const ordered_json& doc) {
    static const std::set<std::string> known = {
        "algorithm", "population_size", "max_generations", "max_evaluations", "seed",
        "band",      "workers",         "record_population", "sga",           "cmaes",
        "pso",       "acor",            "gd"};
    reject_unknown_keys(doc, known, "");

    OptimizerConfig config;
    try {
        if (doc.contains("algorithm")) {
            config.algorithm = algorithm_from_string(doc.at("algorithm").get<std::string>());
        }
        if (doc.contains("population_size")) config.population_size = doc.at("population_size").get<int>();
        if (doc.contains("max_generations")) config.max_generations = doc.at("max_generations").get<int>();
        if (doc.contains("max_evaluations")) config.max_evaluations = doc.at("max_evaluations").get<std::int64_t>();
        if (doc.contains("seed")) config.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("band")) {
            config.band.lo = doc.at("band").at(0).get<double>();
            config.band.hi = doc.at("band").at(1).get<double>();
        }
        if (doc.contains("workers")) config.workers = doc.at("workers").get<int>();
        if (doc.contains("record_population")) config.record_population = doc.at("record_population").get<bool>();
        if (doc.contains("sga")) {
            const auto& s = doc.at("sga");
            reject_unknown_keys(s, {"selection_pressure", "mutation_rate", "mutation_sigma"}, "sga.");
            if (s.contains("selection_pressure")) config.sga.selection_pressure = s.at("selection_pressure").get<int>();
            if (s.contains("mutation_rate")) config.sga.mutation_rate = s.at("mutation_rate").get<double>();
            if (s.contains("mutation_sigma")) config.sga.mutation_sigma = s.at("mutation_sigma").get<double>();
        }
        if (doc.contains("cmaes")) {
            const auto& s = doc.at("cmaes");
            reject_unknown_keys(s, {"initial_sigma", "lambda"}, "cmaes.");
            if (s.contains("initial_sigma")) config.cmaes.initial_sigma = s.at("initial_sigma").get<double>();
            if (s.contains("lambda")) config.cmaes.lambda = s.at("lambda").get<int>();
        }
        if (doc.contains("pso")) {
            const auto& s = doc.at("pso");
            reject_unknown_keys(s, {"swarm_size", "informants"}, "pso.");
            if (s.contains("swarm_size")) config.pso.swarm_size = s.at("swarm_size").get<int>();
            if (s.contains("informants")) config.pso.informants = s.at("informants").get<int>();
        }
        if (doc.contains("acor")) {
            const auto& s = doc.at("acor");
            reject_unknown_keys(s, {"archive_size", "locality", "convergence_speed", "ants_per_iter"},
                                "acor.");
            if (s.contains("archive_size")) config.acor.archive_size = s.at("archive_size").get<int>();
            if (s.contains("locality")) config.acor.locality = s.at("locality").get<double>();
            if (s.contains("convergence_speed")) config.acor.convergence_speed = s.at("convergence_speed").get<double>();
            if (s.contains("ants_per_iter")) config.acor.ants_per_iter = s.at("ants_per_iter").get<int>();
        }
        if (doc.contains("gd")) {
            const auto& s = doc.at("gd");
            reject_unknown_keys(s, {"learning_rate", "fd_step"}, "gd.");
            if (s.contains("learning_rate")) config.gd.learning_rate = s.at("learning_rate").get<double>();
            if (s.contains("fd_step")) config.gd.fd_step = s.at("fd_step").get<double>();
        }
    } catch (const ordered_json::exception& e) {
        throw ConfigError("config", std::string("malformed value: ") + e.what());
    }
    config.validate();
    return config;
}

void SearchBackend::seed_population(const std::vector<Eigen::VectorXd>&) {
    throw ConfigError("algorithm", "this backend does not support population seeding");
}

namespace {

class RandomSearchBackend final : public SearchBackend {
public:
    RandomSearchBackend(int batch_size, int dimension, std::uint64_t seed, InitBox init)
        : batch_size_(batch_size), dimension_(dimension), init_(init), rng_(seed) {}

    [[nodiscard]] std::int64_t next_generation_evaluations() const override { return batch_size_; }

    GenerationResult step(const BatchEvalFn& evaluate) override {
        std::vector<Eigen::VectorXd> batch;
        batch.reserve(batch_size_);
        for (int i = 0; i < batch_size_; ++i) {
            Eigen::VectorXd genome(dimension_);
            for (int d = 0; d < dimension_; ++d) genome[d] = rng_.uniform(init_.lo, init_.hi);
            batch.push_back(std::move(genome));
        }
        const std::vector<LossResult> results = evaluate(batch);
        int best = 0;
        for (std::size_t i = 0; i < results.size(); ++i) {
            if (results[i].total < results[best].total) best = static_cast<int>(i);
        }
        GenerationResult out;
        out.evaluations = batch_size_;
        out.best_cost = results[best].total;
        out.best_genome = batch[best];
        out.best_result = results[best];
        return out;
    }

private:
    int batch_size_;
    int dimension_;
    InitBox init_;
    Rng rng_;
};

/// Finite-difference descent over the full simulate-and-loss pipeline.
/// Probes are clamped into the band, so boundary coordinates degrade to
/// one-sided (or zero) differences.
class GdBackend final : public SearchBackend {
public:
    GdBackend(const GdParams& params, WeightBand band, int dimension, std::uint64_t seed,
              InitBox init)
        : params_(params), band_(band), dimension_(dimension), init_(init), rng_(seed) {}

    [[nodiscard]] std::int64_t next_generation_evaluations() const override {
        return 2 * static_cast<std::int64_t>(dimension_) + 1;
    }

    GenerationResult step(const BatchEvalFn& evaluate) override {
        if (genome_.size() == 0) {
            genome_.resize(dimension_);
            for (int d = 0; d < dimension_; ++d) genome_[d] = rng_.uniform(init_.lo, init_.hi);
        }

        std::vector<Eigen::VectorXd> probes;
        probes.reserve(2 * dimension_);
        for (int d = 0; d < dimension_; ++d) {
            Eigen::VectorXd plus = genome_;
            plus[d] = band_.clamp(plus[d] + params_.fd_step);
            Eigen::VectorXd minus = genome_;
            minus[d] = band_.clamp(minus[d] - params_.fd_step);
            probes.push_back(std::move(plus));
            probes.push_back(std::move(minus));
        }
        const std::vector<LossResult> probe_results = evaluate(probes);

        Eigen::VectorXd gradient = Eigen::VectorXd::Zero(dimension_);
        for (int d = 0; d < dimension_; ++d) {
            const LossResult& plus = probe_results[2 * d];
            const LossResult& minus = probe_results[2 * d + 1];
            const double span = probes[2 * d][d] - probes[2 * d + 1][d];
            if (plus.any_diverged || minus.any_diverged || span == 0.0) {
                continue; // gradient pinned to 0 for this coordinate
            }
            gradient[d] = (plus.total - minus.total) / span;
        }

        for (int d = 0; d < dimension_; ++d) {
            genome_[d] = band_.clamp(genome_[d] - params_.learning_rate * gradient[d]);
        }
        const std::vector<LossResult> new_result = evaluate({genome_});

        // Best over everything this generation touched, probes included.
        GenerationResult out;
        out.evaluations = 2 * static_cast<std::int64_t>(dimension_) + 1;
        out.best_cost = new_result[0].total;
        out.best_genome = genome_;
        out.best_result = new_result[0];
        for (std::size_t i = 0; i < probe_results.size(); ++i) {
            if (probe_results[i].total < out.best_cost) {
                out.best_cost = probe_results[i].total;
                out.best_genome = probes[i];
                out.best_result = probe_results[i];
            }
        }
        return out;
    }

private:
    GdParams params_;
    WeightBand band_;
    int dimension_;
    InitBox init_;
    Rng rng_;
    Eigen::VectorXd genome_;
};

} // namespace

std::unique_ptr<SearchBackend> make_backend(const OptimizerConfig& config, int dimension) {
    config.validate();
    switch (config.algorithm) {
    case Algorithm::random_search:
        return std::make_unique<RandomSearchBackend>(config.population_size, dimension,
                                                     config.seed, InitBox{});
    case Algorithm::sga:
        return std::make_unique<SgaBackend>(config.population_size, config.sga, config.band,
                                            dimension, config.seed, InitBox{});
    case Algorithm::cmaes:
        return std::make_unique<CmaesBackend>(config.cmaes, config.band, dimension, config.seed);
    case Algorithm::spso2011:
        return std::make_unique<SpsoSwarm>(config.pso, config.band, dimension, config.seed,
                                           InitBox{});
    case Algorithm::acor:
        return std::make_unique<AcorBackend>(config.acor, config.band, dimension, config.seed,
                                             InitBox{});
    case Algorithm::gd:
        return std::make_unique<GdBackend>(config.gd, config.band, dimension, config.seed,
                                           InitBox{});
    }
    throw ConfigError("algorithm", "unhandled algorithm");
}

BatchEvalFn make_task_evaluator(const TaskSpec& task, const Network& net_template,
                                const SimulationSettings& settings, int workers,
                                const LossOptions& options) {
    task.validate();
    return [task, net_template, settings, workers, options](
               const std::vector<Eigen::VectorXd>& genomes) -> std::vector<LossResult> {
        std::vector<LossResult> results(genomes.size());
        parallel_chunks(genomes.size(), workers, [&](std::size_t begin, std::size_t end) {
            Network scratch = net_template;
            for (std::size_t i = begin; i < end; ++i) {
                scratch.set_genome(genomes[i]);
                results[i] = evaluate_loss(scratch, task.scenario, task.batch, settings, options);
            }
        });
        return results;
    };
}

namespace {

RunRecord run_impl(const OptimizerConfig& config, const TaskSpec& task,
                   const Network& net_template, const SimulationSettings& settings,
                   const GenerationObserver& observer,
                   const std::vector<Eigen::VectorXd>* initial_population) {
    config.validate();
    task.validate();
    settings.validate();
    net_template.validate(config.band);
    if (static_cast<int>(net_template.input_nodes.size()) != task.scenario.n_inputs) {
        throw ConfigError("net_template", "input-node count does not match the task scenario");
    }
    if (static_cast<int>(net_template.output_nodes.size()) < task.scenario.n_outputs) {
        throw ConfigError("net_template", "output-node count does not match the task scenario");
    }

    const int dimension = net_template.n_nodes * net_template.n_nodes;
    auto backend = make_backend(config, dimension);
    if (initial_population) backend->seed_population(*initial_population);
    const BatchEvalFn evaluate =
        make_task_evaluator(task, net_template, settings, config.workers);

    RunRecord record;
    record.config = config;
    record.seed = config.seed;

    const auto t0 = std::chrono::steady_clock::now();
    double elite_cost = std::numeric_limits<double>::infinity();
    Eigen::VectorXd elite_genome;
    LossResult elite_result;
    Network elite_net = net_template;

    for (int g = 1; g <= config.max_generations; ++g) {
        if (config.max_evaluations > 0 &&
            record.evaluations_used + backend->next_generation_evaluations() >
                config.max_evaluations) {
            break;
        }
        const GenerationResult res = backend->step(evaluate);
        record.evaluations_used += res.evaluations;
        if (res.best_cost < elite_cost) {
            elite_cost = res.best_cost;
            elite_genome = res.best_genome;
            elite_result = res.best_result;
        }
        record.trajectory.push_back({g, record.evaluations_used, elite_cost});
        record.generations_used = g;

        if (observer) {
            elite_net.set_genome(elite_genome);
            observer(g, elite_net);
        }
        if (is_learned(elite_result.per_channel, task.batch.b)) {
            record.converged = true;
            break;
        }
    }

    record.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    record.final_network = net_template;
    if (elite_genome.size() > 0) {
        record.final_network.set_genome(elite_genome);
        record.final_cost = elite_cost;
        record.final_per_channel = elite_result.per_channel;
    } else {
        record.final_cost = std::numeric_limits<double>::quiet_NaN();
    }
    if (config.record_population) record.final_population = backend->population();
    return record;
}

} // namespace

RunRecord run(const OptimizerConfig& config, const TaskSpec& task, const Network& net_template,
              const SimulationSettings& settings, const GenerationObserver& observer) {
    return run_impl(config, task, net_template, settings, observer, nullptr);
}

RunRecord run_from_population(const OptimizerConfig& config, const TaskSpec& task,
                              const Network& net_template,
                              const std::vector<Eigen::VectorXd>& initial_population,
                              const SimulationSettings& settings,
                              const GenerationObserver& observer) {
    return run_impl(config, task, net_template, settings, observer, &initial_population);
}

std::string run_record_to_json_string(const RunRecord& record, const TaskSpec& task) {
    ordered_json doc;
    doc["schema"] = "run_record.v1";
    doc["config"] = optimizer_config_to_json(record.config);
    doc["task"] = ordered_json::parse(task_to_json_string(task));
    doc["seed"] = record.seed;
    ordered_json rows = ordered_json::array();
    for (const auto& pt : record.trajectory) {
        rows.push_back({{"generation", pt.generation},
                        {"evaluations", pt.evaluations},
                        {"elite_cost", pt.elite_cost}});
    }
    doc["trajectory"] = std::move(rows);
    doc["generations_used"] = record.generations_used;
    doc["evaluations_used"] = record.evaluations_used;
    doc["converged"] = record.converged;
    if (!record.trajectory.empty()) {
        doc["final_cost"] = record.final_cost;
        doc["final_per_channel"] = record.final_per_channel;
    } else {
        doc["final_cost"] = nullptr;
        doc["final_per_channel"] = ordered_json::array();
    }
    doc["final_network"] = ordered_json::parse(network_to_json_string(record.final_network));
    return doc.dump(2) + "\n";
}

} // namespace fnet
