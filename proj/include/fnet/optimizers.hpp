#pragma once

#include "fnet/network.hpp"
#include "fnet/rng.hpp"
#include "fnet/simulation.hpp"
#include "fnet/tasks.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace fnet {

enum class Algorithm { random_search, sga, cmaes, spso2011, acor, gd };

/// Interval populations are drawn from at generation zero. Searches then
/// roam the full weight band.
struct InitBox {
    double lo = 0.0;
    double hi = 1.0;
};

[[nodiscard]] std::string to_string(Algorithm algo);
[[nodiscard]] Algorithm algorithm_from_string(const std::string& s);

struct SgaParams {
    int selection_pressure = 4;  // keep the top 1/s_p of the population
    double mutation_rate = 0.1;  // per-gene probability
    double mutation_sigma = 0.5; // std of the additive Gaussian perturbation
};

struct CmaesParams {
    double initial_sigma = 0.0; // <= 0 selects 0.3 * band width
    int lambda = 0;             // <= 0 selects 4 + floor(3 ln D)
};

struct PsoParams {
    int swarm_size = 40;
    int informants = 3; // informed particles per particle, besides itself
};

struct AcorParams {
    int archive_size = 50;           // k
    double locality = 0.1;           // q
    double convergence_speed = 0.85; // xi
    int ants_per_iter = 40;          // m
};

struct GdParams {
    double learning_rate = 0.2;
    double fd_step = 1e-3; // central-difference probe h
};

struct OptimizerConfig {
    Algorithm algorithm = Algorithm::sga;
    int population_size = 224; // sga / random_search batch per generation
    int max_generations = 2000;
    std::int64_t max_evaluations = 0; // 0 = unbounded
    std::uint64_t seed = 0;
    WeightBand band{};
    SgaParams sga{};
    CmaesParams cmaes{};
    PsoParams pso{};
    AcorParams acor{};
    GdParams gd{};
    int workers = 1;                // parallel fan-out of fitness evaluations
    bool record_population = false; // keep the final population in the record

    void validate() const;
};

[[nodiscard]] nlohmann::ordered_json optimizer_config_to_json(const OptimizerConfig& config);

/// Parses a config document, filling defaults. Unknown keys and
/// out-of-range values raise ConfigError naming the field.
[[nodiscard]] OptimizerConfig optimizer_config_from_json(const nlohmann::ordered_json& doc);

struct TrajectoryPoint {
    int generation = 0;
    std::int64_t evaluations = 0;
    double elite_cost = 0.0;
};

/// Outcome of one optimization run. Wall-clock time is observational
/// metadata and is excluded from the deterministic serialized form.
struct RunRecord {
    OptimizerConfig config;
    std::uint64_t seed = 0;
    std::vector<TrajectoryPoint> trajectory;
    int generations_used = 0;
    std::int64_t evaluations_used = 0;
    bool converged = false;
    double final_cost = 0.0;
    std::vector<double> final_per_channel;
    Network final_network;
    double wall_clock_seconds = 0.0;
    std::vector<Eigen::VectorXd> final_population; // only if record_population
};

[[nodiscard]] std::string run_record_to_json_string(const RunRecord& record,
                                                    const TaskSpec& task);

/// Objective seen by the search backends: total loss plus the per-channel
/// detail needed for the learned check.
using BatchEvalFn =
    std::function<std::vector<LossResult>(const std::vector<Eigen::VectorXd>&)>;

struct GenerationResult {
    std::int64_t evaluations = 0;
    double best_cost = 0.0;
    Eigen::VectorXd best_genome;
    LossResult best_result;
};

/// One search algorithm driving the generation loop. step() must evaluate
/// candidates through the supplied function only, so evaluation accounting
/// stays exact.
class SearchBackend {
public:
    virtual ~SearchBackend() = default;

    /// Evaluations the next step() call will consume.
    [[nodiscard]] virtual std::int64_t next_generation_evaluations() const = 0;

    virtual GenerationResult step(const BatchEvalFn& evaluate) = 0;

    /// Population snapshot where the notion applies (SGA); empty otherwise.
    [[nodiscard]] virtual std::vector<Eigen::VectorXd> population() const { return {}; }

    /// Seeds the initial population (SGA transfer continuation).
    virtual void seed_population(const std::vector<Eigen::VectorXd>& genomes);
};

[[nodiscard]] std::unique_ptr<SearchBackend> make_backend(const OptimizerConfig& config,
                                                          int dimension);

/// Builds the batch evaluator for a task over a network skeleton; candidates
/// are mapped genome -> weights and scored with evaluate_loss. Worker count
/// only distributes whole candidates, so results are identical for any value.
[[nodiscard]] BatchEvalFn make_task_evaluator(const TaskSpec& task, const Network& net_template,
                                              const SimulationSettings& settings, int workers,
                                              const LossOptions& options = {});

/// Per-generation observer; receives the generation index and the elite
/// network after each recorded trajectory point.
using GenerationObserver = std::function<void(int generation, const Network& elite)>;

/// Runs the configured backend until the elite satisfies the per-channel
/// learning tolerance, the generation cap is reached, or the next generation
/// would exceed the evaluation budget.
[[nodiscard]] RunRecord run(const OptimizerConfig& config, const TaskSpec& task,
                            const Network& net_template,
                            const SimulationSettings& settings = {},
                            const GenerationObserver& observer = nullptr);

/// Same, but the backend starts from the supplied population (clone-padded
/// or truncated to the configured population size). SGA only.
[[nodiscard]] RunRecord run_from_population(const OptimizerConfig& config, const TaskSpec& task,
                                            const Network& net_template,
                                            const std::vector<Eigen::VectorXd>& initial_population,
                                            const SimulationSettings& settings = {},
                                            const GenerationObserver& observer = nullptr);

} // namespace fnet
