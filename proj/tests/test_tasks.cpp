#include "fnet/errors.hpp"
#include "fnet/tasks.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace fnet;

TEST_CASE("built-in target shapes") {
    const int b = 32;
    const TargetFunction band = make_target(TargetName::band_pass, b);
    const TargetFunction valley = make_target(TargetName::valley, b);
    const TargetFunction thresh = make_target(TargetName::threshold, b);
    const TargetFunction peak = make_target(TargetName::peak, b);

    SUBCASE("band-pass: low-high-low over thirds") {
        CHECK(band.samples.front().second == 0.1);
        CHECK(band.samples[15].second == 0.9); // mid-range
        CHECK(band.samples.back().second == 0.1);
        const int highs = static_cast<int>(
            std::count_if(band.samples.begin(), band.samples.end(),
                          [](const auto& s) { return s.second > 0.5; }));
        CHECK(highs > 0);
        CHECK(highs < b / 2);
    }
    SUBCASE("threshold: low then high split at midpoint") {
        CHECK(thresh.samples[12].second == 0.1); // before the ramp
        CHECK(thresh.samples[19].second == 0.9); // past the ramp
        for (int i = 1; i < b; ++i) {
            CHECK(thresh.samples[i].second >= thresh.samples[i - 1].second);
        }
        const int highs = static_cast<int>(
            std::count_if(thresh.samples.begin(), thresh.samples.end(),
                          [](const auto& s) { return s.second > 0.5; }));
        CHECK(highs == 16); // above 0.5 exactly past the midpoint
    }
    SUBCASE("valley is the reversal of band-pass") {
        for (int i = 0; i < b; ++i) {
            CHECK(valley.samples[i].second + band.samples[i].second ==
                  doctest::Approx(1.0).epsilon(1e-15)); // low + high
        }
    }
    SUBCASE("peak is a narrower band than band-pass") {
        const auto count_high = [](const TargetFunction& t) {
            return std::count_if(t.samples.begin(), t.samples.end(),
                                 [](const auto& s) { return s.second > 0.5; });
        };
        CHECK(count_high(peak) > 0);
        CHECK(count_high(peak) < count_high(band));
    }
    SUBCASE("every built-in target stays strictly inside (0,1)") {
        for (const auto* t : {&band, &valley, &thresh, &peak}) {
            for (const auto& [x, y] : t->samples) {
                CHECK(y > 0.0);
                CHECK(y < 1.0);
            }
        }
        CHECK_NOTHROW(make_target(TargetName::linear, b).validate());
    }
    SUBCASE("unknown name raises") {
        CHECK_THROWS_AS((void)make_target("bandpass_typo", b), ConfigError);
        CHECK_THROWS_AS((void)make_target(TargetName::custom, b), ConfigError);
    }
    SUBCASE("input levels are strictly increasing over the range") {
        CHECK(band.samples.front().first == 0.0);
        CHECK(band.samples.back().first == 1.0);
        for (int i = 1; i < b; ++i) CHECK(band.samples[i].first > band.samples[i - 1].first);
    }
}

TEST_CASE("encoding string convention: rightmost char is input node 0") {
    CHECK(encoding_from_string("01") == std::vector<std::uint8_t>{1, 0});
    CHECK(encoding_from_string("10") == std::vector<std::uint8_t>{0, 1});
    CHECK(encoding_to_string({1, 0}) == "01");
    CHECK(encoding_to_string({1, 1, 0}) == "011");
    CHECK_THROWS_AS((void)encoding_from_string("0a"), ConfigError);
}

TEST_CASE("scenario validation") {
    TaskSpec task = make_multiplex_task(ScenarioKind::binary_in_multiplex_out,
                                        {TargetName::band_pass, TargetName::valley,
                                         TargetName::threshold});
    CHECK(task.scenario.n_inputs == 2);
    CHECK(task.scenario.n_outputs == 1);
    REQUIRE(task.scenario.channels.size() == 3);
    CHECK(encoding_to_string(task.scenario.channels[0].encoding) == "01");
    CHECK(encoding_to_string(task.scenario.channels[1].encoding) == "10");
    CHECK(encoding_to_string(task.scenario.channels[2].encoding) == "11");

    SUBCASE("all-zeros encodings are rejected in training channels") {
        task.scenario.channels[0].encoding = {0, 0};
        CHECK_THROWS_AS(task.scenario.validate(), ConfigError);
    }
    SUBCASE("duplicate (encoding, output) pairs are rejected") {
        task.scenario.channels[1] = task.scenario.channels[0];
        CHECK_THROWS_AS(task.scenario.validate(), ConfigError);
    }
    SUBCASE("non-binary kinds require all-ones encodings") {
        TaskSpec simple = make_multiplex_task(ScenarioKind::many_in_many_out,
                                              {TargetName::band_pass, TargetName::valley});
        simple.scenario.channels[0].encoding = {1, 0};
        CHECK_THROWS_AS(simple.scenario.validate(), ConfigError);
    }
}

TEST_CASE("task JSON round-trip rejects unknown fields") {
    const TaskSpec task = make_multiplex_task(ScenarioKind::binary_in_many_out,
                                              {TargetName::band_pass, TargetName::valley,
                                               TargetName::threshold});
    const std::string text = task_to_json_string(task);
    const TaskSpec back = task_from_json_string(text);
    CHECK(task_to_json_string(back) == text);
    CHECK(back.scenario.kind == task.scenario.kind);
    CHECK(back.channel_count() == 3);

    CHECK_THROWS_AS((void)task_from_json_string(R"({"b":32,"scenario":"one_in_one_out",
        "n_inputs":1,"n_outputs":1,"channels":[],"surprise":1})"),
                    ConfigError);
}

namespace {

/// Two-node line: input node 0, output node 1, no wiring. The output sits
/// at (k1/k2) f(0) regardless of the input level.
Network constant_output_net(double k1_out = 1.0) {
    Network net = Network::dense_template(2, 1, 1);
    net.k1[1] = k1_out;
    return net;
}

TaskSpec constant_target_task(double desired, int b = 32) {
    TaskSpec task;
    task.batch = Batch::linspace(b);
    task.scenario.kind = ScenarioKind::one_in_one_out;
    task.scenario.n_inputs = 1;
    task.scenario.n_outputs = 1;
    Channel ch;
    ch.encoding = {1};
    ch.output_index = 0;
    ch.target.name = TargetName::custom;
    for (double level : task.batch.levels) ch.target.samples.emplace_back(level, desired);
    task.scenario.channels.push_back(std::move(ch));
    task.validate();
    return task;
}

} // namespace

TEST_CASE("loss is zero when outputs equal targets") {
    // Output settles at f(0) = 0.5 for every level; target is 0.5.
    const Network net = constant_output_net();
    const TaskSpec task = constant_target_task(0.5);
    const LossResult loss =
        evaluate_loss(net, task.scenario, task.batch, SimulationSettings{});
    CHECK(loss.total == doctest::Approx(0.0).epsilon(1e-10));
    CHECK_FALSE(loss.any_diverged);
}

TEST_CASE("constant unit error over 32 points costs 16") {
    // k1 = 3 pushes the output fixed point to 3 * 0.5 = 1.5; target 0.5
    // leaves |error| = 1 at each of the 32 points: sum 1/2 * 1^2 = 16.
    const Network net = constant_output_net(3.0);
    const TaskSpec task = constant_target_task(0.5);
    const LossResult loss =
        evaluate_loss(net, task.scenario, task.batch, SimulationSettings{});
    CHECK(loss.total == doctest::Approx(16.0).epsilon(1e-6));
}

TEST_CASE("learning tolerance is 5% of batch size") {
    CHECK(learning_tolerance(32) == doctest::Approx(1.6));
    CHECK(is_learned(1.59, 32));
    CHECK(is_learned(0.0, 32));
    CHECK_FALSE(is_learned(1.7, 32));
    CHECK(is_learned(std::vector<double>{1.59, 0.2}, 32));
    CHECK_FALSE(is_learned(std::vector<double>{1.7, 0.0, 0.0}, 32)); // per-channel rule
}

TEST_CASE("per-channel losses add up to the total and ignore channel order") {
    Network net = Network::dense_template(4, 1, 2);
    net.weights << 0.0, 0.0, 0.0, 0.0,
                   0.7, 0.0, -0.3, 0.0,
                   0.2, 0.5, 0.0, 0.0,
                   -0.4, 0.0, 0.6, 0.0;

    TaskSpec task;
    task.batch = Batch::linspace(16);
    task.scenario.kind = ScenarioKind::one_in_many_out;
    task.scenario.n_inputs = 1;
    task.scenario.n_outputs = 2;
    task.scenario.channels.push_back(
        {{1}, 0, make_target(TargetName::band_pass, 16)});
    task.scenario.channels.push_back(
        {{1}, 1, make_target(TargetName::threshold, 16)});
    task.validate();

    const LossResult loss =
        evaluate_loss(net, task.scenario, task.batch, SimulationSettings{});
    REQUIRE(loss.per_channel.size() == 2);
    CHECK(loss.total == loss.per_channel[0] + loss.per_channel[1]);
    CHECK(loss.total >= 0.0);

    WiringScenario permuted = task.scenario;
    std::swap(permuted.channels[0], permuted.channels[1]);
    const LossResult swapped = evaluate_loss(net, permuted, task.batch, SimulationSettings{});
    CHECK(swapped.total == doctest::Approx(loss.total).epsilon(1e-15));
    CHECK(swapped.per_channel[0] == loss.per_channel[1]);
}

TEST_CASE("diverged channels are charged the penalty loss and flagged") {
    Network net = constant_output_net();
    net.k1[1] = 1e7; // output node blows past the guard
    const TaskSpec task = constant_target_task(0.5);
    const LossResult loss =
        evaluate_loss(net, task.scenario, task.batch, SimulationSettings{});
    CHECK(loss.any_diverged);
    REQUIRE(loss.channel_diverged.size() == 1);
    CHECK(loss.channel_diverged[0] == 1);
    CHECK(loss.total == doctest::Approx(10.0 * 32));
}

TEST_CASE("scenario/network mismatch is a contract violation") {
    const Network net = constant_output_net();
    TaskSpec task = make_multiplex_task(ScenarioKind::binary_in_multiplex_out,
                                        {TargetName::band_pass, TargetName::valley,
                                         TargetName::threshold});
    CHECK_THROWS_AS(
        (void)evaluate_loss(net, task.scenario, task.batch, SimulationSettings{}),
        ContractError);
}

TEST_CASE("encoding sweep probes every encoding including all-zeros") {
    Network net = Network::dense_template(5, 2, 1);
    net.weights.setConstant(0.3);
    const Batch batch = Batch::linspace(8);
    const auto sweep = encoding_sweep(net, 2, batch, SimulationSettings{});
    REQUIRE(sweep.size() == 4);

    CHECK(encoding_to_string(sweep[0].encoding) == "00");
    // All-zeros encoding: the input vector never depends on the level, so
    // the response curve is exactly flat.
    const Eigen::VectorXd col = sweep[0].outputs.col(0);
    CHECK(col.maxCoeff() - col.minCoeff() == 0.0);

    for (const auto& resp : sweep) {
        CHECK_FALSE(resp.diverged);
        CHECK(resp.outputs.rows() == 8);
        CHECK(resp.outputs.allFinite());
    }
}
