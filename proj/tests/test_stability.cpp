#include "fnet/errors.hpp"
#include "fnet/stability.hpp"

#include <doctest.h>

#include <random>

using namespace fnet;

namespace {

Network random_net(int n, std::mt19937_64& gen, double scale) {
    Network net = Network::dense_template(n, 1, 1);
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) net.weights(i, j) = dist(gen);
    return net;
}

Eigen::MatrixXd finite_difference_jacobian(const Network& net, const NodeState& y,
                                           const Eigen::VectorXd& input, double h = 1e-6) {
    const int n = net.n_nodes;
    Eigen::MatrixXd J(n, n);
    for (int j = 0; j < n; ++j) {
        NodeState plus = y, minus = y;
        plus[j] += h;
        minus[j] -= h;
        J.col(j) = (dynamics_rhs(net, plus, input) - dynamics_rhs(net, minus, input)) / (2.0 * h);
    }
    return J;
}

} // namespace

TEST_CASE("Jacobian of the isolated node is [-1]") {
    const Network net = Network::dense_template(1, 0, 0);
    const Eigen::VectorXd input = Eigen::VectorXd::Zero(1);
    const SimResult sim = simulate_to_steady_state(net, input, SimulationSettings{});
    REQUIRE(sim.converged);
    const Eigen::MatrixXd J = jacobian_at(net, sim.state, input);
    CHECK(J(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("zero-weight networks keep only the degradation term") {
    Network net = Network::dense_template(3, 1, 1);
    net.k2 << 1.0, 1.5, 0.5;
    const Eigen::VectorXd input = Eigen::VectorXd::Zero(3);
    SimulationSettings settings;
    settings.max_steps = 5000;
    settings.convergence_eps = 1e-12;
    const SimResult sim = simulate_to_steady_state(net, input, settings);
    REQUIRE(sim.converged);
    const Eigen::MatrixXd J = jacobian_at(net, sim.state, input);
    CHECK(J.isApprox((-net.k2).asDiagonal().toDenseMatrix(), 1e-9));
}

TEST_CASE("analytic Jacobian matches central finite differences") {
    std::mt19937_64 gen(2718);
    const SimulationSettings settings;
    int tested = 0;
    for (int rep = 0; rep < 20; ++rep) {
        const Network net = random_net(5, gen, 1.5);
        Eigen::VectorXd input = Eigen::VectorXd::Zero(5);
        input[net.input_nodes[0]] = 0.5;
        SimResult sim{};
        try {
            sim = simulate_to_steady_state(net, input, settings);
        } catch (const DivergenceError&) {
            continue;
        }
        if (!sim.converged) continue;
        const Eigen::MatrixXd J = jacobian_at(net, sim.state, input);
        const Eigen::MatrixXd J_fd = finite_difference_jacobian(net, sim.state, input);
        CHECK((J - J_fd).cwiseAbs().maxCoeff() < 1e-6);
        ++tested;
    }
    CHECK(tested >= 10);
}

TEST_CASE("a non-converged state violates the Jacobian precondition") {
    const Network net = Network::dense_template(2, 1, 1);
    const Eigen::VectorXd input = Eigen::VectorXd::Zero(2);
    const NodeState not_fixed = NodeState::Constant(2, 0.9);
    CHECK_THROWS_AS((void)jacobian_at(net, not_fixed, input), ContractError);
}

TEST_CASE("trace/determinant chart on hand-built matrices") {
    SUBCASE("-I is a stable node (repeated eigenvalue -1)") {
        const Classification c = classify_2d(-Eigen::Matrix2d::Identity());
        CHECK(c.trace == doctest::Approx(-2.0));
        CHECK(c.det == doctest::Approx(1.0));
        CHECK(c.cls == EquilibriumClass::stable_node);
    }
    SUBCASE("negative determinant is a saddle regardless of trace") {
        Eigen::Matrix2d J;
        J << 2.0, 0.0, 0.0, -1.0;
        CHECK(classify_2d(J).cls == EquilibriumClass::saddle);
        J << -2.0, 0.0, 0.0, 1.0;
        CHECK(classify_2d(J).cls == EquilibriumClass::saddle);
    }
    SUBCASE("pure rotation is a center") {
        Eigen::Matrix2d J;
        J << 0.0, -1.0, 1.0, 0.0;
        const Classification c = classify_2d(J);
        CHECK(c.trace == doctest::Approx(0.0));
        CHECK(c.det == doctest::Approx(1.0));
        CHECK(c.cls == EquilibriumClass::center_borderline);
        CHECK(c.borderline);
    }
    SUBCASE("spirals are told from nodes by the discriminant") {
        Eigen::Matrix2d J;
        J << -0.1, -1.0, 1.0, -0.1; // complex pair with negative real part
        CHECK(classify_2d(J).cls == EquilibriumClass::stable_spiral);
        J << 0.1, -1.0, 1.0, 0.1;
        CHECK(classify_2d(J).cls == EquilibriumClass::unstable_spiral);
        J << -3.0, 0.0, 0.0, -1.0;
        CHECK(classify_2d(J).cls == EquilibriumClass::stable_node);
        J << 3.0, 0.0, 0.0, 1.0;
        CHECK(classify_2d(J).cls == EquilibriumClass::unstable_node);
    }
}

TEST_CASE("chart classes agree with direct eigenvalues on random matrices") {
    std::mt19937_64 gen(313);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    int borderline_count = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        Eigen::Matrix2d J;
        J << dist(gen), dist(gen), dist(gen), dist(gen);
        const Classification c = classify_2d(J);
        if (c.borderline && c.cls == EquilibriumClass::center_borderline) {
            ++borderline_count;
            continue;
        }
        const Eigen::Vector2cd eigs = J.eigenvalues();
        const double re0 = eigs[0].real(), re1 = eigs[1].real();
        switch (c.cls) {
        case EquilibriumClass::saddle:
            CHECK(re0 * re1 < 0.0);
            break;
        case EquilibriumClass::stable_node:
        case EquilibriumClass::stable_spiral:
            CHECK(re0 < 0.0);
            CHECK(re1 < 0.0);
            break;
        case EquilibriumClass::unstable_node:
        case EquilibriumClass::unstable_spiral:
            CHECK(re0 > 0.0);
            CHECK(re1 > 0.0);
            break;
        default:
            FAIL("unexpected class");
        }
    }
    CHECK(borderline_count < 5); // boundaries have measure ~0
}

TEST_CASE("discrete Lyapunov equation on hand-solved instances") {
    SUBCASE("W = 0.5 I: P - 0.25 P = I gives P = (4/3) I") {
        const Eigen::MatrixXd W = 0.5 * Eigen::MatrixXd::Identity(2, 2);
        const LyapunovResult result = lyapunov_check(W);
        REQUIRE(result.solvable);
        CHECK(result.P.isApprox((4.0 / 3.0) * Eigen::MatrixXd::Identity(2, 2), 1e-12));
        CHECK(result.positive_definite);
        CHECK(result.spectral_radius == doctest::Approx(0.5));
    }
    SUBCASE("W = 0 degenerates to P = Q") {
        Eigen::MatrixXd Q(2, 2);
        Q << 2.0, 0.5, 0.5, 1.0;
        const LyapunovResult result = lyapunov_check(Eigen::MatrixXd::Zero(2, 2), Q, 64);
        REQUIRE(result.solvable);
        CHECK(result.P.isApprox(Q, 1e-12));
    }
    SUBCASE("an eigenvalue product of 1 is reported unsolvable, not thrown") {
        const LyapunovResult result = lyapunov_check(Eigen::MatrixXd::Identity(2, 2));
        CHECK_FALSE(result.solvable);
        CHECK(result.spectral_radius == doctest::Approx(1.0));
    }
    SUBCASE("contract violations") {
        Eigen::MatrixXd Q(2, 2);
        Q << 1.0, 0.3, -0.3, 1.0; // not symmetric
        CHECK_THROWS_AS((void)lyapunov_check(Eigen::MatrixXd::Zero(2, 2), Q, 64),
                        ContractError);
        CHECK_THROWS_AS((void)lyapunov_check(Eigen::MatrixXd::Zero(65, 65)), SizeCapError);
    }
}

TEST_CASE("Lyapunov PD verdict agrees with the spectral radius oracle") {
    std::mt19937_64 gen(515);
    std::uniform_real_distribution<double> entry(-1.0, 1.0);
    std::uniform_real_distribution<double> scale(0.1, 1.6);
    int agreements = 0;
    for (int rep = 0; rep < 100; ++rep) {
        Eigen::MatrixXd W(4, 4);
        for (int i = 0; i < 16; ++i) W(i / 4, i % 4) = entry(gen) * scale(gen);
        const double rho = W.eigenvalues().cwiseAbs().maxCoeff();
        const LyapunovResult result = lyapunov_check(W);
        CHECK(result.spectral_radius == doctest::Approx(rho).epsilon(1e-9));
        if (rho < 1.0) {
            CHECK(result.solvable);
            CHECK(result.positive_definite);
        } else if (result.solvable) {
            CHECK_FALSE(result.positive_definite);
        }
        ++agreements;
    }
    CHECK(agreements == 100);
}

TEST_CASE("perturbation decay on the isolated node dies in one step") {
    // Linearized Euler multiplier: 1 + dt * (-1) = 0 at dt = 1.
    const Network net = Network::dense_template(1, 0, 0);
    const Eigen::VectorXd input = Eigen::VectorXd::Zero(1);
    const SimResult sim = simulate_to_steady_state(net, input, SimulationSettings{});
    REQUIRE(sim.converged);
    const DecayStats stats = perturbation_decay(net, sim.state, input);
    CHECK(stats.contraction_ratio == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(stats.decayed);
}

TEST_CASE("zero-magnitude perturbation leaves the trajectory at the fixed point") {
    const Network net = Network::dense_template(1, 0, 0);
    const Eigen::VectorXd input = Eigen::VectorXd::Zero(1);
    const SimResult sim = simulate_to_steady_state(net, input, SimulationSettings{});
    const DecayStats stats = perturbation_decay(net, sim.state, input, 0.0, 20);
    CHECK(stats.norms.front() == 0.0);
    CHECK(stats.decayed);
}

TEST_CASE("empirical contraction tracks the Euler-map spectral radius") {
    std::mt19937_64 gen(97);
    const SimulationSettings settings;
    int tested = 0;
    for (int rep = 0; rep < 60 && tested < 5; ++rep) {
        const Network net = random_net(5, gen, 2.0);
        Eigen::VectorXd input = Eigen::VectorXd::Zero(5);
        input[net.input_nodes[0]] = 0.4;
        SimResult sim{};
        try {
            sim = simulate_to_steady_state(net, input, settings);
        } catch (const DivergenceError&) {
            continue;
        }
        if (!sim.converged) continue;

        const Eigen::MatrixXd J = jacobian_at(net, sim.state, input);
        const Eigen::MatrixXd euler_map =
            Eigen::MatrixXd::Identity(5, 5) + settings.dt * J;
        const double rho = euler_map.eigenvalues().cwiseAbs().maxCoeff();
        // Keep to instances where the dominant mode is observable before
        // the perturbation hits numerical noise.
        if (rho < 0.3 || rho > 0.9) continue;

        const DecayStats stats = perturbation_decay(net, sim.state, input, 1e-3, 150, settings);
        CHECK(stats.contraction_ratio == doctest::Approx(rho).epsilon(0.05));
        ++tested;
    }
    CHECK(tested >= 3);
}

TEST_CASE("full stability report on a 2-node network") {
    Network net = Network::dense_template(2, 1, 1);
    net.weights << 0.4, -0.3, 0.8, 0.2;
    Eigen::VectorXd input = Eigen::VectorXd::Zero(2);
    input[0] = 0.5;
    const StabilityReport report = analyze_stability(net, input);
    REQUIRE(report.steady_state_converged);
    CHECK(report.n == 2);
    CHECK(report.det2.has_value());
    CHECK(report.classification.has_value());
    CHECK(report.lyapunov.tested);
    CHECK(report.lyapunov.matrix == LyapunovMatrix::euler_map);
    CHECK(report.eigenvalues.size() == 2);
    CHECK_FALSE(stability_report_to_json_string(report).empty());
}
