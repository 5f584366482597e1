#include "fnet/simulation.hpp"

#include "fnet/errors.hpp"

#include <cmath>
#include <string>

namespace fnet {

void SimulationSettings::validate() const {
    if (!(dt > 0.0)) throw ConfigError("dt", "must be > 0");
    if (max_steps < 1) throw ConfigError("max_steps", "must be >= 1");
    if (convergence_eps < 0.0) throw ConfigError("convergence_eps", "must be >= 0");
    if (!(divergence_guard > 0.0)) throw ConfigError("divergence_guard", "must be > 0");
}

namespace {

// Vectorized logistic map applied to an activation vector in place.
inline void sigmoid_inplace(Eigen::VectorXd& a) {
    a = (1.0 + (-a.array()).exp()).inverse();
}

} // namespace

Eigen::VectorXd dynamics_rhs(const Network& net, const NodeState& state,
                             const Eigen::VectorXd& input) {
    if (state.size() != net.n_nodes || input.size() != net.n_nodes) {
        throw ContractError("dynamics_rhs: state/input length does not match n_nodes");
    }
    Eigen::VectorXd act = net.weights * state;
    sigmoid_inplace(act);
    return (net.k1.array() * (act.array() + input.array()) -
            net.k2.array() * state.array())
        .matrix();
}

NodeState euler_step(const Network& net, const NodeState& state,
                     const Eigen::VectorXd& input, double dt) {
    return state + dt * dynamics_rhs(net, state, input);
}

SimResult simulate_to_steady_state(const Network& net, const Eigen::VectorXd& input,
                                   const SimulationSettings& settings) {
    settings.validate();
    if (input.size() != net.n_nodes) {
        throw ContractError("simulate_to_steady_state: input length does not match n_nodes");
    }

    // Fixed points of the dynamics do not depend on the start; y(0) = 0
    // keeps the whole trajectory deterministic.
    NodeState y = NodeState::Zero(net.n_nodes);
    Eigen::VectorXd act(net.n_nodes);
    Eigen::VectorXd delta(net.n_nodes);

    for (int step = 1; step <= settings.max_steps; ++step) {
        act.noalias() = net.weights * y;
        sigmoid_inplace(act);
        delta = settings.dt * (net.k1.array() * (act.array() + input.array()) -
                               net.k2.array() * y.array());
        y += delta;

        if (!y.allFinite() || y.cwiseAbs().maxCoeff() > settings.divergence_guard) {
            throw DivergenceError(
                "simulation diverged at step " + std::to_string(step), step);
        }
        if (delta.cwiseAbs().maxCoeff() < settings.convergence_eps) {
            return {std::move(y), true, step};
        }
    }
    return {std::move(y), false, settings.max_steps};
}

double steady_state_residual(const Network& net, const NodeState& state,
                             const Eigen::VectorXd& input) {
    return dynamics_rhs(net, state, input).cwiseAbs().maxCoeff();
}

} // namespace fnet
