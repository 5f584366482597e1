#include "fnet/network.hpp"

#include "fnet/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace fnet {

namespace {

using ordered_json = nlohmann::ordered_json;

} // namespace

Network Network::dense_template(int n, int n_inputs, int n_outputs) {
    if (n < 1) throw ContractError("dense_template: n_nodes must be >= 1");
    if (n_inputs < 0 || n_outputs < 0 || n_inputs + n_outputs > n) {
        throw ContractError("dense_template: input/output designations exceed node count");
    }
    Network net;
    net.n_nodes = n;
    net.weights = Eigen::MatrixXd::Zero(n, n);
    net.k1 = Eigen::VectorXd::Ones(n);
    net.k2 = Eigen::VectorXd::Ones(n);
    for (int i = 0; i < n_inputs; ++i) net.input_nodes.push_back(i);
    for (int i = n - n_outputs; i < n; ++i) net.output_nodes.push_back(i);
    return net;
}

Eigen::VectorXd Network::genome() const {
    Eigen::VectorXd g(n_nodes * n_nodes);
    for (int i = 0; i < n_nodes; ++i)
        for (int j = 0; j < n_nodes; ++j) g[i * n_nodes + j] = weights(i, j);
    return g;
}

void Network::set_genome(const Eigen::VectorXd& genome) {
    if (genome.size() != static_cast<Eigen::Index>(n_nodes) * n_nodes) {
        throw ContractError("set_genome: genome length does not equal n_nodes^2");
    }
    for (int i = 0; i < n_nodes; ++i)
        for (int j = 0; j < n_nodes; ++j) weights(i, j) = genome[i * n_nodes + j];
}

void Network::validate(const WeightBand& band) const {
    if (n_nodes < 1) throw ContractError("Network: n_nodes must be positive");
    if (weights.rows() != n_nodes || weights.cols() != n_nodes) {
        throw ContractError("Network: weights must be n_nodes x n_nodes");
    }
    if (k1.size() != n_nodes || k2.size() != n_nodes) {
        throw ContractError("Network: k1/k2 must have length n_nodes");
    }
    for (int i = 0; i < n_nodes; ++i) {
        if (!(k1[i] > 0.0) || !(k2[i] > 0.0)) {
            throw ContractError("Network: k1/k2 entries must be strictly positive");
        }
    }
    if (!weights.allFinite()) throw ContractError("Network: non-finite weight entry");
    for (int i = 0; i < n_nodes; ++i) {
        for (int j = 0; j < n_nodes; ++j) {
            if (!band.contains(weights(i, j))) {
                throw ContractError("Network: weight outside the clamp band");
            }
        }
    }
    std::set<int> seen;
    for (int idx : input_nodes) {
        if (idx < 0 || idx >= n_nodes) throw ContractError("Network: input node index out of range");
        seen.insert(idx);
    }
    for (int idx : output_nodes) {
        if (idx < 0 || idx >= n_nodes) throw ContractError("Network: output node index out of range");
        if (seen.count(idx)) throw ContractError("Network: input and output node sets overlap");
    }
}

std::string network_to_json_string(const Network& net) {
    ordered_json doc;
    doc["n_nodes"] = net.n_nodes;
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < net.n_nodes; ++i) {
        ordered_json row = ordered_json::array();
        for (int j = 0; j < net.n_nodes; ++j) row.push_back(net.weights(i, j));
        rows.push_back(std::move(row));
    }
    doc["weights"] = std::move(rows);
    doc["k1"] = std::vector<double>(net.k1.data(), net.k1.data() + net.k1.size());
    doc["k2"] = std::vector<double>(net.k2.data(), net.k2.data() + net.k2.size());
    doc["input_nodes"] = net.input_nodes;
    doc["output_nodes"] = net.output_nodes;
    return doc.dump(2) + "\n";
}

Network network_from_json_string(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw IoError(std::string("network document is not valid JSON: ") + e.what());
    }
    Network net;
    try {
        net.n_nodes = doc.at("n_nodes").get<int>();
        const auto& rows = doc.at("weights");
        if (static_cast<int>(rows.size()) != net.n_nodes) {
            throw IoError("network document: weights row count mismatch");
        }
        net.weights.resize(net.n_nodes, net.n_nodes);
        for (int i = 0; i < net.n_nodes; ++i) {
            const auto& row = rows.at(i);
            if (static_cast<int>(row.size()) != net.n_nodes) {
                throw IoError("network document: weights column count mismatch");
            }
            for (int j = 0; j < net.n_nodes; ++j) net.weights(i, j) = row.at(j).get<double>();
        }
        auto k1 = doc.at("k1").get<std::vector<double>>();
        auto k2 = doc.at("k2").get<std::vector<double>>();
        if (static_cast<int>(k1.size()) != net.n_nodes || static_cast<int>(k2.size()) != net.n_nodes) {
            throw IoError("network document: k1/k2 length mismatch");
        }
        net.k1 = Eigen::Map<Eigen::VectorXd>(k1.data(), static_cast<Eigen::Index>(k1.size()));
        net.k2 = Eigen::Map<Eigen::VectorXd>(k2.data(), static_cast<Eigen::Index>(k2.size()));
        net.input_nodes = doc.at("input_nodes").get<std::vector<int>>();
        net.output_nodes = doc.at("output_nodes").get<std::vector<int>>();
    } catch (const ordered_json::exception& e) {
        throw IoError(std::string("network document: ") + e.what());
    }
    return net;
}

void save_network(const Network& net, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << network_to_json_string(net);
    if (!out) throw IoError("write failed: " + path.string());
}

Network load_network(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return network_from_json_string(ss.str());
}

} // namespace fnet
