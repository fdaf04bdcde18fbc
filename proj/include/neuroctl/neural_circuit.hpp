#pragma once

#include <cstddef>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "neuroctl/realization.hpp"
#include "neuroctl/structure_graph.hpp"

namespace neuroctl {

// A weighted connection from a neuron's axon, or from the circuit's external
// input, to a neuron body or to the circuit output.
struct Synapse {
    std::string source;
    double weight = 0.0;
};

// Linear rate neuron: r(t+1) = self_weight r(t) + sum_k w_k s_k(t).
struct Neuron {
    std::string id;
    double self_weight = 0.0;
    std::vector<Synapse> synapses;
};

struct NeuralCircuit {
    std::vector<Neuron> neurons;
    std::string external_input = "u";
    // Delay-free combination delivered to the downstream consumer.
    std::vector<Synapse> output_taps;

    // Every source must name a neuron or the external input; ids unique;
    // at least one output tap. Throws std::invalid_argument.
    void validate() const;
    [[nodiscard]] std::size_t index_of(const std::string& neuron_id) const;
};

// One neuron per state: self weight F_ii, synapses F_ij (j != i) and H_i from
// the input; taps M_i and N.
[[nodiscard]] NeuralCircuit circuit_of(const Realization& r);

// Each unit delay becomes a neuron; the delay-free gain/sum network feeding
// it is folded into its synaptic weights, and the network feeding the output
// becomes the output taps. Throws std::invalid_argument on a delay-free cycle.
[[nodiscard]] NeuralCircuit circuit_of(const ControllerStructure& s);

// Inverse of circuit_of(Realization); neuron order gives the state order.
[[nodiscard]] Realization realization_of(const NeuralCircuit& c);

[[nodiscard]] std::size_t neuron_count(const NeuralCircuit& c);

// Distinct targets on the neuron's axon: other neurons it synapses onto, plus
// one if it feeds the output. Self-dynamics are not a branch.
// Throws std::out_of_range for an unknown id.
[[nodiscard]] std::size_t branch_count(const NeuralCircuit& c, const std::string& neuron_id);

// Places where two or more signals are summed: neurons with at least two
// inputs (self-dynamics included) plus the output if it has two or more taps.
[[nodiscard]] std::size_t summation_site_count(const NeuralCircuit& c);

struct FiringTrace {
    std::vector<std::string> neuron_ids;
    std::vector<std::vector<double>> rates; // rates[neuron][t], deviations from equilibrium
};

struct CircuitRun {
    FiringTrace trace;
    std::vector<double> output;
};

// Synchronous update from rest; the input is zero-padded to `steps`.
[[nodiscard]] CircuitRun simulate_circuit(const NeuralCircuit& c, std::span<const double> input, std::size_t steps);

class CircuitRunner {
public:
    explicit CircuitRunner(const NeuralCircuit& c);

    [[nodiscard]] double output(double input) const;
    // All neurons read the current rates, then commit.
    void advance(double input);
    [[nodiscard]] const std::vector<double>& rates() const { return rates_; }

private:
    struct Link {
        std::size_t source; // == neuron count for the external input
        double weight;
    };
    std::vector<double> self_;
    std::vector<std::vector<Link>> links_;
    std::vector<Link> taps_;
    std::vector<double> rates_;
    std::vector<double> next_;

    [[nodiscard]] double value(const Link& l, double input) const {
        return l.weight * (l.source == rates_.size() ? input : rates_[l.source]);
    }
};

// Text form:
//   input <name>
//   neuron <id> <self_weight>
//   synapse <src> <dst> <weight>
//   tap <src> <weight>
[[nodiscard]] std::string to_text(const NeuralCircuit& c);
[[nodiscard]] NeuralCircuit parse_circuit(std::istream& in);

} // namespace neuroctl
