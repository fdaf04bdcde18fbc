#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "neuroctl/delayed_lqr.hpp"
#include "neuroctl/muscle_plant.hpp"
#include "neuroctl/neural_circuit.hpp"
#include "neuroctl/realization.hpp"

namespace neuroctl {

// Additive force disturbance. w(t) is the force offset that lands in
// delta_f(t): delta_f(t) = a delta_f(t-1) + b delta_r(t-1) + w(t).
struct Disturbance {
    enum class Kind { none, pulse };
    Kind kind = Kind::none;
    double amplitude = 0.0;
    std::size_t start = 0;
    std::size_t duration = 0;

    [[nodiscard]] double at(std::size_t t) const;
    // First step after the pulse; 0 for no disturbance.
    [[nodiscard]] std::size_t end() const { return kind == Kind::pulse ? start + duration : 0; }
};

// Throws std::invalid_argument for duration == 0 or a non-finite amplitude.
[[nodiscard]] Disturbance pulse(double amplitude, std::size_t start, std::size_t duration);
[[nodiscard]] Disturbance no_disturbance();

// Any controller representation mapping delta_f to delta_r: the augmented
// state-feedback law, a (composed) realization, or a neural circuit.
using Controller = std::variant<OptimalGains, Realization, NeuralCircuit>;

struct ClosedLoopTrace {
    double ts = 0.0;
    std::vector<double> time; // s
    std::vector<double> delta_f;
    std::vector<double> delta_r;
    std::vector<std::string> neuron_ids; // circuit controllers only
    std::vector<std::vector<double>> neuron_rates;

    [[nodiscard]] std::size_t steps() const { return delta_f.size(); }
    [[nodiscard]] std::vector<double> f_abs(const OperatingPoint& op) const;
    [[nodiscard]] std::vector<double> r_abs(const OperatingPoint& op) const;
};

// Controllers must have relative degree >= 2 (std::invalid_argument
// otherwise); an identically zero controller is accepted.
[[nodiscard]] ClosedLoopTrace closed_loop(const DiscretePlant& plant, const Controller& controller,
                                          const Disturbance& d, std::size_t steps);

// Relative degree of the controller's transfer function, or nullopt for the
// zero controller.
[[nodiscard]] std::optional<std::size_t> controller_relative_degree(const Controller& controller);

// sum_t q delta_f(t)^2 + r delta_r(t)^2
[[nodiscard]] double cost_of_trace(const ClosedLoopTrace& trace, const LqrWeights& w);

// Header "t,delta_f,delta_r,f_abs,r_abs,neuron_<id>..."; each line of
// `comment` is emitted first with a leading "# ".
[[nodiscard]] std::string to_csv(const ClosedLoopTrace& trace, const OperatingPoint& op,
                                 const std::string& comment = {});

// Minimal SVG line plot, one polyline per column of the CSV view.
[[nodiscard]] std::string to_svg(const ClosedLoopTrace& trace, const OperatingPoint& op, const std::string& title);

} // namespace neuroctl
