#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "neuroctl/delayed_lqr.hpp"
#include "neuroctl/muscle_plant.hpp"
#include "neuroctl/neural_circuit.hpp"
#include "neuroctl/realization.hpp"
#include "neuroctl/simulation.hpp"
#include "neuroctl/structure_graph.hpp"
#include "neuroctl/transfer_fn.hpp"

namespace neuroctl {

enum class RealizationChoice { general, controllable, observable };

[[nodiscard]] std::string to_string(RealizationChoice c);

struct RunConfig {
    MuscleParams muscle;
    double r_bar = 1.0;
    double ts = 0.01;
    std::size_t delay = 2;
    LqrWeights weights;
    DecompositionParams decomposition;
    RealizationChoice realization = RealizationChoice::general;
    std::uint64_t seed = 1;
    bool pulse_disturbance = true;
    double pulse_amplitude = 1.0;
    std::size_t pulse_start = 10;
    std::size_t pulse_duration = 10;
    std::size_t horizon = 100;
    std::string output_dir = ".";

    // Throws ConfigError when a field is outside the domain of its consumer.
    void validate() const;
    [[nodiscard]] Disturbance disturbance() const;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Recognized keys, in documentation order.
[[nodiscard]] const std::vector<std::string>& config_keys();

// Throws ConfigError for unknown keys and malformed values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// Flat "key = value" lines; '#' starts a comment. Unknown or repeated keys are
// rejected with the offending line number.
void apply_config(RunConfig& cfg, std::istream& in);

struct Synthesis {
    OperatingPoint op;
    DiscretePlant plant;
    LqrSolution lqr;
};

[[nodiscard]] Synthesis synthesize(const RunConfig& cfg);

// The deployed controller: input relay, core realization, output relay.
struct ControllerPipeline {
    Decomposition decomposition;
    std::vector<Realization> stages;
    std::vector<ControllerStructure> structures;
    Realization realization;    // stages in series
    ControllerStructure structure; // structures in series
    NeuralCircuit circuit;
};

[[nodiscard]] ControllerPipeline build_pipeline(const RunConfig& cfg, const Synthesis& s, RealizationChoice choice);

// Exit codes: 0 success or compatible, 1 incompatible, 2 usage, parse or
// computation error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace neuroctl
