#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "neuroctl/delay.hpp"
#include "neuroctl/delayed_lqr.hpp"
#include "neuroctl/realization.hpp"

namespace neuroctl {

enum class BlockKind { input, gain, sum, unit_delay };

[[nodiscard]] std::string to_string(BlockKind kind);

// Every block drives exactly one signal, named by the block id. The
// controller input is modelled as a block of kind `input` with no inputs.
struct Block {
    std::string id;
    BlockKind kind = BlockKind::gain;
    double value = 0.0; // gain blocks only
};

struct Edge {
    std::size_t src = 0;
    std::size_t dst = 0;
};

// Directed block graph of gains, adders and unit delays over scalar signals.
class ControllerStructure {
public:
    std::size_t add_block(Block b);
    void add_edge(const std::string& src, const std::string& dst);
    void set_output(const std::string& id);

    // Checks the block arity rules, connectivity from input to output and the
    // absence of delay-free cycles. Throws std::invalid_argument.
    void validate() const;

    [[nodiscard]] const std::vector<Block>& blocks() const { return blocks_; }
    [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
    [[nodiscard]] const std::vector<std::size_t>& inputs_of(std::size_t i) const { return preds_[i]; }
    [[nodiscard]] const std::vector<std::size_t>& outputs_of(std::size_t i) const { return succs_[i]; }

    [[nodiscard]] std::size_t size() const { return blocks_.size(); }
    [[nodiscard]] bool contains(const std::string& id) const { return index_.contains(id); }
    // Throws std::out_of_range for unknown ids.
    [[nodiscard]] std::size_t index_of(const std::string& id) const;
    [[nodiscard]] const Block& block(const std::string& id) const { return blocks_[index_of(id)]; }

    [[nodiscard]] std::size_t input_index() const;
    [[nodiscard]] std::size_t output_index() const;
    [[nodiscard]] const std::string& input_signal() const { return blocks_[input_index()].id; }
    [[nodiscard]] const std::string& output_signal() const { return blocks_[output_index()].id; }

    [[nodiscard]] std::size_t count(BlockKind kind) const;

    // Delay-free evaluation order (edges into unit delays are cut).
    // Throws std::invalid_argument on an algebraic loop.
    [[nodiscard]] std::vector<std::size_t> evaluation_order() const;

private:
    std::vector<Block> blocks_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> preds_;
    std::vector<std::vector<std::size_t>> succs_;
    std::unordered_map<std::string, std::size_t> index_;
    std::optional<std::size_t> output_;
};

// One unit delay per state (named by the state label), a sum wherever two or
// more terms meet, and one gain per nonzero entry of F, H, M and N. Gain ids
// follow matrix indices: F12, H2, M1, N; state adders are s<i>, the output
// adder is y. States whose update is identically zero are dropped.
[[nodiscard]] ControllerStructure structure_of(const Realization& r);

// The augmented-state controller as a block diagram: x -> K0 -> mu,
// gamma -> K1 -> mu, u -> K2 -> mu, mu -z^-1-> gamma -z^-1-> u.
// Requires a two-step delay (three gains).
[[nodiscard]] ControllerStructure ifp_structure(const OptimalGains& g);

// Output of stage i drives stage i+1; block ids become "<prefix>.<id>".
// Prefixes default to g1, g2, ...; a single stage without prefixes is
// returned unchanged.
[[nodiscard]] ControllerStructure series(std::span<const ControllerStructure> stages,
                                         std::span<const std::string> prefixes = {});

// Fewest unit delays over all directed paths; the source's own delay is not
// counted, the destination's is. Throws std::out_of_range for unknown names.
[[nodiscard]] Delay min_path_delay(const ControllerStructure& s, const std::string& from, const std::string& to);

// Zero initial delay states; returns the output signal per step.
[[nodiscard]] std::vector<double> simulate(const ControllerStructure& s, std::span<const double> input);

// Same block kinds, same zero/nonzero gain pattern, same wiring; gain values
// and block ids are ignored.
[[nodiscard]] bool same_structure(const ControllerStructure& a, const ControllerStructure& b);

// Text form:
//   # comment
//   <id> input|gain <value>|sum|delay
//   output <id>
//   <src> -> <dst> [delay]
[[nodiscard]] std::string to_text(const ControllerStructure& s);
// Throws std::runtime_error with a line number on malformed input.
[[nodiscard]] ControllerStructure parse_structure(std::istream& in);

// Graphviz source for diagrams.
[[nodiscard]] std::string to_dot(const ControllerStructure& s);

} // namespace neuroctl
