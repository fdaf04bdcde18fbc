#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "neuroctl/delay.hpp"
#include "neuroctl/structure_graph.hpp"

namespace neuroctl {

// Vertices are 0-based here; vertex 0 is the sensor (source) and vertex
// n-1 the actuator (sink). Text files use 1-based indices.
struct DelayGraph {
    struct WeightedEdge {
        std::size_t from = 0;
        std::size_t to = 0;
        std::uint32_t weight = 0;
    };

    std::size_t n = 0;
    std::vector<WeightedEdge> edges;

    void validate() const;
};

// The sensor -> nervous system -> muscle chain with one step on each hop.
[[nodiscard]] DelayGraph muscle_delay_graph();

class DelayMatrix {
public:
    // Diagonal zero, everything else infinite.
    explicit DelayMatrix(std::size_t n);
    DelayMatrix(std::initializer_list<std::initializer_list<Delay>> rows);

    [[nodiscard]] std::size_t size() const { return n_; }
    [[nodiscard]] Delay operator()(std::size_t i, std::size_t j) const { return cells_[i * n_ + j]; }
    [[nodiscard]] Delay& operator()(std::size_t i, std::size_t j) { return cells_[i * n_ + j]; }

    friend bool operator==(const DelayMatrix&, const DelayMatrix&) = default;

    [[nodiscard]] std::string to_string() const;

private:
    std::size_t n_ = 0;
    std::vector<Delay> cells_;
};

// Signal name -> 0-based vertex. Ordered by name.
using DelayAssignment = std::map<std::string, std::size_t>;

// All-pairs min-plus shortest paths (Floyd-Warshall).
[[nodiscard]] DelayMatrix closure(const DelayGraph& g);

// E~_ij: fastest path from a signal at vertex i to a signal at vertex j that
// only passes through signals assigned to i or j. Diagonal is zero.
// Throws std::invalid_argument if any signal is unassigned or out of range.
[[nodiscard]] DelayMatrix controller_delay_matrix(const ControllerStructure& s, const DelayAssignment& a,
                                                  std::size_t vertex_count);

// E~_ij >= E_ij for all i, j. Throws std::invalid_argument on size mismatch.
[[nodiscard]] bool is_assignment_compatible(const DelayMatrix& e_tilde, const DelayMatrix& e);

struct SearchStats {
    std::size_t free_signals = 0;
    std::size_t vertices = 0;
    std::size_t nodes_visited = 0;   // partial assignments tried
    std::size_t leaves_checked = 0;  // complete assignments checked
    // Rejections by offending vertex pair (0-based), one per pruned extension.
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> violations;
};

struct CompatibilityResult {
    std::optional<DelayAssignment> assignment;
    SearchStats stats;
};

// Exhaustive search with the input pinned to the source and the output to the
// sink. Free signals are taken in name order and vertices in ascending order,
// so the returned witness is the lexicographically first compatible one.
[[nodiscard]] CompatibilityResult search_compatible_assignment(const ControllerStructure& s, const DelayGraph& g);

[[nodiscard]] std::optional<DelayAssignment> find_compatible_assignment(const ControllerStructure& s,
                                                                        const DelayGraph& g);

struct ControllerCompatibility {
    bool compatible = false;
    std::size_t structure_index = 0; // witness
    DelayAssignment assignment;
};

// True iff any candidate structure admits a compatible assignment; the first
// such structure is the witness. Throws std::invalid_argument for an empty list.
[[nodiscard]] ControllerCompatibility is_controller_compatible(std::span<const ControllerStructure> candidates,
                                                               const DelayGraph& g);

// Text form: "vertex N" declares vertices 1..N (the largest declared index
// wins), "edge i j w" adds a weighted edge; '#' starts a comment.
[[nodiscard]] DelayGraph parse_delay_graph(std::istream& in);
[[nodiscard]] std::string to_text(const DelayGraph& g);

} // namespace neuroctl
