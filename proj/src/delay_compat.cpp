#include "neuroctl/delay_compat.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace neuroctl {

void DelayGraph::validate() const {
    if (n == 0)
        throw std::invalid_argument("delay graph needs at least one vertex");
    for (const auto& e : edges)
        if (e.from >= n || e.to >= n)
            throw std::invalid_argument("delay graph edge references a missing vertex");
}

DelayGraph muscle_delay_graph() {
    return {3, {{0, 1, 1}, {1, 2, 1}}};
}

DelayMatrix::DelayMatrix(std::size_t n) : n_(n), cells_(n * n, Delay::infinite()) {
    for (std::size_t i = 0; i < n; ++i)
        cells_[i * n + i] = Delay(0);
}

DelayMatrix::DelayMatrix(std::initializer_list<std::initializer_list<Delay>> rows) : n_(rows.size()) {
    for (const auto& row : rows) {
        if (row.size() != n_)
            throw std::invalid_argument("delay matrix must be square");
        cells_.insert(cells_.end(), row.begin(), row.end());
    }
}

std::string DelayMatrix::to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < n_; ++i) {
        os << "[";
        for (std::size_t j = 0; j < n_; ++j)
            os << (j ? ", " : "") << (*this)(i, j).to_string();
        os << "]\n";
    }
    return os.str();
}

DelayMatrix closure(const DelayGraph& g) {
    g.validate();
    DelayMatrix d(g.n);
    for (const auto& e : g.edges)
        if (e.from != e.to)
            d(e.from, e.to) = std::min(d(e.from, e.to), Delay(e.weight));
    for (std::size_t k = 0; k < g.n; ++k)
        for (std::size_t i = 0; i < g.n; ++i)
            for (std::size_t j = 0; j < g.n; ++j)
                d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
    return d;
}

namespace {

std::vector<std::size_t> vertex_of_blocks(const ControllerStructure& s, const DelayAssignment& a,
                                          std::size_t vertex_count) {
    std::vector<std::size_t> vertex(s.size(), vertex_count);
    for (const auto& [name, v] : a) {
        if (!s.contains(name))
            throw std::invalid_argument("assignment names unknown signal '" + name + "'");
        if (v >= vertex_count)
            throw std::invalid_argument("signal '" + name + "' assigned to a missing vertex");
        vertex[s.index_of(name)] = v;
    }
    for (std::size_t i = 0; i < s.size(); ++i)
        if (vertex[i] == vertex_count)
            throw std::invalid_argument("signal '" + s.blocks()[i].id + "' is not assigned");
    return vertex;
}

std::uint32_t entry_delay(const ControllerStructure& s, std::size_t i) {
    return s.blocks()[i].kind == BlockKind::unit_delay ? 1u : 0u;
}

DelayMatrix delay_matrix_from_vertices(const ControllerStructure& s, const std::vector<std::size_t>& vertex,
                                       std::size_t vertex_count) {
    constexpr auto kInf = std::numeric_limits<std::uint32_t>::max();
    DelayMatrix out(vertex_count);
    std::vector<std::uint32_t> dist(s.size());
    std::deque<std::size_t> queue;
    for (std::size_t vi = 0; vi < vertex_count; ++vi) {
        for (std::size_t vj = 0; vj < vertex_count; ++vj) {
            if (vi == vj)
                continue;
            std::fill(dist.begin(), dist.end(), kInf);
            queue.clear();
            for (std::size_t b = 0; b < s.size(); ++b)
                if (vertex[b] == vi) {
                    dist[b] = 0;
                    queue.push_back(b);
                }
            while (!queue.empty()) {
                const std::size_t b = queue.front();
                queue.pop_front();
                for (std::size_t c : s.outputs_of(b)) {
                    if (vertex[c] != vi && vertex[c] != vj)
                        continue;
                    const std::uint32_t w = entry_delay(s, c);
                    if (dist[b] + w < dist[c]) {
                        dist[c] = dist[b] + w;
                        if (w == 0)
                            queue.push_front(c);
                        else
                            queue.push_back(c);
                    }
                }
            }
            std::uint32_t best = kInf;
            for (std::size_t b = 0; b < s.size(); ++b)
                if (vertex[b] == vj)
                    best = std::min(best, dist[b]);
            out(vi, vj) = best == kInf ? Delay::infinite() : Delay(best);
        }
    }
    return out;
}

} // namespace

DelayMatrix controller_delay_matrix(const ControllerStructure& s, const DelayAssignment& a, std::size_t vertex_count) {
    return delay_matrix_from_vertices(s, vertex_of_blocks(s, a, vertex_count), vertex_count);
}

bool is_assignment_compatible(const DelayMatrix& e_tilde, const DelayMatrix& e) {
    if (e_tilde.size() != e.size())
        throw std::invalid_argument("delay matrices differ in dimension");
    for (std::size_t i = 0; i < e.size(); ++i)
        for (std::size_t j = 0; j < e.size(); ++j)
            if (e_tilde(i, j) < e(i, j))
                return false;
    return true;
}

CompatibilityResult search_compatible_assignment(const ControllerStructure& s, const DelayGraph& g) {
    const DelayMatrix e = closure(g);
    const std::size_t nv = g.n;
    const std::size_t in = s.input_index();
    const std::size_t out = s.output_index();

    CompatibilityResult result;
    result.stats.vertices = nv;
    if (in == out && nv > 1)
        return result; // input and output cannot sit on both source and sink

    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (i != in && i != out)
            free.push_back(i);
    std::sort(free.begin(), free.end(), [&](std::size_t x, std::size_t y) { return s.blocks()[x].id < s.blocks()[y].id; });
    result.stats.free_signals = free.size();

    std::vector<std::size_t> vertex(s.size(), nv);
    vertex[in] = 0;
    vertex[out] = nv - 1;

    // Each direct edge is itself an admissible path between its endpoints'
    // vertices, so a violating edge rules out every completion.
    auto violation = [&](std::size_t b) -> std::optional<std::pair<std::size_t, std::size_t>> {
        for (std::size_t c : s.outputs_of(b))
            if (vertex[c] != nv && vertex[c] != vertex[b] && Delay(entry_delay(s, c)) < e(vertex[b], vertex[c]))
                return std::pair{vertex[b], vertex[c]};
        for (std::size_t c : s.inputs_of(b))
            if (vertex[c] != nv && vertex[c] != vertex[b] && Delay(entry_delay(s, b)) < e(vertex[c], vertex[b]))
                return std::pair{vertex[c], vertex[b]};
        return std::nullopt;
    };

    if (auto v = violation(in); v) {
        ++result.stats.violations[*v];
        return result;
    }
    if (auto v = violation(out); v) {
        ++result.stats.violations[*v];
        return result;
    }

    auto extend = [&](auto&& self, std::size_t depth) -> bool {
        if (depth == free.size()) {
            ++result.stats.leaves_checked;
            return is_assignment_compatible(delay_matrix_from_vertices(s, vertex, nv), e);
        }
        const std::size_t b = free[depth];
        for (std::size_t v = 0; v < nv; ++v) {
            ++result.stats.nodes_visited;
            vertex[b] = v;
            if (auto bad = violation(b); bad) {
                ++result.stats.violations[*bad];
                continue;
            }
            if (self(self, depth + 1))
                return true;
        }
        vertex[b] = nv;
        return false;
    };

    if (extend(extend, 0)) {
        DelayAssignment a;
        for (std::size_t i = 0; i < s.size(); ++i)
            a.emplace(s.blocks()[i].id, vertex[i]);
        result.assignment = std::move(a);
    }
    return result;
}

std::optional<DelayAssignment> find_compatible_assignment(const ControllerStructure& s, const DelayGraph& g) {
    return search_compatible_assignment(s, g).assignment;
}

ControllerCompatibility is_controller_compatible(std::span<const ControllerStructure> candidates, const DelayGraph& g) {
    if (candidates.empty())
        throw std::invalid_argument("no candidate structures given");
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (auto a = find_compatible_assignment(candidates[i], g); a)
            return {true, i, std::move(*a)};
    }
    return {};
}

DelayGraph parse_delay_graph(std::istream& in) {
    DelayGraph g;
    std::string line;
    int lineno = 0;
    struct Raw {
        long long from, to, w;
        int line;
    };
    std::vector<Raw> raw;
    auto fail = [&](const std::string& msg) {
        throw std::runtime_error("delay graph line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw))
            continue;
        std::string trailing;
        if (kw == "vertex") {
            long long v = 0;
            if (!(ls >> v) || v < 1 || (ls >> trailing))
                fail("expected 'vertex N' with N >= 1");
            g.n = std::max(g.n, static_cast<std::size_t>(v));
        } else if (kw == "edge") {
            long long i = 0, j = 0, w = 0;
            if (!(ls >> i >> j >> w) || (ls >> trailing))
                fail("expected 'edge i j w'");
            if (w < 0 || w > std::numeric_limits<std::uint32_t>::max())
                fail("edge weight must be a non-negative integer");
            raw.push_back({i, j, w, lineno});
        } else {
            fail("unrecognized keyword '" + kw + "'");
        }
    }
    if (g.n == 0) {
        lineno = 0;
        fail("no vertices declared");
    }
    for (const auto& r : raw) {
        lineno = r.line;
        if (r.from < 1 || r.to < 1 || static_cast<std::size_t>(r.from) > g.n || static_cast<std::size_t>(r.to) > g.n)
            fail("edge references an undeclared vertex");
        g.edges.push_back({static_cast<std::size_t>(r.from - 1), static_cast<std::size_t>(r.to - 1),
                           static_cast<std::uint32_t>(r.w)});
    }
    return g;
}

std::string to_text(const DelayGraph& g) {
    std::ostringstream os;
    os << "# delay graph: vertex 1 is the sensor, vertex " << g.n << " the actuator\n";
    os << "vertex " << g.n << "\n";
    for (const auto& e : g.edges)
        os << "edge " << e.from + 1 << ' ' << e.to + 1 << ' ' << e.weight << "\n";
    return os.str();
}

} // namespace neuroctl
