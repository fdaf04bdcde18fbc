#include "neuroctl/structure_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace neuroctl {

namespace {

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool is_delay(const ControllerStructure& s, std::size_t i) {
    return s.blocks()[i].kind == BlockKind::unit_delay;
}

} // namespace

std::string to_string(BlockKind kind) {
    switch (kind) {
    case BlockKind::input:
        return "input";
    case BlockKind::gain:
        return "gain";
    case BlockKind::sum:
        return "sum";
    case BlockKind::unit_delay:
        return "delay";
    }
    return "?";
}

std::size_t ControllerStructure::add_block(Block b) {
    if (b.id.empty() || b.id == "output" || b.id.find_first_of(" \t\n#") != std::string::npos)
        throw std::invalid_argument("invalid block id '" + b.id + "'");
    if (index_.contains(b.id))
        throw std::invalid_argument("duplicate block id '" + b.id + "'");
    const std::size_t i = blocks_.size();
    index_.emplace(b.id, i);
    blocks_.push_back(std::move(b));
    preds_.emplace_back();
    succs_.emplace_back();
    return i;
}

void ControllerStructure::add_edge(const std::string& src, const std::string& dst) {
    const std::size_t a = index_of(src);
    const std::size_t b = index_of(dst);
    edges_.push_back({a, b});
    succs_[a].push_back(b);
    preds_[b].push_back(a);
}

void ControllerStructure::set_output(const std::string& id) { output_ = index_of(id); }

std::size_t ControllerStructure::index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end())
        throw std::out_of_range("unknown signal '" + id + "'");
    return it->second;
}

std::size_t ControllerStructure::input_index() const {
    for (std::size_t i = 0; i < blocks_.size(); ++i)
        if (blocks_[i].kind == BlockKind::input)
            return i;
    throw std::logic_error("structure has no input block");
}

std::size_t ControllerStructure::output_index() const {
    if (!output_)
        throw std::logic_error("structure has no output signal");
    return *output_;
}

std::size_t ControllerStructure::count(BlockKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(blocks_.begin(), blocks_.end(), [kind](const Block& b) { return b.kind == kind; }));
}

std::vector<std::size_t> ControllerStructure::evaluation_order() const {
    // Kahn's algorithm over same-step dependencies only.
    const std::size_t n = blocks_.size();
    std::vector<std::size_t> pending(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        if (blocks_[i].kind != BlockKind::unit_delay)
            pending[i] = preds_[i].size();
    std::deque<std::size_t> ready;
    for (std::size_t i = 0; i < n; ++i)
        if (pending[i] == 0)
            ready.push_back(i);
    std::vector<std::size_t> order;
    order.reserve(n);
    while (!ready.empty()) {
        const std::size_t i = ready.front();
        ready.pop_front();
        order.push_back(i);
        for (std::size_t j : succs_[i]) {
            if (blocks_[j].kind == BlockKind::unit_delay)
                continue;
            if (--pending[j] == 0)
                ready.push_back(j);
        }
    }
    if (order.size() != n)
        throw std::invalid_argument("structure contains a delay-free (algebraic) loop");
    return order;
}

void ControllerStructure::validate() const {
    if (count(BlockKind::input) != 1)
        throw std::invalid_argument("structure must have exactly one input block");
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        const auto& b = blocks_[i];
        const std::size_t arity = preds_[i].size();
        switch (b.kind) {
        case BlockKind::input:
            if (arity != 0)
                throw std::invalid_argument("input block '" + b.id + "' cannot have inputs");
            break;
        case BlockKind::gain:
            if (arity != 1)
                throw std::invalid_argument("gain block '" + b.id + "' needs exactly one input");
            if (!std::isfinite(b.value))
                throw std::invalid_argument("gain block '" + b.id + "' has a non-finite value");
            break;
        case BlockKind::sum:
            if (arity < 2)
                throw std::invalid_argument("sum block '" + b.id + "' needs at least two inputs");
            break;
        case BlockKind::unit_delay:
            if (arity != 1)
                throw std::invalid_argument("delay block '" + b.id + "' needs exactly one input");
            break;
        }
    }
    if (min_path_delay(*this, input_signal(), output_signal()).is_infinite())
        throw std::invalid_argument("output is not reachable from the input");
    (void)evaluation_order();
}

ControllerStructure structure_of(const Realization& r) {
    validate(r);
    const auto n = static_cast<std::size_t>(r.order());
    const auto& labels = r.labels;
    auto idx = [n](std::size_t i, std::size_t j) {
        return n > 9 ? std::to_string(i + 1) + "_" + std::to_string(j + 1) : std::to_string(i + 1) + std::to_string(j + 1);
    };
    auto f = [&](std::size_t i, std::size_t j) { return r.f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); };

    // A state is live if its update has a nonzero term from the input or another live state.
    std::vector<bool> live(n, false);
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (live[i])
                continue;
            bool any = r.h(static_cast<Eigen::Index>(i)) != 0.0;
            for (std::size_t j = 0; j < n && !any; ++j)
                any = live[j] && f(i, j) != 0.0;
            if (any) {
                live[i] = true;
                changed = true;
            }
        }
    }

    ControllerStructure s;
    s.add_block({"u", BlockKind::input});
    for (std::size_t i = 0; i < n; ++i)
        if (live[i])
            s.add_block({labels[i], BlockKind::unit_delay});

    for (std::size_t i = 0; i < n; ++i) {
        if (!live[i])
            continue;
        std::vector<std::string> terms;
        for (std::size_t j = 0; j < n; ++j) {
            if (!live[j] || f(i, j) == 0.0)
                continue;
            const std::string id = "F" + idx(i, j);
            s.add_block({id, BlockKind::gain, f(i, j)});
            s.add_edge(labels[j], id);
            terms.push_back(id);
        }
        const double hi = r.h(static_cast<Eigen::Index>(i));
        if (hi != 0.0) {
            const std::string id = "H" + std::to_string(i + 1);
            s.add_block({id, BlockKind::gain, hi});
            s.add_edge("u", id);
            terms.push_back(id);
        }
        if (terms.size() >= 2) {
            const std::string sum = "s" + std::to_string(i + 1);
            s.add_block({sum, BlockKind::sum});
            for (const auto& t : terms)
                s.add_edge(t, sum);
            s.add_edge(sum, labels[i]);
        } else {
            s.add_edge(terms.front(), labels[i]);
        }
    }

    std::vector<std::string> out_terms;
    for (std::size_t i = 0; i < n; ++i) {
        const double mi = r.m(static_cast<Eigen::Index>(i));
        if (!live[i] || mi == 0.0)
            continue;
        const std::string id = "M" + std::to_string(i + 1);
        s.add_block({id, BlockKind::gain, mi});
        s.add_edge(labels[i], id);
        out_terms.push_back(id);
    }
    if (r.n_ff != 0.0) {
        s.add_block({"N", BlockKind::gain, r.n_ff});
        s.add_edge("u", "N");
        out_terms.push_back("N");
    }
    if (out_terms.empty())
        throw std::invalid_argument("realization output is identically zero; no structure to draw");
    if (out_terms.size() >= 2) {
        s.add_block({"y", BlockKind::sum});
        for (const auto& t : out_terms)
            s.add_edge(t, "y");
        s.set_output("y");
    } else {
        s.set_output(out_terms.front());
    }
    s.validate();
    return s;
}

ControllerStructure ifp_structure(const OptimalGains& g) {
    if (g.k.size() != 3)
        throw std::invalid_argument("the augmented-state diagram is defined for a two-step delay (three gains)");
    ControllerStructure s;
    s.add_block({"x", BlockKind::input});
    s.add_block({"K0", BlockKind::gain, g.k0()});
    s.add_block({"K1", BlockKind::gain, g.k1()});
    s.add_block({"K2", BlockKind::gain, g.k2()});
    s.add_block({"mu", BlockKind::sum});
    s.add_block({"gamma", BlockKind::unit_delay});
    s.add_block({"u", BlockKind::unit_delay});
    s.add_edge("x", "K0");
    s.add_edge("gamma", "K1");
    s.add_edge("u", "K2");
    s.add_edge("K0", "mu");
    s.add_edge("K1", "mu");
    s.add_edge("K2", "mu");
    s.add_edge("mu", "gamma");
    s.add_edge("gamma", "u");
    s.set_output("u");
    s.validate();
    return s;
}

ControllerStructure series(std::span<const ControllerStructure> stages, std::span<const std::string> prefixes) {
    if (stages.empty())
        throw std::invalid_argument("series needs at least one stage");
    if (!prefixes.empty() && prefixes.size() != stages.size())
        throw std::invalid_argument("series needs one prefix per stage");
    if (stages.size() == 1 && prefixes.empty())
        return stages.front();

    auto prefix = [&](std::size_t k) { return prefixes.empty() ? "g" + std::to_string(k + 1) : prefixes[k]; };

    ControllerStructure out;
    std::string upstream_output;
    for (std::size_t k = 0; k < stages.size(); ++k) {
        const auto& st = stages[k];
        const std::string p = prefix(k) + ".";
        const std::size_t in = st.input_index();
        auto name = [&](std::size_t i) { return (k > 0 && i == in) ? upstream_output : p + st.blocks()[i].id; };
        for (std::size_t i = 0; i < st.size(); ++i) {
            if (k > 0 && i == in)
                continue;
            Block b = st.blocks()[i];
            b.id = p + b.id;
            out.add_block(std::move(b));
        }
        for (const auto& e : st.edges())
            out.add_edge(name(e.src), name(e.dst));
        upstream_output = name(st.output_index());
    }
    out.set_output(upstream_output);
    out.validate();
    return out;
}

Delay min_path_delay(const ControllerStructure& s, const std::string& from, const std::string& to) {
    const std::size_t src = s.index_of(from);
    const std::size_t dst = s.index_of(to);
    constexpr auto kInf = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> dist(s.size(), kInf);
    std::deque<std::size_t> queue;
    dist[src] = 0;
    queue.push_back(src);
    // 0-1 BFS: entering a unit delay costs one step.
    while (!queue.empty()) {
        const std::size_t i = queue.front();
        queue.pop_front();
        for (std::size_t j : s.outputs_of(i)) {
            const std::uint32_t w = is_delay(s, j) ? 1u : 0u;
            if (dist[i] + w < dist[j]) {
                dist[j] = dist[i] + w;
                if (w == 0)
                    queue.push_front(j);
                else
                    queue.push_back(j);
            }
        }
    }
    return dist[dst] == kInf ? Delay::infinite() : Delay(dist[dst]);
}

std::vector<double> simulate(const ControllerStructure& s, std::span<const double> input) {
    const auto order = s.evaluation_order();
    const auto& blocks = s.blocks();
    std::vector<double> value(s.size(), 0.0);
    std::vector<double> delay_state(s.size(), 0.0);
    std::vector<double> out;
    out.reserve(input.size());
    const std::size_t y = s.output_index();
    for (double u : input) {
        for (std::size_t i : order) {
            switch (blocks[i].kind) {
            case BlockKind::input:
                value[i] = u;
                break;
            case BlockKind::unit_delay:
                value[i] = delay_state[i];
                break;
            case BlockKind::gain:
                value[i] = blocks[i].value * value[s.inputs_of(i).front()];
                break;
            case BlockKind::sum: {
                double acc = 0.0;
                for (std::size_t j : s.inputs_of(i))
                    acc += value[j];
                value[i] = acc;
                break;
            }
            }
        }
        out.push_back(value[y]);
        for (std::size_t i = 0; i < s.size(); ++i)
            if (blocks[i].kind == BlockKind::unit_delay)
                delay_state[i] = value[s.inputs_of(i).front()];
    }
    return out;
}

bool same_structure(const ControllerStructure& a, const ControllerStructure& b) {
    const std::size_t n = a.size();
    if (n != b.size() || a.edges().size() != b.edges().size())
        return false;

    auto label = [](const ControllerStructure& s, std::size_t i) {
        const auto& blk = s.blocks()[i];
        const int zero_gain = blk.kind == BlockKind::gain && blk.value == 0.0 ? 1 : 0;
        const int is_out = i == s.output_index() ? 1 : 0;
        return std::tuple(static_cast<int>(blk.kind), zero_gain, is_out, s.inputs_of(i).size(), s.outputs_of(i).size());
    };
    auto multiplicity = [](const ControllerStructure& s) {
        std::map<std::pair<std::size_t, std::size_t>, int> m;
        for (const auto& e : s.edges())
            ++m[{e.src, e.dst}];
        return m;
    };
    const auto ma = multiplicity(a);
    const auto mb = multiplicity(b);
    auto mult = [](const auto& m, std::size_t x, std::size_t y) {
        auto it = m.find({x, y});
        return it == m.end() ? 0 : it->second;
    };

    // Visit a's blocks breadth-first from the input so each new block is
    // adjacent to already mapped ones.
    std::vector<std::size_t> order;
    {
        std::vector<bool> seen(n, false);
        std::deque<std::size_t> q{a.input_index()};
        seen[a.input_index()] = true;
        while (!q.empty()) {
            const std::size_t i = q.front();
            q.pop_front();
            order.push_back(i);
            for (const auto* adj : {&a.outputs_of(i), &a.inputs_of(i)})
                for (std::size_t j : *adj)
                    if (!seen[j]) {
                        seen[j] = true;
                        q.push_back(j);
                    }
        }
        for (std::size_t i = 0; i < n; ++i)
            if (!seen[i])
                order.push_back(i);
    }

    std::vector<std::size_t> map_ab(n, n);
    std::vector<bool> used(n, false);
    std::function<bool(std::size_t)> extend = [&](std::size_t depth) -> bool {
        if (depth == n)
            return true;
        const std::size_t x = order[depth];
        for (std::size_t y = 0; y < n; ++y) {
            if (used[y] || label(a, x) != label(b, y))
                continue;
            bool ok = mult(ma, x, x) == mult(mb, y, y);
            for (std::size_t d = 0; d < depth && ok; ++d) {
                const std::size_t xp = order[d];
                const std::size_t yp = map_ab[xp];
                ok = mult(ma, x, xp) == mult(mb, y, yp) && mult(ma, xp, x) == mult(mb, yp, y);
            }
            if (!ok)
                continue;
            map_ab[x] = y;
            used[y] = true;
            if (extend(depth + 1))
                return true;
            used[y] = false;
        }
        return false;
    };
    return extend(0);
}

std::string to_text(const ControllerStructure& s) {
    std::ostringstream os;
    os << "# controller structure: blocks, output, edges\n";
    for (const auto& b : s.blocks()) {
        os << b.id << ' ' << to_string(b.kind);
        if (b.kind == BlockKind::gain)
            os << ' ' << format_value(b.value);
        os << '\n';
    }
    os << "output " << s.output_signal() << '\n';
    for (const auto& e : s.edges()) {
        os << s.blocks()[e.src].id << " -> " << s.blocks()[e.dst].id;
        if (is_delay(s, e.dst))
            os << " 1";
        os << '\n';
    }
    return os.str();
}

ControllerStructure parse_structure(std::istream& in) {
    ControllerStructure s;
    struct PendingEdge {
        std::string src, dst;
        std::optional<int> delay;
        int line;
    };
    std::vector<PendingEdge> edges;
    std::optional<std::pair<std::string, int>> output;
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& msg) -> void {
        throw std::runtime_error("structure line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;)
            tok.push_back(t);
        if (tok.empty())
            continue;
        try {
            if (tok[0] == "output") {
                if (tok.size() != 2 || output)
                    fail("expected a single 'output <id>' line");
                output = {tok[1], lineno};
            } else if (tok.size() >= 3 && tok[1] == "->") {
                if (tok.size() > 4)
                    fail("expected '<src> -> <dst> [delay]'");
                std::optional<int> d;
                if (tok.size() == 4) {
                    std::size_t used = 0;
                    d = std::stoi(tok[3], &used);
                    if (used != tok[3].size())
                        fail("bad delay '" + tok[3] + "'");
                }
                edges.push_back({tok[0], tok[2], d, lineno});
            } else {
                const std::string& kind = tok[1];
                if (kind == "gain") {
                    if (tok.size() != 3)
                        fail("gain block needs a value");
                    std::size_t used = 0;
                    const double v = std::stod(tok[2], &used);
                    if (used != tok[2].size())
                        fail("bad gain value '" + tok[2] + "'");
                    s.add_block({tok[0], BlockKind::gain, v});
                } else if (tok.size() == 2 && (kind == "sum" || kind == "delay" || kind == "input")) {
                    s.add_block({tok[0], kind == "sum"     ? BlockKind::sum
                                         : kind == "delay" ? BlockKind::unit_delay
                                                           : BlockKind::input});
                } else {
                    fail("unrecognized line");
                }
            }
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        } catch (const std::out_of_range& e) {
            fail(e.what());
        }
    }
    for (const auto& e : edges) {
        lineno = e.line;
        try {
            s.add_edge(e.src, e.dst);
        } catch (const std::out_of_range& ex) {
            fail(ex.what());
        }
        const int derived = is_delay(s, s.index_of(e.dst)) ? 1 : 0;
        if (e.delay && *e.delay != derived)
            fail("edge delay " + std::to_string(*e.delay) + " disagrees with the destination block kind");
    }
    if (!output) {
        lineno = 0;
        fail("missing 'output <id>' line");
    }
    lineno = output->second;
    try {
        s.set_output(output->first);
        s.validate();
    } catch (const std::exception& e) {
        fail(e.what());
    }
    return s;
}

std::string to_dot(const ControllerStructure& s) {
    std::ostringstream os;
    os << "digraph controller {\n  rankdir=LR;\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto& b = s.blocks()[i];
        os << "  \"" << b.id << "\" [";
        switch (b.kind) {
        case BlockKind::input:
            os << "shape=plaintext";
            break;
        case BlockKind::gain:
            os << "shape=box, label=\"" << b.id << "\\n" << format_value(b.value) << "\"";
            break;
        case BlockKind::sum:
            os << "shape=circle, label=\"+\", xlabel=\"" << b.id << "\"";
            break;
        case BlockKind::unit_delay:
            os << "shape=box, style=dashed, label=\"z^-1\", xlabel=\"" << b.id << "\"";
            break;
        }
        if (i == s.output_index())
            os << ", peripheries=2";
        os << "];\n";
    }
    for (const auto& e : s.edges()) {
        os << "  \"" << s.blocks()[e.src].id << "\" -> \"" << s.blocks()[e.dst].id << "\"";
        if (is_delay(s, e.dst))
            os << " [style=dashed]";
        os << ";\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace neuroctl
