#include "neuroctl/neural_circuit.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace neuroctl {

namespace {

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Linear combination of step-t sources (delay outputs and the input), keyed
// by block index so the ordering follows the structure.
using Combination = std::map<std::size_t, double>;

} // namespace

void NeuralCircuit::validate() const {
    std::set<std::string> ids;
    for (const auto& n : neurons) {
        if (n.id.empty() || n.id == external_input)
            throw std::invalid_argument("neuron id '" + n.id + "' is empty or shadows the external input");
        if (!ids.insert(n.id).second)
            throw std::invalid_argument("duplicate neuron id '" + n.id + "'");
    }
    auto check = [&](const Synapse& s) {
        if (s.source != external_input && !ids.contains(s.source))
            throw std::invalid_argument("synapse source '" + s.source + "' does not exist");
        if (!std::isfinite(s.weight))
            throw std::invalid_argument("non-finite synaptic weight");
    };
    for (const auto& n : neurons) {
        if (!std::isfinite(n.self_weight))
            throw std::invalid_argument("non-finite self weight on '" + n.id + "'");
        for (const auto& s : n.synapses)
            check(s);
    }
    if (output_taps.empty())
        throw std::invalid_argument("circuit has no output taps");
    for (const auto& t : output_taps)
        check(t);
}

std::size_t NeuralCircuit::index_of(const std::string& neuron_id) const {
    for (std::size_t i = 0; i < neurons.size(); ++i)
        if (neurons[i].id == neuron_id)
            return i;
    throw std::out_of_range("unknown neuron '" + neuron_id + "'");
}

NeuralCircuit circuit_of(const Realization& r) {
    validate(r);
    const auto n = r.order();
    NeuralCircuit c;
    c.external_input = "u";
    for (Eigen::Index i = 0; i < n; ++i) {
        Neuron neuron{r.labels[static_cast<std::size_t>(i)], r.f(i, i), {}};
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i && r.f(i, j) != 0.0)
                neuron.synapses.push_back({r.labels[static_cast<std::size_t>(j)], r.f(i, j)});
        if (r.h(i) != 0.0)
            neuron.synapses.push_back({c.external_input, r.h(i)});
        c.neurons.push_back(std::move(neuron));
    }
    for (Eigen::Index i = 0; i < n; ++i)
        if (r.m(i) != 0.0)
            c.output_taps.push_back({r.labels[static_cast<std::size_t>(i)], r.m(i)});
    if (r.n_ff != 0.0)
        c.output_taps.push_back({c.external_input, r.n_ff});
    c.validate();
    return c;
}

NeuralCircuit circuit_of(const ControllerStructure& s) {
    const auto& blocks = s.blocks();
    std::vector<std::optional<Combination>> memo(s.size());
    std::vector<bool> on_stack(s.size(), false);

    auto expand = [&](auto&& self, std::size_t i) -> const Combination& {
        if (memo[i])
            return *memo[i];
        if (on_stack[i])
            throw std::invalid_argument("structure has a delay-free cycle through '" + blocks[i].id +
                                        "'; it cannot be built from delayed neurons");
        on_stack[i] = true;
        Combination out;
        switch (blocks[i].kind) {
        case BlockKind::input:
        case BlockKind::unit_delay:
            out[i] = 1.0;
            break;
        case BlockKind::gain:
            for (const auto& [src, w] : self(self, s.inputs_of(i).front()))
                out[src] += blocks[i].value * w;
            break;
        case BlockKind::sum:
            for (std::size_t j : s.inputs_of(i))
                for (const auto& [src, w] : self(self, j))
                    out[src] += w;
            break;
        }
        on_stack[i] = false;
        memo[i] = std::move(out);
        return *memo[i];
    };

    NeuralCircuit c;
    c.external_input = s.input_signal();
    auto to_synapses = [&](const Combination& comb, std::optional<std::size_t> self_index, double* self_weight) {
        std::vector<Synapse> out;
        for (const auto& [src, w] : comb) {
            if (w == 0.0)
                continue;
            if (self_index && src == *self_index)
                *self_weight = w;
            else
                out.push_back({blocks[src].id, w});
        }
        return out;
    };

    for (std::size_t i = 0; i < s.size(); ++i) {
        if (blocks[i].kind != BlockKind::unit_delay)
            continue;
        Neuron neuron{blocks[i].id, 0.0, {}};
        const Combination& drive = expand(expand, s.inputs_of(i).front());
        neuron.synapses = to_synapses(drive, i, &neuron.self_weight);
        c.neurons.push_back(std::move(neuron));
    }
    c.output_taps = to_synapses(expand(expand, s.output_index()), std::nullopt, nullptr);
    c.validate();
    return c;
}

Realization realization_of(const NeuralCircuit& c) {
    c.validate();
    const auto n = static_cast<Eigen::Index>(c.neurons.size());
    std::unordered_map<std::string, Eigen::Index> index;
    for (Eigen::Index i = 0; i < n; ++i)
        index.emplace(c.neurons[static_cast<std::size_t>(i)].id, i);

    Realization r;
    r.f = Eigen::MatrixXd::Zero(n, n);
    r.h = Eigen::VectorXd::Zero(n);
    r.m = Eigen::RowVectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& neuron = c.neurons[static_cast<std::size_t>(i)];
        r.f(i, i) += neuron.self_weight;
        for (const auto& s : neuron.synapses) {
            if (s.source == c.external_input)
                r.h(i) += s.weight;
            else
                r.f(i, index.at(s.source)) += s.weight;
        }
        r.labels.push_back(neuron.id);
    }
    for (const auto& t : c.output_taps) {
        if (t.source == c.external_input)
            r.n_ff += t.weight;
        else
            r.m(index.at(t.source)) += t.weight;
    }
    return r;
}

std::size_t neuron_count(const NeuralCircuit& c) { return c.neurons.size(); }

std::size_t branch_count(const NeuralCircuit& c, const std::string& neuron_id) {
    const std::size_t self = c.index_of(neuron_id);
    std::size_t branches = 0;
    for (std::size_t i = 0; i < c.neurons.size(); ++i) {
        if (i == self)
            continue;
        for (const auto& s : c.neurons[i].synapses)
            if (s.source == neuron_id && s.weight != 0.0) {
                ++branches;
                break;
            }
    }
    for (const auto& t : c.output_taps)
        if (t.source == neuron_id && t.weight != 0.0) {
            ++branches;
            break;
        }
    return branches;
}

std::size_t summation_site_count(const NeuralCircuit& c) {
    std::size_t sites = 0;
    for (const auto& n : c.neurons) {
        std::size_t inputs = n.self_weight != 0.0 ? 1 : 0;
        for (const auto& s : n.synapses)
            if (s.weight != 0.0)
                ++inputs;
        if (inputs >= 2)
            ++sites;
    }
    std::size_t taps = 0;
    for (const auto& t : c.output_taps)
        if (t.weight != 0.0)
            ++taps;
    return sites + (taps >= 2 ? 1 : 0);
}

CircuitRunner::CircuitRunner(const NeuralCircuit& c) {
    c.validate();
    const std::size_t n = c.neurons.size();
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i)
        index.emplace(c.neurons[i].id, i);
    auto link = [&](const Synapse& s) { return Link{s.source == c.external_input ? n : index.at(s.source), s.weight}; };
    for (const auto& neuron : c.neurons) {
        self_.push_back(neuron.self_weight);
        auto& l = links_.emplace_back();
        for (const auto& s : neuron.synapses)
            l.push_back(link(s));
    }
    for (const auto& t : c.output_taps)
        taps_.push_back(link(t));
    rates_.assign(n, 0.0);
    next_.assign(n, 0.0);
}

double CircuitRunner::output(double input) const {
    double y = 0.0;
    for (const auto& t : taps_)
        y += value(t, input);
    return y;
}

void CircuitRunner::advance(double input) {
    for (std::size_t i = 0; i < rates_.size(); ++i) {
        double acc = self_[i] * rates_[i];
        for (const auto& l : links_[i])
            acc += value(l, input);
        next_[i] = acc;
    }
    rates_.swap(next_);
}

CircuitRun simulate_circuit(const NeuralCircuit& c, std::span<const double> input, std::size_t steps) {
    if (steps == 0)
        throw std::invalid_argument("simulate_circuit needs at least one step");
    if (input.size() > steps)
        throw std::invalid_argument("circuit input is longer than the simulation horizon");
    CircuitRunner runner(c);
    CircuitRun run;
    for (const auto& n : c.neurons)
        run.trace.neuron_ids.push_back(n.id);
    run.trace.rates.assign(c.neurons.size(), std::vector<double>(steps, 0.0));
    run.output.resize(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        const double u = t < input.size() ? input[t] : 0.0;
        for (std::size_t i = 0; i < c.neurons.size(); ++i)
            run.trace.rates[i][t] = runner.rates()[i];
        run.output[t] = runner.output(u);
        runner.advance(u);
    }
    return run;
}

std::string to_text(const NeuralCircuit& c) {
    std::ostringstream os;
    os << "# neural circuit: neurons, synapses, output taps\n";
    os << "input " << c.external_input << "\n";
    for (const auto& n : c.neurons)
        os << "neuron " << n.id << ' ' << format_value(n.self_weight) << "\n";
    for (const auto& n : c.neurons)
        for (const auto& s : n.synapses)
            os << "synapse " << s.source << ' ' << n.id << ' ' << format_value(s.weight) << "\n";
    for (const auto& t : c.output_taps)
        os << "tap " << t.source << ' ' << format_value(t.weight) << "\n";
    return os.str();
}

NeuralCircuit parse_circuit(std::istream& in) {
    NeuralCircuit c;
    std::string line;
    int lineno = 0;
    struct RawSynapse {
        std::string src, dst;
        double w;
        int line;
    };
    std::vector<RawSynapse> synapses;
    auto fail = [&](const std::string& msg) {
        throw std::runtime_error("circuit line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string kw, extra;
        if (!(ls >> kw))
            continue;
        if (kw == "input") {
            if (!(ls >> c.external_input) || (ls >> extra))
                fail("expected 'input <name>'");
        } else if (kw == "neuron") {
            Neuron n;
            if (!(ls >> n.id >> n.self_weight) || (ls >> extra))
                fail("expected 'neuron <id> <self_weight>'");
            c.neurons.push_back(std::move(n));
        } else if (kw == "synapse") {
            RawSynapse s{};
            if (!(ls >> s.src >> s.dst >> s.w) || (ls >> extra))
                fail("expected 'synapse <src> <dst> <weight>'");
            s.line = lineno;
            synapses.push_back(std::move(s));
        } else if (kw == "tap") {
            Synapse t;
            if (!(ls >> t.source >> t.weight) || (ls >> extra))
                fail("expected 'tap <src> <weight>'");
            c.output_taps.push_back(std::move(t));
        } else {
            fail("unrecognized keyword '" + kw + "'");
        }
    }
    for (const auto& s : synapses) {
        lineno = s.line;
        try {
            c.neurons[c.index_of(s.dst)].synapses.push_back({s.src, s.w});
        } catch (const std::out_of_range& e) {
            fail(e.what());
        }
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        lineno = 0;
        fail(e.what());
    }
    return c;
}

} // namespace neuroctl
