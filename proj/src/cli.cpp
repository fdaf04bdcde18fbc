#include "neuroctl/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <utility>

#include <CLI11.hpp>

#include "neuroctl/delay_compat.hpp"

namespace neuroctl {

namespace {

std::string num(double v, int digits = 12) {
    if (v == 0.0)
        v = 0.0;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    const char* begin = value.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (value.empty() || end != begin + value.size() || !std::isfinite(v))
        throw ConfigError("'" + key + "' expects a finite number, got '" + value + "'");
    return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError("'" + key + "' expects a non-negative integer, got '" + value + "'");
    return v;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
    static const std::vector<std::pair<std::string, Setter>> table = {
        {"f_max", [](RunConfig& c, const auto& k, const auto& v) { c.muscle.f_max = parse_double(k, v); }},
        {"tau", [](RunConfig& c, const auto& k, const auto& v) { c.muscle.tau = parse_double(k, v); }},
        {"r_bar", [](RunConfig& c, const auto& k, const auto& v) { c.r_bar = parse_double(k, v); }},
        {"ts", [](RunConfig& c, const auto& k, const auto& v) { c.ts = parse_double(k, v); }},
        {"delay", [](RunConfig& c, const auto& k, const auto& v) { c.delay = parse_uint(k, v); }},
        {"q", [](RunConfig& c, const auto& k, const auto& v) { c.weights.q = parse_double(k, v); }},
        {"r", [](RunConfig& c, const auto& k, const auto& v) { c.weights.r = parse_double(k, v); }},
        {"c1", [](RunConfig& c, const auto& k, const auto& v) { c.decomposition.c1 = parse_double(k, v); }},
        {"c3", [](RunConfig& c, const auto& k, const auto& v) { c.decomposition.c3 = parse_double(k, v); }},
        {"eps1", [](RunConfig& c, const auto& k, const auto& v) { c.decomposition.eps1 = parse_double(k, v); }},
        {"eps3", [](RunConfig& c, const auto& k, const auto& v) { c.decomposition.eps3 = parse_double(k, v); }},
        {"realization",
         [](RunConfig& c, const auto& k, const auto& v) {
             if (v == "general")
                 c.realization = RealizationChoice::general;
             else if (v == "controllable")
                 c.realization = RealizationChoice::controllable;
             else if (v == "observable")
                 c.realization = RealizationChoice::observable;
             else
                 throw ConfigError("'" + k + "' must be general, controllable or observable, got '" + v + "'");
         }},
        {"seed", [](RunConfig& c, const auto& k, const auto& v) { c.seed = parse_uint(k, v); }},
        {"disturbance",
         [](RunConfig& c, const auto& k, const auto& v) {
             if (v != "pulse" && v != "none")
                 throw ConfigError("'" + k + "' must be pulse or none, got '" + v + "'");
             c.pulse_disturbance = v == "pulse";
         }},
        {"pulse_amplitude", [](RunConfig& c, const auto& k, const auto& v) { c.pulse_amplitude = parse_double(k, v); }},
        {"pulse_start", [](RunConfig& c, const auto& k, const auto& v) { c.pulse_start = parse_uint(k, v); }},
        {"pulse_duration", [](RunConfig& c, const auto& k, const auto& v) { c.pulse_duration = parse_uint(k, v); }},
        {"horizon", [](RunConfig& c, const auto& k, const auto& v) { c.horizon = parse_uint(k, v); }},
        {"output_dir",
         [](RunConfig& c, const auto& k, const auto& v) {
             if (v.empty())
                 throw ConfigError("'" + k + "' must not be empty");
             c.output_dir = v;
         }},
    };
    return table;
}

std::string format_row(const Eigen::RowVectorXd& row) {
    std::string s = "[";
    for (Eigen::Index j = 0; j < row.size(); ++j)
        s += (j ? ", " : "") + num(row(j));
    return s + "]";
}

void print_realization(std::ostream& out, const Realization& r) {
    out << "F =\n";
    for (Eigen::Index i = 0; i < r.order(); ++i)
        out << "  " << format_row(r.f.row(i)) << "\n";
    out << "H = " << format_row(r.h.transpose()) << "\n";
    out << "M = " << format_row(r.m) << "\n";
    out << "N = " << num(r.n_ff) << "\n";
    out << "states: ";
    for (std::size_t i = 0; i < r.labels.size(); ++i)
        out << (i ? ", " : "") << r.labels[i];
    out << "\n";
}

void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& content,
                std::ostream& out) {
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + path.string());
    f << content;
    if (!f)
        throw std::runtime_error("failed while writing " + path.string());
    out << "wrote " << path.string() << "\n";
}

std::string controller_text(const RunConfig& cfg, const Synthesis& s) {
    std::ostringstream os;
    os << "# delayed LQR controller for the linearized muscle\n";
    os << "delay " << cfg.delay << "\n";
    os << "q " << num(cfg.weights.q, 17) << "\n";
    os << "r " << num(cfg.weights.r, 17) << "\n";
    os << "a " << num(s.plant.a, 17) << "\n";
    os << "b " << num(s.plant.b, 17) << "\n";
    for (std::size_t i = 0; i < s.lqr.gains.k.size(); ++i)
        os << "K" << i << ' ' << num(s.lqr.gains.k[i], 17) << "\n";
    if (s.lqr.gains.k0() != 0.0) {
        const auto g = gains_to_tf(s.lqr.gains);
        os << "num";
        for (double c : g.num())
            os << ' ' << num(c, 17);
        os << "\nden";
        for (double c : g.den())
            os << ' ' << num(c, 17);
        os << "\n";
    } else {
        os << "num 0\nden 1\n";
    }
    return os.str();
}

int cmd_synthesize(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const Synthesis s = synthesize(cfg);
    out << "plant: a = " << num(s.plant.a) << ", b = " << num(s.plant.b) << ", ts = " << num(cfg.ts) << "\n";
    out << "equilibrium: r_bar = " << num(s.op.r_bar) << ", f_bar = " << num(s.op.f_bar) << "\n";
    out << "gains:";
    for (std::size_t i = 0; i < s.lqr.gains.k.size(); ++i)
        out << " K" << i << " = " << num(s.lqr.gains.k[i]);
    out << "\n";
    const auto rd = controller_relative_degree(s.lqr.gains);
    if (!rd) {
        err << "warning: all feedback gains are zero (q = " << num(cfg.weights.q)
            << "); the controller is identically zero\n";
        out << "G(z) = 0\nrelative degree: undefined (zero controller)\n";
    } else {
        out << "G(z) = " << gains_to_tf(s.lqr.gains).to_string() << "\n";
        out << "relative degree: " << *rd << "\n";
    }
    write_file(cfg.output_dir, "controller.txt", controller_text(cfg, s), out);
    return 0;
}

int cmd_decompose(const RunConfig& cfg, std::ostream& out) {
    const Synthesis s = synthesize(cfg);
    const ControllerPipeline p = build_pipeline(cfg, s, RealizationChoice::controllable);
    const auto g = gains_to_tf(s.lqr.gains);
    const auto& d = p.decomposition;
    out << "G(z)  = " << g.to_string() << "\n";
    out << "G1(z) = " << d.g1.to_string() << "\n";
    out << "G2(z) = " << d.g2.to_string() << "\n";
    out << "G3(z) = " << d.g3.to_string() << "\n";
    const auto product = multiply(d.g3, multiply(d.g2, d.g1));
    double worst = 0.0;
    const auto h_g = impulse_response(g, 50);
    const auto h_p = impulse_response(product, 50);
    for (std::size_t t = 0; t < h_g.size(); ++t)
        worst = std::max(worst, std::abs(h_g[t] - h_p[t]));
    out << "relative degrees: G1 " << relative_degree(d.g1) << ", G2 " << relative_degree(d.g2) << ", G3 "
        << relative_degree(d.g3) << "\n";
    out << "G3 G2 G1 vs G, max impulse-response difference over 50 samples: " << num(worst, 3) << "\n";
    return 0;
}

int cmd_realize(const RunConfig& cfg, std::ostream& out) {
    const Synthesis s = synthesize(cfg);
    const ControllerPipeline p = build_pipeline(cfg, s, cfg.realization);
    const Realization& core = p.stages[1];
    out << "core realization: " << to_string(cfg.realization);
    if (cfg.realization == RealizationChoice::general)
        out << " (seed " << cfg.seed << ")";
    out << "\n";
    print_realization(out, core);
    out << "minimal: " << (is_minimal(core) ? "yes" : "no") << "\n";
    const NeuralCircuit c = circuit_of(core);
    out << "core circuit: " << neuron_count(c) << " neurons, " << summation_site_count(c) << " summation sites\n";
    out << "branches:";
    for (const auto& n : c.neurons)
        out << ' ' << n.id << '=' << branch_count(c, n.id);
    out << "\n";
    out << "full pipeline circuit: " << neuron_count(p.circuit) << " neurons\n";
    out << to_text(p.circuit);
    return 0;
}

std::optional<std::size_t> delay_of(const Delay& d) {
    if (d.is_infinite())
        return std::nullopt;
    return d.steps();
}

int cmd_check_compat(const std::string& structure_path, const std::string& graph_path, std::ostream& out) {
    std::ifstream sf(structure_path);
    if (!sf)
        throw ConfigError("cannot open structure file " + structure_path);
    std::ifstream gf(graph_path);
    if (!gf)
        throw ConfigError("cannot open delay graph file " + graph_path);
    ControllerStructure s;
    DelayGraph g;
    try {
        s = parse_structure(sf);
        s.validate();
        g = parse_delay_graph(gf);
        g.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }

    const CompatibilityResult r = search_compatible_assignment(s, g);
    const DelayMatrix e = closure(g);
    if (r.assignment) {
        out << "COMPATIBLE\n";
        out << "assignment (signal -> vertex):\n";
        for (const auto& [name, v] : *r.assignment)
            out << "  " << name << " -> v" << v + 1 << "\n";
        out << "controller delay matrix:\n" << controller_delay_matrix(s, *r.assignment, g.n).to_string();
        out << "delay graph matrix:\n" << e.to_string();
        return 0;
    }
    out << "INCOMPATIBLE\n";
    out << "no assignment of " << r.stats.free_signals << " free signals to " << r.stats.vertices
        << " vertices keeps every controller path at least as slow as the delay graph\n";
    out << "partial assignments tried: " << r.stats.nodes_visited
        << ", complete assignments checked: " << r.stats.leaves_checked << "\n";
    if (!r.stats.violations.empty()) {
        out << "rejections by vertex pair:\n";
        for (const auto& [pair, count] : r.stats.violations) {
            const auto need = delay_of(e(pair.first, pair.second));
            out << "  v" << pair.first + 1 << " -> v" << pair.second + 1 << " (needs delay >= "
                << (need ? std::to_string(*need) : std::string("inf")) << "): " << count << "\n";
        }
    }
    out << "delay graph matrix:\n" << e.to_string();
    return 1;
}

ClosedLoopTrace open_loop_trace(const RunConfig& cfg, const DiscretePlant& plant) {
    const Disturbance d = cfg.disturbance();
    std::vector<double> input(cfg.horizon);
    for (std::size_t t = 0; t < cfg.horizon; ++t)
        input[t] = d.at(t);
    ClosedLoopTrace trace;
    trace.ts = plant.ts;
    trace.delta_f = open_loop_sim(plant, input, cfg.horizon);
    trace.delta_r = input;
    for (std::size_t t = 0; t < cfg.horizon; ++t)
        trace.time.push_back(static_cast<double>(t) * plant.ts);
    return trace;
}

int cmd_simulate(const RunConfig& cfg, const std::optional<std::string>& preset, std::ostream& out) {
    const Synthesis s = synthesize(cfg);
    std::string mode = preset.value_or(to_string(cfg.realization));
    ClosedLoopTrace trace;
    std::ostringstream comment;
    comment << "neuroctl simulate preset=" << mode << "\n";
    if (mode == "open-loop") {
        comment << "input: firing-rate pulse on delta_r, no feedback\n";
        trace = open_loop_trace(cfg, s.plant);
    } else if (mode == "closed-loop") {
        comment << "controller: augmented state feedback\n";
        trace = closed_loop(s.plant, s.lqr.gains, cfg.disturbance(), cfg.horizon);
    } else {
        RealizationChoice choice = RealizationChoice::general;
        if (mode == "controllable")
            choice = RealizationChoice::controllable;
        else if (mode == "observable")
            choice = RealizationChoice::observable;
        const ControllerPipeline p = build_pipeline(cfg, s, choice);
        comment << "controller: neural circuit, " << mode << " core realization\n";
        trace = closed_loop(s.plant, p.circuit, cfg.disturbance(), cfg.horizon);
    }
    comment << "seed=" << cfg.seed << " q=" << num(cfg.weights.q, 17) << " r=" << num(cfg.weights.r, 17)
            << " c1=" << num(cfg.decomposition.c1, 17) << " c3=" << num(cfg.decomposition.c3, 17)
            << " eps1=" << num(cfg.decomposition.eps1, 17) << " eps3=" << num(cfg.decomposition.eps3, 17) << "\n";
    comment << "disturbance=" << (cfg.pulse_disturbance ? "pulse" : "none") << " amplitude="
            << num(cfg.pulse_amplitude, 17) << " start=" << cfg.pulse_start << " duration=" << cfg.pulse_duration
            << " horizon=" << cfg.horizon;

    const std::string csv = to_csv(trace, s.op, comment.str());
    const std::string svg = to_svg(trace, s.op, mode + " (seed " + std::to_string(cfg.seed) + ")");
    write_file(cfg.output_dir, "trace.csv", csv, out);
    write_file(cfg.output_dir, "trace.svg", svg, out);
    return 0;
}

int cmd_export_structure(const RunConfig& cfg, std::ostream& out) {
    const Synthesis s = synthesize(cfg);
    if (cfg.delay != 2)
        throw ConfigError("structure export needs delay = 2");
    const ControllerStructure ifp = ifp_structure(s.lqr.gains);
    const ControllerPipeline p = build_pipeline(cfg, s, cfg.realization);
    const std::filesystem::path dir = cfg.output_dir;
    write_file(dir, "ifp.structure", to_text(ifp), out);
    write_file(dir, "ifp.dot", to_dot(ifp), out);
    write_file(dir, "decomposed.structure", to_text(p.structure), out);
    write_file(dir, "decomposed.dot", to_dot(p.structure), out);
    write_file(dir, "circuit.txt", to_text(p.circuit), out);
    write_file(dir, "muscle.graph", to_text(muscle_delay_graph()), out);
    return 0;
}

struct ConfigOptions {
    std::string config_path;
    std::vector<std::pair<std::string, CLI::Option*>> flags;
    std::map<std::string, std::string> values;
};

void add_config_options(CLI::App& cmd, ConfigOptions& o) {
    cmd.add_option("--config", o.config_path, "key=value run configuration file");
    for (const auto& key : config_keys())
        o.flags.emplace_back(key, cmd.add_option("--" + key, o.values[key], "override '" + key + "'"));
}

RunConfig resolve_config(const ConfigOptions& o) {
    RunConfig cfg;
    if (!o.config_path.empty()) {
        std::ifstream f(o.config_path);
        if (!f)
            throw ConfigError("cannot open config file " + o.config_path);
        apply_config(cfg, f);
    }
    for (const auto& [key, opt] : o.flags)
        if (opt->count() > 0)
            apply_setting(cfg, key, o.values.at(key));
    cfg.validate();
    return cfg;
}

} // namespace

std::string to_string(RealizationChoice c) {
    switch (c) {
    case RealizationChoice::general:
        return "general";
    case RealizationChoice::controllable:
        return "controllable";
    case RealizationChoice::observable:
        return "observable";
    }
    return "unknown";
}

void RunConfig::validate() const {
    try {
        neuroctl::validate(muscle);
        neuroctl::validate(decomposition);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(ts > 0.0))
        throw ConfigError("ts must be positive");
    if (delay < 1)
        throw ConfigError("delay must be at least one step");
    if (!(weights.q >= 0.0))
        throw ConfigError("q must be non-negative");
    if (!(weights.r > 0.0))
        throw ConfigError("r must be positive");
    if (pulse_disturbance && pulse_duration < 1)
        throw ConfigError("pulse_duration must be at least one step");
    if (horizon < 1)
        throw ConfigError("horizon must be at least one step");
}

Disturbance RunConfig::disturbance() const {
    return pulse_disturbance ? pulse(pulse_amplitude, pulse_start, pulse_duration) : no_disturbance();
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [key, _] : setters())
            k.push_back(key);
        return k;
    }();
    return keys;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& [k, set] : setters())
        if (k == key) {
            set(cfg, key, value);
            return;
        }
    throw ConfigError("unknown config key '" + key + "'");
}

void apply_config(RunConfig& cfg, std::istream& in) {
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second)
            throw ConfigError("config line " + std::to_string(lineno) + ": repeated key '" + key + "'");
        try {
            apply_setting(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

Synthesis synthesize(const RunConfig& cfg) {
    cfg.validate();
    Synthesis s;
    s.op = operating_point(cfg.muscle, cfg.r_bar);
    s.plant = discretize(linearize(cfg.muscle, s.op), cfg.ts);
    const AugmentedSystem sys = augment(s.plant, cfg.delay);
    s.lqr = solve_delayed_lqr(sys, augment_cost(cfg.weights, cfg.delay));
    return s;
}

ControllerPipeline build_pipeline(const RunConfig& cfg, const Synthesis& s, RealizationChoice choice) {
    if (cfg.delay != 2)
        throw ConfigError("the relay decomposition needs delay = 2, got " + std::to_string(cfg.delay));
    if (s.lqr.gains.k0() == 0.0)
        throw ConfigError("the synthesized controller is identically zero (q = 0); nothing to decompose");
    const auto& dp = cfg.decomposition;
    ControllerPipeline p{decompose(gains_to_tf(s.lqr.gains), dp), {}, {}, {}, {}, {}};
    Realization core;
    switch (choice) {
    case RealizationChoice::general:
        core = random_general_realization(p.decomposition.g2, cfg.seed);
        break;
    case RealizationChoice::controllable:
        core = controllable_canonical(p.decomposition.g2);
        break;
    case RealizationChoice::observable:
        core = observable_canonical(p.decomposition.g2);
        break;
    }
    p.stages = {first_order_stage(dp.c1, dp.eps1), core, first_order_stage(dp.c3, dp.eps3)};
    const std::vector<std::string> prefixes{"g1", "g2", "g3"};
    for (const auto& r : p.stages)
        p.structures.push_back(structure_of(r));
    p.realization = series(p.stages, prefixes);
    p.structure = series(p.structures, prefixes);
    p.circuit = circuit_of(p.structure);
    return p;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Delayed optimal muscle controllers and their neural circuit realizations", "neuroctl"};
    app.require_subcommand(1);

    ConfigOptions synth_opts, decomp_opts, realize_opts, sim_opts, export_opts;
    auto* synth = app.add_subcommand("synthesize", "solve the delayed LQR and write controller.txt");
    add_config_options(*synth, synth_opts);
    auto* decomp = app.add_subcommand("decompose", "split G(z) into input relay, core and output relay");
    add_config_options(*decomp, decomp_opts);
    auto* realize = app.add_subcommand("realize", "print a realization of the core and its circuit");
    add_config_options(*realize, realize_opts);

    std::string structure_path, graph_path;
    auto* check = app.add_subcommand("check-compat", "test a controller structure against a delay graph");
    check->add_option("structure", structure_path, "controller structure file")->required();
    check->add_option("graph", graph_path, "delay graph file")->required();

    std::string preset;
    auto* sim = app.add_subcommand("simulate", "run a scenario and write trace.csv and trace.svg");
    add_config_options(*sim, sim_opts);
    auto* preset_opt = sim->add_option("--preset", preset, "scenario to run")
                           ->check(CLI::IsMember({"open-loop", "closed-loop", "general", "controllable", "observable"}));

    auto* exp = app.add_subcommand("export-structure", "write structure, circuit, graph and dot files");
    add_config_options(*exp, export_opts);

    std::vector<const char*> argv{"neuroctl"};
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed())
            return cmd_synthesize(resolve_config(synth_opts), out, err);
        if (decomp->parsed())
            return cmd_decompose(resolve_config(decomp_opts), out);
        if (realize->parsed())
            return cmd_realize(resolve_config(realize_opts), out);
        if (check->parsed())
            return cmd_check_compat(structure_path, graph_path, out);
        if (sim->parsed()) {
            std::optional<std::string> p;
            if (preset_opt->count() > 0)
                p = preset;
            return cmd_simulate(resolve_config(sim_opts), p, out);
        }
        if (exp->parsed())
            return cmd_export_structure(resolve_config(export_opts), out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

} // namespace neuroctl
