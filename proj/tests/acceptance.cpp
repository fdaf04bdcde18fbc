// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dp_oracle.hpp"
#include "neuroctl/delay_compat.hpp"
#include "neuroctl/delayed_lqr.hpp"
#include "neuroctl/muscle_plant.hpp"
#include "neuroctl/neural_circuit.hpp"
#include "neuroctl/realization.hpp"
#include "neuroctl/simulation.hpp"
#include "neuroctl/structure_graph.hpp"
#include "neuroctl/transfer_fn.hpp"
#include "test_support.hpp"

using namespace neuroctl;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

Realization pipeline_of(const Realization& core) {
    const std::vector<Realization> stages{first_order_stage(1, 0), core, first_order_stage(1, 0)};
    const std::vector<std::string> prefixes{"g1", "g2", "g3"};
    return series(stages, prefixes);
}

RationalTransferFunction default_core() { return decompose(testing::default_controller(), {}).g2; }

Outcome discretization() {
    const auto start = Clock::now();
    MuscleParams p;
    p.f_max = 60.0;
    p.tau = 0.02;
    const auto op = operating_point(p, 1.0);
    const auto plant = discretize(linearize(p, op), 0.01);
    const double elapsed = ms_since(start);
    const bool ok = std::abs(plant.a - 0.61) <= 0.01 && std::abs(plant.b - 4.64) <= 0.01 &&
                    std::abs(op.f_bar - 43.9) <= 0.05 && op.r_bar == 1.0 && elapsed < 1.0;
    return {ok, "a=" + fmt("%.4f", plant.a) + " b=" + fmt("%.4f", plant.b) + " f_bar=" + fmt("%.4f", op.f_bar) +
                    " in " + fmt("%.3f", elapsed) + " ms"};
}

Outcome lqr_oracle() {
    const auto start = Clock::now();
    const auto plant = testing::muscle_plant();
    const std::vector<LqrWeights> weights{{1.0, 0.01}, {1.0, 1.0}, {0.1, 0.01}, {5.0, 0.2}, {1.0, 0.001}, {0.3, 3.0}};
    double worst = 0.0;
    for (const auto& w : weights) {
        const auto riccati = solve_delayed_lqr(augment(plant, 2), augment_cost(w, 2)).gains.k;
        const auto dp = testing::DpOracle(plant.a, plant.b, 2, w.q, w.r).gains(500);
        for (std::size_t i = 0; i < riccati.size(); ++i)
            worst = std::max(worst, std::abs(riccati[i] - dp[i]));
    }
    const double elapsed = ms_since(start);
    return {worst <= 1e-9 && elapsed < 1000.0, std::to_string(weights.size()) + " weight pairs, max gain gap " +
                                                   fmt("%.2e", worst) + " in " + fmt("%.1f", elapsed) + " ms"};
}

Outcome relative_degree_two() {
    const auto g = testing::default_controller();
    const std::size_t rd = relative_degree(g);
    const auto d = pulse(1.0, 10, 10);
    const auto circuit = circuit_of(pipeline_of(random_general_realization(default_core(), 1)));
    bool silent = true, reacts = true;
    for (const Controller& c : {Controller{testing::default_gains()}, Controller{circuit}}) {
        const auto trace = closed_loop(testing::muscle_plant(), c, d, 40);
        for (std::size_t t = 0; t < d.start + 2; ++t)
            silent = silent && trace.delta_r[t] == 0.0;
        reacts = reacts && trace.delta_r[d.start + 2] != 0.0;
    }
    return {rd == 2 && silent && reacts, "relative degree " + std::to_string(rd) +
                                             (silent ? ", delta_r zero for 2 steps after onset" : ", early response")};
}

Outcome compatibility() {
    const auto start = Clock::now();
    const auto graph = muscle_delay_graph();
    const auto ifp = search_compatible_assignment(ifp_structure(testing::default_gains()), graph);
    const std::vector<ControllerStructure> stages{structure_of(first_order_stage(1, 0)),
                                                  structure_of(controllable_canonical(default_core())),
                                                  structure_of(first_order_stage(1, 0))};
    const auto decomposed = series(stages);
    const auto witness = find_compatible_assignment(decomposed, graph);
    const double elapsed = ms_since(start);
    const DelayMatrix expected{{Delay(0), Delay(1), Delay::infinite()},
                               {Delay::infinite(), Delay(0), Delay(1)},
                               {Delay::infinite(), Delay::infinite(), Delay(0)}};
    const bool matrix_ok = witness && controller_delay_matrix(decomposed, *witness, graph.n) == expected;
    const bool ok = !ifp.assignment && witness && matrix_ok && elapsed < 1000.0;
    return {ok, std::string("augmented-state structure ") + (ifp.assignment ? "compatible" : "incompatible") +
                    ", decomposed " + (witness ? "compatible" : "incompatible") +
                    (matrix_ok ? " with the expected witness matrix" : "") + " in " + fmt("%.1f", elapsed) + " ms"};
}

Outcome realization_equivalence() {
    const auto g2 = default_core();
    std::vector<Realization> cores{controllable_canonical(g2), observable_canonical(g2)};
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
        cores.push_back(random_general_realization(g2, seed));

    std::vector<double> impulse(50, 0.0);
    impulse[0] = 1.0;
    std::vector<std::vector<double>> responses;
    for (const auto& r : cores)
        responses.push_back(simulate(r, impulse).output);
    double impulse_gap = 0.0;
    for (const auto& a : responses)
        for (const auto& b : responses)
            impulse_gap = std::max(impulse_gap, testing::max_abs_diff(a, b));

    const auto d = pulse(1.0, 10, 10);
    std::vector<ClosedLoopTrace> traces;
    for (const auto& r : cores)
        traces.push_back(closed_loop(testing::muscle_plant(), circuit_of(pipeline_of(r)), d, 200));
    double loop_gap = 0.0;
    for (const auto& a : traces)
        for (const auto& b : traces)
            loop_gap = std::max({loop_gap, testing::max_abs_diff(a.delta_f, b.delta_f),
                                 testing::max_abs_diff(a.delta_r, b.delta_r)});
    return {impulse_gap <= 1e-9 && loop_gap <= 1e-10,
            std::to_string(cores.size()) + " realizations, impulse gap " + fmt("%.2e", impulse_gap) +
                ", closed-loop gap " + fmt("%.2e", loop_gap)};
}

Outcome universality() {
    std::mt19937_64 rng(2024);
    std::vector<double> impulse(60, 0.0);
    impulse[0] = 1.0;
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const auto g = testing::random_biproper(rng);
        const auto want = impulse_response(g, 60);
        for (const auto& r : {controllable_canonical(g), observable_canonical(g),
                              random_general_realization(g, 100 + static_cast<std::uint64_t>(i))})
            worst = std::max(worst, testing::max_abs_diff(simulate_circuit(circuit_of(r), impulse, 60).output, want));
    }
    return {worst <= 1e-10, "20 transfer functions x 3 templates, max gap " + fmt("%.2e", worst)};
}

Outcome divergent_internals() {
    const auto g2 = default_core();
    const auto d = pulse(1.0, 10, 10);
    const auto a = closed_loop(testing::muscle_plant(), circuit_of(pipeline_of(random_general_realization(g2, 1))), d, 200);
    const auto b = closed_loop(testing::muscle_plant(), circuit_of(pipeline_of(random_general_realization(g2, 2))), d, 200);
    const double output_gap = std::max(testing::max_abs_diff(a.delta_r, b.delta_r), testing::max_abs_diff(a.delta_f, b.delta_f));
    double neuron_gap = 0.0;
    for (std::size_t i = 0; i < a.neuron_rates.size(); ++i)
        neuron_gap = std::max(neuron_gap, testing::max_abs_diff(a.neuron_rates[i], b.neuron_rates[i]));
    return {output_gap <= 1e-10 && neuron_gap >= 0.1,
            "seeds 1 and 2: output gap " + fmt("%.2e", output_gap) + ", largest neuron gap " + fmt("%.3f", neuron_gap)};
}

Outcome settling() {
    double worst = 0.0;
    std::size_t pulses = 0;
    for (double amplitude : {1.0, -2.0, 0.5}) {
        for (std::size_t duration : {1u, 10u, 30u}) {
            const auto d = pulse(amplitude, 10, duration);
            const auto trace = closed_loop(testing::muscle_plant(), testing::default_gains(), d, d.end() + 400);
            for (std::size_t t = d.end() + 100; t < trace.steps(); ++t)
                worst = std::max(worst, std::abs(trace.delta_f[t]));
            ++pulses;
        }
    }
    return {worst < 1e-6, std::to_string(pulses) + " pulses, max |delta_f| from 100 steps after the pulse " +
                              fmt("%.2e", worst)};
}

Outcome guarded(const std::function<Outcome()>& check) {
    try {
        return check();
    } catch (const std::exception& e) {
        return {false, std::string("exception: ") + e.what()};
    }
}

} // namespace

int main() {
    struct Criterion {
        const char* title;
        Outcome outcome;
    };
    std::vector<Criterion> results;
    results.push_back({"discretization constants", guarded(discretization)});
    results.push_back({"LQR gains match dynamic programming", guarded(lqr_oracle)});
    results.push_back({"controller relative degree 2", guarded(relative_degree_two)});
    results.push_back({"delay compatibility verdicts", guarded(compatibility)});
    results.push_back({"realization equivalence", guarded(realization_equivalence)});
    results.push_back({"circuit templates are universal", guarded(universality)});
    results.push_back({"divergent internals", guarded(divergent_internals)});
    results.push_back({"force settles after a pulse", guarded(settling)});
    // No reference pulse-response trace with known weights and pulse shape
    // exists, so this is judged on the delayed onset and the settling above.
    const bool qualitative = results[2].outcome.pass && results[7].outcome.pass;
    results.push_back({"pulse response (qualitative)",
                       {qualitative, "exact trace not reproducible; covered by criteria 3 and 8"}});

    bool all = true;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        std::printf("%s criterion %zu: %s (%s)\n", r.outcome.pass ? "PASS" : "FAIL", i + 1, r.title,
                    r.outcome.detail.c_str());
        all = all && r.outcome.pass;
    }
    return all ? 0 : 1;
}
