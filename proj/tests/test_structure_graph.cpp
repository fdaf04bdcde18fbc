#include <doctest.h>

#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "neuroctl/structure_graph.hpp"
#include "test_support.hpp"

using namespace neuroctl;

namespace {

std::vector<double> random_input(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise;
    std::vector<double> u(n);
    for (double& v : u)
        v = noise(rng);
    return u;
}

std::size_t count_prefix(const ControllerStructure& s, char prefix) {
    std::size_t n = 0;
    for (const auto& b : s.blocks())
        n += b.kind == BlockKind::gain && !b.id.empty() && b.id[0] == prefix;
    return n;
}

ControllerStructure parse(const std::string& text) {
    std::istringstream in(text);
    return parse_structure(in);
}

Realization swap_states(const Realization& r) {
    Eigen::Matrix2d p;
    p << 0, 1, 1, 0;
    return similarity_transform(r, p);
}

std::vector<ControllerStructure> relay_pipeline(const Realization& core, const DecompositionParams& p = {}) {
    return {structure_of(first_order_stage(p.c1, p.eps1)), structure_of(core),
            structure_of(first_order_stage(p.c3, p.eps3))};
}

} // namespace

TEST_CASE("first-order stage structure") {
    const auto s = structure_of(first_order_stage(2.0, 0.4));
    CHECK(s.count(BlockKind::input) == 1);
    CHECK(s.count(BlockKind::unit_delay) == 1);
    CHECK(s.count(BlockKind::sum) == 1);
    CHECK(s.count(BlockKind::gain) == 3);
    CHECK(s.block("H1").value == 2.0);
    CHECK(s.block("F11").value == 0.4);
    CHECK(s.input_signal() == "u");
    CHECK(s.output_signal() == "M1");

    // With no self-dynamics the stage is gain -> delay with nothing to add.
    const auto pure = structure_of(first_order_stage(1.0, 0.0));
    CHECK(pure.count(BlockKind::sum) == 0);
    CHECK_FALSE(pure.contains("F11"));
    CHECK(min_path_delay(pure, "u", pure.output_signal()) == Delay(1));
}

TEST_CASE("controllable canonical structure has a single input gain") {
    const auto g2 = decompose(testing::default_controller(), {}).g2;
    const auto s = structure_of(controllable_canonical(g2));
    CHECK(count_prefix(s, 'H') == 1);
    CHECK(s.contains("H2"));
    CHECK(s.contains("N"));
    CHECK(s.count(BlockKind::unit_delay) == 2);
}

TEST_CASE("diagonal dynamics give two loops joined only at input and output") {
    Realization r;
    r.f = Eigen::Vector2d(0.5, -0.3).asDiagonal();
    r.h = Eigen::Vector2d(1.0, 2.0);
    r.m = Eigen::RowVector2d(1.0, -1.0);
    r.labels = default_labels(2);
    const auto s = structure_of(r);
    CHECK_FALSE(s.contains("F12"));
    CHECK_FALSE(s.contains("F21"));
    CHECK(min_path_delay(s, "x1", "x2").is_infinite());
    CHECK(min_path_delay(s, "x2", "x1").is_infinite());
    CHECK(min_path_delay(s, "x1", "x1") == Delay(0));
    CHECK(min_path_delay(s, "u", "y") == Delay(1));
}

TEST_CASE("dead states and zero output") {
    Realization r;
    r.f = Eigen::Matrix2d::Zero();
    r.h = Eigen::Vector2d(1.0, 0.0);
    r.m = Eigen::RowVector2d(1.0, 1.0);
    r.labels = default_labels(2);
    const auto s = structure_of(r);
    CHECK(s.contains("x1"));
    CHECK_FALSE(s.contains("x2"));

    r.m = Eigen::RowVector2d(0.0, 0.0);
    CHECK_THROWS_AS((void)structure_of(r), std::invalid_argument);
}

TEST_CASE("augmented-state controller diagram") {
    const auto s = ifp_structure(testing::default_gains());
    CHECK(s.count(BlockKind::unit_delay) == 2);
    CHECK(s.count(BlockKind::gain) == 3);
    CHECK(min_path_delay(s, "u", "mu") == Delay(0));
    CHECK(min_path_delay(s, "x", "mu") == Delay(0));
    CHECK(min_path_delay(s, "x", "u") == Delay(2));
    for (const auto& b : s.blocks())
        CHECK(min_path_delay(s, b.id, b.id) == Delay(0));
    CHECK(min_path_delay(s, "u", "x").is_infinite());
    CHECK_THROWS_AS((void)min_path_delay(s, "x", "nope"), std::out_of_range);
    CHECK_THROWS_AS((void)ifp_structure(OptimalGains{{1.0, 2.0}}), std::invalid_argument);

    // Its behaviour is the delayed controller.
    const auto u = random_input(3, 80);
    const auto y = simulate(s, u);
    const auto h = impulse_response(testing::default_controller(), 80);
    for (std::size_t t = 0; t < u.size(); ++t) {
        double conv = 0.0;
        for (std::size_t k = 0; k <= t; ++k)
            conv += h[k] * u[t - k];
        CHECK(y[t] == doctest::Approx(conv).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("structure simulation matches the state-space recursion") {
    std::mt19937_64 rng(99);
    for (int draw = 0; draw < 10; ++draw) {
        const auto g2 = testing::random_biproper(rng);
        for (const auto& r : {controllable_canonical(g2), observable_canonical(g2),
                              random_general_realization(g2, static_cast<std::uint64_t>(draw))}) {
            const auto u = random_input(static_cast<std::uint64_t>(draw) + 100, 100);
            CHECK(testing::max_abs_diff(simulate(structure_of(r), u), simulate(r, u).output) < 1e-12);
        }
    }
}

TEST_CASE("structure generation is deterministic and loop free") {
    const auto g2 = decompose(testing::default_controller(), {0.7, 1.4, 0.3, 0.1}).g2;
    const auto r = random_general_realization(g2, 12);
    const auto a = structure_of(r);
    const auto b = structure_of(r);
    CHECK(to_text(a) == to_text(b));
    CHECK_NOTHROW((void)a.evaluation_order());
    CHECK(a.count(BlockKind::gain) == 4 + 2 + 2 + 1);
}

TEST_CASE("structure equality ignores gain values and ids") {
    const auto g2 = decompose(testing::default_controller(), {}).g2;
    const auto r1 = random_general_realization(g2, 1);
    const auto r2 = random_general_realization(g2, 2);
    CHECK(same_structure(structure_of(r1), structure_of(r2)));
    CHECK_FALSE(same_structure(structure_of(controllable_canonical(g2)), structure_of(r1)));
    CHECK_FALSE(same_structure(structure_of(controllable_canonical(g2)), structure_of(observable_canonical(g2))));

    SUBCASE("permuting states gives an isomorphic graph") {
        std::mt19937_64 rng(4);
        for (int i = 0; i < 10; ++i) {
            const auto g = testing::random_biproper(rng);
            for (const auto& r : {controllable_canonical(g), observable_canonical(g),
                                  random_general_realization(g, static_cast<std::uint64_t>(i))}) {
                const auto swapped = swap_states(r);
                CHECK(same_structure(structure_of(r), structure_of(swapped)));
            }
        }
    }
    SUBCASE("different sparsity patterns can share a structure") {
        const auto o = observable_canonical(g2);
        const auto swapped = swap_states(o);
        CHECK(o.m != swapped.m);
        CHECK(same_structure(structure_of(o), structure_of(swapped)));
    }
}

TEST_CASE("series composition") {
    const auto g2 = decompose(testing::default_controller(), {}).g2;
    const auto stages = relay_pipeline(controllable_canonical(g2));
    const auto s = series(stages);
    CHECK(s.input_signal() == "g1.u");
    CHECK(s.contains("g2.x1"));
    CHECK(min_path_delay(s, s.input_signal(), s.output_signal()) == Delay(2));
    CHECK_NOTHROW(s.validate());

    // Behaves like the full delayed controller.
    const auto u = random_input(5, 100);
    std::vector<Realization> rs{first_order_stage(1, 0), controllable_canonical(g2), first_order_stage(1, 0)};
    CHECK(testing::max_abs_diff(simulate(s, u), simulate(series(rs), u).output) < 1e-12);

    const std::vector<ControllerStructure> single{stages[1]};
    CHECK(to_text(series(single)) == to_text(stages[1]));

    const std::vector<ControllerStructure> delays{structure_of(first_order_stage(1, 0)),
                                                  structure_of(first_order_stage(1, 0))};
    const auto two = series(delays);
    CHECK(min_path_delay(two, two.input_signal(), two.output_signal()) == Delay(2));

    const std::vector<std::string> names{"a", "b"};
    const auto named = series(delays, names);
    CHECK(named.input_signal() == "a.u");
    CHECK(named.contains("b.x1"));
    CHECK_FALSE(named.contains("b.u"));
    CHECK_THROWS_AS((void)series(std::span<const ControllerStructure>{}), std::invalid_argument);
}

TEST_CASE("validation of hand-built structures") {
    ControllerStructure s;
    s.add_block({"u", BlockKind::input});
    s.add_block({"g", BlockKind::gain, 2.0});
    s.add_block({"a", BlockKind::sum});
    s.add_edge("u", "g");
    s.add_edge("g", "a");
    s.set_output("a");
    CHECK_THROWS_AS(s.validate(), std::invalid_argument); // one-input sum

    ControllerStructure loop;
    loop.add_block({"u", BlockKind::input});
    loop.add_block({"s", BlockKind::sum});
    loop.add_block({"g", BlockKind::gain, 0.5});
    loop.add_edge("u", "s");
    loop.add_edge("g", "s");
    loop.add_edge("s", "g");
    loop.set_output("s");
    CHECK_THROWS_AS(loop.validate(), std::invalid_argument);
    CHECK_THROWS_AS((void)loop.evaluation_order(), std::invalid_argument);

    ControllerStructure bad;
    CHECK_THROWS_AS(bad.add_block({"output", BlockKind::gain, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(bad.add_block({"a b", BlockKind::gain, 1.0}), std::invalid_argument);
    bad.add_block({"u", BlockKind::input});
    CHECK_THROWS_AS(bad.add_block({"u", BlockKind::gain, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(bad.add_edge("u", "missing"), std::out_of_range);

    ControllerStructure unreachable;
    unreachable.add_block({"u", BlockKind::input});
    unreachable.add_block({"d", BlockKind::unit_delay});
    unreachable.add_block({"g", BlockKind::gain, 1.0});
    unreachable.add_edge("d", "g");
    unreachable.add_edge("g", "d");
    unreachable.set_output("g");
    CHECK_THROWS_AS(unreachable.validate(), std::invalid_argument);
}

TEST_CASE("text form round trip and parse errors") {
    const auto g2 = decompose(testing::default_controller(), {0.9, 1.1, 0.2, 0.3}).g2;
    const auto s = series(relay_pipeline(random_general_realization(g2, 3), {0.9, 1.1, 0.2, 0.3}));
    const auto text = to_text(s);
    const auto back = parse(text);
    CHECK(to_text(back) == text);
    CHECK(same_structure(back, s));
    const auto u = random_input(6, 50);
    CHECK(testing::max_abs_diff(simulate(back, u), simulate(s, u)) == 0.0);

    const std::string base = "u input\nk gain 2\nd delay\nu -> k\nk -> d\noutput d\n";
    CHECK_NOTHROW((void)parse(base));
    CHECK_NOTHROW((void)parse(base + "# trailing comment\n"));
    CHECK_THROWS_WITH_AS((void)parse("u input\nk gain\n"), doctest::Contains("line 2"), std::runtime_error);
    CHECK_THROWS_AS((void)parse("u input\nk gain x\nu -> k\noutput k\n"), std::runtime_error);
    CHECK_THROWS_AS((void)parse("u input\nk widget\n"), std::runtime_error);
    CHECK_THROWS_AS((void)parse("u input\nk gain 2\nu -> q\noutput k\n"), std::runtime_error);
    CHECK_THROWS_AS((void)parse("u input\nk gain 2\nu -> k 1\noutput k\n"), std::runtime_error);
    CHECK_THROWS_AS((void)parse("u input\nk gain 2\nu -> k\n"), std::runtime_error);
    CHECK_THROWS_AS((void)parse("u input\nk gain 2\noutput k\n"), std::runtime_error);

    const auto dot = to_dot(s);
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("g2.x1") != std::string::npos);
}
