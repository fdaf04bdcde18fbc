#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "neuroctl/delayed_lqr.hpp"
#include "neuroctl/muscle_plant.hpp"
#include "neuroctl/transfer_fn.hpp"

namespace testing {

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = a.size() == b.size() ? 0.0 : INFINITY;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

inline double max_abs(const std::vector<double>& a) {
    double m = 0.0;
    for (double v : a)
        m = std::max(m, std::abs(v));
    return m;
}

// Linearized muscle at r_bar = 1 sampled every 10 ms.
inline neuroctl::DiscretePlant muscle_plant() {
    const neuroctl::MuscleParams p;
    return neuroctl::discretize(neuroctl::linearize(p, neuroctl::operating_point(p, 1.0)), 0.01);
}

inline neuroctl::OptimalGains default_gains() {
    const auto sys = neuroctl::augment(muscle_plant(), 2);
    return neuroctl::solve_delayed_lqr(sys, neuroctl::augment_cost({}, 2)).gains;
}

inline neuroctl::RationalTransferFunction default_controller() { return neuroctl::gains_to_tf(default_gains()); }

// Stable, biproper, second order, no pole-zero cancellation and no
// coefficient that vanishes.
inline neuroctl::RationalTransferFunction random_biproper(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> radius(0.05, 0.9);
    for (;;) {
        std::vector<std::complex<double>> poles;
        if (unit(rng) > 0.0) {
            poles = {unit(rng) * 0.9, unit(rng) * 0.9};
        } else {
            const auto p = std::polar(radius(rng), std::abs(unit(rng)) * 3.0 + 0.1);
            poles = {p, std::conj(p)};
        }
        const double a1 = -(poles[0] + poles[1]).real();
        const double a0 = (poles[0] * poles[1]).real();
        const double b2 = (unit(rng) > 0 ? 1.0 : -1.0) * (0.2 + std::abs(unit(rng)));
        const double b1 = unit(rng) * 2.0;
        const double b0 = unit(rng) * 2.0;
        if (std::min({std::abs(a1), std::abs(a0), std::abs(b1), std::abs(b0)}) < 0.05)
            continue;
        neuroctl::RationalTransferFunction g({b2, b1, b0}, {1.0, a1, a0});
        bool cancels = false;
        for (const auto& p : poles)
            cancels = cancels || std::abs(b2 * p * p + b1 * p + b0) < 0.05;
        // Canonical-form numerator terms must not vanish either.
        if (cancels || std::abs(b0 - b2 * a0) < 0.05 || std::abs(b1 - b2 * a1) < 0.05)
            continue;
        return g;
    }
}

} // namespace testing
