#include "neuroctl/muscle_plant.hpp"

#include <cmath>
#include <stdexcept>

namespace neuroctl {

void validate(const MuscleParams& p) {
    if (!(p.f_max > 0.0) || !std::isfinite(p.f_max))
        throw std::invalid_argument("muscle f_max must be positive");
    if (!(p.tau > 0.0) || !std::isfinite(p.tau))
        throw std::invalid_argument("muscle tau must be positive");
}

double equilibrium_force(const MuscleParams& p, double r_bar) {
    validate(p);
    // exp(-r) overflows to inf for very negative r, which correctly yields 0
    return p.f_max / (1.0 + std::exp(-r_bar));
}

OperatingPoint operating_point(const MuscleParams& p, double r_bar) {
    return {r_bar, equilibrium_force(p, r_bar)};
}

ContinuousPlant linearize(const MuscleParams& p, const OperatingPoint& op) {
    validate(p);
    const double f_eq = equilibrium_force(p, op.r_bar);
    if (std::abs(op.f_bar - f_eq) > 1e-9 * p.f_max)
        throw std::invalid_argument("operating point is not an equilibrium of the muscle model");

    const double e = std::exp(-op.r_bar);
    double slope = 0.0;
    if (std::isfinite(e)) {
        const double denom = 1.0 + e;
        slope = p.f_max * e / (p.tau * denom * denom);
    }
    return {-1.0 / p.tau, slope};
}

DiscretePlant discretize(const ContinuousPlant& c, double ts) {
    if (!(ts > 0.0) || !std::isfinite(ts))
        throw std::invalid_argument("sampling time must be positive");
    const double a = std::exp(c.a_c * ts);
    // (e^{a_c ts} - 1) / a_c, with the a_c -> 0 limit ts
    const double integral = c.a_c == 0.0 ? ts : std::expm1(c.a_c * ts) / c.a_c;
    return {a, integral * c.b_c, ts};
}

std::vector<double> open_loop_sim(const DiscretePlant& plant, std::span<const double> input, std::size_t steps) {
    if (input.size() > steps)
        throw std::invalid_argument("open-loop input is longer than the simulation horizon");
    std::vector<double> out(steps, 0.0);
    double f = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
        out[t] = f;
        const double r = t < input.size() ? input[t] : 0.0;
        f = plant.a * f + plant.b * r;
    }
    return out;
}

} // namespace neuroctl
