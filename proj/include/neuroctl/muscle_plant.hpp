#pragma once

#include <span>
#include <vector>

namespace neuroctl {

// First-order muscle: df/dt = f_max / (tau (1 + exp(-r))) - f / tau.
struct MuscleParams {
    double f_max = 60.0; // N
    double tau = 0.02;   // s
};

struct OperatingPoint {
    double r_bar = 0.0; // equilibrium firing rate
    double f_bar = 0.0; // equilibrium force (N)
};

// Linearized continuous-time scalar plant d(delta_f)/dt = a_c delta_f + b_c delta_r.
struct ContinuousPlant {
    double a_c = 0.0;
    double b_c = 0.0;
};

// delta_f(t+1) = a delta_f(t) + b delta_r(t)
struct DiscretePlant {
    double a = 0.0;
    double b = 0.0;
    double ts = 0.0;
};

void validate(const MuscleParams& p);

[[nodiscard]] double equilibrium_force(const MuscleParams& p, double r_bar);

// Operating point on the equilibrium curve for the given firing rate.
[[nodiscard]] OperatingPoint operating_point(const MuscleParams& p, double r_bar);

// Throws std::invalid_argument if op is not an equilibrium of p.
[[nodiscard]] ContinuousPlant linearize(const MuscleParams& p, const OperatingPoint& op);

// Exact zero-order hold.
[[nodiscard]] DiscretePlant discretize(const ContinuousPlant& c, double ts);

// Response from delta_f(0) = 0. The input is zero-padded up to `steps`;
// the result has `steps` samples delta_f(0..steps-1).
[[nodiscard]] std::vector<double> open_loop_sim(const DiscretePlant& plant, std::span<const double> input,
                                                std::size_t steps);

} // namespace neuroctl
