#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "neuroctl/muscle_plant.hpp"
#include "neuroctl/transfer_fn.hpp"

namespace neuroctl {

// Plant augmented with a cascade of intended-actuation stages so that the
// delayed problem becomes a standard LQ problem in mu(t):
//
//   chi = [delta_f; gamma_{T-1}; ...; gamma_1; delta_r]
//   chi(t+1) = a_tilde chi(t) + b_tilde mu(t)
struct AugmentedSystem {
    Eigen::MatrixXd a_tilde;
    Eigen::VectorXd b_tilde;
    std::size_t delay_steps = 0;

    [[nodiscard]] Eigen::Index dim() const { return a_tilde.rows(); }
};

struct LqrWeights {
    double q = 1.0;  // state penalty
    double r = 0.01; // input penalty
};

// mu(t) = k0 delta_f + k1 gamma_{T-1} + ... + k_T delta_r
struct OptimalGains {
    std::vector<double> k;

    [[nodiscard]] double k0() const { return k.at(0); }
    [[nodiscard]] double k1() const { return k.at(1); }
    [[nodiscard]] double k2() const { return k.at(2); }
    [[nodiscard]] std::size_t delay_steps() const { return k.size() - 1; }
    [[nodiscard]] Eigen::RowVectorXd row() const;
};

struct LqrSolution {
    OptimalGains gains;
    Eigen::MatrixXd p; // cost-to-go
    std::size_t iterations = 0;
};

class LqrError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RiccatiOptions {
    double tolerance = 1e-12;
    std::size_t max_iterations = 10000;
};

// delay_steps == 0 throws std::invalid_argument.
[[nodiscard]] AugmentedSystem augment(const DiscretePlant& plant, std::size_t delay_steps);

// diag(q, 0, ..., 0, r); the augmented problem has no penalty on mu itself.
[[nodiscard]] Eigen::MatrixXd augment_cost(const LqrWeights& w, std::size_t delay_steps);

// Fixed-point iteration of the zero-input-penalty Riccati recursion from
// P = q_tilde. Throws LqrError on non-convergence or a singular pivot.
[[nodiscard]] LqrSolution solve_delayed_lqr(const AugmentedSystem& sys, const Eigen::MatrixXd& q_tilde,
                                            const RiccatiOptions& options = {});

[[nodiscard]] Eigen::MatrixXd closed_loop_matrix(const AugmentedSystem& sys, const OptimalGains& gains);
[[nodiscard]] double spectral_radius(const Eigen::MatrixXd& m);

// k0 / (z^T - k1 z^{T-1} - ... - k_T). Throws std::invalid_argument when k0 == 0.
[[nodiscard]] RationalTransferFunction gains_to_tf(const OptimalGains& g);

} // namespace neuroctl
