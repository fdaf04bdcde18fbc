#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "neuroctl/transfer_fn.hpp"

namespace neuroctl {

// State-space controller
//   x(t+1) = F x(t) + H u(t)
//   y(t)   = M x(t) + N u(t)
// with one label per state (carried through transforms).
struct Realization {
    Eigen::MatrixXd f;
    Eigen::VectorXd h;
    Eigen::RowVectorXd m;
    double n_ff = 0.0;
    std::vector<std::string> labels;

    [[nodiscard]] Eigen::Index order() const { return f.rows(); }
};

// Throws std::invalid_argument on inconsistent dimensions or labels.
void validate(const Realization& r);

[[nodiscard]] std::vector<std::string> default_labels(Eigen::Index n);

// x(t+1) = eps x(t) + c u(t), y = x
[[nodiscard]] Realization first_order_stage(double c, double eps);

// Second-order proper g2 = (b2 z^2 + b1 z + b0) / (z^2 + a1 z + a0).
// F = [[0, 1], [-a0, -a1]], H = [0; 1], M = [b0 - b2 a0, b1 - b2 a1], N = b2.
[[nodiscard]] Realization controllable_canonical(const RationalTransferFunction& g2);

// Dual of the controllable form: F = [[0, -a0], [1, -a1]], M = [0, 1].
[[nodiscard]] Realization observable_canonical(const RationalTransferFunction& g2);

// (P^-1 F P, P^-1 H, M P, N). Throws std::invalid_argument if |det P| <= 1e-9.
[[nodiscard]] Realization similarity_transform(const Realization& r, const Eigen::MatrixXd& p);

class StructuralZeroError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dense realization: the controllable form transformed by p. Throws
// StructuralZeroError if any entry of F, H, M or N came out (numerically) zero;
// callers retry with another transform.
[[nodiscard]] Realization general_realization(const RationalTransferFunction& g2, const Eigen::MatrixXd& p);

// Seeded well-conditioned transform: entries in [-2, -0.25] U [0.25, 2] and
// condition number below 50.
[[nodiscard]] Eigen::MatrixXd random_transform(std::uint64_t seed, Eigen::Index n = 2);

// Draws transforms from `seed` until general_realization succeeds.
[[nodiscard]] Realization random_general_realization(const RationalTransferFunction& g2, std::uint64_t seed);

// M (zI - F)^-1 H + N via Faddeev-LeVerrier; the denominator is char(F).
[[nodiscard]] RationalTransferFunction tf_of(const Realization& r);

[[nodiscard]] Eigen::MatrixXd controllability_matrix(const Realization& r);
[[nodiscard]] Eigen::MatrixXd observability_matrix(const Realization& r);

// Controllable and observable, judged by relative singular values > 1e-8.
[[nodiscard]] bool is_minimal(const Realization& r);

// Cascade: output of stage i drives stage i+1. Labels are prefixed with the
// corresponding entry of `prefixes` (when given) as "<prefix>.<label>".
[[nodiscard]] Realization series(std::span<const Realization> stages, std::span<const std::string> prefixes = {});

struct RealizationTrace {
    std::vector<double> output;
    std::vector<Eigen::VectorXd> states; // x(t) for t = 0..steps-1
};

// Zero initial state.
[[nodiscard]] RealizationTrace simulate(const Realization& r, std::span<const double> input);

// Stepwise runner for closed-loop use: output() reads y(t) for the current
// state, advance() commits x(t+1).
class RealizationRunner {
public:
    explicit RealizationRunner(Realization r);

    [[nodiscard]] double output(double u) const { return realization_.m.dot(x_) + realization_.n_ff * u; }
    void advance(double u) { x_ = realization_.f * x_ + realization_.h * u; }
    [[nodiscard]] const Eigen::VectorXd& state() const { return x_; }
    [[nodiscard]] const Realization& realization() const { return realization_; }

private:
    Realization realization_;
    Eigen::VectorXd x_;
};

} // namespace neuroctl
