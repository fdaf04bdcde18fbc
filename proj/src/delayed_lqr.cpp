#include "neuroctl/delayed_lqr.hpp"

#include <cmath>
#include <string>

namespace neuroctl {

Eigen::RowVectorXd OptimalGains::row() const {
    Eigen::RowVectorXd out(static_cast<Eigen::Index>(k.size()));
    for (std::size_t i = 0; i < k.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = k[i];
    return out;
}

AugmentedSystem augment(const DiscretePlant& plant, std::size_t delay_steps) {
    if (delay_steps == 0)
        throw std::invalid_argument("delay must be at least one step; the undelayed case is plain LQR");

    const auto n = static_cast<Eigen::Index>(delay_steps + 1);
    AugmentedSystem sys;
    sys.delay_steps = delay_steps;
    sys.a_tilde = Eigen::MatrixXd::Zero(n, n);
    sys.b_tilde = Eigen::VectorXd::Zero(n);

    sys.a_tilde(0, 0) = plant.a;
    sys.a_tilde(0, n - 1) = plant.b;
    // mu enters the first stage; each stage shifts one step toward delta_r.
    sys.b_tilde(1) = 1.0;
    for (Eigen::Index i = 2; i < n; ++i)
        sys.a_tilde(i, i - 1) = 1.0;
    return sys;
}

Eigen::MatrixXd augment_cost(const LqrWeights& w, std::size_t delay_steps) {
    if (!(w.q >= 0.0) || !(w.r >= 0.0) || !std::isfinite(w.q) || !std::isfinite(w.r))
        throw std::invalid_argument("LQR weights must be finite and non-negative");
    if (delay_steps == 0)
        throw std::invalid_argument("delay must be at least one step");
    const auto n = static_cast<Eigen::Index>(delay_steps + 1);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    q(0, 0) = w.q;
    q(n - 1, n - 1) = w.r;
    return q;
}

LqrSolution solve_delayed_lqr(const AugmentedSystem& sys, const Eigen::MatrixXd& q_tilde,
                              const RiccatiOptions& options) {
    const auto n = sys.dim();
    if (q_tilde.rows() != n || q_tilde.cols() != n)
        throw std::invalid_argument("cost matrix dimension does not match the augmented system");

    constexpr double kPivotFloor = 1e-300;
    const Eigen::MatrixXd& a = sys.a_tilde;
    const Eigen::VectorXd& b = sys.b_tilde;

    Eigen::MatrixXd p = q_tilde;
    for (std::size_t iter = 1; iter <= options.max_iterations; ++iter) {
        const double pivot = b.dot(p * b);
        const Eigen::RowVectorXd bpa = b.transpose() * p * a;
        Eigen::MatrixXd next = q_tilde + a.transpose() * p * a;
        if (pivot > kPivotFloor) {
            next -= bpa.transpose() * bpa / pivot;
        } else if (bpa.cwiseAbs().maxCoeff() > kPivotFloor || pivot < -kPivotFloor) {
            throw LqrError("singular Riccati pivot B'PB at iteration " + std::to_string(iter));
        }
        // A zero pivot with B'PA == 0 means mu does not yet influence the
        // cost-to-go; the minimizer is mu = 0 and no correction applies.

        const double change = (next - p).cwiseAbs().maxCoeff();
        p = 0.5 * (next + next.transpose());
        if (change < options.tolerance) {
            const double final_pivot = b.dot(p * b);
            if (!(final_pivot > kPivotFloor))
                throw LqrError("singular Riccati pivot B'PB at the fixed point");
            const Eigen::RowVectorXd k = -(b.transpose() * p * a) / final_pivot;
            LqrSolution sol;
            sol.gains.k.assign(k.data(), k.data() + k.size());
            sol.p = p;
            sol.iterations = iter;
            return sol;
        }
        if (!p.allFinite())
            throw LqrError("Riccati iteration diverged");
    }
    throw LqrError("Riccati iteration did not converge within " + std::to_string(options.max_iterations) +
                   " iterations");
}

Eigen::MatrixXd closed_loop_matrix(const AugmentedSystem& sys, const OptimalGains& gains) {
    if (static_cast<Eigen::Index>(gains.k.size()) != sys.dim())
        throw std::invalid_argument("gain vector does not match the augmented system");
    return sys.a_tilde + sys.b_tilde * gains.row();
}

double spectral_radius(const Eigen::MatrixXd& m) {
    return m.eigenvalues().cwiseAbs().maxCoeff();
}

RationalTransferFunction gains_to_tf(const OptimalGains& g) {
    if (g.k.size() < 2)
        throw std::invalid_argument("gain vector must cover at least one delay stage");
    if (g.k0() == 0.0)
        throw std::invalid_argument("degenerate controller: k0 == 0");
    std::vector<double> den(g.k.size(), 0.0);
    den[0] = 1.0;
    for (std::size_t i = 1; i < g.k.size(); ++i)
        den[i] = -g.k[i];
    return {{g.k0()}, std::move(den)};
}

} // namespace neuroctl
