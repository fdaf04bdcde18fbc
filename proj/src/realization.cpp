#include "neuroctl/realization.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace neuroctl {

namespace {

constexpr double kStructuralZeroRel = 1e-10;
constexpr double kMinimalityRel = 1e-8;

struct SecondOrderCoeffs {
    double b2, b1, b0; // numerator
    double a1, a0;     // monic denominator z^2 + a1 z + a0
};

SecondOrderCoeffs second_order(const RationalTransferFunction& g2) {
    if (g2.den_degree() != 2)
        throw std::invalid_argument("canonical realizations here require a second-order transfer function, got " +
                                    g2.to_string());
    std::vector<double> num(3, 0.0);
    std::copy(g2.num().rbegin(), g2.num().rend(), num.rbegin());
    return {num[0], num[1], num[2], g2.den()[1], g2.den()[2]};
}

std::size_t numerical_rank(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0)
        return 0;
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > kMinimalityRel * s(0))
            ++rank;
    return rank;
}

} // namespace

void validate(const Realization& r) {
    const auto n = r.f.rows();
    if (r.f.cols() != n || r.h.size() != n || r.m.size() != n)
        throw std::invalid_argument("realization matrices have inconsistent dimensions");
    if (static_cast<Eigen::Index>(r.labels.size()) != n)
        throw std::invalid_argument("realization needs exactly one label per state");
    if (!r.f.allFinite() || !r.h.allFinite() || !r.m.allFinite() || !std::isfinite(r.n_ff))
        throw std::invalid_argument("realization has non-finite entries");
}

std::vector<std::string> default_labels(Eigen::Index n) {
    std::vector<std::string> out;
    for (Eigen::Index i = 0; i < n; ++i)
        out.push_back("x" + std::to_string(i + 1));
    return out;
}

Realization first_order_stage(double c, double eps) {
    if (c == 0.0)
        throw std::invalid_argument("first-order stage gain must be nonzero");
    Realization r;
    r.f = Eigen::MatrixXd::Constant(1, 1, eps);
    r.h = Eigen::VectorXd::Constant(1, c);
    r.m = Eigen::RowVectorXd::Constant(1, 1.0);
    r.n_ff = 0.0;
    r.labels = default_labels(1);
    return r;
}

Realization controllable_canonical(const RationalTransferFunction& g2) {
    const auto c = second_order(g2);
    Realization r;
    r.f.resize(2, 2);
    r.f << 0.0, 1.0, -c.a0, -c.a1;
    r.h = Eigen::Vector2d(0.0, 1.0);
    r.m.resize(2);
    r.m << c.b0 - c.b2 * c.a0, c.b1 - c.b2 * c.a1;
    r.n_ff = c.b2;
    r.labels = default_labels(2);
    return r;
}

Realization observable_canonical(const RationalTransferFunction& g2) {
    const auto c = second_order(g2);
    Realization r;
    r.f.resize(2, 2);
    r.f << 0.0, -c.a0, 1.0, -c.a1;
    r.h = Eigen::Vector2d(c.b0 - c.b2 * c.a0, c.b1 - c.b2 * c.a1);
    r.m.resize(2);
    r.m << 0.0, 1.0;
    r.n_ff = c.b2;
    r.labels = default_labels(2);
    return r;
}

Realization similarity_transform(const Realization& r, const Eigen::MatrixXd& p) {
    validate(r);
    if (p.rows() != r.order() || p.cols() != r.order())
        throw std::invalid_argument("similarity transform has the wrong dimension");
    if (!(std::abs(p.determinant()) > 1e-9))
        throw std::invalid_argument("similarity transform is singular");
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(p);
    Realization out;
    out.f = lu.solve(r.f * p);
    out.h = lu.solve(r.h);
    out.m = r.m * p;
    out.n_ff = r.n_ff;
    out.labels = r.labels;
    return out;
}

Realization general_realization(const RationalTransferFunction& g2, const Eigen::MatrixXd& p) {
    Realization r = similarity_transform(controllable_canonical(g2), p);
    const double scale = std::max({r.f.cwiseAbs().maxCoeff(), r.h.cwiseAbs().maxCoeff(),
                                   r.m.cwiseAbs().maxCoeff(), std::abs(r.n_ff)});
    const double floor = kStructuralZeroRel * scale;
    const bool has_zero = (r.f.cwiseAbs().array() <= floor).any() || (r.h.cwiseAbs().array() <= floor).any() ||
                          (r.m.cwiseAbs().array() <= floor).any() || std::abs(r.n_ff) <= floor;
    if (has_zero)
        throw StructuralZeroError("transform produced a structural zero; retry with a different transform");
    return r;
}

Eigen::MatrixXd random_transform(std::uint64_t seed, Eigen::Index n) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mag(0.25, 2.0);
    std::bernoulli_distribution negative(0.5);
    Eigen::MatrixXd p(n, n);
    for (;;) {
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                p(i, j) = negative(rng) ? -mag(rng) : mag(rng);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(p);
        const auto& s = svd.singularValues();
        if (s(n - 1) > 0.0 && s(0) / s(n - 1) < 50.0)
            return p;
    }
}

Realization random_general_realization(const RationalTransferFunction& g2, std::uint64_t seed) {
    std::mt19937_64 seeds(seed);
    std::uint64_t draw = seed;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        try {
            return general_realization(g2, random_transform(draw));
        } catch (const StructuralZeroError&) {
            draw = seeds();
        }
    }
    throw StructuralZeroError("no dense realization found; the transfer function may have zero feedthrough");
}

RationalTransferFunction tf_of(const Realization& r) {
    validate(r);
    const auto n = r.order();
    if (n == 0)
        return RationalTransferFunction::constant(r.n_ff);

    // Faddeev-LeVerrier: adj(zI - F) = sum_k B_k z^{n-k}, char(F) = sum c_k z^{n-k}.
    const auto un = static_cast<std::size_t>(n);
    std::vector<double> charpoly(un + 1, 0.0);
    std::vector<double> num(un + 1, 0.0);
    charpoly[0] = 1.0;
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t k = 1; k <= un; ++k) {
        num[k] = r.m.dot(b * r.h);
        const Eigen::MatrixXd fb = r.f * b;
        charpoly[k] = -fb.trace() / static_cast<double>(k);
        b = fb + charpoly[k] * Eigen::MatrixXd::Identity(n, n);
    }
    for (std::size_t k = 0; k <= un; ++k)
        num[k] += r.n_ff * charpoly[k];
    return {std::move(num), std::move(charpoly)};
}

Eigen::MatrixXd controllability_matrix(const Realization& r) {
    validate(r);
    const auto n = r.order();
    Eigen::MatrixXd c(n, n);
    Eigen::VectorXd col = r.h;
    for (Eigen::Index k = 0; k < n; ++k) {
        c.col(k) = col;
        col = r.f * col;
    }
    return c;
}

Eigen::MatrixXd observability_matrix(const Realization& r) {
    validate(r);
    const auto n = r.order();
    Eigen::MatrixXd o(n, n);
    Eigen::RowVectorXd row = r.m;
    for (Eigen::Index k = 0; k < n; ++k) {
        o.row(k) = row;
        row = row * r.f;
    }
    return o;
}

bool is_minimal(const Realization& r) {
    const auto n = static_cast<std::size_t>(r.order());
    if (n == 0)
        return true;
    return numerical_rank(controllability_matrix(r)) == n && numerical_rank(observability_matrix(r)) == n;
}

Realization series(std::span<const Realization> stages, std::span<const std::string> prefixes) {
    if (stages.empty())
        throw std::invalid_argument("series needs at least one stage");
    if (!prefixes.empty() && prefixes.size() != stages.size())
        throw std::invalid_argument("series needs one prefix per stage");

    auto prefixed = [&](std::size_t i) {
        Realization s = stages[i];
        validate(s);
        if (!prefixes.empty())
            for (auto& l : s.labels)
                l = prefixes[i] + "." + l;
        return s;
    };

    Realization acc = prefixed(0);
    for (std::size_t i = 1; i < stages.size(); ++i) {
        const Realization next = prefixed(i);
        const auto na = acc.order();
        const auto nb = next.order();
        Realization out;
        out.f = Eigen::MatrixXd::Zero(na + nb, na + nb);
        out.f.topLeftCorner(na, na) = acc.f;
        out.f.bottomLeftCorner(nb, na) = next.h * acc.m;
        out.f.bottomRightCorner(nb, nb) = next.f;
        out.h.resize(na + nb);
        out.h << acc.h, next.h * acc.n_ff;
        out.m.resize(na + nb);
        out.m << next.n_ff * acc.m, next.m;
        out.n_ff = next.n_ff * acc.n_ff;
        out.labels = acc.labels;
        out.labels.insert(out.labels.end(), next.labels.begin(), next.labels.end());
        acc = std::move(out);
    }
    return acc;
}

RealizationTrace simulate(const Realization& r, std::span<const double> input) {
    RealizationRunner runner(r);
    RealizationTrace trace;
    trace.output.reserve(input.size());
    trace.states.reserve(input.size());
    for (double u : input) {
        trace.states.push_back(runner.state());
        trace.output.push_back(runner.output(u));
        runner.advance(u);
    }
    return trace;
}

RealizationRunner::RealizationRunner(Realization r) : realization_(std::move(r)) {
    validate(realization_);
    x_ = Eigen::VectorXd::Zero(realization_.order());
}

} // namespace neuroctl
